"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from . import fast_forward as ff
from . import figures
from . import graph_core as gc
from . import lattice_limit as ll
from .verify import Sizes, run_battery

COMMANDS = ("simulate-line", "simulate-lattice", "coeffs", "moments", "ff", "vc", "verify")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: Optional[int] = None
    W: Optional[int] = None
    lazy: bool = False
    K: int = 0
    L: int = 0
    eps: float = 1e-3
    M: int = 512
    output: Optional[str] = None
    graph: Optional[str] = None
    seed: int = 0
    mode: str = "quantum"
    method: str = "sampling"
    n_list: Optional[tuple[int, ...]] = None

    @property
    def steps(self) -> int:
        return 50 if self.n is None else self.n

    @property
    def halfwidth(self) -> int:
        return default_halfwidth(self.steps) if self.W is None else self.W


def default_halfwidth(n: int) -> int:
    return max(1, n, math.ceil(4 * n / 3))


def validate(cfg: RunConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.n is not None and cfg.n < 0:
        raise ConfigError("--n must be nonnegative")
    needs_window = cfg.command in ("simulate-line", "simulate-lattice") or (cfg.command == "coeffs" and cfg.method == "matvec")
    if needs_window and cfg.halfwidth < cfg.steps:
        raise ConfigError(f"--W={cfg.halfwidth} must be >= --n={cfg.steps}")
    if cfg.W is not None and cfg.W < 1:
        raise ConfigError("--W must be >= 1")
    if cfg.command == "ff" and not 0.0 < cfg.eps < 1.0:
        raise ConfigError("--eps must lie in (0, 1)")
    if cfg.command == "moments":
        if cfg.M < 64:
            raise ConfigError("--M must be >= 64")
        if any(n < 1 for n in (cfg.n_list or (cfg.steps,))):
            raise ConfigError("moment degrees must be >= 1")
    if cfg.command == "vc" and cfg.steps < 1:
        raise ConfigError("--n must be >= 1 for vc")
    if cfg.mode not in figures.MODES:
        raise ConfigError(f"--mode must be one of {figures.MODES}")


@contextlib.contextmanager
def _open_output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def simulate_line(cfg: RunConfig) -> int:
    xs, ys = figures.line_profile(cfg.steps, cfg.halfwidth, cfg.mode, use_lazy=cfg.lazy)
    with _open_output(cfg.output) as out:
        figures.write_line_csv(xs, ys, out)
    return EXIT_OK


def simulate_lattice(cfg: RunConfig) -> int:
    coords, grid = figures.lattice_profile(cfg.steps, cfg.halfwidth, cfg.mode, use_lazy=cfg.lazy)
    with _open_output(cfg.output) as out:
        figures.write_lattice_table(coords, grid, out)
    return EXIT_OK


def run_coeffs(cfg: RunConfig) -> int:
    if cfg.method == "matvec":
        table = ll.coeffs_matvec(cfg.steps, cfg.halfwidth)
    else:
        table = ll.coeffs_sampling(cfg.steps)
    with _open_output(cfg.output) as out:
        ll.write_coeff_csv(table, out)
    return EXIT_OK


def run_moments(cfg: RunConfig) -> int:
    ns = list(cfg.n_list or (cfg.steps,))
    reports = ll.moment_convergence_report(cfg.K, cfg.L, ns, cfg.M)
    with _open_output(cfg.output) as out:
        ll.write_moment_csv(reports, out)
    return EXIT_OK


def _load_graph_or(cfg: RunConfig, fallback):
    if cfg.graph is None:
        return fallback()
    with open(cfg.graph) as fh:
        return gc.load_graph(fh)


def run_ff(cfg: RunConfig) -> int:
    n = cfg.steps
    coeffs = ff.line_walk_coeffs(n)
    with _open_output(cfg.output) as out:
        out.write("k,q\n")
        for k, q in zip(coeffs.displacements, coeffs.probs):
            out.write(f"{int(k)},{q:.17g}\n")
    r = ff.truncation_radius(n, cfg.eps, coeffs)
    msg = f"n={n} eps={cfg.eps:g} radius={r} hoeffding={ff.hoeffding_radius(n, cfg.eps):.3f} dropped={coeffs.tail_mass(r):.3e}"
    if cfg.graph is not None:
        P = _load_graph_or(cfg, None)
        v = P.basis(0)
        approx, _ = ff.ff_approx_apply(P, v, n, cfg.eps)
        err = float(((approx - ff.exact_power_apply(P, v, n)) ** 2).sum() ** 0.5)
        msg += f" error={err:.3e}"
    print(msg, file=sys.stderr)
    return EXIT_OK


def run_vc(cfg: RunConfig) -> int:
    P = _load_graph_or(cfg, lambda: gc.build_line(cfg.halfwidth))
    with _open_output(cfg.output) as out:
        out.write("n,worst_margin,x,y,distance,convention,flagged\n")
        for n in range(1, cfg.steps + 1):
            rep = ff.vc_check(P, n)
            x, y = rep.witness
            out.write(f"{n},{rep.worst_margin:.17g},{x},{y},{rep.distance},{rep.convention},{int(rep.flagged)}\n")
    return EXIT_OK


def run_verify(cfg: RunConfig) -> int:
    sizes = Sizes.full(cfg.seed) if cfg.n is None else Sizes.capped(cfg.n, cfg.seed)
    result = run_battery(sizes)
    with _open_output(cfg.output) as out:
        out.write(result.report() + "\n")
    return EXIT_OK if result.passed else EXIT_FAIL


DISPATCH = {
    "simulate-line": simulate_line,
    "simulate-lattice": simulate_lattice,
    "coeffs": run_coeffs,
    "moments": run_moments,
    "ff": run_ff,
    "vc": run_vc,
    "verify": run_verify,
}


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chebwalk", description=__doc__.splitlines()[0])
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--n", type=int, help="steps / degree (default 50; verify: cap on all degrees)")
    p.add_argument("--W", type=int, help="window half-width (default max(n, ceil(4n/3)))")
    p.add_argument("--lazy", action="store_true", help="use the lazy walk (I + P)/2")
    p.add_argument("--K", type=int, default=0)
    p.add_argument("--L", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--M", type=int, default=512, help="quadrature resolution")
    p.add_argument("--graph", help="edge-list file")
    p.add_argument("--output", help="output path (default stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=figures.MODES, default="quantum")
    p.add_argument("--method", choices=("sampling", "matvec"), default="sampling", help="coefficient extractor for coeffs")
    p.add_argument("--n-list", type=_int_list, help="comma-separated degrees for moments")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=args.command,
        n=args.n,
        W=args.W,
        lazy=args.lazy,
        K=args.K,
        L=args.L,
        eps=args.eps,
        M=args.M,
        output=args.output,
        graph=args.graph,
        seed=args.seed,
        mode=args.mode,
        method=args.method,
        n_list=args.n_list,
    )
    try:
        validate(cfg)
        return DISPATCH[cfg.command](cfg)
    except (ConfigError, gc.GraphParseError, OSError) as exc:
        print(f"chebwalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
