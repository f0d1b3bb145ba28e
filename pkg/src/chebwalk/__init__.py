"""Random walks and discrete-wave quantum walks on graphs through Chebyshev recurrences."""

from .cheb_engine import (
    DenseDilation,
    WavePair,
    cheb_T_apply,
    cheb_U_apply,
    dilation_dense,
    energy,
    wave_evolve,
)
from .fast_forward import (
    LineWalkCoeffs,
    VCReport,
    exact_power_apply,
    ff_approx_apply,
    line_walk_coeffs,
    vc_check,
)
from .graph_core import (
    GraphParseError,
    TransitionMatrix,
    build_cycle,
    build_lattice2d,
    build_line,
    lazy,
    load_graph,
    matvec,
)
from .lattice_limit import (
    CoeffTable,
    MomentReport,
    coeffs_matvec,
    coeffs_sampling,
    gamma_moment,
    limit_moment,
    moment_convergence_report,
    psi,
    theta,
    verify_parseval,
)

__version__ = "0.1.0"
