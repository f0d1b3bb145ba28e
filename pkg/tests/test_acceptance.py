"""Exit-criteria battery at full size.

Each criterion gets one test and one pass/fail line, echoed in the
"acceptance criteria" section of the terminal summary. Tolerances live in
:mod:`chebwalk.verify` and are not relaxed here.
"""

import pytest

from chebwalk import verify

pytestmark = pytest.mark.acceptance

CRITERIA = {
    1: "exact line peaks",
    2: "wave / Chebyshev identity",
    3: "energy conservation",
    4: "unitary dilation blocks",
    5: "binomial-Chebyshev identity",
    6: "fast-forward truncation",
    7: "Varopoulos-Carne bound",
    8: "coefficient cross-check and mass bound",
    9: "Parseval identity",
    10: "limit measure is a probability",
    11: "moment convergence to the limit measure",
    12: "ballistic vs diffusive spreading",
    13: "figure data",
}


@pytest.fixture(scope="module")
def battery(acceptance_lines):
    result = verify.run_battery(verify.Sizes.full())
    for number, title in CRITERIA.items():
        checks = [c for c in result.checks if c.criterion == number]
        ok = all(c.passed for c in checks if c.required)
        acceptance_lines.append(f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}: {title}")
    return result


@pytest.mark.parametrize("number", list(CRITERIA))
def test_criterion(battery, number):
    checks = [c for c in battery.checks if c.criterion == number]
    assert checks, f"criterion {number} produced no checks"
    for c in checks:
        print(c.line())
    failed = [c.line() for c in checks if c.required and not c.passed]
    assert not failed, "\n".join(failed)
