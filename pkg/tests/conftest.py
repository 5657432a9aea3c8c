import numpy as np
import pytest

from barriernet.barriers import LaurentSum
from barriernet.grid import build_grid


@pytest.fixture
def grid1d():
    return build_grid(1, [0, 1], 63)


@pytest.fixture
def symmetric_sum():
    return LaurentSum.constant([(5, 1.0), (-7, -1.0)])


def dense_root_oracle(exps, coefs, first=True, lo=1e-8, hi=1e8, points=10**6):
    """First (or last) positive zero of sum c y**n by a plain dense log-grid scan plus brentq."""
    from scipy.optimize import brentq

    exps = np.asarray(exps, dtype=float)
    coefs = np.asarray(coefs, dtype=float)

    def g(y):
        return float(np.sum(coefs * np.power(y, exps)))

    ys = np.geomspace(lo, hi, points)
    # chunk to keep memory flat
    signs = np.empty(points)
    for s in range(0, points, 100_000):
        blk = ys[s : s + 100_000]
        signs[s : s + 100_000] = np.sign(np.sum(coefs[:, None] * np.power(blk[None, :], exps[:, None]), axis=0))
    if first:
        k = int(np.argmax(signs >= 0))
        a, b = ys[k - 1], ys[k]
    else:
        k = int(np.nonzero(signs <= 0)[0][-1])
        a, b = ys[k], ys[k + 1]
    if g(a) == 0:
        return a
    if g(b) == 0:
        return b
    return brentq(g, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


# one summary line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
