"""Independent oracles shared by the test modules.

Nothing here imports the code paths it is used to check: kernels come from
enumerating board moves, Krawtchouk values from expanding the generating
function, distributions from dense matrix powers.
"""

import itertools
from fractions import Fraction

import numpy as np
import pytest

_ACCEPTANCE = []


def board_states(n, d):
    return list(itertools.product(range(1, n + 1), repeat=d))


def hamming(a, b):
    return sum(1 for x, y in zip(a, b) if x != y)


def enumerated_shell_counts(n, d):
    counts = [0] * (d + 1)
    for s in board_states(n, d):
        counts[hamming(s, (1,) * d)] += 1
    return counts


def counted_shell_kernel(n, d):
    """Shell-to-shell probabilities by enumerating moves from one state per shell."""
    mat = [[Fraction(0)] * (d + 1) for _ in range(d + 1)]
    for x in range(d + 1):
        state = [2] * x + [1] * (d - x)
        for axis in range(d):
            for v in range(1, n + 1):
                if v != state[axis]:
                    new = list(state)
                    new[axis] = v
                    y = sum(1 for c in new if c != 1)
                    mat[x][y] += Fraction(1, d * (n - 1))
    return mat


def vec_mat(v, mat):
    size = len(mat[0])
    return [sum(v[i] * mat[i][j] for i in range(len(v))) for j in range(size)]


def lumped_power_row(n, d, t):
    """``P*^t(0, .)`` by repeated multiplication with the counted kernel."""
    mat = counted_shell_kernel(n, d)
    v = [Fraction(1)] + [Fraction(0)] * d
    for _ in range(t):
        v = vec_mat(v, mat)
    return v


def lumped_tv(n, d, t):
    v = lumped_power_row(n, d, t)
    counts = enumerated_shell_counts(n, d)
    return sum(abs(a - Fraction(c, n**d)) for a, c in zip(v, counts)) / 2


def dense_full_matrix(n, d):
    states = board_states(n, d)
    size = len(states)
    mat = [[Fraction(0)] * size for _ in range(size)]
    p = Fraction(1, d * (n - 1))
    for i, a in enumerate(states):
        for j, b in enumerate(states):
            if hamming(a, b) == 1:
                mat[i][j] = p
    return states, mat


def generating_function_krawtchouk(n, d):
    """Coefficients of ``(1 + (n-1) z)^(d-x) (1 - z)^x``: row ``m``, column ``x``."""
    table = [[0] * (d + 1) for _ in range(d + 1)]
    for x in range(d + 1):
        poly = [1]
        for factor in [[1, n - 1]] * (d - x) + [[1, -1]] * x:
            out = [0] * (len(poly) + 1)
            for i, c in enumerate(poly):
                out[i] += c * factor[0]
                out[i + 1] += c * factor[1]
            poly = out
        for m in range(d + 1):
            table[m][x] = poly[m]
    return table


@pytest.fixture
def oracle():
    class O:
        pass

    o = O()
    for f in (board_states, hamming, enumerated_shell_counts, counted_shell_kernel,
              lumped_power_row, lumped_tv, dense_full_matrix, generating_function_krawtchouk,
              vec_mat):
        setattr(o, f.__name__, staticmethod(f))
    return o


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion; a criterion fails if any of its parts fail."""
    if not _ACCEPTANCE:
        return
    grouped = {}
    for name, outcome in _ACCEPTANCE:
        key = "_".join(name.split("_")[:2])  # test_cNN
        grouped.setdefault(key, []).append((name, outcome))
    terminalreporter.section("acceptance criteria")
    for key, parts in grouped.items():
        ok = all(o == "passed" for _, o in parts)
        failed = [n for n, o in parts if o != "passed"]
        suffix = f"  (failed: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key[6:]}{suffix}")


def as_float(values):
    return np.array([float(v) for v in values])
