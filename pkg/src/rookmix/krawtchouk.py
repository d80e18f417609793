"""
Krawtchouk polynomials ``K_m(x) = K_{m,N,s}(x)`` with ``N = d`` and ``s = n``.

    K_m(x) = sum_j (-1)^j C(x, j) C(N - x, m - j) (s - 1)^(m - j)

with ``C(x, j)`` the falling-factorial binomial.  At integer shells the
values are integers, so both evaluation routes below are exact:

* ``"direct"``: the alternating sum.
* ``"recurrence"``: the three-term recurrence in ``m``

      (m+1) K_{m+1} = (q N - s x - (s-2) m) K_m - q (N - m + 1) K_{m-1},  q = s-1

  carried out in Python integers.  In float64 this recurrence is unstable
  once ``K_m(x)`` enters its decaying regime, so floats are only formed at
  the end.

Float tables store ``K_m(x) / K_m(0)``, which lies in ``[-1, 1]`` because
``|K_m(x)| <= K_m(0) = C(d, m) (n-1)^m`` for ``n >= 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, log

import numpy as np

from .core import ChainParams, DomainError, check_mode, mode_of


def generalized_binom(x, j: int):
    """``x (x-1) ... (x-j+1) / j!``; equals 1 at ``j = 0``."""
    if j < 0:
        raise DomainError("j must be nonnegative")
    if isinstance(x, float):
        num = 1.0
        for i in range(j):
            num *= x - i
        return num / factorial(j)
    x = Fraction(x)
    num = Fraction(1)
    for i in range(j):
        num *= x - i
    out = num / factorial(j)
    return out.numerator if out.denominator == 1 else out


def _direct(m: int, x, d: int, n: int):
    return sum(
        (-1) ** j * generalized_binom(x, j) * generalized_binom(d - x, m - j) * (n - 1) ** (m - j)
        for j in range(m + 1)
    )


def _direct_int(m: int, x: int, d: int, n: int) -> int:
    # math.comb is the falling-factorial binomial at nonnegative integers
    return sum(
        (-1) ** j * comb(x, j) * comb(d - x, m - j) * (n - 1) ** (m - j)
        for j in range(m + 1)
    )


@lru_cache(maxsize=64)
def _integer_table(n: int, d: int, method: str) -> tuple:
    if method == "direct":
        rows = [tuple(_direct_int(m, x, d, n) for x in range(d + 1)) for m in range(d + 1)]
        return tuple(rows)
    if method != "recurrence":
        raise DomainError(f"unknown evaluation method {method!r}")
    q = n - 1
    rows = [[1] * (d + 1)]
    if d >= 1:
        rows.append([d * q - n * x for x in range(d + 1)])
    for m in range(1, d):
        cur, prev = rows[m], rows[m - 1]
        nxt = []
        for x in range(d + 1):
            num = (q * d - n * x - (n - 2) * m) * cur[x] - q * (d - m + 1) * prev[x]
            val, rem = divmod(num, m + 1)
            assert rem == 0, "Krawtchouk recurrence left a remainder"
            nxt.append(val)
        rows.append(nxt)
    return tuple(tuple(r) for r in rows)


def krawtchouk_eval(m: int, x, params: ChainParams, mode: str = "exact"):
    """Value of ``K_m(x)``.

    Exact mode uses the alternating sum and accepts rational ``x``.  Float
    mode requires an integer shell and runs the recurrence.
    """
    check_mode(mode)
    if not 0 <= m <= params.d:
        raise DomainError(f"degree {m} outside 0..{params.d}")
    if mode == "exact":
        if isinstance(x, int) and 0 <= x <= params.d:
            return _direct_int(m, x, params.d, params.n)
        return _direct(m, x, params.d, params.n)
    if int(x) != x or not 0 <= x <= params.d:
        raise DomainError("float evaluation needs an integer shell in 0..d")
    value = _integer_table(params.n, params.d, "recurrence")[m][int(x)]
    return float(value)


def endpoint(params: ChainParams, m: int) -> int:
    """``K_m(0) = C(d, m) (n-1)^m``."""
    return comb(params.d, m) * (params.n - 1) ** m


@dataclass(frozen=True, eq=False)
class KrawtchoukTable:
    """All ``K_m(x)`` for ``m, x`` in ``0..d``.

    ``values`` holds exact integers (object dtype) in exact mode.  In float
    mode ``normalized`` holds ``K_m(x)/K_m(0)`` and ``log_endpoint`` holds
    ``log K_m(0)``; ``values`` is then their product and may overflow for
    large ``d``.  ``log_abs`` holds ``log |K_m(x)|`` (``-inf`` at zeros),
    taken from the exact integers so it stays finite where ``normalized``
    underflows.
    """

    params: ChainParams
    mode: str
    normalized: np.ndarray
    log_endpoint: np.ndarray
    exact_values: np.ndarray | None = None
    log_abs: np.ndarray | None = None

    @property
    def values(self) -> np.ndarray:
        if self.exact_values is not None:
            return self.exact_values
        with np.errstate(over="ignore"):
            return self.normalized * np.exp(self.log_endpoint)[:, None]

    def row(self, m):
        return self.values[m]


def krawtchouk_table(params: ChainParams, mode: str = "exact", method: str | None = None):
    """Tabulate ``K_m(x)``.  Cached per ``(n, d, method)``."""
    check_mode(mode)
    if method is None:
        method = "direct" if mode == "exact" else "recurrence"
    ints = _integer_table(params.n, params.d, method)
    size = params.d + 1
    ends = [endpoint(params, m) for m in range(size)]
    log_end = np.array([log(e) for e in ends])
    if mode == "exact":
        vals = np.empty((size, size), dtype=object)
        for m in range(size):
            vals[m, :] = ints[m]
        norm = np.empty((size, size), dtype=object)
        for m in range(size):
            norm[m, :] = [Fraction(v, ends[m]) for v in ints[m]]
        vals.setflags(write=False)
        norm.setflags(write=False)
        return KrawtchoukTable(params, mode, norm, log_end, vals)
    norm = np.array([[v / ends[m] for v in ints[m]] for m in range(size)], dtype=float)
    log_abs = np.array([[log(abs(v)) if v else -np.inf for v in row] for row in ints])
    norm.setflags(write=False)
    log_abs.setflags(write=False)
    return KrawtchoukTable(params, mode, norm, log_end, log_abs=log_abs)


def weighted_inner(a, b, params: ChainParams):
    """``sum_i C(d, i) (n-1)^i a(i) b(i)``."""
    d, n = params.d, params.n
    if len(a) != d + 1 or len(b) != d + 1:
        raise DomainError(f"vectors must have length {d + 1}")
    weights = [comb(d, i) * (n - 1) ** i for i in range(d + 1)]
    if mode_of(a) == "exact" and mode_of(b) == "exact":
        return sum(w * x * y for w, x, y in zip(weights, a, b))
    return float(sum(float(w) * float(x) * float(y) for w, x, y in zip(weights, a, b)))


def norm_law(params: ChainParams, m: int) -> int:
    """``<K_m, K_m> = n^d C(d, m) (n-1)^m`` in the unnormalized weight."""
    return params.num_states * endpoint(params, m)


def gram_matrix(params: ChainParams, table: KrawtchoukTable | None = None):
    """Exact matrix of ``weighted_inner(K_m, K_j)``."""
    if table is None:
        table = krawtchouk_table(params, "exact")
    vals = table.values
    size = params.d + 1
    weights = [comb(params.d, i) * (params.n - 1) ** i for i in range(size)]
    weighted = [[w * v for w, v in zip(weights, vals[m])] for m in range(size)]
    out = np.empty((size, size), dtype=object)
    for m in range(size):
        for j in range(m, size):
            s = sum(a * b for a, b in zip(weighted[m], vals[j]))
            out[m, j] = out[j, m] = s
    return out
