"""
Eigen-system of the shell chain built from the Krawtchouk table.

``phi_m = K_m / sqrt(<K_m, K_m>_pi)`` with ``<f, g>_pi = sum_x f(x) g(x) pi(x)``
and ``pi`` the stationary law of the shell chain.  The square roots are
irrational in general, so exact mode never forms ``phi_m`` itself.  Every
exact identity goes through products ``phi_m(x) phi_m(y) = K_m(x) K_m(y) / N_m``
(``N_m`` the squared norm), which are rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .core import (
    ChainParams,
    DomainError,
    as_vector,
    check_mode,
    stationary_lumped,
    tv_vectors,
)
from .krawtchouk import KrawtchoukTable, krawtchouk_table
from .lumped import build_kernel, evolve


def eigenvalues(params: ChainParams, mode: str = "exact") -> np.ndarray:
    """``lambda_m = 1 - m n / (d (n-1))`` for ``m = 0..d``."""
    check_mode(mode)
    n, d = params.n, params.d
    if mode == "exact":
        return as_vector([1 - Fraction(m * n, d * (n - 1)) for m in range(d + 1)], "exact")
    m = np.arange(d + 1, dtype=float)
    return 1.0 - m * n / (d * (n - 1))


def wilson_eigenfunction(params: ChainParams, mode: str = "exact") -> np.ndarray:
    """``Phi(x) = 1 - n x / (d (n-1))``, proportional to ``K_1``, with ``Phi(0) = 1``."""
    check_mode(mode)
    n, d = params.n, params.d
    if mode == "exact":
        return as_vector([1 - Fraction(n * x, d * (n - 1)) for x in range(d + 1)], "exact")
    return 1.0 - np.arange(d + 1) * n / (d * (n - 1))


def _log_stationary(params: ChainParams) -> np.ndarray:
    d, n = params.d, params.n
    return binom.logpmf(np.arange(d + 1), d, (n - 1) / n)


def _exact_sqrt(q: Fraction):
    """Square root of a rational if it is rational, else ``None``."""
    if q < 0:
        return None
    num, den = isqrt(q.numerator), isqrt(q.denominator)
    if num * num == q.numerator and den * den == q.denominator:
        return Fraction(num, den)
    return None


@dataclass(frozen=True, eq=False)
class SpectralData:
    params: ChainParams
    mode: str
    eigenvalues: np.ndarray
    table: KrawtchoukTable
    stationary: np.ndarray
    norms_sq: np.ndarray
    phi0_sq: np.ndarray
    log_norms_sq: np.ndarray

    @property
    def phi(self) -> np.ndarray:
        """Orthonormal eigenfunctions as floats, row ``m`` is ``phi_m``.

        Float-valued in both modes; overflows to ``inf`` for very large ``d``.
        Use :attr:`psi` for a bounded representation.
        """
        shift = self.table.log_endpoint - 0.5 * self.log_norms_sq
        with np.errstate(over="ignore"):
            return np.asarray(self.table.normalized, dtype=float) * np.exp(shift)[:, None]

    @property
    def psi(self) -> np.ndarray:
        """``phi_m(x) sqrt(pi(x))``: an orthogonal matrix, entries in ``[-1, 1]``."""
        log_pi = _log_stationary(self.params)
        if self.table.log_abs is not None:
            logs = self.table.log_abs - 0.5 * self.log_norms_sq[:, None] + 0.5 * log_pi[None, :]
            return np.sign(self.table.normalized) * np.exp(logs)
        shift = (self.table.log_endpoint - 0.5 * self.log_norms_sq)[:, None] + 0.5 * log_pi[None, :]
        return np.asarray(self.table.normalized, dtype=float) * np.exp(shift)

    def phi_product(self, m: int, x: int, y: int):
        """``phi_m(x) phi_m(y)``, exact in exact mode."""
        k = self.table.values
        if self.mode == "exact":
            return Fraction(k[m, x] * k[m, y], self.norms_sq[m])
        r = self.table.normalized
        return float(r[m, x] * r[m, y] * np.exp(2 * self.table.log_endpoint[m] - self.log_norms_sq[m]))

    def gram(self) -> np.ndarray:
        """Matrix of ``<phi_m, phi_j>_pi``."""
        size = self.params.d + 1
        if self.mode == "float":
            psi = self.psi
            return psi @ psi.T
        k, pi = self.table.values, self.stationary
        out = np.empty((size, size), dtype=object)
        for m in range(size):
            weighted = [p * v for p, v in zip(pi, k[m])]
            for j in range(m, size):
                num = sum(a * b for a, b in zip(weighted, k[j]))
                if m == j:
                    val = num / self.norms_sq[m]
                elif num == 0:
                    val = Fraction(0)
                else:
                    root = _exact_sqrt(num * num / (self.norms_sq[m] * self.norms_sq[j]))
                    val = (root if num > 0 else -root) if root is not None else float(
                        num / np.sqrt(float(self.norms_sq[m] * self.norms_sq[j])))
                out[m, j] = out[j, m] = val
        return out

    def transition_row(self, t: int) -> np.ndarray:
        """``P^t(0, .)`` from the spectral expansion."""
        lam = self.eigenvalues
        if self.mode == "exact":
            k = self.table.values
            coef = [k[m, 0] * lam[m] ** t / self.norms_sq[m] for m in range(len(lam))]
            out = [p * sum(c * k[m, y] for m, c in enumerate(coef))
                   for y, p in enumerate(self.stationary)]
            return as_vector(out, "exact")
        log_pi = _log_stationary(self.params)
        r = self.table.normalized
        with np.errstate(divide="ignore"):
            log_lam = t * np.log(np.abs(lam)) if t > 0 else np.zeros_like(lam)
        sign = np.sign(lam) ** t if t > 0 else np.ones_like(lam)
        # coefficient of R_m(y): phi_m(0) phi_m(y) / R_m(y) = K_m(0)^2 / N_m
        log_coef = 2 * self.table.log_endpoint - self.log_norms_sq + log_lam
        terms = np.exp(log_coef[:, None] + log_pi[None, :]) * (sign[:, None] * r)
        return terms.sum(axis=0)


def orthonormalize(params: ChainParams, table: KrawtchoukTable) -> SpectralData:
    """Normalize each ``K_m`` by the square root of its ``pi``-norm."""
    if table.params != params:
        raise DomainError("table built for different parameters")
    mode = table.mode
    pi = stationary_lumped(params, mode).weights
    size = params.d + 1
    if mode == "exact":
        k = table.values
        norms = [sum(p * v * v for p, v in zip(pi, k[m])) for m in range(size)]
        norms_sq = as_vector(norms, "exact")
        phi0 = as_vector([Fraction(k[m, 0] ** 2) / norms[m] for m in range(size)], "exact")
        log_norms = np.log(np.array([float(x) for x in norms]))
    elif table.log_abs is not None:
        # N_m = sum_x pi(x) K_m(x)^2, summed in log space
        log_norms = logsumexp(2 * table.log_abs + _log_stationary(params)[None, :], axis=1)
        # both can overflow for large d; the log fields stay finite
        with np.errstate(over="ignore"):
            norms_sq = np.exp(log_norms)
            phi0 = np.exp(2 * table.log_endpoint - log_norms)
    else:
        r = table.normalized
        log_norms = 2 * table.log_endpoint + np.log((r * r) @ pi)
        norms_sq = np.exp(log_norms)
        phi0 = np.exp(2 * table.log_endpoint - log_norms)
    return SpectralData(params, mode, eigenvalues(params, mode), table, pi,
                        norms_sq, phi0, log_norms)


def spectral_data(params: ChainParams, mode: str = "exact") -> SpectralData:
    return orthonormalize(params, krawtchouk_table(params, mode))


def eigen_residual(params: ChainParams, m: int, mode: str = "exact", table=None):
    """``max_x |(P K_m)(x) - lambda_m K_m(x)|`` divided by ``max_x |K_m(x)|``."""
    if not 0 <= m <= params.d:
        raise DomainError(f"degree {m} outside 0..{params.d}")
    if table is None:
        table = krawtchouk_table(params, mode)
    kernel = build_kernel(params, mode)
    lam = eigenvalues(params, mode)[m]
    if mode == "exact":
        row = as_vector(table.values[m], "exact")
        res = kernel.apply(row) - lam * row
        return max(abs(v) for v in res) / max(abs(v) for v in row)
    row = np.asarray(table.normalized[m], dtype=float)
    res = kernel.apply(row) - lam * row
    return float(np.abs(res).max() / np.abs(row).max())


def _random_function(rng, size, mode):
    if mode == "exact":
        nums = rng.integers(-20, 21, size=size)
        dens = rng.integers(1, 13, size=size)
        return as_vector([Fraction(int(a), int(b)) for a, b in zip(nums, dens)], "exact")
    return rng.standard_normal(size)


def pi_inner(f, g, pi):
    if pi.dtype == object:
        return sum(a * b * p for a, b, p in zip(f, g, pi))
    return float(np.sum(np.asarray(f) * np.asarray(g) * pi))


def self_adjoint_check(params: ChainParams, trials: int = 20, rng_seed=0,
                       mode: str = "exact", pairs=None):
    """Largest ``|<P f, g>_pi - <f, P g>_pi|`` over random (or given) pairs."""
    rng = np.random.default_rng(rng_seed)
    kernel = build_kernel(params, mode)
    pi = stationary_lumped(params, mode).weights
    if pairs is None:
        pairs = []
        for i in range(trials):
            f = _random_function(rng, params.d + 1, mode)
            g = f if i == 0 else _random_function(rng, params.d + 1, mode)
            pairs.append((f, g))
    worst = Fraction(0) if mode == "exact" else 0.0
    for f, g in pairs:
        f, g = as_vector(f, mode), as_vector(g, mode)
        gap = abs(pi_inner(kernel.apply(f), g, pi) - pi_inner(f, kernel.apply(g), pi))
        worst = max(worst, gap)
    return worst


class L2Check(NamedTuple):
    lhs: object
    rhs: object
    four_tv_sq: object

    @property
    def equal(self):
        return self.lhs == self.rhs

    def holds(self, rtol=1e-10):
        if isinstance(self.lhs, Fraction):
            return self.lhs == self.rhs and self.four_tv_sq <= self.lhs
        scale = max(abs(self.lhs), abs(self.rhs), 1e-300)
        return abs(self.lhs - self.rhs) <= rtol * scale and self.four_tv_sq <= self.lhs * (1 + rtol)


def chi_square_from_zero(params: ChainParams, t: int, mode: str = "exact"):
    """``||P^t(0, .)/pi - 1||^2_{2, pi}`` and ``TV`` from direct evolution."""
    pi = stationary_lumped(params, mode).weights
    for s, w in evolve(params, mode):
        if s == t:
            break
    if mode == "exact":
        chi = sum(v * v / p for v, p in zip(w, pi)) - 1
    else:
        chi = float(np.sum(w * w / pi) - 1.0)
    return chi, tv_vectors(w, pi)


def l2_identity_check(params: ChainParams, t: int, mode: str = "exact",
                      spectral: SpectralData | None = None) -> L2Check:
    """Both sides of ``||P^t(0,.)/pi - 1||^2 = sum_{m>=1} phi_m(0)^2 lambda_m^(2t)``."""
    if t < 0:
        raise DomainError("t must be >= 0")
    if spectral is None:
        spectral = spectral_data(params, mode)
    lhs, tv = chi_square_from_zero(params, t, mode)
    lam, phi0 = spectral.eigenvalues, spectral.phi0_sq
    if mode == "exact":
        rhs = sum(phi0[m] * lam[m] ** (2 * t) for m in range(1, params.d + 1))
    else:
        rhs = float(np.sum(phi0[1:] * lam[1:] ** (2 * t)))
    return L2Check(lhs, rhs, 4 * tv * tv)


def kernel_reconstruction(spectral: SpectralData) -> np.ndarray:
    """``sum_m lambda_m phi_m(x) phi_m(y) pi(y)`` as a matrix indexed ``[x, y]``."""
    size = spectral.params.d + 1
    lam, pi = spectral.eigenvalues, spectral.stationary
    if spectral.mode == "exact":
        out = np.empty((size, size), dtype=object)
        for x in range(size):
            for y in range(size):
                out[x, y] = pi[y] * sum(lam[m] * spectral.phi_product(m, x, y)
                                        for m in range(size))
        return out
    phi = spectral.phi
    return (phi.T * lam) @ phi * pi[None, :]
