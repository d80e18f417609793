"""
The Hamming-shell projection of the Rook's Walk as a birth-death chain.

From shell ``x`` the walk moves up with probability ``(d - x)/d``, down with
probability ``x/(d(n-1))`` and stays with probability ``x(n-2)/(d(n-1))``.
Everything here works on length ``d+1`` vectors; no dense matrix is built.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    ChainParams,
    DomainError,
    ShellDistribution,
    as_vector,
    check_mode,
    point_mass,
    stationary_lumped,
    tv_vectors,
)


class HorizonExceeded(RuntimeError):
    """Mixing was not reached within the allowed number of steps."""


@dataclass(frozen=True, eq=False)
class TridiagonalKernel:
    params: ChainParams
    up: np.ndarray
    down: np.ndarray
    stay: np.ndarray

    @property
    def mode(self) -> str:
        return "exact" if self.up.dtype == object else "float"

    def dense(self) -> np.ndarray:
        """Dense ``(d+1) x (d+1)`` matrix, row = current shell.  Tests only."""
        size = self.params.d + 1
        mat = np.zeros((size, size), dtype=self.up.dtype)
        if self.mode == "exact":
            mat[:] = Fraction(0)
        for x in range(size):
            mat[x, x] = self.stay[x]
            if x + 1 < size:
                mat[x, x + 1] = self.up[x]
            if x > 0:
                mat[x, x - 1] = self.down[x]
        return mat

    def apply(self, f):
        """``(P f)(x) = sum_y P(x, y) f(y)`` for a function ``f`` on shells."""
        f = np.asarray(f, dtype=self.up.dtype)
        out = self.stay * f
        out[:-1] = out[:-1] + self.up[:-1] * f[1:]
        out[1:] = out[1:] + self.down[1:] * f[:-1]
        return out

    def push(self, weights):
        """Row-vector product ``weights @ P`` (one step of a distribution)."""
        out = weights * self.stay
        out[1:] = out[1:] + weights[:-1] * self.up[:-1]
        out[:-1] = out[:-1] + weights[1:] * self.down[1:]
        return out


def build_kernel(params: ChainParams, mode: str = "exact") -> TridiagonalKernel:
    check_mode(mode)
    n, d = params.n, params.d
    xs = range(d + 1)
    if mode == "exact":
        up = [Fraction(d - x, d) for x in xs]
        down = [Fraction(x, d * (n - 1)) for x in xs]
        stay = [Fraction(x * (n - 2), d * (n - 1)) for x in xs]
    else:
        x = np.arange(d + 1, dtype=float)
        up, down, stay = (d - x) / d, x / (d * (n - 1)), x * (n - 2) / (d * (n - 1))
    vecs = [as_vector(v, mode) for v in (up, down, stay)]
    for v in vecs:
        v.setflags(write=False)
    return TridiagonalKernel(params, *vecs)


def step(dist: ShellDistribution, kernel: TridiagonalKernel) -> ShellDistribution:
    if dist.params != kernel.params:
        raise DomainError("distribution and kernel built for different parameters")
    if dist.mode != kernel.mode:
        raise DomainError("distribution and kernel use different numeric modes")
    return ShellDistribution(dist.params, kernel.push(dist.weights))


def evolve(params: ChainParams, mode: str = "exact", start: int = 0):
    """Yield ``(t, weights)`` for the chain started at shell ``start``, forever."""
    kernel = build_kernel(params, mode)
    w = point_mass(params, start, mode).weights.copy()
    t = 0
    while True:
        yield t, w
        w = kernel.push(w)
        t += 1


@dataclass(frozen=True)
class TVCurve:
    """Distance to stationarity ``d(t)`` for ``t = 0..t_max``."""

    params: ChainParams
    values: tuple

    @property
    def t_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, t):
        return self.values[t]

    def __len__(self):
        return len(self.values)

    def rows(self):
        return list(enumerate(self.values))

    def is_monotone(self, atol=0) -> bool:
        """Non-increasing, allowing ``atol`` of float roundoff per step."""
        return all(b <= a + atol for a, b in zip(self.values, self.values[1:]))


def tv_curve(params: ChainParams, t_max: int, mode: str = "exact") -> TVCurve:
    """Worst-case TV distance, which is attained from shell 0."""
    if t_max < 0:
        raise DomainError("t_max must be >= 0")
    pi = stationary_lumped(params, mode).weights
    values = []
    for t, w in evolve(params, mode):
        values.append(tv_vectors(w, pi))
        if t == t_max:
            break
    return TVCurve(params, tuple(values))


def mixing_time(params: ChainParams, eps, mode: str = "float", max_steps: int = 10**7,
                initial_horizon: int = 64) -> int:
    """Smallest ``t`` with ``d(t) <= eps``.

    Scans forward; the horizon starts at ``initial_horizon`` and doubles
    until ``max_steps``, after which :class:`HorizonExceeded` is raised.
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if mode == "exact":
        eps = Fraction(eps)
    pi = stationary_lumped(params, mode).weights
    horizon = min(initial_horizon, max_steps)
    for t, w in evolve(params, mode):
        if tv_vectors(w, pi) <= eps:
            return t
        if t >= horizon:
            if horizon >= max_steps:
                raise HorizonExceeded(
                    f"d(t) > {eps} for all t <= {max_steps} at n={params.n}, d={params.d}"
                )
            horizon = min(2 * horizon, max_steps)


def mixing_times(params: ChainParams, eps_list, mode: str = "float",
                 max_steps: int = 10**7) -> dict:
    """Mixing times for several thresholds from a single evolution."""
    targets = sorted({(Fraction(e) if mode == "exact" else float(e)) for e in eps_list},
                     reverse=True)
    for e in targets:
        if not 0 < e < 1:
            raise DomainError(f"eps must lie in (0, 1), got {e}")
    pi = stationary_lumped(params, mode).weights
    found = {}
    pending = list(targets)
    for t, w in evolve(params, mode):
        tv = tv_vectors(w, pi)
        while pending and tv <= pending[0]:
            found[pending.pop(0)] = t
        if not pending:
            return found
        if t >= max_steps:
            raise HorizonExceeded(f"thresholds {pending} not reached by t={max_steps}")


def spectral_tv_curve(params: ChainParams, t_max: int, spectral) -> TVCurve:
    """TV curve from the eigen-expansion of ``P^t(0, .)``.

    Uses ``P^t(0, y) = pi(y) * sum_m phi_m(0) phi_m(y) lambda_m^t`` and the
    identity ``phi_m(0) phi_m(y) = K_m(y)``.  In float mode the terms are
    formed in log space; precision degrades for small ``t`` and large ``d``
    where the expansion cancels heavily.
    """
    if spectral.params != params:
        raise DomainError("spectral data built for different parameters")
    if t_max < 0:
        raise DomainError("t_max must be >= 0")
    values = [tv_vectors(spectral.transition_row(t), spectral.stationary)
              for t in range(t_max + 1)]
    return TVCurve(params, tuple(values))
