"""
The unprojected Rook's Walk on ``{1..n}^d``.

Exact distributions are numpy arrays of shape ``(n,) * d``; coordinate value
``c`` is stored at index ``c - 1``, so the all-ones state is index
``(0, ..., 0)``.  The flat (mixed-radix) order is numpy's C order.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    ChainParams,
    DomainError,
    ResourceLimitError,
    ShellDistribution,
    as_vector,
    check_mode,
    stationary_lumped,
    tv_vectors,
    zeros,
)
from .lumped import evolve

DEFAULT_CAP = 10**6
CAP_ENV = "ROOKMIX_CAP"
MC_BLOCK = 4096


def resolve_cap(cap: int | None = None) -> int:
    """State cap: explicit argument, then ``$ROOKMIX_CAP``, then the default."""
    if cap is not None:
        return int(cap)
    env = os.environ.get(CAP_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise DomainError(f"{CAP_ENV}={env!r} is not an integer") from None
    return DEFAULT_CAP


def check_cap(params: ChainParams, cap: int | None = None):
    limit = resolve_cap(cap)
    if params.num_states > limit:
        raise ResourceLimitError(
            f"n^d = {params.n}^{params.d} states exceeds the brute-force cap of {limit}"
        )


def hamming_grid(params: ChainParams) -> np.ndarray:
    """Hamming distance from the all-ones state, for every state."""
    n, d = params.n, params.d
    grid = np.zeros((n,) * d, dtype=np.int64)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = n
        grid = grid + (np.arange(n) != 0).reshape(shape)
    return grid


@dataclass(frozen=True, eq=False)
class FullDistribution:
    params: ChainParams
    weights: np.ndarray  # shape (n,) * d

    @property
    def mode(self) -> str:
        return "exact" if self.weights.dtype == object else "float"

    def flat(self) -> np.ndarray:
        return self.weights.reshape(-1)

    def total(self):
        return sum(self.flat()) if self.mode == "exact" else float(self.weights.sum())


def _full_zeros(params, mode):
    return zeros(params.num_states, mode).reshape((params.n,) * params.d)


def full_point_mass(params: ChainParams, state=None, mode: str = "exact",
                    cap: int | None = None) -> FullDistribution:
    """Point mass at ``state`` (coordinates in ``1..n``); default all-ones."""
    check_mode(mode)
    check_cap(params, cap)
    if state is None:
        state = (1,) * params.d
    state = tuple(int(c) for c in state)
    if len(state) != params.d or not all(1 <= c <= params.n for c in state):
        raise DomainError(f"state {state} not in {{1..{params.n}}}^{params.d}")
    w = _full_zeros(params, mode)
    w[tuple(c - 1 for c in state)] = Fraction(1) if mode == "exact" else 1.0
    return FullDistribution(params, w)


def full_uniform(params: ChainParams, mode: str = "exact", cap: int | None = None):
    check_mode(mode)
    check_cap(params, cap)
    w = _full_zeros(params, mode)
    w[...] = Fraction(1, params.num_states) if mode == "exact" else 1.0 / params.num_states
    return FullDistribution(params, w)


def full_from_shells(shell_weights, params: ChainParams, cap: int | None = None):
    """Spread each shell's mass uniformly over the shell."""
    check_cap(params, cap)
    grid = hamming_grid(params)
    counts = np.bincount(grid.reshape(-1), minlength=params.d + 1)
    mode = "exact" if np.asarray(shell_weights).dtype == object else "float"
    w = _full_zeros(params, mode)
    for i, mass in enumerate(shell_weights):
        w[grid == i] = Fraction(mass) / int(counts[i]) if mode == "exact" else mass / counts[i]
    return FullDistribution(params, w)


def full_step_distribution(dist: FullDistribution, cap: int | None = None) -> FullDistribution:
    """One step of the walk, applied without materializing ``P``.

    Moving along ``axis`` sends mass from each state to the ``n - 1`` other
    values on that line, so the inflow is the line total minus the state's
    own mass.
    """
    params = dist.params
    check_cap(params, cap)
    w = dist.weights
    inflow = None
    for axis in range(params.d):
        term = w.sum(axis=axis, keepdims=True) - w
        inflow = term if inflow is None else inflow + term
    scale = params.d * (params.n - 1)
    out = inflow / scale if dist.mode == "float" else inflow * Fraction(1, scale)
    return FullDistribution(params, out)


def shell_projection(dist: FullDistribution) -> ShellDistribution:
    params = dist.params
    grid = hamming_grid(params).reshape(-1)
    flat = dist.flat()
    if dist.mode == "exact":
        sums = [Fraction(0)] * (params.d + 1)
        for i, v in zip(grid, flat):
            sums[i] += v
        return ShellDistribution(params, as_vector(sums, "exact"))
    return ShellDistribution(params, np.bincount(grid, weights=flat, minlength=params.d + 1))


def full_tv_to_uniform(dist: FullDistribution):
    flat = dist.flat()
    if dist.mode == "exact":
        u = Fraction(1, dist.params.num_states)
        return sum(abs(v - u) for v in flat) / 2
    return 0.5 * float(np.abs(flat - 1.0 / dist.params.num_states).sum())


@dataclass(frozen=True)
class LumpingReport:
    params: ChainParams
    mode: str
    rows: tuple  # (t, tv_full, tv_lumped)

    @property
    def max_gap(self):
        return max(abs(a - b) for _, a, b in self.rows)

    @property
    def passed(self) -> bool:
        if self.mode == "exact":
            return all(a == b for _, a, b in self.rows)
        return self.max_gap <= 1e-12


def verify_lumping(params: ChainParams, t_max: int, mode: str = "exact",
                   cap: int | None = None) -> LumpingReport:
    """Compare full-chain and shell-chain TV distances for ``t = 0..t_max``."""
    if t_max < 0:
        raise DomainError("t_max must be >= 0")
    check_cap(params, cap)
    full = full_point_mass(params, mode=mode, cap=cap)
    pi = stationary_lumped(params, mode).weights
    rows = []
    for t, w in evolve(params, mode):
        rows.append((t, full_tv_to_uniform(full), tv_vectors(w, pi)))
        if t == t_max:
            break
        full = full_step_distribution(full, cap)
    return LumpingReport(params, mode, tuple(rows))


def translation(x, y, n: int):
    """The map ``v -> ((v - 1 + (y - x)) mod n) + 1``, applied coordinatewise.

    It sends ``x`` to ``y`` and preserves Hamming distances.
    """
    shift = (np.asarray(y) - np.asarray(x)) % n

    def xi(v):
        return tuple(int(c) for c in (np.asarray(v) - 1 + shift) % n + 1)

    return xi


def transition_probability(z, w, params: ChainParams) -> Fraction:
    """``P(z, w) = 1/(d(n-1))`` when ``z`` and ``w`` differ in one coordinate."""
    diff = sum(1 for a, b in zip(z, w) if a != b)
    return Fraction(1, params.d * (params.n - 1)) if diff == 1 else Fraction(0)


@dataclass(frozen=True)
class TransitivityReport:
    params: ChainParams
    t: int
    reference_tv: object
    start_tvs: tuple  # (start state, tv)
    xi_pairs_checked: int
    xi_failures: int
    mode: str

    @property
    def max_gap(self):
        return max((abs(tv - self.reference_tv) for _, tv in self.start_tvs), default=0)

    @property
    def passed(self) -> bool:
        tv_ok = self.max_gap == 0 if self.mode == "exact" else self.max_gap <= 1e-12
        return tv_ok and self.xi_failures == 0


def _random_state(rng, params):
    return tuple(int(c) for c in rng.integers(1, params.n + 1, size=params.d))


def verify_transitivity(params: ChainParams, t: int, trials: int, rng_seed=0,
                        mode: str = "exact", cap: int | None = None, starts=None,
                        xi_pairs: int = 100) -> TransitivityReport:
    """TV from random starts equals TV from the all-ones state; checks the translation map."""
    if params.d < 2:
        raise DomainError("transitivity is only claimed for d >= 2")
    check_cap(params, cap)
    rng = np.random.default_rng(rng_seed)

    def tv_from(state):
        dist = full_point_mass(params, state, mode, cap)
        for _ in range(t):
            dist = full_step_distribution(dist, cap)
        return full_tv_to_uniform(dist)

    if starts is None:
        starts = [_random_state(rng, params) for _ in range(trials)]
    ref = tv_from(None)
    start_tvs = tuple((tuple(s), tv_from(s)) for s in starts)

    failures = 0
    for k in range(xi_pairs):
        x, y = _random_state(rng, params), _random_state(rng, params)
        xi = translation(x, y, params.n)
        z = _random_state(rng, params)
        if k % 2 == 0:
            # half the pairs are neighbours so that P(z, w) > 0 is exercised
            w = list(z)
            axis = int(rng.integers(params.d))
            w[axis] = (w[axis] - 1 + int(rng.integers(1, params.n))) % params.n + 1
            w = tuple(w)
        else:
            w = _random_state(rng, params)
        if xi(x) != tuple(y):
            failures += 1
        elif transition_probability(z, w, params) != transition_probability(xi(z), xi(w), params):
            failures += 1
    return TransitivityReport(params, t, ref, start_tvs, xi_pairs, failures, mode)


@dataclass(frozen=True)
class ShellHistogram:
    params: ChainParams
    t: int
    samples: int
    counts: np.ndarray

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.samples

    @property
    def stderr(self) -> np.ndarray:
        p = self.frequencies
        return np.sqrt(p * (1 - p) / self.samples)

    def distribution(self) -> ShellDistribution:
        return ShellDistribution(self.params, self.frequencies)


def block_generator(seed, block: int) -> np.random.Generator:
    """Independent Philox stream for trajectory block ``block`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def simulate_states(params: ChainParams, t: int, samples: int, rng_seed=0,
                    start=None) -> np.ndarray:
    """Final states (coordinates ``1..n``) of ``samples`` independent walks.

    Trajectories are processed in blocks of ``MC_BLOCK``; block ``b`` draws
    from its own stream keyed by ``(rng_seed, b)``, so the result does not
    depend on how blocks are scheduled.
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    if t < 0:
        raise DomainError("t must be >= 0")
    n, d = params.n, params.d
    start = np.zeros(d, dtype=np.int64) if start is None else np.asarray(start) - 1
    out = np.empty((samples, d), dtype=np.int64)
    for b, lo in enumerate(range(0, samples, MC_BLOCK)):
        hi = min(lo + MC_BLOCK, samples)
        rng = block_generator(rng_seed, b)
        states = np.tile(start, (hi - lo, 1))
        rows = np.arange(hi - lo)
        for _ in range(t):
            axis = rng.integers(0, d, size=hi - lo)
            offset = rng.integers(1, n, size=hi - lo)
            states[rows, axis] = (states[rows, axis] + offset) % n
        out[lo:hi] = states
    return out + 1


def mc_shell_histogram(params: ChainParams, t: int, samples: int, rng_seed=0,
                       start=None) -> ShellHistogram:
    states = simulate_states(params, t, samples, rng_seed, start)
    shells = (states != 1).sum(axis=1)
    counts = np.bincount(shells, minlength=params.d + 1)
    return ShellHistogram(params, t, samples, counts)
