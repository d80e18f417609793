"""
Chain parameters, numeric modes, Hamming-shell combinatorics and the
stationary distribution of the shell chain.

Two numeric modes are supported everywhere in the package:

* ``"exact"``: values are :class:`fractions.Fraction` (or ``int``), held in
  numpy object arrays.  Used as the oracle.
* ``"float"``: values are float64 numpy arrays.  Used for large ``d``.

A single computation never mixes the two.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np
from scipy.stats import binom

MODES = ("exact", "float")


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class PreconditionError(ValueError):
    """A theorem's hypothesis does not hold for the given parameters."""


class ResourceLimitError(RuntimeError):
    """A brute-force computation would exceed the configured state cap."""


def check_mode(mode):
    if mode not in MODES:
        raise DomainError(f"unknown numeric mode {mode!r}; expected one of {MODES}")
    return mode


@dataclass(frozen=True)
class ChainParams:
    """Board length ``n`` and dimension ``d`` of a Rook's Walk."""

    n: int
    d: int
    warnings: tuple = field(default=(), init=False, compare=False, repr=False)

    def __post_init__(self):
        if isinstance(self.n, bool) or isinstance(self.d, bool):
            raise DomainError("n and d must be integers")
        if int(self.n) != self.n or int(self.d) != self.d:
            raise DomainError("n and d must be integers")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "d", int(self.d))
        if self.n < 2:
            raise DomainError(f"board length n must be >= 3, got {self.n}")
        if self.d < 1:
            raise DomainError(f"dimension d must be >= 1, got {self.d}")
        notes = []
        if self.n == 2:
            notes.append(
                "n = 2: stay rate is identically 0 and the chain is periodic; "
                "results assume n >= 3"
            )
        if self.d == 1:
            notes.append(
                "d = 1: transitivity-based equivalences are only proved for d >= 2"
            )
        object.__setattr__(self, "warnings", tuple(notes))

    @property
    def num_states(self) -> int:
        """Size of the full state space, ``n**d`` as an exact integer."""
        return self.n ** self.d

    @property
    def num_shells(self) -> int:
        return self.d + 1


def shell_size(params: ChainParams, i: int) -> int:
    """Number of states at Hamming distance ``i`` from the all-ones state."""
    if not 0 <= i <= params.d:
        raise DomainError(f"shell index {i} outside 0..{params.d}")
    return comb(params.d, i) * (params.n - 1) ** i


def shell_sizes(params: ChainParams) -> list[int]:
    return [shell_size(params, i) for i in range(params.d + 1)]


def as_vector(values, mode):
    """Build a 1-d vector in the representation used by ``mode``."""
    check_mode(mode)
    if mode == "exact":
        out = np.empty(len(values), dtype=object)
        out[:] = [Fraction(v) for v in values]
        return out
    return np.asarray(values, dtype=float)


def zeros(size, mode):
    if check_mode(mode) == "exact":
        out = np.empty(size, dtype=object)
        out[:] = [Fraction(0)] * size
        return out
    return np.zeros(size)


def mode_of(values) -> str:
    return "exact" if np.asarray(values).dtype == object else "float"


@dataclass(frozen=True, eq=False)
class ShellDistribution:
    """Probability vector over shells ``0..d``."""

    params: ChainParams
    weights: np.ndarray

    def __post_init__(self):
        w = self.weights
        if not isinstance(w, np.ndarray):
            w = np.asarray(w, dtype=object if _is_exact_seq(w) else float)
            if w.dtype == object:
                w = as_vector(w, "exact")
            object.__setattr__(self, "weights", w)
        if w.ndim != 1 or len(w) != self.params.d + 1:
            raise DomainError(
                f"shell distribution needs {self.params.d + 1} weights, got {w.shape}"
            )
        w.setflags(write=False)

    @property
    def mode(self) -> str:
        return mode_of(self.weights)

    def total(self):
        return sum(self.weights) if self.mode == "exact" else float(self.weights.sum())

    def validate(self, atol=1e-12):
        """Raise ``DomainError`` unless weights are nonnegative and sum to one."""
        if any(w < 0 for w in self.weights):
            raise DomainError("negative probability weight")
        total = self.total()
        if self.mode == "exact":
            if total != 1:
                raise DomainError(f"weights sum to {total}, not 1")
        elif abs(total - 1.0) > atol:
            raise DomainError(f"weights sum to {total!r}, not 1")
        return self

    def __getitem__(self, i):
        return self.weights[i]

    def __len__(self):
        return len(self.weights)

    def __eq__(self, other):
        if not isinstance(other, ShellDistribution):
            return NotImplemented
        return self.params == other.params and self.mode == other.mode and bool(
            np.all(self.weights == other.weights)
        )

    def to_list(self):
        return list(self.weights)


def _is_exact_seq(values) -> bool:
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values)


def point_mass(params: ChainParams, shell: int = 0, mode: str = "exact") -> ShellDistribution:
    if not 0 <= shell <= params.d:
        raise DomainError(f"shell index {shell} outside 0..{params.d}")
    w = zeros(params.d + 1, mode)
    w[shell] = Fraction(1) if mode == "exact" else 1.0
    return ShellDistribution(params, w)


def stationary_lumped(params: ChainParams, mode: str = "exact") -> ShellDistribution:
    """Stationary law of the shell chain: shell sizes divided by ``n**d``.

    In float mode this is the Binomial(d, (n-1)/n) pmf, which avoids
    forming ``n**d`` when ``d`` is large.
    """
    check_mode(mode)
    if mode == "exact":
        total = params.num_states
        w = as_vector([Fraction(s, total) for s in shell_sizes(params)], "exact")
    else:
        w = binom.pmf(np.arange(params.d + 1), params.d, (params.n - 1) / params.n)
    return ShellDistribution(params, w)


def tv_distance(a: ShellDistribution, b: ShellDistribution):
    """Total variation distance ``0.5 * sum |a_i - b_i|``."""
    if len(a) != len(b):
        raise DomainError(f"length mismatch: {len(a)} vs {len(b)}")
    if a.mode != b.mode:
        raise DomainError("cannot compare distributions in different numeric modes")
    return tv_vectors(a.weights, b.weights)


def tv_vectors(u, v):
    """TV distance between two raw weight vectors of the same mode."""
    if len(u) != len(v):
        raise DomainError(f"length mismatch: {len(u)} vs {len(v)}")
    if mode_of(u) == "exact":
        return sum(abs(x - y) for x, y in zip(u, v)) / 2
    return 0.5 * float(np.abs(np.asarray(u) - np.asarray(v)).sum())


def render(value) -> str:
    """Lossless text form: ``p/q`` for rationals, ``repr`` for floats."""
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))
