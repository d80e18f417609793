"""
Closed-form mixing-time bounds for the Rook's Walk, the cutoff window
constants, and comparisons against exact mixing times.

Real-valued bounds are compared with integer mixing times using a one-step
slack: a lower bound ``b`` is respected when ``t_mix >= ceil(b) - 1`` and an
upper bound ``b`` when ``t_mix <= floor(b) + 1``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .core import ChainParams, DomainError, PreconditionError, render
from .lumped import HorizonExceeded, TVCurve, mixing_time, mixing_times, tv_curve
from .spectral import chi_square_from_zero, eigenvalues, spectral_data, wilson_eigenfunction


def _check_eps(eps):
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    return float(eps)


def wilson_alpha(params: ChainParams) -> Fraction:
    """Second eigenvalue ``1 - n/(d(n-1))``, used as Wilson's ``alpha``."""
    return 1 - Fraction(params.n, params.d * (params.n - 1))


def wilson_lower(params: ChainParams, eps) -> float:
    """Wilson's eigenfunction lower bound evaluated at shell 0.

    Needs ``1/2 < alpha``, i.e. ``d(n-1) > 2n``.
    """
    eps = _check_eps(eps)
    n, d = params.n, params.d
    D = d * (n - 1)
    if not D > 2 * n:
        raise PreconditionError(
            f"Wilson's method needs eigenvalue alpha > 1/2, i.e. d(n-1) > 2n; "
            f"here d(n-1) = {D}, 2n = {2 * n}"
        )
    return (math.log(D / (2 * n)) + math.log((1 - eps) / eps)) / (2 * math.log(D / (D - n)))


def wilson_variance(params: ChainParams, x: int) -> Fraction:
    """Exact ``E_x |Phi(X_1) - Phi(x)|^2`` for the shell chain started at ``x``."""
    n, d = params.n, params.d
    if not 0 <= x <= d:
        raise DomainError(f"shell {x} outside 0..{d}")
    return Fraction(n * n * (d * (n - 1) + x * (2 - n)), d**3 * (n - 1) ** 3)


def wilson_variance_bound(params: ChainParams) -> Fraction:
    """``R = n^2 / (d^2 (n-1)^2)``."""
    n, d = params.n, params.d
    return Fraction(n * n, d * d * (n - 1) ** 2)


def l2_upper_paper(params: ChainParams, eps) -> float:
    """``-(d(n-1)/2n) log((4 eps^2 + 1)^(1/d) - 1)``, as stated."""
    eps = _check_eps(eps)
    n, d = params.n, params.d
    return -(d * (n - 1) / (2 * n)) * math.log(math.expm1(math.log1p(4 * eps * eps) / d))


def l2_upper_orthonormal(params: ChainParams, eps) -> float:
    """L2 bound with ``phi_m(0)^2 = C(d,m) (n-1)^m``.

    Summing ``C(d,m) (n-1)^m e^{-a m}`` gives ``(1 + (n-1) e^{-a})^d - 1``,
    which yields ``-(d(n-1)/2n) log(((4 eps^2 + 1)^(1/d) - 1) / (n-1))``.
    """
    eps = _check_eps(eps)
    n, d = params.n, params.d
    u = math.expm1(math.log1p(4 * eps * eps) / d)
    if not u < n - 1:
        raise DomainError(f"(4 eps^2 + 1)^(1/d) - 1 = {u} must be below n - 1 = {n - 1}")
    return -(d * (n - 1) / (2 * n)) * (math.log(u) - math.log(n - 1))


def kim_bounds(params: ChainParams, eps) -> tuple[float, float]:
    """Spectral-gap bounds ``(d(n-1)/n) log(1/2eps)`` and ``(d(n-1)/n) log(n^d/eps)``."""
    eps = _check_eps(eps)
    n, d = params.n, params.d
    scale = d * (n - 1) / n
    return scale * math.log(1 / (2 * eps)), scale * (d * math.log(n) - math.log(eps))


def mcleman_upper(params: ChainParams, eps) -> int:
    """Path-coupling bound ``ceil(log(d/eps) / log(d(n-1) / ((d-1)(n-1) + 1)))``."""
    eps = _check_eps(eps)
    n, d = params.n, params.d
    if d < 2:
        raise DomainError("the path-coupling bound needs d >= 2")
    return math.ceil(math.log(d / eps) / math.log(d * (n - 1) / ((d - 1) * (n - 1) + 1)))


def cutoff_location(params: ChainParams) -> tuple[float, float]:
    """``(t_c, w)`` with ``t_c = (d(n-1)/2n) log d`` and window ``w = d(n-1)/n``."""
    n, d = params.n, params.d
    w = d * (n - 1) / n
    return w / 2 * math.log(d), w


def cutoff_constants(eps) -> tuple[float, float]:
    """Cutoff window constants ``(c_l, c_u)`` as stated.

    ``c_l`` carries the ``log(d/2) -> log d`` shift as its ``-log(2)/2`` term.
    """
    eps = _check_eps(eps)
    c_l = (math.log((1 - eps) / eps) - 6 - math.log(2)) / 2
    c_u = -0.5 * math.log(math.log1p(4 * eps * eps))
    return c_l, c_u


def cutoff_upper_corrected(eps, n: int) -> float:
    """Upper window constant matching :func:`l2_upper_orthonormal`: ``c_u + log(n-1)/2``."""
    return cutoff_constants(eps)[1] + math.log(n - 1) / 2


def lower_respected(bound: float, t: int) -> bool:
    return t >= math.ceil(bound) - 1


def upper_respected(bound: float, t: int) -> bool:
    return t <= math.floor(bound) + 1


@dataclass
class BoundsReport:
    params: ChainParams
    eps: float
    exact_tmix: int | None
    wilson_lower: float | None
    l2_upper_paper: float
    l2_upper_orthonormal: float | None
    kim_lower: float
    kim_upper: float
    mcleman_upper: int | None
    flags: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["params"] = {"n": self.params.n, "d": self.params.d}
        out["warnings"] = list(self.params.warnings)
        return out


def bounds_report(params: ChainParams, eps, mode: str = "float",
                  max_steps: int = 10**6, exact_tmix: int | None = None) -> BoundsReport:
    """Every bound at ``(n, d, eps)``, each flagged against the exact mixing time."""
    eps_f = _check_eps(eps)
    notes = []
    try:
        wl = wilson_lower(params, eps_f)
    except PreconditionError as exc:
        wl = None
        notes.append(f"wilson_lower: {exc}")
    try:
        orth = l2_upper_orthonormal(params, eps_f)
    except DomainError as exc:
        orth = None
        notes.append(f"l2_upper_orthonormal: {exc}")
    try:
        mc = mcleman_upper(params, eps_f)
    except DomainError as exc:
        mc = None
        notes.append(f"mcleman_upper: {exc}")
    kl, ku = kim_bounds(params, eps_f)
    if exact_tmix is None:
        try:
            exact_tmix = mixing_time(params, eps, mode, max_steps=max_steps)
        except HorizonExceeded as exc:
            notes.append(f"exact_tmix: {exc}")
    flags = {}
    checks = {
        "wilson_lower": (wl, lower_respected),
        "kim_lower": (kl, lower_respected),
        "l2_upper_paper": (l2_upper_paper(params, eps_f), upper_respected),
        "l2_upper_orthonormal": (orth, upper_respected),
        "kim_upper": (ku, upper_respected),
        "mcleman_upper": (mc, upper_respected),
    }
    for name, (value, rule) in checks.items():
        if value is None or exact_tmix is None:
            flags[name] = "not_evaluated"
        else:
            flags[name] = "holds" if rule(value, exact_tmix) else "violated"
    return BoundsReport(params, eps_f, exact_tmix, wl, checks["l2_upper_paper"][0], orth,
                        kl, ku, mc, flags, notes)


def lemma_chain_discrepancy(params: ChainParams, t: int) -> dict:
    """Exact comparison of the two L2 chains at time ``t``.

    ``as_stated`` replaces ``phi_m(0)^2`` by ``C(d, m)``; ``orthonormal`` uses
    the computed ``phi_m(0)^2``.  A chain is valid at ``t`` when its sum
    dominates ``4 d(t)^2``.
    """
    n, d = params.n, params.d
    lam = eigenvalues(params, "exact")
    spec = spectral_data(params, "exact")
    chi, tv = chi_square_from_zero(params, t, "exact")
    four_tv_sq = 4 * tv * tv
    as_stated = sum(comb(d, m) * lam[m] ** (2 * t) for m in range(1, d + 1))
    ortho = sum(spec.phi0_sq[m] * lam[m] ** (2 * t) for m in range(1, d + 1))
    per_m = []
    for m in range(d + 1):
        falling = math.perm(d, m)
        per_m.append({
            "m": m,
            "phi0_sq": render(spec.phi0_sq[m]),
            "binomial": comb(d, m),
            "phi0_sq_le_binomial": spec.phi0_sq[m] <= comb(d, m),
            # weighted_inner(K_m, K_m) / (n^d (n-1)^m)
            "norm_over_n_d_q_m": render(spec.norms_sq[m] / (n - 1) ** m),
            "falling_factorial": falling,
        })
    # which reading of the "(d)_m" symbol matches the computed squared norm
    reads_binomial = all(Fraction(r["norm_over_n_d_q_m"]) == r["binomial"] for r in per_m)
    reads_falling = all(Fraction(r["norm_over_n_d_q_m"]) == r["falling_factorial"] for r in per_m)
    taylor_fail = [m for m in range(1, d + 1)
                   if abs(float(lam[m])) > math.exp(-m * n / (d * (n - 1)))]
    return {
        "n": n, "d": d, "t": t,
        "four_tv_sq": render(four_tv_sq),
        "chi_square": render(chi),
        "as_stated_sum": render(as_stated),
        "orthonormal_sum": render(ortho),
        "as_stated_chain_valid": bool(four_tv_sq <= as_stated),
        "orthonormal_chain_valid": bool(four_tv_sq <= ortho and chi == ortho),
        "phi0_sq_le_binomial_all_m": all(r["phi0_sq_le_binomial"] for r in per_m),
        "norm_symbol_reads_as_binomial": reads_binomial,
        "norm_symbol_reads_as_falling_factorial": reads_falling,
        "taylor_step_fails_for_m": taylor_fail,
        "per_m": per_m,
    }


@dataclass
class CutoffProfile:
    n: int
    d_list: list
    eps_list: list
    tmix: dict  # (d, eps) -> int
    rows: list = field(default_factory=list)

    def ratio(self, d: int, eps) -> float:
        lo, hi = min(eps, 1 - eps), max(eps, 1 - eps)
        return self.tmix[(d, lo)] / self.tmix[(d, hi)]


CUTOFF_COLUMNS = ("n", "d", "eps", "tmix", "t_c", "w", "u_low", "u_high", "ratio", "u")


def cutoff_profile(n: int, d_list, eps_list, mode: str = "float",
                   max_steps: int = 10**7) -> CutoffProfile:
    """Exact mixing times across ``d`` in rescaled window coordinates.

    ``ratio`` is ``t_mix(min(eps, 1-eps)) / t_mix(max(eps, 1-eps)) >= 1``,
    which tends to 1 under cutoff.  ``u_low``/``u_high`` are the window
    constants ``c_l`` and the ``n``-aware upper constant, ``u`` is where
    ``t_mix`` actually falls.
    """
    eps_all = sorted({float(e) for e in eps_list} | {1 - float(e) for e in eps_list})
    tmix = {}
    for d in d_list:
        params = ChainParams(n, d)
        found = mixing_times(params, eps_all, mode, max_steps)
        for e in eps_all:
            tmix[(d, e)] = found[Fraction(e) if mode == "exact" else e]
    prof = CutoffProfile(n, list(d_list), [float(e) for e in eps_list], tmix)
    for d in d_list:
        t_c, w = cutoff_location(ChainParams(n, d))
        for e in prof.eps_list:
            c_l, _ = cutoff_constants(e)
            t = tmix[(d, e)]
            prof.rows.append({
                "n": n, "d": d, "eps": e, "tmix": t, "t_c": t_c, "w": w,
                "u_low": c_l, "u_high": cutoff_upper_corrected(e, n),
                "ratio": prof.ratio(d, e), "u": (t - t_c) / w,
            })
    return prof


def _rescaled(curve: TVCurve, u_grid):
    t_c, w = cutoff_location(curve.params)
    ts = (np.arange(len(curve)) - t_c) / w
    return np.interp(u_grid, ts, np.asarray(curve.values, dtype=float))


def profile_collapse(n: int, d_a: int, d_b: int, u_grid=None) -> float:
    """Largest TV gap between two ``d`` values at matching rescaled time ``u``."""
    if u_grid is None:
        u_grid = np.linspace(-1.0, 2.0, 61)
    curves = []
    for d in (d_a, d_b):
        params = ChainParams(n, d)
        t_c, w = cutoff_location(params)
        curves.append(tv_curve(params, int(math.ceil(t_c + (max(u_grid) + 1) * w)), "float"))
    a, b = (_rescaled(c, u_grid) for c in curves)
    return float(np.abs(a - b).max())


def wilson_variance_bruteforce(params: ChainParams, x: int) -> Fraction:
    """``E |Phi(X_1) - Phi(x)|^2`` by enumerating every full-chain move from a shell-``x`` state."""
    n, d = params.n, params.d
    phi = wilson_eigenfunction(params, "exact")
    state = [2] * x + [1] * (d - x)
    total = Fraction(0)
    for axis in range(d):
        for value in range(1, n + 1):
            if value == state[axis]:
                continue
            new = list(state)
            new[axis] = value
            shell = sum(1 for c in new if c != 1)
            total += (phi[shell] - phi[x]) ** 2
    return total / (d * (n - 1))
