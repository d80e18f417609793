"""
Command line entry point: ``rookmix <command> [options]``.

Commands write CSV (with a ``<out>.manifest.json`` sidecar) or a single
JSON object holding ``schema_version``, ``manifest`` and ``results``.  With no
``--out`` the data goes to stdout and, for CSV, the manifest to stderr.
Output contains no timestamps, so identical invocations are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .bounds import (
    CUTOFF_COLUMNS,
    bounds_report,
    cutoff_profile,
    lemma_chain_discrepancy,
)
from .core import ChainParams, DomainError, ResourceLimitError, render
from .full import mc_shell_histogram, resolve_cap, verify_lumping, verify_transitivity
from .krawtchouk import gram_matrix, krawtchouk_table, norm_law
from .lumped import HorizonExceeded, build_kernel, evolve, mixing_times, spectral_tv_curve, tv_curve
from .spectral import (
    eigen_residual,
    kernel_reconstruction,
    l2_identity_check,
    self_adjoint_check,
    spectral_data,
    wilson_eigenfunction,
)

SCHEMA_VERSION = 1
log = logging.getLogger("rookmix")


def _int_list(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def _eps_list(text):
    out = []
    for v in str(text).split(","):
        v = v.strip()
        if v:
            out.append(Fraction(v) if "/" in v else float(v))
    return out


def _common(parser):
    parser.add_argument("--n", type=int, required=True, help="board length (>= 3)")
    parser.add_argument("--d", type=str, required=True, help="dimension, or comma list for cutoff")
    parser.add_argument("--eps", type=str, default="0.25", help="threshold(s), comma separated")
    parser.add_argument("--t-max", type=int, default=None)
    parser.add_argument("--samples", type=int, default=10000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mode", choices=("exact", "float"), default=None)
    parser.add_argument("--out", type=str, default=None, help="output path (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--cap", type=int, default=None,
                        help="brute-force state cap (overrides $ROOKMIX_CAP)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rookmix", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rookmix {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tv-curve", help="distance to stationarity for t = 0..t_max")
    _common(p)
    p.add_argument("--spectral", action="store_true", help="also emit the eigen-expansion path")

    p = sub.add_parser("mixing-time", help="exact mixing time for each eps")
    _common(p)
    p.add_argument("--max-steps", type=int, default=10**7)

    p = sub.add_parser("bounds", help="all bounds against the exact mixing time")
    _common(p)
    p.add_argument("--max-steps", type=int, default=10**7)

    p = sub.add_parser("verify", help="run the lemma-level checks")
    _common(p)
    p.add_argument("--report-discrepancies", action="store_true")
    p.add_argument("--trials", type=int, default=5)

    p = sub.add_parser("cutoff", help="mixing times across d in window coordinates")
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo shell histogram vs exact law")
    _common(p)
    p.add_argument("--t", type=int, required=True, dest="t")
    return parser


def _manifest(args, mode, fmt, extra=None):
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("verbose",)}
    config["mode"] = mode
    config["format"] = fmt
    config["cap"] = resolve_cap(args.cap)
    out = {"command": args.command, "version": __version__, "mode": mode,
           "seed": args.seed, "config": config}
    if extra:
        out.update(extra)
    return out


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(value):
    if isinstance(value, Fraction):
        return render(value)
    if hasattr(value, "item"):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _write(args, fmt, manifest, header=None, rows=None, results=None):
    if fmt == "json":
        if results is None:
            results = {"columns": list(header), "rows": [dict(zip(header, r)) for r in rows]}
        text = _json_text({"schema_version": SCHEMA_VERSION, "manifest": manifest,
                           "results": results})
        _emit(args.out, text)
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([_cell(v) for v in r])
    _emit(args.out, buf.getvalue())
    side = _json_text({"schema_version": SCHEMA_VERSION, "manifest": manifest})
    if args.out:
        _emit(args.out + ".manifest.json", side)
    else:
        sys.stderr.write(side)


def _cell(value):
    if isinstance(value, (Fraction, float, int)) and not isinstance(value, bool):
        return render(value)
    return value


def _emit(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _single_d(args) -> int:
    ds = _int_list(args.d)
    if len(ds) != 1:
        raise DomainError(f"{args.command} takes a single --d, got {args.d!r}")
    return ds[0]


def cmd_tv_curve(args):
    mode = args.mode or "exact"
    params = ChainParams(args.n, _single_d(args))
    t_max = 20 if args.t_max is None else args.t_max
    curve = tv_curve(params, t_max, mode)
    header = ["t", "tv"]
    rows = [[t, v] for t, v in curve.rows()]
    if args.spectral:
        fast = spectral_tv_curve(params, t_max, spectral_data(params, mode))
        header.append("tv_spectral")
        for row, v in zip(rows, fast.values):
            row.append(v)
    fmt = args.format or "csv"
    _write(args, fmt, _manifest(args, mode, fmt, {"warnings": list(params.warnings)}),
           header, rows)
    return 0


def cmd_mixing_time(args):
    mode = args.mode or "float"
    params = ChainParams(args.n, _single_d(args))
    eps = _eps_list(args.eps)
    found = mixing_times(params, eps, mode, args.max_steps)
    rows = [[e, found[Fraction(e) if mode == "exact" else float(e)]] for e in eps]
    fmt = args.format or "csv"
    _write(args, fmt, _manifest(args, mode, fmt, {"warnings": list(params.warnings)}),
           ["eps", "tmix"], rows)
    return 0


def cmd_bounds(args):
    mode = args.mode or "float"
    params = ChainParams(args.n, _single_d(args))
    reports = [bounds_report(params, e, mode, args.max_steps).to_dict()
               for e in _eps_list(args.eps)]
    fmt = args.format or "json"
    if fmt == "csv":
        header = ["n", "d", "eps", "exact_tmix", "wilson_lower", "l2_upper_paper",
                  "l2_upper_orthonormal", "kim_lower", "kim_upper", "mcleman_upper"]
        rows = [[r["params"]["n"], r["params"]["d"]] + [r[k] for k in header[2:]]
                for r in reports]
        rows = [["" if v is None else v for v in row] for row in rows]
        _write(args, fmt, _manifest(args, mode, fmt), header, rows)
    else:
        _write(args, fmt, _manifest(args, mode, fmt), results={"reports": reports})
    return 0


def _check(name, fn):
    try:
        passed, detail = fn()
        status = "pass" if passed else "fail"
    except ResourceLimitError as exc:
        status, detail = "skipped", {"reason": str(exc)}
    except Exception as exc:  # a crashing check is a failed check
        log.exception("check %s crashed", name)
        status, detail = "fail", {"error": f"{type(exc).__name__}: {exc}"}
    return {"name": name, "status": status, "detail": detail}


def run_checks(params: ChainParams, mode: str, t_max: int, trials: int, seed: int,
               cap=None) -> list:
    """Lemma-level checks used by ``verify``; each returns a JSON-ready record."""
    checks = []

    def lumping():
        rep = verify_lumping(params, t_max, mode, cap)
        return rep.passed, {"max_gap": rep.max_gap,
                            "rows": [[t, a, b] for t, a, b in rep.rows]}

    def transitivity():
        if params.d < 2:
            return True, {"note": "d < 2: transitivity not claimed"}
        rep = verify_transitivity(params, min(t_max, 3), trials, seed, mode, cap)
        return rep.passed, {"max_gap": rep.max_gap, "reference_tv": rep.reference_tv,
                            "xi_pairs_checked": rep.xi_pairs_checked,
                            "xi_failures": rep.xi_failures}

    spec = spectral_data(params, mode)
    table = spec.table

    def residuals():
        res = [eigen_residual(params, m, mode, table) for m in range(params.d + 1)]
        worst = max(res)
        ok = worst == 0 if mode == "exact" else worst <= 1e-10
        return ok, {"max_residual": worst}

    def orthogonality():
        gram = spec.gram()
        size = params.d + 1
        if mode == "exact":
            ok = all(gram[i, j] == (1 if i == j else 0) for i in range(size) for j in range(size))
            return ok, {"identity": ok}
        err = float(np.abs(gram - np.eye(size)).max())
        return err <= 1e-10, {"max_error": err}

    def norms():
        if mode != "exact":
            return True, {"note": "exact-mode check"}
        gram = gram_matrix(params, krawtchouk_table(params, "exact"))
        ok = all(gram[m, m] == norm_law(params, m) for m in range(params.d + 1))
        return ok, {"law": "weighted_inner(K_m, K_m) = n^d C(d,m) (n-1)^m"}

    def l2():
        bad = []
        for t in range(t_max + 1):
            chk = l2_identity_check(params, t, mode, spec)
            if not chk.holds():
                bad.append({"t": t, "lhs": chk.lhs, "rhs": chk.rhs})
        zero_sum = sum(spec.phi0_sq[1:])
        ok_sum = (zero_sum == params.num_states - 1) if mode == "exact" else \
            abs(zero_sum - (params.num_states - 1)) <= 1e-9 * params.num_states
        return not bad and ok_sum, {"failures": bad, "sum_phi0_sq": zero_sum}

    def adjoint():
        worst = self_adjoint_check(params, trials, seed, mode)
        return (worst == 0 if mode == "exact" else worst <= 1e-12), {"max_asymmetry": worst}

    def reconstruction():
        if mode != "exact" or params.d > 15:
            return True, {"note": "exact-mode check for d <= 15"}
        rec, dense = kernel_reconstruction(spec), build_kernel(params, "exact").dense()
        return bool((rec == dense).all()), {}

    def wilson_pair():
        phi = wilson_eigenfunction(params, mode)
        kern = build_kernel(params, mode)
        alpha = spec.eigenvalues[1]
        res = kern.apply(phi) - alpha * phi
        worst = max(abs(v) for v in res)
        return (worst == 0 if mode == "exact" else worst <= 1e-12), {"max_residual": worst}

    for name, fn in [("lumping_equivalence", lumping), ("transitivity", transitivity),
                     ("eigen_residuals", residuals), ("orthonormality", orthogonality),
                     ("krawtchouk_norm_law", norms), ("l2_identity", l2),
                     ("self_adjointness", adjoint), ("kernel_reconstruction", reconstruction),
                     ("wilson_eigenpair", wilson_pair)]:
        checks.append(_check(name, fn))
    return checks


def cmd_verify(args):
    mode = args.mode or "exact"
    params = ChainParams(args.n, _single_d(args))
    t_max = 10 if args.t_max is None else args.t_max
    checks = run_checks(params, mode, t_max, args.trials, args.seed, args.cap)
    summary = {s: sum(1 for c in checks if c["status"] == s) for s in ("pass", "fail", "skipped")}
    results = {"params": {"n": params.n, "d": params.d}, "warnings": list(params.warnings),
               "checks": checks, "summary": summary}
    if args.report_discrepancies:
        disc = {"lemma_chain_t1": lemma_chain_discrepancy(params, 1)}
        bnds = []
        for e in _eps_list(args.eps):
            try:
                bnds.append(bounds_report(params, e, "float").to_dict())
            except HorizonExceeded as exc:
                bnds.append({"eps": e, "error": str(exc)})
        disc["bounds"] = bnds
        results["discrepancies"] = disc
    _write(args, "json", _manifest(args, mode, "json"), results=results)
    return 0 if summary["fail"] == 0 else 1


def cmd_cutoff(args):
    mode = args.mode or "float"
    prof = cutoff_profile(args.n, _int_list(args.d), _eps_list(args.eps), mode)
    rows = [[r[c] for c in CUTOFF_COLUMNS] for r in prof.rows]
    fmt = args.format or "csv"
    _write(args, fmt, _manifest(args, mode, fmt), list(CUTOFF_COLUMNS), rows)
    return 0


def cmd_simulate(args):
    mode = args.mode or "float"
    params = ChainParams(args.n, _single_d(args))
    hist = mc_shell_histogram(params, args.t, args.samples, args.seed)
    for t, w in evolve(params, mode):
        if t == args.t:
            break
    freq, se = hist.frequencies, hist.stderr
    rows = []
    for i in range(params.d + 1):
        p = w[i]
        sigma = (float(p) * (1 - float(p)) / args.samples) ** 0.5
        z = (freq[i] - float(p)) / sigma if sigma > 0 else 0.0
        rows.append([i, int(hist.counts[i]), float(freq[i]), p, float(se[i]), z])
    fmt = args.format or "csv"
    _write(args, fmt, _manifest(args, mode, fmt),
           ["shell", "count", "freq", "exact", "stderr", "z"], rows)
    return 0


COMMANDS = {
    "tv-curve": cmd_tv_curve,
    "mixing-time": cmd_mixing_time,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
    "cutoff": cmd_cutoff,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (DomainError, ValueError) as exc:
        print(f"rookmix: error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"rookmix: error: {exc}", file=sys.stderr)
        return 3
    except HorizonExceeded as exc:
        print(f"rookmix: error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"rookmix: error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
