"""Command-line front end.

Every subcommand writes one table (CSV with ``# key=value`` metadata lines,
or JSON with a metadata header) to standard output or ``--out``.  Invalid
parameters exit with status 2 and a one-line diagnostic; ``verify`` exits
with status 1 when any check fails.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .core_series import DivergentSeriesError, closed_sum, series_sum
from .frames import (
    ParameterError,
    TruncationSpec,
    alpha,
    alpha_norm_sq,
    beta,
    chain_index_set,
    gamma,
    gram,
    membership_residual,
)
from .io import render

SCHEMAS = {
    "sum": ["k", "E", "r", "n", "l", "closed_re", "closed_im", "series_re", "series_im",
            "series_tail_bound", "terms", "relative_difference"],
    "frame": ["r", "n", "norm_sq", "q_max", "tail_bound", "max_gram_deviation", "max_membership_residual"],
    "frame-coeffs": ["m", "n", "re", "im"],
    "transport": ["k", "epsilon", "r", "n", "f", "delta_r", "delta_n", "asymptote", "gap"],
    "toeplitz-matrix": ["op", "row_r", "row_n", "col_r", "col_n", "re", "im"],
    "toeplitz-weights": ["op", "r", "n", "closed_form", "norm_ratio", "matrix_entry_abs"],
    "toeplitz-conjugation": ["op", "row_r", "row_n", "col_r", "col_n", "deviation", "wrap"],
    "toeplitz-profile": ["op", "n", "d"],
    "sobolev-weights": ["m", "n", "weight"],
    "sobolev-ladder": ["n", "increment", "partial_sum"],
    "sobolev-nonsmooth": ["n", "central", "long"],
    "sobolev-taylor": ["h", "remainder"],
    "general-frequencies": ["m", "n", "label", "f", "closed_form"],
    "general-report": ["key", "value"],
    "verify": ["number", "name", "status", "summary"],
}

_SCHEMA_HELP = "CSV schemas:\n" + "\n".join(f"  {k}: {', '.join(v)}" for k, v in SCHEMAS.items())


class CLIError(Exception):
    pass


def _number(text: str, exact: bool):
    try:
        return Fraction(text) if exact else float(Fraction(text) if "/" in text else text)
    except (ValueError, ZeroDivisionError):
        raise CLIError(f"cannot parse number {text!r}")


def _trunc(args) -> TruncationSpec:
    return TruncationSpec(q_max=args.q_max, tail_tol=args.tail_tol, n_max=args.n_max,
                          m_max=args.m_max, backend=args.backend)


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "format") and not k.startswith("_")}


def _eps(args):
    e = _number(args.epsilon, args.backend == "exact")
    if not 0 <= e < 1:
        raise ParameterError(f"epsilon must lie in [0, 1), got {args.epsilon}")
    return e


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise CLIError(f"--{name.replace('_', '-')} is required for '{args.command}'")


def cmd_sum(args):
    _require(args, "E", "r", "n")
    exact = args.backend == "exact"
    E = _number(args.E, exact)
    l = args.l if args.l is not None else 0
    s = series_sum(args.k, E, args.r, args.n, l, tol=args.tail_tol)
    sval = complex(s.value)
    c = complex(closed_sum(args.k, float(E), args.r, args.n, l)) if args.r < args.k else complex("nan")
    rel = abs(c - sval) / abs(sval) if sval else abs(c)
    row = [args.k, float(E), args.r, args.n, l, c.real, c.imag, sval.real, sval.imag,
           float(s.tail_bound), s.q_used, rel]
    return "sum", [row], None


def cmd_frame(args):
    eps = _eps(args)
    trunc = _trunc(args)
    if args.r is not None or args.n is not None:
        _require(args, "r", "n")
        build = {"alpha": alpha, "beta": beta, "gamma": gamma}[args.kind]
        v = build(args.k, eps, args.t, args.r, args.n, trunc)
        rows = [[m, n, float(np.real(c)), float(np.imag(c))] for (m, n), c in v.items()]
        extra = {"frame": v.to_json()} if args.format == "json" else None
        return "frame-coeffs", rows, extra
    idx = chain_index_set(args.k, args.n_max)
    G = gram(args.k, float(eps), args.t, idx, TruncationSpec(
        q_max=args.q_max, tail_tol=args.tail_tol, n_max=args.n_max, m_max=args.m_max))
    dev = np.max(np.abs(G - np.eye(len(idx))), axis=1)
    m_max = args.m_max if args.m_max is not None else 2 * args.k
    rows = []
    for i, (r, n) in enumerate(idx):
        a = alpha(args.k, eps, args.t, r, n, trunc)
        res = max(abs(complex(membership_residual(args.k, eps, args.t, r, n, M, n, trunc)))
                  for M in range(m_max + 1))
        rows.append([r, n, float(alpha_norm_sq(args.k, float(eps), r, n)), a.q_max,
                     float(a.tail_bound), float(dev[i]), float(res)])
    return "frame", rows, None


def cmd_transport(args):
    from .transport import flatness_residual, frequency, frequency_asymptote, frequency_differences, frequency_gap

    eps = float(_eps(args))
    k = args.k
    diffs = frequency_differences(k, eps, max(args.n_max, 2)) if eps > 0 else None
    rows = []
    for n in range(args.n_max + 1):
        for r in range(k):
            dr = diffs.delta_r[(r, n)] if diffs else 0.0
            dn = (diffs.delta_n[(r, n)] if diffs else 0.0) if n >= 1 else None
            asym = frequency_asymptote(k, eps, r, n) if eps > 0 else 0.0
            gap = frequency_gap(k, eps, r, n) if eps > 0 else 0.0
            rows.append([k, eps, r, n, frequency(k, eps, r, n), dr, dn, asym, gap])
    extra = None
    if args.flatness:
        trunc = _trunc(args)
        extra = {"flatness": [
            {"r": r, "n": n, "residual": flatness_residual(k, eps, args.t, r, n, trunc)}
            for r, n in chain_index_set(k, args.n_max)
        ]}
    return "transport", rows, extra


def cmd_toeplitz(args):
    from .toeplitz import (
        OPERATORS,
        compactness_profile,
        conjugation_residual,
        matrix_entry,
        shift_weight,
        shift_weight_norm_ratio,
        toeplitz_matrix,
    )

    eps = float(_eps(args))
    ops = OPERATORS if args.op == "all" else (args.op,)
    trunc = _trunc(args)
    rows = []
    if args.what == "matrix":
        for op in ops:
            T = toeplitz_matrix(args.k, eps, args.t, op, trunc)
            rows += [[op, *row] for row in T.rows()]
    elif args.what == "weights":
        for op in ops:
            for r, n in chain_index_set(args.k, args.n_max):
                if op == "T2adj" and n == 0:
                    continue
                rows.append([op, r, n, shift_weight(args.k, eps, op, r, n),
                             shift_weight_norm_ratio(args.k, eps, op, r, n),
                             abs(matrix_entry(args.k, eps, 0.0, op, r, n, trunc))])
    elif args.what == "conjugation":
        for op in ops:
            res = conjugation_residual(args.k, eps, op, trunc)
            for (row, col) in sorted(res.deviations, key=lambda rc: (rc[1][1], rc[1][0])):
                wrap = (op == "T1" and col[0] == args.k - 1) or (op == "T1adj" and col[0] == 0)
                rows.append([op, row[0], row[1], col[0], col[1], res.deviations[(row, col)], int(wrap)])
    else:
        for op in ops:
            d = compactness_profile(args.k, eps, op, args.n_max)
            rows += [[op, n, float(v)] for n, v in enumerate(d)]
    return f"toeplitz-{args.what}", rows, None


def cmd_sobolev(args):
    from .sobolev import besov_weight, fit_loglog, hs_ladder, nonsmooth_ratio, taylor_order

    s = args.s_target
    if args.what == "weights":
        m_max = args.m_max if args.m_max is not None else args.n_max
        rows = [[m, n, besov_weight(s, m, n)] for m in range(m_max + 1) for n in range(args.n_max + 1)]
        return "sobolev-weights", rows, None
    eps = float(_eps(args))
    if args.what == "ladder":
        lad = hs_ladder(args.k, eps, s, args.j, args.n_max)
        rows = [[int(n), float(a), float(b)] for n, a, b in zip(lad.n, lad.increments, lad.partial_sums)]
        return "sobolev-ladder", rows, None
    if args.what == "nonsmooth":
        r = args.r if args.r is not None else 0
        lo = max(args.n_min, 1)
        ns = np.unique(np.round(np.logspace(math.log10(lo), math.log10(max(args.n_max, lo + 1)), 25)).astype(int))
        rows = [[int(n), nonsmooth_ratio(args.k, eps, r, int(n), "central"),
                 nonsmooth_ratio(args.k, eps, r, int(n), "long")] for n in ns]
        fit = fit_loglog([x[0] for x in rows], [x[1] for x in rows])
        extra = {"fit": {"slope": fit.slope, "intercept": fit.intercept, "stderr": fit.stderr,
                         "ci95": list(fit.ci95)}}
        return "sobolev-nonsmooth", rows, extra
    hs = [1e-1, 1e-2, 1e-3]
    order, rem = taylor_order(args.k, eps, args.t, hs, s, args.j, _trunc(args))
    return "sobolev-taylor", [[h, v] for h, v in zip(hs, rem)], {"order": order}


def cmd_general(args):
    from .general_monomial import gm_chain_starts, gm_frequency, phase_report, z1z2_frequency_closed

    eps = float(_eps(args))
    l = args.l if args.l is not None else 1
    if args.what == "report":
        rep = phase_report(args.k, l, eps, args.d_max)
        rows = []
        for key, val in rep.items():
            if isinstance(val, dict):
                rows += [[f"{key}.{k2}", v2] for k2, v2 in val.items()]
            else:
                rows.append([key, val])
        return "general-report", rows, {"report": rep}
    m_max = args.m_max if args.m_max is not None else args.n_max
    rows = []
    for st in gm_chain_starts(args.k, l, m_max, args.n_max):
        closed = z1z2_frequency_closed(eps, st.label) if (args.k, l) == (1, 1) else None
        rows.append([st.m, st.n, st.label, gm_frequency(args.k, l, eps, st), closed])
    return "general-frequencies", rows, None


def cmd_verify(args):
    from .verification import run_suite

    results = run_suite()
    rows = [[r.number, r.name, "PASS" if r.passed else "FAIL", r.summary] for r in results]
    args._status = 0 if all(r.passed for r in results) else 1
    return "verify", rows, {"passed": sum(r.passed for r in results), "total": len(results)}


def _emit(args, schema: str, rows, extra) -> str:
    if args.command == "verify" and args.format == "text":
        from .verification import CheckResult, format_report
        return format_report([CheckResult(r[0], r[1], r[2] == "PASS", r[3]) for r in rows])
    if args.format == "json":
        return render(schema, _config(args), SCHEMAS[schema], rows, "json", extra)
    return render(schema, _config(args), SCHEMAS[schema], rows, "csv")


def _common(tail_tol: float = 1e-14, formats=("csv", "json"), default_format="csv"):
    """Shared flags; a fresh parser per subcommand so defaults do not leak between them."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=int, default=2, help="exponent of z1 (default 2)")
    common.add_argument("--l", type=int, default=None, help="exponent of z2 (general) or moment order (sum)")
    common.add_argument("--epsilon", default="0.5", help="perturbation size in [0, 1); fractions like 1/2 allowed")
    common.add_argument("--t", type=float, default=0.0, help="angle on the base circle R/2piZ")
    common.add_argument("--n-max", type=int, default=20, help="largest chain row n")
    common.add_argument("--m-max", type=int, default=None, help="largest z1 exponent where relevant")
    common.add_argument("--q-max", type=int, default=None, help="fixed number of chain terms")
    common.add_argument("--tail-tol", type=float, default=tail_tol, help="truncation tolerance")
    common.add_argument("--backend", choices=("float", "exact"), default="float")
    common.add_argument("--format", choices=formats, default=default_format)
    common.add_argument("--out", default=None, help="output file (default: standard output)")
    return common


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="submodule-perturb",
        description="Frames, transport, Toeplitz compressions and smoothing for <z1^k - eps e^{it}>.",
        epilog=_SCHEMA_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, **common_kw):
        sp = sub.add_parser(name, parents=[_common(**common_kw)], help=help_text, epilog=_SCHEMA_HELP,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.set_defaults(func=func)
        return sp

    sp = add("sum", cmd_sum, "closed form vs direct series of sum_q C(n+r+kq,n) E^q q^l", tail_tol=1e-15)
    sp.add_argument("--E", default=None)
    sp.add_argument("--r", type=int, default=None)
    sp.add_argument("--n", type=int, default=None)

    sp = add("frame", cmd_frame, "frame norms, Gram deviations and membership residuals")
    sp.add_argument("--r", type=int, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--kind", choices=("alpha", "beta", "gamma"), default="beta")

    sp = add("transport", cmd_transport, "frequencies, differences, asymptotes and flatness")
    sp.add_argument("--flatness", action="store_true", help="add flatness residuals (JSON only)")

    sp = add("toeplitz", cmd_toeplitz, "weighted-shift matrices, weights, conjugation, compactness")
    sp.add_argument("--op", choices=("T1", "T1adj", "T2", "T2adj", "all"), default="all")
    sp.add_argument("--what", choices=("matrix", "weights", "conjugation", "profile"), default="weights")

    sp = add("sobolev", cmd_sobolev, "Besov weights, Hilbert-Schmidt ladders, nonsmoothness fits")
    sp.add_argument("--what", choices=("weights", "ladder", "nonsmooth", "taylor"), default="ladder")
    sp.add_argument("--s-target", type=float, default=4.0)
    sp.add_argument("--j", type=int, default=1, help="derivative order")
    sp.add_argument("--r", type=int, default=None)
    sp.add_argument("--n-min", type=int, default=100)

    sp = add("general", cmd_general, "chains and frequencies for z1^k z2^l - eps e^{it}")
    sp.add_argument("--what", choices=("frequencies", "report"), default="frequencies")
    sp.add_argument("--d-max", type=int, default=50)

    add("verify", cmd_verify, "run the acceptance suite", formats=("text", "csv", "json"),
        default_format="text")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._status = 0
    try:
        schema, rows, extra = args.func(args)
        text = _emit(args, schema, rows, extra)
    except DivergentSeriesError as exc:
        print(f"error: divergence: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, CLIError, ValueError, OverflowError) as exc:
        print(f"error: invalid parameters: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return args._status


if __name__ == "__main__":
    sys.exit(main())
