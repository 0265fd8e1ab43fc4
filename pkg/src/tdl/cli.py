"""Command-line front end: one subcommand per computation, JSON or CSV out."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from .errors import DomainError, FormatError, TooLarge, UnsupportedKind

SUBCOMMANDS = ("eigen1", "torus-scan", "weil-check", "ap", "set-s", "bc-sim", "density")


class UsageError(DomainError):
    code = "USAGE"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"expected integers, got {text!r}") from None


def _group(name: str, ell: int, N: int = 1, matrices: str | None = None):
    from .groups import GroupModelSpec, parse_matrices

    if matrices:
        with open(matrices, encoding="ascii") as fh:
            n, mod, mats = parse_matrices(fh.read())
        if mod != ell:
            raise FormatError(f"matrix file is over F_{mod}, not F_{ell}")
        return GroupModelSpec.explicit(mats, ell, N)
    name = name.lower()
    if name.startswith("gl") and name[2:].isdigit():
        return GroupModelSpec.gl(int(name[2:]), ell, N)
    if name.startswith("gsp") and name[3:].isdigit():
        return GroupModelSpec.gsp(int(name[3:]), ell, N)
    raise UnsupportedKind(f"unknown group {name!r}; use glN, gspN or --matrices")


def _matrix(text: str | None, n: int, ell: int):
    from .ff import FpMatrix

    if text is None:
        return FpMatrix.identity(n, ell)
    vals = _int_list(text)
    if len(vals) != n * n:
        raise UsageError(f"matrix needs {n * n} entries, got {len(vals)}")
    return FpMatrix.from_flat(vals, n, ell)


def _curve(args):
    from .frobenius import CurveSpec

    return CurveSpec(args.a, args.b)


def _prime_set(args):
    from .frobenius import PrimeSetSpec, build_S

    spec = PrimeSetSpec(
        _curve(args), args.N, args.witness, kappa_min=args.kappa,
        modulus_m=args.modulus, cutoff_X=args.xmax, d_C=args.dC,
    )
    return spec, build_S(spec)


# ---------------------------------------------------------------------------
# subcommands: each returns (json-able dict, csv header, csv rows)


def cmd_eigen1(args):
    from .groups import CosetSpec, count_eigen1, target_order

    spec = _group(args.group, args.ell, 1, args.matrices)
    target = spec if args.coset is None else CosetSpec(spec, _matrix(args.coset, spec.dim, args.ell))
    count = count_eigen1(target, args.method, args.budget)
    order = target_order(target)
    ratio = Fraction(count, order)
    out = {
        "group": spec.kind.lower() + str(spec.dim), "ell": args.ell, "method": args.method,
        "count": count, "order": order, "ratio": str(ratio),
        "ratio_ge_half_inverse_ell": ratio >= Fraction(1, 2 * args.ell),
    }
    return out, ["group", "ell", "count", "order", "ratio"], [[out["group"], args.ell, count, order, out["ratio"]]]


def cmd_torus_scan(args):
    from .tori import diagonal_torus, enumerate_split_tori, scan_W_variety, union_lower_bound

    spec = _group(args.group, args.ell)
    B = _matrix(args.B, spec.dim, args.ell)
    if args.all_tori:
        tori = enumerate_split_tori(spec)
    else:
        tori = [diagonal_torus(spec)]
    reports = [scan_W_variety(B, args.N, t, args.budget) for t in tori]
    out = {
        "ell": args.ell, "N": args.N, "B": [list(r) for r in B.rows],
        "tori": [
            dict(r.to_dict(), conjugator=[list(row) for row in t.conjugator.rows])
            for t, r in zip(tori, reports)
        ],
    }
    for d in out["tori"]:
        d.pop("representative_B")
    if args.union:
        u = union_lower_bound(B, args.N, spec)
        out["union"] = vars(u)
    header = ["torus", "w_count", "regular_count", "irregular_in_W", "degree_d"]
    rows = [[i, r.w_count, r.regular_count, r.irregular_in_W, r.degree_d] for i, r in enumerate(reports)]
    return out, header, rows


def cmd_weil_check(args):
    from .weil import PolySystem, check_weil_inequality, default_corpus, parse_poly

    if args.corpus:
        from .ff import primes_up_to

        results = []
        for entry in default_corpus():
            for q in primes_up_to(args.qmax):
                rep = check_weil_inequality(entry.system(q), entry.two_sided(q), args.budget)
                results.append(dict(rep.to_dict(), name=entry.name))
        out = {"all_hold": all(r["holds"] for r in results), "results": results}
        rows = [[r["name"], r["q"], r["count"], r["deviation"], r["holds"]] for r in results]
        return out, ["name", "q", "count", "deviation", "holds"], rows
    if not args.poly:
        raise UsageError("give --poly (repeatable) or --corpus")
    if args.q is None or args.dim is None or args.m is None:
        raise UsageError("--q, --dim and --m are required with --poly")
    polys = [parse_poly(p) for p in args.poly]
    n = len(polys[0][0][1])
    sys_ = PolySystem(n, args.q, tuple(tuple(p) for p in polys), args.dim, args.m)
    rep = check_weil_inequality(sys_, args.two_sided, args.budget)
    out = rep.to_dict()
    return out, ["q", "count", "main_term", "deviation", "holds"], [[rep.q, rep.count, rep.main_term, rep.deviation, rep.holds]]


def cmd_ap(args):
    from .frobenius import ApCache, ap_table

    curve = _curve(args)
    cache = ApCache(args.cache, curve) if args.cache else None
    recs = ap_table(curve, args.pmax, cache)
    out = {"curve": [curve.a, curve.b], "discriminant": curve.discriminant,
           "table": [{"p": r.p, "a_p": r.a_p} for r in recs]}
    return out, ["p", "a_p"], [[r.p, r.a_p] for r in recs]


def cmd_set_s(args):
    from .frobenius import density_estimate

    spec, S = _prime_set(args)
    dens = density_estimate(S, args.xmax)
    out = {"S": S, "size": len(S), "d_C": spec.target_roots(), "density": str(dens), "density_float": float(dens)}
    return out, ["ell"], [[ell] for ell in S]


def _gl2_models(S):
    from .groups import GroupModelSpec
    from .simulate import event_model

    return [event_model(GroupModelSpec.gl(2, ell)) for ell in S]


def cmd_bc_sim(args):
    from .simulate import all_pair_chi_square, run_bc_trials

    _, S = _prime_set(args)
    if not S:
        raise DomainError("the prime set is empty")
    rep = run_bc_trials(_gl2_models(S), args.trials, args.seed, args.jobs)
    out = rep.to_dict()
    if args.chi_square:
        tests = all_pair_chi_square(rep)
        out["chi_square"] = [
            {"pair": list(pair), "statistic": r.statistic, "degenerate": r.degenerate, "passes": r.passes}
            for pair, r in tests
        ]
    return out, ["ell", "p_exact", "empirical_freq"], sorted(rep.csv_rows())


def cmd_density(args):
    from .ff import primes_up_to
    from .simulate import divergence_profile

    if args.all_primes:
        S = [ell for ell in primes_up_to(args.xmax)]
    else:
        _, S = _prime_set(args)
    models = _gl2_models(S)
    prof = divergence_profile(models)
    rows = [[p.ell, str(p.prob_sum), str(p.harmonic_sum), p.prob_sum >= p.harmonic_sum / 2] for p in prof]
    out = {
        "profile": [
            {"ell": p.ell, "prob_sum": str(p.prob_sum), "harmonic_sum": str(p.harmonic_sum),
             "dominates_half": p.prob_sum >= p.harmonic_sum / 2}
            for p in prof
        ],
        # observed only; the constant in the lower bound p_ell >= c / ell is not proved here
        "empirical_min_ell_times_p": str(min((m.ell * m.p_exact for m in models), default=0)),
    }
    return out, ["ell", "prob_sum", "harmonic_sum", "dominates_half"], rows


# ---------------------------------------------------------------------------
# parser


def _add_common(p):
    p.add_argument("--output", metavar="PATH", help="[cli] write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="[cli] report format")
    p.add_argument("--seed", type=int, default=0, help="[bc-simulator] base seed for random streams")
    p.add_argument("--budget", type=int, default=None, help="[cli] enumeration budget (overrides TDL_BUDGET)")
    p.add_argument("--jobs", type=int, default=1, help="[cli] worker processes (default 1)")


def _add_prime_set(p, xmax=100):
    p.add_argument("--a", type=int, default=1, help="[frobenius-data] curve coefficient a")
    p.add_argument("--b", type=int, default=1, help="[frobenius-data] curve coefficient b")
    p.add_argument("--N", type=int, default=1, help="[frobenius-data] power N in P_p(x^N)")
    p.add_argument("--witness", type=int, default=3, help="[frobenius-data] witness prime p")
    p.add_argument("--modulus", type=int, default=1, help="[frobenius-data] keep ell = 1 mod this")
    p.add_argument("--kappa", type=int, default=2, help="[frobenius-data] smallest ell kept")
    p.add_argument("--xmax", type=int, default=xmax, help="[frobenius-data] cutoff X for ell")
    p.add_argument("--dC", type=int, default=None, help="[frobenius-data] root count to require (default: from witness)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tdl", description="Exact and Monte Carlo checks on mod-ell eigenvalue-1 densities.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eigen1", help="count elements with eigenvalue 1")
    p.add_argument("--group", default="gl2", help="[group-models] glN or gspN")
    p.add_argument("--ell", type=int, required=True, help="[ff-core] prime modulus")
    p.add_argument("--matrices", metavar="PATH", help="[group-models] explicit group as a matrix file")
    p.add_argument("--coset", metavar="ENTRIES", help="[group-models] coset representative B, row-major")
    p.add_argument("--method", choices=("auto", "scan", "fibered", "classes"), default="auto",
                   help="[group-models] counting route")
    _add_common(p)
    p.set_defaults(func=cmd_eigen1)

    p = sub.add_parser("torus-scan", help="eigenvalue-1 locus on split tori")
    p.add_argument("--group", default="gl2", help="[group-models] glN or gspN")
    p.add_argument("--ell", type=int, required=True, help="[ff-core] prime modulus")
    p.add_argument("--N", type=int, default=1, help="[torus-machinery] power N")
    p.add_argument("--B", metavar="ENTRIES", help="[torus-machinery] matrix B, row-major (default identity)")
    p.add_argument("--all-tori", action="store_true", help="[torus-machinery] scan every split torus (GL2)")
    p.add_argument("--union", action="store_true", help="[torus-machinery] also report the union bound (GL2)")
    _add_common(p)
    p.set_defaults(func=cmd_torus_scan)

    p = sub.add_parser("weil-check", help="point count against the explicit Weil bound")
    p.add_argument("--poly", action="append", help="[weil-bounds] polynomial 'c:e1,..;..' (repeatable)")
    p.add_argument("--q", type=int, help="[weil-bounds] prime field size")
    p.add_argument("--dim", type=int, help="[weil-bounds] declared dimension")
    p.add_argument("--m", type=int, help="[weil-bounds] declared top-dimensional component count")
    p.add_argument("--two-sided", action="store_true", help="[weil-bounds] check |deviation| not just excess")
    p.add_argument("--corpus", action="store_true", help="[weil-bounds] run the bundled corpus instead")
    p.add_argument("--qmax", type=int, default=31, help="[weil-bounds] largest q for --corpus")
    _add_common(p)
    p.set_defaults(func=cmd_weil_check)

    p = sub.add_parser("ap", help="traces of Frobenius a_p")
    p.add_argument("--a", type=int, default=1, help="[frobenius-data] curve coefficient a")
    p.add_argument("--b", type=int, default=1, help="[frobenius-data] curve coefficient b")
    p.add_argument("--pmax", type=int, default=100, help="[frobenius-data] largest p")
    p.add_argument("--cache", metavar="PATH", help="[frobenius-data] append-only a_p cache file")
    _add_common(p)
    p.set_defaults(func=cmd_ap)

    p = sub.add_parser("set-s", help="the prime set S and its density")
    _add_prime_set(p)
    _add_common(p)
    p.set_defaults(func=cmd_set_s)

    p = sub.add_parser("bc-sim", help="Monte Carlo of eigenvalue-1 events over S")
    _add_prime_set(p, xmax=1000)
    p.add_argument("--trials", type=int, default=10000, help="[bc-simulator] number of trials")
    p.add_argument("--chi-square", action="store_true", help="[bc-simulator] pairwise independence tests")
    _add_common(p)
    p.set_defaults(func=cmd_bc_sim)

    p = sub.add_parser("density", help="partial sums of p_ell against sum of 1/ell")
    _add_prime_set(p)
    p.add_argument("--all-primes", action="store_true", help="[bc-simulator] use every prime <= xmax instead of S")
    _add_common(p)
    p.set_defaults(func=cmd_density)
    return parser


def _render(out, header, rows, fmt) -> str:
    if fmt == "json":
        return json.dumps(out, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def dispatch(args) -> int:
    if args.budget is not None and args.budget < 1:
        raise UsageError("--budget must be positive")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    out, header, rows = args.func(args)
    text = _render(out, header, rows, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return dispatch(args)
    except TooLarge as e:
        print(f"ERROR {e.code}: {e}".replace("\n", " "), file=sys.stderr)
        return 2
    except (DomainError, OSError) as e:
        code = getattr(e, "code", "IO")
        if not isinstance(code, str):
            code = "IO"
        print(f"ERROR {code}: {e}".replace("\n", " "), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
