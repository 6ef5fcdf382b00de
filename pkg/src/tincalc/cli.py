"""Command line front end.

Exit codes: 0 success, 2 validation or degeneracy failure, 3 argument or
file parse errors.  All randomness is seed-controlled; bench output is
reproducible byte for byte except the wall_ms column.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time

from gmpy2 import mpq

from . import counting
from .cliques import build_clique_cover
from .errors import DegenerateInput, InvalidParameter, InvalidTin, ParseError, TincalcError
from .fastinner import _EdgeSumProblem, _SideTable, edge_term_sum_fast, inner_product_fast
from .field import ntt_friendly_primes
from .geom import (
    build_edge_data,
    generate_tin,
    generate_valid_pair,
    load_tin,
    normalize_pair,
    save_tin,
    scalar_to_str,
    validate_pair,
    validate_tin,
)
from .integrate import naive_inner_product, vertex_term_sum
from .match import best_fit, l2_distance, sqrt_decimal
from .sympoly import MPoly  # noqa: F401  (re-export convenience)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_PARSE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_PARSE)


def decimal_string(q, digits=17) -> str:
    """Correctly rounded decimal with ``digits`` significant digits."""
    q = mpq(q)
    if q == 0:
        return "0"
    sign = "-" if q < 0 else ""
    num, den = int(abs(q).numerator), int(abs(q).denominator)
    e10 = len(str(num // den)) - 1 if num >= den else -len(str(den // num))
    while True:
        k = digits - 1 - e10
        scaled_num = num * 10**k if k >= 0 else num
        scaled_den = den if k >= 0 else den * 10**(-k)
        m = (2 * scaled_num + scaled_den) // (2 * scaled_den)
        if m < 10 ** (digits - 1):
            e10 -= 1
        elif m >= 10**digits:
            e10 += 1
        else:
            break
    s = str(m)
    return f"{sign}{s[0]}.{s[1:]}e{e10:+03d}"


def _load_pair(args):
    f = load_tin(args.f)
    g = load_tin(args.g)
    validate_tin(f)
    validate_tin(g)
    if not getattr(args, "no_validate", False):
        report = validate_pair(f, g)
        if not report.ok:
            for v in report.violations:
                print(f"violation: {v.kind}: {v.detail}", file=sys.stderr)
            raise SystemExit(EXIT_INVALID)
    return f, g


def _fast_kwargs(args):
    kw = {"validate": False}
    if args.primes is not None:
        kw["initial_primes"] = args.primes
    if args.prime_bits is not None:
        kw["prime_bits"] = args.prime_bits
    return kw


def _counted_fast_ops(f, g, seed=0, prime_bits=31):
    """Field operations of one fast-path run in the unit-cost model.

    Rational operations (normalization, vertex sum, clique construction)
    count in full; the modular edge sum counts the work of a single prime,
    since replicating it across the basket is the bit-exactness tax rather
    than algorithmic cost.  Returns (ops, clique_cover_size).
    """
    ctr = counting.OpCounter()
    with counting.active(ctr):
        fn, gn, _ = normalize_pair(f, g, seed=seed)
        f_edges = build_edge_data(fn)
        g_edges = build_edge_data(gn)
        vertex_term_sum(fn, gn, f_edges=f_edges, g_edges=g_edges)
        f_int = [e for e in f_edges if not e.is_boundary]
        g_int = [e for e in g_edges if not e.is_boundary]
        fam = build_clique_cover(
            [(fn.xy(e.u), fn.xy(e.v)) for e in f_int],
            [(gn.xy(e.u), gn.xy(e.v)) for e in g_int],
        )
        cover_size = fam.total_size()
        if fam.cliques:
            problem = _EdgeSumProblem(
                _SideTable(fn, f_int), _SideTable(gn, g_int), fam, "difference"
            )
            (p,) = ntt_friendly_primes(1, prime_bits, problem.needed_two_adicity())
            problem.sigma_mod(p)
    return ctr.total(), cover_size


def _counted_naive_ops(f, g):
    ctr = counting.OpCounter()
    with counting.active(ctr):
        naive_inner_product(f, g)
    return ctr.total()


def cmd_inner(args):
    f, g = _load_pair(args)
    results = {}
    if args.method in ("naive", "both"):
        results["naive"] = naive_inner_product(f, g)
    if args.method in ("fast", "both"):
        results["fast"] = inner_product_fast(f, g, **_fast_kwargs(args))
    for name, value in results.items():
        print(f"{name}: {scalar_to_str(value)} ({decimal_string(value)})")
    if args.count_ops:
        if "naive" in results:
            print(f"naive field_ops: {_counted_naive_ops(f, g)}", file=sys.stderr)
        if "fast" in results:
            ops, cover = _counted_fast_ops(f, g)
            print(f"fast field_ops: {ops} (clique cover size {cover})", file=sys.stderr)
    if args.method == "both":
        ok = results["naive"] == results["fast"]
        print("MATCH" if ok else "MISMATCH")
        if not ok:
            return 1
    return EXIT_OK


def cmd_distance(args):
    f, g = _load_pair(args)
    out = {}
    for method in ("naive", "fast") if args.method == "both" else (args.method,):
        kw = _fast_kwargs(args) if method == "fast" else {}
        sq, dec = l2_distance(f, g, method=method, **kw)
        out[method] = sq
        print(f"{method}: distance2={scalar_to_str(sq)} distance={dec}")
    if args.method == "both":
        ok = out["naive"] == out["fast"]
        print("MATCH" if ok else "MISMATCH")
        if not ok:
            return 1
    return EXIT_OK


def cmd_match(args):
    f, g = _load_pair(args)
    fits = {}
    for method in ("naive", "fast") if args.method == "both" else (args.method,):
        kw = _fast_kwargs(args) if method == "fast" else {}
        fit = best_fit(f, g, method=method, **kw)
        fits[method] = fit
        flag = " (degenerate: constant g)" if fit.degenerate else ""
        print(
            f"{method}: s={scalar_to_str(fit.s)} t={scalar_to_str(fit.t)} "
            f"residual2={scalar_to_str(fit.residual2)}{flag}"
        )
    if args.method == "both":
        a, b = fits["naive"], fits["fast"]
        ok = (a.s, a.t, a.residual2) == (b.s, b.t, b.residual2)
        print("MATCH" if ok else "MISMATCH")
        if not ok:
            return 1
    return EXIT_OK


def cmd_validate(args):
    f = load_tin(args.f)
    g = load_tin(args.g)
    validate_tin(f)
    validate_tin(g)
    report = validate_pair(f, g)
    if report.ok:
        print("ok: pair is in general position")
        return EXIT_OK
    for v in report.violations:
        print(f"violation: {v.kind}: {v.detail}")
    return EXIT_INVALID


def cmd_generate(args):
    t = generate_tin(args.triangles, args.seed, args.surface)
    save_tin(t, args.output)
    print(f"wrote {args.output}: {t.n_vertices} vertices, {t.n_triangles} triangles")
    return EXIT_OK


def cmd_cliques(args):
    f, g = _load_pair(args)
    fn, gn, _ = normalize_pair(f, g, seed=0)
    fe = [e for e in build_edge_data(fn) if not e.is_boundary]
    ge = [e for e in build_edge_data(gn) if not e.is_boundary]
    fam = build_clique_cover(
        [(fn.xy(e.u), fn.xy(e.v)) for e in fe],
        [(gn.xy(e.u), gn.xy(e.v)) for e in ge],
    )
    import math

    edges = len(fe) + len(ge)
    ratio = fam.total_size() / (edges * math.log2(max(edges, 2)) ** 2)
    if args.stats:
        w = csv.writer(sys.stdout)
        w.writerow(["cliques", "total_size", "edges", "size_over_nlog2"])
        w.writerow([len(fam.cliques), fam.total_size(), edges, f"{ratio:.4f}"])
    else:
        print(f"cliques={len(fam.cliques)} total_size={fam.total_size()}")
    return EXIT_OK


def cmd_bench(args):
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = []
    for n in sizes:
        for k in range(args.seeds):
            seed = 1000 * k + n
            f, g = generate_valid_pair(n, seed=seed)

            t0 = time.perf_counter()
            naive_value = naive_inner_product(f, g)
            naive_ms = (time.perf_counter() - t0) * 1000

            t0 = time.perf_counter()
            fast_value = inner_product_fast(f, g, validate=False)
            fast_ms = (time.perf_counter() - t0) * 1000

            match = naive_value == fast_value
            naive_ops = _counted_naive_ops(f, g)
            fast_ops, cover = _counted_fast_ops(f, g)
            rows.append([n, "naive", naive_ops, f"{naive_ms:.1f}", "", match])
            rows.append([n, "fast", fast_ops, f"{fast_ms:.1f}", cover, match])
            print(
                f"n={n} seed={seed} naive_ops={naive_ops} fast_ops={fast_ops} "
                f"cover={cover} match={match}",
                file=sys.stderr,
            )
    header = ["n", "method", "field_ops", "wall_ms", "clique_cover_size", "match"]
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        print(f"wrote {args.csv}")
    else:
        w = csv.writer(sys.stdout)
        w.writerow(header)
        w.writerows(rows)
    if not all(r[-1] for r in rows):
        return 1
    return EXIT_OK


def build_parser():
    ap = _Parser(prog="tincalc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_pair_flags(p, with_method=True):
        p.add_argument("f")
        p.add_argument("g")
        if with_method:
            p.add_argument(
                "--method", choices=("naive", "fast", "both"), default="fast"
            )
        p.add_argument("--primes", type=int, default=None,
                       help="initial prime count for the fast path")
        p.add_argument("--prime-bits", type=int, default=None,
                       help="prime size in bits (16..31, default 31)")
        p.add_argument("--no-validate", action="store_true",
                       help="skip the quadratic general-position screen")

    p = sub.add_parser("inner", help="exact integral of f*g")
    add_pair_flags(p)
    p.add_argument("--count-ops", action="store_true")
    p.set_defaults(fn=cmd_inner)

    p = sub.add_parser("distance", help="exact squared L2 distance and its root")
    add_pair_flags(p)
    p.set_defaults(fn=cmd_distance)

    p = sub.add_parser("match", help="optimal vertical scaling and translation")
    add_pair_flags(p)
    p.set_defaults(fn=cmd_match)

    p = sub.add_parser("validate", help="general-position report for a pair")
    p.add_argument("f")
    p.add_argument("g")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("generate", help="write a synthetic TIN")
    p.add_argument("--triangles", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--surface", default="random",
                   help="random | saddle | plane:a,b,c | poly:c00,c10,c01,c20,c11,c02")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("cliques", help="clique cover statistics")
    add_pair_flags(p, with_method=False)
    p.add_argument("--stats", action="store_true")
    p.set_defaults(fn=cmd_cliques)

    p = sub.add_parser("bench", help="operation-count and wall-time benchmark")
    p.add_argument("--sizes", default="64,128,256")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--csv", default=None)
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        code = args.fn(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidParameter as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InvalidTin, DegenerateInput) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"cannot read {exc.filename}", file=sys.stderr)
        return EXIT_PARSE
    except TincalcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":
    raise SystemExit(main())
