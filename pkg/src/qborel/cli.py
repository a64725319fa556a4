"""Command-line surface for the verifiers and constructors.

Subcommands map onto the library operations; output is plain text, JSON or a
LaTeX tabular.  The exit code is zero exactly when every requested check
passed.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from fractions import Fraction

from .coeff import SC_LAM, parse_scalar, rfq_qpow, rfq_const, sc_from_rfq, sc_to_rfq
from .rootsys import build_root_system, parse_word, reduce_word
from .uqalg import build_algebra, q_commutator, render_element, rep_eval
from .weylsupp import supplement, verify_kinb, verify_supplement_exhaustive
from . import borel as borel_mod
from .borel import (
    build_rcs,
    classify_small,
    commutator_table,
    default_twist,
    ede_battery,
    induced_hilbert,
    nondegenerate_borel,
    weyl_constant,
)
from .coideal import Character

OUTDIR_ENV = "QBOREL_OUTDIR"


def _emit(args, text):
    if getattr(args, "output", None):
        outdir = os.environ.get(OUTDIR_ENV, ".")
        path = os.path.join(outdir, args.output)
        with open(path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _root_system(args):
    return build_root_system(args.type, args.rank)


def cmd_weyl_supplement(args):
    rs = _root_system(args)
    w1 = parse_word(rs, args.w1)
    w2 = parse_word(rs, args.w2)
    res = supplement(rs, w1, w2)
    payload = {
        "w1_prime": repr(res.w1_prime),
        "w2_prime": repr(res.w2_prime),
        "B": [rs.root_name(b) for b in sorted(res.b_set)],
        "tail_word": repr(res.tail_word),
    }
    if args.format == "json":
        _emit(args, json.dumps(payload, indent=2))
    else:
        _emit(
            args,
            "\n".join(
                [
                    f"w1' = {payload['w1_prime']}",
                    f"w2' = {payload['w2_prime']}",
                    f"B   = {{{', '.join(payload['B'])}}}",
                    f"tail word = {payload['tail_word']}",
                ]
            ),
        )
    return 0


def cmd_verify_kinb(args):
    rs = _root_system(args)
    rep = verify_kinb(rs)
    _emit(args, rep.to_json() if args.format == "json" else rep.summary())
    return 0 if rep.ok else 1


def cmd_verify_supplement(args):
    rs = _root_system(args)
    rep = verify_supplement_exhaustive(rs)
    _emit(args, rep.to_json() if args.format == "json" else rep.summary())
    return 0 if rep.ok else 1


SL3_DEGENERATE = {
    "w_plus": (0, 1),
    "w_minus": (0, 1),
    "supp": ((1, 0),),
}

SL4_CASES = {
    "1.1": {"w_plus": (0, 1, 2, 1, 0), "w_minus": (0, 1), "supp": ((1, 0, 0),)},
    "1.2.1": {"w_plus": (0, 1, 2, 1), "w_minus": (0, 1, 2), "supp": ((1, 0, 0),)},
    "1.2.2": {"w_plus": (1, 0, 2, 1), "w_minus": (1, 0, 2), "supp": ((0, 1, 0),)},
    "2.1": {
        "w_plus": (0, 1, 2, 1),
        "w_minus": (0, 1, 2, 1),
        "supp": ((1, 0, 0), (0, 0, 1)),
    },
    "2.2": {
        "w_plus": (1, 0, 2, 1),
        "w_minus": (1, 0, 2, 1),
        "supp": ((0, 1, 0), (1, 1, 1)),
    },
}


def _build_case_rcs(ctx, case):
    t = sc_from_rfq(weyl_constant(ctx, ctx.rs.simple_roots[0]))
    vp, vm = {}, {}
    for idx, root in enumerate(case["supp"]):
        lam = SC_LAM if idx == 0 else sc_from_rfq(rfq_const(Fraction(3, 7)))
        vp[root] = lam
        vm[root] = t * lam.inv()
    return build_rcs(ctx, case["w_plus"], case["w_minus"], vp, vm)


def _render_expression(ctx, rcs, expr):
    if expr is None:
        return "NOT-IN-SPAN"
    if not expr:
        return "0"
    parts = []
    for label, coeff in sorted(expr.items(), key=lambda kv: str(kv[0])):
        parts.append(f"({coeff.render('lam')})*{_label_name(ctx, label)}")
    return " + ".join(parts)


def _label_name(ctx, label):
    if label == ("one",):
        return "1"
    if label[0] == "K":
        return f"K{list(label[1])}"
    if label[0] in ("E", "F"):
        return f"{label[0]}bar{ctx.rs.root_name(label[1])}"
    if isinstance(label, tuple) and len(label) == 2 and isinstance(label[0], tuple):
        return f"{_label_name(ctx, label[0])}*{_label_name(ctx, label[1])}"
    return str(label)


def cmd_commutator_table(args):
    if args.algebra == "sl3":
        ctx = build_algebra(3)
        case = SL3_DEGENERATE
    elif args.algebra == "sl4":
        if args.case not in SL4_CASES:
            raise SystemExit(f"unknown case {args.case!r}; pick one of {sorted(SL4_CASES)}")
        ctx = build_algebra(4)
        case = SL4_CASES[args.case]
    else:
        raise SystemExit("algebra must be sl3 or sl4")
    rcs = _build_case_rcs(ctx, case)
    table = commutator_table(ctx, rcs)
    lines = []
    rows = sorted(rcs.e_bars)
    cols = sorted(rcs.f_bars)
    header = f"q-commutator table {args.algebra}" + (
        f" case {args.case}" if args.algebra == "sl4" else " degenerate"
    )
    if args.format == "latex":
        lines.append(r"\begin{tabular}{|c||" + "c|" * len(cols) + "}")
        lines.append(
            " & ".join(
                [""] + [f"$\\bar F_{{{ctx.rs.root_name(nu)}}}$" for nu in cols]
            )
            + r" \\ \hline"
        )
        for mu in rows:
            cells = []
            for nu in cols:
                cell = table[(mu, nu)]
                cells.append(_render_expression(ctx, rcs, cell["expression"]))
            lines.append(
                f"$\\bar E_{{{ctx.rs.root_name(mu)}}}$ & " + " & ".join(cells) + r" \\"
            )
        lines.append(r"\end{tabular}")
        _emit(args, "\n".join(lines))
        return 0
    payload = {}
    lines.append(header)
    for mu in rows:
        for nu in cols:
            cell = table[(mu, nu)]
            key = f"[Ebar{ctx.rs.root_name(mu)}, Fbar{ctx.rs.root_name(nu)}]_{{{cell['twist'].render('lam')}}}"
            val = _render_expression(ctx, rcs, cell["expression"])
            payload[key] = val
            lines.append(f"{key} = {val}")
    if args.format == "json":
        _emit(args, json.dumps(payload, indent=2, sort_keys=True))
    else:
        _emit(args, "\n".join(lines))
    return 0


def cmd_classify(args):
    n = {"sl2": 2, "sl3": 3, "sl4": 4}[args.algebra]
    out = classify_small(n)
    kinds = {}
    for fam in out["families"]:
        kinds.setdefault(fam["kind"], []).append(fam)
    payload = {
        "algebra": args.algebra,
        "survivor_count": len(out["survivors"]),
        "families": [
            {"kind": f["kind"], "label": f["label"], "size": len(f["members"])}
            for f in out["families"]
        ],
        "itemized_count": (1 if kinds.get("standard") else 0)
        + (
            len(out["nondegenerate_size_classes"])
            if n == 4
            else len(kinds.get("nondegenerate", []))
        )
        + len(kinds.get("degenerate", [])),
    }
    if args.format == "json":
        _emit(args, json.dumps(payload, indent=2))
    else:
        lines = [f"{args.algebra}: {payload['itemized_count']} families"]
        for fam in payload["families"]:
            lines.append(f"  {fam['kind']:<14} {fam['label']} (positions: {fam['size']})")
        _emit(args, "\n".join(lines))
    return 0


def load_rcs_spec(path):
    with open(path) as fh:
        data = json.load(fh)
    if data.get("type", "A") != "A":
        raise SystemExit("rcs specs are wired for type A")
    n = data["rank"] + 1
    ctx = build_algebra(n)
    rs = ctx.rs

    def parse_root(text):
        text = text.strip()
        if text.startswith("["):
            m1, m2 = (int(t) for t in text[1:-1].split(","))
            return rs.root_from_interval(m1, m2)
        return tuple(int(t) for t in text.strip("()").split(","))

    wp = parse_word(rs, data["w_plus"]).word
    wm = parse_word(rs, data["w_minus"]).word
    lam = {parse_root(k): parse_scalar(v) for k, v in data.get("lambda", {}).items()}
    lam_minus = {
        parse_root(k): parse_scalar(v)
        for k, v in data.get("lambda_minus", {}).items()
    }
    supp_plus = [parse_root(r) for r in data.get("supp_plus", [])]
    supp_minus = [parse_root(r) for r in data.get("supp_minus", [])]
    vp = {r: lam[r] for r in supp_plus}
    if lam_minus:
        vm = {r: lam_minus[r] for r in supp_minus}
    else:
        vm = {}
        for r in supp_minus:
            t = sc_from_rfq(weyl_constant(ctx, ctx.rs.simple_roots[0]))
            vm[r] = t * vp[r].inv() if r in vp else SC_LAM
    basis = data.get("L_basis")
    if basis is not None:
        basis = [tuple(v) for v in basis]
    return ctx, build_rcs(ctx, wp, wm, vp, vm, lattice_basis=basis)


def dump_rcs_spec(ctx, rcs):
    return {
        "type": "A",
        "rank": ctx.rank,
        "w_plus": repr(
            reduce_word(ctx.rs, parse_word(ctx.rs, " ".join(f"s{i+1}" for i in rcs.w_plus)))
        ),
        "w_minus": " ".join(f"s{i+1}" for i in rcs.w_minus) or "e",
        "supp_plus": [ctx.rs.root_name(r) for r in sorted(rcs.supp_plus)],
        "supp_minus": [ctx.rs.root_name(r) for r in sorted(rcs.supp_minus)],
        "lambda": {
            ctx.rs.root_name(r): v.render("lam")
            for r, v in rcs.phi_plus.value_map().items()
        },
        "lambda_minus": {
            ctx.rs.root_name(r): v.render("lam")
            for r, v in rcs.phi_minus.value_map().items()
        },
        "L_basis": [list(v) for v in rcs.lattice_basis],
    }


def cmd_ede_check(args):
    ctx, rcs = load_rcs_spec(args.spec)
    report = ede_battery(ctx, rcs)
    payload = [
        {"check": c.name, "verdict": c.verdict, "witness": str(c.witness)}
        for c in report.checks
    ]
    if args.format == "json":
        _emit(args, json.dumps(payload, indent=2))
    else:
        lines = [
            f"{c.name:<38} {c.verdict}"
            + (f"  witness: {c.witness}" if c.witness else "")
            for c in report.checks
        ]
        lines.append("RESULT: " + ("all necessary conditions pass" if report.passed else "FAILED"))
        _emit(args, "\n".join(lines))
    return 0 if report.passed else 1


def cmd_hilbert(args):
    ctx, rcs = load_rcs_spec(args.spec)
    table = induced_hilbert(ctx, rcs, args.max_degree)
    if args.format == "json":
        _emit(args, json.dumps(table, indent=2))
    else:
        lines = ["height dimension"]
        for h, d in zip(table["heights"], table["dims"]):
            lines.append(f"{h:>6} {d}")
        lines.append(
            "polynomial part on: " + ", ".join(table["polynomial_roots"])
        )
        lines.append(
            "Laurent sectors on: " + ", ".join(table["laurent_sectors"])
        )
        _emit(args, "\n".join(lines))
    return 0


def cmd_selftest(args):
    rng = random.Random(args.seed)
    t0 = time.time()
    failures = []

    def check(name, ok):
        status = "ok" if ok else "FAIL"
        print(f"  {name:<52} {status}")
        if not ok:
            failures.append(name)

    print("selftest (seed %d)" % args.seed)
    ctx2 = build_algebra(2)
    t = weyl_constant(ctx2, (1,))
    from .coeff import parse_rfq

    check("weyl constant matches the derived closed form",
          t == parse_rfq("q^2/((1-q^2)(q-q^-1))"))
    E, F = ctx2.E(1), ctx2.F(1)
    K, Kinv = ctx2.K_alpha(1), ctx2.K_alpha(1, -1)
    rel = E * F - F * E - (K - Kinv).scale(
        sc_from_rfq(rfq_const(1) / (rfq_qpow(1) - rfq_qpow(-1)))
    )
    check("defining relation normalizes to zero", rel.is_zero())
    ctx3 = build_algebra(3)
    x = ctx3.E(1) * ctx3.F(2) + ctx3.K((1, 0))
    y = ctx3.E(2) * ctx3.E(1)
    z = ctx3.F(1) * ctx3.E(2)
    check("associativity spot check", (x * y) * z == x * (y * z))
    check("representation oracle agrees", rep_eval(ctx3, rel_embed(ctx3), 2).is_zero())
    rs3 = build_root_system("A", 3)
    rep = verify_kinb(rs3)
    check("simple-root dichotomy exhaustively (A3)", rep.ok)
    rep = verify_supplement_exhaustive(build_root_system("A", 2))
    check("supplement postconditions exhaustively (A2)", rep.ok)
    rcs = nondegenerate_borel(ctx2, [(1,)], {(1,): SC_LAM})
    check("battery passes on the rank-one construction", ede_battery(ctx2, rcs).passed)
    out = classify_small(2)
    check("rank-one classification finds two families", len(out["families"]) == 2)
    print(f"done in {time.time() - t0:.1f}s")
    if failures:
        print("FAILURES:", ", ".join(failures))
        return 1
    return 0


def rel_embed(ctx):
    E, F = ctx.E(1), ctx.F(1)
    K, Kinv = ctx.K_alpha(1), ctx.K_alpha(1, -1)
    return E * F - F * E - (K - Kinv).scale(
        sc_from_rfq(rfq_const(1) / (rfq_qpow(1) - rfq_qpow(-1)))
    )


def build_parser():
    p = argparse.ArgumentParser(
        prog="qborel",
        description="exact computations with triangular coideal subalgebras "
        "of quantized enveloping algebras",
    )
    p.add_argument("--format", choices=["text", "json", "latex"], default="text")
    p.add_argument("--output", help="write output to this file (under $%s)" % OUTDIR_ENV)
    p.add_argument("--jobs", type=int, default=1, help="worker partitions for exhaustive scans")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("weyl-supplement", help="supplement a pair of Weyl words")
    sp.add_argument("type", choices=["A", "B", "C", "D", "G"])
    sp.add_argument("rank", type=int)
    sp.add_argument("--w1", required=True)
    sp.add_argument("--w2", required=True)
    sp.set_defaults(func=cmd_weyl_supplement)

    sp = sub.add_parser("verify-kinb", help="exhaustive simple-root dichotomy check")
    sp.add_argument("type", choices=["A", "B", "C", "D", "G"])
    sp.add_argument("rank", type=int)
    sp.set_defaults(func=cmd_verify_kinb)

    sp = sub.add_parser("verify-supplement", help="exhaustive supplement verification")
    sp.add_argument("type", choices=["A", "B", "C", "D", "G"])
    sp.add_argument("rank", type=int)
    sp.set_defaults(func=cmd_verify_supplement)

    sp = sub.add_parser("commutator-table", help="q-commutator table of a worked example")
    sp.add_argument("algebra", choices=["sl3", "sl4"])
    sp.add_argument("--case", default="1.1")
    sp.set_defaults(func=cmd_commutator_table)

    sp = sub.add_parser("classify", help="small-rank triangular classification")
    sp.add_argument("algebra", choices=["sl2", "sl3", "sl4"])
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("ede-check", help="necessary-condition battery on an rcs spec")
    sp.add_argument("spec")
    sp.set_defaults(func=cmd_ede_check)

    sp = sub.add_parser("hilbert", help="induced-module graded dimensions")
    sp.add_argument("spec")
    sp.add_argument("--max-degree", type=int, default=8)
    sp.set_defaults(func=cmd_hilbert)

    sp = sub.add_parser("selftest", help="fast deterministic property suite")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_selftest)

    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
