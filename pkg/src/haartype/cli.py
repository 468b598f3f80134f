"""Command-line frontend.

Subcommands cover tree generation and ingestion, collection analysis,
certificate construction, system builds, and report emission.  Exit codes:
0 success, 1 input/usage error (with a diagnostic naming the violated
invariant), 2 for domain-level negative outcomes (NotFound / Infeasible) --
the latter are results, not failures.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from haartype.condensation import (
    NotFound,
    condense,
    coverage,
    disjointify,
    verify_coloring,
    verify_condensed,
)
from haartype.families import (
    AtomCollection,
    TildeRegion,
    carleson_constant,
    light_children,
    remainders,
    top_children,
)
from haartype.functions import (
    NormedSpace,
    SimpleFunction,
    lq_space,
    martingale_diffs,
    scalar_space,
)
from haartype.gamlen_gaudet import (
    GGSystem,
    Infeasible,
    build_gg_system,
    verify_A9_holder,
    verify_gg,
)
from haartype.protohaar import certify, construct_protohaar
from haartype.tree import (
    Atom,
    FiltrationTree,
    TreeError,
    build_chain,
    build_dyadic,
    build_random,
    format_mass,
    parse_mass,
)
from haartype.typeconst import (
    DichotomyRow,
    DichotomyTable,
    dichotomy_table,
    empirical_type_constant,
    rzeszut_example,
    tp_bound,
)


# -- config echo -------------------------------------------------------------


@dataclass
class RunConfig:
    """Everything needed to reproduce a run; echoed into every report."""

    subcommand: str
    source: str | None
    params: dict[str, str]
    report: str
    out: str | None
    jobs: int

    def to_obj(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "source": self.source,
            "params": self.params,
            "report": self.report,
            "out": self.out,
            "jobs": self.jobs,
        }


_SKIP_KEYS = {"cmd", "func", "tree", "infile", "system", "fn", "out", "report", "jobs"}


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    params = {
        k: str(v)
        for k, v in sorted(vars(args).items())
        if k not in _SKIP_KEYS and v is not None
    }
    source = getattr(args, "tree", None) or getattr(args, "infile", None) or getattr(
        args, "system", None
    )
    return RunConfig(
        subcommand=args.cmd,
        source=source,
        params=params,
        report=getattr(args, "report", "json"),
        out=getattr(args, "out", None),
        jobs=args.jobs,
    )


# -- small parsers -----------------------------------------------------------


def _parse_scalar(s: str) -> float:
    if s in ("inf", "oo"):
        return math.inf
    return float(Fraction(s))


def parse_space(spec: str, q: str | None = None, dim: int | None = None) -> NormedSpace:
    """Accept `scalar`/`R`, `lq` (with --q/--dim), or the compact `lq:Q:D`."""
    if spec in ("scalar", "R", "r"):
        return scalar_space()
    if spec.startswith("lq:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad space spec {spec!r}; want lq:Q:D")
        return lq_space(_parse_scalar(parts[1]), int(parts[2]))
    if spec == "lq":
        if q is None or dim is None:
            raise ValueError("--space lq needs --q and --dim")
        return lq_space(_parse_scalar(q), dim)
    raise ValueError(f"unknown space {spec!r}")


def parse_depths(s: str) -> list[int]:
    if ".." in s:
        lo, hi = s.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in s.split(",")]


def _load_tree(path: str) -> FiltrationTree:
    with open(path) as fh:
        return FiltrationTree.from_obj(json.load(fh))


def _atom_at(tree: FiltrationTree, path: str) -> Atom:
    a = tree.root
    for tok in path.strip("/").split("/"):
        if tok == "":
            continue
        i = int(tok)
        if i >= a.n_children:
            raise ValueError(f"atom path {path!r}: no child {i} under {a.path_str()}")
        a = a.children[i]
    return a


def _member_obj(m) -> dict:
    if isinstance(m, TildeRegion):
        return {"kind": "tilde", "path": m.atom.path_str(), "interval": [m.lo, m.hi]}
    if isinstance(m, Atom):
        return {"kind": "atom", "path": m.path_str(), "interval": [m.lo, m.hi]}
    return {"kind": "region", "intervals": [list(iv) for iv in m.intervals]}


def _collection(tree: FiltrationTree, tag: str, include_root: bool) -> AtomCollection:
    if tag == "E":
        return light_children(tree, include_root=include_root)
    if tag == "B":
        return remainders(tree)
    if tag == "C":
        return top_children(tree)
    raise ValueError(f"unknown collection {tag!r}; want E, B or C")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _emit_json(obj: dict, out: str | None) -> None:
    _emit(json.dumps(obj, indent=2), out)


def _lp_float(f: SimpleFunction, space: NormedSpace, p: float) -> float:
    acc = 0.0
    for v, leaf in zip(f.values, f.tree.leaves):
        acc += space.norm(v) ** p * float(leaf.p)
    return acc ** (1.0 / p)


# -- subcommands -------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.kind == "dyadic":
        tree = build_dyadic(args.depth)
    elif args.kind == "chain":
        tree = build_chain(args.depth, parse_mass(args.delta))
    else:
        tree = build_random(args.depth, args.seed, max_width=args.max_width)
    _emit(tree.to_json(), args.out)
    return 0


def cmd_carleson(args) -> int:
    tree = _load_tree(args.infile)
    coll = _collection(tree, args.collection, args.include_root)
    print(format_mass(carleson_constant(coll.members)))
    return 0


def cmd_mdiff(args) -> int:
    tree = _load_tree(args.tree)
    with open(args.fn) as fh:
        obj = json.load(fh)
    values = [
        [parse_mass(x) for x in v] if isinstance(v, list) else parse_mass(v)
        for v in obj["values"]
    ]
    f = SimpleFunction(tree, values)
    space = parse_space(args.space, args.q, args.dim)
    p = _parse_scalar(args.p)
    mean, diffs = martingale_diffs(f)
    rows = [(n, _lp_float(d, space, p)) for n, d in enumerate(diffs, start=1)]
    cfg = _config_from_args(args)
    if args.report == "csv":
        lines = ["level,norm"] + [f"{n},{x}" for n, x in rows]
        _emit("\n".join(lines) + "\n", args.out)
        print(f"config: {json.dumps(cfg.to_obj())}", file=sys.stderr)
    else:
        _emit_json(
            {
                "config": cfg.to_obj(),
                "mean": [str(c) for c in mean.values[0]],
                "levels": [{"level": n, "norm": x} for n, x in rows],
            },
            args.out,
        )
    return 0


def cmd_protohaar(args) -> int:
    tree = _load_tree(args.tree)
    atom = _atom_at(tree, args.atom)
    eps = parse_mass(args.eps)
    ph = construct_protohaar(tree, atom, eps, k=args.k)
    cert = certify(ph)
    plus = [m for part in ph.plus_parts for m in part]
    minus = [m for part in ph.minus_parts for m in part]
    obj = {
        "config": _config_from_args(args).to_obj(),
        "atom": atom.path_str(),
        "eps": format_mass(eps),
        "k": ph.k,
        "tau": ph.tau,
        "truncated": ph.truncated,
        "c0": format_mass(ph.c0),
        "regions": {
            "plus": [_member_obj(m) for m in plus],
            "minus": [_member_obj(m) for m in minus],
            "residual": _member_obj(ph.y_seq[-1]) if ph.y_seq else None,
        },
        "masses": {
            "plus": format_mass(ph.plus_mass),
            "minus": format_mass(ph.minus_mass),
            "residual": format_mass(ph.residual_mass),
        },
        "checks": [
            {"name": c.name, "ok": c.ok, "witness": c.witness} for c in cert.checks
        ],
        "all_ok": cert.all_ok,
    }
    _emit_json(obj, args.out)
    return 0 if cert.all_ok else 2


def cmd_condense(args) -> int:
    tree = _load_tree(args.tree)
    coll = _collection(tree, args.collection, False)
    eps = parse_mass(args.eps)
    seed = _atom_at(tree, args.seed_path) if args.seed_path else None
    sys_ = condense(coll, args.k, args.n, eps, seed=seed)
    checks = verify_condensed(sys_)
    obj = {
        "config": _config_from_args(args).to_obj(),
        "seed": _member_obj(sys_.root.member),
        "seed_coverage": format_mass(sys_.seed_coverage),
        "threshold": format_mass(sys_.threshold),
        "levels": [
            [
                {
                    **_member_obj(node.member),
                    "coverage": format_mass(coverage(coll, node.member, args.k)),
                }
                for node in lvl
            ]
            for lvl in sys_.levels
        ],
        "checks": [{"name": c.name, "ok": c.ok, "witness": c.witness} for c in checks],
        "all_ok": all(c.ok for c in checks),
    }
    _emit_json(obj, args.out)
    return 0 if obj["all_ok"] else 2


def cmd_disjointify(args) -> int:
    tree = _load_tree(args.tree)
    coll = _collection(tree, args.collection, False)
    col = disjointify(coll)
    checks = verify_coloring(col)
    obj = {
        "config": _config_from_args(args).to_obj(),
        "carleson": format_mass(col.carleson),
        "budget": col.budget,
        "n_classes": col.n_classes,
        "within_budget": col.within_budget,
        "families": [[_member_obj(m) for m in cls] for cls in col.classes],
        "checks": [{"name": c.name, "ok": c.ok, "witness": c.witness} for c in checks],
        "all_ok": all(c.ok for c in checks),
    }
    _emit_json(obj, args.out)
    return 0 if obj["all_ok"] else 2


def cmd_gg_build(args) -> int:
    tree = _load_tree(args.tree)
    system = build_gg_system(tree, args.n, parse_mass(args.delta))
    obj = {
        "config": _config_from_args(args).to_obj(),
        "tree": tree.to_obj(),
        "system": system.to_obj(),
    }
    _emit_json(obj, args.out)
    if args.out:
        print(
            f"built: construction={system.construction} k={system.k} "
            f"seed={system.seed.path_str()} S={system.level_s}"
        )
    return 0


def cmd_gg_verify(args) -> int:
    with open(args.system) as fh:
        obj = json.load(fh)
    tree = FiltrationTree.from_obj(obj["tree"])
    system = GGSystem.from_obj(tree, obj["system"])
    rep = verify_gg(system)
    out_obj = {
        "config": _config_from_args(args).to_obj(),
        "items": [
            {"name": it.name, "ok": it.ok, "witness": it.witness} for it in rep.items
        ],
        "a2_strict": rep.a2_strict,
        "ok": rep.ok,
    }
    if args.p is not None:
        p = _parse_scalar(args.p)
        rows = verify_A9_holder(system, p)
        out_obj["holder_p"] = p
        out_obj["holder"] = [
            {"interval": f"{lvl}/{idx}", "lhs": lhs, "rhs": rhs, "ok": ok}
            for (lvl, idx), lhs, rhs, ok in rows
        ]
        out_obj["ok"] = out_obj["ok"] and all(r[3] for r in rows)
    _emit_json(out_obj, args.out)
    for it in rep.items:
        print(f"[{'ok' if it.ok else 'FAIL'}] {it.name}", file=sys.stderr)
    return 0 if out_obj["ok"] else 2


def cmd_type_est(args) -> int:
    tree = _load_tree(args.tree)
    space = parse_space(args.space, args.q, args.dim)
    p = _parse_scalar(args.p)
    est = empirical_type_constant(tree, space, p, budget=args.budget, seed=args.seed)
    carl = carleson_constant(light_children(tree).members)
    bound = tp_bound(p, carl)
    cfg = _config_from_args(args)
    if args.report == "csv":
        lines = [
            "depth,carleson,empirical_constant,tp_bound,max_probe_id",
            f"{tree.depth},{float(carl)},{est.constant},{bound},{est.probe}",
        ]
        _emit("\n".join(lines) + "\n", args.out)
        print(f"config: {json.dumps(cfg.to_obj())}", file=sys.stderr)
    else:
        _emit_json(
            {
                "config": cfg.to_obj(),
                "estimate": est.to_obj(),
                "carleson": format_mass(carl),
                "tp_bound": bound,
                "slack": bound / est.constant if est.constant > 0 else None,
            },
            args.out,
        )
    return 0


def cmd_rzeszut(args) -> int:
    ex = rzeszut_example(args.n, n_random=args.n_random, seed=args.seed)
    obj = {"config": _config_from_args(args).to_obj(), **ex.to_obj()}
    if args.out:
        _emit_json(obj, args.out)
    ok = ex.ok_lower and ex.upper_ok
    print(
        f"n={args.n} variation={float(ex.variation):.6f} "
        f"lower=sqrt(n/2)={ex.lower:.6f} ok_lower={ex.ok_lower} "
        f"upper_ok={ex.upper_ok}"
    )
    return 0 if ok else 2


def _dicho_worker(task: tuple) -> tuple:
    family, delta_s, depth, q, dim, p, budget, seed = task
    tree = _make_family_tree(family, delta_s, seed)(depth)
    carl = carleson_constant(light_children(tree).members)
    space = scalar_space() if dim == 1 else lq_space(q, dim)
    est = empirical_type_constant(tree, space, p, budget=budget, seed=seed)
    return depth, str(carl), est.constant, tp_bound(p, carl), est.probe


def _make_family_tree(family: str, delta_s: str, seed: int):
    if family == "dyadic":
        return build_dyadic
    if family == "chain":
        delta = parse_mass(delta_s)
        return lambda d: build_chain(d, delta)
    if family == "random":
        return lambda d: build_random(d, seed)
    raise ValueError(f"unknown family {family!r}; want dyadic, chain or random")


def cmd_dichotomy(args) -> int:
    space = parse_space(args.space, args.q, args.dim)
    p = _parse_scalar(args.p)
    depths = parse_depths(args.depths)
    make_tree = _make_family_tree(args.family, args.delta, args.seed)
    if args.jobs > 1:
        tasks = [
            (args.family, args.delta, d, space.q, space.dim, p, args.budget, args.seed)
            for d in depths
        ]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            raw = list(pool.map(_dicho_worker, tasks))
        rows = [
            DichotomyRow(d, Fraction(c), emp, bnd, probe)
            for d, c, emp, bnd, probe in raw
        ]
        if len(rows) >= 2 and rows[-1].carleson > rows[0].carleson:
            branch = "growing-Carleson branch"
        else:
            branch = "bounded-constant branch"
        table = DichotomyTable(family=args.family, p=p, rows=rows, branch=branch)
    else:
        table = dichotomy_table(
            make_tree, depths, space, p,
            budget=args.budget, seed=args.seed, family=args.family,
        )
    cfg = _config_from_args(args)
    if args.report == "json":
        _emit_json({"config": cfg.to_obj(), **table.to_obj()}, args.out)
    else:
        _emit(table.to_csv(), args.out)
        print(f"config: {json.dumps(cfg.to_obj())}", file=sys.stderr)
        print(f"branch: {table.branch}", file=sys.stderr)
    return 0


# -- wiring ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Exit 1 (not argparse's default 2) on usage errors: code 2 is reserved
    for domain-level NotFound/Infeasible outcomes."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def build_parser() -> _Parser:
    ap = _Parser(prog="haartype")
    ap.add_argument("--jobs", type=int, default=1,
                    help="parallelism budget for sweep loops")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a tree file")
    gsub = g.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    gd = gsub.add_parser("dyadic")
    gd.add_argument("--depth", type=int, required=True)
    gc = gsub.add_parser("chain")
    gc.add_argument("--depth", type=int, required=True)
    gc.add_argument("--delta", required=True, help="rational in (0,1/2)")
    gr = gsub.add_parser("random")
    gr.add_argument("--seed", type=int, required=True)
    gr.add_argument("--depth", type=int, default=6)
    gr.add_argument("--max-width", type=int, default=4)
    for sp in (gd, gc, gr):
        sp.add_argument("--out")
        sp.set_defaults(func=cmd_gen)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("carleson", help="packing constant of a derived collection")
    c.add_argument("--collection", required=True, choices=["E", "B", "C"])
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--include-root", action="store_true")
    c.set_defaults(func=cmd_carleson)

    m = sub.add_parser("mdiff", help="per-level martingale difference norms")
    m.add_argument("--fn", required=True, help="JSON with a 'values' list")
    m.add_argument("--tree", required=True)
    m.add_argument("--p", default="2")
    m.add_argument("--space", default="scalar")
    m.add_argument("--q")
    m.add_argument("--dim", type=int)
    m.add_argument("--report", choices=["json", "csv"], default="json")
    m.add_argument("--out")
    m.set_defaults(func=cmd_mdiff)

    ph = sub.add_parser("protohaar", help="greedy near-sign-function certificate")
    ph.add_argument("--tree", required=True)
    ph.add_argument("--atom", required=True, help="child-index path, e.g. 0/1")
    ph.add_argument("--eps", required=True, help="rational slack")
    ph.add_argument("--k", type=int, default=None)
    ph.add_argument("--out")
    ph.set_defaults(func=cmd_protohaar)

    cn = sub.add_parser("condense", help="extract a nested dense system")
    cn.add_argument("--tree", required=True)
    cn.add_argument("--eps", required=True)
    cn.add_argument("--n", type=int, required=True)
    cn.add_argument("--k", type=int, required=True)
    cn.add_argument("--collection", default="E", choices=["E", "B", "C"])
    cn.add_argument("--seed-path")
    cn.add_argument("--out")
    cn.set_defaults(func=cmd_condense)

    dj = sub.add_parser("disjointify", help="color a collection into nested families")
    dj.add_argument("--collection", required=True, choices=["E", "B", "C"])
    dj.add_argument("--tree", required=True)
    dj.add_argument("--report", choices=["json"], default="json")
    dj.add_argument("--out")
    dj.set_defaults(func=cmd_disjointify)

    gb = sub.add_parser("gg-build", help="build the generalized-Haar support system")
    gb.add_argument("--tree", required=True)
    gb.add_argument("--n", type=int, required=True)
    gb.add_argument("--delta", required=True)
    gb.add_argument("--out")
    gb.set_defaults(func=cmd_gg_build)

    gv = sub.add_parser("gg-verify", help="re-verify a stored system")
    gv.add_argument("--system", required=True)
    gv.add_argument("--p", default=None)
    gv.add_argument("--out")
    gv.set_defaults(func=cmd_gg_verify)

    te = sub.add_parser("type-est", help="empirical type constant")
    te.add_argument("--tree", required=True)
    te.add_argument("--space", default="scalar")
    te.add_argument("--q")
    te.add_argument("--dim", type=int)
    te.add_argument("--p", required=True)
    te.add_argument("--budget", type=int, default=500)
    te.add_argument("--seed", type=int, default=0)
    te.add_argument("--report", choices=["json", "csv"], default="json")
    te.add_argument("--out")
    te.set_defaults(func=cmd_type_est)

    rz = sub.add_parser("rzeszut", help="variation lower-bound example")
    rz.add_argument("--n", type=int, required=True)
    rz.add_argument("--n-random", type=int, default=50)
    rz.add_argument("--seed", type=int, default=0)
    rz.add_argument("--out")
    rz.set_defaults(func=cmd_rzeszut)

    dc = sub.add_parser("dichotomy", help="depth sweep: packing constant vs bound")
    dc.add_argument("--family", required=True, choices=["dyadic", "chain", "random"])
    dc.add_argument("--depths", required=True, help="e.g. 2..8 or 2,4,6")
    dc.add_argument("--p", required=True)
    dc.add_argument("--space", default="scalar")
    dc.add_argument("--q")
    dc.add_argument("--dim", type=int)
    dc.add_argument("--delta", default="1/4", help="chain family parameter")
    dc.add_argument("--budget", type=int, default=500)
    dc.add_argument("--seed", type=int, default=0)
    dc.add_argument("--report", choices=["json", "csv"], default="csv")
    dc.add_argument("--out")
    dc.set_defaults(func=cmd_dichotomy)

    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except Infeasible as e:
        notes = "; ".join(e.notes) if e.notes else str(e)
        print(f"infeasible: condensation NotFound ({notes})", file=sys.stderr)
        return 2
    except NotFound as e:
        print(f"condensation NotFound: {e}", file=sys.stderr)
        return 2
    except (TreeError, ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
