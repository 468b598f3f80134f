"""Nested sign-splitting systems and their transfer onto the binary basis.

Given a depth parameter n and a slack delta, the target object is a family
of atom collections B_I, one per dyadic interval I of length >= 2^-n, plus
[-1,1]-valued functions g_I for every I one level coarser, such that the
collections refine along the dyadic tree the way halves refine intervals,
the +-1 level sets of g_I carry the two child collections, and each union
B_I* keeps a mass share within a delta-window of |I|.  Ten structural
conditions pin this down:

  A1  the root collection is the single seed atom;
  A2  every member is a light child contained in the seed;
  A3  members of one collection are pairwise disjoint;
  A4  star-set nesting and intersection mirror interval nesting exactly;
  A5  g_I maps into [-1,1], lives on B_I*, and is +1 across B_{I+}*,
      -1 across B_{I-}*;
  A6  all members are measurable by a common level S;
  A7  so is every g_I;
  A8  per atom and level, at most one interval's difference is active;
  A9  summed difference L1 norms stay below K times the star mass, K = 6;
  A10 (|I| - 2 eps) P(A0) <= P(B_I*) <= |I| P(A0) with eps = delta 2^-(n+1).

Everything except the two norm inequalities is checked in exact rationals;
A9's Hoelder variant carries a 1e-9 tolerance.

The payoff is transfer_check: over the bottom collections, the tuple of
g-values weighted by trimmed set sizes reproduces the joint distribution of
the classical binary sign functions exactly, so a linear combination of the
g's simulates the matching classical combination up to an explicit
delta-controlled defect.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from haartype.condensation import CheckItem, NotFound, condense
from haartype.families import (
    AtomCollection,
    first_generation,
    light_children,
    member_key,
    union_mass,
)
from haartype.functions import (
    NormedSpace,
    SimpleFunction,
    diff_atom_values,
    lp_norm,
    martingale_diffs,
    scalar_space,
    variation_sum,
)
from haartype.protohaar import ProtoHaar, certify, check_larcon, construct_protohaar
from haartype.tree import Atom, FiltrationTree, format_mass, parse_mass

K_VARIATION = 6

Key = tuple[int, int]  # (level l, position i): the dyadic interval of
#                        length 2^-l starting at i * 2^-l


class Infeasible(Exception):
    """The tree cannot host the requested system; .notes says why per attempt."""

    def __init__(self, notes: list[str]):
        super().__init__("; ".join(notes) if notes else "infeasible")
        self.notes = notes


def key_str(key: Key) -> str:
    return f"{key[0]}/{key[1]}"


def parse_key(s: str) -> Key:
    l, i = s.split("/")
    return (int(l), int(i))


def dyadic_keys(n: int) -> list[Key]:
    """All intervals of length >= 2^-n, level by level, left to right."""
    return [(l, i) for l in range(n + 1) for i in range(1 << l)]


def interval_length(key: Key) -> Fraction:
    return Fraction(1, 1 << key[0])


def classical_sign(key: Key, cell: int, n: int) -> int:
    """Value of the classical sign function of interval `key` on the cell
    [cell 2^-n, (cell+1) 2^-n): +1 on the left half, -1 on the right."""
    l, i = key
    if l >= n or (cell >> (n - l)) != i:
        return 0
    return 1 if ((cell >> (n - l - 1)) & 1) == 0 else -1


# -- system container --------------------------------------------------------


@dataclass
class GGSystem:
    tree: FiltrationTree
    n: int
    delta: Fraction
    eps: Fraction                     # delta * 2^-(n+1), the A10 window
    k: int                            # generation stride of the build
    eps_greedy: Fraction              # sign-split slack handed to each H
    eps_cond: Fraction                # density slack of the nested families
    construction: str                 # "condense" or "refined-tiling"
    seed: Atom
    collections: dict[Key, list[Atom]]
    functions: dict[Key, SimpleFunction]
    level_s: int
    K: int = K_VARIATION
    protos: dict[Atom, ProtoHaar] = field(default_factory=dict, repr=False)

    def star_mass(self, key: Key) -> Fraction:
        return union_mass(self.tree, self.collections[key])

    def star_leaves(self, key: Key) -> list[bool]:
        flags = [False] * len(self.tree.leaves)
        for a in self.collections[key]:
            for i in range(a.lo, a.hi):
                flags[i] = True
        return flags

    def function_keys(self) -> list[Key]:
        return [k for k in dyadic_keys(self.n - 1)]

    def to_obj(self) -> dict:
        return {
            "n": self.n,
            "delta": format_mass(self.delta),
            "eps": format_mass(self.eps),
            "k": self.k,
            "eps_greedy": format_mass(self.eps_greedy),
            "eps_cond": format_mass(self.eps_cond),
            "construction": self.construction,
            "seed": [self.seed.level, self.seed.idx],
            "level_s": self.level_s,
            "K": self.K,
            "collections": {
                key_str(k): [[a.level, a.idx] for a in mem]
                for k, mem in self.collections.items()
            },
            "functions": {
                key_str(k): [format_mass(v[0]) for v in fn.values]
                for k, fn in self.functions.items()
            },
        }

    @classmethod
    def from_obj(cls, tree: FiltrationTree, obj: dict) -> GGSystem:
        def atom_at(level: int, idx: int) -> Atom:
            for a in tree.levels[level]:
                if a.idx == idx:
                    return a
            raise ValueError(f"no atom {idx} at level {level}")

        return cls(
            tree=tree,
            n=int(obj["n"]),
            delta=parse_mass(obj["delta"]),
            eps=parse_mass(obj["eps"]),
            k=int(obj["k"]),
            eps_greedy=parse_mass(obj["eps_greedy"]),
            eps_cond=parse_mass(obj["eps_cond"]),
            construction=obj["construction"],
            seed=atom_at(*obj["seed"]),
            collections={
                parse_key(s): [atom_at(l, i) for l, i in mem]
                for s, mem in obj["collections"].items()
            },
            functions={
                parse_key(s): SimpleFunction(tree, [parse_mass(v) for v in vals])
                for s, vals in obj["functions"].items()
            },
            level_s=int(obj["level_s"]),
            K=int(obj.get("K", K_VARIATION)),
        )


# -- construction ------------------------------------------------------------


def _covers_at_least(
    coll: AtomCollection, atom: Atom, gens: int, floor: Fraction
) -> bool:
    """Whether the gens-fold generation keeps at least a `floor` share of the
    atom.  Generation unions only shrink, so the walk stops at the first
    level already below the floor."""
    current: list[Atom] = [atom]
    need = floor * atom.p
    kept = atom.p
    for _ in range(gens):
        nxt: list[Atom] = []
        for r in current:
            nxt.extend(m for m in first_generation(coll, r) if isinstance(m, Atom))
        current = nxt
        kept = union_mass(coll.tree, current)
        if kept < need:
            return False
    return kept > need


def _certified_h(
    tree: FiltrationTree,
    coll: AtomCollection,
    atom: Atom,
    eps_g: Fraction,
    k: int,
) -> ProtoHaar | None:
    """Sign split on one atom, accepted only with a clean certificate and
    both sign sets at least (1/2 - eps_g) of the atom's mass."""
    try:
        ph = construct_protohaar(tree, atom, eps_g, k=k, collection=coll)
    except ValueError:
        return None
    cert = certify(ph)
    if not all(c.ok for c in cert.checks):
        return None
    if not check_larcon(ph, eps_g):
        return None
    return ph


def _maximal_inside(coll: AtomCollection, flags: Sequence[bool]) -> list[Atom]:
    """Maximal collection members whose leaf interval sits inside the flag
    set entirely."""
    pref = [0]
    for f in flags:
        pref.append(pref[-1] + (1 if f else 0))
    cand = [
        m
        for m in coll.members
        if isinstance(m, Atom) and pref[m.hi] - pref[m.lo] == m.hi - m.lo
    ]
    cand.sort(key=lambda m: (m.lo, -m.hi))
    out: list[Atom] = []
    hi_seen = -1
    for m in cand:
        if m.hi > hi_seen:
            out.append(m)
            hi_seen = m.hi
    out.sort(key=member_key)
    return out


def build_gg_system(
    tree: FiltrationTree,
    n: int,
    delta: Fraction,
    ks: Sequence[int] = (6, 5, 4, 3, 2),
) -> GGSystem:
    """Build and fully verify a nested sign-splitting system.

    The stride k is tuned downward: each attempt fixes the sign-split slack
    at 5 * 2^-(k+2) (just above the 2^-k termination floor) and the density
    slack at a quarter of that.  An attempt first tries the nested-family
    route (condense); when the tree is not deep enough for its compounded
    thresholds, it falls back to tiling the sign sets with maximal light
    children directly, refining any tile whose forward generations are too
    thin to host its own split.  The first attempt whose output passes every
    structural condition wins; when none does, the collected notes explain
    each failure.
    """
    delta = Fraction(delta)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    coll = light_children(tree)
    notes: list[str] = []
    if not coll.members:
        raise Infeasible(["no light children at all (single-path tree)"])

    for k in ks:
        eps_g = Fraction(5, 1 << (k + 2))
        eps_c = eps_g / 4
        system = _attempt(tree, coll, n, delta, k, eps_g, eps_c, notes)
        if system is None:
            continue
        report = verify_gg(system)
        if report.ok:
            return system
        bad = ", ".join(it.name for it in report.items if not it.ok)
        notes.append(f"k={k}: built but failed {bad}")
    raise Infeasible(notes)


def _attempt(
    tree: FiltrationTree,
    coll: AtomCollection,
    n: int,
    delta: Fraction,
    k: int,
    eps_g: Fraction,
    eps_c: Fraction,
    notes: list[str],
) -> GGSystem | None:
    universe: list[list[Atom]] | None = None
    seed: Atom | None = None
    construction = "refined-tiling"
    # cheap pre-scan for a condensation seed: the compounded threshold is
    # demanding, and the early-exit walk makes a failed scan nearly free
    cond_floor = 1 - (eps_c / 2) ** n
    cond_seed = next(
        (
            m
            for m in coll.members[:256]
            if isinstance(m, Atom) and _covers_at_least(coll, m, k * n, cond_floor)
        ),
        None,
    )
    if cond_seed is None:
        notes.append(f"k={k}: condensation NotFound (no seed at {cond_floor})")
    else:
        try:
            cs = condense(coll, k=k, n=n, eps=eps_c, seed=cond_seed)
            universe = [[node.member for node in lvl] for lvl in cs.levels[1:]]
            seed = cs.levels[0][0].member
            construction = "condense"
        except NotFound as exc:
            notes.append(f"k={k}: condensation NotFound ({exc.args[0]} needed)")

    viable_cache: dict[int, bool] = {}

    def viable(atom: Atom) -> bool:
        got = viable_cache.get(id(atom))
        if got is None:
            got = _covers_at_least(coll, atom, k, 1 - eps_g / 2)
            viable_cache[id(atom)] = got
        return got

    hs: dict[Atom, ProtoHaar] = {}

    def h_for(atom: Atom) -> ProtoHaar | None:
        ph = hs.get(atom)
        if ph is None:
            ph = _certified_h(tree, coll, atom, eps_g, k)
            if ph is not None:
                hs[atom] = ph
        return ph

    if seed is None or h_for(seed) is None:
        seed = None
        for m in coll.members:
            if isinstance(m, Atom) and viable(m) and h_for(m) is not None:
                seed = m
                break
        if seed is None:
            notes.append(f"k={k}: no member passes the sign-split viability gate")
            return None
        universe = None
        construction = "refined-tiling"

    collections: dict[Key, list[Atom]] = {(0, 0): [seed]}
    functions: dict[Key, SimpleFunction] = {}
    L = len(tree.leaves)

    for l in range(n):
        for i in range(1 << l):
            key = (l, i)
            members = collections.get(key, [])
            values = [Fraction(0)] * L
            ok_members = True
            for a in members:
                ph = h_for(a)
                if ph is None:
                    notes.append(
                        f"k={k}: member {a.path_str()} of {key_str(key)} "
                        "lost its certificate"
                    )
                    ok_members = False
                    break
                for j in range(a.lo, a.hi):
                    values[j] = ph.h.values[j][0]
            if not ok_members:
                return None
            g = SimpleFunction(tree, values)
            functions[key] = g
            plus_flags = [v[0] == 1 for v in g.values]
            minus_flags = [v[0] == -1 for v in g.values]
            refine = l + 1 <= n - 1
            for half, flags in (((l + 1, 2 * i), plus_flags), ((l + 1, 2 * i + 1), minus_flags)):
                if universe is not None:
                    chosen = _select_from_universe(tree, universe[l], flags)
                else:
                    chosen = _tiled_selection(coll, flags, refine, viable)
                collections[half] = chosen

    return GGSystem(
        tree=tree,
        n=n,
        delta=delta,
        eps=delta * Fraction(1, 1 << (n + 1)),
        k=k,
        eps_greedy=eps_g,
        eps_cond=eps_c,
        construction=construction,
        seed=seed,
        collections=collections,
        functions=functions,
        level_s=tree.depth,
        protos=hs,
    )


def _select_from_universe(
    tree: FiltrationTree, candidates: list[Atom], flags: Sequence[bool]
) -> list[Atom]:
    """Candidates strictly inside the flag set (set mass strictly larger)."""
    pref = [0]
    for f in flags:
        pref.append(pref[-1] + (1 if f else 0))
    set_mass = sum(
        (leaf.p for leaf, f in zip(tree.leaves, flags) if f), Fraction(0)
    )
    out = [
        a
        for a in candidates
        if pref[a.hi] - pref[a.lo] == a.hi - a.lo and a.p < set_mass
    ]
    out.sort(key=member_key)
    return out


def _tiled_selection(
    coll: AtomCollection,
    flags: Sequence[bool],
    refine: bool,
    viable,
) -> list[Atom]:
    tiles = _maximal_inside(coll, flags)
    if not refine:
        return tiles
    out: list[Atom] = []
    queue = deque(tiles)
    while queue:
        c = queue.popleft()
        if viable(c):
            out.append(c)
        else:
            queue.extend(m for m in first_generation(coll, c) if isinstance(m, Atom))
    out.sort(key=member_key)
    return out


# -- verification ------------------------------------------------------------


@dataclass
class GGVerification:
    items: list[CheckItem]
    a2_strict: bool
    a8_map: dict[tuple[int, int], Key]

    @property
    def ok(self) -> bool:
        return all(it.ok for it in self.items)

    def to_obj(self) -> dict:
        return {
            "ok": self.ok,
            "a2_strict": self.a2_strict,
            "items": [
                {"name": it.name, "ok": it.ok, "witness": it.witness}
                for it in self.items
            ],
        }


def _disjoint_within(members: list[Atom]) -> tuple[bool, str]:
    spans = sorted((a.lo, a.hi) for a in members)
    for (lo1, hi1), (lo2, _) in zip(spans, spans[1:]):
        if lo2 < hi1:
            return False, f"[{lo1},{hi1}) overlaps [{lo2},..)"
    return True, ""


def verify_gg(system: GGSystem) -> GGVerification:
    """Exhaustive check of the ten structural conditions, with witnesses."""
    tree = system.tree
    coll = light_children(tree)
    coll_ids = {id(m) for m in coll.members}
    items: list[CheckItem] = []
    n = system.n
    keys = dyadic_keys(n)
    seed = system.seed
    a0_mass = seed.p

    # A1: the root collection is exactly the seed
    root = system.collections.get((0, 0), [])
    items.append(
        CheckItem(
            "A1-root-collection",
            len(root) == 1 and root[0] is seed,
            f"root collection = {[a.path_str() for a in root]}",
        )
    )

    # A2: membership and containment in the seed
    bad = []
    all_members_ids = set()
    for key in keys:
        for a in system.collections.get(key, []):
            all_members_ids.add(id(a))
            if id(a) not in coll_ids:
                bad.append(f"{key_str(key)}:{a.path_str()} not a light child")
            elif not (seed.lo <= a.lo and a.hi <= seed.hi):
                bad.append(f"{key_str(key)}:{a.path_str()} leaves the seed")
    inside_ids = {
        id(m) for m in coll.members if seed.lo <= m.lo and m.hi <= seed.hi
    }
    a2_strict = all_members_ids < inside_ids
    items.append(CheckItem("A2-membership", not bad, "; ".join(bad[:3])))

    # A3: pairwise disjoint within each collection
    bad = []
    for key in keys:
        ok, wit = _disjoint_within(system.collections.get(key, []))
        if not ok:
            bad.append(f"{key_str(key)}: {wit}")
    items.append(CheckItem("A3-disjoint", not bad, "; ".join(bad[:3])))

    # A4: star sets nest and meet exactly as the intervals do
    flags = {key: system.star_leaves(key) for key in keys}
    bad = []
    for ka in keys:
        fa = flags[ka]
        for kb in keys:
            fb = flags[kb]
            subset = all((not x) or y for x, y in zip(fa, fb))
            la, ia = ka
            lb, ib = kb
            int_subset = la >= lb and (ia >> (la - lb)) == ib
            if subset != int_subset:
                bad.append(f"{key_str(ka)} vs {key_str(kb)}: subset {subset}")
            meets = any(x and y for x, y in zip(fa, fb))
            int_meets = int_subset or (lb >= la and (ib >> (lb - la)) == ia)
            if meets != int_meets:
                bad.append(f"{key_str(ka)} vs {key_str(kb)}: meet {meets}")
    items.append(CheckItem("A4-nesting", not bad, "; ".join(bad[:3])))

    # A5: range, support, and the sign pattern across the two halves
    bad = []
    for key in dyadic_keys(n - 1):
        g = system.functions.get(key)
        if g is None:
            bad.append(f"missing function {key_str(key)}")
            continue
        star = flags[key]
        for j, v in enumerate(g.values):
            x = v[0]
            if not -1 <= x <= 1:
                bad.append(f"{key_str(key)}: value {x} at leaf {j}")
                break
            if x != 0 and not star[j]:
                bad.append(f"{key_str(key)}: support leaks at leaf {j}")
                break
        l, i = key
        for sign, half in ((1, (l + 1, 2 * i)), (-1, (l + 1, 2 * i + 1))):
            for j, f in enumerate(flags[half]):
                if f and g.values[j][0] != sign:
                    bad.append(
                        f"{key_str(half)} not inside the {sign:+d} set at leaf {j}"
                    )
                    break
    items.append(CheckItem("A5-sign-pattern", not bad, "; ".join(bad[:3])))

    # A6/A7: common measurability level
    deep = [
        f"{key_str(key)}:{a.path_str()}"
        for key in keys
        for a in system.collections.get(key, [])
        if a.level > system.level_s
    ]
    items.append(CheckItem("A6-member-level", not deep, "; ".join(deep[:3])))
    items.append(
        CheckItem(
            "A7-function-level",
            system.level_s == tree.depth
            and all(g.tree is tree for g in system.functions.values()),
            f"S = {system.level_s}, depth = {tree.depth}",
        )
    )

    # A8: at most one active interval per atom and level
    ok8, viol8, amap = verify_A8(system)
    items.append(CheckItem("A8-unique-active", ok8, "; ".join(viol8[:3])))

    # A9: summed difference L1 norms against K times the star mass
    bad = []
    for key in dyadic_keys(n - 1):
        g = system.functions[key]
        var = variation_sum(g, scalar_space())
        cap = system.K * system.star_mass(key)
        if var > cap:
            bad.append(f"{key_str(key)}: {var} > {cap}")
    items.append(CheckItem("A9-variation", not bad, "; ".join(bad[:3])))

    # A10: the mass window, exact
    bad = []
    for key in keys:
        mass = system.star_mass(key)
        size = interval_length(key)
        lo_bound = (size - 2 * system.eps) * a0_mass
        hi_bound = size * a0_mass
        if not lo_bound <= mass <= hi_bound:
            bad.append(
                f"{key_str(key)}: {mass} outside [{lo_bound}, {hi_bound}]"
            )
    items.append(CheckItem("A10-mass-window", not bad, "; ".join(bad[:3])))

    # replayed induction floor (coarser than A10 but construction-tied)
    bad = []
    base = Fraction(1, 2) - system.eps_greedy - system.eps_cond
    for key in keys:
        floor = a0_mass * base ** key[0]
        if system.star_mass(key) < floor:
            bad.append(f"{key_str(key)}: below {floor}")
    items.append(CheckItem("mass-induction", not bad, "; ".join(bad[:3])))

    return GGVerification(items=items, a2_strict=a2_strict, a8_map=amap)


def verify_A8(
    system: GGSystem,
) -> tuple[bool, list[str], dict[tuple[int, int], Key]]:
    """Exact scan: for every level m and level-m atom, at most one interval
    has a nonzero difference there.  Returns the active-interval map keyed
    by (m, atom index)."""
    amap: dict[tuple[int, int], Key] = {}
    violations: list[str] = []
    for key in dyadic_keys(system.n - 1):
        g = system.functions[key]
        jumps = diff_atom_values(g)
        for a, v in jumps.items():
            if all(x == 0 for x in v):
                continue
            spot = (a.level, a.idx)
            other = amap.get(spot)
            if other is not None and other != key:
                violations.append(
                    f"level {a.level} atom {a.idx}: both {key_str(other)} "
                    f"and {key_str(key)} active"
                )
            else:
                amap[spot] = key
    return not violations, violations, amap


def verify_A9_holder(
    system: GGSystem, p: float
) -> list[tuple[Key, float, float, bool]]:
    """Per interval: summed p-th powers of the difference norms against
    K^(2-p) times the star mass, within 1e-9."""
    if not 1.0 < p <= 2.0:
        raise ValueError("p must lie in (1, 2]")
    out = []
    sp = scalar_space()
    for key in dyadic_keys(system.n - 1):
        g = system.functions[key]
        _, diffs = martingale_diffs(g)
        lhs = sum(lp_norm(d, sp, p) ** p for d in diffs)
        rhs = float(system.K) ** (2.0 - p) * float(system.star_mass(key))
        out.append((key, lhs, rhs, lhs <= rhs + 1e-9))
    return out


# -- distributional transfer -------------------------------------------------


@dataclass
class TransferItem:
    name: str
    ok: bool
    lhs: float
    rhs: float
    note: str = ""


@dataclass
class TransferReport:
    n: int
    p: float
    delta: Fraction
    theta_p: float
    u_sizes: dict[Key, Fraction]
    v_sizes: dict[Key, Fraction]
    w_u: Fraction
    w_v: Fraction
    w_b: Fraction
    tuples_match: bool
    mismatches: list[str]
    items: list[TransferItem]
    classical_norm: float
    reconstruction_norm: float
    t_measured: float
    gap_term: float

    @property
    def ok(self) -> bool:
        return self.tuples_match and all(it.ok for it in self.items)

    def to_obj(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "delta": format_mass(self.delta),
            "theta_p": self.theta_p,
            "w_u": format_mass(self.w_u),
            "w_v": format_mass(self.w_v),
            "w_b": format_mass(self.w_b),
            "tuples_match": self.tuples_match,
            "mismatches": self.mismatches,
            "classical_norm": self.classical_norm,
            "reconstruction_norm": self.reconstruction_norm,
            "t_measured": self.t_measured,
            "gap_term": self.gap_term,
            "ok": self.ok,
            "items": [
                {
                    "name": it.name,
                    "ok": it.ok,
                    "lhs": it.lhs,
                    "rhs": it.rhs,
                    "note": it.note,
                }
                for it in self.items
            ],
        }


def transfer_check(
    system: GGSystem,
    xs: dict[Key, tuple],
    space: NormedSpace,
    p: float,
    budget: int = 400,
    require_verified: bool = True,
) -> TransferReport:
    """Compare the g-span against the classical sign-function span.

    Exact part: on each bottom collection every g is constant; the value
    tuples, weighted by the trimmed normalized set sizes, match the
    classical joint distribution as multisets.  Numeric part: the chain
    from the classical norm through the tree-side integrals to the final
    defect bound, link by link, with the measured type constant of the tree
    (the combination itself rides along as a probe, so the type link is an
    inequality by construction).
    """
    if require_verified:
        rep = verify_gg(system)
        if not rep.ok:
            bad = ", ".join(it.name for it in rep.items if not it.ok)
            raise ValueError(f"system fails verification: {bad}")
    tree = system.tree
    n = system.n
    delta = system.delta
    eps = system.eps
    fkeys = dyadic_keys(n - 1)
    bottoms = [(n, i) for i in range(1 << n)]
    dim = space.dim
    zero = (Fraction(0),) * dim
    xvals = {key: tuple(Fraction(c) for c in xs.get(key, zero)) for key in fkeys}

    mismatches: list[str] = []

    # constancy and value tuples on the bottom star sets
    tuples: dict[Key, tuple[int, ...]] = {}
    for bkey in bottoms:
        members = system.collections.get(bkey, [])
        vals: list[int] = []
        for fkey in fkeys:
            g = system.functions[fkey]
            seen: set[Fraction] = set()
            for a in members:
                seen.update(g.values[j][0] for j in range(a.lo, a.hi))
            if len(seen) > 1:
                mismatches.append(
                    f"{key_str(fkey)} not constant on {key_str(bkey)}"
                )
                seen = {Fraction(0)}
            v = seen.pop() if seen else Fraction(0)
            if v not in (-1, 0, 1):
                mismatches.append(
                    f"{key_str(fkey)} takes {v} on {key_str(bkey)}"
                )
                v = Fraction(0)
            vals.append(int(v))
        tuples[bkey] = tuple(vals)

    # trimmed and full set sizes
    u_sizes = {bkey: interval_length(bkey) - 2 * eps for bkey in bottoms}
    v_sizes = {
        bkey: system.star_mass(bkey) / system.seed.p for bkey in bottoms
    }
    scale = 1 / (1 - delta)

    # multiset comparison at exactly-normalized masses
    built = sorted(
        (tuples[bkey], u_sizes[bkey] * scale) for bkey in bottoms
    )
    classical = sorted(
        (
            tuple(classical_sign(fkey, c, n) for fkey in fkeys),
            Fraction(1, 1 << n),
        )
        for c in range(1 << n)
    )
    tuples_match = built == classical
    if not tuples_match:
        for got, want in zip(built, classical):
            if got != want:
                mismatches.append(f"{got} != {want}")

    items: list[TransferItem] = []

    def push(name: str, lhs: float, rhs: float, tol: float, note: str = "") -> None:
        items.append(TransferItem(name, lhs <= rhs + tol, lhs, rhs, note))

    # normalization identity: trimmed size over (1 - delta) is the cell size
    norm_ok = all(
        u_sizes[bkey] * scale == interval_length(bkey) for bkey in bottoms
    )
    items.append(
        TransferItem(
            "u-normalization",
            norm_ok,
            0.0,
            0.0,
            "(|I| - 2 eps)/(1 - delta) = |I| exactly",
        )
    )
    umono_ok = all(u_sizes[b] <= v_sizes[b] for b in bottoms)
    items.append(
        TransferItem("u-inside-v", umono_ok, 0.0, 0.0, "|U_I| <= |V_I| per I")
    )

    def combo_norm_p(sign_tuple: tuple[int, ...]) -> float:
        acc = [Fraction(0)] * dim
        for s, fkey in zip(sign_tuple, fkeys):
            if s:
                xv = xvals[fkey]
                for t in range(dim):
                    acc[t] += s * xv[t]
        return space.norm(tuple(acc)) ** p

    classical_int = sum(
        combo_norm_p(tup) * float(m) for tup, m in classical
    )
    u_int = sum(
        combo_norm_p(tuples[b]) * float(u_sizes[b] * scale) for b in bottoms
    )
    push("u-integral-matches-classical", abs(classical_int - u_int), 0.0, 1e-12)

    v_int = sum(
        combo_norm_p(tuples[b]) * float(v_sizes[b] * scale) for b in bottoms
    )
    push("u-to-v-monotone", u_int, v_int, 1e-12)

    # tree-side function f = sum of x_J g_J
    fvals = [list(zero) for _ in tree.leaves]
    for fkey in fkeys:
        g = system.functions[fkey]
        xv = xvals[fkey]
        for j, gv in enumerate(g.values):
            s = gv[0]
            if s:
                row = fvals[j]
                for t in range(dim):
                    row[t] += s * xv[t]
    f = SimpleFunction(tree, [tuple(r) for r in fvals])

    wb_flags = [False] * len(tree.leaves)
    for b in bottoms:
        for a in system.collections.get(b, []):
            for j in range(a.lo, a.hi):
                wb_flags[j] = True
    b_int = sum(
        space.norm(v) ** p * float(leaf.p)
        for v, leaf, fl in zip(f.values, tree.leaves, wb_flags)
        if fl
    )
    push(
        "v-equals-b-share",
        abs(v_int * float(1 - delta) - b_int / float(system.seed.p)),
        0.0,
        1e-12,
        "V-weighted sum reproduces the star-set integral over P(A0)",
    )

    omega_int = lp_norm(f, space, p) ** p
    push("b-to-omega-monotone", b_int, omega_int, 1e-12)

    # measured type constant with the combination riding along
    from haartype.typeconst import empirical_type_constant

    fmat = np.array(
        [[float(c) for c in v] for v in f.values], dtype=float
    )
    est = empirical_type_constant(
        tree, space, p, budget=budget, seed=0, extra=[("transfer-f", fmat)]
    )
    t_meas = est.constant
    _, diffs = martingale_diffs(f)
    diff_sum = sum(lp_norm(d, space, p) ** p for d in diffs)
    push("type-bound", omega_int, t_meas**p * diff_sum, 1e-9)

    # the difference mass factorizes through the per-interval variations
    per_interval = []
    for fkey in fkeys:
        g = system.functions[fkey]
        _, gdiffs = martingale_diffs(g)
        per_interval.append(
            (fkey, sum(lp_norm(d, scalar_space(), p) ** p for d in gdiffs))
        )
    factored = sum(
        space.norm(xvals[fkey]) ** p * s for fkey, s in per_interval
    )
    push("diff-factorization", abs(diff_sum - factored), 0.0, 1e-9)

    theta = 2.0 - p
    bad_var = [
        key_str(fkey)
        for fkey, s in per_interval
        if s > float(system.K) ** theta * float(system.star_mass(fkey)) + 1e-9
    ]
    items.append(
        TransferItem(
            "per-interval-variation",
            not bad_var,
            0.0,
            0.0,
            "; ".join(bad_var[:3]),
        )
    )

    xnorms = [space.norm(xvals[fkey]) for fkey in fkeys]
    weighted = sum(
        x**p * float(interval_length(fkey)) for x, fkey in zip(xnorms, fkeys)
    )
    gap = float(n) * float(delta) / float(1 - delta) * max(xnorms, default=0.0)
    push(
        "headline",
        classical_int,
        t_meas**p * float(system.K) ** theta * weighted + gap,
        1e-9,
        "classical p-th power against the transferred bound plus defect",
    )

    return TransferReport(
        n=n,
        p=p,
        delta=delta,
        theta_p=theta,
        u_sizes=u_sizes,
        v_sizes=v_sizes,
        w_u=sum(u_sizes.values(), Fraction(0)),
        w_v=sum(v_sizes.values(), Fraction(0)),
        w_b=sum((system.star_mass(b) for b in bottoms), Fraction(0)),
        tuples_match=tuples_match,
        mismatches=mismatches,
        items=items,
        classical_norm=classical_int ** (1.0 / p),
        reconstruction_norm=u_int ** (1.0 / p),
        t_measured=t_meas,
        gap_term=gap,
    )
