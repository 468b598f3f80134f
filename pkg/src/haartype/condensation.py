"""Dense nested sub-systems, collection coloring, and a stacked-support bound.

``condense`` extracts an n-level nested system from a collection: starting
from a seed whose deep generations still cover almost all of it, each level
keeps only the k-th-generation members whose own future generations remain
dense.  A mass-accounting replay shows the kept children of every node cover
more than a (1 - eps) share of it.

``disjointify`` splits a collection into color classes so that inside each
class the members assigned under a common nearest ancestor carry at most
half its mass.  The class count is compared against the packing-constant
budget floor(4 * Carl + 1).

``estdd_bound`` checks the hypotheses of a stacked-support estimate -- each
summand lives on a tail of a disjoint set sequence, and its mass on later
sets decays geometrically -- and evaluates both sides of the resulting
triangle-type inequality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from haartype.families import (
    AtomCollection,
    Member,
    carleson_constant,
    generation,
    member_key,
    union_mass,
)
from haartype.functions import NormedSpace, SimpleFunction, lp_norm
from haartype.tree import FiltrationTree


class NotFound(Exception):
    """No collection member is dense enough to seed a condensed system."""

    def __init__(self, threshold: Fraction, tried: int, best: tuple[Member, Fraction] | None):
        self.threshold = threshold
        self.tried = tried
        self.best = best
        if best is None:
            detail = "collection is empty"
        else:
            detail = f"best candidate {best[0]!r} has coverage {best[1]}"
        super().__init__(
            f"no member reaches deep-generation coverage >= {threshold} "
            f"({tried} candidates tried; {detail})"
        )


def coverage(coll: AtomCollection, region: Member, gens: int) -> Fraction:
    """Fraction of the region's mass covered by its gens-th generation."""
    members = generation(coll, region, gens)
    return union_mass(coll.tree, members) / region.p


def find_dense_seed(
    coll: AtomCollection, k: int, n: int, eps: Fraction
) -> tuple[Member, Fraction]:
    """First member (in canonical order) whose k*n-th generation covers at
    least a (1 - eps**n) share; returns the member and its coverage."""
    eps = Fraction(eps)
    threshold = 1 - eps**n
    best: tuple[Member, Fraction] | None = None
    tried = 0
    for m in coll.members:
        tried += 1
        cov = coverage(coll, m, k * n)
        if best is None or cov > best[1]:
            best = (m, cov)
        if cov >= threshold:
            return m, cov
    raise NotFound(threshold, tried, best)


@dataclass(eq=False)
class CondensedNode:
    member: Member
    parent: CondensedNode | None
    children: list[CondensedNode] = field(default_factory=list)


@dataclass
class CondensedSystem:
    coll: AtomCollection
    k: int
    n: int
    eps: Fraction               # verified density margin
    eps_inner: Fraction         # filters run at half the margin
    root: CondensedNode
    levels: list[list[CondensedNode]]       # levels[0] = [root]
    seed_coverage: Fraction
    threshold: Fraction


def condense(
    coll: AtomCollection,
    k: int,
    n: int,
    eps: Fraction,
    seed: Member | None = None,
) -> CondensedSystem:
    """Build an n-level nested system whose kept children cover strictly
    more than a (1 - eps) share of every node.

    The selection filters run at eps/2; the factor-two slack is what turns
    the mass-accounting bound into a strict inequality even when a filter
    threshold is met with equality.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if k < 1 or n < 1:
        raise ValueError("k and n must be >= 1")
    inner = eps / 2
    if seed is None:
        seed, cov = find_dense_seed(coll, k, n, inner)
    else:
        cov = coverage(coll, seed, k * n)
        if cov < 1 - inner**n:
            raise NotFound(1 - inner**n, 1, (seed, cov))

    root = CondensedNode(seed, None)
    levels = [[root]]
    for j in range(1, n + 1):
        # keep k-th-generation members that stay dense n-j more rounds
        need = n - j
        floor_cov = 1 - inner**need  # zero at the last level: keep everything
        nxt: list[CondensedNode] = []
        for node in levels[j - 1]:
            for b in generation(coll, node.member, k):
                if need == 0 or coverage(coll, b, k * need) >= floor_cov:
                    child = CondensedNode(b, node)
                    node.children.append(child)
                    nxt.append(child)
        levels.append(nxt)
    return CondensedSystem(
        coll=coll,
        k=k,
        n=n,
        eps=eps,
        eps_inner=inner,
        root=root,
        levels=levels,
        seed_coverage=cov,
        threshold=1 - inner**n,
    )


@dataclass
class CheckItem:
    name: str
    ok: bool
    witness: str


def verify_condensed(sys: CondensedSystem) -> list[CheckItem]:
    """Exact verification of the four structural guarantees of a system."""
    out: list[CheckItem] = []
    tree = sys.coll.tree

    # (i) level j lives inside the k*j-th generation of the seed (checked
    #     both cumulatively and one round at a time)
    ok, wit = True, "all members are generation members of the seed and their parents"
    for j, lvl in enumerate(sys.levels[1:], start=1):
        cumulative = generation(sys.coll, sys.root.member, sys.k * j)
        for node in lvl:
            if node.member not in generation(sys.coll, node.parent.member, sys.k):
                ok, wit = False, f"{node.member!r} not a generation member of its parent"
            if node.member not in cumulative:
                ok, wit = False, f"{node.member!r} not in round {j} from the seed"
    out.append(CheckItem("generation_membership", ok, wit))

    # (ii) siblings are pairwise disjoint and lie inside their parent
    ok, wit = True, "levels are laminar"
    for lvl in sys.levels[1:]:
        seen: list[Member] = []
        for node in lvl:
            m, par = node.member, node.parent.member
            if m.lo < par.lo or m.hi > par.hi:
                ok, wit = False, f"{m!r} leaves its parent"
            for other in seen:
                if m.lo < other.hi and other.lo < m.hi:
                    ok, wit = False, f"{m!r} overlaps {other!r}"
            seen.append(m)
    out.append(CheckItem("laminar", ok, wit))

    # (iii) kept children of every node cover strictly more than a
    #       (1 - eps) share; the filters ran at eps/2, so this holds with
    #       room to spare
    ok, wit = True, f"children cover > (1 - {sys.eps}) of every node"
    for lvl in sys.levels[:-1]:
        for node in lvl:
            got = union_mass(tree, [c.member for c in node.children])
            if got <= (1 - sys.eps) * node.member.p:
                ok, wit = (
                    False,
                    f"{node.member!r}: children cover {got}, "
                    f"need > {(1 - sys.eps) * node.member.p}",
                )
    out.append(CheckItem("dense_children", ok, wit))

    # (iv) per-member geometric decay across one round of k generations
    ok, wit = True, f"every child mass <= 2^-{sys.k} of its parent"
    cap = Fraction(1, 2**sys.k)
    for lvl in sys.levels[1:]:
        for node in lvl:
            if node.member.p > cap * node.parent.member.p:
                ok, wit = False, f"{node.member!r} too heavy under {node.parent.member!r}"
    out.append(CheckItem("mass_decay", ok, wit))
    return out


# -- coloring ----------------------------------------------------------------


@dataclass
class Coloring:
    coll: AtomCollection
    classes: list[list[Member]]
    carleson: Fraction
    budget: int                 # floor(4 * carleson + 1)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def within_budget(self) -> bool:
        return self.n_classes <= self.budget


def disjointify(coll: AtomCollection) -> Coloring:
    """First-fit split of a collection into classes where members grouped
    under a common nearest same-class ancestor carry at most half its mass."""
    members = sorted(coll.members, key=lambda m: (-m.p, m.level, m.idx))
    # nearest proper ancestor within the collection (containment forest)
    order = sorted(coll.members, key=lambda m: (m.lo, -m.hi, member_key(m)))
    parent: dict[int, Member] = {}
    stack: list[Member] = []
    for m in order:
        while stack and stack[-1].hi <= m.lo:
            stack.pop()
        while stack and (stack[-1].lo, stack[-1].hi) == (m.lo, m.hi):
            stack.pop()  # same point set: treat as one containment slot
        if stack:
            parent[id(m)] = stack[-1]
        stack.append(m)

    color: dict[int, int] = {}
    load: dict[tuple[int, int], Fraction] = {}
    classes: list[list[Member]] = []
    for m in members:
        placed = False
        for c in range(len(classes)):
            anc = parent.get(id(m))
            while anc is not None and color.get(id(anc)) != c:
                anc = parent.get(id(anc))
            if anc is None:
                fits = True
            else:
                fits = load.get((c, id(anc)), Fraction(0)) + m.p <= anc.p / 2
            if fits:
                color[id(m)] = c
                classes[c].append(m)
                if anc is not None:
                    load[(c, id(anc))] = load.get((c, id(anc)), Fraction(0)) + m.p
                placed = True
                break
        if not placed:
            color[id(m)] = len(classes)
            classes.append([m])
    carl = carleson_constant(coll.members)
    budget = math.floor(4 * carl + 1)
    return Coloring(coll=coll, classes=classes, carleson=carl, budget=budget)


def verify_coloring(col: Coloring) -> list[CheckItem]:
    out: list[CheckItem] = []

    # classes partition the collection
    assigned = [m for cls in col.classes for m in cls]
    ok = len(assigned) == len(col.coll.members) and all(
        any(m is x for x in assigned) for m in col.coll.members
    )
    out.append(
        CheckItem(
            "partition",
            ok,
            f"{len(assigned)} assignments over {len(col.coll.members)} members",
        )
    )

    # halving: inside one class, children grouped under their nearest
    # same-class ancestor sum to at most half its mass
    ok, wit = True, "every in-class ancestor keeps at least half its mass free"
    for cls in col.classes:
        by_id = {id(m) for m in cls}
        loads: dict[int, Fraction] = {}
        for m in cls:
            anc = _nearest_ancestor_in(col.coll, m, by_id)
            if anc is not None:
                loads[id(anc)] = loads.get(id(anc), Fraction(0)) + m.p
        for m in cls:
            if loads.get(id(m), Fraction(0)) > m.p / 2:
                ok, wit = False, f"{m!r} is overloaded: {loads[id(m)]} > {m.p / 2}"
    out.append(CheckItem("halving", ok, wit))

    out.append(
        CheckItem(
            "class_budget",
            col.within_budget,
            f"{col.n_classes} classes vs budget {col.budget} "
            f"(packing constant {col.carleson})",
        )
    )
    return out


def _nearest_ancestor_in(coll: AtomCollection, m: Member, ids: set[int]) -> Member | None:
    best: Member | None = None
    for other in coll.members:
        if id(other) in ids and other is not m:
            if other.lo <= m.lo and m.hi <= other.hi and (other.lo, other.hi) != (m.lo, m.hi):
                if best is None or (best.lo <= other.lo and other.hi <= best.hi):
                    best = other
    return best


# -- stacked-support estimate ------------------------------------------------


class HypothesisViolation(Exception):
    """A summand fails the support or decay hypothesis; carries (k, j)."""

    def __init__(self, kind: str, k: int | None, j: int, detail: str):
        self.kind = kind
        self.k = k
        self.j = j
        super().__init__(f"{kind} hypothesis fails at (k={k}, j={j}): {detail}")


def estdd_bound(
    funcs: Sequence[SimpleFunction],
    sets: Sequence[set[int]],
    coeffs: Sequence[float],
    space: NormedSpace,
    p: float,
    tol: float = 1e-12,
) -> tuple[float, float]:
    """Verify the stacked-support hypotheses and evaluate the bound.

    funcs[j] must vanish off the union of sets[j:], and its p-mass on
    sets[k + j] must not exceed |coeffs[k]|^p times its total p-mass.
    Returns (norm of the sum, bound); raises HypothesisViolation otherwise.
    """
    if not funcs:
        return 0.0, 0.0
    tree = funcs[0].tree
    if len(coeffs) < len(sets):
        raise ValueError("need a coefficient for every set index")
    for i, d in enumerate(sets):
        for e in sets[i + 1 :]:
            if d & e:
                raise ValueError("sets must be pairwise disjoint")

    for j, g in enumerate(funcs):
        allowed = set().union(*sets[j:]) if j < len(sets) else set()
        zero = (Fraction(0),) * g.dim
        for i, v in enumerate(g.values):
            if v != zero and i not in allowed:
                raise HypothesisViolation(
                    "support", None, j, f"bottom atom {i} outside the allowed tail"
                )
        total = lp_norm(g, space, p) ** p
        for k in range(len(sets) - j):
            mass = sum(
                space.norm(v) ** p * float(leaf.p)
                for i, (v, leaf) in enumerate(zip(g.values, tree.leaves))
                if i in sets[k + j]
            )
            if mass > abs(coeffs[k]) ** p * total + tol:
                raise HypothesisViolation(
                    "decay",
                    k,
                    j,
                    f"mass {mass} exceeds |a_{k}|^p * total = {abs(coeffs[k]) ** p * total}",
                )

    total_fn = funcs[0]
    for g in funcs[1:]:
        total_fn = total_fn + g
    lhs = lp_norm(total_fn, space, p)
    rhs = sum(abs(c) for c in coeffs) * (
        sum(lp_norm(g, space, p) ** p for g in funcs) ** (1.0 / p)
    )
    return lhs, rhs
