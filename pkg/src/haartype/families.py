"""Collections of tree regions and their Carleson packing constants.

Three collections are derived from a tree:

* ``light_children`` -- every child that is not the heaviest child of its
  parent (optionally together with the root);
* ``top_children``   -- the heaviest child of every internal atom;
* ``remainders``     -- for every internal atom with at least two children,
  the atom minus its heaviest child.

All members are contiguous leaf intervals, any two members of one collection
are nested or disjoint, and distinct members of ``light_children`` or
``remainders`` always occupy distinct intervals.  ``top_children`` may repeat
an interval along a run of single-child atoms.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from haartype.tree import Atom, FiltrationTree


@dataclass(eq=False)
class TildeRegion:
    """An internal atom minus its heaviest child, as a leaf interval."""

    atom: Atom
    lo: int
    hi: int
    p: Fraction
    level: int
    idx: int

    def __repr__(self) -> str:
        return f"TildeRegion(of {self.atom.path_str()}, [{self.lo},{self.hi}), p={self.p})"


Member = Atom | TildeRegion


def member_key(m: Member) -> tuple[int, Fraction, int]:
    """Deterministic total order: level, then mass descending, then build order."""
    return (m.level, -m.p, m.idx)


class AtomCollection:
    """An ordered family of interval members over one tree."""

    def __init__(self, tree: FiltrationTree, members: Iterable[Member], kind: str):
        self.tree = tree
        self.members: list[Member] = sorted(members, key=member_key)
        self.kind = kind

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Member]:
        return iter(self.members)

    def __getitem__(self, i: int) -> Member:
        return self.members[i]

    def point_measure(self) -> Fraction:
        return union_mass(self.tree, self.members)

    def point_leaves(self) -> set[int]:
        out: set[int] = set()
        for m in self.members:
            out.update(range(m.lo, m.hi))
        return out

    def __repr__(self) -> str:
        return f"AtomCollection({self.kind}, {len(self.members)} members)"


def light_children(tree: FiltrationTree, include_root: bool = False) -> AtomCollection:
    mem: list[Member] = []
    for a in tree.internal_atoms():
        mem.extend(a.children[1:])
    if include_root:
        mem.append(tree.root)
    return AtomCollection(tree, mem, "light")


def top_children(tree: FiltrationTree) -> AtomCollection:
    mem = [a.children[0] for a in tree.internal_atoms()]
    return AtomCollection(tree, mem, "top")


def remainders(tree: FiltrationTree) -> AtomCollection:
    mem: list[Member] = []
    for a in tree.internal_atoms():
        if a.n_children >= 2:
            lo, hi = a.tilde_interval
            mem.append(
                TildeRegion(
                    atom=a,
                    lo=lo,
                    hi=hi,
                    p=a.p - a.first_child.p,
                    level=a.level + 1,
                    idx=a.idx,
                )
            )
    return AtomCollection(tree, mem, "remainder")


def union_mass(tree: FiltrationTree, members: Sequence[Member]) -> Fraction:
    """Mass of the union of the members' intervals (they may overlap)."""
    total = Fraction(0)
    cur_lo = cur_hi = None
    for m in sorted(members, key=lambda m: (m.lo, -m.hi)):
        if cur_hi is None or m.lo >= cur_hi:
            if cur_hi is not None:
                total += tree.interval_mass(cur_lo, cur_hi)
            cur_lo, cur_hi = m.lo, m.hi
        elif m.hi > cur_hi:
            cur_hi = m.hi
    if cur_hi is not None:
        total += tree.interval_mass(cur_lo, cur_hi)
    return total


# -- generations ------------------------------------------------------------


def _contains(outer: Member, inner: Member) -> bool:
    return outer.lo <= inner.lo and inner.hi <= outer.hi


def _strictly_inside(m: Member, region: Member) -> bool:
    return _contains(region, m) and (m.lo, m.hi) != (region.lo, region.hi)


def _sweep_view(coll: AtomCollection) -> tuple[list[Member], list[int]]:
    """Members sorted by (lo, -hi), with the lo column alone for bisecting.
    Built once per collection and cached on it."""
    cached = getattr(coll, "_sweep_cache", None)
    if cached is None:
        sweep = sorted(coll.members, key=lambda m: (m.lo, -m.hi))
        cached = (sweep, [m.lo for m in sweep])
        coll._sweep_cache = cached
    return cached


def first_generation(coll: AtomCollection, region: Member) -> list[Member]:
    """Maximal collection members strictly inside the region's interval."""
    sweep, los = _sweep_view(coll)
    span = (region.lo, region.hi)
    out: list[Member] = []
    hi_seen = -1
    # every candidate starts inside the region, so one bisected slice holds
    # them all; sorted so any possible strict container of m came earlier
    for i in range(bisect_left(los, region.lo), bisect_left(los, region.hi)):
        m = sweep[i]
        if m.hi > region.hi or (m.lo, m.hi) == span:
            continue
        if m.hi > hi_seen:
            out.append(m)
            hi_seen = m.hi
        elif out and (out[-1].lo, out[-1].hi) == (m.lo, m.hi):
            out.append(m)  # identical point sets: neither dominates
    out.sort(key=member_key)
    return out


def generation(coll: AtomCollection, region: Member, k: int) -> list[Member]:
    """k-fold iterate of first_generation; k=0 gives the region itself."""
    if k < 0:
        raise ValueError("k must be >= 0")
    current: list[Member] = [region]
    for _ in range(k):
        nxt: list[Member] = []
        for r in current:
            nxt.extend(first_generation(coll, r))
        current = nxt
    current.sort(key=member_key)
    return current


# -- Carleson constant ------------------------------------------------------


def carleson_constant_naive(members: Sequence[Member]) -> Fraction:
    """Reference implementation: direct double loop over containment pairs."""
    best = Fraction(0)
    for outer in members:
        s = sum((m.p for m in members if _contains(outer, m)), Fraction(0))
        best = max(best, s / outer.p)
    return best


def carleson_constant(members: Sequence[Member]) -> Fraction:
    """Largest relative packing mass: max over members I of
    (1/p(I)) * sum of p(J) over members J contained in I.

    Assumes the family is laminar (any two members nested or disjoint),
    which holds for all collections produced here.  Runs in O(n log n)
    via a containment forest with subtree sums.
    """
    if not members:
        return Fraction(0)
    order = sorted(members, key=lambda m: (m.lo, -m.hi))
    parent: dict[int, Member] = {}
    stack: list[Member] = []
    for m in order:
        while stack and stack[-1].hi <= m.lo:
            stack.pop()
        if stack:
            parent[id(m)] = stack[-1]
        stack.append(m)
    sub: dict[int, Fraction] = {id(m): m.p for m in order}
    for m in reversed(order):
        par = parent.get(id(m))
        if par is not None:
            sub[id(par)] += sub[id(m)]
    # members sharing one interval contain each other, so each uses the
    # subtree sum of the first (topmost) member of its interval group
    group_sum: dict[tuple[int, int], Fraction] = {}
    for m in order:
        group_sum.setdefault((m.lo, m.hi), sub[id(m)])
    return max(group_sum[(m.lo, m.hi)] / m.p for m in order)


def carleson_growth(depths: Iterable[int]) -> list[tuple[int, Fraction]]:
    """Carleson constant of the light-children family of uniform binary
    trees, one entry per requested depth."""
    from haartype.tree import build_dyadic

    out = []
    for d in depths:
        t = build_dyadic(d)
        out.append((d, carleson_constant(light_children(t).members)))
    return out
