"""Finite weighted filtration trees with exact rational masses.

A tree models a filtered probability space: the root carries mass 1, every
atom's children partition it (child masses sum exactly to the parent's), and
every leaf sits at the same depth.  Children are kept in nonincreasing order
of mass, so the heaviest child of an atom always occupies the leftmost slice
of its leaf interval.  That layout is load-bearing: every atom is a
contiguous interval of leaves, and so is the atom minus its heaviest child.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random
from typing import Iterator


class TreeError(ValueError):
    """Raised when a tree violates a structural invariant."""


def parse_mass(s: str | int) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(s)


def format_mass(p: Fraction) -> str:
    return f"{p.numerator}/{p.denominator}" if p.denominator != 1 else str(p.numerator)


@dataclass(eq=False)
class Atom:
    idx: int                    # global construction index, BFS order
    level: int
    p: Fraction
    parent: Atom | None
    path: tuple[int, ...]
    children: list[Atom] = field(default_factory=list)
    lo: int = -1                # leaf interval [lo, hi)
    hi: int = -1

    @property
    def n_children(self) -> int:
        return len(self.children)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def first_child(self) -> Atom:
        return self.children[0]

    @property
    def tilde_interval(self) -> tuple[int, int]:
        """Leaf interval of this atom minus its heaviest child.

        Empty (zero width) when the atom has a single child.
        """
        return (self.children[0].hi, self.hi)

    def path_str(self) -> str:
        return "/" + "/".join(str(i) for i in self.path)

    def __repr__(self) -> str:
        return f"Atom({self.path_str()}, p={format_mass(self.p)}, [{self.lo},{self.hi}))"


def prec_key(a: Atom) -> tuple[int, Fraction, int]:
    """Total order on atoms: by level, then mass descending, then construction order."""
    return (a.level, -a.p, a.idx)


class FiltrationTree:
    """A validated tree.  `levels[l]` lists atoms of depth l left to right."""

    def __init__(self, root: Atom):
        self.root = root
        self.levels: list[list[Atom]] = []
        frontier = [root]
        while frontier:
            self.levels.append(frontier)
            frontier = [c for a in frontier for c in a.children]
        self.depth = len(self.levels) - 1
        self.atoms: list[Atom] = [a for lvl in self.levels for a in lvl]
        for i, a in enumerate(self.atoms):
            a.idx = i
        self.leaves = self.levels[-1]
        for i, leaf in enumerate(self.leaves):
            leaf.lo, leaf.hi = i, i + 1
        for lvl in reversed(self.levels[:-1]):
            for a in lvl:
                a.lo = a.children[0].lo
                a.hi = a.children[-1].hi
        # prefix[i] = total mass of leaves [0, i)
        self.prefix: list[Fraction] = [Fraction(0)]
        for leaf in self.leaves:
            self.prefix.append(self.prefix[-1] + leaf.p)
        self._validate()

    def _validate(self) -> None:
        if self.root.p != 1:
            raise TreeError(f"root mass is {format_mass(self.root.p)}, expected 1")
        for a in self.atoms:
            if a.p <= 0:
                raise TreeError(f"atom {a.path_str()} has nonpositive mass")
            if a.children:
                if sum(c.p for c in a.children) != a.p:
                    raise TreeError(
                        f"children of {a.path_str()} sum to "
                        f"{format_mass(sum(c.p for c in a.children))}, "
                        f"expected {format_mass(a.p)}"
                    )
                for prev, cur in zip(a.children, a.children[1:]):
                    if cur.p > prev.p:
                        raise TreeError(
                            f"child {cur.path_str()} is heavier than its left "
                            f"sibling; children must be nonincreasing"
                        )
            elif a.level != self.depth:
                raise TreeError(
                    f"leaf {a.path_str()} at depth {a.level}, expected {self.depth}"
                )

    # -- measure helpers ---------------------------------------------------

    def interval_mass(self, lo: int, hi: int) -> Fraction:
        return self.prefix[hi] - self.prefix[lo]

    def internal_atoms(self) -> Iterator[Atom]:
        for lvl in self.levels[:-1]:
            yield from lvl

    def atoms_prec(self) -> list[Atom]:
        return sorted(self.atoms, key=prec_key)

    # -- serialization -----------------------------------------------------

    def to_obj(self) -> dict:
        def rec(a: Atom) -> dict:
            return {"p": format_mass(a.p), "children": [rec(c) for c in a.children]}
        return rec(self.root)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_obj(), **kw)

    @classmethod
    def from_obj(cls, obj: dict) -> FiltrationTree:
        def rec(node: dict, parent: Atom | None, path: tuple[int, ...], level: int) -> Atom:
            if not isinstance(node, dict) or "p" not in node:
                raise TreeError(f"node at /{'/'.join(map(str, path))} lacks a mass")
            try:
                p = parse_mass(node["p"])
            except (ValueError, ZeroDivisionError) as e:
                raise TreeError(
                    f"bad mass {node['p']!r} at /{'/'.join(map(str, path))}: {e}"
                ) from None
            a = Atom(idx=-1, level=level, p=p, parent=parent, path=path)
            for i, ch in enumerate(node.get("children", [])):
                a.children.append(rec(ch, a, path + (i,), level + 1))
            return a
        return cls(rec(obj, None, (), 0))

    @classmethod
    def from_json(cls, text: str) -> FiltrationTree:
        return cls.from_obj(json.loads(text))


# -- builders ---------------------------------------------------------------


def build_dyadic(depth: int) -> FiltrationTree:
    """Uniform binary tree of the given depth; every atom splits in half."""
    def rec(p: Fraction, path: tuple[int, ...], level: int, parent: Atom | None) -> Atom:
        a = Atom(idx=-1, level=level, p=p, parent=parent, path=path)
        if level < depth:
            a.children = [rec(p / 2, path + (i,), level + 1, a) for i in range(2)]
        return a
    return FiltrationTree(rec(Fraction(1), (), 0, None))


def build_chain(depth: int, delta: Fraction) -> FiltrationTree:
    """A single splitting spine: each spine atom sheds a (delta)-fraction.

    The heavier piece keeps splitting; the lighter piece is carried to the
    bottom by single-child copies so all leaves share one depth.
    """
    delta = Fraction(delta)
    if not 0 < delta < Fraction(1, 2):
        raise ValueError("delta must lie in (0, 1/2)")

    def copies(p: Fraction, path: tuple[int, ...], level: int, parent: Atom | None) -> Atom:
        a = Atom(idx=-1, level=level, p=p, parent=parent, path=path)
        if level < depth:
            a.children = [copies(p, path + (0,), level + 1, a)]
        return a

    def spine(p: Fraction, path: tuple[int, ...], level: int, parent: Atom | None) -> Atom:
        a = Atom(idx=-1, level=level, p=p, parent=parent, path=path)
        if level < depth:
            a.children = [
                spine(p * (1 - delta), path + (0,), level + 1, a),
                copies(p * delta, path + (1,), level + 1, a),
            ]
        return a

    return FiltrationTree(spine(Fraction(1), (), 0, None))


def build_random(
    depth: int,
    seed: int,
    max_width: int = 4,
    copy_prob: float = 0.15,
    min_weight: int = 1,
) -> FiltrationTree:
    """Seeded random tree: distinct sibling masses, occasional single-child runs.

    Larger min_weight makes sibling masses more even (the heaviest child
    takes a smaller share), which keeps the heaviest-child spine light.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if max_width < 2:
        raise ValueError("max_width must be >= 2")
    if min_weight < 1:
        raise ValueError("min_weight must be >= 1")
    rng = Random(seed)

    def rec(p: Fraction, path: tuple[int, ...], level: int, parent: Atom | None) -> Atom:
        a = Atom(idx=-1, level=level, p=p, parent=parent, path=path)
        if level < depth:
            if rng.random() < copy_prob:
                n = 1
            else:
                n = rng.randint(2, max_width)
            # distinct integer weights => distinct sibling masses, no ties
            weights = rng.sample(range(min_weight, min_weight + 10 * n), n)
            weights.sort(reverse=True)
            total = sum(weights)
            a.children = [
                rec(p * w / total, path + (i,), level + 1, a)
                for i, w in enumerate(weights)
            ]
        return a

    return FiltrationTree(rec(Fraction(1), (), 0, None))
