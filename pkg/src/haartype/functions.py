"""Exact martingale calculus for simple functions on a filtration tree.

Functions are stored by their values on the bottom-level atoms (one vector of
rationals per leaf, in leaf order).  Conditional expectations, martingale
differences, and the norm paths for max/sum vector norms are all exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from haartype.tree import Atom, FiltrationTree

Vec = tuple[Fraction, ...]


def _as_vec(v) -> Vec:
    if isinstance(v, tuple):
        return tuple(Fraction(x) for x in v)
    return (Fraction(v),)


@dataclass(frozen=True)
class NormedSpace:
    """Finite-dimensional coefficient space with an l_q norm (q = inf -> max)."""

    dim: int
    q: float

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not (self.q >= 1):
            raise ValueError("q must be >= 1 (use math.inf for the max norm)")

    @property
    def has_exact_norm(self) -> bool:
        return self.dim == 1 or self.q == 1 or math.isinf(self.q)

    def norm_exact(self, v: Vec) -> Fraction:
        if self.dim == 1:
            return abs(v[0])
        if self.q == 1:
            return sum((abs(x) for x in v), Fraction(0))
        if math.isinf(self.q):
            return max(abs(x) for x in v)
        raise ValueError(f"no exact norm for q={self.q}")

    def norm(self, v: Sequence[float]) -> float:
        if self.dim == 1:
            return abs(float(v[0]))
        if math.isinf(self.q):
            return max(abs(float(x)) for x in v)
        return sum(abs(float(x)) ** self.q for x in v) ** (1.0 / self.q)

    def __repr__(self) -> str:
        if self.dim == 1:
            return "NormedSpace(scalar)"
        qs = "inf" if math.isinf(self.q) else str(self.q)
        return f"NormedSpace(l_{qs}^{self.dim})"


def scalar_space() -> NormedSpace:
    return NormedSpace(1, 2.0)


def lq_space(q: float, dim: int) -> NormedSpace:
    return NormedSpace(dim, float(q))


class SimpleFunction:
    """A vector-valued function constant on each bottom-level atom."""

    __slots__ = ("tree", "values")

    def __init__(self, tree: FiltrationTree, values: Sequence):
        if len(values) != len(tree.leaves):
            raise ValueError(
                f"{len(values)} values for {len(tree.leaves)} bottom atoms"
            )
        self.tree = tree
        self.values: list[Vec] = [_as_vec(v) for v in values]
        d = len(self.values[0])
        if any(len(v) != d for v in self.values):
            raise ValueError("mixed value dimensions")

    @property
    def dim(self) -> int:
        return len(self.values[0])

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, tree: FiltrationTree, v) -> SimpleFunction:
        return cls(tree, [v] * len(tree.leaves))

    @classmethod
    def indicator(cls, tree: FiltrationTree, lo: int, hi: int) -> SimpleFunction:
        return cls(
            tree,
            [Fraction(1) if lo <= i < hi else Fraction(0) for i in range(len(tree.leaves))],
        )

    # -- arithmetic --------------------------------------------------------

    def _zip(self, other: SimpleFunction, op) -> SimpleFunction:
        if other.tree is not self.tree:
            raise ValueError("functions live on different trees")
        return SimpleFunction(
            self.tree,
            [tuple(op(a, b) for a, b in zip(u, w)) for u, w in zip(self.values, other.values)],
        )

    def __add__(self, other: SimpleFunction) -> SimpleFunction:
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other: SimpleFunction) -> SimpleFunction:
        return self._zip(other, lambda a, b: a - b)

    def __mul__(self, c) -> SimpleFunction:
        c = Fraction(c)
        return SimpleFunction(self.tree, [tuple(c * a for a in v) for v in self.values])

    __rmul__ = __mul__

    def __neg__(self) -> SimpleFunction:
        return self * -1

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SimpleFunction)
            and other.tree is self.tree
            and other.values == self.values
        )

    def integral(self) -> Vec:
        d = self.dim
        acc = [Fraction(0)] * d
        for v, leaf in zip(self.values, self.tree.leaves):
            for i in range(d):
                acc[i] += v[i] * leaf.p
        return tuple(acc)

    def restrict(self, lo: int, hi: int) -> SimpleFunction:
        """Zero the function outside the leaf interval [lo, hi)."""
        z = (Fraction(0),) * self.dim
        return SimpleFunction(
            self.tree,
            [v if lo <= i < hi else z for i, v in enumerate(self.values)],
        )


def average(f: SimpleFunction, atom: Atom) -> Vec:
    """Mean of f over one atom (exact)."""
    d = f.dim
    acc = [Fraction(0)] * d
    for i in range(atom.lo, atom.hi):
        v = f.values[i]
        w = f.tree.leaves[i].p
        for j in range(d):
            acc[j] += v[j] * w
    return tuple(x / atom.p for x in acc)


def cond_expectation(f: SimpleFunction, level: int) -> SimpleFunction:
    """Projection onto functions constant on each atom of the given level."""
    if not 0 <= level <= f.tree.depth:
        raise ValueError(f"level {level} outside [0, {f.tree.depth}]")
    out: list[Vec] = [None] * len(f.values)  # type: ignore[list-item]
    for a in f.tree.levels[level]:
        v = average(f, a)
        for i in range(a.lo, a.hi):
            out[i] = v
    return SimpleFunction(f.tree, out)


def martingale_diffs(f: SimpleFunction) -> tuple[SimpleFunction, list[SimpleFunction]]:
    """Start-level projection and the list of successive differences.

    The differences telescope: f = start + sum of diffs.
    """
    projections = [cond_expectation(f, n) for n in range(f.tree.depth + 1)]
    diffs = [projections[n] - projections[n - 1] for n in range(1, len(projections))]
    return projections[0], diffs


def diff_atom_values(f: SimpleFunction) -> dict[Atom, Vec]:
    """Per-atom jump of the averages: mean over the atom minus mean over its
    parent, for every atom below the root.  The level-n difference function
    takes exactly this value on each level-n atom."""
    avg: dict[Atom, Vec] = {}
    out: dict[Atom, Vec] = {}
    for a in f.tree.atoms:
        avg[a] = average(f, a)
        if a.parent is not None:
            out[a] = tuple(x - y for x, y in zip(avg[a], avg[a.parent]))
    return out


# -- norms ------------------------------------------------------------------


def lp_norm(f: SimpleFunction, space: NormedSpace, p: float) -> float:
    """Float L_p norm of the pointwise space-norm; p = inf for the sup."""
    if math.isinf(p):
        return max(space.norm(v) for v in f.values)
    s = 0.0
    for v, leaf in zip(f.values, f.tree.leaves):
        s += space.norm(v) ** p * float(leaf.p)
    return s ** (1.0 / p)


def lp_power_exact(f: SimpleFunction, space: NormedSpace, p: int) -> Fraction:
    """Exact integral of the p-th power of the pointwise norm (integer p)."""
    if not space.has_exact_norm:
        raise ValueError("space norm is not exactly computable")
    s = Fraction(0)
    for v, leaf in zip(f.values, f.tree.leaves):
        s += space.norm_exact(v) ** p * leaf.p
    return s


def ess_sup_exact(f: SimpleFunction, space: NormedSpace) -> Fraction:
    if not space.has_exact_norm:
        raise ValueError("space norm is not exactly computable")
    return max(space.norm_exact(v) for v in f.values)


def variation_sum(f: SimpleFunction, space: NormedSpace) -> Fraction:
    """Sum over levels of the L_1 norm of each martingale difference (exact)."""
    _, diffs = martingale_diffs(f)
    return sum((lp_power_exact(d, space, 1) for d in diffs), Fraction(0))


def parseval_gap_exact(f: SimpleFunction) -> Fraction:
    """For scalar f: integral of f^2 minus (square of the mean plus the sum of
    squared difference norms).  Identically zero; exposed as a self-check."""
    if f.dim != 1:
        raise ValueError("scalar functions only")
    sp = scalar_space()
    start, diffs = martingale_diffs(f)
    lhs = lp_power_exact(f, sp, 2)
    rhs = start.values[0][0] ** 2 + sum(
        (lp_power_exact(d, sp, 2) for d in diffs), Fraction(0)
    )
    return lhs - rhs


# -- two-sided split function and chain basis --------------------------------


def basis_phi(tree: FiltrationTree, atom: Atom) -> SimpleFunction:
    """Mean-zero split supported on one atom: positive on the heaviest child,
    negative on the rest, weighted so the integral vanishes exactly."""
    if atom.is_leaf:
        raise ValueError("bottom atoms cannot be split")
    star = atom.first_child
    tlo, thi = atom.tilde_interval
    rest_mass = atom.p - star.p
    vals = []
    for i in range(len(tree.leaves)):
        if star.lo <= i < star.hi:
            vals.append(rest_mass)
        elif tlo <= i < thi:
            vals.append(-star.p)
        else:
            vals.append(Fraction(0))
    return SimpleFunction(tree, vals)


def _chain_ratios(chain: Sequence[Atom]) -> list[Fraction]:
    if not chain or chain[0].level != 1:
        raise ValueError("chain must start at a child of the root")
    r = []
    for j, a in enumerate(chain):
        prev_p = a.parent.p if j == 0 else chain[j - 1].p
        if j > 0 and a.parent is not chain[j - 1]:
            raise ValueError("chain atoms must each be a child of the previous one")
        ratio = a.p / prev_p
        if ratio == 1:
            raise ValueError("chain steps must lose mass (no single-child copies)")
        r.append(ratio)
    return r


def basis_k(tree: FiltrationTree, chain: Sequence[Atom], j: int) -> SimpleFunction:
    """j-th element of the chain basis.  Element 0 is the constant one;
    element j >= 1 is the indicator of the j-th chain atom minus the mass
    ratio times the indicator of its predecessor (mean zero)."""
    if j == 0:
        return SimpleFunction.constant(tree, Fraction(1))
    chain = list(chain)
    r = _chain_ratios(chain)
    a = chain[j - 1]
    prev = tree.root if j == 1 else chain[j - 2]
    f = SimpleFunction.indicator(tree, a.lo, a.hi)
    g = SimpleFunction.indicator(tree, prev.lo, prev.hi)
    return f - r[j - 1] * g


def chain_expand(tree: FiltrationTree, chain: Sequence[Atom], coeffs: Sequence) -> SimpleFunction:
    """Linear combination over the chain basis; coeffs[0] scales the constant."""
    chain = list(chain)
    if len(coeffs) != len(chain) + 1:
        raise ValueError("need one coefficient per basis element (constant first)")
    out = SimpleFunction.constant(tree, coeffs[0])
    for j in range(1, len(coeffs)):
        out = out + Fraction(coeffs[j]) * basis_k(tree, chain, j)
    return out


def chain_coeffs(f: SimpleFunction, chain: Sequence[Atom]) -> list[Fraction]:
    """Exact inverse of chain_expand for scalar functions in the basis span.

    The jumps of the plateau values across consecutive chain complements feed
    a backward substitution: the last coefficient equals the last jump, and
    each earlier one is its own jump plus the mass ratio times the successor.
    """
    if f.dim != 1:
        raise ValueError("scalar functions only")
    chain = list(chain)
    r = _chain_ratios(chain)
    n = len(chain)
    # plateau[j] = value of f on chain[j] minus its successor (j = -1: root
    # minus first chain atom); plateau[n-1] = value on the last chain atom
    def plateau(j: int) -> Fraction:
        region = chain[j] if j >= 0 else f.tree.root
        inner = chain[j + 1] if j + 1 < n else None
        for i in range(region.lo, region.hi):
            if inner is None or not (inner.lo <= i < inner.hi):
                return f.values[i][0]
        raise ValueError("chain step loses no bottom atoms")

    jumps = [plateau(j) - plateau(j - 1) for j in range(n)]
    x = [Fraction(0)] * (n + 1)
    for j in range(n, 0, -1):
        x[j] = jumps[j - 1] + (r[j] * x[j + 1] if j < n else Fraction(0))
    x[0] = f.integral()[0]
    return x
