"""Float array kernels for probe evaluation.

The exact rational layer (tree.py, functions.py) is authoritative for every
verified inequality.  This module mirrors the level-projection and norm
machinery on numpy arrays for the search loops that only need floats, with
an optional numba backend for the inner reductions.

Backend selection: set HAARTYPE_NUMBA=1 to require numba, 0 to force the
pure-numpy path; unset, numba is used when importable.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from haartype.tree import FiltrationTree

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - environment dependent
    numba = None
    HAS_NUMBA = False


def active_backend() -> str:
    v = os.environ.get("HAARTYPE_NUMBA", "").strip().lower()
    if v in ("1", "true", "yes", "on"):
        if not HAS_NUMBA:
            raise RuntimeError("HAARTYPE_NUMBA=1 but numba is not importable")
        return "numba"
    if v in ("0", "false", "no", "off"):
        return "numpy"
    return "numba" if HAS_NUMBA else "numpy"


@dataclass
class TreeArrays:
    """Per-level atom layout of a tree, as flat arrays."""

    n_leaves: int
    depth: int
    w: np.ndarray                   # leaf masses, float64 [L]
    starts: list[np.ndarray]        # per level: first leaf index of each atom
    counts: list[np.ndarray]        # per level: leaves per atom
    masses: list[np.ndarray]        # per level: atom masses
    parents: list[np.ndarray]       # per level >= 1: parent position in level-1

    @classmethod
    def from_tree(cls, tree: FiltrationTree) -> TreeArrays:
        w = np.array([float(l.p) for l in tree.leaves], dtype=np.float64)
        starts, counts, masses, parents = [], [], [], []
        pos: dict[int, int] = {}
        for n, lvl in enumerate(tree.levels):
            starts.append(np.array([a.lo for a in lvl], dtype=np.int64))
            counts.append(np.array([a.hi - a.lo for a in lvl], dtype=np.int64))
            masses.append(np.array([float(a.p) for a in lvl], dtype=np.float64))
            if n:
                parents.append(
                    np.array([pos[id(a.parent)] for a in lvl], dtype=np.int64)
                )
            pos = {id(a): i for i, a in enumerate(lvl)}
        return cls(
            n_leaves=len(tree.leaves),
            depth=tree.depth,
            w=w,
            starts=starts,
            counts=counts,
            masses=masses,
            parents=[None] + parents,  # type: ignore[list-item]
        )


# -- numpy reference implementations ----------------------------------------


def _row_norms_np(X: np.ndarray, q: float) -> np.ndarray:
    if X.shape[1] == 1:
        return np.abs(X[:, 0])
    if q == 1.0:
        return np.abs(X).sum(axis=1)
    if math.isinf(q):
        return np.abs(X).max(axis=1)
    if q == 2.0:
        return np.sqrt((X * X).sum(axis=1))
    return (np.abs(X) ** q).sum(axis=1) ** (1.0 / q)


def _atom_avgs_np(ta: TreeArrays, V: np.ndarray, level: int) -> np.ndarray:
    wV = ta.w[:, None] * V
    sums = np.add.reduceat(wV, ta.starts[level], axis=0)
    return sums / ta.masses[level][:, None]


# -- numba kernels -----------------------------------------------------------

if HAS_NUMBA:

    @numba.njit(cache=True)
    def _atom_avgs_nb(V, w, starts, counts, masses, out):  # pragma: no cover
        n_atoms, d = out.shape
        for a in range(n_atoms):
            s = starts[a]
            e = s + counts[a]
            for j in range(d):
                acc = 0.0
                for i in range(s, e):
                    acc += w[i] * V[i, j]
                out[a, j] = acc / masses[a]

    @numba.njit(cache=True)
    def _weighted_norm_pow_nb(X, weights, q, p):  # pragma: no cover
        n, d = X.shape
        total = 0.0
        for i in range(n):
            if d == 1:
                r = abs(X[i, 0])
            elif q == 1.0:
                r = 0.0
                for j in range(d):
                    r += abs(X[i, j])
            elif q == np.inf:
                r = 0.0
                for j in range(d):
                    v = abs(X[i, j])
                    if v > r:
                        r = v
            elif q == 2.0:
                r = 0.0
                for j in range(d):
                    r += X[i, j] * X[i, j]
                r = math.sqrt(r)
            else:
                r = 0.0
                for j in range(d):
                    r += abs(X[i, j]) ** q
                r = r ** (1.0 / q)
            total += r**p * weights[i]
        return total


def atom_averages(ta: TreeArrays, V: np.ndarray, level: int) -> np.ndarray:
    """Per-atom weighted means of the leaf matrix at one level."""
    if active_backend() == "numba":
        out = np.empty((len(ta.starts[level]), V.shape[1]), dtype=np.float64)
        _atom_avgs_nb(V, ta.w, ta.starts[level], ta.counts[level], ta.masses[level], out)
        return out
    return _atom_avgs_np(ta, V, level)


def weighted_norm_pow(X: np.ndarray, weights: np.ndarray, q: float, p: float) -> float:
    """Sum of weights[i] * (q-norm of row i)**p."""
    if active_backend() == "numba":
        return float(_weighted_norm_pow_nb(X, weights, float(q), float(p)))
    return float((_row_norms_np(X, q) ** p) @ weights)


def lp_norm_arr(ta: TreeArrays, V: np.ndarray, q: float, p: float) -> float:
    return weighted_norm_pow(V, ta.w, q, p) ** (1.0 / p)


def variation_denominator(ta: TreeArrays, V: np.ndarray, q: float, p: float) -> float:
    """(norm of the mean)^p plus the summed p-th powers of the level
    difference norms, all to the 1/p."""
    avgs = [atom_averages(ta, V, n) for n in range(ta.depth + 1)]
    total = _row_norms_np(avgs[0], q)[0] ** p
    for n in range(1, ta.depth + 1):
        diffs = avgs[n] - avgs[n - 1][ta.parents[n]]
        total += weighted_norm_pow(diffs, ta.masses[n], q, p)
    return total ** (1.0 / p)


def type_ratio(ta: TreeArrays, V: np.ndarray, q: float, p: float) -> float:
    """Ratio of the L_p norm to the variation denominator (0 if degenerate)."""
    den = variation_denominator(ta, V, q, p)
    if den == 0.0:
        return 0.0
    return float(lp_norm_arr(ta, V, q, p) / den)
