"""Backend selection and numpy/numba parity for the float kernels."""

from __future__ import annotations

import numpy as np
import pytest

from haartype.kernels import (
    HAS_NUMBA,
    TreeArrays,
    active_backend,
    atom_averages,
    lp_norm_arr,
    type_ratio,
    variation_denominator,
    weighted_norm_pow,
)
from haartype.tree import build_dyadic, build_random


def test_backend_selection(monkeypatch):
    monkeypatch.setenv("HAARTYPE_NUMBA", "0")
    assert active_backend() == "numpy"
    monkeypatch.setenv("HAARTYPE_NUMBA", "1")
    if HAS_NUMBA:
        assert active_backend() == "numba"
    else:
        with pytest.raises(RuntimeError):
            active_backend()
    monkeypatch.delenv("HAARTYPE_NUMBA")
    assert active_backend() == ("numba" if HAS_NUMBA else "numpy")


def test_tree_arrays_layout():
    ta = TreeArrays.from_tree(build_dyadic(3))
    assert ta.n_leaves == 8
    assert ta.depth == 3
    assert ta.starts[1].tolist() == [0, 4]
    assert ta.masses[1].tolist() == [0.5, 0.5]
    assert ta.parents[2].tolist() == [0, 0, 1, 1]
    assert ta.w.sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.skipif(not HAS_NUMBA, reason="numba backend not importable")
def test_backend_parity(monkeypatch):
    tree = build_random(5, 3, max_width=4)
    ta = TreeArrays.from_tree(tree)
    rng = np.random.default_rng(7)
    V = rng.standard_normal((ta.n_leaves, 3))
    results = {}
    for flag in ("0", "1"):
        monkeypatch.setenv("HAARTYPE_NUMBA", flag)
        results[flag] = (
            [atom_averages(ta, V, lvl).copy() for lvl in range(ta.depth + 1)],
            weighted_norm_pow(V, ta.w, 1.0, 1.5),
            variation_denominator(ta, V, np.inf, 2.0),
            type_ratio(ta, V, 2.0, 2.0),
        )
    for a0, a1 in zip(results["0"][0], results["1"][0]):
        np.testing.assert_allclose(a0, a1, rtol=1e-12, atol=1e-14)
    for x0, x1 in zip(results["0"][1:], results["1"][1:]):
        assert x0 == pytest.approx(x1, rel=1e-12)


def test_constant_probe_ratio_is_one():
    ta = TreeArrays.from_tree(build_dyadic(4))
    V = np.ones((ta.n_leaves, 1))
    assert type_ratio(ta, V, 2.0, 2.0) == pytest.approx(1.0, abs=1e-14)
    assert lp_norm_arr(ta, V, 2.0, 2.0) == pytest.approx(1.0, abs=1e-14)


def test_degenerate_ratio_is_zero():
    ta = TreeArrays.from_tree(build_dyadic(2))
    V = np.zeros((ta.n_leaves, 2))
    assert type_ratio(ta, V, 2.0, 2.0) == 0.0
