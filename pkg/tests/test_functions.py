from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haartype.functions import (
    SimpleFunction,
    basis_k,
    basis_phi,
    chain_coeffs,
    chain_expand,
    cond_expectation,
    ess_sup_exact,
    lp_power_exact,
    lq_space,
    martingale_diffs,
    parseval_gap_exact,
    scalar_space,
    variation_sum,
)
from haartype.tree import build_dyadic, build_random

rationals = st.fractions(
    min_value=-3, max_value=3, max_denominator=16
)


def _random_scalar_fn(tree, draw_vals):
    return SimpleFunction(tree, draw_vals)


@settings(max_examples=20, deadline=None)
@given(st.data())
def test_cond_expectation_tower(data):
    tree = build_random(4, data.draw(st.integers(0, 50)), max_width=4)
    vals = data.draw(
        st.lists(rationals, min_size=len(tree.leaves), max_size=len(tree.leaves))
    )
    f = SimpleFunction(tree, vals)
    m = data.draw(st.integers(0, tree.depth))
    n = data.draw(st.integers(0, tree.depth))
    lhs = cond_expectation(cond_expectation(f, m), n)
    rhs = cond_expectation(f, min(m, n))
    assert lhs.values == rhs.values


def test_cond_expectation_endpoints():
    tree = build_dyadic(3)
    vals = [Fraction(i, 8) for i in range(8)]
    f = SimpleFunction(tree, vals)
    e0 = cond_expectation(f, 0)
    assert len(set(e0.values)) == 1
    assert e0.values[0][0] == sum(v * leaf.p for v, leaf in zip(vals, tree.leaves))
    assert cond_expectation(f, tree.depth).values == f.values


def test_cond_expectation_out_of_range():
    tree = build_dyadic(2)
    f = SimpleFunction.constant(tree, Fraction(1))
    with pytest.raises(Exception):
        cond_expectation(f, tree.depth + 1)


def test_cond_expectation_linear_and_contractive():
    tree = build_random(4, 11, max_width=4)
    L = len(tree.leaves)
    f = SimpleFunction(tree, [Fraction((7 * i) % 11 - 5, 3) for i in range(L)])
    g = SimpleFunction(tree, [Fraction((3 * i) % 7 - 3, 2) for i in range(L)])
    sp = scalar_space()
    for n in range(tree.depth + 1):
        lin = cond_expectation(f + g, n)
        assert lin.values == (cond_expectation(f, n) + cond_expectation(g, n)).values
        # L1 contraction, exact
        assert lp_power_exact(cond_expectation(f, n), sp, 1) <= lp_power_exact(f, sp, 1)


def test_martingale_constant_all_diffs_zero():
    tree = build_dyadic(3)
    f = SimpleFunction.constant(tree, Fraction(5, 7))
    mean, diffs = martingale_diffs(f)
    assert mean.values[0][0] == Fraction(5, 7)
    for d in diffs:
        assert all(v[0] == 0 for v in d.values)


def test_martingale_reconstructs_exactly():
    tree = build_random(5, 23, max_width=4)
    L = len(tree.leaves)
    f = SimpleFunction(tree, [Fraction((5 * i) % 13 - 6, 4) for i in range(L)])
    mean, diffs = martingale_diffs(f)
    g = mean
    for d in diffs:
        g = g + d
    assert g.values == f.values


def test_haar_single_nonzero_diff():
    tree = build_dyadic(3)
    a = tree.levels[1][0]
    # the step function +1 on the left half of a, -1 on the right half
    vals = []
    mid = a.children[0].hi
    for i in range(len(tree.leaves)):
        if a.lo <= i < mid:
            vals.append(Fraction(1))
        elif mid <= i < a.hi:
            vals.append(Fraction(-1))
        else:
            vals.append(Fraction(0))
    f = SimpleFunction(tree, vals)
    _, diffs = martingale_diffs(f)
    nonzero = [n for n, d in enumerate(diffs, 1) if any(v[0] != 0 for v in d.values)]
    assert nonzero == [a.level + 1]


@settings(max_examples=15, deadline=None)
@given(st.data())
def test_parseval_exact(data):
    tree = build_random(4, data.draw(st.integers(0, 40)), max_width=4)
    vals = data.draw(
        st.lists(rationals, min_size=len(tree.leaves), max_size=len(tree.leaves))
    )
    f = SimpleFunction(tree, vals)
    assert parseval_gap_exact(f) == 0


def test_lp_and_ess_sup_frozen():
    tree = build_dyadic(2)
    f = SimpleFunction(tree, [Fraction(1), Fraction(-2), Fraction(0), Fraction(1, 2)])
    sp = scalar_space()
    assert lp_power_exact(f, sp, 1) == Fraction(1 + 2, 4) + Fraction(1, 8)
    assert lp_power_exact(f, sp, 2) == Fraction(1 + 4, 4) + Fraction(1, 16)
    assert ess_sup_exact(f, sp) == 2


def test_variation_sum_additive_over_levels():
    tree = build_dyadic(3)
    f = SimpleFunction(tree, [Fraction(i % 3 - 1) for i in range(8)])
    sp = scalar_space()
    _, diffs = martingale_diffs(f)
    assert variation_sum(f, sp) == sum(
        (lp_power_exact(d, sp, 1) for d in diffs), Fraction(0)
    )


def test_basis_phi_mean_zero_and_support():
    tree = build_random(4, 31, max_width=5)
    for a in tree.internal_atoms():
        phi = basis_phi(tree, a)
        integral = sum(v[0] * leaf.p for v, leaf in zip(phi.values, tree.leaves))
        assert integral == 0
        for i, v in enumerate(phi.values):
            if not (a.lo <= i < a.hi):
                assert v[0] == 0
        if a.n_children == 1:
            assert all(v[0] == 0 for v in phi.values)


def test_basis_k_mean_zero_and_level():
    tree = build_dyadic(4)
    chain = [tree.levels[1][0]]
    while not chain[-1].is_leaf:
        chain.append(chain[-1].children[0])
    for j in range(1, len(chain) + 1):
        kj = basis_k(tree, chain, j)
        integral = sum(v[0] * leaf.p for v, leaf in zip(kj.values, tree.leaves))
        assert integral == 0
        # measurable at level j: constant on each level-j atom
        for atom in tree.levels[j]:
            vals = {kj.values[i][0] for i in range(atom.lo, atom.hi)}
            assert len(vals) == 1


@settings(max_examples=20, deadline=None)
@given(st.data())
def test_chain_coeff_round_trip(data):
    tree = build_random(4, data.draw(st.integers(0, 30)), max_width=4)
    if tree.root.n_children == 1:  # ratio-1 first step not allowed
        return
    chain = [tree.levels[1][0]]
    while not chain[-1].is_leaf:
        nxt = chain[-1].children[0]
        if nxt.p == chain[-1].p:  # single-child copy: ratio 1 not allowed
            break
        chain.append(nxt)
    coeffs = data.draw(
        st.lists(rationals, min_size=len(chain) + 1, max_size=len(chain) + 1)
    )
    f = chain_expand(tree, chain, coeffs)
    got = chain_coeffs(f, chain)
    assert got == [Fraction(c) for c in coeffs]


def test_norm_exact_matches_float():
    for sp in (scalar_space(), lq_space(1, 3), lq_space(float("inf"), 3)):
        v = (Fraction(1, 3), Fraction(-2, 5), Fraction(1, 7))[: sp.dim]
        assert abs(float(sp.norm_exact(v)) - sp.norm([float(x) for x in v])) < 1e-12


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3),
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3),
)
def test_triangle_inequality_spot(u, v):
    sp = lq_space(3, 3)
    s = [a + b for a, b in zip(u, v)]
    assert sp.norm(s) <= sp.norm(u) + sp.norm(v) + 1e-9
