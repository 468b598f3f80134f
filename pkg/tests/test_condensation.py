"""Tests for dense nested sub-systems, coloring, and the stacked bound."""

from __future__ import annotations

from fractions import Fraction

import pytest

from haartype.condensation import (
    NotFound,
    HypothesisViolation,
    condense,
    coverage,
    disjointify,
    estdd_bound,
    find_dense_seed,
    verify_coloring,
    verify_condensed,
)
from haartype.families import light_children, remainders
from haartype.functions import SimpleFunction, scalar_space
from haartype.tree import build_dyadic


def test_coverage_frozen():
    six = build_dyadic(6)
    coll = light_children(six)
    assert len(coll.members) == 63
    assert coll.members[0].path_str() == "/1"
    assert coverage(coll, coll.members[0], 2) == Fraction(13, 16)


def test_condense_not_found_dyadic6():
    coll = light_children(build_dyadic(6))
    with pytest.raises(NotFound) as exc:
        condense(coll, 1, 2, Fraction(1, 2))
    e = exc.value
    assert e.threshold == Fraction(15, 16)
    assert e.tried == 63
    best_member, best_cov = e.best
    assert best_member.path_str() == "/1"
    assert best_cov == Fraction(13, 16)


def test_condense_dyadic9_frozen():
    coll = light_children(build_dyadic(9))
    sys = condense(coll, 1, 2, Fraction(1, 2))
    assert sys.root.member.path_str() == "/1"
    assert sys.seed_coverage == Fraction(247, 256)
    assert sys.threshold == Fraction(15, 16)
    assert [len(lvl) for lvl in sys.levels] == [1, 6, 27]
    items = verify_condensed(sys)
    assert [i.name for i in items] == [
        "generation_membership",
        "laminar",
        "dense_children",
        "mass_decay",
    ]
    assert all(i.ok for i in items), [i for i in items if not i.ok]


def test_condense_explicit_seed():
    coll = light_children(build_dyadic(9))
    seed, cov = find_dense_seed(coll, 1, 2, Fraction(1, 4))
    assert (seed.path_str(), cov) == ("/1", Fraction(247, 256))
    sys = condense(coll, 1, 2, Fraction(1, 2), seed=seed)
    assert sys.seed_coverage == cov
    # a bottom-level member has no generations left at all
    deep = next(m for m in coll.members if m.level == 8)
    with pytest.raises(NotFound) as exc:
        condense(coll, 1, 2, Fraction(1, 2), seed=deep)
    assert exc.value.tried == 1
    assert exc.value.best[1] == 0


def test_condense_parameter_domain():
    coll = light_children(build_dyadic(6))
    with pytest.raises(ValueError):
        condense(coll, 1, 2, Fraction(0))
    with pytest.raises(ValueError):
        condense(coll, 1, 2, Fraction(1))
    with pytest.raises(ValueError):
        condense(coll, 0, 2, Fraction(1, 2))
    with pytest.raises(ValueError):
        condense(coll, 1, 0, Fraction(1, 2))


def test_disjointify_remainders_dyadic6():
    col = disjointify(remainders(build_dyadic(6)))
    assert col.carleson == Fraction(7, 2)
    assert col.budget == 15
    assert col.n_classes == 3
    assert [len(c) for c in col.classes] == [21, 35, 7]
    assert col.within_budget
    items = verify_coloring(col)
    assert [i.name for i in items] == ["partition", "halving", "class_budget"]
    assert all(i.ok for i in items)


def test_disjointify_light_with_root_dyadic6():
    col = disjointify(light_children(build_dyadic(6), include_root=True))
    assert col.carleson == 4
    assert col.budget == 17
    assert col.n_classes == 4
    assert all(i.ok for i in verify_coloring(col))


def test_disjointify_corpus_sample(corpus100):
    for seed in (0, 17, 42, 99):
        tree = corpus100[seed]
        col = disjointify(light_children(tree, include_root=True))
        assert all(i.ok for i in verify_coloring(col)), tree


# -- stacked-support estimate -------------------------------------------------

_SETS = [{0, 1, 2, 3}, {4, 5}, {6}]
_COEFFS = (1.0, 0.5, 0.25)


def _stacked_funcs(tree):
    h = Fraction(1, 2)
    q = Fraction(1, 4)
    g0 = SimpleFunction(tree, [1, 1, 1, 1, h, h, q, 0])
    g1 = SimpleFunction(tree, [0, 0, 0, 0, 1, 1, h, 0])
    g2 = SimpleFunction(tree, [0, 0, 0, 0, 0, 0, 1, 0])
    return [g0, g1, g2]


def test_estdd_bound_green():
    tree = build_dyadic(3)
    lhs, rhs = estdd_bound(_stacked_funcs(tree), _SETS, _COEFFS, scalar_space(), 2.0)
    assert lhs == pytest.approx((Fraction(185, 16) / 8) ** 0.5)
    assert rhs == pytest.approx(1.75 * (Fraction(125, 128) ** 0.5))
    assert lhs <= rhs


def test_estdd_support_violation():
    tree = build_dyadic(3)
    funcs = _stacked_funcs(tree)
    funcs[1].values[0] = (Fraction(1),)
    with pytest.raises(HypothesisViolation) as exc:
        estdd_bound(funcs, _SETS, _COEFFS, scalar_space(), 2.0)
    assert exc.value.kind == "support"
    assert exc.value.j == 1


def test_estdd_decay_violation():
    tree = build_dyadic(3)
    funcs = _stacked_funcs(tree)
    # full-height mass on the second set breaks the geometric-decay hypothesis
    funcs[0] = SimpleFunction(tree, [1, 1, 1, 1, 1, 1, 0, 0])
    with pytest.raises(HypothesisViolation) as exc:
        estdd_bound(funcs, _SETS, _COEFFS, scalar_space(), 2.0)
    assert (exc.value.kind, exc.value.k, exc.value.j) == ("decay", 1, 0)


def test_estdd_input_errors():
    tree = build_dyadic(3)
    funcs = _stacked_funcs(tree)
    with pytest.raises(ValueError, match="disjoint"):
        estdd_bound(funcs, [{0, 1}, {1, 2}, {6}], _COEFFS, scalar_space(), 2.0)
    with pytest.raises(ValueError, match="coefficient"):
        estdd_bound(funcs, _SETS, (1.0,), scalar_space(), 2.0)
    assert estdd_bound([], _SETS, _COEFFS, scalar_space(), 2.0) == (0.0, 0.0)
