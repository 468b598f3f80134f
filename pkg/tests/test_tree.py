from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haartype.tree import (
    FiltrationTree,
    TreeError,
    build_chain,
    build_dyadic,
    build_random,
    format_mass,
    parse_mass,
    prec_key,
)


def test_parse_format_mass_round_trip():
    for s in ["1", "1/2", "3/16", "987/8192"]:
        assert format_mass(parse_mass(s)) == s
    assert parse_mass(1) == Fraction(1)
    assert format_mass(Fraction(2, 4)) == "1/2"


def test_parse_mass_rejects_garbage():
    with pytest.raises(Exception):
        parse_mass("1/0")
    with pytest.raises(Exception):
        parse_mass("abc")


def test_dyadic_structure():
    t = build_dyadic(3)
    assert t.depth == 3
    assert len(t.leaves) == 8
    assert all(leaf.p == Fraction(1, 8) for leaf in t.leaves)
    assert t.root.p == 1
    # BFS idx: root 0, then level by level left to right
    assert [a.idx for a in t.levels[1]] == [1, 2]
    assert [a.lo for a in t.levels[1]] == [0, 4]


def test_chain_frozen_leaf_masses():
    # depth 2, delta = 1/4: the surviving spine splits twice, shedding a
    # quarter each time; fixed expected bottom masses
    t = build_chain(2, Fraction(1, 4))
    masses = sorted(leaf.p for leaf in t.leaves)
    assert masses == sorted([Fraction(9, 16), Fraction(3, 16), Fraction(1, 4)])


def test_chain_rejects_bad_delta():
    for bad in [Fraction(1, 2), Fraction(3, 4), Fraction(0), Fraction(-1, 4)]:
        with pytest.raises(Exception):
            build_chain(3, bad)


def test_children_sum_exact_everywhere():
    for seed in range(12):
        t = build_random(3 + seed % 6, seed, max_width=6)
        for a in t.internal_atoms():
            assert sum(c.p for c in a.children) == a.p


def test_children_order_nonincreasing():
    for seed in range(12):
        t = build_random(3 + seed % 6, seed, max_width=6)
        for a in t.internal_atoms():
            ps = [c.p for c in a.children]
            assert ps == sorted(ps, reverse=True)


def test_uniform_leaf_depth():
    t = build_random(5, 3, max_width=6)
    assert {leaf.level for leaf in t.leaves} == {t.depth}


def test_interval_mass_matches_atom_mass():
    t = build_random(6, 9, max_width=5)
    for lvl in t.levels:
        for a in lvl:
            assert t.interval_mass(a.lo, a.hi) == a.p


def test_prec_order_is_total():
    t = build_random(5, 21, max_width=6)
    keys = [prec_key(a) for a in t.atoms_prec()]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)


def test_json_round_trip_identical():
    for seed in (0, 5, 17):
        t = build_random(4 + seed % 4, seed, max_width=6)
        obj = t.to_obj()
        t2 = FiltrationTree.from_obj(json.loads(json.dumps(obj)))
        assert t2.to_obj() == obj
        assert len(t2.leaves) == len(t.leaves)


def test_loader_rejects_bad_sum_with_path():
    obj = build_dyadic(2).to_obj()
    obj["children"][0]["p"] = "1/3"
    with pytest.raises(TreeError) as ei:
        FiltrationTree.from_obj(obj)
    assert "/" in str(ei.value)  # names the offending atom path


def test_loader_rejects_increasing_child_order():
    obj = {
        "p": "1",
        "children": [{"p": "1/3"}, {"p": "2/3"}],
    }
    with pytest.raises(TreeError):
        FiltrationTree.from_obj(obj)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6))
def test_random_builder_always_valid(seed, depth):
    t = build_random(depth, seed, max_width=6)
    assert t.root.p == 1
    for a in t.internal_atoms():
        assert sum(c.p for c in a.children) == a.p
        assert all(c.p > 0 for c in a.children)
