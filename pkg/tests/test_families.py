from __future__ import annotations

from fractions import Fraction

from haartype.families import (
    TildeRegion,
    carleson_constant,
    carleson_constant_naive,
    carleson_growth,
    first_generation,
    generation,
    light_children,
    member_key,
    remainders,
    top_children,
    union_mass,
)
from haartype.tree import build_chain, build_dyadic, build_random
from tests.conftest import corpus_tree


def test_light_children_counts_dyadic2():
    t = build_dyadic(2)
    assert len(light_children(t)) == 3
    assert len(light_children(t, include_root=True)) == 4


def test_partition_light_plus_top():
    # every non-root atom is either a heaviest child or a light child, never both
    for seed in (0, 3, 11):
        t = corpus_tree(seed)
        light = {id(a) for a in light_children(t)}
        top = {id(a) for a in top_children(t)}
        assert not light & top
        n_nonroot = sum(len(lvl) for lvl in t.levels[1:])
        assert len(light) + len(top) == n_nonroot


def test_remainders_are_parent_minus_heaviest():
    t = build_random(5, 7, max_width=5)
    rem = remainders(t)
    for r in rem:
        assert isinstance(r, TildeRegion)
        a = r.atom
        assert (r.lo, r.hi) == (a.first_child.hi, a.hi)
        assert r.p == a.p - a.first_child.p


def test_remainder_determines_unique_owner():
    # distinct remainder members come from distinct atoms and have distinct
    # leaf intervals
    t = build_random(6, 13, max_width=5)
    rem = [r for r in remainders(t) if r.p > 0]
    intervals = [(r.lo, r.hi) for r in rem]
    assert len(set(intervals)) == len(intervals)
    owners = {id(r.atom) for r in rem}
    assert len(owners) == len(rem)


def test_member_strictly_inside_remainder_avoids_heaviest():
    # an atom strictly inside a remainder region lies under some non-heaviest
    # child of the owner
    t = build_random(6, 29, max_width=6)
    rem = [r for r in remainders(t) if r.p > 0]
    for r in rem:
        owner = r.atom
        for lvl in t.levels[owner.level + 1 :]:
            for a in lvl:
                if r.lo <= a.lo and a.hi <= r.hi and (a.lo, a.hi) != (r.lo, r.hi):
                    assert any(
                        c.lo <= a.lo and a.hi <= c.hi for c in owner.children[1:]
                    )


def _first_generation_oracle(coll, region):
    """Quadratic reference: members properly inside the region, maximal with
    respect to interval containment."""
    inside = [
        m
        for m in coll.members
        if region.lo <= m.lo and m.hi <= region.hi and (m.lo, m.hi) != (region.lo, region.hi)
    ]
    out = []
    for m in inside:
        if not any(
            o is not m and o.lo <= m.lo and m.hi <= o.hi and (o.lo, o.hi) != (m.lo, m.hi)
            for o in inside
        ):
            out.append(m)
    return sorted(out, key=member_key)


def test_first_generation_matches_oracle():
    for seed in range(18):
        t = corpus_tree(seed)
        coll = light_children(t)
        regions = [t.root] + list(t.levels[1]) + list(t.levels[min(2, t.depth)])
        for region in regions:
            got = first_generation(coll, region)
            want = _first_generation_oracle(coll, region)
            assert [member_key(m) for m in got] == [member_key(m) for m in want]


def test_generation_members_decay_per_member():
    # every k-th generation member sits below 2^-k of the region mass
    for seed in (1, 8, 15):
        t = corpus_tree(seed)
        coll = light_children(t)
        for k in (1, 2, 3):
            for m in generation(coll, t.root, k):
                assert m.p <= Fraction(1, 2**k) * t.root.p


def test_dyadic_carleson_growth_frozen():
    got = [carleson_constant(light_children(build_dyadic(d)).members) for d in range(2, 7)]
    assert got == [Fraction(3, 2), Fraction(2), Fraction(5, 2), Fraction(3), Fraction(7, 2)]


def test_dyadic_depth4_frozen():
    assert carleson_constant(light_children(build_dyadic(4)).members) == Fraction(5, 2)


def test_carleson_two_implementations_agree():
    for seed in range(15):
        t = corpus_tree(seed)
        for coll in (light_children(t), remainders(t)):
            members = [m for m in coll.members if m.p > 0]
            assert carleson_constant(members) == carleson_constant_naive(members)


def test_chain_carleson_is_one():
    for d in (2, 4, 6):
        t = build_chain(d, Fraction(1, 4))
        assert carleson_constant(light_children(t).members) == 1


def test_carleson_growth_nondecreasing():
    seq = carleson_growth(range(2, 8))
    vals = [v for _, v in seq]
    assert vals == sorted(vals)


def test_sandwich_between_remainders_and_light():
    for seed in range(20):
        t = corpus_tree(seed)
        cb = carleson_constant([m for m in remainders(t) if m.p > 0])
        ce = carleson_constant(light_children(t).members)
        assert cb <= ce <= 1 + cb


def test_union_mass_handles_overlap():
    t = build_dyadic(3)
    a = t.levels[1][0]
    kids = list(a.children)
    assert union_mass(t, [a] + kids) == a.p
    assert union_mass(t, kids) == a.p
