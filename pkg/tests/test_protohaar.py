"""Tests for the sign-pattern construction and its exact certificate."""

from __future__ import annotations

from fractions import Fraction

import pytest

from haartype.families import light_children
from haartype.functions import scalar_space, variation_sum
from haartype.protohaar import (
    certify,
    check_larcon,
    construct_protohaar,
    covering_share,
    default_steps,
    spine_partition_identity,
    verify_monotone_projections,
)
from haartype.tree import build_chain, build_dyadic, build_random

CHECK_NAMES = [
    "structure",
    "mean_zero",
    "amplitude",
    "half_mass",
    "residual",
    "stepwise_decay",
    "variation",
]

# (depth, max_width, min_weight, eps, k, seed_base, share of a 200-run)
_RECIPES = (
    (5, 4, 40, Fraction(3, 8), 2, 1000, Fraction(3, 10)),
    (6, 4, 40, Fraction(3, 8), 2, 3000, Fraction(3, 10)),
    (6, 5, 40, Fraction(3, 8), 2, 5000, Fraction(3, 10)),
    (7, 5, 90, Fraction(1, 4), 3, 7000, Fraction(1, 10)),
)


def fuzz_stream(count):
    """Yield `count` admissible (tree, atom, eps, k, collection) instances.

    Each recipe pins its own seed base, so the first instances of a recipe
    are identical no matter how many are requested in total.
    """
    quotas = [round(count * frac) for *_, frac in _RECIPES[:-1]]
    quotas.append(count - sum(quotas))
    made = 0
    for (depth, width, minw, eps, k, base, _), want in zip(_RECIPES, quotas):
        got = 0
        i = 0
        while got < want and made < count:
            tree = build_random(depth, base + i, max_width=width, min_weight=minw)
            coll = light_children(tree)
            atoms = [a for a in tree.levels[i % 2] if not a.is_leaf]
            atom = atoms[i % len(atoms)]
            i += 1
            if covering_share(coll, atom, k) <= 1 - eps / 2:
                continue
            got += 1
            made += 1
            yield tree, atom, eps, k, coll
    assert made == count


def test_default_steps_frozen():
    assert default_steps(Fraction(1, 2)) == 2
    assert default_steps(Fraction(3, 8)) == 3
    assert default_steps(Fraction(1, 4)) == 3
    assert default_steps(Fraction(1, 8)) == 4
    with pytest.raises(ValueError):
        default_steps(Fraction(0))
    with pytest.raises(ValueError):
        default_steps(Fraction(1))


def test_covering_share_frozen():
    nine = build_dyadic(9)
    coll = light_children(nine)
    assert covering_share(coll, nine.root, 3) == Fraction(233, 256)
    assert covering_share(coll, nine.root.children[0], 3) == Fraction(219, 256)
    six = build_dyadic(6)
    assert covering_share(light_children(six), six.root, 2) == Fraction(57, 64)
    # chains keep only the shed siblings: far below any admissible floor
    chain = build_chain(3, Fraction(1, 4))
    assert covering_share(light_children(chain), chain.root, 1) == Fraction(37, 64)


def test_eps_domain_rejected():
    tree = build_dyadic(9)
    for bad in (Fraction(0), Fraction(1, 2), Fraction(3, 5)):
        with pytest.raises(ValueError):
            construct_protohaar(tree, tree.root, bad)


def test_k_too_small_rejected():
    tree = build_dyadic(9)
    # 2^-2 = 1/4 is not strictly below eps
    with pytest.raises(ValueError):
        construct_protohaar(tree, tree.root, Fraction(1, 4), k=2)


def test_covering_gate_rejected():
    shallow = build_dyadic(4)
    with pytest.raises(ValueError, match="covering precondition"):
        construct_protohaar(shallow, shallow.root, Fraction(1, 4))
    chain = build_chain(3, Fraction(1, 4))
    with pytest.raises(ValueError, match="covering precondition"):
        construct_protohaar(chain, chain.root, Fraction(1, 4))


def test_leaf_rejected():
    tree = build_dyadic(9)
    leaf = tree.levels[9][0]
    with pytest.raises(ValueError):
        construct_protohaar(tree, leaf, Fraction(1, 4))


def test_frozen_dyadic9_root():
    tree = build_dyadic(9)
    ph = construct_protohaar(tree, tree.root, Fraction(1, 4))
    assert ph.k == 3
    assert ph.tau == 2
    assert ph.truncated
    assert ph.c0 == Fraction(63, 65)
    assert ph.plus_mass == Fraction(3, 8)
    assert ph.minus_mass == Fraction(255, 512)
    assert ph.residual_mass == Fraction(65, 512)
    assert ph.plus_mass + ph.minus_mass + ph.residual_mass == tree.root.p
    cert = certify(ph)
    assert [c.name for c in cert.checks] == CHECK_NAMES
    assert cert.all_ok
    assert variation_sum(ph.h, scalar_space()) == Fraction(67, 65)


def test_frozen_dyadic9_level1():
    tree = build_dyadic(9)
    atom = tree.root.children[0]
    ph = construct_protohaar(tree, atom, Fraction(3, 8))
    assert ph.k == 3
    assert ph.tau == 2
    assert ph.c0 == Fraction(31, 33)
    assert ph.plus_mass == Fraction(3, 16)
    assert ph.minus_mass == Fraction(127, 512)
    assert ph.residual_mass == Fraction(33, 512)
    assert ph.plus_mass + ph.minus_mass + ph.residual_mass == atom.p
    assert certify(ph).all_ok


def test_frozen_dyadic6_explicit_k():
    # the covering gate passes at k=2 even though the default would be 3
    tree = build_dyadic(6)
    ph = construct_protohaar(tree, tree.root, Fraction(3, 8), k=2)
    assert ph.k == 2
    assert ph.tau == 2
    assert ph.truncated
    assert ph.c0 == Fraction(7, 9)
    assert ph.plus_mass == Fraction(3, 8)
    assert ph.minus_mass == Fraction(31, 64)
    assert ph.residual_mass == Fraction(9, 64)
    assert certify(ph).all_ok


def test_spine_rounds():
    tree = build_dyadic(9)
    ph = construct_protohaar(tree, tree.root, Fraction(1, 4))
    assert spine_partition_identity(ph, 1)
    with pytest.raises(ValueError, match="truncation"):
        spine_partition_identity(ph, 2)
    with pytest.raises(ValueError, match="out of range"):
        spine_partition_identity(ph, 3)


def test_check_larcon_frozen():
    tree = build_dyadic(9)
    ph = construct_protohaar(tree, tree.root, Fraction(1, 4))
    # plus mass 3/8 sits above 1/2 - 1/4 but below 1/2 - 1/16
    assert check_larcon(ph, Fraction(1, 4))
    assert not check_larcon(ph, Fraction(1, 16))


def test_monotone_projections_clean_frozen():
    tree = build_dyadic(9)
    for atom, eps in ((tree.root, Fraction(1, 4)), (tree.root.children[0], Fraction(3, 8))):
        ph = construct_protohaar(tree, atom, eps)
        assert verify_monotone_projections(ph) == []


def test_tampered_function_fails_certificate():
    tree = build_dyadic(6)
    ph = construct_protohaar(tree, tree.root, Fraction(3, 8), k=2)
    ph.h.values[0] = (Fraction(5),)
    assert not certify(ph).all_ok


def test_fuzz_small():
    for tree, atom, eps, k, coll in fuzz_stream(25):
        ph = construct_protohaar(tree, atom, eps, k=k, collection=coll)
        cert = certify(ph)
        assert cert.all_ok, [c for c in cert.checks if not c.ok]
        assert ph.plus_mass + ph.minus_mass + ph.residual_mass == atom.p
        assert variation_sum(ph.h, scalar_space()) <= 6 * atom.p
        assert verify_monotone_projections(ph) == []
