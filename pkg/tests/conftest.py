from __future__ import annotations

from fractions import Fraction

import pytest

from haartype.tree import FiltrationTree, build_chain, build_dyadic, build_random


_CORPUS_WIDTH = {3: 6, 4: 6, 5: 5, 6: 4, 7: 3, 8: 3}


def corpus_tree(seed: int) -> FiltrationTree:
    """Deterministic member of the 100-tree fuzz corpus: depth 3..8, at most
    6-way splits.  Width tapers with depth to keep the atom counts small
    enough for the exact-arithmetic sweeps."""
    depth = 3 + seed % 6
    return build_random(depth, seed, max_width=_CORPUS_WIDTH[depth])


@pytest.fixture(scope="session")
def corpus100() -> list[FiltrationTree]:
    return [corpus_tree(s) for s in range(100)]


@pytest.fixture(scope="session")
def dyadic4() -> FiltrationTree:
    return build_dyadic(4)


@pytest.fixture(scope="session")
def dyadic6() -> FiltrationTree:
    return build_dyadic(6)


@pytest.fixture(scope="session")
def chain2_quarter() -> FiltrationTree:
    return build_chain(2, Fraction(1, 4))
