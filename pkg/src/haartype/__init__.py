"""haartype: filtration trees, greedy proto-Haar systems, and type estimation."""
from haartype.tree import (
    Atom,
    FiltrationTree,
    TreeError,
    build_chain,
    build_dyadic,
    build_random,
    prec_key,
)

__all__ = [
    "Atom",
    "FiltrationTree",
    "TreeError",
    "build_chain",
    "build_dyadic",
    "build_random",
    "prec_key",
]
