"""Desk-scale laboratory for the cardinalities ``[m]^2``, ``m^2``,
``fin(m)`` and ``seq^{1-1}(m)`` over sets of atoms.

Modules:

* :mod:`~choiceless_lab.universe`  atoms, hereditarily finite objects, counting;
* :mod:`~choiceless_lab.symmetry`  permutations, group truncations, supports, orbits;
* :mod:`~choiceless_lab.witnesses` extraction procedures against injection oracles;
* :mod:`~choiceless_lab.fraisse`   the two model classes and their constructions;
* :mod:`~choiceless_lab.classic`   the rn, rc and rz atom constructions;
* :mod:`~choiceless_lab.verify`    the refutation engine and diagram reports;
* :mod:`~choiceless_lab.cli`       the ``choiceless-lab`` command.
"""

from .universe import (
    EMPTY, Atom, FinSet, Kind, Pair, ResourceLimit, Seq, base, count_kind, decode, encode, enum_kind, fresh,
)
from .symmetry import GroupSpec, Permutation, act, fix_generators, is_support, orbit
from .verify import EdgeClaim, VerifyReport, diagram_report

__version__ = "0.1.0"

__all__ = [
    "EMPTY", "Atom", "FinSet", "Kind", "Pair", "ResourceLimit", "Seq", "base", "count_kind", "decode",
    "encode", "enum_kind", "fresh", "GroupSpec", "Permutation", "act", "fix_generators", "is_support",
    "orbit", "EdgeClaim", "VerifyReport", "diagram_report", "__version__",
]
