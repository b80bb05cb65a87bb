"""Exact equivariant Gromov-Witten invariants of toric varieties and toric stacks."""

__version__ = "0.1.0"

from .exact_algebra import MultiPoly, RationalFunction, WeightVector, parse_rf  # noqa: E402
from .toric_fan import Fan, ToricGraph, load_fan, validate_fan, projective_space_fan  # noqa: E402
from .psi_hodge import psi_integral, HodgeKey, HodgeTable, Missing  # noqa: E402
from .graph_enum import enumerate_graphs, DecoratedGraph  # noqa: E402
from .localization import Insertion, InvariantQuery, gw_invariant  # noqa: E402
from .stacky import StackyFan, OrbQuery, orb_gw_invariant, load_stacky_fan  # noqa: E402

__all__ = [
    "MultiPoly", "RationalFunction", "WeightVector", "parse_rf",
    "Fan", "ToricGraph", "load_fan", "validate_fan", "projective_space_fan",
    "psi_integral", "HodgeKey", "HodgeTable", "Missing",
    "enumerate_graphs", "DecoratedGraph",
    "Insertion", "InvariantQuery", "gw_invariant",
    "StackyFan", "OrbQuery", "orb_gw_invariant", "load_stacky_fan",
]
