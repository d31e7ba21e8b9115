"""Exact series invariants of negative definite plumbed trees, computed two
ways: directly from the lattice form, and through the nested character
recursion on colored hypercube DAGs."""

from .dagcat import Bits, Color, ColoredDag, all_bits
from .graphio import (
    PlumbingParseError,
    deserialize_series,
    emit_dot,
    parse_plumbing,
    print_plumbing,
    serialize_series,
)
from .kgroup import KElement, char, kmul
from .plumbing import (
    NotNegativeDefiniteError,
    PlumbedGraph,
    QuadraticForm,
    RootedTree,
    Tree,
    grow_leaves,
    is_negative_definite,
    theta_form,
)
from .qseries import QSeries, equal_to_order
from .treenest import (
    ParameterStructure,
    all_parameter_structures,
    default_parameter_structure,
    zhat_nested,
)
from .zhat import enumeration_bound, zhat_bosonic

__version__ = "0.1.0"
