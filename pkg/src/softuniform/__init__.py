"""Finite soft uniform spaces.

Soft sets, soft relations and uniformity bases over a finite universe, the
induced soft topology, separation axioms, uniform continuity, Lebesgue
entourages, total boundedness and completeness.
"""

from importlib import resources

from .core import (
    ParameterSet,
    SoftElement,
    SoftRelation,
    SoftSet,
    Universe,
    compose,
    diagonal,
    enumerate_soft_elements,
    inverse,
    is_subrelation,
    join,
    meet,
    relation_properties,
)
from .uniformity import (
    MetricFamily,
    UniformityBase,
    discrete_uniformity,
    full_uniformity,
    member_of,
    metric_uniformity,
    saturate,
    symmetric_root,
    validate_base,
)
from .topology import closure, enumerate_topology, is_open, is_separated, is_soft_regular, is_soft_T1
from .mapping import (
    SoftMapping,
    heine_cantor_check,
    is_soft_compact,
    is_soft_continuous,
    is_soft_uniformly_continuous,
    lebesgue_entourage,
)
from .completeness import (
    PrincipalFilter,
    cauchy_limit_trace,
    is_cauchy,
    is_complete,
    is_totally_bounded,
)

__all__ = [
    "ParameterSet",
    "SoftElement",
    "SoftRelation",
    "SoftSet",
    "Universe",
    "compose",
    "diagonal",
    "enumerate_soft_elements",
    "inverse",
    "is_subrelation",
    "join",
    "meet",
    "relation_properties",
    "MetricFamily",
    "UniformityBase",
    "discrete_uniformity",
    "full_uniformity",
    "member_of",
    "metric_uniformity",
    "saturate",
    "symmetric_root",
    "validate_base",
    "closure",
    "enumerate_topology",
    "is_open",
    "is_separated",
    "is_soft_regular",
    "is_soft_T1",
    "SoftMapping",
    "heine_cantor_check",
    "is_soft_compact",
    "is_soft_continuous",
    "is_soft_uniformly_continuous",
    "lebesgue_entourage",
    "PrincipalFilter",
    "cauchy_limit_trace",
    "is_cauchy",
    "is_complete",
    "is_totally_bounded",
    "fixture_path",
]

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path of a shipped fixture, e.g. ``fixture_path("discrete.yaml")``."""
    return resources.files(__package__) / "fixtures" / name
