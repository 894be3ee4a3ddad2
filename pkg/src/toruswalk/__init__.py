"""Discrete-time coined quantum walks on cycles and tori for conflict-free
multi-player decision making."""

from .analysis import (
    AverageDistribution,
    SubnetworkReport,
    average_distribution,
    closed_form_sizes,
    conflict_probability,
    group_subnetworks,
    node_subnetworks,
    reachable_nodes,
    seed_superposition,
)
from .coins import (
    BlockLibrary,
    build_conflict_node_field,
    build_reflection_coin,
    build_reflection_field,
    default_library,
    named_coin,
    reflection_mask,
)
from .errors import ConfigError, DomainError, InvariantError, NonUnitaryCoinError
from .lattice import Geometry
from .operators import CoinField, evolve, materialize_dense, step, tensor_evolution_fields
from .state import (
    WalkState,
    antisymmetrize,
    basis_state,
    mirror_1d,
    mirrored_antisymmetric,
    position_distribution,
    tensor_join,
)

__version__ = "0.1.0"

__all__ = [
    "AverageDistribution",
    "BlockLibrary",
    "CoinField",
    "ConfigError",
    "DomainError",
    "Geometry",
    "InvariantError",
    "NonUnitaryCoinError",
    "SubnetworkReport",
    "WalkState",
    "antisymmetrize",
    "average_distribution",
    "basis_state",
    "build_conflict_node_field",
    "build_reflection_coin",
    "build_reflection_field",
    "closed_form_sizes",
    "conflict_probability",
    "default_library",
    "evolve",
    "group_subnetworks",
    "materialize_dense",
    "mirror_1d",
    "mirrored_antisymmetric",
    "named_coin",
    "node_subnetworks",
    "position_distribution",
    "reachable_nodes",
    "reflection_mask",
    "seed_superposition",
    "step",
    "tensor_evolution_fields",
    "tensor_join",
]
