"""Exactly solvable pointer-measurement model on a momentum ring."""

from ringmeas.exceptions import (
    GridError,
    NotInImageError,
    ParityError,
    SupportError,
    ValidationError,
    ZeroProbabilityError,
)
from ringmeas.model import ApparatusSpec, CouplingSpec, ObjectSpec, validate
from ringmeas.dynamics import JointState, kick, kick_oracle_grid, wigner_joint
from ringmeas.measurement import PointerPartition, build_partition, selective_collapse

__version__ = "0.1.0"

__all__ = [
    "ApparatusSpec",
    "CouplingSpec",
    "GridError",
    "JointState",
    "NotInImageError",
    "ObjectSpec",
    "ParityError",
    "PointerPartition",
    "SupportError",
    "ValidationError",
    "ZeroProbabilityError",
    "build_partition",
    "kick",
    "kick_oracle_grid",
    "selective_collapse",
    "validate",
    "wigner_joint",
]
