"""Relaxed disarrangement densities, isotropic frames and tilted-cube competitors."""

from .densities import (
    DisarrangementReport,
    StructuredDeformationMesh,
    directional_bulk_integral,
    directional_interfacial,
    disarrangement_report,
    disarrangement_tensor,
    relaxed_bulk,
    relaxed_bulk_directional,
    relaxed_interfacial,
    rowmax_bulk_integral,
    volume_swept,
)
from .errors import *  # noqa: F401,F403
from .frames import (
    IsotropicFrame,
    MinimizingRotation,
    deflate,
    isotropic_frame,
    minimizing_rotation,
    rotation_objective,
    zero_quadratic_unit_vector,
)
from .tensor import row_max_norm, symmetric_eigendecomposition, symmetric_part, tensor_product
from .tilted import convergence_study, directional_energy, enumerate_jump_faces, interfacial_energy

__version__ = "0.1.0"
