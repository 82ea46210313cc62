"""PT-symmetric complex crystals synthesized from a square well by a SUSY transformation.

Closed-form transmission and reflection spectra of the crystal, an
independent transfer-matrix engine to check them, and figure datasets.
"""
from .analytic import (
    ScatteringCoefficients,
    crystal_coefficients,
    crystal_reflectances,
    left_reflection_limit,
    peak_left_reflectance,
    square_well_coefficients,
    square_well_reflectance,
    unitarity_defect,
)
from .errors import DomainError, EmptyBandError, GridTooCoarseError, NonConvergenceError
from .numeric import SlicingSpec, TransferMatrix, monodromy, scatter_numeric, slice_matrix
from .spectra import MomentumGrid, SpectrumGrid, figure_data, invisibility_metrics, sweep
from .synthesis import (
    CrystalParams,
    PotentialProfile,
    ProfileKind,
    apply_intertwiner,
    derive_params,
    partner_potential,
    phi,
    shallow_limit_potential,
    superpotential,
)

__version__ = "0.1.0"
