"""Thermodynamic-formalism diagnostics for sub-self-affine sets.

Computes the singular value function of matrix products, finite-depth
topological pressure over subshifts of finite type with rigorous upper
bounds (and assumption-flagged lower bounds), the singularity dimension,
entropy / energy / Lyapunov exponents and equilibrium-measure diagnostics
for measures on the symbol space, and cross-checks against box-counting
estimates of the projected attractor.
"""

__version__ = "0.1.0"

from . import errors
from .symbolic import (
    SubshiftSpec,
    SubshiftAutomaton,
    compile_subshift,
    full_shift,
)
from .linalg import (
    ScaledMatrix,
    SingularSpectrum,
    singular_spectrum,
    log_phi,
    word_product,
    check_cone_condition,
    probe_quasimultiplicativity,
)
from .pressure import (
    PartitionSum,
    PressureEstimate,
    DimensionBracket,
    DepthPressure,
    log_partition_sum,
    diagonal_log_partition_sum,
    diagonal_pressure,
    pressure_upper,
    pressure_lower,
    pressure_curve,
    pressure_derivative,
    singularity_dimension,
    detect_kink,
)
from .measures import (
    BernoulliMeasure,
    MarkovMeasure,
    MixtureMeasure,
    CylinderDistribution,
    cylinder_prob,
    entropy_finite,
    entropy_closed,
    energy_finite,
    lyapunov,
    equilibrium_gap,
    gibbs_ratios,
    gibbs_ratio_profile,
    empirical_equilibrium,
    check_consistency,
)
from .geometry import (
    AffineIFS,
    PointCloud,
    BoxCountReport,
    project,
    cylinder_image,
    attractor_sample,
    box_count,
    default_scales,
    hyperplane_check,
    inclusion_check,
)
from .fixtures import FIXTURES, fixture_config

__all__ = [name for name in dir() if not name.startswith("_")]
