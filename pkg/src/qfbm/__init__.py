"""Isotropic Q-fractional Brownian motion on the sphere.

Exact (circulant embedding) and approximate (conditionalized random midpoint
displacement) samplers for real-valued fBm, truncated spherical-harmonic
field synthesis, and a Monte Carlo harness for convergence-rate and
performance experiments.
"""

from .circulant import CePlan, build_ce_plan, increments_to_path, sample_ce_increments, sample_ce_pair
from .crmd import (
    CrmdPlan,
    build_crmd_plan,
    build_exact_crmd_plan,
    normals_required,
    sample_crmd,
    sample_crmd_exact,
    sample_crmd_paths,
)
from .errors import DomainError, EmbeddingError
from .field import (
    ExplicitSpectrum,
    FieldFrame,
    PowerLawSpectrum,
    QfbmSampler,
    check_summability,
    hyper_dim,
    rate_formula,
    synthesize_frame,
    trace_q,
    truncation_error_exact,
)
from .harness import ErrorCurve, RateFit, TimingRow, bench, crmd_error_curve, fit_rate, truncation_rate_experiment
from .kernel import TimeGrid, fbm_cov, increment_cov, interval_increment_cov
from .sphere import (
    Direction,
    SphereGrid,
    addition_theorem_residual,
    geodesic_distance,
    legendre_p,
    real_sph_harm,
)

__version__ = "0.1.0"
