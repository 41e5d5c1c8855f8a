"""Binary phase-shift-keyed coherent-state receivers with realistic
photon-number-resolving detectors: exact error probabilities, transmissivity
optimization and Monte Carlo validation."""

from .distributions import (
    IDEAL_DETECTOR,
    CountDistribution,
    DetectorModel,
    difference_pmf,
    difference_sign_masses,
    homodyne_like_rates,
    homodyne_pdf,
    pnr_outcome_pmf,
    pnr_outcome_vector,
    poisson_pmf,
    skellam_pmf,
)
from .map_decision import (
    BinaryHypothesis,
    ThresholdRule,
    correct_probability,
    map_error_probability,
    posterior,
    threshold_dark,
    threshold_error_probability,
    threshold_from_rates,
    threshold_general,
    threshold_visibility,
)
from .montecarlo import (
    McEstimate,
    TrialOutcome,
    run_validation,
    simulate_dpnrm,
    simulate_hybrid,
    validation_matrix,
)
from .optimizer import (
    AnsatzFit,
    Benchmark,
    OptimizationResult,
    SweepTable,
    ansatz_fit,
    optimize_tau,
    r_infinity_hd,
    ratio_curve,
    solve_lambda_hd,
    threshold_energy,
)
from .receivers import (
    NoiseCase,
    ReceiverResult,
    SignalConfig,
    dpnrm_asymptote,
    dpnrm_error,
    helstrom_bound,
    homodyne_like_error,
    homodyne_sql,
    hybrid_error,
    hybrid_error_hd,
    kennedy_error,
)

__version__ = "0.1.0"
