"""Numerical laboratory for the 1D random dimer Schrodinger operator."""

from .mat2 import (
    Direction,
    Kind,
    Mat2,
    SpectralClass,
    act,
    classify,
    one_step_transfer,
    power_trace_check,
    two_step_transfer,
)
from .model import (
    DimerParams,
    DisorderRealization,
    SpectrumSet,
    almost_sure_spectrum,
    apply_hamiltonian,
    sample_disorder,
)
from .lyapunov import (
    CriticalityReport,
    LyapunovEstimate,
    Verdict,
    classify_criticality,
    estimate_gamma,
    fit_quadratic_vanishing,
    scan_gamma,
)
from .criticalwalk import (
    Couple,
    CriticalCoupleAlgebra,
    Letter,
    PairedStat,
    ReducedWord,
    WalkStats,
    build_algebra,
    check_norm_bound,
    epsilon_law,
    exact_gamma_estimate,
    reduce_word,
    simulate_walk,
    u_law,
    walk_path,
    word_product,
)
from .dynamics import (
    InitialState,
    LocalizationProfile,
    MomentSeries,
    SpectralData,
    delta_state,
    diagonalize,
    evolve,
    exponential_state,
    fit_growth_exponent,
    localization_profiles,
    moment,
    moment_series,
    project,
)

__version__ = "0.1.0"
