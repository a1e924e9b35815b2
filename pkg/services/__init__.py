"""
Services package for the Lévy exponential-functional toolkit
Contains the analytic layer, the path simulators, the estimators and the verification suites
"""

from .levy_model import (
    LevyModel,
    ScaleMethod,
    brownian_exponential_moment_ref,
    brownian_laplace_bessel,
    brownian_laplace_ref,
    brownian_left_tail_log_ref,
    brownian_right_tail_rate,
    conditioned_spec,
    dufresne_cdf,
    expected_functional,
    exponent_summary,
    first_passage_prob,
    get_model,
    inverse_exponent,
    phi_v,
    poisson_log_laplace_bracket,
    poisson_log_laplace_ref,
    poisson_log_laplace_series,
    psi,
    psi_conditioned,
    psi_prime,
    ruin_probability_conditioned,
    scale_w,
    scale_w_conditioned,
)
from .laplace_inversion import euler_inversion
from .path_sim import (
    PathSimulator,
    argmin_split,
    last_passage_split,
    sample_increment,
    sample_increments,
    simulate_until,
    simulate_v_up,
    simulate_z_up,
    truncate_at_level,
    validate_increment_law,
)
from .expfunc import (
    FunctionalSampler,
    estimate,
    exp_integral,
    rejection_bias_study,
    sample_affine_batch,
    sample_affine_pair,
    sample_batch,
    sample_functional,
    sample_stopped_subordinator,
    stream_for,
    truncation_bias_bound,
    variant_bias_bound,
    write_samples_csv,
)
from .analysis import (
    IdentityChecker,
    affine_coefficient_log_laplace_bounds,
    check_identity,
    empirical_cdf,
    empirical_laplace,
    fit_exp_rate,
    jump_tail_lower_bounds,
    ks_two_sample,
    left_tail_bounds,
    log_laplace_power_bounds,
    predict_left_tail_log,
    predict_log_laplace,
    predict_poisson_tail,
    poisson_tail_chernoff_log,
    tail_exponent_bounds,
    write_tail_curve_csv,
)
from .verification_suites import SUITE_NAMES, VerificationSuiteRunner, first_moment_check, verify_suite

__all__ = [
    # Analytic layer
    'LevyModel',
    'ScaleMethod',
    'get_model',
    'psi',
    'psi_prime',
    'exponent_summary',
    'psi_conditioned',
    'inverse_exponent',
    'phi_v',
    'scale_w',
    'scale_w_conditioned',
    'ruin_probability_conditioned',
    'first_passage_prob',
    'conditioned_spec',
    'expected_functional',
    'euler_inversion',
    'brownian_laplace_ref',
    'brownian_laplace_bessel',
    'brownian_right_tail_rate',
    'brownian_exponential_moment_ref',
    'brownian_left_tail_log_ref',
    'dufresne_cdf',
    'poisson_log_laplace_series',
    'poisson_log_laplace_ref',
    'poisson_log_laplace_bracket',

    # Paths
    'PathSimulator',
    'sample_increment',
    'sample_increments',
    'validate_increment_law',
    'simulate_until',
    'simulate_v_up',
    'simulate_z_up',
    'last_passage_split',
    'argmin_split',
    'truncate_at_level',

    # Functionals
    'FunctionalSampler',
    'exp_integral',
    'truncation_bias_bound',
    'variant_bias_bound',
    'sample_functional',
    'sample_affine_pair',
    'sample_affine_batch',
    'sample_batch',
    'stream_for',
    'estimate',
    'rejection_bias_study',
    'sample_stopped_subordinator',
    'write_samples_csv',

    # Analysis
    'IdentityChecker',
    'check_identity',
    'empirical_cdf',
    'empirical_laplace',
    'ks_two_sample',
    'fit_exp_rate',
    'predict_left_tail_log',
    'left_tail_bounds',
    'tail_exponent_bounds',
    'predict_poisson_tail',
    'poisson_tail_chernoff_log',
    'jump_tail_lower_bounds',
    'predict_log_laplace',
    'log_laplace_power_bounds',
    'affine_coefficient_log_laplace_bounds',
    'write_tail_curve_csv',

    # Suites
    'SUITE_NAMES',
    'VerificationSuiteRunner',
    'first_moment_check',
    'verify_suite',
]
