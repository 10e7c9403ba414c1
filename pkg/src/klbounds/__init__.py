"""Numerical KL-divergence bounds, integral norms and CLT rate experiments."""

__version__ = "0.1.0"

from .density import (
    STANDARD_NORMAL,
    AnalyticDensity,
    Grid,
    GridDensity,
    MomentSet,
    default_grid,
    density_from_spec,
    discretize,
    gaussian,
    gaussian_mixture,
    moments,
    smoothed_uniform,
    standardize,
    standardized_gamma,
    tail_prob,
    truncated_second_moment,
)
from .divergences import KlResult, d_to_gaussian, f_divergence, kl, tv_distance
from .norms import (
    NormReport,
    differential_entropy,
    fisher_information,
    func_total_variation,
    linf_diff,
    log_density_moment,
    lp_diff,
    norm_report,
)
from .bounds import (
    BoundParams,
    BoundReport,
    binette_sup,
    bound_gaussian_explicit,
    bound_gaussian_l1l2,
    bound_general,
    bound_kl_from_linf,
    bound_zero_point,
    c_of_t,
    d_from_vj,
    entropy_sandwich,
    m_epsilon,
    optimize_params,
    pinsker_lower,
    reverse_pinsker_sason,
    sason_discrete,
)
from .clt import CltPoint, RateFit, SumSpec, bound_thm35, clt_sweep, fit_rate, sum_density
from .cclt import (
    CcltEstimate,
    ConditionalFamily,
    TruncationDiag,
    alpha_exponent,
    conditional_d,
    conditional_sum_density,
    expected_d_sweep,
    sample_realization,
)
