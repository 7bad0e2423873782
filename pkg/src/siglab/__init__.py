"""siglab: a desk-scale laboratory for anti-concentration of random
symmetric sign matrices — exact enumeration, reproducible Monte Carlo with
confidence intervals, least-common-denominator certification, epsilon-net
machinery and the associated inequality verifiers."""

from .concentration import (
    ThresholdResult,
    levy_mc,
    levy_opnorm_mc,
    rho_eps_exact,
    rho_exact,
    rho_mc,
    small_ball_mc,
    threshold_estimate,
)
from .constants import LAB, RegimeConstants, paper_regime
from .corenum import (
    SvdResult,
    adaptive_quadrature,
    exact_det,
    exact_rank,
    gaussian_interval_mass,
    jacobi_svd,
    std_normal_cdf,
    torus_norm,
)
from .experiments import (
    fit_exponential,
    q_lower_diagnostic,
    rank_evolution,
    singularity_exhaustive,
    singularity_mc,
    verify_opnorm_concentration,
    verify_replacement_chain,
)
from .fourier import (
    BoxUnion,
    CharFnSpec,
    char_fn_eval,
    gaussian_measure_mc,
    verify_cos_phi_bounds,
    verify_esseen,
    verify_fourier_inversion,
    verify_gauss_bm,
    verify_gauss_tail,
    verify_reverse_esseen,
)
from .lcd import (
    LcdResult,
    lcd,
    lcd_rarity_experiment,
    rank_event_mc,
    verify_cond_walk_lcd,
    verify_hanson_wright,
    verify_inverse_lwo,
    verify_second_moment,
    verify_tensorization,
)
from .mc import McEstimate
from .nets import (
    TrivialNetSpec,
    build_box_cover,
    lambda_membership,
    net_census_tiny,
    neps_membership,
    round_frame_to_net,
    round_vector_to_net,
)
from .rng import (
    Box,
    SeedSpec,
    sample_box_uniform,
    sample_lazy_vector,
    sample_ortho_frame,
    sample_sign_sym,
    sample_zeroed_matrix,
)

__version__ = "0.1.0"
