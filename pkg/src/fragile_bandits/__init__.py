"""Exact Thompson sampling, information ratios and fragility dimension for finite logistic bandits."""

from .bounds import general_info_bound, lipschitz_info_bound, info_ratio_regret_bound, theorem_bounds, beta_free_regret_bound, margin_regret_bound
from .checks import (
    DiscreteJoint,
    lemma_gbb_check,
    lemma_marginals_check,
    no_sublinear_verify,
    pairwise_negative_capacity,
    simplex_vertices,
)
from .engine import (
    POLICIES,
    Policy,
    PosteriorState,
    SimulationResult,
    Trajectory,
    bayes_regret_estimate,
    info_ratio_bound_check,
    info_ratio_exact,
    nu_partition,
    posterior_update,
    primitive_bound_check,
    run_episode,
    select_action,
    simulate,
)
from .errors import *  # noqa: F401,F403
from .fragility import (
    CliqueResult,
    FragilityGraph,
    build_fragility_graph,
    corollary_restriction_check,
    fragility_dimension,
    max_clique_exact,
    max_clique_greedy,
    turan_adversarial_search,
    turan_lower_bound_check,
)
from .generators import (
    PackingConfig,
    calibrate_hard_beta,
    gen_cone_iota0,
    gen_exponential_family,
    gen_hard_instance,
    gen_nonmonotone_pair,
    gen_packing,
    gen_sphere_matched,
)
from .geometry import Instance, delta_of, derive_optimal_map, lambda_of, validate_instance
from .link import GammaConstants, bar_gamma, gamma, gamma_constants, log_phi, phi, phi_derivative, phi_derivative_bounds
from .io import load_instance, save_instance

__version__ = "0.1.0"
