"""Liquid democracy delegation games: evaluation, optimal delegation and approximate equilibria."""
from .core import (
    ABSTAIN,
    DelegationGraph,
    DomainError,
    GameInstance,
    LiquidGameError,
    PureProfile,
    SizeLimitError,
    ValidationError,
    delegation_graph,
    pure_utility,
    resolve_guru,
    social_welfare,
)
from .equilibrium import (
    EquilibriumReport,
    SolverConfig,
    SolverOutcome,
    best_response,
    certify_epsilon,
    enumerate_pure_nash,
    fixed_point_solve,
    narcissistic_avaricious,
    restricted_best_response,
)
from .evaluation import (
    EvalEstimate,
    GuruDistribution,
    MixedProfile,
    deviation_values,
    exact_expected_utility,
    exact_guru_distribution,
    exact_social_welfare,
    monte_carlo_utilities,
)
from .instances import (
    Digraph,
    gen_from_dominating_set,
    gen_lemma1,
    gen_lemma2,
    gen_random,
    gen_tight,
    lemma2_equilibrium,
    parse_instance,
    parse_profile,
    serialize_instance,
    serialize_profile,
)
from .optimization import (
    OptSolution,
    opt_exact,
    opt_greedy,
    star_welfare,
    sum_best_upper_bound,
    verify_star_structure,
)

__version__ = "0.1.0"
