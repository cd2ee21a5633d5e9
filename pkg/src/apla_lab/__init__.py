"""Learning automata on finite games with stochastic-stability analysis.

Simulates aspiration-based perturbed learning automata (and the plain
``h = c_asp = 0`` variant) on strategic-form games with bounded payoff
noise, and independently predicts the stochastically stable action
profiles from one-step resistance graphs, cross-validating prediction
against simulation.
"""

__version__ = "0.1.0"

from .dynamics import APLA, PLA, AgentState, Params, SystemState
from .errors import (
    AplaLabError,
    CapacityError,
    ConfigError,
    GameStructureError,
    OracleMismatchError,
    ParameterError,
    UsageError,
)
from .games import (
    Game,
    ImprovementPath,
    better_replies,
    decode_profile,
    encode_profile,
    game_from_dict,
    improvement_path_to,
    is_weakly_acyclic,
    load_game,
    payoff_dominant_equilibria,
    pure_nash_equilibria,
    utility_at,
    validate_positive_utility,
)
from .montecarlo import (
    ExperimentConfig,
    ExperimentReport,
    compare_prediction,
    run_experiment,
    run_replicate,
)
from .stability import (
    ResistanceDigraph,
    StabilityReport,
    WGraph,
    analyze_stability,
    build_digraph,
    build_improvement_sne_graph,
    check_corollaries,
    enumerate_wgraphs,
    fw_stationary,
    min_resistance,
    stochastically_stable_set,
)
from .transition import (
    EdgeAnalysis,
    analyze_edge,
    eta,
    nominal_hitting_time,
    noisy_hitting_bounds,
    satisfactory_prob_asymptotic,
    satisfactory_prob_product,
    unsatisfactory_prob_asymptotic,
)

__all__ = [
    "APLA",
    "PLA",
    "AgentState",
    "AplaLabError",
    "CapacityError",
    "ConfigError",
    "EdgeAnalysis",
    "ExperimentConfig",
    "ExperimentReport",
    "Game",
    "GameStructureError",
    "ImprovementPath",
    "OracleMismatchError",
    "ParameterError",
    "Params",
    "ResistanceDigraph",
    "StabilityReport",
    "SystemState",
    "UsageError",
    "WGraph",
    "analyze_edge",
    "analyze_stability",
    "better_replies",
    "build_digraph",
    "build_improvement_sne_graph",
    "check_corollaries",
    "compare_prediction",
    "decode_profile",
    "encode_profile",
    "enumerate_wgraphs",
    "eta",
    "fw_stationary",
    "game_from_dict",
    "improvement_path_to",
    "is_weakly_acyclic",
    "load_game",
    "min_resistance",
    "nominal_hitting_time",
    "noisy_hitting_bounds",
    "payoff_dominant_equilibria",
    "pure_nash_equilibria",
    "run_experiment",
    "run_replicate",
    "satisfactory_prob_asymptotic",
    "satisfactory_prob_product",
    "stochastically_stable_set",
    "unsatisfactory_prob_asymptotic",
    "utility_at",
    "validate_positive_utility",
]
