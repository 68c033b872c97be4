"""Control-based online distributed optimization.

Structured gradient-tracking algorithms that embed an internal model of
the cost variation, with robustly synthesized controllers, alongside the
unstructured gradient-tracking baseline.
"""

from .consensus import (
    ConsensusTriplet,
    build_triplet,
    gain_relevant_spectrum,
    instance_gain_spectrum,
    validate_triplet,
)
from .costs import (
    NonQuadraticAgentCost,
    QuadraticAgentCost,
    SignalGenerator,
    finite_difference_check,
    optimal_point,
    random_spd,
)
from .dynamics import (
    DivergenceError,
    SimulationProblem,
    SimulationTrace,
    run_structured,
    run_unstructured,
)
from .graphs import Graph, diameter, is_connected, make_graph, metropolis_weights
from .harness import (
    ConfigError,
    ExperimentConfig,
    compare_triplets,
    config_from_toml,
    epsilon_metric,
    run_experiment,
    run_nonquadratic,
    sweep_perturbation,
)
from .models import (
    MonicPolynomial,
    Realization,
    RootMultiset,
    companion_realization,
    distributed_common_denominator,
    model_for_signal,
    poly_from_roots,
    roots_of,
    union_roots,
)
from .synthesis import (
    Controller,
    SynthesisError,
    fallback_search,
    synthesize,
    synthesize_for_gains,
    synthesize_lmi,
    verify_gain_set,
    verify_robust_stability,
)

__version__ = "0.1.0"
