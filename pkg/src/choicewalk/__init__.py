"""Random walks with choice on graphs: cover steps, node loads and experiments."""
from .errors import (
    CapExceededError,
    ChoiceWalkError,
    GenerationError,
    GraphParseError,
    InfiniteExpectation,
    OracleTooLarge,
    StuckWalkError,
)
from .graph import (
    Graph,
    GraphStats,
    connectivity_radius,
    generate_complete,
    generate_cycle,
    generate_path,
    generate_rgg,
    generate_star,
    generate_torus,
    is_connected,
    load_edge_list,
    save_edge_list,
    stats,
)
from .metrics import ExperimentReport, RunRecord, aggregate, improvement, visit_histogram
from .walk import BACKEND, DEFAULT_FRACTIONS, Policy, init_walk, run_replicate

__version__ = "0.1.0"
