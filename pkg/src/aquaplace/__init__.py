"""Pressure-sensor placement on water-distribution networks.

The pipeline: model the network as a weighted graph, weight each pipe by a
tailored betweenness centrality, cast sensor placement as a soft weighted
vertex cover with cardinality and cost penalties over binary variables, and
minimize with multi-start simulated annealing. Installation sessions pin
nodes whose sensors are already in the ground and forbid spots rejected on
site, so replanning respects work already done.
"""

from .anneal import (
    AnnealResult,
    DensityTable,
    ExactSolver,
    RunRecord,
    Schedule,
    SimulatedAnnealingSolver,
    Solver,
    brute_force,
    get_solver,
    histogram,
    resolve_temperatures,
    simulated_anneal,
)
from .centrality import (
    CentralityMap,
    edge_betweenness,
    node_betweenness,
    shortest_path_counts,
    tailored_centrality,
)
from .errors import (
    AquaplaceError,
    DanglingEndpointError,
    DisconnectedNetworkError,
    DuplicateIdError,
    InstallLimitError,
    MarkConflictError,
    ModelError,
    NetworkError,
    NoSourceError,
    PenaltyWeightError,
    ReplanInFlightError,
    SchemaError,
    SessionError,
    SolverError,
)
from .network import (
    Edge,
    Network,
    Node,
    augment_with_fictitious,
    fictitious_count,
    generate_grid_network,
    load_network,
    normalized_demands,
    parse_network,
    save_network,
    strip_fictitious,
)
from .placement import (
    Hyperparams,
    PlacementReport,
    Session,
    build_placement_qubo,
    create_session,
    decode_selection,
    mark,
    node_costs,
    random_baseline,
    replan,
    solve_placement,
    unmark,
)
from .qubo import (
    IsingModel,
    QuboModel,
    Variable,
    VariableRegistry,
    add_cardinality_at_most,
    add_cardinality_equality,
    add_cost_term,
    add_pin_forbid_term,
    add_weighted_cover_term,
    bits_from_spins,
    reduce_cubic,
    spins_from_bits,
    to_ising,
)

__version__ = "0.1.0"
