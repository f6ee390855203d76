"""Pipeline orchestration: costs, model assembly, solving, metrics, sessions.

Brings the pieces together for one placement problem: per-node selection
costs from demand and accessibility, the assembled penalty Hamiltonian
(cover + costs + cardinality, plus installed/rejected pins when a field
session is active), solver dispatch, and the decoded report with coverage
metrics. Sessions track which sensors a crew has physically installed and
which proposed spots turned out unusable, so a replan keeps finished work
and routes around the bad spots.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field

import numpy as np

from .anneal import AnnealResult, Schedule, SimulatedAnnealingSolver, Solver
from .centrality import CentralityMap
from .errors import (
    InstallLimitError,
    MarkConflictError,
    ModelError,
    PenaltyWeightError,
    SchemaError,
    SessionError,
)
from .network import Network, normalized_demands
from .qubo import (
    QuboModel,
    VariableRegistry,
    add_cardinality_at_most,
    add_cardinality_equality,
    add_cost_term,
    add_pin_forbid_term,
    add_weighted_cover_term,
)

REPORT_SCHEMA = "placement-report/1"
SESSION_SCHEMA = "session/1"
RESULT_SCHEMA = "anneal-result/1"

MODE_EQUALITY = "equality"
MODE_AT_MOST = "at_most"

F_LINEAR = "linear"
F_EXPONENTIAL = "exponential"

STATUS_INSTALLED = "installed"
STATUS_REJECTED = "rejected"

DEFAULT_PIN_WEIGHT_FACTOR = 10.0


@dataclass(frozen=True)
class Hyperparams:
    """Penalty weights and constraint settings for one placement problem."""

    s: int = 5
    A: float = 1.0
    B: float = 30.0
    C: float = 5.0
    D: float = 1.0
    E: float | None = None  # defaults to 10 * B when a session is active
    mode: str = MODE_EQUALITY
    f_model: str = F_LINEAR

    def __post_init__(self) -> None:
        for name in ("A", "B", "C", "D"):
            if getattr(self, name) <= 0:
                raise ModelError(f"weight {name} must be positive")
        if self.E is not None and self.E <= 0:
            raise ModelError("weight E must be positive")
        if self.C > self.B or self.D > self.B:
            raise ModelError("cost weights C and D must not exceed B")
        if self.s < 1:
            raise ModelError("sensor count s must be at least 1")
        if self.mode not in (MODE_EQUALITY, MODE_AT_MOST):
            raise ModelError(f"unknown mode '{self.mode}'")
        if self.f_model not in (F_LINEAR, F_EXPONENTIAL):
            raise ModelError(f"unknown cost model '{self.f_model}'")

    @property
    def pin_weight(self) -> float:
        return self.E if self.E is not None else DEFAULT_PIN_WEIGHT_FACTOR * self.B


@dataclass(frozen=True)
class PlacementReport:
    selected: tuple[str, ...]  # sorted node ids
    sensor_count: int
    accessible_count: int
    demand_coverage: float
    uncovered_weight: float
    energy: float
    constraint_satisfied: bool
    mode: str
    sensors_requested: int


@dataclass
class Session:
    """Mutable installation state: pinned (installed) and forbidden nodes."""

    id: str
    hyperparams: Hyperparams
    installed: set[str] = field(default_factory=set)
    rejected: set[str] = field(default_factory=set)
    last_report: PlacementReport | None = None


def node_costs(net: Network, hp: Hyperparams) -> dict[str, float]:
    """Selection cost per node: discounted by demand, bumped if inaccessible.

    ``C * f(normalized demand) + D * (0 if accessible else 1)`` with f either
    ``1 - x`` or ``exp(-x)``, so high-demand accessible nodes are cheap.
    """
    v_hat = normalized_demands(net)
    costs = {}
    for node in net.real_nodes():
        v = v_hat[node.id]
        f = (1.0 - v) if hp.f_model == F_LINEAR else float(np.exp(-v))
        g = 0.0 if node.accessible else 1.0
        costs[node.id] = hp.C * f + hp.D * g
    return costs


def placement_registry(net: Network) -> VariableRegistry:
    """One node variable per real node, in network order."""
    registry = VariableRegistry()
    for node in net.real_nodes():
        registry.add_node(node.id)
    return registry


def build_placement_qubo(
    net: Network,
    weights: CentralityMap,
    hp: Hyperparams,
    session: Session | None = None,
) -> QuboModel:
    """Assemble the full placement Hamiltonian over one variable per real node."""
    model = QuboModel(placement_registry(net))
    add_weighted_cover_term(model, net, weights, hp.A)
    add_cost_term(model, node_costs(net, hp))
    if hp.mode == MODE_EQUALITY:
        add_cardinality_equality(model, hp.s, hp.B)
    else:
        add_cardinality_at_most(model, hp.s, hp.B)
    if session is not None:
        add_pin_forbid_term(model, session.installed, session.rejected, hp.pin_weight)
    return model


def decode_selection(registry: VariableRegistry, assignment) -> tuple[str, ...]:
    """Selected node ids from an assignment; slack and ancilla bits ignored."""
    x = np.asarray(assignment)
    selected = [
        v.ref for v in registry.variables if v.role == "node" and x[v.index] == 1
    ]
    return tuple(sorted(selected))


def build_report(
    net: Network,
    weights: CentralityMap,
    hp: Hyperparams,
    selected: tuple[str, ...],
    energy: float,
) -> PlacementReport:
    chosen = set(selected)
    total_demand = sum(n.demand for n in net.real_nodes())
    covered_demand = sum(n.demand for n in net.real_nodes() if n.id in chosen)
    uncovered = 0.0
    for edge in net.real_edges():
        if edge.u not in chosen and edge.v not in chosen:
            uncovered += weights.values[edge.id]
    count = len(chosen)
    satisfied = count == hp.s if hp.mode == MODE_EQUALITY else count <= hp.s
    return PlacementReport(
        selected=tuple(sorted(chosen)),
        sensor_count=count,
        accessible_count=sum(1 for n in net.real_nodes() if n.id in chosen and n.accessible),
        demand_coverage=covered_demand / total_demand if total_demand > 0 else 0.0,
        uncovered_weight=uncovered,
        energy=energy,
        constraint_satisfied=satisfied,
        mode=hp.mode,
        sensors_requested=hp.s,
    )


def solve_placement(
    net: Network,
    weights: CentralityMap,
    hp: Hyperparams,
    schedule: Schedule,
    session: Session | None = None,
    solver: Solver | None = None,
) -> tuple[PlacementReport, AnnealResult]:
    """Build, solve, and decode; the best run's node bits become the report."""
    model = build_placement_qubo(net, weights, hp, session).freeze()
    if solver is None:
        solver = SimulatedAnnealingSolver(schedule)
    result = solver.minimize(model)
    selected = decode_selection(model.registry, result.best.assignment)
    report = build_report(net, weights, hp, selected, result.best.energy)
    return report, result


def random_baseline(net: Network, s: int, trials: int, seed: int) -> tuple[float, float]:
    """Mean and sample stddev of demand coverage over uniform s-subsets."""
    node_ids = [n.id for n in net.real_nodes()]
    if s > len(node_ids):
        raise ModelError(f"sensor count {s} exceeds node count {len(node_ids)}")
    if trials < 1:
        raise ModelError("trials must be at least 1")
    demands = np.array([n.demand for n in net.real_nodes()])
    total = demands.sum()
    rng = np.random.default_rng(seed)
    coverages = np.empty(trials)
    for t in range(trials):
        picks = rng.choice(len(node_ids), size=s, replace=False)
        coverages[t] = demands[picks].sum() / total
    stddev = float(np.std(coverages, ddof=1)) if trials > 1 else 0.0
    return float(np.mean(coverages)), stddev


# -- installation sessions -------------------------------------------------


def create_session(hp: Hyperparams, session_id: str | None = None) -> Session:
    return Session(id=session_id if session_id else uuid.uuid4().hex[:12], hyperparams=hp)


def mark(session: Session, net: Network, node_id: str, status: str) -> Session:
    """Record one field decision; idempotent per (node, status).

    Switching a node to the opposite status requires an explicit
    :func:`unmark` first.
    """
    if status not in (STATUS_INSTALLED, STATUS_REJECTED):
        raise SessionError(f"unknown status '{status}'")
    if node_id not in net.nodes or net.nodes[node_id].fictitious:
        raise SessionError(f"unknown node '{node_id}'")
    if status == STATUS_INSTALLED:
        if node_id in session.rejected:
            raise MarkConflictError(f"node '{node_id}' is already marked rejected")
        if node_id not in session.installed and len(session.installed) >= session.hyperparams.s:
            raise InstallLimitError(
                f"cannot install more than s={session.hyperparams.s} sensors"
            )
        session.installed.add(node_id)
    else:
        if node_id in session.installed:
            raise MarkConflictError(f"node '{node_id}' is already marked installed")
        session.rejected.add(node_id)
    return session


def unmark(session: Session, node_id: str) -> Session:
    if node_id in session.installed:
        session.installed.discard(node_id)
    elif node_id in session.rejected:
        session.rejected.discard(node_id)
    else:
        raise SessionError(f"node '{node_id}' is not marked")
    return session


def replan(
    session: Session,
    net: Network,
    weights: CentralityMap,
    schedule: Schedule,
    solver: Solver | None = None,
) -> tuple[PlacementReport, AnnealResult]:
    """Re-optimize honoring the session's pins and forbids.

    Verifies the solution respects every mark; a violation means the pin
    weight did not dominate and surfaces as :class:`PenaltyWeightError`.
    """
    report, result = solve_placement(
        net, weights, session.hyperparams, schedule, session=session, solver=solver
    )
    chosen = set(report.selected)
    missing = session.installed - chosen
    present = session.rejected & chosen
    if missing or present:
        raise PenaltyWeightError(
            f"replan violated marks (missing installed: {sorted(missing)}, "
            f"selected rejected: {sorted(present)}); increase the pin weight E "
            f"(currently {session.hyperparams.pin_weight})"
        )
    session.last_report = report
    return report, result


# -- document forms --------------------------------------------------------


def hyperparams_to_document(hp: Hyperparams) -> dict:
    return {
        "s": hp.s, "A": hp.A, "B": hp.B, "C": hp.C, "D": hp.D, "E": hp.E,
        "mode": hp.mode, "f_model": hp.f_model,
    }


def hyperparams_from_document(document: dict) -> Hyperparams:
    known = {"s", "A", "B", "C", "D", "E", "mode", "f_model"}
    unknown = set(document) - known
    if unknown:
        raise SchemaError(f"hyperparams: unknown key '{sorted(unknown)[0]}'")
    return Hyperparams(**document)


def report_to_document(report: PlacementReport) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "selected": list(report.selected),
        "sensor_count": report.sensor_count,
        "accessible_count": report.accessible_count,
        "demand_coverage": report.demand_coverage,
        "uncovered_weight": report.uncovered_weight,
        "energy": report.energy,
        "constraint_satisfied": report.constraint_satisfied,
        "mode": report.mode,
        "sensors_requested": report.sensors_requested,
    }


def report_from_document(document: dict) -> PlacementReport:
    try:
        return PlacementReport(
            selected=tuple(document["selected"]),
            sensor_count=document["sensor_count"],
            accessible_count=document["accessible_count"],
            demand_coverage=document["demand_coverage"],
            uncovered_weight=document["uncovered_weight"],
            energy=document["energy"],
            constraint_satisfied=document["constraint_satisfied"],
            mode=document["mode"],
            sensors_requested=document["sensors_requested"],
        )
    except KeyError as exc:
        raise SchemaError(f"report document: missing key {exc}") from None


def session_to_document(session: Session) -> dict:
    return {
        "schema": SESSION_SCHEMA,
        "id": session.id,
        "installed": sorted(session.installed),
        "rejected": sorted(session.rejected),
        "hyperparams": hyperparams_to_document(session.hyperparams),
        "last_report": report_to_document(session.last_report) if session.last_report else None,
    }


def session_from_document(document: dict) -> Session:
    try:
        hp = hyperparams_from_document(document["hyperparams"])
        session = Session(
            id=document["id"],
            hyperparams=hp,
            installed=set(document["installed"]),
            rejected=set(document["rejected"]),
        )
    except KeyError as exc:
        raise SchemaError(f"session document: missing key {exc}") from None
    if set(session.installed) & set(session.rejected):
        raise SchemaError("session document: installed and rejected overlap")
    report = document.get("last_report")
    if report is not None:
        session.last_report = report_from_document(report)
    return session


def result_to_document(result: AnnealResult, registry: VariableRegistry) -> dict:
    """Result document: schedule echo, per-run energies, decoded best."""
    best = result.best
    return {
        "schema": RESULT_SCHEMA,
        "schedule": {
            "t_hot": result.t_hot,
            "t_cold": result.t_cold,
            "sweeps": result.sweeps,
            "runs": len(result.records),
            "seed": result.seed,
        },
        "energies": [r.energy for r in result.records],
        "best": {
            "run_index": best.run_index,
            "selected": list(decode_selection(registry, best.assignment)),
            "energy": best.energy,
        },
    }
