"""Quadratic binary models: penalty assembly, spin conversion, evaluation.

A :class:`QuboModel` is a quadratic polynomial over binary variables,
stored as a dense linear vector plus a sparse map of unordered index pairs
to the full coefficient of the monomial ``x_i * x_j``, plus a constant
offset. Builder functions accumulate the placement penalty terms: the
weighted edge-cover term, per-node costs, cardinality constraints (exact
or one-hot at-most), installed/rejected pins, and the ancilla gadget that
lowers a cubic monomial to quadratic ones.

Spin form: ``x = (s + 1) / 2`` maps a QUBO onto couplings J and fields h
with energy ``-sum J_ij s_i s_j - sum h_i s_i + offset``; the offset is
carried so both forms report identical energies on every assignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .centrality import CentralityMap
from .errors import ModelError, SchemaError
from .network import Network

QUBO_SCHEMA = "qubo/1"

ROLE_NODE = "node"
ROLE_SLACK = "slack"
ROLE_ANCILLA = "ancilla"

# Accumulated coefficients below this magnitude are dropped to keep the
# quadratic map sparse under repeated term addition.
PRUNE_EPS = 1e-15


@dataclass(frozen=True)
class Variable:
    index: int
    role: str
    ref: str | int  # node id, slack rank, or ancilla tag


class VariableRegistry:
    """Ordered binary-variable descriptors with contiguous 0-based indices."""

    def __init__(self) -> None:
        self.variables: list[Variable] = []
        self._node_index: dict[str, int] = {}
        self._listeners: list[QuboModel] = []

    def __len__(self) -> int:
        return len(self.variables)

    def _append(self, role: str, ref: str | int) -> int:
        index = len(self.variables)
        self.variables.append(Variable(index=index, role=role, ref=ref))
        for model in self._listeners:
            model._on_variable_added()
        return index

    def add_node(self, node_id: str) -> int:
        if node_id in self._node_index:
            raise ModelError(f"node '{node_id}' already registered")
        index = self._append(ROLE_NODE, node_id)
        self._node_index[node_id] = index
        return index

    def add_slack(self, rank: int) -> int:
        return self._append(ROLE_SLACK, rank)

    def add_ancilla(self, tag: str) -> int:
        return self._append(ROLE_ANCILLA, tag)

    def node_index(self, node_id: str) -> int:
        try:
            return self._node_index[node_id]
        except KeyError:
            raise ModelError(f"node '{node_id}' is not a registered variable") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._node_index

    def node_indices(self) -> list[int]:
        return [v.index for v in self.variables if v.role == ROLE_NODE]

    def node_ids(self) -> list[str]:
        return [v.ref for v in self.variables if v.role == ROLE_NODE]  # type: ignore[misc]

    def slack_indices(self) -> list[int]:
        return [v.index for v in self.variables if v.role == ROLE_SLACK]


class QuboModel:
    """Mutable while building; freeze before handing to a solver."""

    def __init__(self, registry: VariableRegistry | None = None) -> None:
        self.registry = registry if registry is not None else VariableRegistry()
        self.linear: list[float] = [0.0] * len(self.registry)
        self.quadratic: dict[tuple[int, int], float] = {}
        self.offset: float = 0.0
        self.frozen: bool = False
        self._neighbors: list[tuple[np.ndarray, np.ndarray]] | None = None
        self.registry._listeners.append(self)

    @property
    def n(self) -> int:
        return len(self.registry)

    def _on_variable_added(self) -> None:
        self._check_mutable()
        self.linear.append(0.0)

    def _check_mutable(self) -> None:
        if self.frozen:
            raise ModelError("model is frozen")

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise ModelError(f"variable index {i} out of range for n={self.n}")

    # -- term accumulation -------------------------------------------------

    def add_offset(self, value: float) -> None:
        self._check_mutable()
        self.offset += value

    def add_linear(self, i: int, value: float) -> None:
        self._check_mutable()
        self._check_index(i)
        self.linear[i] += value

    def add_quadratic(self, i: int, j: int, value: float) -> None:
        """Accumulate onto the monomial ``x_i * x_j``; (i, i) folds into linear."""
        self._check_mutable()
        self._check_index(i)
        self._check_index(j)
        if i == j:
            self.linear[i] += value
            return
        key = (i, j) if i < j else (j, i)
        total = self.quadratic.get(key, 0.0) + value
        if abs(total) < PRUNE_EPS:
            self.quadratic.pop(key, None)
        else:
            self.quadratic[key] = total

    def freeze(self) -> QuboModel:
        """Make the model immutable and precompute per-variable rows."""
        if not self.frozen:
            self.frozen = True
            rows: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
            for (i, j), value in self.quadratic.items():
                rows[i].append((j, value))
                rows[j].append((i, value))
            self._neighbors = [
                (
                    np.array([j for j, _ in row], dtype=np.intp),
                    np.array([v for _, v in row], dtype=np.float64),
                )
                for row in rows
            ]
        return self

    # -- evaluation --------------------------------------------------------

    def _coerce_assignment(self, assignment) -> np.ndarray:
        x = np.asarray(assignment)
        if x.shape != (self.n,):
            raise ModelError(f"assignment has length {x.size}, expected {self.n}")
        if x.size and not np.all((x == 0) | (x == 1)):
            raise ModelError("assignment values must be 0 or 1")
        return x.astype(np.float64)

    def energy(self, assignment) -> float:
        """Exact evaluation: linear + pairwise terms + offset."""
        x = self._coerce_assignment(assignment)
        total = self.offset + float(np.dot(self.linear, x))
        for (i, j), value in self.quadratic.items():
            total += value * x[i] * x[j]
        return total

    def delta_energy(self, assignment, flip_index: int) -> float:
        """Energy change from flipping one bit, in O(degree of the variable)."""
        self._check_index(flip_index)
        x = np.asarray(assignment)
        if x.shape != (self.n,):
            raise ModelError(f"assignment has length {x.size}, expected {self.n}")
        if self._neighbors is not None:
            idx, coeff = self._neighbors[flip_index]
            cross = float(np.dot(coeff, x[idx])) if idx.size else 0.0
        else:
            cross = 0.0
            for (i, j), value in self.quadratic.items():
                if i == flip_index:
                    cross += value * x[j]
                elif j == flip_index:
                    cross += value * x[i]
        sign = 1.0 - 2.0 * float(x[flip_index])
        return sign * (self.linear[flip_index] + cross)

    def neighbor_rows(self) -> list[tuple[np.ndarray, np.ndarray]]:
        if self._neighbors is None:
            raise ModelError("model must be frozen first")
        return self._neighbors


@dataclass
class IsingModel:
    """Spin-variable form of a QUBO; spins take values -1 and +1."""

    h: np.ndarray
    J: dict[tuple[int, int], float]
    offset: float
    registry: VariableRegistry = field(repr=False)

    @property
    def n(self) -> int:
        return self.h.size

    def energy(self, spins) -> float:
        s = np.asarray(spins)
        if s.shape != (self.n,):
            raise ModelError(f"spin assignment has length {s.size}, expected {self.n}")
        if s.size and not np.all((s == -1) | (s == 1)):
            raise ModelError("spin values must be -1 or +1")
        s = s.astype(np.float64)
        total = self.offset - float(np.dot(self.h, s))
        for (i, j), value in self.J.items():
            total -= value * s[i] * s[j]
        return total


# -- penalty builders ------------------------------------------------------


def add_weighted_cover_term(model: QuboModel, net: Network, weights: CentralityMap, A: float) -> QuboModel:
    """Penalize edges with neither endpoint selected, scaled per-edge.

    Adds ``A * sum over edges of w_ij (1 - x_i)(1 - x_j)``; zero exactly on
    assignments whose selected set touches every positive-weight edge.
    """
    if A <= 0:
        raise ModelError("cover weight A must be positive")
    for edge in net.real_edges():
        if edge.id not in weights.values:
            raise ModelError(f"no centrality weight for edge '{edge.id}'")
        w = weights.values[edge.id]
        if w == 0.0:
            continue
        i = model.registry.node_index(edge.u)
        j = model.registry.node_index(edge.v)
        model.add_offset(A * w)
        model.add_linear(i, -A * w)
        model.add_linear(j, -A * w)
        model.add_quadratic(i, j, A * w)
    return model


def add_cost_term(model: QuboModel, costs: dict[str, float]) -> QuboModel:
    """Add per-node selection costs onto the linear coefficients."""
    for node_id in model.registry.node_ids():
        if node_id not in costs:
            raise ModelError(f"no cost for node '{node_id}'")
        cost = costs[node_id]
        if cost < 0:
            raise ModelError(f"cost for node '{node_id}' is negative")
        if cost != 0.0:
            model.add_linear(model.registry.node_index(node_id), cost)
    return model


def add_cardinality_equality(model: QuboModel, s: int, B: float) -> QuboModel:
    """Force exactly ``s`` selected nodes: ``B (sum x_i - s)^2`` expanded."""
    node_idx = model.registry.node_indices()
    _check_cardinality_args(s, B, len(node_idx))
    for i in node_idx:
        model.add_linear(i, B * (1.0 - 2.0 * s))
    for a in range(len(node_idx)):
        for b in range(a + 1, len(node_idx)):
            model.add_quadratic(node_idx[a], node_idx[b], 2.0 * B)
    model.add_offset(B * s * s)
    return model


def add_cardinality_at_most(model: QuboModel, s: int, B: float) -> QuboModel:
    """Allow at most ``s`` selected nodes via one-hot slack variables.

    Registers slacks y_1..y_s and adds ``B (1 - sum y_a)^2 +
    B (sum a*y_a - sum x_i)^2`` with squares folded on the diagonal. The
    one-hot slack encodes the realized sensor count, so the all-zero
    assignment (no slack chosen) is penalized by B.
    """
    node_idx = model.registry.node_indices()
    _check_cardinality_args(s, B, len(node_idx))
    if model.registry.slack_indices():
        raise ModelError("model already has slack variables")
    slack_idx = [model.registry.add_slack(rank) for rank in range(1, s + 1)]

    model.add_offset(B)
    for a, ya in enumerate(slack_idx, start=1):
        model.add_linear(ya, B * (a * a - 1.0))
    for ai in range(len(slack_idx)):
        for bi in range(ai + 1, len(slack_idx)):
            a, b = ai + 1, bi + 1
            model.add_quadratic(slack_idx[ai], slack_idx[bi], 2.0 * B * (1.0 + a * b))
    for a, ya in enumerate(slack_idx, start=1):
        for i in node_idx:
            model.add_quadratic(ya, i, -2.0 * B * a)
    for i in node_idx:
        model.add_linear(i, B)
    for a in range(len(node_idx)):
        for b in range(a + 1, len(node_idx)):
            model.add_quadratic(node_idx[a], node_idx[b], 2.0 * B)
    return model


def _check_cardinality_args(s: int, B: float, n_nodes: int) -> None:
    if B <= 0:
        raise ModelError("cardinality weight B must be positive")
    if s <= 0:
        raise ModelError("sensor count s must be positive")
    if s > n_nodes:
        raise ModelError(f"sensor count {s} exceeds node-variable count {n_nodes}")


def add_pin_forbid_term(model: QuboModel, installed: set[str], rejected: set[str], E: float) -> QuboModel:
    """Reward keeping installed nodes selected and forbid rejected ones.

    Adds ``E * sum over installed (1 - x_a) + E * sum over rejected x_r``,
    zero exactly when every installed node is selected and no rejected one is.
    """
    if E <= 0:
        raise ModelError("pin weight E must be positive")
    overlap = set(installed) & set(rejected)
    if overlap:
        raise ModelError(f"nodes marked both installed and rejected: {sorted(overlap)}")
    for node_id in installed:
        model.add_offset(E)
        model.add_linear(model.registry.node_index(node_id), -E)
    for node_id in rejected:
        model.add_linear(model.registry.node_index(node_id), E)
    return model


def reduce_cubic(model: QuboModel, i: int, j: int, k: int, scale: float = 1.0) -> int:
    """Register an ancilla equal to ``x_j * x_k`` and penalize disagreement.

    Adds ``scale * (3*x_anc + x_j*x_k - 2*x_j*x_anc - 2*x_k*x_anc)``, which
    vanishes exactly when the ancilla matches the product and is positive
    otherwise. Returns the ancilla index; the caller rewrites the cubic
    monomial ``x_i x_j x_k`` as ``x_i * x_anc``.
    """
    if scale <= 0:
        raise ModelError("ancilla penalty scale must be positive")
    if len({i, j, k}) != 3:
        raise ModelError("cubic reduction needs three distinct variables")
    for index in (i, j, k):
        model._check_index(index)
    anc = model.registry.add_ancilla(f"x{j}*x{k}")
    model.add_linear(anc, 3.0 * scale)
    model.add_quadratic(j, k, scale)
    model.add_quadratic(j, anc, -2.0 * scale)
    model.add_quadratic(k, anc, -2.0 * scale)
    return anc


# -- spin conversion -------------------------------------------------------


def to_ising(model: QuboModel) -> IsingModel:
    """Change of variables ``x = (s + 1) / 2``, carrying the exact offset.

    With q_ij the full pairwise coefficient stored for {i, j}:
    ``J_ij = -q_ij / 4``, ``h_i = -(c_i / 2 + sum_j q_ij / 4)``, and the
    offset picks up ``sum c_i / 2 + sum q_ij / 4`` so that the spin energy
    equals the binary energy on every assignment.
    """
    n = model.n
    h = np.zeros(n)
    J: dict[tuple[int, int], float] = {}
    offset = model.offset
    for i in range(n):
        h[i] -= model.linear[i] / 2.0
        offset += model.linear[i] / 2.0
    for (i, j), q in model.quadratic.items():
        coupling = -q / 4.0
        if abs(coupling) >= PRUNE_EPS:
            J[(i, j)] = coupling
        h[i] -= q / 4.0
        h[j] -= q / 4.0
        offset += q / 4.0
    return IsingModel(h=h, J=J, offset=offset, registry=model.registry)


def spins_from_bits(assignment) -> np.ndarray:
    x = np.asarray(assignment)
    return (2 * x - 1).astype(np.int8)


def bits_from_spins(spins) -> np.ndarray:
    s = np.asarray(spins)
    return ((s + 1) // 2).astype(np.int8)


# -- serialization ---------------------------------------------------------


def to_document(model: QuboModel) -> dict:
    """Diffable document form: pairs sorted lexicographically."""
    registry = [
        {"index": v.index, "role": v.role, "ref": v.ref} for v in model.registry.variables
    ]
    quadratic = [
        [i, j, value] for (i, j), value in sorted(model.quadratic.items())
    ]
    return {
        "schema": QUBO_SCHEMA,
        "n": model.n,
        "registry": registry,
        "linear": list(model.linear),
        "quadratic": quadratic,
        "offset": model.offset,
    }


def from_document(document: dict) -> QuboModel:
    for key in ("n", "registry", "linear", "quadratic", "offset"):
        if key not in document:
            raise SchemaError(f"qubo document: missing key '{key}'")
    registry = VariableRegistry()
    for entry in document["registry"]:
        role = entry.get("role")
        ref = entry.get("ref")
        if role == ROLE_NODE:
            registry.add_node(ref)
        elif role == ROLE_SLACK:
            registry.add_slack(int(ref))
        elif role == ROLE_ANCILLA:
            registry.add_ancilla(ref)
        else:
            raise SchemaError(f"qubo document: unknown variable role '{role}'")
    if len(registry) != document["n"]:
        raise SchemaError("qubo document: registry length disagrees with n")
    model = QuboModel(registry)
    linear = document["linear"]
    if len(linear) != model.n:
        raise SchemaError("qubo document: linear length disagrees with n")
    for i, value in enumerate(linear):
        model.add_linear(i, float(value))
    for i, j, value in document["quadratic"]:
        model.add_quadratic(int(i), int(j), float(value))
    model.add_offset(float(document["offset"]))
    return model
