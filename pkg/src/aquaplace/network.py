"""Water-distribution network model: nodes, pipes, ingestion and augmentation.

A network is an undirected connected graph. Nodes are junctions or sources
(tanks/reservoirs), carry a yearly water demand and an accessibility flag;
edges are pipes with a positive length. Fictitious nodes added by
:func:`augment_with_fictitious` are marked and excluded from serialization
and reporting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    DanglingEndpointError,
    DisconnectedNetworkError,
    DuplicateIdError,
    NetworkError,
    NoSourceError,
    SchemaError,
)

KIND_JUNCTION = "junction"
KIND_SOURCE = "source"
NODE_KINDS = (KIND_JUNCTION, KIND_SOURCE)

NETWORK_SCHEMA = "wdn-network/1"

_NODE_KEYS = {"id", "x", "y", "kind", "demand", "accessible"}
_EDGE_KEYS = {"id", "from", "to", "length"}
_TOP_KEYS = {"schema", "nodes", "edges"}

# Fictitious pipes get a length this many times the shortest real pipe, so
# Dijkstra stays well defined without perturbing real shortest-path structure.
FICTITIOUS_LENGTH_FACTOR = 1e-6


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    demand: float
    accessible: bool
    x: float | None = None
    y: float | None = None
    fictitious: bool = False

    @property
    def is_source(self) -> bool:
        return self.kind == KIND_SOURCE

    @property
    def has_coords(self) -> bool:
        return self.x is not None and self.y is not None


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    length: float
    fictitious: bool = False

    def other(self, node_id: str) -> str:
        return self.v if node_id == self.u else self.u


@dataclass
class Network:
    """Validated undirected graph of nodes and pipes.

    Immutable by convention after construction; adjacency is derived from the
    edge set and kept consistent with it.
    """

    nodes: dict[str, Node]
    edges: dict[str, Edge]
    adjacency: dict[str, list[tuple[str, str]]] = field(init=False)

    def __post_init__(self) -> None:
        self.adjacency = {nid: [] for nid in self.nodes}
        for edge in self.edges.values():
            for endpoint in (edge.u, edge.v):
                if endpoint not in self.nodes:
                    raise DanglingEndpointError(
                        f"edge '{edge.id}' references unknown node '{endpoint}'"
                    )
            self.adjacency[edge.u].append((edge.v, edge.id))
            self.adjacency[edge.v].append((edge.u, edge.id))
        self._validate()

    def _validate(self) -> None:
        if not self.nodes:
            raise NetworkError("network has no nodes")
        if not any(n.is_source for n in self.nodes.values()):
            raise NoSourceError("network has no source node")
        unreached = self._unreached_nodes()
        if unreached:
            raise DisconnectedNetworkError(
                f"network is disconnected; unreachable from '{next(iter(self.nodes))}': "
                f"{sorted(unreached)[:5]}"
            )

    def _unreached_nodes(self) -> set[str]:
        start = next(iter(self.nodes))
        seen = {start}
        stack = [start]
        while stack:
            current = stack.pop()
            for neighbor, _ in self.adjacency[current]:
                if neighbor not in seen:
                    seen.add(neighbor)
                    stack.append(neighbor)
        return set(self.nodes) - seen

    # -- views ------------------------------------------------------------

    def real_nodes(self) -> list[Node]:
        return [n for n in self.nodes.values() if not n.fictitious]

    def real_edges(self) -> list[Edge]:
        return [e for e in self.edges.values() if not e.fictitious]

    def source_ids(self) -> list[str]:
        return [n.id for n in self.nodes.values() if n.is_source and not n.fictitious]

    @property
    def has_coords(self) -> bool:
        return all(n.has_coords for n in self.real_nodes())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges


def parse_network(document: dict, *, lenient: bool = False) -> Network:
    """Build a validated :class:`Network` from a network document.

    In strict mode (default) unknown keys anywhere in the document are
    rejected; ``lenient`` ignores them.
    """
    if not isinstance(document, dict):
        raise SchemaError("network document must be a mapping")
    if not lenient:
        unknown = set(document) - _TOP_KEYS
        if unknown:
            raise SchemaError(f"unknown top-level key '{sorted(unknown)[0]}'")
    for key in ("nodes", "edges"):
        if key not in document:
            raise SchemaError(f"missing top-level key '{key}'")
        if not isinstance(document[key], list):
            raise SchemaError(f"'{key}' must be a list")

    nodes: dict[str, Node] = {}
    for i, entry in enumerate(document["nodes"]):
        node = _parse_node(entry, i, lenient)
        if node.id in nodes:
            raise DuplicateIdError(f"duplicate node id '{node.id}'")
        nodes[node.id] = node

    edges: dict[str, Edge] = {}
    for i, entry in enumerate(document["edges"]):
        edge = _parse_edge(entry, i, lenient)
        if edge.id in edges:
            raise DuplicateIdError(f"duplicate edge id '{edge.id}'")
        edges[edge.id] = edge

    return Network(nodes=nodes, edges=edges)


def _parse_node(entry: dict, index: int, lenient: bool) -> Node:
    where = f"node {index}"
    _check_entry(entry, where, _NODE_KEYS, required=("id", "kind", "demand", "accessible"), lenient=lenient)
    node_id = _require_str(entry, "id", where)
    where = f"node '{node_id}'"
    kind = _require_str(entry, "kind", where)
    if kind not in NODE_KINDS:
        raise SchemaError(f"{where}: kind must be one of {NODE_KINDS}, got '{kind}'")
    demand = _require_number(entry, "demand", where)
    if demand < 0:
        raise SchemaError(f"{where}: demand must be non-negative")
    accessible = entry["accessible"]
    if not isinstance(accessible, bool):
        raise SchemaError(f"{where}: accessible must be a boolean")
    has_x, has_y = "x" in entry, "y" in entry
    if has_x != has_y:
        missing = "y" if has_x else "x"
        raise SchemaError(f"{where}: coordinate '{missing}' missing")
    x = _require_number(entry, "x", where) if has_x else None
    y = _require_number(entry, "y", where) if has_y else None
    return Node(id=node_id, kind=kind, demand=float(demand), accessible=accessible, x=x, y=y)


def _parse_edge(entry: dict, index: int, lenient: bool) -> Edge:
    where = f"edge {index}"
    _check_entry(entry, where, _EDGE_KEYS, required=("id", "from", "to", "length"), lenient=lenient)
    edge_id = _require_str(entry, "id", where)
    where = f"edge '{edge_id}'"
    u = _require_str(entry, "from", where)
    v = _require_str(entry, "to", where)
    if u == v:
        raise SchemaError(f"{where}: endpoints must be distinct, both are '{u}'")
    length = _require_number(entry, "length", where)
    if length <= 0:
        raise SchemaError(f"{where}: length must be positive")
    return Edge(id=edge_id, u=u, v=v, length=float(length))


def _check_entry(entry: object, where: str, allowed: set[str], required: tuple[str, ...], lenient: bool) -> None:
    if not isinstance(entry, dict):
        raise SchemaError(f"{where}: must be a mapping")
    if not lenient:
        unknown = set(entry) - allowed
        if unknown:
            raise SchemaError(f"{where}: unknown key '{sorted(unknown)[0]}'")
    for key in required:
        if key not in entry:
            raise SchemaError(f"{where}: missing key '{key}'")


def _require_str(entry: dict, key: str, where: str) -> str:
    value = entry[key]
    if not isinstance(value, str) or not value:
        raise SchemaError(f"{where}: '{key}' must be a non-empty string")
    return value


def _require_number(entry: dict, key: str, where: str) -> float:
    value = entry[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}: '{key}' must be a number")
    return float(value)


def to_document(net: Network) -> dict:
    """Serialize the real (non-fictitious) part of a network.

    ``parse_network(to_document(net))`` reproduces ``net`` for any
    unaugmented network.
    """
    nodes = []
    for n in net.real_nodes():
        entry: dict = {"id": n.id, "kind": n.kind, "demand": n.demand, "accessible": n.accessible}
        if n.has_coords:
            entry["x"] = n.x
            entry["y"] = n.y
        nodes.append(entry)
    edges = [
        {"id": e.id, "from": e.u, "to": e.v, "length": e.length}
        for e in net.real_edges()
    ]
    return {"schema": NETWORK_SCHEMA, "nodes": nodes, "edges": edges}


def load_network(path: str | Path, *, lenient: bool = False) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(json.load(fh), lenient=lenient)


def save_network(net: Network, path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(to_document(net), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def normalized_demands(net: Network) -> dict[str, float]:
    """Per-node demand divided by the maximum demand; values lie in [0, 1]."""
    demands = {n.id: n.demand for n in net.real_nodes()}
    v_max = max(demands.values())
    if v_max <= 0:
        raise NetworkError("all node demands are zero; normalized demands are undefined")
    return {nid: d / v_max for nid, d in demands.items()}


def fictitious_count(net: Network) -> int:
    """Fictitious nodes to attach per source: floor(demand nodes / sources)."""
    sources = net.source_ids()
    n_demand = len(net.real_nodes()) - len(sources)
    return n_demand // len(sources)


def augment_with_fictitious(net: Network) -> Network:
    """Return a copy with fictitious leaf nodes attached to every source.

    Each source gets ``fictitious_count(net)`` extra nodes, each joined to
    that source alone by a near-zero-length pipe. Shortest-path traffic to
    and from those leaves makes sources behave like supply hubs in the
    centrality computation. The input network is not modified.
    """
    if any(n.fictitious for n in net.nodes.values()):
        raise NetworkError("network is already augmented")
    n_f = fictitious_count(net)
    epsilon = FICTITIOUS_LENGTH_FACTOR * min(e.length for e in net.edges.values())
    nodes = dict(net.nodes)
    edges = dict(net.edges)
    for source_id in net.source_ids():
        for k in range(1, n_f + 1):
            node_id = f"fict_{source_id}_{k}"
            edge_id = f"fictedge_{source_id}_{k}"
            if node_id in nodes:
                raise DuplicateIdError(f"fictitious node id '{node_id}' collides with a real node")
            if edge_id in edges:
                raise DuplicateIdError(f"fictitious edge id '{edge_id}' collides with a real edge")
            nodes[node_id] = Node(
                id=node_id, kind=KIND_JUNCTION, demand=0.0, accessible=False, fictitious=True
            )
            edges[edge_id] = Edge(id=edge_id, u=source_id, v=node_id, length=epsilon, fictitious=True)
    return Network(nodes=nodes, edges=edges)


def strip_fictitious(net: Network) -> Network:
    """Inverse of :func:`augment_with_fictitious`."""
    return Network(
        nodes={n.id: n for n in net.real_nodes()},
        edges={e.id: e for e in net.real_edges()},
    )


# Synthetic demand tiers: most junctions serve households, a few serve
# industrial consumers with an order of magnitude more draw.
HOUSEHOLD_DEMAND = 100.0
INDUSTRIAL_DEMAND = 1000.0


def generate_grid_network(
    size: int = 5,
    seed: int = 42,
    inaccessible_fraction: float = 0.3,
    industrial_fraction: float = 0.2,
    pipe_length: float = 100.0,
) -> Network:
    """Deterministic synthetic network: a size x size grid of junctions.

    The (0, 0) corner is a source; a second source is attached beyond the far
    corner by one extra pipe, mimicking a two-tank layout. A fixed fraction of
    junctions gets industrial demand and the rest household demand, and a
    fixed fraction is flagged inaccessible, all drawn from ``seed``.
    """
    if size < 2:
        raise NetworkError("grid size must be at least 2")
    rng = np.random.default_rng(seed)
    nodes: dict[str, Node] = {}
    junction_ids = []
    for r in range(size):
        for c in range(size):
            nid = f"n{r}_{c}"
            kind = KIND_SOURCE if (r, c) == (0, 0) else KIND_JUNCTION
            nodes[nid] = Node(
                id=nid, kind=kind, demand=0.0 if kind == KIND_SOURCE else HOUSEHOLD_DEMAND,
                accessible=True, x=c * pipe_length, y=r * pipe_length,
            )
            if kind == KIND_JUNCTION:
                junction_ids.append(nid)

    # One shuffle assigns both roles, so industrial taps never coincide with
    # hard-to-access junctions.
    n_industrial = round(industrial_fraction * len(junction_ids))
    n_inaccessible = round(inaccessible_fraction * len(junction_ids))
    shuffled = list(rng.permutation(junction_ids))
    for nid in shuffled[:n_industrial]:
        nodes[nid] = replace(nodes[nid], demand=INDUSTRIAL_DEMAND)
    for nid in shuffled[len(shuffled) - n_inaccessible:]:
        nodes[nid] = replace(nodes[nid], accessible=False)

    far = size - 1
    tank_id = "tank"
    nodes[tank_id] = Node(
        id=tank_id, kind=KIND_SOURCE, demand=0.0, accessible=True,
        x=(far + 1) * pipe_length, y=(far + 1) * pipe_length,
    )

    edges: dict[str, Edge] = {}
    for r in range(size):
        for c in range(size):
            if c + 1 < size:
                eid = f"e{r}_{c}h"
                edges[eid] = Edge(id=eid, u=f"n{r}_{c}", v=f"n{r}_{c + 1}", length=pipe_length)
            if r + 1 < size:
                eid = f"e{r}_{c}v"
                edges[eid] = Edge(id=eid, u=f"n{r}_{c}", v=f"n{r + 1}_{c}", length=pipe_length)
    edges["e_tank"] = Edge(id="e_tank", u=f"n{far}_{far}", v=tank_id, length=pipe_length)

    return Network(nodes=nodes, edges=edges)
