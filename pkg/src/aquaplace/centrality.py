"""Betweenness centrality weighted by pipe length, tailored for supply hubs.

Raw node and edge betweenness sum, over unordered node pairs {s, t}, the
fraction of shortest s-t paths passing through the node or edge. Shortest
paths use pipe lengths as Dijkstra weights. The tailored variant first
attaches fictitious leaf nodes to every source so that traffic to and from
sources dominates, then restricts to real edges and rescales the maximum
to 1; those values become the edge weights of the cover penalty.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import SchemaError
from .network import Network, augment_with_fictitious

CENTRALITY_SCHEMA = "centrality/1"

# Two path lengths within this relative tolerance count as equal when
# tallying shortest-path multiplicities.
PATH_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class PathCounts:
    """Single-source Dijkstra output with shortest-path multiplicities."""

    source: str
    order: tuple[str, ...]  # settle order, source first
    dist: dict[str, float]
    sigma: dict[str, float]
    # per node: (predecessor node, edge id) for every shortest-path edge into it
    preds: dict[str, list[tuple[str, str]]]


@dataclass(frozen=True)
class CentralityMap:
    """Normalized per-edge weights in [0, 1], real edges only."""

    values: dict[str, float]


def _paths_equal(a: float, b: float) -> bool:
    return abs(a - b) <= PATH_TIE_RTOL * max(a, b, 1.0)


def shortest_path_counts(net: Network, source: str) -> PathCounts:
    """Dijkstra from ``source`` counting equal-length shortest paths.

    Length ties are detected with :data:`PATH_TIE_RTOL` so that floating-point
    sums of pipe lengths still register as the same path length.
    """
    dist: dict[str, float] = {source: 0.0}
    sigma: dict[str, float] = {source: 1.0}
    preds: dict[str, list[tuple[str, str]]] = {source: []}
    settled: set[str] = set()
    order: list[str] = []
    heap: list[tuple[float, str]] = [(0.0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in settled:
            continue
        settled.add(v)
        order.append(v)
        for w, edge_id in net.adjacency[v]:
            if w in settled:
                continue
            alt = d + net.edges[edge_id].length
            if w not in dist:
                dist[w] = alt
                sigma[w] = sigma[v]
                preds[w] = [(v, edge_id)]
                heapq.heappush(heap, (alt, w))
            elif _paths_equal(alt, dist[w]):
                sigma[w] += sigma[v]
                preds[w].append((v, edge_id))
            elif alt < dist[w]:
                dist[w] = alt
                sigma[w] = sigma[v]
                preds[w] = [(v, edge_id)]
                heapq.heappush(heap, (alt, w))
    return PathCounts(source=source, order=tuple(order), dist=dist, sigma=sigma, preds=preds)


def _brandes_accumulate(net: Network) -> tuple[dict[str, float], dict[str, float]]:
    """Raw betweenness for every node and edge, over unordered pairs.

    One Dijkstra plus one dependency back-propagation per source, sources
    visited in sorted id order so floating-point sums are reproducible.
    The ordered-pair double count is halved at the end.
    """
    node_acc = {nid: 0.0 for nid in net.nodes}
    edge_acc = {eid: 0.0 for eid in net.edges}
    for source in sorted(net.nodes):
        counts = shortest_path_counts(net, source)
        delta = {nid: 0.0 for nid in counts.order}
        for w in reversed(counts.order):
            coeff = (1.0 + delta[w]) / counts.sigma[w]
            for v, edge_id in counts.preds[w]:
                contribution = counts.sigma[v] * coeff
                edge_acc[edge_id] += contribution
                delta[v] += contribution
            if w != source:
                node_acc[w] += delta[w]
    return (
        {nid: value / 2.0 for nid, value in node_acc.items()},
        {eid: value / 2.0 for eid, value in edge_acc.items()},
    )


def node_betweenness(net: Network) -> dict[str, float]:
    """Raw node betweenness: shortest-path fractions through each node."""
    node_acc, _ = _brandes_accumulate(net)
    return node_acc


def edge_betweenness(net: Network) -> dict[str, float]:
    """Raw edge betweenness: shortest-path fractions through each edge."""
    _, edge_acc = _brandes_accumulate(net)
    return edge_acc


def tailored_centrality(net: Network) -> CentralityMap:
    """Edge weights for the cover penalty: augmented, restricted, normalized.

    Computes edge betweenness on the fictitious-augmented graph (all node
    pairs, fictitious ones included), keeps only real edges, and divides by
    the maximum kept value. If every value is zero (single-edge corner case)
    all weights are set to 1.
    """
    augmented = augment_with_fictitious(net)
    raw = edge_betweenness(augmented)
    real_ids = [e.id for e in net.real_edges()]
    restricted = {eid: raw[eid] for eid in real_ids}
    if not restricted:
        return CentralityMap(values={})
    peak = max(restricted.values())
    if peak <= 0.0:
        return CentralityMap(values={eid: 1.0 for eid in real_ids})
    return CentralityMap(values={eid: v / peak for eid, v in restricted.items()})


def to_document(cm: CentralityMap) -> dict:
    return {"schema": CENTRALITY_SCHEMA, "values": dict(cm.values)}


def from_document(document: dict) -> CentralityMap:
    if not isinstance(document, dict) or "values" not in document:
        raise SchemaError("centrality document: missing key 'values'")
    values = document["values"]
    if not isinstance(values, dict):
        raise SchemaError("centrality document: 'values' must be a mapping")
    return CentralityMap(values={str(k): float(v) for k, v in values.items()})
