from __future__ import annotations

import itertools

import pytest

from aquaplace.network import parse_network


def net_doc(nodes, edges):
    """Network document from terse tuples.

    nodes: (id, kind, demand, accessible) or (id, kind, demand, accessible, x, y)
    edges: (id, u, v, length)
    """
    node_entries = []
    for spec in nodes:
        entry = {"id": spec[0], "kind": spec[1], "demand": spec[2], "accessible": spec[3]}
        if len(spec) == 6:
            entry["x"], entry["y"] = spec[4], spec[5]
        node_entries.append(entry)
    edge_entries = [
        {"id": e[0], "from": e[1], "to": e[2], "length": e[3]} for e in edges
    ]
    return {"schema": "wdn-network/1", "nodes": node_entries, "edges": edge_entries}


def make_net(nodes, edges):
    return parse_network(net_doc(nodes, edges))


def all_paths_betweenness(net):
    """Oracle: enumerate every simple path per pair, keep the shortest ones.

    Only usable on tiny graphs; counts unordered pairs once, endpoints
    excluded from node scores.
    """
    node_acc = {nid: 0.0 for nid in net.nodes}
    edge_acc = {eid: 0.0 for eid in net.edges}

    def simple_paths(origin, target):
        paths = []

        def extend(node, visited, edges, length):
            if node == target:
                paths.append((length, list(edges)))
                return
            for neighbor, edge_id in net.adjacency[node]:
                if neighbor in visited:
                    continue
                extend(
                    neighbor,
                    visited | {neighbor},
                    edges + [edge_id],
                    length + net.edges[edge_id].length,
                )

        extend(origin, {origin}, [], 0.0)
        return paths

    for s, t in itertools.combinations(sorted(net.nodes), 2):
        paths = simple_paths(s, t)
        best = min(length for length, _ in paths)
        shortest = [
            e for length, e in paths
            if abs(length - best) <= 1e-12 * max(length, best, 1.0)
        ]
        for edges in shortest:
            share = 1.0 / len(shortest)
            for eid in edges:
                edge_acc[eid] += share
            interior = set()
            for eid in edges:
                interior.update((net.edges[eid].u, net.edges[eid].v))
            interior -= {s, t}
            for nid in interior:
                node_acc[nid] += share
    return node_acc, edge_acc


def random_connected_net(rng, n_nodes):
    nodes = [("n0", "source", 0.0, True)] + [
        (f"n{i}", "junction", 1.0, True) for i in range(1, n_nodes)
    ]
    edges = []
    for i in range(1, n_nodes):
        j = int(rng.integers(i))
        edges.append((f"t{i}", f"n{i}", f"n{j}", float(rng.uniform(0.5, 3.0))))
    extra = int(rng.integers(0, n_nodes))
    pairs = [(i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes)]
    for k, idx in enumerate(rng.choice(len(pairs), size=min(extra, len(pairs)), replace=False)):
        i, j = pairs[int(idx)]
        edges.append((f"x{k}", f"n{i}", f"n{j}", float(rng.uniform(0.5, 3.0))))
    return make_net(nodes, edges)


@pytest.fixture
def path_net():
    # a -- b -- c with a supplying tank at a
    return make_net(
        [
            ("a", "source", 0.0, True),
            ("b", "junction", 500.0, True),
            ("c", "junction", 250.0, False),
        ],
        [("ab", "a", "b", 100.0), ("bc", "b", "c", 100.0)],
    )
