"""Figure rendering for networks, centrality maps, placements, histograms.

All functions draw to a file and never open a window; the Agg backend is
forced so the renderer works headless. Networks without stored coordinates
cannot be drawn and raise :class:`ModelError`.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection

from .anneal import DensityTable
from .centrality import CentralityMap
from .errors import ModelError
from .network import Network
from .placement import PlacementReport

EDGE_COLOR = "#9aa5b1"
SOURCE_COLOR = "#d7263d"
SENSOR_COLOR = "#d7263d"
NODE_CMAP = "viridis"


def _require_coords(net: Network) -> None:
    if not net.has_coords:
        raise ModelError("network has no coordinates; nothing to draw")


def _edge_segments(net: Network) -> list[list[tuple[float, float]]]:
    segments = []
    for edge in net.real_edges():
        a, b = net.nodes[edge.u], net.nodes[edge.v]
        segments.append([(a.x, a.y), (b.x, b.y)])
    return segments


def _draw_base(ax, net: Network, edge_colors=None, cmap=None):
    segments = _edge_segments(net)
    if edge_colors is None:
        lines = LineCollection(segments, colors=EDGE_COLOR, linewidths=1.2, zorder=1)
    else:
        lines = LineCollection(segments, cmap=cmap, linewidths=2.4, zorder=1)
        lines.set_array(np.asarray(edge_colors))
    ax.add_collection(lines)
    ax.autoscale()
    ax.set_aspect("equal")
    ax.set_xticks([])
    ax.set_yticks([])
    return lines


def plot_network(net: Network, path) -> None:
    """Junctions colored by demand, sources as triangles, inaccessible hollow."""
    _require_coords(net)
    fig, ax = plt.subplots(figsize=(7, 7))
    _draw_base(ax, net)
    junctions = [n for n in net.real_nodes() if not n.is_source]
    xs = [n.x for n in junctions]
    ys = [n.y for n in junctions]
    demands = [n.demand for n in junctions]
    filled = [n.accessible for n in junctions]
    sc = ax.scatter(
        xs, ys, c=demands, cmap=NODE_CMAP, s=70, zorder=2,
        edgecolors=["black" if f else "red" for f in filled],
        linewidths=[0.5 if f else 1.8 for f in filled],
    )
    fig.colorbar(sc, ax=ax, label="demand", shrink=0.8)
    srcs = [n for n in net.real_nodes() if n.is_source]
    ax.scatter(
        [n.x for n in srcs], [n.y for n in srcs],
        marker="^", c=SOURCE_COLOR, s=140, zorder=3, label="source",
    )
    ax.legend(loc="upper right")
    ax.set_title(f"network: {len(net.real_nodes())} nodes, {len(net.real_edges())} pipes")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_centrality(net: Network, weights: CentralityMap, path) -> None:
    """Pipes shaded by normalized betweenness."""
    _require_coords(net)
    fig, ax = plt.subplots(figsize=(7, 7))
    values = [weights.values[e.id] for e in net.real_edges()]
    lines = _draw_base(ax, net, edge_colors=values, cmap=NODE_CMAP)
    fig.colorbar(lines, ax=ax, label="edge betweenness (normalized)", shrink=0.8)
    xs = [n.x for n in net.real_nodes()]
    ys = [n.y for n in net.real_nodes()]
    ax.scatter(xs, ys, c="black", s=12, zorder=2)
    ax.set_title("tailored edge centrality")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_placement(net: Network, report: PlacementReport, path) -> None:
    """Sensor sites as stars on top of the pipe map."""
    _require_coords(net)
    fig, ax = plt.subplots(figsize=(7, 7))
    _draw_base(ax, net)
    chosen = set(report.selected)
    rest = [n for n in net.real_nodes() if n.id not in chosen]
    ax.scatter([n.x for n in rest], [n.y for n in rest], c="#cfd8e3", s=40, zorder=2)
    picked = [net.nodes[i] for i in report.selected]
    ax.scatter(
        [n.x for n in picked], [n.y for n in picked],
        marker="*", c=SENSOR_COLOR, s=260, zorder=3, label="sensor",
    )
    ax.legend(loc="upper right")
    ax.set_title(
        f"{report.sensor_count} sensors, "
        f"{100.0 * report.demand_coverage:.1f}% demand coverage"
    )
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_histogram(table: DensityTable, path) -> None:
    """Normalized energy histogram as a bar chart."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.bar(table.centers, table.densities, width=table.width * 0.92, color="#2a6f97")
    ax.set_xlabel("final energy")
    ax.set_ylabel("density")
    ax.set_title("annealing outcome distribution")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
