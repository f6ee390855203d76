/** Pure geometry for the network canvas: no DOM, fully unit-testable. */

import type { CentralityDocument, NetworkDocument, NetworkNode } from "./api";

export interface Viewport {
  width: number;
  height: number;
  margin: number;
}

export interface Point {
  x: number;
  y: number;
}

export interface EdgeSegment {
  id: string;
  a: Point;
  b: Point;
  /** Normalized shading weight in [0, 1]; 0 when no centrality is loaded. */
  weight: number;
}

export interface NodeMarker {
  id: string;
  at: Point;
  kind: NetworkNode["kind"];
  demand: number;
  accessible: boolean;
  selected: boolean;
  installed: boolean;
  rejected: boolean;
}

export interface SelectionState {
  selected: ReadonlySet<string>;
  installed: ReadonlySet<string>;
  rejected: ReadonlySet<string>;
}

export interface RenderPlan {
  segments: EdgeSegment[];
  markers: NodeMarker[];
  maxDemand: number;
}

export const EMPTY_SELECTION: SelectionState = {
  selected: new Set(),
  installed: new Set(),
  rejected: new Set(),
};

/** Map data coordinates into the viewport, preserving aspect ratio.
 *
 * Canvas y grows downward, so the data y-axis is flipped. Degenerate
 * extents (a single column, row, or point) collapse to the center line.
 */
export function makeProjection(
  nodes: NetworkNode[],
  viewport: Viewport,
): (x: number, y: number) => Point {
  const placed = nodes.filter((n) => n.x !== undefined && n.y !== undefined);
  if (placed.length === 0) {
    throw new Error("network has no coordinates; nothing to draw");
  }
  const xs = placed.map((n) => n.x as number);
  const ys = placed.map((n) => n.y as number);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const innerW = viewport.width - 2 * viewport.margin;
  const innerH = viewport.height - 2 * viewport.margin;
  const spanX = maxX - minX;
  const spanY = maxY - minY;
  const scale =
    spanX === 0 && spanY === 0
      ? 0
      : Math.min(
          spanX === 0 ? Infinity : innerW / spanX,
          spanY === 0 ? Infinity : innerH / spanY,
        );
  const offsetX = viewport.margin + (innerW - spanX * scale) / 2;
  const offsetY = viewport.margin + (innerH - spanY * scale) / 2;
  return (x, y) => ({
    x: offsetX + (x - minX) * scale,
    y: viewport.height - (offsetY + (y - minY) * scale),
  });
}

export function buildRenderPlan(
  net: NetworkDocument,
  centrality: CentralityDocument | null,
  state: SelectionState,
  viewport: Viewport,
): RenderPlan {
  const project = makeProjection(net.nodes, viewport);
  const points = new Map<string, Point>();
  for (const node of net.nodes) {
    if (node.x !== undefined && node.y !== undefined) {
      points.set(node.id, project(node.x, node.y));
    }
  }

  const segments: EdgeSegment[] = [];
  for (const edge of net.edges) {
    const a = points.get(edge.from);
    const b = points.get(edge.to);
    if (!a || !b) {
      continue;
    }
    segments.push({ id: edge.id, a, b, weight: centrality?.values[edge.id] ?? 0 });
  }

  const markers: NodeMarker[] = [];
  for (const node of net.nodes) {
    const at = points.get(node.id);
    if (!at) {
      continue;
    }
    markers.push({
      id: node.id,
      at,
      kind: node.kind,
      demand: node.demand,
      accessible: node.accessible,
      selected: state.selected.has(node.id),
      installed: state.installed.has(node.id),
      rejected: state.rejected.has(node.id),
    });
  }

  return {
    segments,
    markers,
    maxDemand: Math.max(0, ...net.nodes.map((n) => n.demand)),
  };
}

export interface Bar {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Bar geometry for a density table, tallest bar filling the viewport. */
export function histogramBars(
  centers: number[],
  densities: number[],
  viewport: Viewport,
): Bar[] {
  if (centers.length !== densities.length) {
    throw new Error("centers and densities differ in length");
  }
  const innerW = viewport.width - 2 * viewport.margin;
  const innerH = viewport.height - 2 * viewport.margin;
  const peak = Math.max(0, ...densities);
  const barW = centers.length > 0 ? innerW / centers.length : 0;
  return densities.map((density, i) => {
    const h = peak > 0 ? (density / peak) * innerH : 0;
    return {
      x: viewport.margin + i * barW,
      y: viewport.height - viewport.margin - h,
      w: barW,
      h,
    };
  });
}

/** Closest marker within `radius` canvas units of a click, if any. */
export function hitTest(
  plan: RenderPlan,
  click: Point,
  radius = 12,
): NodeMarker | null {
  let best: NodeMarker | null = null;
  let bestDist = radius;
  for (const marker of plan.markers) {
    const dx = marker.at.x - click.x;
    const dy = marker.at.y - click.y;
    const dist = Math.hypot(dx, dy);
    if (dist <= bestDist) {
      best = marker;
      bestDist = dist;
    }
  }
  return best;
}
