/** Canvas renderer. All geometry comes precomputed from layout.ts. */

import type { NodeMarker, RenderPlan } from "./layout";

const EDGE_COLD = [176, 196, 222] as const;
const EDGE_HOT = [178, 34, 34] as const;

function edgeColor(weight: number): string {
  const t = Math.max(0, Math.min(1, weight));
  const mix = (i: number) => Math.round(EDGE_COLD[i] + t * (EDGE_HOT[i] - EDGE_COLD[i]));
  return `rgb(${mix(0)}, ${mix(1)}, ${mix(2)})`;
}

function nodeFill(marker: NodeMarker, maxDemand: number): string {
  if (marker.kind === "source") {
    return "#1f4e79";
  }
  if (maxDemand <= 0 || marker.demand <= 0) {
    return "#d9d9d9";
  }
  // darker grey for heavier demand
  const t = marker.demand / maxDemand;
  const shade = Math.round(214 - 130 * t);
  return `rgb(${shade}, ${shade}, ${shade})`;
}

function drawStar(ctx: CanvasRenderingContext2D, x: number, y: number, r: number): void {
  ctx.beginPath();
  for (let i = 0; i < 10; i += 1) {
    const angle = -Math.PI / 2 + (i * Math.PI) / 5;
    const radius = i % 2 === 0 ? r : r * 0.45;
    const px = x + radius * Math.cos(angle);
    const py = y + radius * Math.sin(angle);
    if (i === 0) {
      ctx.moveTo(px, py);
    } else {
      ctx.lineTo(px, py);
    }
  }
  ctx.closePath();
}

function drawTriangle(ctx: CanvasRenderingContext2D, x: number, y: number, r: number): void {
  ctx.beginPath();
  ctx.moveTo(x, y - r);
  ctx.lineTo(x - r * 0.87, y + r * 0.5);
  ctx.lineTo(x + r * 0.87, y + r * 0.5);
  ctx.closePath();
}

export function render(ctx: CanvasRenderingContext2D, plan: RenderPlan): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);

  for (const seg of plan.segments) {
    ctx.beginPath();
    ctx.moveTo(seg.a.x, seg.a.y);
    ctx.lineTo(seg.b.x, seg.b.y);
    ctx.strokeStyle = edgeColor(seg.weight);
    ctx.lineWidth = 1.5 + 2.5 * Math.max(0, Math.min(1, seg.weight));
    ctx.stroke();
  }

  for (const marker of plan.markers) {
    const { x, y } = marker.at;
    if (marker.kind === "source") {
      drawTriangle(ctx, x, y, 9);
      ctx.fillStyle = nodeFill(marker, plan.maxDemand);
      ctx.fill();
      continue;
    }

    ctx.beginPath();
    ctx.arc(x, y, 6, 0, 2 * Math.PI);
    ctx.fillStyle = nodeFill(marker, plan.maxDemand);
    ctx.fill();
    if (!marker.accessible) {
      ctx.strokeStyle = "#c0392b";
      ctx.lineWidth = 1.5;
      ctx.stroke();
    }

    if (marker.selected || marker.installed) {
      drawStar(ctx, x, y, 11);
      ctx.fillStyle = marker.installed ? "#1e8449" : "#d4ac0d";
      ctx.fill();
      ctx.strokeStyle = "#333";
      ctx.lineWidth = 0.75;
      ctx.stroke();
    }
    if (marker.rejected) {
      ctx.beginPath();
      ctx.moveTo(x - 8, y - 8);
      ctx.lineTo(x + 8, y + 8);
      ctx.moveTo(x + 8, y - 8);
      ctx.lineTo(x - 8, y + 8);
      ctx.strokeStyle = "#c0392b";
      ctx.lineWidth = 2;
      ctx.stroke();
    }
  }
}
