/// <reference lib="dom" />

import { ApiClient, type MarkStatus } from "./api";
import { App, type AppView } from "./app";
import { render } from "./canvas";
import {
  buildRenderPlan,
  histogramBars,
  hitTest,
  EMPTY_SELECTION,
  type RenderPlan,
  type SelectionState,
  type Viewport,
} from "./layout";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

window.onload = () => {
  const canvas = el<HTMLCanvasElement>("network");
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    throw new Error("canvas 2d context unavailable");
  }
  const viewport: Viewport = { width: canvas.width, height: canvas.height, margin: 30 };

  const histCanvas = el<HTMLCanvasElement>("histogram");
  const histCtx = histCanvas.getContext("2d");
  if (!histCtx) {
    throw new Error("canvas 2d context unavailable");
  }
  const histViewport: Viewport = {
    width: histCanvas.width,
    height: histCanvas.height,
    margin: 8,
  };

  const statusLine = el<HTMLElement>("status");
  const errorLine = el<HTMLElement>("error");
  const reportPane = el<HTMLElement>("report");
  const sessionPane = el<HTMLElement>("session");
  const markMode = el<HTMLSelectElement>("mark-mode");
  const buttons = {
    solve: el<HTMLButtonElement>("solve"),
    session: el<HTMLButtonElement>("open-session"),
    replan: el<HTMLButtonElement>("replan"),
  };

  let plan: RenderPlan | null = null;
  let selection: SelectionState = EMPTY_SELECTION;

  const view: AppView = {
    networkLoaded(net, centrality) {
      plan = buildRenderPlan(net, centrality, selection, viewport);
      render(ctx, plan);
      statusLine.textContent =
        `${net.nodes.length} nodes, ${net.edges.length} pipes` +
        (centrality ? ", flow weights loaded" : "");
    },
    selectionChanged(state) {
      selection = state;
      if (app.net) {
        plan = buildRenderPlan(app.net, app.centrality, selection, viewport);
        render(ctx, plan);
      }
    },
    reportChanged(report) {
      if (!report) {
        reportPane.textContent = "no placement yet";
        return;
      }
      reportPane.innerHTML =
        `<b>${report.sensor_count}</b> sensors (${report.mode}, asked ${report.sensors_requested})` +
        `<br>coverage ${(report.demand_coverage * 100).toFixed(1)}%` +
        `<br>energy ${report.energy.toFixed(4)}` +
        `<br>${report.selected.join(", ")}`;
    },
    sessionChanged(session) {
      if (!session) {
        sessionPane.textContent = "no session";
        return;
      }
      sessionPane.textContent =
        `session ${session.id.slice(0, 8)} | installed: ` +
        `${session.installed.join(", ") || "none"} | rejected: ` +
        `${session.rejected.join(", ") || "none"}`;
    },
    histogramChanged(histogram) {
      histCtx.clearRect(0, 0, histCanvas.width, histCanvas.height);
      if (!histogram) {
        return;
      }
      histCtx.fillStyle = "#4a78a8";
      for (const bar of histogramBars(histogram.centers, histogram.densities, histViewport)) {
        histCtx.fillRect(bar.x, bar.y, Math.max(1, bar.w - 1), bar.h);
      }
    },
    busyChanged(busy, label) {
      for (const button of Object.values(buttons)) {
        button.disabled = busy;
      }
      statusLine.textContent = busy ? `${label}...` : "ready";
    },
    showError(message) {
      errorLine.textContent = message;
      setTimeout(() => {
        if (errorLine.textContent === message) {
          errorLine.textContent = "";
        }
      }, 6000);
    },
  };

  const base = `${window.location.protocol}//${window.location.hostname}:8765`;
  const app = new App(new ApiClient(base), view);

  buttons.solve.onclick = () => void app.solve({ runs: 20, sweeps: 20_000, seed: 0 });
  buttons.session.onclick = () => void app.openSession();
  buttons.replan.onclick = () => void app.replan({ runs: 20, sweeps: 20_000, seed: 0 });

  canvas.onclick = (event) => {
    if (!plan) {
      return;
    }
    const rect = canvas.getBoundingClientRect();
    const hit = hitTest(plan, {
      x: event.clientX - rect.left,
      y: event.clientY - rect.top,
    });
    if (hit) {
      void app.toggleMark(hit.id, markMode.value as MarkStatus);
    }
  };

  void app.start().catch((err) => view.showError(String(err)));
};
