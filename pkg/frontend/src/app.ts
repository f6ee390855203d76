/** Controller wiring the HTTP client to a view. No DOM access here so the
 * whole installation workflow can be driven from tests. */

import {
  ApiClient,
  ApiError,
  JobFailedError,
  type CentralityDocument,
  type HistogramDocument,
  type MarkStatus,
  type NetworkDocument,
  type Report,
  type ScheduleBody,
  type SessionDocument,
} from "./api";
import type { SelectionState } from "./layout";

export interface AppView {
  networkLoaded(net: NetworkDocument, centrality: CentralityDocument | null): void;
  selectionChanged(state: SelectionState): void;
  reportChanged(report: Report | null): void;
  sessionChanged(session: SessionDocument | null): void;
  histogramChanged(histogram: HistogramDocument | null): void;
  busyChanged(busy: boolean, label: string): void;
  showError(message: string): void;
}

export class App {
  net: NetworkDocument | null = null;
  centrality: CentralityDocument | null = null;
  report: Report | null = null;
  session: SessionDocument | null = null;
  histogram: HistogramDocument | null = null;
  private busy = false;

  constructor(
    private readonly client: ApiClient,
    private readonly view: AppView,
  ) {}

  selection(): SelectionState {
    return {
      selected: new Set(this.report?.selected ?? []),
      installed: new Set(this.session?.installed ?? []),
      rejected: new Set(this.session?.rejected ?? []),
    };
  }

  async start(): Promise<void> {
    this.net = await this.client.getNetwork();
    try {
      this.centrality = await this.client.getCentrality();
    } catch (err) {
      // draw an unshaded network rather than failing the whole page
      this.centrality = null;
      this.view.showError(describe(err));
    }
    this.view.networkLoaded(this.net, this.centrality);
    this.view.selectionChanged(this.selection());
  }

  async solve(schedule: ScheduleBody = {}): Promise<void> {
    await this.guarded("solving", async () => {
      const jobId = await this.client.startSolve({}, schedule);
      const job = await this.client.pollJob(jobId);
      this.report = job.report ?? null;
      this.view.reportChanged(this.report);
      this.view.selectionChanged(this.selection());
      await this.refreshHistogram(job.result_id);
    });
  }

  async openSession(): Promise<void> {
    await this.guarded("opening session", async () => {
      this.session = await this.client.createSession({});
      this.view.sessionChanged(this.session);
      this.view.selectionChanged(this.selection());
    });
  }

  async toggleMark(node: string, status: MarkStatus): Promise<void> {
    const session = this.session;
    if (!session) {
      this.view.showError("open a session before marking nodes");
      return;
    }
    await this.guarded("marking", async () => {
      const marked =
        status === "installed"
          ? session.installed.includes(node)
          : session.rejected.includes(node);
      this.session = marked
        ? await this.client.unmarkNode(session.id, node)
        : await this.client.markNode(session.id, node, status);
      this.view.sessionChanged(this.session);
      this.view.selectionChanged(this.selection());
    });
  }

  async replan(schedule: ScheduleBody = {}): Promise<void> {
    const session = this.session;
    if (!session) {
      this.view.showError("open a session before replanning");
      return;
    }
    await this.guarded("replanning", async () => {
      const jobId = await this.client.startReplan(session.id, schedule);
      const job = await this.client.pollJob(jobId);
      this.report = job.report ?? null;
      this.session = await this.client.getSession(session.id);
      this.view.reportChanged(this.report);
      this.view.sessionChanged(this.session);
      this.view.selectionChanged(this.selection());
      await this.refreshHistogram(job.result_id);
    });
  }

  private async refreshHistogram(resultId: string | null): Promise<void> {
    if (!resultId) {
      return;
    }
    try {
      this.histogram = await this.client.resultHistogram(resultId);
    } catch {
      this.histogram = null;
    }
    this.view.histogramChanged(this.histogram);
  }

  /** Serialize actions and route failures to the view instead of throwing. */
  private async guarded(label: string, action: () => Promise<void>): Promise<void> {
    if (this.busy) {
      this.view.showError("another action is still running");
      return;
    }
    this.busy = true;
    this.view.busyChanged(true, label);
    try {
      await action();
    } catch (err) {
      this.view.showError(describe(err));
    } finally {
      this.busy = false;
      this.view.busyChanged(false, "");
    }
  }
}

export function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.code} (${err.status}): ${err.message}`;
  }
  if (err instanceof JobFailedError) {
    return `background job failed: ${err.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}
