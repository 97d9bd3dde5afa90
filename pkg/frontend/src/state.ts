/**
 * Workspace state and the what-if submission flow.
 *
 * The workspace owns the editable drafts and the most recent service
 * response. Submissions carry a sequence number: a response that comes back
 * after a newer submission started is discarded, so the panel always shows
 * the latest request's numbers.
 */

import { ApiClient, ServiceError } from "./api";
import type {
  AllocateRequestBody,
  AllocationResponse,
  Banner,
  ComparisonEntry,
  ComposeRequestBody,
  StatisticDraft,
  WorkspaceState,
} from "./types";

export const METHODS = [
  "auto",
  "exact-optimal",
  "approx-optimal",
  "basic",
  "homogeneous-optimal",
] as const;

export function createWorkspace(): WorkspaceState {
  return {
    statistics: [
      { name: "statistic-1", weight: "1", delta: "0" },
      { name: "statistic-2", weight: "1", delta: "0" },
    ],
    global: { epsilonG: "1.0", deltaG: "1e-6" },
    method: "auto",
    eta: "0.05",
    lastResponse: null,
    comparison: [],
    banner: null,
    dirty: true,
    inFlight: false,
  };
}

export class Workspace {
  state: WorkspaceState;
  private sequence = 0;

  constructor(
    private readonly client: ApiClient,
    initial: WorkspaceState = createWorkspace(),
  ) {
    this.state = initial;
  }

  editStatistic(index: number, patch: Partial<StatisticDraft>): void {
    const row = this.state.statistics[index];
    if (!row) return;
    this.state.statistics[index] = { ...row, ...patch };
    this.state.dirty = true;
  }

  addStatistic(): void {
    const n = this.state.statistics.length + 1;
    this.state.statistics.push({ name: `statistic-${n}`, weight: "1", delta: "0" });
    this.state.dirty = true;
  }

  removeStatistic(index: number): void {
    if (this.state.statistics.length <= 1) return;
    this.state.statistics.splice(index, 1);
    this.state.dirty = true;
  }

  editGlobal(patch: Partial<WorkspaceState["global"]>): void {
    this.state.global = { ...this.state.global, ...patch };
    this.state.dirty = true;
  }

  setMethod(method: string): void {
    this.state.method = method;
    this.state.dirty = true;
  }

  setEta(eta: string): void {
    this.state.eta = eta;
    this.state.dirty = true;
  }

  dismissBanner(): void {
    this.state.banner = null;
  }

  /**
   * Submit the current drafts to /v1/allocate and refresh the panel.
   *
   * On a 4xx the editable state is preserved (still dirty) and the error is
   * surfaced as a dismissible banner; an infeasible delta_g banner carries
   * the service's feasibility threshold.
   */
  async submit(): Promise<void> {
    if (!this.state.dirty && this.state.lastResponse) {
      return;
    }
    const ticket = ++this.sequence;
    this.state.inFlight = true;
    try {
      const response = await this.client.allocate(buildAllocateRequest(this.state));
      if (ticket !== this.sequence) return; // superseded by a newer submission
      const comparison = await this.fetchComparison(response);
      if (ticket !== this.sequence) return;
      this.state.lastResponse = response;
      this.state.comparison = comparison;
      this.state.banner = null;
      this.state.dirty = false;
    } catch (error) {
      if (ticket !== this.sequence) return;
      this.state.banner = bannerFrom(error);
    } finally {
      if (ticket === this.sequence) {
        this.state.inFlight = false;
      }
    }
  }

  /**
   * Method-comparison strip: what the same allocation costs under plain
   * summing (and, where applicable, the closed-form bound) versus the method
   * that produced it. Every number comes from a service response.
   */
  private async fetchComparison(
    response: AllocationResponse,
  ): Promise<ComparisonEntry[]> {
    const entries: ComparisonEntry[] = [];
    const requests = comparisonRequests(this.state, response);
    for (const request of requests) {
      try {
        const guarantee = await this.client.compose(request);
        entries.push({ method: request.method, epsilonG: guarantee.epsilon_g });
      } catch {
        // A method that rejects these parameters simply drops off the strip.
      }
    }
    entries.push({ method: response.realized.method, epsilonG: response.realized.epsilon_g });
    return entries;
  }
}

export function buildAllocateRequest(state: WorkspaceState): AllocateRequestBody {
  const body: AllocateRequestBody = {
    statistics: state.statistics.map((s) => ({
      name: s.name,
      weight: s.weight,
      delta: s.delta,
    })),
    epsilon_g: state.global.epsilonG,
    delta_g: state.global.deltaG,
    method: state.method,
  };
  if (state.method === "approx-optimal" || state.method === "auto") {
    body.eta = state.eta;
  }
  return body;
}

/** Compose requests for the strip, echoing the allocated (epsilon, delta). */
export function comparisonRequests(
  state: WorkspaceState,
  response: AllocationResponse,
): ComposeRequestBody[] {
  const params = response.statistics.map((s) => ({
    epsilon: String(s.epsilon),
    delta: String(s.delta),
  }));
  const requests: ComposeRequestBody[] = [
    { params, delta_g: state.global.deltaG, method: "basic" },
  ];
  const allEqual =
    params.length > 1 &&
    params.every((p) => p.epsilon === params[0]?.epsilon && p.delta === params[0]?.delta);
  if (allEqual) {
    requests.push({ params, delta_g: state.global.deltaG, method: "advanced" });
  }
  return requests;
}

function bannerFrom(error: unknown): Banner {
  if (error instanceof ServiceError && error.isInfeasible) {
    return {
      kind: "infeasible",
      message: error.message,
      deltaThreshold: error.body.delta_threshold,
    };
  }
  if (error instanceof ServiceError) {
    return { kind: "error", message: error.message };
  }
  return { kind: "error", message: `request failed: ${String(error)}` };
}
