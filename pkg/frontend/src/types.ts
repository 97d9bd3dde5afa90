/**
 * Shared types for the budget explorer.
 *
 * All user-entered numbers travel as decimal strings, verbatim, so the
 * service can parse them to exact rationals; every number we display comes
 * back out of a service response. No privacy arithmetic happens client-side.
 */

/** One editable statistic row. */
export interface StatisticDraft {
  name: string;
  weight: string;
  delta: string;
}

/** The editable global budget. */
export interface GlobalBudgetDraft {
  epsilonG: string;
  deltaG: string;
}

/** Service payload: one allocated statistic. */
export interface AllocatedStatistic {
  name: string;
  epsilon: number;
  delta: number;
}

/** Service payload: a computed guarantee. */
export interface GuaranteePayload {
  epsilon_g: number;
  delta_g: number;
  method: string;
  bracket: { lower: number; upper: number } | null;
  vacuous: boolean;
  precision_bits: number;
}

/** Service payload: POST /v1/allocate response body. */
export interface AllocationResponse {
  statistics: AllocatedStatistic[];
  scale: number;
  realized: GuaranteePayload;
  requested: { epsilon_g: number; delta_g: number };
  method: string;
}

/** Error body the service attaches to 4xx responses. */
export interface ServiceErrorBody {
  reason?: string;
  error?: string;
  delta_threshold?: number;
  detail?: unknown;
}

/** One line of the method-comparison strip. */
export interface ComparisonEntry {
  method: string;
  epsilonG: number;
}

export interface Banner {
  kind: "infeasible" | "error";
  message: string;
  deltaThreshold?: number;
}

export interface WorkspaceState {
  statistics: StatisticDraft[];
  global: GlobalBudgetDraft;
  method: string;
  eta: string;
  lastResponse: AllocationResponse | null;
  comparison: ComparisonEntry[];
  banner: Banner | null;
  dirty: boolean;
  inFlight: boolean;
}

export interface AllocateRequestBody {
  statistics: { name: string; weight: string; delta: string }[];
  epsilon_g: string;
  delta_g: string;
  method: string;
  eta?: string;
}

export interface ComposeRequestBody {
  params: { epsilon: string; delta: string }[];
  delta_g: string;
  method: string;
  eta?: string;
  delta_prime?: string;
}
