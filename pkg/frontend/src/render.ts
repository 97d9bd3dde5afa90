/**
 * Pure view construction: WorkspaceState -> display strings.
 *
 * Every epsilon/delta shown to the user is a 12-significant-digit truncation
 * of a number that arrived in a service response; nothing is computed here.
 * The DOM writer lives in main.ts and only copies these strings.
 */

import { formatSig12 } from "./format";
import type { WorkspaceState } from "./types";

export interface AllocationRow {
  name: string;
  epsilonText: string;
  deltaText: string;
}

export interface AllocationView {
  rows: AllocationRow[];
  realized: { epsilonText: string; deltaText: string; method: string } | null;
  comparison: { method: string; epsilonText: string }[];
  banner: { kind: string; message: string; thresholdText: string | null } | null;
  inFlight: boolean;
  dirty: boolean;
}

export function renderAllocation(state: WorkspaceState): AllocationView {
  const response = state.lastResponse;
  return {
    rows: response
      ? response.statistics.map((s) => ({
          name: s.name,
          epsilonText: formatSig12(s.epsilon),
          deltaText: formatSig12(s.delta),
        }))
      : [],
    realized: response
      ? {
          epsilonText: formatSig12(response.realized.epsilon_g),
          deltaText: formatSig12(response.realized.delta_g),
          method: response.realized.method,
        }
      : null,
    comparison: state.comparison.map((entry) => ({
      method: entry.method,
      epsilonText: formatSig12(entry.epsilonG),
    })),
    banner: state.banner
      ? {
          kind: state.banner.kind,
          message: state.banner.message,
          thresholdText:
            state.banner.deltaThreshold !== undefined
              ? formatSig12(state.banner.deltaThreshold)
              : null,
        }
      : null,
    inFlight: state.inFlight,
    dirty: state.dirty,
  };
}
