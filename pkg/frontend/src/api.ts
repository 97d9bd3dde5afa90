/**
 * Typed client for the accountant service. The only numeric work here is
 * passing user strings through verbatim and handing response numbers back.
 */

import type {
  AllocateRequestBody,
  AllocationResponse,
  ComposeRequestBody,
  GuaranteePayload,
  ServiceErrorBody,
} from "./types";

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ServiceErrorBody,
  ) {
    super(describe(status, body));
    this.name = "ServiceError";
  }

  get isInfeasible(): boolean {
    return this.status === 422 && this.body.reason === "infeasible_delta";
  }

  get isTooLarge(): boolean {
    return this.status === 413;
  }
}

function describe(status: number, body: ServiceErrorBody): string {
  if (body.reason === "infeasible_delta") {
    return `delta_g is below the feasibility threshold ${body.delta_threshold}`;
  }
  if (status === 413) {
    return `request too large for this method: ${body.detail ?? body.reason}`;
  }
  return `service error ${status}: ${JSON.stringify(body)}`;
}

export interface ApiClient {
  allocate(body: AllocateRequestBody): Promise<AllocationResponse>;
  compose(body: ComposeRequestBody): Promise<GuaranteePayload>;
}

export function createClient(
  baseUrl: string,
  fetchFn: typeof fetch = fetch,
): ApiClient {
  const post = async <T>(path: string, body: unknown): Promise<T> => {
    const response = await fetchFn(`${baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ServiceError(response.status, payload as ServiceErrorBody);
    }
    return payload as T;
  };
  return {
    allocate: (body) => post<AllocationResponse>("/v1/allocate", body),
    compose: (body) => post<GuaranteePayload>("/v1/compose", body),
  };
}
