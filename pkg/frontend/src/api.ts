/** Service client. The console talks to the decision service and nothing
 * else; tests substitute an in-memory implementation of this interface. */

import {
  AssessResponse,
  CaseForm,
  Decision,
  DecisionListing,
  DecisionRecord,
  PredictionResponse,
  ServiceError,
  ServiceUnavailable,
} from "./types.js";

export interface ServiceClient {
  assess(form: CaseForm): Promise<AssessResponse>;
  predict(features: Record<string, number | string>, caseId?: string): Promise<PredictionResponse>;
  recordDecision(
    predictionId: string,
    decision: Decision,
    rationale: string,
    decider: string,
  ): Promise<DecisionRecord>;
  listDecisions(): Promise<DecisionListing>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class HttpServiceClient implements ServiceClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        headers: { "Content-Type": "application/json" },
        ...init,
      });
    } catch (error) {
      throw new ServiceUnavailable(`decision service unreachable: ${String(error)}`);
    }
    let body: Record<string, unknown> = {};
    try {
      body = (await response.json()) as Record<string, unknown>;
    } catch {
      // non-JSON error bodies fall through to the status check below
    }
    if (!response.ok) {
      const message =
        (body.error as string) ?? (body.detail as string) ?? `HTTP ${response.status}`;
      throw new ServiceError(
        response.status,
        message,
        (body.invariant as string | null) ?? null,
      );
    }
    return body as T;
  }

  assess(form: CaseForm): Promise<AssessResponse> {
    return this.request<AssessResponse>("/assess", {
      method: "POST",
      body: JSON.stringify(form),
    });
  }

  predict(
    features: Record<string, number | string>,
    caseId?: string,
  ): Promise<PredictionResponse> {
    return this.request<PredictionResponse>("/predict", {
      method: "POST",
      body: JSON.stringify({ features, case_id: caseId ?? null }),
    });
  }

  recordDecision(
    predictionId: string,
    decision: Decision,
    rationale: string,
    decider: string,
  ): Promise<DecisionRecord> {
    return this.request<DecisionRecord>("/decisions", {
      method: "POST",
      body: JSON.stringify({
        prediction_id: predictionId,
        decision,
        rationale,
        decider,
      }),
    });
  }

  async listDecisions(): Promise<DecisionListing> {
    return this.request<DecisionListing>("/decisions?page=1&page_size=200");
  }
}
