/** Wire types for the decision service (schema pretrial-api/v1). */

export interface FactorResponses {
  age_at_arrest: number;
  current_violent_offense: boolean;
  violent_and_20_or_younger: boolean;
  pending_charge: boolean;
  prior_misdemeanor_conviction: boolean;
  prior_felony_conviction: boolean;
  prior_conviction: boolean;
  prior_violent_convictions: number;
  prior_fta_past_2y: number;
  prior_fta_older_2y: boolean;
  prior_sentence_incarceration: boolean;
}

export interface CaseForm {
  factors: FactorResponses;
  offenses: string[];
  metadata: Record<string, string>;
}

export interface Assessment {
  raw_fta: number;
  raw_nca: number;
  raw_nvca: number;
  scaled_fta: number;
  scaled_nca: number;
  nvca_flag: boolean;
  recommendation: string;
  step2_applied: boolean;
  step2_rule: string | null;
}

export interface AssessResponse {
  schema: string;
  assessment: Assessment;
  report: string;
}

export type PredictionLabel = "HighRisk" | "VeryLowRisk" | "Handoff";

/** Handoff predictions carry no error_rate / k / recommendation fields. */
export interface PredictionResponse {
  schema: string;
  prediction_id: string;
  model_version: string | null;
  label: PredictionLabel;
  leaf_id: number;
  path: string[];
  n: number;
  error_rate?: number;
  k?: number;
}

export type Decision = "release" | "release-with-conditions" | "detain";

export interface DecisionRecord {
  decision_id: string;
  prediction_id: string;
  case_id: string | null;
  model_version: string | null;
  prediction: Record<string, unknown>;
  decision: Decision;
  rationale: string;
  decider: string;
  decided_at: string;
}

export interface DecisionListing {
  schema: string;
  page: number;
  page_size: number;
  total: number;
  decisions: DecisionRecord[];
}

export interface FieldErrors {
  [field: string]: string;
}

/** Service-side validation failure (HTTP 400/404/422). */
export class ServiceError extends Error {
  constructor(
    public status: number,
    message: string,
    public invariant: string | null = null,
  ) {
    super(message);
  }
}

/** Network-level failure: the service is unreachable, retry is sensible. */
export class ServiceUnavailable extends Error {}
