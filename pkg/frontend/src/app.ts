/** Console state machine. All state round-trips through the service: the
 * decision list is whatever GET /decisions returns, and a reload rebuilds it
 * from that endpoint alone. */

import type { ServiceClient } from "./api.js";
import { validateFactors } from "./validate.js";
import type { HandoffPromptState } from "./views.js";
import {
  AssessResponse,
  CaseForm,
  Decision,
  DecisionRecord,
  FieldErrors,
  PredictionResponse,
  ServiceError,
  ServiceUnavailable,
} from "./types.js";

export interface AppState {
  assessment: AssessResponse | null;
  fieldErrors: FieldErrors;
  banner: string | null;
  prediction: PredictionResponse | null;
  prompt: HandoffPromptState | null;
  decisions: DecisionRecord[];
  confirmation: string | null;
}

export class ConsoleApp {
  state: AppState = {
    assessment: null,
    fieldErrors: {},
    banner: null,
    prediction: null,
    prompt: null,
    decisions: [],
    confirmation: null,
  };

  constructor(
    private client: ServiceClient,
    private decider: string = "console-operator",
  ) {}

  /** Validates locally first: an invalid form never reaches the service. */
  async submitAssessment(form: CaseForm): Promise<void> {
    const errors = validateFactors(form.factors);
    if (Object.keys(errors).length > 0) {
      this.state.fieldErrors = errors;
      this.state.assessment = null;
      return;
    }
    this.state.fieldErrors = {};
    try {
      this.state.assessment = await this.client.assess(form);
      this.state.banner = null;
    } catch (error) {
      if (error instanceof ServiceError) {
        const field = error.invariant ?? "form";
        this.state.fieldErrors = { [field]: error.message };
      } else if (error instanceof ServiceUnavailable) {
        this.state.banner = "The decision service is unreachable.";
      } else {
        throw error;
      }
    }
  }

  /** Labeled predictions render directly; a Handoff opens the prompt. */
  async submitPrediction(
    features: Record<string, number | string>,
    caseId?: string,
  ): Promise<void> {
    this.state.prompt = null;
    this.state.prediction = null;
    this.state.confirmation = null;
    try {
      const prediction = await this.client.predict(features, caseId);
      this.state.prediction = prediction;
      if (prediction.label === "Handoff") {
        this.state.prompt = { prediction, invalidated: false, error: null };
      }
      this.state.banner = null;
    } catch (error) {
      if (error instanceof ServiceUnavailable) {
        this.state.banner = "The decision service is unreachable.";
      } else if (error instanceof ServiceError) {
        this.state.fieldErrors = { features: error.message };
      } else {
        throw error;
      }
    }
  }

  /** Detain demands a rationale before anything leaves the client. The new
   * record is shown optimistically and rolled back if the POST fails; a 404
   * (stale prediction) invalidates the prompt and offers re-predict. */
  async recordDecision(decision: Decision, rationale: string): Promise<boolean> {
    const prompt = this.state.prompt;
    if (!prompt || prompt.invalidated) {
      return false;
    }
    if (decision === "detain" && rationale.trim() === "") {
      prompt.error = "A rationale is required to detain.";
      return false;
    }
    prompt.error = null;
    const provisional: DecisionRecord = {
      decision_id: "(saving...)",
      prediction_id: prompt.prediction.prediction_id,
      case_id: null,
      model_version: prompt.prediction.model_version,
      prediction: { label: prompt.prediction.label },
      decision,
      rationale,
      decider: this.decider,
      decided_at: "",
    };
    this.state.decisions = [...this.state.decisions, provisional];
    try {
      const record = await this.client.recordDecision(
        prompt.prediction.prediction_id,
        decision,
        rationale,
        this.decider,
      );
      this.state.decisions = this.state.decisions.map((entry) =>
        entry === provisional ? record : entry,
      );
      this.state.confirmation = `Recorded ${record.decision_id}.`;
      this.state.prompt = null;
      return true;
    } catch (error) {
      this.state.decisions = this.state.decisions.filter((entry) => entry !== provisional);
      if (error instanceof ServiceError && error.status === 404) {
        prompt.invalidated = true;
        prompt.error = "The prediction is stale; run it again.";
      } else if (error instanceof ServiceUnavailable) {
        this.state.banner = "The decision service is unreachable.";
      } else if (error instanceof ServiceError) {
        prompt.error = error.message;
      } else {
        throw error;
      }
      return false;
    }
  }

  /** Rebuilds the decision list from the service; nothing client-side
   * survives a reload. */
  async reload(): Promise<void> {
    const listing = await this.client.listDecisions();
    this.state.decisions = listing.decisions;
  }

  async rePredict(features: Record<string, number | string>): Promise<void> {
    await this.submitPrediction(features);
  }
}
