/** Browser glue: reads the form, drives ConsoleApp, mounts the view HTML.
 * All behavior worth testing lives in app.ts / views.ts. */

import { HttpServiceClient } from "./api.js";
import { ConsoleApp } from "./app.js";
import { emptyFactors } from "./validate.js";
import type { CaseForm, Decision, FactorResponses } from "./types.js";
import {
  renderAssessmentView,
  renderBanner,
  renderDecisionList,
  renderFieldErrors,
  renderHandoffPrompt,
  renderPredictionView,
} from "./views.js";

const app = new ConsoleApp(new HttpServiceClient(""));

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function readFactors(): FactorResponses {
  const factors = emptyFactors();
  factors.age_at_arrest = Number(el<HTMLInputElement>("age_at_arrest").value);
  factors.prior_violent_convictions = Number(
    el<HTMLInputElement>("prior_violent_convictions").value,
  );
  factors.prior_fta_past_2y = Number(el<HTMLInputElement>("prior_fta_past_2y").value);
  for (const name of [
    "current_violent_offense",
    "violent_and_20_or_younger",
    "pending_charge",
    "prior_misdemeanor_conviction",
    "prior_felony_conviction",
    "prior_fta_older_2y",
    "prior_sentence_incarceration",
  ] as const) {
    factors[name] = el<HTMLInputElement>(name).checked;
  }
  factors.prior_conviction =
    factors.prior_misdemeanor_conviction || factors.prior_felony_conviction;
  return factors;
}

function readForm(): CaseForm {
  const offenses = el<HTMLTextAreaElement>("offenses")
    .value.split("\n")
    .map((line) => line.trim())
    .filter(Boolean);
  return { factors: readFactors(), offenses, metadata: {} };
}

function readFeatures(): Record<string, number | string> {
  const features: Record<string, number | string> = {};
  for (const pair of el<HTMLTextAreaElement>("features").value.split("\n")) {
    const [key, raw] = pair.split("=").map((part) => part.trim());
    if (!key || raw === undefined) continue;
    const numeric = Number(raw);
    features[key] = Number.isNaN(numeric) ? raw : numeric;
  }
  return features;
}

function redraw(): void {
  el("banner").innerHTML = renderBanner(app.state.banner);
  el("form-errors").innerHTML = renderFieldErrors(app.state.fieldErrors);
  el("assessment").innerHTML = app.state.assessment
    ? renderAssessmentView(app.state.assessment)
    : "";
  const prediction = app.state.prediction;
  el("prediction").innerHTML =
    prediction && prediction.label !== "Handoff" ? renderPredictionView(prediction) : "";
  el("prompt").innerHTML = app.state.prompt ? renderHandoffPrompt(app.state.prompt) : "";
  el("confirmation").textContent = app.state.confirmation ?? "";
  el("decisions").innerHTML = renderDecisionList(app.state.decisions);
  const promptNode = el("prompt");
  const recordButton = promptNode.querySelector<HTMLButtonElement>(
    'button[data-action="record-decision"]',
  );
  if (recordButton) {
    recordButton.addEventListener("click", async () => {
      const decision = promptNode.querySelector<HTMLSelectElement>(
        'select[name="decision"]',
      )!.value as Decision;
      const rationale = promptNode.querySelector<HTMLTextAreaElement>(
        'textarea[name="rationale"]',
      )!.value;
      await app.recordDecision(decision, rationale);
      redraw();
    });
  }
  const rePredict = promptNode.querySelector<HTMLButtonElement>(
    'button[data-action="re-predict"]',
  );
  if (rePredict) {
    rePredict.addEventListener("click", async () => {
      await app.rePredict(readFeatures());
      redraw();
    });
  }
}

async function start(): Promise<void> {
  el("assess-button").addEventListener("click", async () => {
    await app.submitAssessment(readForm());
    redraw();
  });
  el("predict-button").addEventListener("click", async () => {
    await app.submitPrediction(readFeatures());
    redraw();
  });
  el("reload-button").addEventListener("click", async () => {
    await app.reload();
    redraw();
  });
  await app.reload().catch(() => {
    app.state.banner = "The decision service is unreachable.";
  });
  redraw();
}

start();
