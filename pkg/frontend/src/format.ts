/** Display phrasing. Error rates are shown verbatim as the service reported
 * them; the complement sentence restates the same number, never a
 * recomputed one, so a "High Risk" label always arrives with how often
 * similar defendants did NOT offend. */

import type { PredictionLabel, PredictionResponse } from "./types.js";

const OUTCOME_PHRASES: Record<string, { offend: string }> = {
  fta: { offend: "fail to appear" },
  nca: { offend: "commit new criminal activity" },
  nvca: { offend: "commit new violent criminal activity" },
};

export function percent(rate: number): string {
  return `${(rate * 100).toFixed(1)}%`;
}

export function labelTitle(label: PredictionLabel): string {
  switch (label) {
    case "HighRisk":
      return "High Risk";
    case "VeryLowRisk":
      return "Very Low Risk";
    case "Handoff":
      return "Handoff to judge";
  }
}

export function complementSentence(
  label: PredictionLabel,
  errorRate: number,
  outcome: string = "fta",
): string {
  const phrase = OUTCOME_PHRASES[outcome] ?? OUTCOME_PHRASES.fta!;
  const shown = percent(errorRate);
  if (label === "HighRisk") {
    return `${shown} of similar released defendants did NOT ${phrase.offend}.`;
  }
  return `${shown} of similar released defendants DID ${phrase.offend}.`;
}

export function pathChain(path: string[]): string {
  return path.join("  →  ");
}

export function supportSentence(prediction: PredictionResponse): string {
  return `${prediction.n} similar released defendants in this cluster.`;
}
