/** HTML renderers. Pure string builders so the flows are testable without a
 * DOM; main.ts mounts the results. For Handoff cases these views show the
 * decision path, the cluster size, and the prompt — never a recommendation:
 * the only recommendation text anywhere comes from the framework matrix via
 * the assessment view. */

import { complementSentence, labelTitle, pathChain, percent, supportSentence } from "./format.js";
import type {
  AssessResponse,
  DecisionRecord,
  FieldErrors,
  PredictionResponse,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function scaleRow(title: string, selected: number): string {
  const cells = [1, 2, 3, 4, 5, 6]
    .map((value) =>
      value === selected
        ? `<td class="scale selected">${value}</td>`
        : `<td class="scale">${value}</td>`,
    )
    .join("");
  return `<tr><th>${escapeHtml(title)}</th>${cells}</tr>`;
}

export function renderAssessmentView(response: AssessResponse): string {
  const a = response.assessment;
  return [
    `<section class="assessment">`,
    `<p class="flag">New Violent Criminal Activity Flag ${a.nvca_flag ? "Yes" : "No"}</p>`,
    `<table class="scales">`,
    scaleRow("New Criminal Activity Scale", a.scaled_nca),
    scaleRow("Failure to Appear Scale", a.scaled_fta),
    `</table>`,
    `<p class="recommendation">Decision framework response: ${escapeHtml(a.recommendation)}</p>`,
    `<p class="step2">Step 2 exclusion: ${a.step2_applied ? "Yes" : "No"}${
      a.step2_rule ? ` (${escapeHtml(a.step2_rule)})` : ""
    }</p>`,
    `<pre class="report">${escapeHtml(response.report)}</pre>`,
    `</section>`,
  ].join("\n");
}

export function renderFieldErrors(errors: FieldErrors): string {
  const items = Object.entries(errors)
    .map(([field, message]) => `<li data-field="${escapeHtml(field)}">${escapeHtml(message)}</li>`)
    .join("");
  return items ? `<ul class="field-errors">${items}</ul>` : "";
}

export function renderBanner(message: string | null): string {
  if (!message) return "";
  return (
    `<div class="banner retryable">${escapeHtml(message)} ` +
    `<button data-action="retry">Retry</button></div>`
  );
}

export function renderPredictionView(prediction: PredictionResponse): string {
  const lines = [
    `<section class="prediction label-${prediction.label.toLowerCase()}">`,
    `<h2>${labelTitle(prediction.label)}</h2>`,
  ];
  if (prediction.label !== "Handoff" && prediction.error_rate !== undefined) {
    lines.push(
      `<p class="error-rate">Error rate ${percent(prediction.error_rate)} — ` +
        `${escapeHtml(complementSentence(prediction.label, prediction.error_rate))}</p>`,
    );
  }
  lines.push(`<p class="support">${escapeHtml(supportSentence(prediction))}</p>`);
  lines.push(`<p class="path">${escapeHtml(pathChain(prediction.path))}</p>`);
  lines.push(`</section>`);
  return lines.join("\n");
}

export interface HandoffPromptState {
  prediction: PredictionResponse;
  invalidated: boolean;
  error: string | null;
}

export function renderHandoffPrompt(prompt: HandoffPromptState): string {
  const p = prompt.prediction;
  if (prompt.invalidated) {
    return [
      `<section class="handoff-prompt invalidated">`,
      `<p>This prediction is no longer on record.</p>`,
      `<button data-action="re-predict">Run prediction again</button>`,
      `</section>`,
    ].join("\n");
  }
  return [
    `<section class="handoff-prompt">`,
    `<h2>${labelTitle("Handoff")}</h2>`,
    `<p class="explain">The model abstains on this case; the decision is yours.</p>`,
    `<p class="path">${escapeHtml(pathChain(p.path))}</p>`,
    `<p class="support">${escapeHtml(supportSentence(p))}</p>`,
    `<label>Decision`,
    `<select name="decision">`,
    `<option value="release">Release</option>`,
    `<option value="release-with-conditions">Release with conditions</option>`,
    `<option value="detain">Detain</option>`,
    `</select></label>`,
    `<label>Rationale <textarea name="rationale"></textarea></label>`,
    prompt.error ? `<p class="prompt-error">${escapeHtml(prompt.error)}</p>` : "",
    `<button data-action="record-decision">Record decision</button>`,
    `</section>`,
  ]
    .filter(Boolean)
    .join("\n");
}

export function renderDecisionList(records: DecisionRecord[]): string {
  if (!records.length) {
    return `<p class="decisions empty">No decisions recorded yet.</p>`;
  }
  const rows = records
    .map(
      (record) =>
        `<tr data-decision-id="${escapeHtml(record.decision_id)}">` +
        `<td>${escapeHtml(record.decision_id)}</td>` +
        `<td>${escapeHtml(record.prediction_id)}</td>` +
        `<td>${escapeHtml(record.decision)}</td>` +
        `<td>${escapeHtml(record.rationale)}</td>` +
        `<td>${escapeHtml(record.decider)}</td>` +
        `</tr>`,
    )
    .join("");
  return (
    `<table class="decisions"><thead><tr>` +
    `<th>id</th><th>prediction</th><th>decision</th><th>rationale</th><th>decider</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}
