/** DOM rendering: a pure projection of ConsoleState onto the page. */

import { drawTrace } from "./chart.js";
import {
  ConsoleState,
  remainingBaselineEpochs,
  thresholdLine,
} from "./state.js";

export const INDICATOR_LABELS: Record<string, { text: string; css: string }> = {
  vigilant: { text: "VIGILANT", css: "indicator-vigilant" },
  nonvigilant: { text: "NON-VIGILANT", css: "indicator-nonvigilant" },
  invalid: { text: "INVALID", css: "indicator-invalid" },
  unknown: { text: "—", css: "indicator-unknown" },
};

export function phaseLabel(state: ConsoleState): string {
  if (!state.phase) return "not connected";
  if (state.phase.phase === "calibrating") {
    const left = remainingBaselineEpochs(state);
    const countdown = left !== null ? ` — close your eyes, ${left} epochs remaining` : "";
    return `calibrating${countdown}`;
  }
  return state.phase.phase;
}

export function render(root: ParentNode, state: ConsoleState): void {
  const el = (id: string) => root.querySelector<HTMLElement>(`#${id}`)!;

  el("conn-status").textContent = state.connection;
  el("conn-status").dataset.status = state.connection;
  el("error-banner").textContent = state.error ?? "";
  el("error-banner").style.display = state.error ? "block" : "none";

  const meta = state.meta;
  el("session-line").textContent = meta
    ? `session ${meta.session_id} (${meta.mode})`
    : "no session";
  el("phase-line").textContent = phaseLabel(state);

  const ind = INDICATOR_LABELS[state.indicator];
  const indicator = el("indicator");
  indicator.textContent = ind.text;
  indicator.className = `indicator ${ind.css}`;

  const baseline = state.baseline;
  el("baseline-line").textContent = baseline
    ? `baseline ${baseline.mean_theta_bp.toFixed(3)} uV² -> threshold ${baseline.threshold.toFixed(3)} uV²` +
      (baseline.degenerate ? " (degenerate: zero baseline)" : "")
    : "";

  const canvas = root.querySelector<HTMLCanvasElement>("#trace")!;
  drawTrace(canvas, state.epochs, thresholdLine(state));

  const log = el("tag-log");
  log.innerHTML = "";
  for (const tag of state.tags.slice(-12).reverse()) {
    const li = document.createElement("li");
    const t = tag.t !== null ? `${tag.t.toFixed(2)}s` : "...";
    li.textContent = `${tag.status} @ ${t} [${tag.state}]`;
    li.className = `tag-${tag.state}`;
    log.appendChild(li);
  }

  const ended = el("ended-line");
  ended.textContent = state.ended
    ? `session ended (${state.ended.reason}), ${state.ended.verdict_count} verdicts`
    : "";

  const report = el("report-panel");
  if (state.report) {
    const r = state.report.report;
    const norm = state.report.confusion.normalized;
    const pct = (x: number) => `${(100 * x).toFixed(2)}%`;
    report.style.display = "block";
    report.innerHTML =
      `<h3>Report</h3>` +
      `<p>accuracy ${r.n_correct}/${r.n_epochs} = ${pct(r.accuracy)}</p>` +
      `<table><tr><th>est \\ actual</th><th>closed</th><th>open</th></tr>` +
      `<tr><th>closed</th><td>${pct(norm.closed.closed)}</td><td>${pct(norm.closed.open)}</td></tr>` +
      `<tr><th>open</th><td>${pct(norm.open.closed)}</td><td>${pct(norm.open.open)}</td></tr></table>`;
  } else {
    report.style.display = "none";
    report.innerHTML = "";
  }
}
