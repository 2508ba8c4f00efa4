/**
 * Pure HTML rendering of relevance intervals as colored bars.
 *
 * Rendering is a pure function of the exploration state: the same state
 * always yields the same markup, and every displayed number is read
 * verbatim from a server response (data-* attributes carry the original
 * values).  The client performs no relevance computation of its own; the
 * only arithmetic here is scaling values to percentages of the axis.
 */

import type { ConstraintMap, ResultsDocument } from "./api.js";
import { currentStep, type ExplorationState } from "./state.js";

export type RelevanceClass = 0 | 1 | 2;

export const CLASS_META: Record<RelevanceClass, { label: string; color: string; css: string }> = {
  2: { label: "strong", color: "#2563eb", css: "strong" },
  1: { label: "weak", color: "#f59e0b", css: "weak" },
  0: { label: "irrelevant", color: "#9ca3af", css: "irrelevant" },
};

export type ConstraintState = "none" | "fixed" | "range";

export interface FeatureBarView {
  name: string;
  /** Interval endpoints on the selected axis (normalized or raw). */
  lower: number | null;
  upper: number | null;
  cls: RelevanceClass;
  constraint: ConstraintState;
  /** Set when a bound recompute failed for this feature alone. */
  error?: string;
}

export interface RenderOptions {
  /** Show mu-scaled values (default) or raw absolute weights. */
  normalized?: boolean;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Schema check for a results document; returns an error message or null. */
export function validateResults(doc: unknown): string | null {
  if (typeof doc !== "object" || doc === null) return "response is not an object";
  const d = doc as Partial<ResultsDocument>;
  if (d.schema !== 1) return `unsupported schema ${String(d.schema)}`;
  if (typeof d.threshold !== "number") return "missing threshold";
  if (!d.baseline || typeof d.baseline.mu !== "number") return "missing baseline";
  if (!Array.isArray(d.features)) return "missing feature list";
  for (const feature of d.features) {
    if (typeof feature.name !== "string") return "feature without a name";
    if (![0, 1, 2].includes(feature.class)) return `bad class on ${feature.name}`;
  }
  return null;
}

function constraintState(map: ConstraintMap, index: number): ConstraintState {
  const pin = map[String(index)];
  if (!pin) return "none";
  return pin[0] === pin[1] ? "fixed" : "range";
}

/**
 * Bar views for the current cursor position: geometry from the last
 * server response (the constrained recompute when one is selected),
 * class colors always from the session's unconstrained classification.
 */
export function barViews(
  state: ExplorationState,
  options: RenderOptions = {},
): FeatureBarView[] {
  const normalized = options.normalized ?? true;
  const step = currentStep(state);
  const constraints = step?.constraints ?? {};
  return state.snapshot.features.map((feature, index) => {
    const geometry = step ? step.intervals.features[index] : feature;
    const lower = geometry
      ? normalized
        ? geometry.lower_norm
        : geometry.lower
      : null;
    const upper = geometry
      ? normalized
        ? geometry.upper_norm
        : geometry.upper
      : null;
    const view: FeatureBarView = {
      name: feature.name,
      lower,
      upper,
      cls: feature.class,
      constraint: constraintState(constraints, index),
    };
    if (step) {
      const error = step.intervals.features[index]?.error;
      if (error !== undefined) view.error = error;
    }
    return view;
  });
}

function renderBar(view: FeatureBarView, axisMax: number): string {
  const meta = CLASS_META[view.cls];
  if (view.lower === null || view.upper === null) {
    const reason = view.error ? escapeHtml(view.error) : "no value";
    return (
      `<div class="bar failed" data-name="${escapeHtml(view.name)}" ` +
      `title="${reason}"></div>`
    );
  }
  const scale = axisMax > 0 ? axisMax : 1;
  const bottom = (100 * view.lower) / scale;
  const top = (100 * view.upper) / scale;
  const shape = view.lower === view.upper ? "tick" : "span";
  const pin = view.constraint === "none" ? "" : ` pinned-${view.constraint}`;
  return (
    `<div class="bar ${meta.css} ${shape}${pin}" ` +
    `data-name="${escapeHtml(view.name)}" ` +
    `data-class="${view.cls}" ` +
    `data-lower="${view.lower}" data-upper="${view.upper}" ` +
    `style="--bar-bottom:${bottom.toFixed(3)}%;--bar-top:${top.toFixed(3)}%;` +
    `--bar-color:${meta.color}"></div>`
  );
}

function renderLegend(): string {
  const items = ([2, 1, 0] as RelevanceClass[])
    .map((cls) => {
      const meta = CLASS_META[cls];
      return (
        `<li class="legend-item ${meta.css}">` +
        `<span class="swatch" style="background:${meta.color}"></span>` +
        `${meta.label}</li>`
      );
    })
    .join("");
  return `<ul class="legend">${items}</ul>`;
}

function axisMaximum(views: FeatureBarView[], threshold: number): number {
  let max = threshold;
  for (const view of views) {
    if (view.upper !== null && view.upper > max) max = view.upper;
  }
  return max;
}

/**
 * Render a full bar chart for a results document (the unconstrained
 * view): one bar per feature, a legend, and the noise-threshold line.
 * Malformed payloads render as an error banner instead.
 */
export function renderIntervals(
  doc: unknown,
  options: RenderOptions = {},
): string {
  const problem = validateResults(doc);
  if (problem !== null) {
    return `<div class="error-banner" role="alert">${escapeHtml(problem)}</div>`;
  }
  const results = doc as ResultsDocument;
  const normalized = options.normalized ?? true;
  const scale = results.baseline.mu > 0 ? results.baseline.mu : 1;
  const threshold = normalized ? results.threshold / scale : results.threshold;
  const views: FeatureBarView[] = results.features.map((feature) => ({
    name: feature.name,
    lower: normalized ? feature.lower_norm : feature.lower,
    upper: normalized ? feature.upper_norm : feature.upper,
    cls: feature.class,
    constraint: "none",
  }));
  return renderChart(views, threshold);
}

function renderChart(views: FeatureBarView[], threshold: number): string {
  const axisMax = axisMaximum(views, threshold);
  const scale = axisMax > 0 ? axisMax : 1;
  const line =
    `<div class="threshold-line" data-value="${threshold}" ` +
    `style="--line-pos:${((100 * threshold) / scale).toFixed(3)}%"></div>`;
  const bars = views.map((view) => renderBar(view, axisMax)).join("");
  return (
    `<div class="interval-chart">${renderLegend()}` +
    `<div class="plot">${line}${bars}</div></div>`
  );
}

/** Render the chart plus history controls for the current cursor. */
export function renderApp(
  state: ExplorationState,
  options: RenderOptions = {},
): string {
  const normalized = options.normalized ?? true;
  const scale = state.baseline.mu > 0 ? state.baseline.mu : 1;
  const threshold = normalized
    ? state.snapshot.threshold / scale
    : state.snapshot.threshold;
  const chart = renderChart(barViews(state, options), threshold);
  const back = state.cursor >= 0 ? "" : " disabled";
  const forward = state.cursor < state.history.length - 1 ? "" : " disabled";
  const controls =
    `<div class="history-controls">` +
    `<button class="step-back"${back}>back</button>` +
    `<button class="step-forward"${forward}>forward</button>` +
    `<button class="reset">reset</button>` +
    `<span class="position">step ${state.cursor + 1} of ${state.history.length}</span>` +
    `</div>`;
  const baseline =
    `<div class="baseline-summary">` +
    `C=${state.baseline.C} &mu;=${state.baseline.mu} &rho;=${state.baseline.rho}` +
    `</div>`;
  return `<div class="app">${baseline}${controls}${chart}</div>`;
}
