/**
 * Browser bootstrap: upload a CSV, render the interval chart, and wire
 * the constraint gestures.  All state transitions go through state.ts
 * and every recompute goes through the request queue, so edits made
 * while a request is pending run afterwards in order.
 */

import {
  describeError,
  RelintClient,
  RequestQueue,
  type ConstraintMap,
} from "./api.js";
import {
  buildRequestBody,
  ConstraintValidationError,
  customRange,
  pinToMax,
  pinToMin,
  type StagedConstraint,
} from "./constraints.js";
import { renderApp } from "./render.js";
import {
  appendStep,
  currentConstraints,
  initialState,
  reset,
  stepBack,
  stepForward,
  type ExplorationState,
} from "./state.js";

declare global {
  interface Window {
    RELINT_API?: string;
  }
}

const apiBase = window.RELINT_API ?? "http://127.0.0.1:8000";
const client = new RelintClient(apiBase);
const queue = new RequestQueue();

let state: ExplorationState | null = null;
let normalized = true;

function root(): HTMLElement {
  const element = document.getElementById("app");
  if (!element) throw new Error("missing #app container");
  return element;
}

function banner(message: string, revertable: boolean): void {
  const note = document.createElement("div");
  note.className = "error-banner";
  note.setAttribute("role", "alert");
  note.textContent = message;
  if (revertable) {
    const revert = document.createElement("button");
    revert.textContent = "revert";
    revert.addEventListener("click", () => draw());
    note.appendChild(revert);
  }
  root().prepend(note);
}

function constraintPanel(current: ExplorationState): HTMLElement {
  const panel = document.createElement("div");
  panel.className = "constraint-panel";
  const budget = (1 + current.delta) * current.baseline.mu;
  current.snapshot.features.forEach((feature, index) => {
    const row = document.createElement("div");
    row.className = "constraint-row";
    const label = document.createElement("span");
    label.textContent = feature.name;
    row.appendChild(label);

    const pinMin = document.createElement("button");
    pinMin.textContent = "pin min";
    pinMin.addEventListener("click", () => submit(pinToMin(index, feature)));
    row.appendChild(pinMin);

    const pinMax = document.createElement("button");
    pinMax.textContent = "pin max";
    pinMax.addEventListener("click", () => submit(pinToMax(index, feature)));
    row.appendChild(pinMax);

    const minInput = document.createElement("input");
    minInput.type = "number";
    minInput.placeholder = "min";
    const maxInput = document.createElement("input");
    maxInput.type = "number";
    maxInput.placeholder = "max";
    const apply = document.createElement("button");
    apply.textContent = "apply range";
    apply.addEventListener("click", () => {
      try {
        submit(
          customRange(index, Number(minInput.value), Number(maxInput.value), budget),
        );
      } catch (error) {
        if (error instanceof ConstraintValidationError) {
          banner(error.message, false);
        } else {
          throw error;
        }
      }
    });
    row.append(minInput, maxInput, apply);
    panel.appendChild(row);
  });
  return panel;
}

function draw(): void {
  if (!state) return;
  const container = root();
  container.innerHTML = renderApp(state, { normalized });
  const app = container.querySelector(".app");
  if (app) app.appendChild(constraintPanel(state));

  container.querySelector(".step-back")?.addEventListener("click", () => {
    if (state) {
      state = stepBack(state);
      draw();
    }
  });
  container.querySelector(".step-forward")?.addEventListener("click", () => {
    if (state) {
      state = stepForward(state);
      draw();
    }
  });
  container.querySelector(".reset")?.addEventListener("click", () => {
    if (state) {
      state = reset(state);
      draw();
    }
  });

  const toggle = document.createElement("button");
  toggle.className = "unit-toggle";
  toggle.textContent = normalized ? "show raw weights" : "show normalized";
  toggle.addEventListener("click", () => {
    normalized = !normalized;
    draw();
  });
  container.querySelector(".history-controls")?.appendChild(toggle);
}

function submit(staged: StagedConstraint): void {
  if (!state) return;
  const current = state;
  const merged: ConstraintMap = {
    ...currentConstraints(current),
    ...buildRequestBody([staged]).constraints,
  };
  void queue
    .enqueue(() => client.applyConstraints(current.sessionId, merged))
    .then((response) => {
      if (!state) return;
      state = appendStep(state, {
        constraints: response.constraints,
        intervals: response.intervals,
      });
      draw();
    })
    .catch((error: unknown) => {
      const { message, revertable } = describeError(error);
      banner(message, revertable);
    });
}

async function onUpload(file: File): Promise<void> {
  try {
    const text = await file.text();
    const created = await client.createSession(text);
    const results = await client.getResults(created.id);
    state = initialState(created.id, created.baseline, results);
    draw();
  } catch (error) {
    const { message, revertable } = describeError(error);
    banner(message, revertable);
  }
}

export function boot(): void {
  const input = document.getElementById("csv-upload");
  if (!(input instanceof HTMLInputElement)) {
    throw new Error("missing #csv-upload input");
  }
  input.addEventListener("change", () => {
    const file = input.files?.[0];
    if (file) void onUpload(file);
  });
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  boot();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", boot);
}
