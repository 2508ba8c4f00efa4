/**
 * Exploration state: the unconstrained snapshot plus an append-only
 * history of (constraints, recompute result) steps with a cursor.
 *
 * The cursor value -1 selects the unconstrained snapshot, so "reset" is a
 * pure cursor move and never re-contacts the server.  Editing from a past
 * step branches: forward steps are discarded before the new step is
 * appended.  All transitions return fresh state objects; existing history
 * entries are never mutated.
 */

import type { BaselineSummary, ConstrainedResponse, ConstraintMap, ResultsDocument } from "./api.js";

export interface Step {
  constraints: ConstraintMap;
  intervals: ConstrainedResponse["intervals"];
}

export interface ExplorationState {
  sessionId: string;
  baseline: BaselineSummary;
  /** Budget-relaxation factor the session was created with. */
  delta: number;
  /** Unconstrained results; restored by reset without a round-trip. */
  snapshot: ResultsDocument;
  history: readonly Step[];
  /** -1 = unconstrained snapshot, otherwise an index into history. */
  cursor: number;
}

export const DEFAULT_DELTA = 0.001;

export function initialState(
  sessionId: string,
  baseline: BaselineSummary,
  snapshot: ResultsDocument,
  delta: number = DEFAULT_DELTA,
): ExplorationState {
  return { sessionId, baseline, delta, snapshot, history: [], cursor: -1 };
}

/** Append a completed recompute step, discarding any forward branch. */
export function appendStep(state: ExplorationState, step: Step): ExplorationState {
  const kept = state.history.slice(0, state.cursor + 1);
  const history = [...kept, step];
  return { ...state, history, cursor: history.length - 1 };
}

export function canStepBack(state: ExplorationState): boolean {
  return state.cursor >= 0;
}

export function canStepForward(state: ExplorationState): boolean {
  return state.cursor < state.history.length - 1;
}

export function stepBack(state: ExplorationState): ExplorationState {
  if (!canStepBack(state)) return state;
  return { ...state, cursor: state.cursor - 1 };
}

export function stepForward(state: ExplorationState): ExplorationState {
  if (!canStepForward(state)) return state;
  return { ...state, cursor: state.cursor + 1 };
}

/** Jump back to the unconstrained snapshot; history stays intact. */
export function reset(state: ExplorationState): ExplorationState {
  return { ...state, cursor: -1 };
}

/** The step the cursor points at, or null for the unconstrained view. */
export function currentStep(state: ExplorationState): Step | null {
  return state.cursor >= 0 ? (state.history[state.cursor] ?? null) : null;
}

/** Constraints in effect at the cursor (empty for the snapshot view). */
export function currentConstraints(state: ExplorationState): ConstraintMap {
  return currentStep(state)?.constraints ?? {};
}
