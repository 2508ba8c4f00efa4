/**
 * Constraint gestures: pin a feature to the bottom or top of its interval
 * or stage a custom range, validated client-side before submission.
 *
 * Pin values are taken verbatim from the last server response (absolute
 * units, as the constraints endpoint expects); the client never derives
 * new bound values of its own.
 */

import type { ConstraintMap, FeatureResult } from "./api.js";

export type ConstraintMode = "pin-to-min" | "pin-to-max" | "custom";

export interface StagedConstraint {
  featureIndex: number;
  kMin: number;
  kMax: number;
  mode: ConstraintMode;
}

export class ConstraintValidationError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConstraintValidationError";
  }
}

function requireBounds(feature: FeatureResult, index: number): [number, number] {
  if (feature.lower === null || feature.upper === null) {
    throw new ConstraintValidationError(
      `feature ${index} has no computed bounds to pin to`,
    );
  }
  return [feature.lower, feature.upper];
}

/** Fix the feature's weight at the bottom of its relevance interval. */
export function pinToMin(index: number, feature: FeatureResult): StagedConstraint {
  const [lower] = requireBounds(feature, index);
  return { featureIndex: index, kMin: lower, kMax: lower, mode: "pin-to-min" };
}

/** Fix the feature's weight at the top of its relevance interval. */
export function pinToMax(index: number, feature: FeatureResult): StagedConstraint {
  const [, upper] = requireBounds(feature, index);
  return { featureIndex: index, kMin: upper, kMax: upper, mode: "pin-to-max" };
}

/**
 * Stage a custom [min, max] range.  ``budget`` is the session's weight
 * budget (1 + delta) * mu — no single weight can exceed it, so larger
 * requests are rejected before they reach the server.
 */
export function customRange(
  index: number,
  min: number,
  max: number,
  budget: number,
): StagedConstraint {
  if (!Number.isFinite(min) || !Number.isFinite(max)) {
    throw new ConstraintValidationError("range bounds must be finite numbers");
  }
  if (min < 0) {
    throw new ConstraintValidationError("range minimum cannot be negative");
  }
  if (min > max) {
    throw new ConstraintValidationError("range minimum exceeds its maximum");
  }
  if (max > budget) {
    throw new ConstraintValidationError(
      `range maximum ${max} exceeds the weight budget ${budget}`,
    );
  }
  return { featureIndex: index, kMin: min, kMax: max, mode: "custom" };
}

/** The exact JSON object sent as the PUT /constraints body. */
export function buildRequestBody(staged: readonly StagedConstraint[]): {
  constraints: ConstraintMap;
} {
  const constraints: ConstraintMap = {};
  for (const entry of staged) {
    constraints[String(entry.featureIndex)] = [entry.kMin, entry.kMax];
  }
  return { constraints };
}
