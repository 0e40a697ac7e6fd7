/** Keyboard driving: one key per action, with interaction targets resolved
 * from the instance channel under the crosshair (the frame's center pixel)
 * unless the user has clicked a pixel to select something explicitly. */

import { instanceAt } from "./frames.js";
import type { DecodedFrame } from "./frames.js";
import { TARGET_REQUIRED } from "./protocol.js";
import type { ActionDoc, ActionKind } from "./protocol.js";

export const MOVEMENT_KEYS: Readonly<Record<string, ActionKind>> = {
  w: "MoveAhead",
  ArrowUp: "MoveAhead",
  s: "MoveBack",
  ArrowDown: "MoveBack",
  a: "RotateLeft",
  ArrowLeft: "RotateLeft",
  d: "RotateRight",
  ArrowRight: "RotateRight",
  q: "LookUp",
  e: "LookDown",
};

export const INTERACTION_KEYS: Readonly<Record<string, ActionKind>> = {
  p: "PickupObject",
  u: "PutObject",
  o: "OpenObject",
  c: "CloseObject",
  t: "ToggleOn",
  y: "ToggleOff",
  x: "DropHandObject",
};

/** The instance id under the crosshair, if the center pixel labels one. */
export function centerTarget(frame: DecodedFrame): string | null {
  return targetAt(frame, Math.floor(frame.width / 2), Math.floor(frame.height / 2));
}

/** The instance id at raster coordinates (x, y), or null for background. */
export function targetAt(frame: DecodedFrame, x: number, y: number): string | null {
  return instanceAt(frame, x, y).instance;
}

/** Build the action a key asks for.
 *
 * Targets come from `selected` (a clicked pixel) or else the crosshair.
 * Returns null when the key is unbound, or when the kind cannot be formed:
 * target-required kinds with nothing under the crosshair.  PutObject with
 * no target is legal (placing on the floor), as is DropHandObject.
 */
export function actionForKey(
  key: string,
  frame: DecodedFrame | null,
  selected: string | null = null,
): ActionDoc | null {
  const movement = MOVEMENT_KEYS[key];
  if (movement) return { kind: movement };
  const kind = INTERACTION_KEYS[key];
  if (!kind) return null;
  if (kind === "DropHandObject") return { kind };
  const target = selected ?? (frame ? centerTarget(frame) : null);
  if (target === null) {
    return TARGET_REQUIRED.has(kind) ? null : { kind };
  }
  return { kind, target };
}
