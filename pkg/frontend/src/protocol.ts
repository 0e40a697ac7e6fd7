/** Wire types for the collection protocol (proto_version 1).
 *
 * One JSON object per WebSocket text frame.  Every client message carries a
 * `seq` and gets exactly one reply echoing it; some requests are followed by
 * a pushed `Frame` (marked `push: true`, same seq).  See docs/protocol.md in
 * the repository root.
 */

export const PROTO_VERSION = 1;

export type ActionKind =
  | "MoveAhead"
  | "MoveBack"
  | "RotateLeft"
  | "RotateRight"
  | "LookUp"
  | "LookDown"
  | "PickupObject"
  | "PutObject"
  | "OpenObject"
  | "CloseObject"
  | "ToggleOn"
  | "ToggleOff"
  | "DropHandObject";

/** Interaction kinds whose target id is mandatory. */
export const TARGET_REQUIRED: ReadonlySet<ActionKind> = new Set([
  "PickupObject", "OpenObject", "CloseObject", "ToggleOn", "ToggleOff",
]);

export interface ActionDoc {
  kind: ActionKind;
  target?: string;
}

export type ClientMsg =
  | { type: "Hello"; proto_version: number }
  | { type: "LoadScene"; scene_id: string }
  | { type: "Act"; action: ActionDoc }
  | { type: "Observe" }
  | { type: "BeginTask"; goal: string }
  | { type: "BeginStep"; description: string }
  | { type: "EndStep" }
  | { type: "EndTask"; success: boolean }
  | { type: "Save" };

export type SentMsg = ClientMsg & { seq: number };

export interface SceneInfo {
  id: string;
  category: string;
  width: number;
  depth: number;
}

export interface TaskTemplate {
  goal: string;
  category: string;
  steps: string[];
  goal_spec?: unknown;
}

export interface Pose {
  cell: [number, number];
  heading: number;
  pitch: number;
}

export type RecorderPhase = "Idle" | "InTask" | "InStep";

export interface EventDoc {
  tick: number;
  action: ActionDoc;
  outcome: "Ok" | "Failed";
  reason?: string;
  effects: { object: string; delta: Record<string, unknown> }[];
}

/** Instance seg value -> what it labels ("0" is background). */
export type Palette = Record<string, { instance: string | null; class: string | null }>;
/** Class index -> class name ("0" is background). */
export type ClassPalette = Record<string, string | null>;

export interface WelcomeMsg {
  type: "Welcome";
  seq: number;
  proto_version: number;
  scenes: SceneInfo[];
  task_library: TaskTemplate[];
}

export interface StateMsg {
  type: "State";
  seq: number;
  scene_id: string;
  pose: Pose;
  held: string | null;
  tick: number;
  recorder_phase: RecorderPhase;
}

export interface EventMsg {
  type: "Event";
  seq: number;
  event: EventDoc;
}

export interface FrameMsg {
  type: "Frame";
  push: true;
  seq: number;
  tick: number;
  width: number;
  height: number;
  rgb_ppm: string;
  depth_pgm: string;
  seg_pgm: string;
  class_pgm: string;
  palette: Palette;
  class_palette: ClassPalette;
}

export interface SavedMsg {
  type: "Saved";
  seq: number;
  instance_id: string;
}

export interface ErrorMsg {
  type: "Error";
  seq: number | null;
  code: "NoScene" | "IllegalTransition" | "BadAction" | "ProtocolError";
  message: string;
}

export type ServerMsg =
  | WelcomeMsg
  | StateMsg
  | EventMsg
  | FrameMsg
  | SavedMsg
  | ErrorMsg;

const SERVER_TYPES = new Set([
  "Welcome", "State", "Event", "Frame", "Saved", "Error",
]);

export class ProtocolViolation extends Error {}

/** Decode one incoming text frame; throws ProtocolViolation on anything
 * that is not a known server message. */
export function parseServerMsg(text: string): ServerMsg {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new ProtocolViolation(`not JSON: ${text.slice(0, 80)}`);
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new ProtocolViolation("server message must be a JSON object");
  }
  const type = (doc as { type?: unknown }).type;
  if (typeof type !== "string" || !SERVER_TYPES.has(type)) {
    throw new ProtocolViolation(`unknown server message type ${JSON.stringify(type)}`);
  }
  return doc as ServerMsg;
}

export function isPush(msg: ServerMsg): msg is FrameMsg {
  return msg.type === "Frame" && msg.push === true;
}
