/** Client-side session state, folded from the message stream.
 *
 * The reducer sees every outgoing request and every incoming document, in
 * order.  Replies are matched to their request through the seq echo, which
 * is what lets a bare `State` reply mean "the step is now open" after a
 * BeginStep but nothing at all after an Observe.  The transcript mirrors
 * the server-side recorder: it only accumulates actions while a step is
 * open, failed ones included, so the structure the server saves is exactly
 * what the transcript shows.
 */

import { decodeFrame } from "./frames.js";
import type { DecodedFrame } from "./frames.js";
import type {
  ActionKind,
  ClientMsg,
  RecorderPhase,
  SceneInfo,
  SentMsg,
  ServerMsg,
  StateMsg,
  TaskTemplate,
} from "./protocol.js";

export type UiEvent =
  | { dir: "sent"; msg: SentMsg }
  | { dir: "received"; msg: ServerMsg };

export interface TranscriptAction {
  kind: ActionKind;
  target: string | null;
  failed: boolean;
}

export interface TranscriptStep {
  description: string;
  actions: TranscriptAction[];
}

export interface Transcript {
  goal: string | null;
  steps: TranscriptStep[];
  success: boolean | null;
}

export function emptyTranscript(): Transcript {
  return { goal: null, steps: [], success: null };
}

export interface UiState {
  connected: boolean;
  protoVersion: number | null;
  scenes: SceneInfo[];
  taskLibrary: TaskTemplate[];
  sceneId: string | null;
  pose: { cell: [number, number]; heading: number; pitch: number } | null;
  held: string | null;
  tick: number;
  recorderPhase: RecorderPhase;
  frame: DecodedFrame | null;
  transcript: Transcript;
  savedInstanceId: string | null;
  lastError: { code: string; message: string } | null;
  /** Requests awaiting their reply, by seq. */
  pending: Map<number, SentMsg>;
  /** Set when an Error reply left pose/tick unknown (a LoadScene that
   * discarded a recording); the UI should follow up with Observe. */
  stale: boolean;
}

export function initialState(): UiState {
  return {
    connected: false,
    protoVersion: null,
    scenes: [],
    taskLibrary: [],
    sceneId: null,
    pose: null,
    held: null,
    tick: 0,
    recorderPhase: "Idle",
    frame: null,
    transcript: emptyTranscript(),
    savedInstanceId: null,
    lastError: null,
    pending: new Map(),
    stale: false,
  };
}

/** True when the painted frame shows the tick the session is at. */
export function frameFresh(state: UiState): boolean {
  return state.frame !== null && state.frame.tick === state.tick;
}

function applyStateReply(next: UiState, msg: StateMsg, request: ClientMsg | undefined): void {
  next.sceneId = msg.scene_id;
  next.pose = { cell: [msg.pose.cell[0], msg.pose.cell[1]], heading: msg.pose.heading, pitch: msg.pose.pitch };
  next.held = msg.held;
  next.tick = msg.tick;
  next.recorderPhase = msg.recorder_phase;
  next.stale = false;
  switch (request?.type) {
    case "LoadScene":
      next.transcript = emptyTranscript();
      next.savedInstanceId = null;
      break;
    case "BeginTask":
      next.transcript = { goal: request.goal, steps: [], success: null };
      next.savedInstanceId = null;
      break;
    case "BeginStep":
      next.transcript = {
        ...next.transcript,
        steps: [...next.transcript.steps, { description: request.description, actions: [] }],
      };
      break;
    case "EndTask":
      next.transcript = { ...next.transcript, success: request.success };
      break;
    default:
      break; // Observe / EndStep change nothing beyond the snapshot above
  }
}

export function reduce(state: UiState, ev: UiEvent): UiState {
  const next: UiState = { ...state, pending: new Map(state.pending) };

  if (ev.dir === "sent") {
    next.pending.set(ev.msg.seq, ev.msg);
    return next;
  }

  const msg = ev.msg;
  if (msg.type === "Frame") {
    next.frame = decodeFrame(msg);
    return next;
  }

  const request = msg.seq === null ? undefined : next.pending.get(msg.seq);
  if (msg.seq !== null) next.pending.delete(msg.seq);

  switch (msg.type) {
    case "Welcome":
      next.connected = true;
      next.protoVersion = msg.proto_version;
      next.scenes = msg.scenes;
      next.taskLibrary = msg.task_library;
      next.lastError = null;
      break;
    case "State":
      applyStateReply(next, msg, request);
      next.lastError = null;
      break;
    case "Event": {
      const e = msg.event;
      if (e.outcome === "Ok") next.tick = e.tick; // failures do not advance time
      if (next.recorderPhase === "InStep") {
        const steps = next.transcript.steps.slice();
        const last = steps[steps.length - 1];
        if (last) {
          steps[steps.length - 1] = {
            ...last,
            actions: [
              ...last.actions,
              {
                kind: e.action.kind,
                target: e.action.target ?? null,
                failed: e.outcome === "Failed",
              },
            ],
          };
          next.transcript = { ...next.transcript, steps };
        }
      }
      next.lastError = null;
      break;
    }
    case "Saved":
      next.savedInstanceId = msg.instance_id;
      next.recorderPhase = "Idle";
      next.lastError = null;
      break;
    case "Error":
      next.lastError = { code: msg.code, message: msg.message };
      if (request?.type === "LoadScene" && msg.code === "IllegalTransition") {
        // the scene loaded anyway and the recording was discarded, but no
        // State reply came with it: pose/tick are unknown until an Observe
        next.transcript = emptyTranscript();
        next.recorderPhase = "Idle";
        next.stale = true;
      }
      break;
    default:
      break;
  }
  return next;
}
