import { describe, expect, test } from "vitest";

import type { ActionDoc, ClientMsg, ServerMsg } from "../src/protocol.js";
import { frameFresh, initialState, reduce } from "../src/state.js";
import type { UiEvent, UiState } from "../src/state.js";
import { makeFrameMsg } from "./helpers.js";

let seqCounter = 0;

/** Fold a request and its reply (plus any pushes) through the reducer. */
function exchange(state: UiState, request: ClientMsg, ...replies: ServerMsg[]): UiState {
  const seq = ++seqCounter;
  let next = reduce(state, { dir: "sent", msg: { ...request, seq } } as UiEvent);
  for (const reply of replies) {
    next = reduce(next, { dir: "received", msg: { ...reply, seq } });
  }
  return next;
}

function stateMsg(partial: Partial<Extract<ServerMsg, { type: "State" }>> = {}): ServerMsg {
  return {
    type: "State",
    seq: 0,
    scene_id: "kitchen_01",
    pose: { cell: [1, 1], heading: 0, pitch: 0 },
    held: null,
    tick: 0,
    recorder_phase: "Idle",
    ...partial,
  };
}

function eventMsg(action: ActionDoc, outcome: "Ok" | "Failed", tick: number): ServerMsg {
  return {
    type: "Event",
    seq: 0,
    event: { tick, action, outcome, effects: [], ...(outcome === "Failed" ? { reason: "BlockedMove" } : {}) },
  };
}

test("welcome populates the connection", () => {
  const s = exchange(initialState(), { type: "Hello", proto_version: 1 }, {
    type: "Welcome",
    seq: 0,
    proto_version: 1,
    scenes: [{ id: "kitchen_01", category: "Kitchen", width: 8, depth: 8 }],
    task_library: [{ goal: "make tea", category: "Kitchen", steps: ["boil"] }],
  });
  expect(s.connected).toBe(true);
  expect(s.protoVersion).toBe(1);
  expect(s.scenes.map((x) => x.id)).toEqual(["kitchen_01"]);
  expect(s.taskLibrary[0]?.goal).toBe("make tea");
  expect(s.pending.size).toBe(0);
});

test("a LoadScene reply resets the session view", () => {
  let s = initialState();
  s = { ...s, savedInstanceId: "deadbeef1234", transcript: { goal: "old", steps: [], success: true } };
  s = exchange(s, { type: "LoadScene", scene_id: "kitchen_01" },
    stateMsg({ tick: 0, pose: { cell: [3, 2], heading: 90, pitch: 0 } }));
  expect(s.sceneId).toBe("kitchen_01");
  expect(s.pose?.cell).toEqual([3, 2]);
  expect(s.transcript).toEqual({ goal: null, steps: [], success: null });
  expect(s.savedInstanceId).toBeNull();
});

test("the transcript mirrors a full recording, failed actions included", () => {
  let s = exchange(initialState(), { type: "LoadScene", scene_id: "kitchen_01" }, stateMsg());
  s = exchange(s, { type: "BeginTask", goal: "inspect" }, stateMsg({ recorder_phase: "InTask" }));
  s = exchange(s, { type: "BeginStep", description: "look around" }, stateMsg({ recorder_phase: "InStep" }));
  s = exchange(s, { type: "Act", action: { kind: "RotateRight" } },
    eventMsg({ kind: "RotateRight" }, "Ok", 1));
  s = exchange(s, { type: "Act", action: { kind: "MoveAhead" } },
    eventMsg({ kind: "MoveAhead" }, "Failed", 1));
  s = exchange(s, { type: "Act", action: { kind: "PickupObject", target: "mug_0" } },
    eventMsg({ kind: "PickupObject", target: "mug_0" }, "Ok", 2));
  s = exchange(s, { type: "EndStep" }, stateMsg({ recorder_phase: "InTask", tick: 2 }));
  s = exchange(s, { type: "EndTask", success: true }, stateMsg({ tick: 2 }));

  expect(s.transcript.goal).toBe("inspect");
  expect(s.transcript.success).toBe(true);
  expect(s.transcript.steps).toEqual([
    {
      description: "look around",
      actions: [
        { kind: "RotateRight", target: null, failed: false },
        { kind: "MoveAhead", target: null, failed: true },
        { kind: "PickupObject", target: "mug_0", failed: false },
      ],
    },
  ]);
});

test("ticks advance on Ok events only", () => {
  let s = exchange(initialState(), { type: "LoadScene", scene_id: "kitchen_01" }, stateMsg());
  s = exchange(s, { type: "Act", action: { kind: "MoveAhead" } }, eventMsg({ kind: "MoveAhead" }, "Ok", 1));
  expect(s.tick).toBe(1);
  s = exchange(s, { type: "Act", action: { kind: "MoveAhead" } }, eventMsg({ kind: "MoveAhead" }, "Failed", 1));
  expect(s.tick).toBe(1);
});

test("acts outside an open step are not recorded", () => {
  let s = exchange(initialState(), { type: "LoadScene", scene_id: "kitchen_01" }, stateMsg());
  s = exchange(s, { type: "Act", action: { kind: "RotateLeft" } }, eventMsg({ kind: "RotateLeft" }, "Ok", 1));
  expect(s.transcript.steps).toEqual([]);
  s = exchange(s, { type: "BeginTask", goal: "g" }, stateMsg({ recorder_phase: "InTask", tick: 1 }));
  s = exchange(s, { type: "Act", action: { kind: "RotateLeft" } }, eventMsg({ kind: "RotateLeft" }, "Ok", 2));
  expect(s.transcript.steps).toEqual([]); // InTask but no open step
});

test("frame pushes decode and freshness tracks the tick", () => {
  let s = exchange(initialState(), { type: "LoadScene", scene_id: "kitchen_01" },
    stateMsg(), makeFrameMsg({ tick: 0 }));
  expect(s.frame?.tick).toBe(0);
  expect(frameFresh(s)).toBe(true);

  s = exchange(s, { type: "Act", action: { kind: "MoveAhead" } }, eventMsg({ kind: "MoveAhead" }, "Ok", 1));
  expect(frameFresh(s)).toBe(false); // event applied, push not yet arrived
  s = reduce(s, { dir: "received", msg: makeFrameMsg({ tick: 1 }) });
  expect(frameFresh(s)).toBe(true);
});

test("an error reply surfaces and the next success clears it", () => {
  let s = exchange(initialState(), { type: "Save" },
    { type: "Error", seq: 0, code: "IllegalTransition", message: "nothing to save" });
  expect(s.lastError).toEqual({ code: "IllegalTransition", message: "nothing to save" });
  s = exchange(s, { type: "LoadScene", scene_id: "kitchen_01" }, stateMsg());
  expect(s.lastError).toBeNull();
});

test("LoadScene that discarded a recording clears the transcript and flags stale state", () => {
  let s = exchange(initialState(), { type: "LoadScene", scene_id: "kitchen_01" }, stateMsg());
  s = exchange(s, { type: "BeginTask", goal: "doomed" }, stateMsg({ recorder_phase: "InTask" }));
  s = exchange(s, { type: "LoadScene", scene_id: "bedroom_01" },
    { type: "Error", seq: 0, code: "IllegalTransition", message: "recording discarded" });
  expect(s.transcript).toEqual({ goal: null, steps: [], success: null });
  expect(s.recorderPhase).toBe("Idle");
  expect(s.stale).toBe(true);
  s = exchange(s, { type: "Observe" }, stateMsg({ scene_id: "bedroom_01" }));
  expect(s.stale).toBe(false);
  expect(s.sceneId).toBe("bedroom_01");
});

test("Saved stores the instance id and returns the recorder to idle", () => {
  let s = exchange(initialState(), { type: "LoadScene", scene_id: "kitchen_01" }, stateMsg());
  s = exchange(s, { type: "Save" }, { type: "Saved", seq: 0, instance_id: "3f9f0a1b2c4d" });
  expect(s.savedInstanceId).toBe("3f9f0a1b2c4d");
  expect(s.recorderPhase).toBe("Idle");
});

test("reduce never mutates its input", () => {
  const before = exchange(initialState(), { type: "BeginTask", goal: "g" },
    stateMsg({ recorder_phase: "InTask" }));
  const snapshot = JSON.parse(JSON.stringify({ ...before, pending: [], frame: null }));
  exchange(before, { type: "BeginStep", description: "d" }, stateMsg({ recorder_phase: "InStep" }));
  exchange(before, { type: "Act", action: { kind: "MoveAhead" } }, eventMsg({ kind: "MoveAhead" }, "Ok", 1));
  expect(JSON.parse(JSON.stringify({ ...before, pending: [], frame: null }))).toEqual(snapshot);
});
