/** Acknowledgment-paced replay of a saved task structure.
 *
 * Each message waits for the previous one's reply — no timers, no frame
 * counting — so playback runs exactly as fast as the server acknowledges.
 * Outcomes are compared against the recorded failed flags: on the scene the
 * structure was recorded in, a faithful environment reproduces every one.
 */

import type { ActionDoc, ClientMsg, ServerMsg } from "./protocol.js";

/** The saved structure document (structure.hts.json). */
export interface SavedStructure {
  hts_version: number;
  goal: string;
  scene_id: string;
  annotator_id: string;
  success: boolean;
  steps: {
    description: string;
    actions: ({ failed: boolean } & ActionDoc)[];
  }[];
  goal_spec?: unknown;
}

export type RequestFn = (msg: ClientMsg) => Promise<ServerMsg>;

export interface ReplayProgress {
  step: number;
  action: number;
  description: string;
  outcome: "Ok" | "Failed";
}

export interface ReplayResult {
  actionsSent: number;
  /** Recorded-vs-replayed outcome disagreements, empty on a faithful run. */
  mismatches: string[];
}

export class ReplayError extends Error {}

async function expect(request: RequestFn, msg: ClientMsg, want: ServerMsg["type"]): Promise<ServerMsg> {
  const reply = await request(msg);
  if (reply.type === "Error") {
    throw new ReplayError(`${msg.type} failed: ${reply.code}: ${reply.message}`);
  }
  if (reply.type !== want) {
    throw new ReplayError(`${msg.type}: expected ${want} reply, got ${reply.type}`);
  }
  return reply;
}

/** Play a structure through an open session (scene already loaded, recorder
 * idle).  Re-records it: BeginTask/BeginStep/Act…/EndStep/EndTask. */
export async function replayStructure(
  request: RequestFn,
  structure: SavedStructure,
  onProgress?: (p: ReplayProgress) => void,
): Promise<ReplayResult> {
  const result: ReplayResult = { actionsSent: 0, mismatches: [] };
  await expect(request, { type: "BeginTask", goal: structure.goal }, "State");
  for (let s = 0; s < structure.steps.length; s++) {
    const step = structure.steps[s]!;
    await expect(request, { type: "BeginStep", description: step.description }, "State");
    for (let a = 0; a < step.actions.length; a++) {
      const recorded = step.actions[a]!;
      const action: ActionDoc = recorded.target === undefined
        ? { kind: recorded.kind }
        : { kind: recorded.kind, target: recorded.target };
      const reply = await expect(request, { type: "Act", action }, "Event");
      if (reply.type !== "Event") throw new ReplayError("unreachable");
      result.actionsSent++;
      const outcome = reply.event.outcome;
      if ((outcome === "Failed") !== recorded.failed) {
        result.mismatches.push(
          `step ${s} action ${a} (${recorded.kind}): recorded ` +
          `${recorded.failed ? "Failed" : "Ok"}, replayed ${outcome}`);
      }
      onProgress?.({ step: s, action: a, description: step.description, outcome });
    }
    await expect(request, { type: "EndStep" }, "State");
  }
  await expect(request, { type: "EndTask", success: structure.success }, "State");
  return result;
}
