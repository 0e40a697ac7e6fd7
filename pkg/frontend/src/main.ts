/** Browser wiring: connect, paint frames, drive the agent from the
 * keyboard, record goal/step/action transcripts, save, and replay. */

import { GridhouseClient } from "./client.js";
import { CHANNELS, channelToRgba, instanceAt } from "./frames.js";
import type { Channel } from "./frames.js";
import { actionForKey, INTERACTION_KEYS, MOVEMENT_KEYS } from "./keymap.js";
import { replayStructure } from "./replay.js";
import type { SavedStructure } from "./replay.js";
import { frameFresh, initialState, reduce } from "./state.js";
import type { UiState } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const urlInput = el<HTMLInputElement>("url");
const connectBtn = el<HTMLButtonElement>("connect");
const sceneSelect = el<HTMLSelectElement>("scene");
const loadBtn = el<HTMLButtonElement>("load");
const canvas = el<HTMLCanvasElement>("view");
const channelsDiv = el<HTMLDivElement>("channels");
const hud = el<HTMLDivElement>("hud");
const errorLine = el<HTMLDivElement>("error");
const goalInput = el<HTMLInputElement>("goal");
const beginTaskBtn = el<HTMLButtonElement>("begin-task");
const stepInput = el<HTMLInputElement>("step");
const beginStepBtn = el<HTMLButtonElement>("begin-step");
const endStepBtn = el<HTMLButtonElement>("end-step");
const endTaskBtn = el<HTMLButtonElement>("end-task");
const saveBtn = el<HTMLButtonElement>("save");
const replayBtn = el<HTMLButtonElement>("replay");
const transcriptPre = el<HTMLPreElement>("transcript");
const pickLine = el<HTMLDivElement>("pick");

let state: UiState = initialState();
let client: GridhouseClient | null = null;
let channel: Channel = "rgb";
let selectedTarget: string | null = null;
let busy = false; // a replay is driving the session

for (const ch of CHANNELS) {
  const btn = document.createElement("button");
  btn.textContent = ch;
  btn.dataset.channel = ch;
  btn.onclick = () => { channel = ch; paint(); };
  channelsDiv.appendChild(btn);
}

function paint(): void {
  for (const btn of channelsDiv.querySelectorAll("button")) {
    btn.classList.toggle("active", btn.dataset.channel === channel);
  }
  const frame = state.frame;
  if (!frame) return;
  if (canvas.width !== frame.width || canvas.height !== frame.height) {
    canvas.width = frame.width;
    canvas.height = frame.height;
  }
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.putImageData(new ImageData(channelToRgba(frame, channel), frame.width, frame.height), 0, 0);

  const pose = state.pose ? `(${state.pose.cell[0]}, ${state.pose.cell[1]}) h${state.pose.heading} p${state.pose.pitch}` : "—";
  hud.textContent =
    `${state.sceneId ?? "no scene"} | tick ${state.tick}` +
    `${frameFresh(state) ? "" : " (frame stale)"} | pose ${pose}` +
    ` | held ${state.held ?? "nothing"} | ${state.recorderPhase}` +
    (selectedTarget ? ` | target ${selectedTarget}` : "");
  errorLine.textContent = state.lastError ? `${state.lastError.code}: ${state.lastError.message}` : "";
  renderTranscript();
}

function renderTranscript(): void {
  const t = state.transcript;
  const lines: string[] = [];
  if (t.goal) lines.push(`goal: ${t.goal}`);
  t.steps.forEach((step, i) => {
    lines.push(`  ${i + 1}. ${step.description}`);
    for (const a of step.actions) {
      lines.push(`       ${a.kind}${a.target ? `(${a.target})` : ""}${a.failed ? "  ✗" : ""}`);
    }
  });
  if (t.success !== null) lines.push(t.success ? "ended: success" : "ended: failure");
  if (state.savedInstanceId) lines.push(`saved: ${state.savedInstanceId}`);
  transcriptPre.textContent = lines.join("\n") || "(no recording)";
}

function apply(ev: Parameters<typeof reduce>[1]): void {
  state = reduce(state, ev);
  paint();
}

connectBtn.onclick = async () => {
  client?.close();
  state = initialState();
  client = await GridhouseClient.open(() => new WebSocket(urlInput.value) as never, apply);
  const welcome = await client.hello();
  sceneSelect.replaceChildren(...welcome.scenes.map((s) => {
    const opt = document.createElement("option");
    opt.value = s.id;
    opt.textContent = `${s.id} (${s.category} ${s.width}×${s.depth})`;
    return opt;
  }));
  paint();
};

loadBtn.onclick = async () => {
  if (!client) return;
  selectedTarget = null;
  const reply = await client.request({ type: "LoadScene", scene_id: sceneSelect.value });
  if (reply.type === "Error" && state.stale) {
    await client.request({ type: "Observe" }); // recover pose/tick after a discarded recording
  }
};

beginTaskBtn.onclick = () => { void client?.request({ type: "BeginTask", goal: goalInput.value }); };
beginStepBtn.onclick = () => { void client?.request({ type: "BeginStep", description: stepInput.value }); };
endStepBtn.onclick = () => { void client?.request({ type: "EndStep" }); };
endTaskBtn.onclick = () => { void client?.request({ type: "EndTask", success: true }); };
saveBtn.onclick = () => { void client?.request({ type: "Save" }); };

replayBtn.onclick = async () => {
  if (!client || busy) return;
  const t = state.transcript;
  if (!t.goal || t.success === null || !state.sceneId) return;
  const structure: SavedStructure = {
    hts_version: 1,
    goal: t.goal,
    scene_id: state.sceneId,
    annotator_id: "demo-ui",
    success: t.success,
    steps: t.steps.map((s) => ({
      description: s.description,
      actions: s.actions.map((a) => ({
        kind: a.kind,
        ...(a.target === null ? {} : { target: a.target }),
        failed: a.failed,
      })),
    })),
  };
  busy = true;
  try {
    // a fresh load puts the scene back at its start state and clears the
    // transcript; the replay then re-records the same actions
    await client.request({ type: "LoadScene", scene_id: structure.scene_id });
    await replayStructure((msg) => client!.request(msg), structure);
  } finally {
    busy = false;
  }
};

window.addEventListener("keydown", (ev) => {
  if (!client || busy) return;
  if (ev.target instanceof HTMLInputElement) return;
  if (ev.key === "Escape") {
    selectedTarget = null;
    paint();
    return;
  }
  const action = actionForKey(ev.key, state.frame, selectedTarget);
  if (!action) return;
  ev.preventDefault();
  void client.request({ type: "Act", action });
});

canvas.addEventListener("click", (ev) => {
  const frame = state.frame;
  if (!frame) return;
  const rect = canvas.getBoundingClientRect();
  const x = Math.floor(((ev.clientX - rect.left) / rect.width) * frame.width);
  const y = Math.floor(((ev.clientY - rect.top) / rect.height) * frame.height);
  const hit = instanceAt(frame, x, y);
  selectedTarget = hit.instance;
  pickLine.textContent = hit.instance
    ? `selected ${hit.instance} (${hit.objectClass})`
    : "nothing there — selection cleared";
  paint();
});

const moveKeys = Object.entries(MOVEMENT_KEYS).filter(([k]) => k.length === 1);
pickLine.textContent =
  `move: ${moveKeys.map(([k, v]) => `${k}=${v}`).join(" ")} | ` +
  `interact: ${Object.entries(INTERACTION_KEYS).map(([k, v]) => `${k}=${v}`).join(" ")} ` +
  `(targets the crosshair pixel; click to select instead, Esc clears)`;
