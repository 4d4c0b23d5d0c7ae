// Page wiring: connect to the session service, render telemetry, and map the
// controls one-to-one onto wire-protocol commands.

import { SessionClient } from "./client";
import { ConsoleState } from "./console-state";
import { TraceChart } from "./chart";
import { Ack, TelemetryFrame } from "./protocol";

function endpointFromPage(): string {
  const params = new URLSearchParams(window.location.search);
  const explicit = params.get("endpoint");
  if (explicit) return explicit;
  const proto = window.location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${window.location.host}/ws`;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const state = new ConsoleState(30);
const chart = new TraceChart(el<HTMLCanvasElement>("trace"));
const modeBadge = el<HTMLSpanElement>("mode-badge");
const freqBadge = el<HTMLSpanElement>("freq-badge");
const statusBadge = el<HTMLSpanElement>("status-badge");
const rateBadge = el<HTMLSpanElement>("rate-badge");
const feed = el<HTMLUListElement>("event-feed");
const freqSelect = el<HTMLSelectElement>("freq-select");

for (let hz = 1; hz <= 40; hz++) {
  const opt = document.createElement("option");
  opt.value = String(hz);
  opt.textContent = `${hz} Hz`;
  if (hz === 6) opt.selected = true;
  freqSelect.appendChild(opt);
}

function note(text: string): void {
  const li = document.createElement("li");
  li.textContent = text;
  feed.prepend(li);
  while (feed.children.length > 50) feed.removeChild(feed.lastChild as Node);
}

function onFrame(frame: TelemetryFrame): void {
  if (!state.ingest(frame)) return;
  modeBadge.textContent = frame.mode;
  modeBadge.className = `badge mode-${frame.mode.toLowerCase()}`;
  for (const ev of frame.events) {
    note(`t=${ev.t_sim.toFixed(2)}s  ${ev.ev}`);
  }
  const rate = state.edgeRate(4);
  rateBadge.textContent = rate === null ? "- Hz" : `${rate.toFixed(1)} Hz`;
}

const client = new SessionClient(endpointFromPage(), {
  onFrame,
  onStatus: (status) => {
    state.status = status;
    statusBadge.textContent = status;
    statusBadge.className = `badge status-${status}`;
  },
  onSessionReset: () => {
    state.reset();
    note("connected: telemetry restarted");
  },
  onServerClose: (reason) => note(`server closed stream: ${reason}`),
});

function reportAck(label: string, ack: Ack): void {
  if (ack.ok) {
    note(`${label}: applied at seq ${ack.applied_at_seq}`);
  } else {
    note(`${label}: FAILED (${ack.err})`);
  }
}

el<HTMLButtonElement>("btn-trigger").addEventListener("click", async () => {
  reportAck("trigger", await client.dispatch("trigger"));
});
el<HTMLButtonElement>("btn-reset").addEventListener("click", async () => {
  reportAck("reset", await client.dispatch("reset"));
});
freqSelect.addEventListener("change", async () => {
  const hz = Number(freqSelect.value);
  const ack = await client.dispatch("set_frequency", hz);
  reportAck(`set ${hz} Hz`, ack);
  if (ack.ok) freqBadge.textContent = `${hz} Hz`;
});

function redraw(): void {
  const frames = state.frames.toArray();
  chart.render(
    frames.map((f) => f.raw),
    frames.map((f) => f.recon),
  );
  requestAnimationFrame(redraw);
}

client.connect();
requestAnimationFrame(redraw);
