// Wire protocol spoken by the session service (JSON, one object per message).

export type ChipMode = "CHAOTIC" | "ENTRAINED" | "RESET";

export interface FrameEvent {
  ev: string;
  t_sim: number;
}

export interface TelemetryFrame {
  type: "frame";
  seq: number;
  t_sim: number;
  mode: ChipMode;
  raw: number;
  out: 0 | 1;
  recon: number;
  events: FrameEvent[];
}

export type CommandKind = "trigger" | "reset" | "set_frequency" | "pause" | "resume";

export interface Command {
  type: "cmd";
  id: string;
  kind: CommandKind;
  value?: number;
}

export interface Ack {
  type: "ack";
  id: string;
  ok: boolean;
  applied_at_seq?: number;
  err?: string;
}

export interface CloseMessage {
  type: "close";
  reason: string;
}

export type ServerMessage = TelemetryFrame | Ack | CloseMessage;

const MODES = new Set(["CHAOTIC", "ENTRAINED", "RESET"]);

export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const msg = raw as Record<string, unknown>;
  switch (msg.type) {
    case "frame": {
      if (
        typeof msg.seq !== "number" ||
        typeof msg.t_sim !== "number" ||
        !MODES.has(msg.mode as string) ||
        typeof msg.raw !== "number" ||
        (msg.out !== 0 && msg.out !== 1) ||
        typeof msg.recon !== "number" ||
        !Array.isArray(msg.events)
      ) {
        return null;
      }
      return msg as unknown as TelemetryFrame;
    }
    case "ack": {
      if (typeof msg.id !== "string" || typeof msg.ok !== "boolean") return null;
      return msg as unknown as Ack;
    }
    case "close": {
      if (typeof msg.reason !== "string") return null;
      return msg as unknown as CloseMessage;
    }
    default:
      return null;
  }
}

let counter = 0;

export function makeCommand(kind: CommandKind, value?: number): Command {
  counter += 1;
  const cmd: Command = { type: "cmd", id: `ui-${Date.now().toString(36)}-${counter}`, kind };
  if (value !== undefined) cmd.value = value;
  return cmd;
}
