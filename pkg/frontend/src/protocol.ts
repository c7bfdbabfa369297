// Wire protocol: line-delimited JSON over a persistent TCP connection.

export type Bit = 0 | 1;

export interface FeedbackEntry {
  lab: string;
  count: number;
}

export type ClientMessage =
  | { type: "hello"; user: string }
  | { type: "bits"; user: string; seq: number; payload: string; ts?: number }
  | { type: "predict?"; user: string }
  | { type: "mission_done"; user: string; n: number };

export type ServerMessage =
  | { type: "prediction"; bit: Bit }
  | { type: "feedback"; per_lab: FeedbackEntry[] }
  | { type: "stream"; interval_id: number; payload: string; archived_from: number | null }
  | { type: "ack"; lab: string }
  | { type: "error"; error: string };

export function encodeLine(message: ClientMessage): string {
  return JSON.stringify(message) + "\n";
}

export function decodeLine(line: string): ServerMessage {
  const parsed = JSON.parse(line) as ServerMessage;
  if (typeof parsed !== "object" || parsed === null || !("type" in parsed)) {
    throw new Error(`malformed server message: ${line}`);
  }
  return parsed;
}

/** Reassembles newline-delimited frames from arbitrary chunk boundaries. */
export class LineSplitter {
  private buffer = "";

  push(chunk: string): string[] {
    this.buffer += chunk;
    const lines = this.buffer.split("\n");
    this.buffer = lines.pop() ?? "";
    return lines.filter((line) => line.length > 0);
  }

  get pending(): string {
    return this.buffer;
  }
}
