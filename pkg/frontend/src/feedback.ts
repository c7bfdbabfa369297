// Post-mission panel: which labs consumed how many of the mission's bits.

import { FeedbackEntry } from "./protocol.js";

const BAR_WIDTH = 20;

export interface FeedbackPanel {
  lines: string[];
  total: number;
}

/**
 * Render the hub's report verbatim; the client never rescales or
 * recomputes the counts.  Counts must not exceed the mission size.
 */
export function renderFeedback(report: FeedbackEntry[], missionBits: number): FeedbackPanel {
  if (report.length === 0) {
    return { lines: ["no labs running"], total: 0 };
  }
  const total = report.reduce((acc, entry) => acc + entry.count, 0);
  if (total > missionBits) {
    throw new Error(`report claims ${total} bits used out of ${missionBits}`);
  }
  const width = Math.max(...report.map((entry) => entry.lab.length));
  const lines = report.map((entry) => {
    const filled = missionBits === 0
      ? 0
      : Math.round((entry.count / missionBits) * BAR_WIDTH);
    const bar = "#".repeat(filled).padEnd(BAR_WIDTH, ".");
    return `${entry.lab.padEnd(width)}  ${bar}  ${entry.count}`;
  });
  return { lines, total };
}
