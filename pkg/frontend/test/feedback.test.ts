import { describe, expect, it } from "vitest";

import { renderFeedback } from "../src/feedback.js";

describe("renderFeedback", () => {
  it("renders one bar per lab with exact counts", () => {
    const panel = renderFeedback(
      [{ lab: "labA", count: 60 }, { lab: "labB", count: 40 }], 100);
    expect(panel.lines).toHaveLength(2);
    expect(panel.total).toBe(100);
    expect(panel.lines[0]).toContain("labA");
    expect(panel.lines[0]).toContain("60");
    expect(panel.lines[1]).toContain("40");
  });

  it("shows a placeholder with no labs running", () => {
    expect(renderFeedback([], 50).lines).toEqual(["no labs running"]);
  });

  it("single lab consuming everything fills the bar", () => {
    const panel = renderFeedback([{ lab: "only", count: 30 }], 30);
    expect(panel.lines[0]).toContain("#".repeat(20));
  });

  it("rejects reports that claim more bits than were entered", () => {
    expect(() => renderFeedback([{ lab: "a", count: 40 }], 30)).toThrow();
  });
});
