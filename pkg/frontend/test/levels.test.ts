import path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { DEFAULT_LEVELS, loadLevels, oracleTarget, validateLevel } from "../src/levels.js";
import { LineSplitter } from "../src/protocol.js";

const here = path.dirname(fileURLToPath(import.meta.url));

describe("levels", () => {
  it("loads the shipped level file", () => {
    const levels = loadLevels(path.join(here, "..", "levels.json"));
    expect(levels.length).toBe(DEFAULT_LEVELS.length);
    expect(levels.map((l) => l.world)).toEqual(DEFAULT_LEVELS.map((l) => l.world));
  });

  it("walks the three worlds in order", () => {
    const worlds = [...new Set(DEFAULT_LEVELS.map((l) => l.world))];
    expect(worlds).toEqual(["users", "internet", "laboratory"]);
  });

  it("final oracle battle wants 20 of 30", () => {
    const final = DEFAULT_LEVELS[DEFAULT_LEVELS.length - 1]!;
    expect(final.is_oracle_battle).toBe(true);
    expect(final.required_bits).toBe(30);
    expect(oracleTarget(final)).toBe(20);
  });

  it("rejects invalid specs", () => {
    expect(() => validateLevel({
      world: "users", required_bits: 0, time_limit_seconds: 10,
      min_unpredicted_fraction: 0.5, is_oracle_battle: false,
    })).toThrow();
    expect(() => validateLevel({
      // @ts-expect-error testing runtime validation of unknown worlds
      world: "moon", required_bits: 5, time_limit_seconds: 10,
      min_unpredicted_fraction: 0.5, is_oracle_battle: false,
    })).toThrow();
  });
});

describe("line splitter", () => {
  it("reassembles split frames", () => {
    const splitter = new LineSplitter();
    expect(splitter.push('{"type":"ack","l')).toEqual([]);
    expect(splitter.push('ab":"x"}\n{"type":')).toEqual(['{"type":"ack","lab":"x"}']);
    expect(splitter.push('"error","error":"e"}\n')).toEqual(['{"type":"error","error":"e"}']);
    expect(splitter.pending).toBe("");
  });
});
