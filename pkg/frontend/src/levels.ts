// Level definitions: three worlds of speed levels with oracle battles.

import fs from "node:fs";

export type World = "users" | "internet" | "laboratory";

export interface LevelSpec {
  world: World;
  required_bits: number;
  time_limit_seconds: number;
  min_unpredicted_fraction: number;
  is_oracle_battle: boolean;
}

const WORLDS: World[] = ["users", "internet", "laboratory"];

export function validateLevel(level: LevelSpec): void {
  if (!WORLDS.includes(level.world)) {
    throw new Error(`unknown world ${level.world}`);
  }
  if (level.required_bits <= 0) {
    throw new Error("required_bits must be positive");
  }
  if (level.min_unpredicted_fraction < 0 || level.min_unpredicted_fraction > 1) {
    throw new Error("min_unpredicted_fraction must lie in [0, 1]");
  }
  if (level.time_limit_seconds <= 0) {
    throw new Error("time_limit_seconds must be positive");
  }
}

/** Absolute unguessed-bit target for an oracle battle. */
export function oracleTarget(level: LevelSpec): number {
  return Math.round(level.required_bits * level.min_unpredicted_fraction);
}

export function loadLevels(path: string): LevelSpec[] {
  const raw = JSON.parse(fs.readFileSync(path, "utf-8"));
  if (!Array.isArray(raw.levels)) {
    throw new Error("level file needs a 'levels' array");
  }
  for (const level of raw.levels) validateLevel(level);
  return raw.levels as LevelSpec[];
}

// Tuning values mirror levels.json; the final oracle battle demands 20
// unguessed bits from a 30-bit budget.
export const DEFAULT_LEVELS: LevelSpec[] = [
  { world: "users", required_bits: 30, time_limit_seconds: 30,
    min_unpredicted_fraction: 0.30, is_oracle_battle: false },
  { world: "users", required_bits: 50, time_limit_seconds: 40,
    min_unpredicted_fraction: 0.35, is_oracle_battle: false },
  { world: "internet", required_bits: 60, time_limit_seconds: 45,
    min_unpredicted_fraction: 0.40, is_oracle_battle: false },
  { world: "internet", required_bits: 30, time_limit_seconds: 25,
    min_unpredicted_fraction: 0.50, is_oracle_battle: true },
  { world: "laboratory", required_bits: 80, time_limit_seconds: 60,
    min_unpredicted_fraction: 0.45, is_oracle_battle: false },
  { world: "laboratory", required_bits: 30, time_limit_seconds: 20,
    min_unpredicted_fraction: 2 / 3, is_oracle_battle: true },
];
