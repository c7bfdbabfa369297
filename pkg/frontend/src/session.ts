// Mission state machine: bit entry, oracle comparison, scoring, pass/fail.
//
// Every accepted keypress is transmitted to the hub, whatever the oracle
// predicted -- the prediction only drives scoring.  The prediction for a
// bit is always requested before that bit's value goes out, so the
// hub-side oracle can never peek.

import { Bit, FeedbackEntry } from "./protocol.js";
import { LevelSpec, oracleTarget } from "./levels.js";

export interface OracleLink {
  predict(): Promise<Bit>;
  sendBit(bit: Bit): void;
  missionDone(n: number): Promise<FeedbackEntry[]>;
}

export type Clock = () => number; // milliseconds

export interface MissionResult {
  passed: boolean;
  entered: number;
  unpredicted: number;
  score: number;
  elapsedSeconds: number;
  report: FeedbackEntry[] | null;
  fact: string;
  videoPlaceholder: boolean;
}

export const CURIOUS_FACTS: string[] = [
  "A fair coin and a stubborn human disagree about what 'random' looks like.",
  "Sixteen deterministic strategies exist for a two-setting game; none beats the bound.",
  "Streaks feel unlikely, so people avoid them -- and become predictable.",
  "The same bits you type can steer many experiments at once.",
  "Detectors miss photons; good inequalities budget for the losses.",
];

const MULTIPLIER_STREAK = 10;
const MULTIPLIER_WINDOW_MS = 5000;
const MULTIPLIER_FACTOR = 2;
const INDICATOR_EVERY = 20;
const VIDEO_EVERY_N_PASSES = 3;

export class GameSession {
  readonly userId: string;
  level: LevelSpec | null = null;

  entered = 0;
  unpredicted = 0;
  score = 0;
  indicator: number | null = null; // unpredicted fraction, refreshed every 20 bits

  private link: OracleLink;
  private clock: Clock;
  private queue: Bit[] = [];
  private pumping = false;
  private pendingPrediction: Promise<Bit> | null = null;
  private missionStartMs = 0;
  private quotaReachedMs: number | null = null;
  private targetReachedMs: number | null = null;
  private streak = 0;
  private multiplierUntilMs = 0;
  private passes = 0;
  private indicatorListeners: ((value: number) => void)[] = [];
  private idleResolvers: (() => void)[] = [];

  constructor(userId: string, link: OracleLink, clock: Clock = Date.now) {
    this.userId = userId;
    this.link = link;
    this.clock = clock;
  }

  onIndicator(listener: (value: number) => void): void {
    this.indicatorListeners.push(listener);
  }

  startMission(level: LevelSpec): void {
    this.level = level;
    this.entered = 0;
    this.unpredicted = 0;
    this.score = 0;
    this.indicator = null;
    this.queue = [];
    this.streak = 0;
    this.multiplierUntilMs = 0;
    this.quotaReachedMs = null;
    this.targetReachedMs = null;
    this.missionStartMs = this.clock();
    this.pendingPrediction = this.link.predict();
  }

  get elapsedSeconds(): number {
    return (this.clock() - this.missionStartMs) / 1000;
  }

  get missionOver(): boolean {
    if (this.level === null) return true;
    if (this.elapsedSeconds > this.level.time_limit_seconds) return true;
    if (this.level.is_oracle_battle) {
      return (
        this.unpredicted >= oracleTarget(this.level) ||
        this.entered + this.queue.length >= this.level.required_bits
      );
    }
    return this.entered + this.queue.length >= this.level.required_bits;
  }

  /** Accept a keypress.  Never blocks and never filters. */
  enterBit(bit: Bit): void {
    if (this.level === null) throw new Error("no mission running");
    this.queue.push(bit);
    void this.pump();
  }

  /** Resolves when every queued bit has been scored and transmitted. */
  settled(): Promise<void> {
    if (!this.pumping && this.queue.length === 0) return Promise.resolve();
    return new Promise((resolve) => this.idleResolvers.push(resolve));
  }

  private async pump(): Promise<void> {
    if (this.pumping) return;
    this.pumping = true;
    try {
      while (this.queue.length > 0) {
        const bit = this.queue[0]!;
        let prediction: Bit;
        try {
          prediction = await (this.pendingPrediction ?? this.link.predict());
        } catch {
          // offline: leave the bit queued; caller reconnects and pumps again
          break;
        }
        this.queue.shift();
        this.link.sendBit(bit); // transmit before asking about the next bit
        this.pendingPrediction = this.link.predict();
        this.applyScore(bit, prediction);
      }
    } finally {
      this.pumping = false;
      if (this.queue.length === 0) {
        for (const resolve of this.idleResolvers.splice(0)) resolve();
      }
    }
  }

  /** Retry pumping after a reconnect. */
  resume(): void {
    this.pendingPrediction = null;
    void this.pump();
  }

  private applyScore(bit: Bit, prediction: Bit): void {
    const now = this.clock();
    this.entered += 1;
    if (prediction !== bit) {
      this.unpredicted += 1;
      this.streak += 1;
      const multiplier = now < this.multiplierUntilMs ? MULTIPLIER_FACTOR : 1;
      this.score += multiplier;
      if (this.streak >= MULTIPLIER_STREAK) {
        this.multiplierUntilMs = now + MULTIPLIER_WINDOW_MS;
        this.streak = 0;
      }
    } else {
      this.streak = 0;
    }
    if (this.level !== null) {
      if (this.quotaReachedMs === null && this.entered >= this.level.required_bits) {
        this.quotaReachedMs = now;
      }
      if (
        this.level.is_oracle_battle &&
        this.targetReachedMs === null &&
        this.unpredicted >= oracleTarget(this.level)
      ) {
        this.targetReachedMs = now;
      }
    }
    if (this.entered % INDICATOR_EVERY === 0) {
      this.indicator = this.unpredicted / this.entered;
      for (const listener of this.indicatorListeners) listener(this.indicator);
    }
  }

  private withinLimit(timestampMs: number | null): boolean {
    if (this.level === null || timestampMs === null) return false;
    return (timestampMs - this.missionStartMs) / 1000 <= this.level.time_limit_seconds;
  }

  passed(): boolean {
    if (this.level === null || this.entered === 0) return false;
    if (this.level.is_oracle_battle) {
      return (
        this.withinLimit(this.targetReachedMs) &&
        this.entered <= this.level.required_bits
      );
    }
    return (
      this.withinLimit(this.quotaReachedMs) &&
      this.unpredicted / this.entered >= this.level.min_unpredicted_fraction
    );
  }

  async resolveMission(): Promise<MissionResult> {
    await this.settled();
    const passed = this.passed();
    let report: FeedbackEntry[] | null = null;
    if (passed) {
      this.passes += 1;
      report = await this.link.missionDone(this.entered);
    }
    return {
      passed,
      entered: this.entered,
      unpredicted: this.unpredicted,
      score: this.score,
      elapsedSeconds: this.elapsedSeconds,
      report,
      fact: CURIOUS_FACTS[this.passes % CURIOUS_FACTS.length]!,
      videoPlaceholder: passed && this.passes % VIDEO_EVERY_N_PASSES === 0,
    };
  }
}
