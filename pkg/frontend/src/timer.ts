/** Per-question stopwatch. Starts when a question is fully rendered and
 * stops at answer selection; the clock is injectable for tests. */

import type { Clock } from "./types.js";
import { systemClock } from "./types.js";

export interface TimerReading {
  rtMs: number;
  shownAtMs: number;
  answeredAtMs: number;
}

export class QuestionTimer {
  private shownAt: number | null = null;

  constructor(private clock: Clock = systemClock) {}

  get running(): boolean {
    return this.shownAt !== null;
  }

  start(): number {
    if (this.shownAt !== null) {
      throw new Error("timer already running");
    }
    this.shownAt = this.clock.now();
    return this.shownAt;
  }

  stop(): TimerReading {
    if (this.shownAt === null) {
      throw new Error("timer was never started");
    }
    const answeredAt = this.clock.now();
    const reading = {
      rtMs: answeredAt - this.shownAt,
      shownAtMs: this.shownAt,
      answeredAtMs: answeredAt,
    };
    this.shownAt = null;
    return reading;
  }
}
