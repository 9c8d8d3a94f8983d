/** Quiz session state machine: practice flow, timed questions, a midpoint
 * break on long quizzes, and idempotent submission through the client.
 *
 * Question content is only obtainable through beginQuestion(), which arms
 * the response timer in the same call, so nothing can be pre-read. A reload
 * resumes from the service-reported answered set: completed practice is
 * skipped and the quiz continues at the first unanswered question.
 */

import type { ServiceClient } from "./client.js";
import { QuestionTimer } from "./timer.js";
import type { Clock, PracticeQuestion, QuizPayload, QuizQuestion } from "./types.js";
import { systemClock } from "./types.js";

export const BREAK_MIN_QUESTIONS = 16;
export const BREAK_DURATION_MS = 30_000;

export type Phase = "practice-1" | "practice-2" | "quiz" | "done";

export type Step =
  | { kind: "question"; isPractice: boolean; number: number; total: number }
  | { kind: "break"; durationMs: number }
  | { kind: "done"; flagged: boolean };

export interface AnswerOutcome {
  stored: boolean;
  rtMs: number;
  practiceCorrect?: boolean;
}

export class QuizController {
  readonly payload: QuizPayload;
  private client: ServiceClient;
  private timer: QuestionTimer;
  private phase: Phase;
  private practiceSet: PracticeQuestion[];
  private backupSet: PracticeQuestion[] = [];
  private practiceCursor = 0;
  private practiceCorrect = 0;
  private quizCursor: number;
  private flaggedPractice = false;
  private breakPending = false;
  private breakTaken = false;
  private active: QuizQuestion | PracticeQuestion | null = null;

  constructor(
    payload: QuizPayload,
    client: ServiceClient,
    clock: Clock = systemClock,
    answered: string[] = [],
  ) {
    this.payload = payload;
    this.client = client;
    this.timer = new QuestionTimer(clock);

    const answeredSet = new Set(answered);
    const answeredPractice = payload.practice.filter((p) => answeredSet.has(p.question_id)).length;
    const firstSet = payload.practice.filter((p) => !p.backup);
    const backupSet = payload.practice.filter((p) => p.backup);

    this.quizCursor = payload.questions.findIndex((q) => !answeredSet.has(q.question_id));
    const quizStarted = payload.questions.some((q) => answeredSet.has(q.question_id));

    if (quizStarted || answeredPractice >= firstSet.length) {
      // practice already completed in a previous load
      this.phase = this.quizCursor < 0 ? "done" : "quiz";
      this.practiceSet = [];
    } else {
      this.phase = "practice-1";
      this.practiceSet = firstSet;
      this.backupSet = backupSet;
    }
    if (this.quizCursor < 0) {
      this.quizCursor = payload.questions.length;
      this.phase = "done";
    }
  }

  get flagged(): boolean {
    return this.flaggedPractice;
  }

  /** What to show next; never reveals question content. */
  peek(): Step {
    if (this.phase === "done") {
      return { kind: "done", flagged: this.flaggedPractice };
    }
    if (this.breakPending) {
      return { kind: "break", durationMs: BREAK_DURATION_MS };
    }
    if (this.phase === "quiz") {
      return {
        kind: "question",
        isPractice: false,
        number: this.quizCursor + 1,
        total: this.payload.questions.length,
      };
    }
    return {
      kind: "question",
      isPractice: true,
      number: this.practiceCursor + 1,
      total: this.practiceSet.length,
    };
  }

  /** Arm the timer and hand over the question content, atomically. */
  beginQuestion(): QuizQuestion | PracticeQuestion {
    const step = this.peek();
    if (step.kind !== "question") {
      throw new Error(`cannot begin a question during ${step.kind}`);
    }
    if (this.active !== null) {
      throw new Error("a question is already active");
    }
    this.active =
      this.phase === "quiz"
        ? this.payload.questions[this.quizCursor]
        : this.practiceSet[this.practiceCursor];
    this.timer.start();
    return this.active;
  }

  acknowledgeBreak(): void {
    if (!this.breakPending) {
      throw new Error("no break pending");
    }
    this.breakPending = false;
    this.breakTaken = true;
  }

  async answer(chosenLabel: number): Promise<AnswerOutcome> {
    if (this.active === null) {
      throw new Error("no active question");
    }
    const reading = this.timer.stop();
    const question = this.active;
    this.active = null;
    const isPractice = this.phase !== "quiz";

    const ack = await this.client.submitResponse({
      study_id: this.payload.study_id,
      session_id: this.payload.session_id,
      question_id: question.question_id,
      point_id: question.point_id,
      chosen_label: chosenLabel,
      rt_ms: reading.rtMs,
      shown_at_ms: reading.shownAtMs,
      answered_at_ms: reading.answeredAtMs,
      is_practice: isPractice,
    });

    const outcome: AnswerOutcome = { stored: ack.stored, rtMs: reading.rtMs };
    if (isPractice) {
      const correct = chosenLabel === (question as PracticeQuestion).expected_label;
      outcome.practiceCorrect = correct;
      if (correct) {
        this.practiceCorrect += 1;
      }
      this.practiceCursor += 1;
      if (this.practiceCursor >= this.practiceSet.length) {
        this.finishPracticeSet();
      }
    } else {
      this.quizCursor += 1;
      this.maybeScheduleBreak();
      if (this.quizCursor >= this.payload.questions.length) {
        this.phase = "done";
      }
    }
    return outcome;
  }

  private finishPracticeSet(): void {
    const passed = this.practiceCorrect >= this.practiceSet.length;
    if (passed) {
      this.phase = "quiz";
    } else if (this.phase === "practice-1" && this.backupSet.length > 0) {
      this.phase = "practice-2";
      this.practiceSet = this.backupSet;
      this.practiceCursor = 0;
      this.practiceCorrect = 0;
    } else {
      // both sets missed: flag the session but still run the quiz
      this.flaggedPractice = true;
      this.phase = "quiz";
    }
    if (this.payload.questions.length === 0) {
      this.phase = "done";
    }
  }

  private maybeScheduleBreak(): void {
    if (
      !this.breakTaken &&
      this.payload.questions.length >= BREAK_MIN_QUESTIONS &&
      this.quizCursor === Math.floor(this.payload.questions.length / 2)
    ) {
      this.breakPending = true;
    }
  }
}
