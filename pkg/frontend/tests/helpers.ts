import type {
  Clock,
  EncodedFeature,
  PracticeQuestion,
  QuizPayload,
  QuizQuestion,
  TreeDocument,
  TreeNode,
} from "../src/types.js";

export class FakeClock implements Clock {
  constructor(private t = 0) {}
  now(): number {
    return this.t;
  }
  advance(ms: number): void {
    this.t += ms;
  }
}

export function leafDoc(label = 1): TreeDocument {
  return {
    format: "interpopt.tree/1",
    root: 0,
    n_features: 1,
    nodes: [{ feature: null, threshold: null, left: -1, right: -1, counts: [1, 3], label }],
    hyperparams: {},
    meta: {},
  };
}

export function stumpDoc(meta?: EncodedFeature[]): TreeDocument {
  return {
    format: "interpopt.tree/1",
    root: 0,
    n_features: 1,
    nodes: [
      { feature: 0, threshold: 0.5, left: 1, right: 2, counts: [5, 5], label: 0 },
      { feature: null, threshold: null, left: -1, right: -1, counts: [5, 0], label: 0 },
      { feature: null, threshold: null, left: -1, right: -1, counts: [0, 5], label: 1 },
    ],
    hyperparams: {},
    meta: meta ? { encoded_features: meta } : {},
  };
}

/** Complete binary tree of the given depth, splitting feature (depth % k). */
export function completeDoc(depth: number, nFeatures = 8): TreeDocument {
  const nodes: TreeNode[] = [];
  const build = (level: number): number => {
    const index = nodes.length;
    if (level === depth) {
      nodes.push({ feature: null, threshold: null, left: -1, right: -1, counts: [1, 1], label: index % 2 });
      return index;
    }
    nodes.push({ feature: level % nFeatures, threshold: 0.5, left: -1, right: -1, counts: [2, 2], label: 0 });
    nodes[index].left = build(level + 1);
    nodes[index].right = build(level + 1);
    return index;
  };
  build(0);
  return {
    format: "interpopt.tree/1",
    root: 0,
    n_features: nFeatures,
    nodes,
    hyperparams: {},
    meta: {
      encoded_features: Array.from({ length: nFeatures }, (_, j) => ({
        column: `col_${j}`,
        value: null,
      })),
    },
  };
}

export function makeQuestion(id: string, pointId: number): QuizQuestion {
  return {
    question_id: id,
    point_id: pointId,
    explanation: stumpDoc([{ column: "odor", value: "f" }]),
    features: { odor: "f" },
  };
}

export function makePractice(id: string, pointId: number, backup: boolean, expected = 1): PracticeQuestion {
  return { ...makeQuestion(id, pointId), expected_label: expected, backup };
}

export function makePayload(nQuestions = 4): QuizPayload {
  return {
    study_id: "study-test",
    session_id: "session-test",
    iteration: 1,
    model_id: 0,
    questions: Array.from({ length: nQuestions }, (_, k) => makeQuestion(`q-${k}`, k)),
    practice: [
      makePractice("p-0", 100, false),
      makePractice("p-1", 101, false),
      makePractice("p-2", 102, false),
      makePractice("p-3", 103, true),
      makePractice("p-4", 104, true),
      makePractice("p-5", 105, true),
    ],
  };
}

/** In-memory stand-in for ServiceClient.submitResponse with injectable
 * failures; records every acknowledged body exactly once per key. */
export class FakeSubmitClient {
  stored = new Map<string, unknown>();
  attempts = 0;
  failuresRemaining: number;

  constructor(failures = 0) {
    this.failuresRemaining = failures;
  }

  async submitResponse(body: { session_id: string; question_id: string }): Promise<{ stored: boolean }> {
    this.attempts += 1;
    if (this.failuresRemaining > 0) {
      this.failuresRemaining -= 1;
      throw new Error("injected network failure");
    }
    const key = `${body.session_id}:${body.question_id}`;
    if (this.stored.has(key)) {
      return { stored: false };
    }
    this.stored.set(key, body);
    return { stored: true };
  }
}
