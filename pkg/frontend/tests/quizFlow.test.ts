import { describe, expect, it } from "vitest";

import { ServiceClient } from "../src/client.js";
import { QuizController } from "../src/quizFlow.js";
import { FakeClock, FakeSubmitClient, makePayload } from "./helpers.js";

function controllerWith(clock = new FakeClock(), payload = makePayload(), answered: string[] = []) {
  const client = new FakeSubmitClient();
  const controller = new QuizController(payload, client as never, clock, answered);
  return { controller, client, clock };
}

async function answerCurrent(controller: QuizController, clock: FakeClock, label: number, rtMs = 1000) {
  controller.beginQuestion();
  clock.advance(rtMs);
  return controller.answer(label);
}

describe("practice flow", () => {
  it("three correct answers move straight to the quiz", async () => {
    const { controller, clock } = controllerWith();
    for (let i = 0; i < 3; i++) {
      expect(controller.peek()).toMatchObject({ kind: "question", isPractice: true });
      const outcome = await answerCurrent(controller, clock, 1); // expected label is 1
      expect(outcome.practiceCorrect).toBe(true);
    }
    expect(controller.peek()).toMatchObject({ kind: "question", isPractice: false });
    expect(controller.flagged).toBe(false);
  });

  it("a miss brings the backup set of three", async () => {
    const { controller, clock } = controllerWith();
    await answerCurrent(controller, clock, 0); // wrong
    await answerCurrent(controller, clock, 1);
    await answerCurrent(controller, clock, 1);
    // now in the backup set
    const step = controller.peek();
    expect(step).toMatchObject({ kind: "question", isPractice: true, number: 1, total: 3 });
    for (let i = 0; i < 3; i++) {
      await answerCurrent(controller, clock, 1);
    }
    expect(controller.peek()).toMatchObject({ kind: "question", isPractice: false });
    expect(controller.flagged).toBe(false);
  });

  it("failing both sets flags the session but still shows the quiz", async () => {
    const { controller, clock } = controllerWith();
    for (let i = 0; i < 6; i++) {
      await answerCurrent(controller, clock, 0); // always wrong
    }
    expect(controller.flagged).toBe(true);
    expect(controller.peek()).toMatchObject({ kind: "question", isPractice: false });
  });
});

describe("question lifecycle", () => {
  it("content is only reachable through beginQuestion, which arms the timer", async () => {
    const { controller, clock } = controllerWith();
    // no accessor exposes the current question before begin
    expect((controller as never)["active"]).toBeNull();
    const q = controller.beginQuestion();
    expect(q.question_id).toBe("p-0");
    expect(() => controller.beginQuestion()).toThrow(/already active/);
    clock.advance(800);
    const outcome = await controller.answer(1);
    expect(outcome.rtMs).toBe(800);
  });

  it("records the injected response time exactly", async () => {
    const { controller, client, clock } = controllerWith();
    for (let i = 0; i < 3; i++) {
      await answerCurrent(controller, clock, 1);
    }
    await answerCurrent(controller, clock, 1, 12_345);
    const stored = [...client.stored.values()] as { question_id: string; rt_ms: number }[];
    const real = stored.find((b) => b.question_id === "q-0")!;
    expect(real.rt_ms).toBe(12_345);
  });

  it("finishes after the last question", async () => {
    const { controller, clock } = controllerWith(new FakeClock(), makePayload(2));
    for (let i = 0; i < 3; i++) {
      await answerCurrent(controller, clock, 1);
    }
    await answerCurrent(controller, clock, 0);
    await answerCurrent(controller, clock, 1);
    expect(controller.peek()).toMatchObject({ kind: "done", flagged: false });
  });
});

describe("midpoint break", () => {
  it("inserts one 30-second break halfway through a 16-question quiz", async () => {
    const { controller, clock } = controllerWith(new FakeClock(), makePayload(16));
    for (let i = 0; i < 3; i++) {
      await answerCurrent(controller, clock, 1);
    }
    for (let i = 0; i < 8; i++) {
      await answerCurrent(controller, clock, 0);
    }
    expect(controller.peek()).toMatchObject({ kind: "break", durationMs: 30_000 });
    expect(() => controller.beginQuestion()).toThrow(/break/);
    controller.acknowledgeBreak();
    for (let i = 0; i < 8; i++) {
      await answerCurrent(controller, clock, 0);
    }
    expect(controller.peek()).toMatchObject({ kind: "done" });
  });

  it("no break on an 8-question quiz", async () => {
    const { controller, clock } = controllerWith(new FakeClock(), makePayload(8));
    for (let i = 0; i < 3; i++) {
      await answerCurrent(controller, clock, 1);
    }
    for (let i = 0; i < 8; i++) {
      expect(controller.peek().kind).toBe("question");
      await answerCurrent(controller, clock, 0);
    }
    expect(controller.peek().kind).toBe("done");
  });
});

describe("resume after reload", () => {
  it("skips completed practice and lands on the first unanswered question", () => {
    const { controller } = controllerWith(
      new FakeClock(),
      makePayload(4),
      ["p-0", "p-1", "p-2", "q-0", "q-1"],
    );
    expect(controller.peek()).toMatchObject({ kind: "question", isPractice: false, number: 3 });
    const q = controller.beginQuestion();
    expect(q.question_id).toBe("q-2");
  });

  it("a fully answered quiz resumes as done", () => {
    const { controller } = controllerWith(
      new FakeClock(),
      makePayload(2),
      ["p-0", "p-1", "p-2", "q-0", "q-1"],
    );
    expect(controller.peek().kind).toBe("done");
  });
});

describe("submission retry", () => {
  it("retries until acknowledged and stores exactly one response", async () => {
    let failures = 2;
    const stored = new Map<string, unknown>();
    const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
      if (url.endsWith("/v1/responses")) {
        if (failures > 0) {
          failures -= 1;
          throw new Error("connection reset");
        }
        const body = JSON.parse(String(init!.body));
        const key = `${body.session_id}:${body.question_id}`;
        const dup = stored.has(key);
        if (!dup) stored.set(key, body);
        return new Response(JSON.stringify({ stored: !dup }), { status: 200 });
      }
      throw new Error(`unexpected url ${url}`);
    };
    const client = new ServiceClient("http://service", {
      fetchImpl,
      retryDelayMs: 0,
      sleep: async () => {},
    });
    const ack = await client.submitResponse({
      study_id: "s", session_id: "x", question_id: "q-1", point_id: 1,
      chosen_label: 0, rt_ms: 1000, shown_at_ms: 0, answered_at_ms: 1000,
      is_practice: false,
    });
    expect(ack.stored).toBe(true);
    expect(stored.size).toBe(1);
    // a duplicate submit is acknowledged without a second record
    const again = await client.submitResponse({
      study_id: "s", session_id: "x", question_id: "q-1", point_id: 1,
      chosen_label: 1, rt_ms: 2000, shown_at_ms: 0, answered_at_ms: 2000,
      is_practice: false,
    });
    expect(again.stored).toBe(false);
    expect(stored.size).toBe(1);
  });
});
