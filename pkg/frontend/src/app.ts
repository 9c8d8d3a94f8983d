/** Minimal browser shell around QuizController: renders the explanation and
 * feature table, shows two large answer buttons (no keyboard shortcuts, so
 * motor time stays comparable across participants), and reconnects to an
 * existing session after a reload. */

import { ServiceClient } from "./client.js";
import { QuizController } from "./quizFlow.js";
import { renderTreeSvg } from "./treeLayout.js";
import type { QuizQuestion } from "./types.js";

const SESSION_KEY = "interpopt-session";

interface BootOptions {
  baseUrl: string;
  studyId: string;
  participant: string;
  classNames?: [string, string];
}

export async function boot(root: HTMLElement, options: BootOptions): Promise<void> {
  const client = new ServiceClient(options.baseUrl);
  const saved = window.sessionStorage.getItem(SESSION_KEY);
  let sessionId: string;
  if (saved && saved.startsWith(`${options.studyId}:`)) {
    sessionId = saved.split(":", 2)[1];
  } else {
    sessionId = await client.createSession(options.studyId, options.participant);
    window.sessionStorage.setItem(SESSION_KEY, `${options.studyId}:${sessionId}`);
  }
  const payload = await client.getQuiz(options.studyId, sessionId);
  const answered = (payload as unknown as { answered?: string[] }).answered ?? [];
  const controller = new QuizController(payload, client, undefined, answered);
  showNext(root, controller, options.classNames ?? ["class 0", "class 1"]);
}

function showNext(
  root: HTMLElement,
  controller: QuizController,
  classNames: [string, string],
): void {
  const step = controller.peek();
  if (step.kind === "done") {
    root.innerHTML = `<h2>All done${step.flagged ? " (practice flagged)" : ""}. Thank you!</h2>`;
    window.sessionStorage.removeItem(SESSION_KEY);
    return;
  }
  if (step.kind === "break") {
    root.innerHTML = `<h2>Take a short break</h2><p>The quiz resumes in 30 seconds.</p>`;
    window.setTimeout(() => {
      controller.acknowledgeBreak();
      showNext(root, controller, classNames);
    }, step.durationMs);
    return;
  }

  root.innerHTML = `
    <p class="progress">${step.isPractice ? "Practice" : "Question"} ${step.number} of ${step.total}</p>
    <div id="explanation"></div>
    <table id="features"><thead><tr><th>feature</th><th>value</th></tr></thead><tbody></tbody></table>
    <p>What does the model predict for this data point?</p>
    <div id="answers"></div>`;

  // content appears and the timer starts in the same call
  const question = controller.beginQuestion();
  renderQuestion(root, question, classNames);

  const answers = root.querySelector<HTMLDivElement>("#answers")!;
  classNames.forEach((name, label) => {
    const button = document.createElement("button");
    button.textContent = name;
    button.className = "answer-button";
    button.addEventListener("click", async () => {
      answers.querySelectorAll("button").forEach((b) => (b.disabled = true));
      const outcome = await controller.answer(label);
      if (outcome.practiceCorrect === false) {
        root.insertAdjacentHTML("beforeend", `<p class="feedback">Not quite; check the tree again.</p>`);
        await new Promise((r) => setTimeout(r, 1200));
      }
      showNext(root, controller, classNames);
    });
    answers.appendChild(button);
  });
}

function renderQuestion(
  root: HTMLElement,
  question: QuizQuestion,
  classNames: [string, string],
): void {
  root.querySelector("#explanation")!.innerHTML = renderTreeSvg(
    question.explanation,
    classNames,
    window.innerWidth - 80,
  );
  const tbody = root.querySelector("#features tbody")!;
  for (const [name, value] of Object.entries(question.features)) {
    const row = document.createElement("tr");
    row.innerHTML = `<td>${name}</td><td>${typeof value === "number" ? value.toFixed(3) : value}</td>`;
    tbody.appendChild(row);
  }
}
