/** Wire-format types shared with the quiz service (/v1 endpoints). */

export interface TreeNode {
  feature: number | null;
  threshold: number | null;
  left: number;
  right: number;
  counts: [number, number];
  label: number;
}

export interface EncodedFeature {
  column: string;
  /** Categorical value this one-hot column stands for, or null for a
   * z-scored continuous column. */
  value: string | null;
}

export interface TreeDocument {
  format: string;
  root: number;
  n_features: number;
  nodes: TreeNode[];
  hyperparams: Record<string, unknown>;
  meta: { encoded_features?: EncodedFeature[] } & Record<string, unknown>;
}

export interface QuizQuestion {
  question_id: string;
  point_id: number;
  explanation: TreeDocument;
  features: Record<string, string | number>;
}

export interface PracticeQuestion extends QuizQuestion {
  expected_label: number;
  backup: boolean;
}

export interface QuizPayload {
  study_id: string;
  session_id: string;
  iteration: number;
  model_id: number;
  questions: QuizQuestion[];
  practice: PracticeQuestion[];
}

export interface ResponseBody {
  study_id: string;
  session_id: string;
  question_id: string;
  point_id: number;
  chosen_label: number;
  rt_ms: number;
  shown_at_ms: number;
  answered_at_ms: number;
  is_practice: boolean;
}

export interface StudyStatus {
  study_id: string;
  status: "awaiting-responses" | "complete";
  iteration: number;
  current_model: number | null;
  sessions_total: number;
  sessions_completed_current: number;
  labeled: { iteration: number; model_id: number; mean_rt: number; prior: number }[];
  final_model: number | null;
}

/** Injectable time source so tests can fake the clock. */
export interface Clock {
  now(): number;
}

export const systemClock: Clock = {
  now: () =>
    typeof performance !== "undefined" ? performance.now() : Date.now(),
};
