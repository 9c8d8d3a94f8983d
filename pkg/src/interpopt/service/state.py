"""Durable study state for human-in-the-loop quiz sessions.

Every state change is one JSON line appended (and fsynced) to a per-study
log; in-memory state is a pure fold over the log, so a restart replays to
exactly the state before the crash. Advancing an iteration aggregates the
current model's responses, then deterministically recomputes the next model
from the labeled set (seeded GP fit + acquisition), so a crash between
compute and append simply repeats the same transition on retry.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import bayesopt, explain, mlp, oracle, trees
from ..zoo import ModelZoo, load_zoo

AWAITING = "awaiting-responses"
COMPLETE = "complete"

RT_VALIDATION_SLACK_MS = 2000


class StudyNotFound(KeyError):
    pass


class DuplicateResponse(ValueError):
    pass


class AdvanceNotReady(RuntimeError):
    def __init__(self, needed: int, have: int):
        super().__init__(f"{needed - have} more completed session(s) required ({have}/{needed})")
        self.needed = needed
        self.have = have


class CrashInjected(RuntimeError):
    """Raised by the test-only crash hook to simulate dying mid-advance."""


@dataclass(frozen=True)
class StudyConfig:
    iterations: int = 10
    min_users: int = 7
    questions_per_model: int = 8
    practice_questions: int = 3
    practice_backup: int = 3
    max_rt: float = 60.0
    kappa: float = 1.0
    gp_restarts: int = 10
    seed: int = 0
    exclude_extreme_rts: bool = False
    # operator-chosen models quizzed in the same format after the budget,
    # as fixed reference evaluations (no acquisition involved)
    baseline_models: tuple = ()

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "min_users": self.min_users,
            "questions_per_model": self.questions_per_model,
            "practice_questions": self.practice_questions,
            "practice_backup": self.practice_backup,
            "max_rt": self.max_rt,
            "kappa": self.kappa,
            "gp_restarts": self.gp_restarts,
            "seed": self.seed,
            "exclude_extreme_rts": self.exclude_extreme_rts,
            "baseline_models": list(self.baseline_models),
        }

    @staticmethod
    def from_dict(d: dict) -> "StudyConfig":
        d = dict(d)
        d["baseline_models"] = tuple(d.get("baseline_models", ()))
        return StudyConfig(**d)


@dataclass
class SessionState:
    session_id: str
    participant: str


@dataclass
class StudyState:
    study_id: str
    config: StudyConfig
    question_points: list
    practice_points: list
    current_model: int
    iteration: int = 1
    status: str = AWAITING
    final_model: int | None = None
    sessions: dict = field(default_factory=dict)  # session_id -> SessionState
    responses: dict = field(default_factory=dict)  # (session_id, question_id) -> record
    labeled: list = field(default_factory=list)  # advance summaries in order
    session_model: dict = field(default_factory=dict)  # session_id -> model_id


def _stable_rng(*parts) -> np.random.Generator:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


class StudyStore:
    """All studies under one state directory, one append-only log each."""

    def __init__(self, state_dir, zoo_dir):
        self.state_dir = Path(state_dir)
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self.zoo_dir = Path(zoo_dir)
        self.zoo: ModelZoo = load_zoo(self.zoo_dir)
        self._by_id: dict[str, StudyState] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._local_cache: dict = {}  # (study, model) -> point surrogates
        self._crash_hook = None  # test seam: callable invoked just before the advance append
        self._replay_all()

    # -- log plumbing ---------------------------------------------------------

    def _log_path(self, study_id: str) -> Path:
        return self.state_dir / "studies" / study_id / "log.jsonl"

    def _append(self, study_id: str, event: dict) -> None:
        path = self._log_path(study_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        line = json.dumps(event, sort_keys=True)
        with open(path, "a") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _replay_all(self) -> None:
        studies_dir = self.state_dir / "studies"
        if not studies_dir.exists():
            return
        for d in sorted(studies_dir.iterdir()):
            if (d / "log.jsonl").exists():
                self._replay(d.name)

    def _replay(self, study_id: str) -> None:
        events = []
        raw = self._log_path(study_id).read_text()
        lines = raw.split("\n")
        for i, line in enumerate(lines):
            if not line:
                continue
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError:
                if i == len(lines) - 1:
                    break  # torn final write from a crash; drop it
                raise
        state = None
        for ev in events:
            state = self._apply(state, ev)
        if state is not None:
            self._by_id[study_id] = state
            self._locks.setdefault(study_id, threading.Lock())

    def _apply(self, state: StudyState | None, ev: dict) -> StudyState:
        kind = ev["type"]
        if kind == "create":
            return StudyState(
                study_id=ev["study_id"],
                config=StudyConfig.from_dict(ev["config"]),
                question_points=list(ev["question_points"]),
                practice_points=list(ev["practice_points"]),
                current_model=ev["first_model"],
            )
        assert state is not None, "log must start with a create event"
        if kind == "session":
            sid = ev["session_id"]
            state.sessions[sid] = SessionState(sid, ev["participant"])
            state.session_model[sid] = ev["model_id"]
        elif kind == "response":
            key = (ev["session_id"], ev["question_id"])
            state.responses[key] = ev
        elif kind == "advance":
            state.labeled.append(
                {
                    "iteration": ev["iteration"],
                    "model_id": ev["model_id"],
                    "mean_rt": ev["mean_rt"],
                    "prior": ev["prior"],
                }
            )
            if ev["complete"]:
                state.status = COMPLETE
                state.final_model = ev["final_model"]
            else:
                state.iteration = ev["iteration"] + 1
                state.current_model = ev["next_model"]
        else:
            raise ValueError(f"unknown event type {kind!r}")
        return state

    # -- public operations ----------------------------------------------------

    def create_study(self, config: StudyConfig) -> str:
        known = {r.id for r in self.zoo.records}
        unknown = [m for m in config.baseline_models if m not in known]
        if unknown:
            raise ValueError(f"baseline models not in the zoo: {unknown}")
        study_id = "study-" + uuid.uuid4().hex[:12]
        rng = _stable_rng(config.seed, "questions")
        pool = list(self.zoo.eval_points.indices)
        needed = config.questions_per_model + config.practice_questions + config.practice_backup
        if needed > len(pool):
            raise ValueError(f"need {needed} points but the zoo evaluation set has {len(pool)}")
        chosen = rng.choice(len(pool), size=needed, replace=False)
        points = [int(pool[i]) for i in chosen]
        first = int(_stable_rng(config.seed, "first-model").choice([r.id for r in self.zoo.records]))
        event = {
            "type": "create",
            "study_id": study_id,
            "config": config.to_dict(),
            "question_points": points[: config.questions_per_model],
            "practice_points": points[config.questions_per_model :],
            "first_model": first,
            "ts": time.time(),
        }
        self._append(study_id, event)
        self._by_id[study_id] = self._apply(None, event)
        self._locks[study_id] = threading.Lock()
        return study_id

    def _study(self, study_id: str) -> StudyState:
        try:
            return self._by_id[study_id]
        except KeyError:
            raise StudyNotFound(study_id) from None

    def create_session(self, study_id: str, participant: str) -> str:
        st = self._study(study_id)
        if st.status != AWAITING:
            raise RuntimeError(f"study is {st.status}")
        with self._locks[study_id]:
            session_id = f"session-{len(st.sessions) + 1:04d}-{uuid.uuid4().hex[:6]}"
            self._append(
                study_id,
                {
                    "type": "session",
                    "session_id": session_id,
                    "participant": participant,
                    "model_id": st.current_model,
                    "ts": time.time(),
                },
            )
            st.sessions[session_id] = SessionState(session_id, participant)
            st.session_model[session_id] = st.current_model
        return session_id

    def _question_features(self, tree: trees.TreeModel, point_id: int) -> dict:
        used = trees.columns_used(tree, self.zoo.dataset.feature_groups)
        decoded = self.zoo.dataset.decode_row(point_id)
        return {name: decoded[name] for name in sorted(used)}

    def _local_explanations(self, model_id: int, point_ids) -> dict:
        record = self.zoo.record(model_id)
        cfg = explain.LocalRegionConfig()
        out = {}
        for pid in point_ids:
            exp = explain.fit_local_proxy(
                lambda Z: mlp.predict_batch(record.model, Z),
                self.zoo.dataset.features[pid],
                self.zoo.dataset,
                cfg,
                seed=self.zoo.seed + pid,
                anchor_index=pid,
            )
            if exp.surrogate is not None:
                out[pid] = exp.surrogate
        return out

    def _explanations_for(self, st: StudyState, model_id: int) -> dict:
        """Per-point explanations for one model: the model itself for tree
        zoos, cached boundary surrogates for black-box zoos (off-boundary
        points get no quiz question)."""
        record = self.zoo.record(model_id)
        if record.kind == "tree":
            return {pid: record.model for pid in st.question_points + st.practice_points}
        key = (st.study_id, model_id)
        if key not in self._local_cache:
            self._local_cache[key] = self._local_explanations(
                model_id, st.question_points + st.practice_points
            )
        return self._local_cache[key]

    def _served_question_count(self, st: StudyState, model_id: int) -> int:
        explanations = self._explanations_for(st, model_id)
        return sum(1 for pid in st.question_points if pid in explanations)

    def get_quiz(self, study_id: str, session_id: str) -> dict:
        st = self._study(study_id)
        if st.status != AWAITING:
            raise RuntimeError(f"study is {st.status}")
        if session_id not in st.sessions:
            raise KeyError(f"unknown session {session_id}")
        model_id = st.session_model[session_id]
        explanations = self._explanations_for(st, model_id)

        order = _stable_rng(st.config.seed, "order", session_id).permutation(
            len(st.question_points)
        )
        questions = []
        for qnum, qi in enumerate(order):
            pid = st.question_points[int(qi)]
            tree = explanations.get(pid)
            if tree is None:
                continue
            questions.append(
                {
                    "question_id": f"q-{pid}",
                    "point_id": pid,
                    "explanation": trees.tree_to_dict(tree),
                    "features": self._question_features(tree, pid),
                }
            )
        practice = []
        for k, pid in enumerate(st.practice_points):
            tree = explanations.get(pid)
            if tree is None:
                continue
            practice.append(
                {
                    "question_id": f"p-{pid}",
                    "point_id": pid,
                    "explanation": trees.tree_to_dict(tree),
                    "features": self._question_features(tree, pid),
                    "expected_label": int(trees.predict(tree, self.zoo.dataset.features[pid])),
                    "backup": k >= st.config.practice_questions,
                }
            )
        answered = sorted(qid for (sid, qid) in st.responses if sid == session_id)
        return {
            "study_id": study_id,
            "session_id": session_id,
            "iteration": st.iteration,
            "model_id": model_id,
            "questions": questions,
            "practice": practice,
            "answered": answered,  # lets a reloaded client resume mid-quiz
        }

    def submit_response(
        self,
        study_id: str,
        session_id: str,
        question_id: str,
        point_id: int,
        chosen_label: int,
        rt_ms: float,
        shown_at_ms: float,
        answered_at_ms: float,
        is_practice: bool = False,
    ) -> dict:
        st = self._study(study_id)
        if session_id not in st.sessions:
            raise KeyError(f"unknown session {session_id}")
        valid_points = st.practice_points if is_practice else st.question_points
        if point_id not in valid_points:
            raise KeyError(f"question {question_id} does not belong to this study")
        key = (session_id, question_id)
        if key in st.responses:
            return {"status": "duplicate", "stored": False}
        model_id = st.session_model[session_id]
        # forward simulation is judged against the explanation shown
        explanation = self._explanations_for(st, model_id).get(point_id)
        if explanation is None:
            raise KeyError(f"question {question_id} has no explanation for model {model_id}")
        expected = int(trees.predict(explanation, self.zoo.dataset.features[point_id]))
        valid = abs(rt_ms - (answered_at_ms - shown_at_ms)) <= RT_VALIDATION_SLACK_MS
        event = {
            "type": "response",
            "session_id": session_id,
            "question_id": question_id,
            "point_id": int(point_id),
            "model_id": model_id,
            "chosen_label": int(chosen_label),
            "rt_ms": float(rt_ms),
            "shown_at_ms": float(shown_at_ms),
            "answered_at_ms": float(answered_at_ms),
            "is_practice": bool(is_practice),
            "correct": int(chosen_label) == expected,
            "valid": valid,
            "ts": time.time(),
        }
        with self._locks[study_id]:
            if key in st.responses:
                return {"status": "duplicate", "stored": False}
            self._append(study_id, event)
            st.responses[key] = event
        return {"status": "stored", "stored": True, "valid": valid}

    def _completed_sessions(self, st: StudyState) -> list:
        needed = self._served_question_count(st, st.current_model)
        done = []
        for sid in st.sessions:
            if st.session_model[sid] != st.current_model:
                continue
            answered = sum(
                1
                for (s, q), ev in st.responses.items()
                if s == sid and not ev["is_practice"]
            )
            if answered >= needed:
                done.append(sid)
        return done

    def advance(self, study_id: str, min_users: int | None = None) -> dict:
        """Aggregate the current model's responses, label it, and move on.

        The transition is atomic: a single log line commits it. The next
        model is a deterministic function of the labeled set and the study
        seed, so a crash after compute but before commit is harmless.
        """
        st = self._study(study_id)
        if st.status == COMPLETE:
            raise RuntimeError("study is complete")
        needed = st.config.min_users if min_users is None else min_users
        with self._locks[study_id]:
            done = self._completed_sessions(st)
            if len(done) < needed:
                raise AdvanceNotReady(needed, len(done))

            cfg = oracle.ScoreConfig(st.config.max_rt, st.config.questions_per_model)
            quiz_responses = [
                oracle.QuizResponse(
                    user=ev["session_id"],
                    model_id=ev["model_id"],
                    point_id=ev["point_id"],
                    rt=ev["rt_ms"] / 1000.0,
                    correct=ev["correct"],
                )
                for (sid, _), ev in sorted(st.responses.items())
                if sid in done and not ev["is_practice"]
            ]
            if quiz_responses:
                per_point, per_model = oracle.aggregate_quiz(
                    quiz_responses, cfg, exclude_extremes=st.config.exclude_extreme_rts
                )
                mean_rt = per_model[st.current_model]
                prior = float(
                    np.mean([r.score for (m, _), r in per_point.items() if m == st.current_model])
                )
            else:
                # nothing was askable (black-box model with no boundary among
                # the question points): zero mean time, full-cap score
                mean_rt = 0.0
                prior = cfg.max_rt

            labeled = st.labeled + [
                {"iteration": st.iteration, "model_id": st.current_model, "mean_rt": mean_rt, "prior": prior}
            ]
            ids = [rec["model_id"] for rec in labeled]
            # after the acquisition budget, operator-chosen baseline models
            # are quizzed in the same format as fixed reference evaluations
            pending_baselines = [m for m in st.config.baseline_models if m not in ids]
            next_model = None
            if st.iteration < st.config.iterations:
                candidates = [
                    (r.id, r.importances) for r in self.zoo.records if r.id not in ids
                ]
                if candidates:
                    F = np.vstack([self.zoo.record(i).importances for i in ids])
                    y = np.asarray([rec["mean_rt"] for rec in labeled])
                    gp = bayesopt.gp_fit(
                        ids, F, y, restarts=st.config.gp_restarts, seed=st.config.seed + st.iteration
                    )
                    next_model = bayesopt.acquire(gp, candidates, kappa=st.config.kappa)
            if next_model is None and pending_baselines:
                next_model = pending_baselines[0]
            complete = next_model is None

            final_model = None
            if complete:
                best = min(
                    labeled,
                    key=lambda rec: (
                        -self.zoo.record(rec["model_id"]).silf_likelihood * rec["prior"],
                        rec["mean_rt"],
                        rec["model_id"],
                    ),
                )
                final_model = best["model_id"]

            event = {
                "type": "advance",
                "iteration": st.iteration,
                "model_id": st.current_model,
                "mean_rt": mean_rt,
                "prior": prior,
                "next_model": next_model,
                "complete": complete,
                "final_model": final_model,
                "ts": time.time(),
            }
            if self._crash_hook is not None:
                self._crash_hook(event)
            self._append(study_id, event)
            self._apply(st, event)
        return {
            "iteration": st.iteration,
            "status": st.status,
            "next_model": next_model,
            "final_model": final_model,
        }

    def get_status(self, study_id: str) -> dict:
        st = self._study(study_id)
        done = self._completed_sessions(st) if st.status == AWAITING else []
        return {
            "study_id": study_id,
            "status": st.status,
            "iteration": st.iteration,
            "current_model": st.current_model if st.status == AWAITING else None,
            "sessions_total": len(st.sessions),
            "sessions_completed_current": len(done),
            "labeled": list(st.labeled),
            "final_model": st.final_model,
        }

    def trace_bytes(self, study_id: str) -> bytes:
        """Canonical bytes of the advance history plus the pending selection,
        for crash-recovery comparisons."""
        st = self._study(study_id)
        lines = [json.dumps(rec, sort_keys=True) for rec in st.labeled]
        if st.status == COMPLETE:
            lines.append(json.dumps({"final_model": st.final_model}, sort_keys=True))
        else:
            lines.append(
                json.dumps(
                    {"current_model": st.current_model, "iteration": st.iteration},
                    sort_keys=True,
                )
            )
        return ("\n".join(lines) + "\n").encode()
