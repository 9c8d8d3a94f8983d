"""Drive the human-in-the-loop quiz service end to end, in process.

Scripted participants answer timed forward-simulation quizzes; the service
aggregates their response times, labels the studied model, and picks the next
model by the acquisition rule. Every state change is one fsynced log line,
so killing the process at any point replays to the same state.
"""

import tempfile
from pathlib import Path

import interpopt as ip
from interpopt import corpora, zoo
from interpopt.service import StudyConfig, StudyStore

workdir = Path(tempfile.mkdtemp(prefix="interpopt-demo-"))

raw = corpora.generate_mushroom_like(2000, seed=0)
ds = ip.prepare_dataset(raw, corpora.MUSHROOM_SCHEMA, balance=True, train_fraction=0.8, seed=1)
z = zoo.generate_zoo(ds, "tree", 40, zoo.SilfParams.for_threshold(0.9), seed=2,
                     restarts=120, eval_point_count=100)
zoo.save_zoo(z, workdir / "zoo")
print(f"zoo of {len(z)} models saved under {workdir / 'zoo'}")

store = StudyStore(workdir / "state", workdir / "zoo")
config = StudyConfig(iterations=3, min_users=3, questions_per_model=8, seed=5)
study_id = store.create_study(config)
print(f"study {study_id}: {config.iterations} iterations, {config.min_users} users each\n")

for iteration in range(1, config.iterations + 1):
    status = store.get_status(study_id)
    print(f"iteration {iteration}: studying model {status['current_model']}")
    for user in range(config.min_users):
        session = store.create_session(study_id, f"participant-{user}")
        quiz = store.get_quiz(study_id, session)
        shown = 0.0
        for k, question in enumerate(quiz["questions"]):
            # a scripted participant: slower on deeper explanations
            depth = question["explanation"]["hyperparams"]["max_depth"]
            rt_ms = 4000.0 + 900.0 * depth + 150.0 * user + 25.0 * k
            store.submit_response(
                study_id, session, question["question_id"], question["point_id"],
                chosen_label=0, rt_ms=rt_ms,
                shown_at_ms=shown, answered_at_ms=shown + rt_ms,
            )
            shown += rt_ms + 800.0
    result = store.advance(study_id)
    print(f"  -> {result['status']}, next model: {result['next_model']}")

final = store.get_status(study_id)
print("\nlabeled history:")
for rec in final["labeled"]:
    print(f"  iter {rec['iteration']}: model {rec['model_id']:3d} "
          f"mean rt {rec['mean_rt']:.2f}s prior {rec['prior']:.2f}")
print(f"final (approximate MAP) model: {final['final_model']}")

# restart from disk: identical state
reopened = StudyStore(workdir / "state", workdir / "zoo")
assert reopened.get_status(study_id) == final
print("\nrestart replayed the log to identical state")
