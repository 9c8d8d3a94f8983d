"""Command-line entry points mirroring the library's main workflows."""

from __future__ import annotations

import json
from pathlib import Path

import click

from . import bayesopt, data, experiments, oracle
from . import zoo as zoo_mod
from .corpora import GENERATORS
from .data import load_schema, prepare_dataset, save_csv, save_dataset, save_schema


@click.group()
def main():
    """Search for accurate models that humans can actually read."""


@main.group(name="data")
def data_cmd():
    """Dataset preparation."""


@data_cmd.command("prepare")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--balance/--no-balance", default=True)
@click.option("--train-fraction", default=0.8, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def data_prepare(input_path, schema_path, balance, train_fraction, seed, out_path):
    """Load a CSV, preprocess, split, and persist the dataset."""
    schema = load_schema(schema_path)
    raw = data.load_csv(input_path, schema)
    ds = prepare_dataset(raw, schema, balance=balance, train_fraction=train_fraction, seed=seed)
    save_dataset(ds, out_path)
    click.echo(f"wrote {out_path}: {ds.n_rows} rows, {ds.n_features} encoded features")
    for w in ds.warnings:
        click.echo(f"warning: {w}", err=True)


@data_cmd.command("generate")
@click.option("--name", type=click.Choice([*GENERATORS, "synthetic"]), required=True)
@click.option("--n", default=None, type=int, help="row count (generator default if omitted)")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_prefix", required=True, help="prefix for <out>.csv and <out>.schema")
def data_generate(name, n, seed, out_prefix):
    """Write one of the bundled corpora as CSV + schema sidecar."""
    if name == "synthetic":
        raw = data.generate_synthetic(n or 90000, seed=seed)
        schema = data.SYNTHETIC_SCHEMA
    else:
        generator, schema = GENERATORS[name]
        raw = generator(**({"n": n} if n else {}), seed=seed)
    save_csv(raw, f"{out_prefix}.csv")
    save_schema(schema, f"{out_prefix}.schema")
    click.echo(f"wrote {out_prefix}.csv ({raw.n_rows} rows) and {out_prefix}.schema")


@main.group()
def zoo():
    """Candidate model collections."""


@zoo.command("build")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--class", "model_class", type=click.Choice(["tree", "mlp"]), default="tree", show_default=True)
@click.option("--count", default=500, show_default=True)
@click.option("--threshold", required=True, type=float)
@click.option("--restarts", default=None, type=int, help="fit budget (default 10x count)")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def zoo_build(dataset_path, model_class, count, threshold, restarts, seed, out_dir):
    ds = data.load_dataset(dataset_path)
    params = zoo_mod.SilfParams.for_threshold(threshold)
    z = zoo_mod.generate_zoo(ds, model_class, count, params, seed=seed, restarts=restarts)
    zoo_mod.save_zoo(z, out_dir)
    accs = [r.accuracy for r in z.records]
    click.echo(f"wrote {out_dir}: {len(z)} models, accuracy [{min(accs):.4f}, {max(accs):.4f}]")


@zoo.command("train-mlp")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--count", default=10, show_default=True)
@click.option("--threshold", default=0.75, show_default=True)
@click.option("--restarts", default=None, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def zoo_train_mlp(dataset_path, count, threshold, restarts, seed, out_dir):
    ds = data.load_dataset(dataset_path)
    params = zoo_mod.SilfParams.for_threshold(threshold)
    z = zoo_mod.generate_zoo(ds, "mlp", count, params, seed=seed, restarts=restarts)
    zoo_mod.save_zoo(z, out_dir)
    click.echo(f"wrote {out_dir}: {len(z)} networks")


@main.command("explain")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--points", default=20, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def explain_cmd(model_path, dataset_path, points, seed, out_dir):
    """Fit local surrogate trees around sampled validation points."""
    from . import explain as explain_mod
    from . import mlp as mlp_mod
    from . import trees as trees_mod

    ds = data.load_dataset(dataset_path)
    model = mlp_mod.load_mlp(model_path)
    pts = data.sample_points(ds, data.VALIDATE, points, seed=seed)
    fraction, exps = explain_mod.boundary_scan(
        lambda Z: mlp_mod.predict_batch(model, Z), list(pts.indices), ds, seed=seed
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for pid, exp in exps.items():
        entry = {"point_id": pid, "reason": exp.reason, "fidelity": exp.fidelity, "depth": exp.depth}
        if exp.surrogate is not None:
            fname = f"surrogate_{pid}.json"
            trees_mod.save_tree(exp.surrogate, out / fname)
            entry["file"] = fname
        summary.append(entry)
    (out / "summary.json").write_text(
        json.dumps({"boundary_fraction": fraction, "points": summary}, indent=1)
    )
    click.echo(f"boundary fraction {fraction:.3f}; wrote {out_dir}/summary.json")


@main.group()
def pipeline():
    """Sequential model-evaluation runs."""


@pipeline.command("run")
@click.option("--zoo", "zoo_dir", required=True, type=click.Path(exists=True))
@click.option("--oracle", "oracle_spec", required=True,
              help="simulated:<cfg-file> or service:<url>")
@click.option("--iterations", default=10, show_default=True)
@click.option("--kappa", default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def pipeline_run(zoo_dir, oracle_spec, iterations, kappa, seed, out_dir):
    z = zoo_mod.load_zoo(zoo_dir)
    if oracle_spec.startswith("simulated:"):
        spec = oracle.load_oracle_spec(oracle_spec.split(":", 1)[1])
        backend = oracle.SimulatedOracle(spec, z.dataset.feature_groups)
        trace = bayesopt.run_pipeline(z, backend, iterations=iterations, kappa=kappa, seed=seed)
        trace.save(out_dir)
        click.echo(f"final model {trace.final_model_id}; trace in {out_dir}")
    elif oracle_spec.startswith("service:"):
        url = oracle_spec.split(":", 1)[1]
        _run_against_service(url, iterations, kappa, seed, out_dir)
    else:
        raise click.BadParameter("oracle must be simulated:<cfg> or service:<url>")


def _run_against_service(url, iterations, kappa, seed, out_dir):
    """Create a study on a running quiz service and poll it to completion."""
    import time
    import urllib.request

    def post(path, body):
        req = urllib.request.Request(
            f"{url}{path}", data=json.dumps(body).encode(),
            headers={"content-type": "application/json"}, method="POST",
        )
        with urllib.request.urlopen(req, timeout=30) as resp:
            return json.loads(resp.read())

    def get(path):
        with urllib.request.urlopen(f"{url}{path}", timeout=30) as resp:
            return json.loads(resp.read())

    study_id = post("/v1/studies", {"iterations": iterations, "kappa": kappa, "seed": seed})["study_id"]
    click.echo(f"created {study_id}; waiting for sessions, ctrl-c to stop polling")
    while True:
        status = get(f"/v1/studies/{study_id}")
        if status["status"] == "complete":
            break
        time.sleep(5.0)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(status, indent=1))
    click.echo(f"final model {status['final_model']}; summary in {out_dir}")


@main.group()
def exp():
    """Analyses over a saved zoo."""


@exp.command("cross-proxy")
@click.option("--zoo", "zoo_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def exp_cross_proxy(zoo_dir, out_path):
    z = zoo_mod.load_zoo(zoo_dir)
    rows = experiments.cross_proxy_ranks(z)
    experiments.export_report(rows, out_path)
    click.echo(f"wrote {out_path} ({len(rows)} pairs)")


@exp.command("sample-curve")
@click.option("--zoo", "zoo_dir", required=True, type=click.Path(exists=True))
@click.option("--proxy", type=click.Choice(list(experiments.trees.PROXIES)), required=True)
@click.option("--repetitions", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def exp_sample_curve(zoo_dir, proxy, repetitions, seed, out_path):
    z = zoo_mod.load_zoo(zoo_dir)
    sizes = tuple(s for s in (8, 16, 32, 64, 128, 256, 512, 1000) if s <= len(z.eval_points))
    rows = experiments.sampled_rank_curve(z, proxy, sizes, repetitions, seed=seed)
    experiments.export_report(rows, out_path)
    click.echo(f"wrote {out_path}; means: {experiments.curve_means(rows)}")


@exp.command("pipeline-vs-random")
@click.option("--zoo", "zoo_dir", required=True, type=click.Path(exists=True))
@click.option("--proxy", type=click.Choice(list(experiments.trees.PROXIES)), required=True)
@click.option("--trials", default=100, show_default=True)
@click.option("--draws", default=1000, show_default=True)
@click.option("--iterations", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def exp_pipeline_vs_random(zoo_dir, proxy, trials, draws, iterations, seed, out_path):
    z = zoo_mod.load_zoo(zoo_dir)
    report = experiments.pipeline_vs_random(z, proxy, trials=trials, draws=draws, k=iterations, seed=seed)
    experiments.export_report(report["rows"], out_path)
    last = report["rows"][-1]
    click.echo(
        f"wrote {out_path}; iteration {iterations}: pipeline {last['pipeline_mean_rank']:.2f} "
        f"vs random {last['random_mean_rank']:.2f}"
    )


@main.command("serve")
@click.option("--zoo", "zoo_dir", required=True, type=click.Path(exists=True))
@click.option("--port", default=8321, show_default=True)
@click.option("--state", "state_dir", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(zoo_dir, port, state_dir, host):
    """Run the quiz service."""
    import uvicorn

    from .service.http import build_app
    from .service.state import StudyStore

    store = StudyStore(state_dir, zoo_dir)
    uvicorn.run(build_app(store), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
