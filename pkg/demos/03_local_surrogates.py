"""Explain a black-box network through local surrogate trees.

A small feed-forward net is trained on the covertype-style corpus; points
near its decision boundary get shallow tree surrogates fitted on perturbation
neighborhoods, while off-boundary points are detected and skipped.
"""

import time

import numpy as np

import interpopt as ip
from interpopt import corpora, explain, mlp

raw = corpora.generate_covertype_like(20000, seed=0)
ds = ip.prepare_dataset(raw, corpora.COVERTYPE_SCHEMA, balance=False, train_fraction=0.75, seed=1)
X_train, y_train = ds.partition("train")
X_val, y_val = ds.partition("validate")

t0 = time.time()
net = mlp.fit_mlp(X_train, y_train, mlp.MlpHyperparams((100,), "relu", 0.0, 1e-4, epochs=30, seed=0))
print(f"network: validation accuracy {mlp.accuracy(net, X_val, y_val):.4f} ({time.time() - t0:.0f}s)")

linear = mlp.fit_mlp(X_train, y_train, mlp.MlpHyperparams((), "relu", 0.0, 0.0, epochs=30, seed=0))
print(f"linear baseline: {mlp.accuracy(linear, X_val, y_val):.4f}")

predict = lambda Z: mlp.predict_batch(net, Z)
points = list(ip.sample_points(ds, "validate", 40, seed=3).indices)

t0 = time.time()
fraction, explanations = explain.boundary_scan(predict, points, ds, seed=4)
print(f"\nboundary scan over {len(points)} points ({time.time() - t0:.0f}s): "
      f"fraction near the boundary = {fraction:.2f}")

accepted = [e for e in explanations.values() if e.surrogate is not None]
print(f"{len(accepted)} faithful surrogates")
if accepted:
    depths = [e.depth for e in accepted]
    fidelities = [e.fidelity for e in accepted]
    print(f"depths: min {min(depths)}, max {max(depths)}; "
          f"fidelity: min {min(fidelities):.3f}, mean {np.mean(fidelities):.3f}")

scores = explain.local_proxy_scores(explanations, ds)
print(f"\nlocal proxy scores for the network: {scores.as_dict()}")

imp = mlp.gradient_importances(net, ds.features[points])
top = np.argsort(imp)[::-1][:5]
names = [ds.group_of_feature(j).name for j in top]
print(f"top gradient-importance columns: {names}")

# sensitivity of local-region choices: best-model ranks across the grid of
# (variance scale, categorical mixing weight) settings
print("\nregion-hyperparameter sensitivity (small fixture):")
net2 = mlp.fit_mlp(X_train, y_train, mlp.MlpHyperparams((25,), "tanh", 0.0, 0.0, epochs=20, seed=3))
models = {0: predict, 1: (lambda Z: mlp.predict_batch(net2, Z))}
small_cfg = explain.LocalRegionConfig(n_perturbations=1000)
rows = explain.sensitivity_grid(models, points[:6], ds, base_cfg=small_cfg, seed=9)
worst = sorted(rows, key=lambda r: -r["rank"])[:3]
print(f"  {len(rows)} grid cells; largest cross-setting mismatches:")
for r in worst:
    print(f"    {r['proxy']}: vs={r['variance_scale_a']}->{r['variance_scale_b']} "
          f"mix={r['mix_a']}->{r['mix_b']} rank {r['rank']}")
