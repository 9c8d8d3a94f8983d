"""Grow a zoo of accurate decision trees and look at its diversity.

Randomized hyperparameters plus validation-guided pruning produce hundreds of
distinct trees above the accuracy threshold; the four interpretability
proxies disagree about which of them is "simplest".
"""

import time

import numpy as np

import interpopt as ip
from interpopt import corpora, zoo
from interpopt.trees import PROXIES

raw = corpora.generate_mushroom_like(8124, seed=0)
ds = ip.prepare_dataset(raw, corpora.MUSHROOM_SCHEMA, balance=True, train_fraction=0.8, seed=1)

params = zoo.SilfParams.for_threshold(0.95)
print(f"SILF: epsilon={params.epsilon}, beta={params.beta}, c={params.c} "
      f"-> accuracy threshold {params.accuracy_threshold}")

t0 = time.time()
z = zoo.generate_zoo(ds, "tree", count=500, silf_params=params, seed=7, restarts=500)
print(f"\n{len(z)} distinct survivors from 500 restarts ({time.time() - t0:.0f}s)")

accs = np.array([r.accuracy for r in z.records])
print(f"validation accuracy: min {accs.min():.4f}, median {np.median(accs):.4f}, "
      f"max {accs.max():.4f} ({(accs == 1.0).sum()} perfect)")

print("\nproxy spread across the zoo (min / median / max):")
for proxy in PROXIES:
    values = np.array(list(z.proxy_scores(proxy).values()))
    print(f"  {proxy:24s} {values.min():7.2f} {np.median(values):8.2f} {values.max():8.2f}")

print("\nbest model under each proxy:")
for proxy in PROXIES:
    scores = z.proxy_scores(proxy)
    best = min(scores, key=scores.get)
    rec = z.record(best)
    print(f"  {proxy:24s} -> model {best:3d} (acc {rec.accuracy:.4f}) {rec.proxies.as_dict()}")
