import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interpopt import zoo
from interpopt.zoo import SilfParams, ZooGenerationError, likelihood, soft_insensitive_loss


class TestSilf:
    def test_flat_branch(self):
        assert soft_insensitive_loss(0.05, 0.1, 0.5) == 0.0

    def test_quadratic_branch_hand_value(self):
        # (0.12 - 0.05)^2 / (4 * 0.5 * 0.1) = 0.0049 / 0.2
        assert abs(soft_insensitive_loss(0.12, 0.1, 0.5) - 0.0245) < 1e-12

    def test_linear_branch_hand_value(self):
        assert abs(soft_insensitive_loss(0.30, 0.1, 0.5) - 0.20) < 1e-12

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            soft_insensitive_loss(-0.01, 0.1, 0.5)

    @given(
        eps=st.floats(0.01, 0.5),
        beta=st.floats(0.05, 1.0),
    )
    @settings(max_examples=100)
    def test_continuity_at_branch_boundaries(self, eps, beta):
        lo, hi = (1 - beta) * eps, (1 + beta) * eps
        for y in (lo, hi):
            below = soft_insensitive_loss(max(y - 1e-9, 0), eps, beta)
            at = soft_insensitive_loss(y, eps, beta)
            above = soft_insensitive_loss(y + 1e-9, eps, beta)
            assert abs(at - below) < 1e-8
            assert abs(above - at) < 1e-8

    def test_exact_boundary_values_agree(self):
        eps, beta = 0.1, 0.5
        lo, hi = (1 - beta) * eps, (1 + beta) * eps
        assert abs(soft_insensitive_loss(lo, eps, beta) - 0.0) < 1e-12
        assert abs(soft_insensitive_loss(hi, eps, beta) - (hi - eps)) < 1e-12


class TestLikelihood:
    def test_above_threshold_is_one(self):
        p = SilfParams.for_threshold(0.95)
        assert likelihood(0.97, p) == 1.0
        assert likelihood(p.accuracy_threshold, p) == 1.0

    def test_strictly_below_one_under_threshold(self):
        p = SilfParams.for_threshold(0.95)
        for acc in (0.9499, 0.9, 0.5, 0.0):
            assert likelihood(acc, p) < 1.0

    def test_accuracy_zero_hand_value(self):
        p = SilfParams(epsilon=0.1, beta=0.5, c=100.0)
        # SILF(1.0) = 1 - 0.1 = 0.9, so exp(-90)
        assert abs(likelihood(0.0, p) - math.exp(-90.0)) < 1e-52
        assert likelihood(0.0, p) == pytest.approx(8.194e-40, rel=1e-3)

    @given(a1=st.floats(0, 1), a2=st.floats(0, 1))
    @settings(max_examples=100)
    def test_monotone_in_accuracy(self, a1, a2):
        p = SilfParams.for_threshold(0.9)
        lo, hi = sorted((a1, a2))
        assert likelihood(lo, p) <= likelihood(hi, p)

    def test_threshold_identity(self):
        for threshold in (0.75, 0.8, 0.9, 0.95):
            p = SilfParams.for_threshold(threshold)
            assert abs(p.accuracy_threshold - threshold) < 1e-12

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            SilfParams(epsilon=0.0, beta=0.5, c=1.0)
        with pytest.raises(ValueError):
            SilfParams(epsilon=0.1, beta=1.5, c=1.0)


class TestGenerateZoo:
    def test_unreachable_threshold_errors(self, toy_mixed_dataset):
        impossible = SilfParams(epsilon=0.02, beta=0.5, c=100.0)  # threshold 0.99
        with pytest.raises(ZooGenerationError, match="best seen"):
            zoo.generate_zoo(toy_mixed_dataset, "tree", 5, impossible, seed=0, restarts=8)

    def test_all_survivors_clear_threshold(self, toy_mixed_dataset):
        params = SilfParams.for_threshold(0.6)
        z = zoo.generate_zoo(toy_mixed_dataset, "tree", 20, params, seed=0, restarts=60)
        assert len(z) >= 1
        assert min(r.accuracy for r in z.records) >= 0.6

    def test_deterministic(self, toy_mixed_dataset):
        params = SilfParams.for_threshold(0.6)
        a = zoo.generate_zoo(toy_mixed_dataset, "tree", 10, params, seed=3, restarts=30)
        b = zoo.generate_zoo(toy_mixed_dataset, "tree", 10, params, seed=3, restarts=30)
        assert [r.id for r in a.records] == [r.id for r in b.records]
        for ra, rb in zip(a.records, b.records):
            assert ra.accuracy == rb.accuracy
            assert np.array_equal(ra.importances, rb.importances)
            assert ra.proxies == rb.proxies

    def test_no_duplicate_signatures(self, mushroom_zoo):
        seen = set()
        for r in mushroom_zoo.records:
            sig = (r.importances.tobytes(), tuple(r.proxies.as_dict().values()))
            assert sig not in seen
            seen.add(sig)

    def test_ids_unique_and_ordered(self, mushroom_zoo):
        ids = [r.id for r in mushroom_zoo.records]
        assert ids == sorted(set(ids))

    def test_likelihood_stored_flat(self, mushroom_zoo):
        assert all(r.silf_likelihood == 1.0 for r in mushroom_zoo.records)


class TestZooPersistence:
    def test_round_trip(self, toy_mixed_dataset, tmp_path):
        params = SilfParams.for_threshold(0.6)
        z = zoo.generate_zoo(toy_mixed_dataset, "tree", 8, params, seed=1, restarts=30)
        zoo.save_zoo(z, tmp_path / "zoo")
        loaded = zoo.load_zoo(tmp_path / "zoo")
        assert len(loaded) == len(z)
        assert loaded.model_class == "tree"
        assert loaded.eval_points.indices == z.eval_points.indices
        for ra, rb in zip(z.records, loaded.records):
            assert ra.id == rb.id
            assert ra.accuracy == rb.accuracy
            np.testing.assert_allclose(ra.importances, rb.importances)
            assert ra.proxies.as_dict() == pytest.approx(rb.proxies.as_dict())
        assert np.array_equal(loaded.dataset.features, z.dataset.features)
