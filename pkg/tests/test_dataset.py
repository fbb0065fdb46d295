from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aistrip.dataset import (
    CLASSES,
    DatasetError,
    Encoder,
    FoldPlan,
    LabelCodec,
    SplitPlan,
    Standardizer,
    grouped_split,
    prepare,
    smote,
    stratified_kfold,
)
from aistrip.features import MODEL_FEATURES
from oracles import min_segment_distance, point_segment_distance


def feature_row(ship_type="Cargo", mmsi=1, **over):
    row = {f: 1.0 for f in MODEL_FEATURES}
    row.update(cargo_type="No additional information", mobile_type="Class A", ship_type=ship_type, mmsi=mmsi)
    row.update(over)
    return row


class TestCodec:
    def test_alphabetical_codes(self):
        codec = LabelCodec(CLASSES)
        assert list(codec.encode(["Cargo", "Fishing", "HSC", "Passenger", "Tanker"])) == [0, 1, 2, 3, 4]

    def test_round_trip(self):
        codec = LabelCodec(["b", "a", "c", "a"])
        assert codec.decode(codec.encode(["c", "a", "b"])) == ["c", "a", "b"]

    def test_unknown(self):
        codec = LabelCodec(["x"])
        with pytest.raises(KeyError):
            codec.encode(["y"])
        assert list(codec.encode(["y"], unknown=1)) == [1]


class TestPrepare:
    def test_other_classes_excluded(self):
        out = prepare([feature_row("Military"), feature_row("Cargo")])
        assert [r["ship_type"] for r in out.rows] == ["Cargo"] and out.dropped_class == 1

    def test_missing_cargo_dropped(self):
        out = prepare([feature_row(cargo_type=None), feature_row()])
        assert len(out.rows) == 1 and out.dropped_missing == 1

    def test_empty_is_fatal(self):
        with pytest.raises(DatasetError):
            prepare([feature_row("Pleasure")])

    def test_encoder_matrix_shape(self):
        rows = prepare([feature_row(), feature_row(cargo_type="Hazard A")]).rows
        X = Encoder.fit(rows).matrix(rows)
        assert X.shape == (2, 31)
        j = MODEL_FEATURES.index("cargo_type")
        assert list(X[:, j]) == [1.0, 0.0]


class TestStandardizer:
    def test_fit_set_moments(self):
        X = np.random.default_rng(0).normal(5, 3, size=(200, 4))
        Z = Standardizer.fit(X).transform(X)
        assert np.allclose(Z.mean(0), 0, atol=1e-9) and np.allclose(Z.std(0), 1, atol=1e-9)

    def test_constant_feature(self):
        X = np.column_stack([np.arange(5.0), np.full(5, 7.0)])
        assert np.all(Standardizer.fit(X).transform(X)[:, 1] == 0)

    def test_uses_fit_moments(self):
        train = np.array([[0.0], [2.0]])
        s = Standardizer.fit(train)
        assert s.transform(np.array([[4.0]]))[0, 0] == pytest.approx(3.0)

    def test_round_trip(self):
        X = np.random.default_rng(1).normal(size=(50, 3)) * [1, 10, 100]
        s = Standardizer.fit(X)
        assert np.allclose(s.inverse_transform(s.transform(X)), X, atol=1e-9)
        s2 = Standardizer.from_dict(s.to_dict())
        assert np.array_equal(s2.transform(X), s.transform(X))


class TestGroupedSplit:
    def test_four_equal_vessels(self):
        plan = grouped_split(np.repeat([11, 22, 33, 44], 25), 0.2, seed=3)
        assert len(plan.test_mmsi) == 1 and len(plan.test_idx) == 25

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10_000))
    def test_disjoint_for_any_seed(self, seed):
        rng = np.random.default_rng(5)
        mmsi = rng.integers(100, 160, size=400)
        plan = grouped_split(mmsi, 0.2, seed)
        assert not set(plan.train_mmsi) & set(plan.test_mmsi)
        assert set(mmsi[plan.train_idx]).isdisjoint(mmsi[plan.test_idx])
        assert sorted(np.concatenate([plan.train_idx, plan.test_idx])) == list(range(400))
        assert abs(len(plan.test_idx) / 400 - 0.2) <= 0.05

    def test_dominant_vessel_fatal(self):
        with pytest.raises(DatasetError):
            grouped_split([1] * 90 + [2] * 10, 0.2)

    def test_deterministic_and_serializable(self):
        mmsi = np.repeat(np.arange(30), 3)
        a, b = grouped_split(mmsi, seed=9), grouped_split(mmsi, seed=9)
        assert a.test_mmsi == b.test_mmsi
        c = SplitPlan.from_dict(a.to_dict())
        assert np.array_equal(c.test_idx, a.test_idx)


class TestStratifiedKFold:
    def test_one_of_each_per_fold(self):
        plan = stratified_kfold([0] * 5 + [1] * 5, k=5, seed=0)
        y = np.array([0] * 5 + [1] * 5)
        for fold in plan.folds:
            assert sorted(y[fold]) == [0, 1]

    def test_partition(self):
        y = np.random.default_rng(2).integers(0, 3, 57)
        plan = stratified_kfold(y, 5, 1)
        allidx = np.concatenate(plan.folds)
        assert sorted(allidx) == list(range(57))
        for tr, va in plan:
            assert not set(tr) & set(va) and len(tr) + len(va) == 57

    def test_within_one_of_proportional_100_label_sets(self):
        rng = np.random.default_rng(11)
        for trial in range(100):
            y = rng.choice(5, size=rng.integers(40, 300), p=[0.5, 0.2, 0.15, 0.1, 0.05])
            for c, n in Counter(y.tolist()).items():
                if n < 5:
                    y[y == c] = 0
            plan = stratified_kfold(y, 5, trial)
            for c, n in Counter(y.tolist()).items():
                for fold in plan.folds:
                    assert abs(np.sum(y[fold] == c) - n / 5) <= 1

    def test_small_class_fatal(self):
        with pytest.raises(DatasetError, match="'b'"):
            stratified_kfold(["a"] * 10 + ["b"] * 3, 5)

    def test_serialization(self):
        plan = stratified_kfold([0, 1] * 10, 5, 3)
        back = FoldPlan.from_dict(plan.to_dict())
        assert all(np.array_equal(x, y) for x, y in zip(back.folds, plan.folds))


class TestSmote:
    def test_balances_799_48(self):
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(0, 1, (799, 3)), rng.normal(4, 1, (48, 3))])
        y = np.array([0] * 799 + [1] * 48)
        out = smote(X, y, seed=1)
        assert Counter(out.y.tolist()) == {0: 799, 1: 799}
        assert np.array_equal(out.X[:847], X) and np.array_equal(out.y[:847], y)
        assert out.synthetic.sum() == 751
        minority = X[y == 1]
        for p in out.X[out.synthetic]:
            assert min_segment_distance(p, minority) < 1e-9

    def test_segment_oracle_brute_force(self):
        rng = np.random.default_rng(4)
        X = np.vstack([rng.normal(size=(60, 2)), rng.normal(size=(20, 2)) + 3])
        y = np.array([0] * 60 + [1] * 20)
        out = smote(X, y, k_neighbors=5, seed=2)
        cls1 = X[y == 1]
        for p in out.X[out.synthetic]:
            best = min(point_segment_distance(p, cls1[i], cls1[j])
                       for i in range(20) for j in range(20) if i != j)
            assert best < 1e-9

    def test_balanced_is_noop(self):
        X = np.arange(12.0).reshape(6, 2)
        y = np.array([0, 1, 2, 0, 1, 2])
        out = smote(X, y)
        assert np.array_equal(out.X, X) and np.array_equal(out.y, y) and not out.synthetic.any()

    def test_singleton_class_fatal(self):
        with pytest.raises(DatasetError):
            smote(np.zeros((4, 2)), np.array([0, 0, 0, 1]))

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        X, y = rng.normal(size=(30, 2)), np.array([0] * 25 + [1] * 5)
        a, b = smote(X, y, seed=5), smote(X, y, seed=5)
        assert np.array_equal(a.X, b.X)
        assert not np.array_equal(a.X, smote(X, y, seed=6).X)
