import json

import numpy as np
import pytest

from avgsmooth.extension import (
    ExtensionModel,
    fit_extension,
    predict,
    predict_from_distances,
    predict_many,
)
from avgsmooth.metric import FiniteMetric
from avgsmooth.smoothness import (
    LabeledSample,
    empirical_smoothness,
    holder_seminorm,
    slope_table,
)


def line_sample(points, labels):
    return LabeledSample(
        space=FiniteMetric.from_points(points), labels=np.asarray(labels, dtype=float)
    )


def two_point_model(beta=1.0, gamma=0.5):
    return ExtensionModel(
        beta=beta,
        gamma=gamma,
        metric_kind="euclidean",
        net_points=np.array([[0.0], [1.0]]),
        net_labels=np.array([0.0, 1.0]),
    )


class TestFit:
    def test_three_point_hand_simulation(self):
        s = line_sample([0.0, 0.5, 1.0], [0.0, 0.5, 1.0])
        model = fit_extension(s, 1.0, 0.3)
        assert model.trimmed_count == 0
        assert np.array_equal(model.net_points.ravel(), [0.0, 0.5, 1.0])
        assert np.array_equal(model.net_labels, [0.0, 0.5, 1.0])

    def test_single_point(self):
        s = line_sample([0.4], [0.7])
        model = fit_extension(s, 1.0, 0.5)
        assert model.net_size == 1
        assert predict(model, [0.0]) == 0.7
        assert predict(model, [0.9]) == 0.7

    def test_spike_point_trimmed(self):
        # ten points; index 5 carries a slope near 10, everything else <= 2
        x = np.arange(10) / 10.0
        v = x * 0.5
        v[5] += 0.4
        s = line_sample(x, v)
        model = fit_extension(s, 1.0, 0.1)
        assert model.trimmed_count == 1
        assert 0.5 not in model.net_points.ravel()

    def test_net_scale_uses_beta_root(self):
        # 21 points spaced 0.05, constant labels, gamma=0.2 trims floor(4.2)=4
        s = line_sample(np.linspace(0, 1, 21), np.full(21, 0.5))
        # scale 0.2 thins the retained points to 0, .2, .4, .6 (the point at
        # 0.8 sits 0.1999... from 0.6000...1 and the comparison is float-exact)
        coarse = fit_extension(s, 1.0, 0.2)
        fine = fit_extension(s, 0.5, 0.2)  # scale 0.04 < spacing: all 17 kept
        assert coarse.trimmed_count == fine.trimmed_count == 4
        assert coarse.net_size == 4
        assert fine.net_size == 17

    def test_gamma_trimming_everything_is_error(self):
        s = line_sample([0.0, 1.0], [0.0, 1.0])
        with pytest.raises(ValueError, match="trims the whole sample"):
            fit_extension(s, 1.0, 1.0)

    def test_gamma_must_be_positive(self):
        s = line_sample([0.0, 1.0], [0.0, 1.0])
        with pytest.raises(ValueError, match="gamma"):
            fit_extension(s, 1.0, 0.0)


class TestPredict:
    def test_midpoint(self):
        assert predict(two_point_model(), [0.5]) == 0.5

    def test_net_point_returns_label(self):
        model = two_point_model()
        assert predict(model, [0.0]) == 0.0
        assert predict(model, [1.0]) == 1.0

    def test_extrapolation(self):
        # pair (0, 1): ratio 1/(2+1); f(2) = 0 + 2/3 * 1
        assert predict(two_point_model(), [2.0]) == pytest.approx(2 / 3, abs=1e-15)

    def test_matrix_backed_model(self):
        D = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])
        s = LabeledSample(
            space=FiniteMetric.from_matrix(D), labels=np.array([0.0, 0.5, 1.0])
        )
        model = fit_extension(s, 1.0, 0.5)
        with pytest.raises(ValueError, match="matrix-backed"):
            predict(model, [0.0])
        got = predict_from_distances(model, D[1][list(model.net_points)])
        assert got == 0.5

    def test_predict_many_matches_scalar(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            n = int(rng.integers(2, 25))
            pts = rng.random((n, 2))
            s = LabeledSample(
                space=FiniteMetric(kind="euclidean", points=pts), labels=rng.random(n)
            )
            model = fit_extension(s, float(rng.uniform(0.3, 1.0)), 0.2)
            Q = np.vstack([rng.random((15, 2)), model.net_points])
            batch = predict_many(model, Q)
            single = np.array([predict(model, q) for q in Q])
            assert np.array_equal(batch, single)

    def test_empty_batch(self):
        assert predict_many(two_point_model(), np.zeros((0, 1))).shape == (0,)


class TestInvariants:
    def test_interpolation_exact_on_random_instances(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            n = int(rng.integers(1, 30))
            s = LabeledSample(
                space=FiniteMetric(kind="euclidean", points=rng.random((n, 1))),
                labels=rng.random(n),
            )
            model = fit_extension(s, float(rng.uniform(0.2, 1.0)), float(rng.uniform(0.05, 0.5)))
            for p, l in zip(model.net_points, model.net_labels):
                assert predict(model, p) == l

    def test_range(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            n = int(rng.integers(2, 20))
            s = LabeledSample(
                space=FiniteMetric(kind="linf", points=rng.random((n, 3))),
                labels=rng.random(n),
            )
            model = fit_extension(s, 0.8, 0.2)
            preds = predict_many(model, rng.random((50, 3)) * 3 - 1)
            assert np.all(preds >= 0.0)
            assert np.all(preds <= 1.0)

    def test_holder_control_on_query_grids(self):
        # seminorm of the prediction on any finite grid never exceeds the
        # seminorm of the net labels (tolerance 1e-9)
        rng = np.random.default_rng(31)
        for _ in range(25):
            n = int(rng.integers(3, 25))
            beta = float(rng.uniform(0.3, 1.0))
            s = LabeledSample(
                space=FiniteMetric(kind="euclidean", points=rng.random((n, 1))),
                labels=rng.random(n),
            )
            model = fit_extension(s, beta, float(rng.uniform(0.05, 0.4)))
            if model.net_size < 2:
                continue
            net_space = FiniteMetric(kind="euclidean", points=model.net_points)
            sem_net = holder_seminorm(net_space, model.net_labels, beta)
            grid = np.vstack([rng.random((40, 1)), model.net_points])
            vals = predict_many(model, grid)
            gspace = FiniteMetric(kind="euclidean", points=grid)
            sem_grid = np.nanmax(slope_table(gspace, vals, beta))
            assert sem_grid <= sem_net + 1e-9

    def test_empirical_risk_inflation_bound(self):
        # L_S(f) <= L_S(fhat) + gamma * (1 + 2 * Lambda_hat), deterministically
        rng = np.random.default_rng(41)
        for _ in range(25):
            n = int(rng.integers(2, 40))
            pts = rng.random((n, 1))
            fhat = rng.random(n)
            y = rng.random(n)
            beta = float(rng.uniform(0.4, 1.0))
            gamma = float(rng.uniform(0.02, 0.5))
            space = FiniteMetric(kind="euclidean", points=pts)
            model = fit_extension(LabeledSample(space=space, labels=fhat), beta, gamma)
            lam = empirical_smoothness(space, fhat, beta).empirical_avg
            ls_f = float(np.mean(np.abs(predict_many(model, pts) - y)))
            ls_fhat = float(np.mean(np.abs(fhat - y)))
            assert ls_f <= ls_fhat + gamma * (1.0 + 2.0 * lam) + 1e-12


class TestSerialization:
    def test_round_trip_value_exact(self, tmp_path):
        rng = np.random.default_rng(5)
        s = LabeledSample(
            space=FiniteMetric(kind="euclidean", points=rng.random((12, 2))),
            labels=rng.random(12),
        )
        model = fit_extension(s, 0.7, 0.15)
        path = tmp_path / "model.json"
        model.save(path)
        back = ExtensionModel.load(path)
        assert back.beta == model.beta
        assert back.gamma == model.gamma
        assert np.array_equal(back.net_points, model.net_points)
        assert np.array_equal(back.net_labels, model.net_labels)
        q = rng.random((5, 2))
        assert np.array_equal(predict_many(back, q), predict_many(model, q))

    def test_schema_fields(self, tmp_path):
        model = two_point_model()
        path = tmp_path / "model.json"
        model.save(path)
        data = json.loads(path.read_text())
        assert set(data) >= {"beta", "gamma", "net"}
        assert data["net"][0].keys() == {"point", "label"}

    def test_labels_validated(self):
        with pytest.raises(ValueError, match="0, 1"):
            ExtensionModel(
                beta=1.0,
                gamma=0.1,
                metric_kind="euclidean",
                net_points=np.array([[0.0]]),
                net_labels=np.array([1.5]),
            )
