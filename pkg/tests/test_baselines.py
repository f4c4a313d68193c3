import json
import warnings

import numpy as np
import pytest

from erpdeck.baselines.linear import (
    LinearScorer,
    fit_blda,
    fit_elastic_net,
    fit_linear_svm,
    fit_shrinkage_lda,
    fit_swlda,
    ledoit_wolf,
)
from erpdeck.baselines.pipelines import CLASSICAL, CLASSICAL_IDS
from erpdeck.baselines.riemann import (
    TangentSpace,
    airm_distance,
    augmented_covariances,
    fit_xdawn,
    riemann_mean,
    tangent_vectors,
    ts_features,
    unupper_vec,
    upper_vec,
)
from erpdeck.errors import DegenerateLabels, EmptyModel, InvalidInput, NotFitted
from erpdeck.metrics import auc, decide_command
from erpdeck.onlinesim import SessionPlan, calibration_epochs, online_epochs
from erpdeck.tensorkit import spd_expm, spd_sqrtm
from conftest import random_spd


def blobs(seed, n=200, d=4, sep=4.0):
    rng = np.random.default_rng(seed)
    y = np.r_[np.zeros(n // 2), np.ones(n - n // 2)].astype(int)
    X = rng.normal(size=(n, d))
    X[y == 1, 0] += sep
    return X, y


HEADS = {
    "sh-lda": fit_shrinkage_lda,
    "blda": fit_blda,
    "elastic-net": fit_elastic_net,
    "linear-svm": fit_linear_svm,
    "swlda": fit_swlda,
}


class TestHeads:
    @pytest.mark.parametrize("name", sorted(HEADS))
    def test_blobs_auc(self, name):
        X, y = blobs(0)
        s = HEADS[name](X, y)
        assert auc(s.decision_function(X), y) > 0.99

    @pytest.mark.parametrize("name", ["sh-lda", "blda", "linear-svm", "swlda"])
    def test_single_class(self, name):
        X, _ = blobs(0)
        with pytest.raises(DegenerateLabels):
            HEADS[name](X, np.ones(len(X), int))

    def test_scorer_validation(self):
        with pytest.raises(InvalidInput):
            LinearScorer(np.array([np.nan]), 0.0)
        s = LinearScorer(np.ones(3), 0.5)
        with pytest.raises(InvalidInput):
            s.decision_function(np.ones((2, 4)))
        assert LinearScorer.from_dict(json.loads(json.dumps(s.to_dict()))).b == 0.5


class TestShrinkageLda:
    def test_gamma_one_mean_difference(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(400, 5))
        y = rng.integers(0, 2, 400)
        X[y == 1] += np.array([1.0, -2.0, 0.5, 0.0, 3.0])
        s = fit_shrinkage_lda(X, y, gamma=1.0)
        dmu = X[y == 1].mean(0) - X[y == 0].mean(0)
        cos = s.w @ dmu / np.linalg.norm(s.w) / np.linalg.norm(dmu)
        assert cos == pytest.approx(1.0, abs=1e-12)

    def test_fewer_trials_than_features(self):
        rng = np.random.default_rng(2)
        X, y = rng.normal(size=(20, 100)), np.r_[np.zeros(10), np.ones(10)]
        s = fit_shrinkage_lda(X, y)
        assert np.all(np.isfinite(s.w)) and 0 < s.info["gamma"] <= 1

    def test_gamma_zero_is_plain_lda(self):
        X, y = blobs(3, n=300, d=6)
        mu1, mu0 = X[y == 1].mean(0), X[y == 0].mean(0)
        Xc = np.vstack([X[y == 1] - mu1, X[y == 0] - mu0])
        w = np.linalg.inv(Xc.T @ Xc / len(X)) @ (mu1 - mu0)
        assert np.max(np.abs(fit_shrinkage_lda(X, y, gamma=0.0).w - w)) < 1e-8 * np.max(np.abs(w))

    def test_ledoit_wolf_matches_sklearn(self):
        from sklearn.covariance import ledoit_wolf as sk_lw

        Xc = np.random.default_rng(4).normal(size=(30, 12)) @ np.diag(np.linspace(1, 3, 12))
        Xc -= Xc.mean(0)
        cov, gamma, _ = ledoit_wolf(Xc)
        ref_cov, ref_gamma = sk_lw(Xc, assume_centered=True)
        assert gamma == pytest.approx(ref_gamma, rel=1e-10)
        assert np.allclose(cov, ref_cov, rtol=1e-10, atol=1e-12)

    def test_invalid_gamma(self):
        X, y = blobs(0)
        with pytest.raises(InvalidInput):
            fit_shrinkage_lda(X, y, gamma=1.5)


class TestSwlda:
    def test_planted_features_recovered(self):
        hits = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            y = rng.integers(0, 2, 300)
            X = rng.normal(size=(300, 20))
            X[:, [2, 7, 11]] += 1.0 * y[:, None]
            s = fit_swlda(X, y)
            hits += {2, 7, 11} <= set(s.info["selected"])
            assert np.all(s.w[np.setdiff1d(np.arange(20), s.info["selected"])] == 0)
        assert hits >= 95

    def test_noise_mostly_empty(self):
        empty = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            try:
                fit_swlda(rng.normal(size=(100, 2)), rng.integers(0, 2, 100))
            except EmptyModel:
                empty += 1
        assert empty > 50

    def test_duplicate_columns(self):
        rng = np.random.default_rng(5)
        y = rng.integers(0, 2, 200)
        X = rng.normal(size=(200, 6))
        X[:, 1] += 1.5 * y
        X = np.column_stack([X, X[:, 1]])
        sel = fit_swlda(X, y).info["selected"]
        assert not ({1, 6} <= set(sel))

    def test_invalid_thresholds(self):
        X, y = blobs(0)
        with pytest.raises(InvalidInput):
            fit_swlda(X, y, p_enter=0.2, p_remove=0.1)


class TestBlda:
    def test_beta_monotone_noiseless(self):
        rng = np.random.default_rng(6)
        y = rng.integers(0, 2, 200)
        X = rng.normal(size=(200, 5))
        X[:, 0] = 2.0 * y - 1.0  # targets are exactly linear in the features
        X[:, 1] += X[:, 0]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            s = fit_blda(X, y, max_iter=50)
        b = np.array(s.info["beta_trace"])
        # beyond ~1e20 the residual is rounding noise and beta no longer resolves
        resolved = b[: np.argmax(b > 1e20) + 1]
        assert len(resolved) >= 3 and np.all(np.diff(resolved) > 0)
        assert b.max() > 1e20

    def test_huge_frozen_alpha(self):
        X, y = blobs(7)
        s = fit_blda(X, y, alpha0=1e12, freeze_alpha=True)
        assert np.max(np.abs(s.w)) < 1e-6

    def test_convergence_flag_and_warning(self):
        X, y = blobs(8, sep=1.0)
        assert fit_blda(X, y).info["converged"]
        with pytest.warns(RuntimeWarning):
            s = fit_blda(X, y, max_iter=1)
        assert not s.info["converged"] and np.all(np.isfinite(s.w))


class TestElasticNetSvm:
    def test_alpha_zero_is_ols(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(200, 5))
        t = X @ np.array([1.0, -0.5, 2.0, 0.0, 0.3]) + 0.7 + 0.1 * rng.normal(size=200)
        s = fit_elastic_net(X, t, alpha=0.0, tol=1e-12)
        A = np.column_stack([np.ones(200), X])
        coef = np.linalg.lstsq(A, t, rcond=None)[0]
        assert np.max(np.abs(s.w - coef[1:])) < 1e-6 and abs(s.b - coef[0]) < 1e-6

    def test_lasso_shrinks_to_zero(self):
        X, y = blobs(10)
        assert np.all(fit_elastic_net(X, y, alpha=100.0, l1_ratio=1.0).w == 0)

    def test_matches_sklearn(self):
        from sklearn.linear_model import ElasticNet

        X, y = blobs(11, d=8, sep=1.0)
        t = 2.0 * y - 1.0
        ref = ElasticNet(alpha=0.05, l1_ratio=0.5, tol=1e-12, max_iter=100_000).fit(X, t)
        s = fit_elastic_net(X, y, alpha=0.05, l1_ratio=0.5, tol=1e-10)
        assert np.allclose(s.w, ref.coef_, atol=1e-7) and s.b == pytest.approx(ref.intercept_, abs=1e-7)

    def test_svm_deterministic_and_objective(self):
        X, y = blobs(12, sep=1.5)
        a, b = fit_linear_svm(X, y), fit_linear_svm(X, y)
        assert np.array_equal(a.w, b.w)
        short = fit_linear_svm(X, y, epochs=5)
        assert a.info["objective"] <= short.info["objective"]

    def test_invalid(self):
        X, y = blobs(0)
        with pytest.raises(InvalidInput):
            fit_linear_svm(X, y, C=0)
        with pytest.raises(InvalidInput):
            fit_elastic_net(X, y, alpha=-1)


def planted_epochs(seed, n=300, C=8, T=64, amp=1.0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=C)
    a /= np.linalg.norm(a)
    s = np.sin(np.linspace(0, np.pi, T))
    y = np.zeros(n, int)
    y[rng.permutation(n)[: n // 6]] = 1
    x = rng.normal(size=(n, C, T)) + amp * y[:, None, None] * np.outer(a, s)[None]
    return x, y, a


class TestXdawn:
    def test_planted_direction(self):
        x, y, a = planted_epochs(0)
        f = fit_xdawn(x, y).filters[0]
        assert abs(f @ a) / np.linalg.norm(f) > 0.95

    def test_generalised_eigen_residual_and_orthonormality(self):
        x, y, _ = planted_epochs(1)
        xd = fit_xdawn(x, y)
        S, N = xd.signal_covs[0], xd.noise_cov
        for v, lam in zip(xd.filters, xd.eigvals[0]):
            assert np.linalg.norm(S @ v - lam * N @ v) < 1e-8 * np.linalg.norm(S) * np.linalg.norm(v)
        F = xd.target_filters()
        assert np.max(np.abs(F @ N @ F.T - np.eye(4))) < 1e-6

    def test_energy_ratio_enhanced(self):
        x, y, _ = planted_epochs(2, amp=0.5)
        xd = fit_xdawn(x, y)
        S, N = xd.signal_covs[0], xd.noise_cov
        v = xd.filters[0]
        assert (v @ S @ v) / (v @ N @ v) > np.max(np.diag(S) / np.diag(N))

    def test_square_filters(self):
        x, y, _ = planted_epochs(3)
        F = fit_xdawn(x, y, n_filters=8).filters
        assert F.shape == (8, 8) and abs(np.linalg.det(F)) > 1e-12

    def test_errors(self):
        x, y, _ = planted_epochs(4)
        with pytest.raises(DegenerateLabels):
            fit_xdawn(x, np.zeros_like(y))
        with pytest.raises(InvalidInput):
            fit_xdawn(x, y, n_filters=9)

    def test_augmented_shape(self):
        x, y, _ = planted_epochs(5)
        xd = fit_xdawn(x, y)
        covs = augmented_covariances(xd, x)
        assert covs.shape == (300, 8, 8)
        ts = TangentSpace().fit(covs)
        assert ts_features(x, xd, ts).shape == (300, 36)


class TestTangentSpace:
    def test_zero_at_reference(self):
        G = random_spd(np.random.default_rng(0), 5)
        for metric in ("riemann", "log-euclidean"):
            # the eigenvalue floor perturbs the whitening by ~1e-10 * cond
            assert np.max(np.abs(tangent_vectors(G[None], G, metric))) < 1e-8

    @pytest.mark.parametrize("m", [2, 3, 8])
    def test_length(self, m):
        assert tangent_vectors(np.eye(m)[None], np.eye(m)).shape == (1, m * (m + 1) // 2)

    def test_vectorisation_isometry(self):
        S = random_spd(np.random.default_rng(1), 4)
        v = upper_vec(S)
        assert np.linalg.norm(v) == pytest.approx(np.linalg.norm(S))
        assert np.allclose(unupper_vec(v, 4), S)

    def test_distance_preserved_near_reference(self):
        rng = np.random.default_rng(2)
        G = random_spd(rng, 6)
        h = spd_sqrtm(G)
        for _ in range(10):
            A, B = (h @ spd_expm(0.05 * (lambda z: z + z.T)(rng.normal(size=(6, 6)))) @ h for _ in range(2))
            ts = tangent_vectors(np.stack([A, B]), G)
            d = np.linalg.norm(ts[0] - ts[1])
            assert abs(d - airm_distance(A, B)) <= 0.05 * airm_distance(A, B)

    def test_riemann_mean_fixed_point(self):
        rng = np.random.default_rng(3)
        covs = np.stack([random_spd(rng, 4) for _ in range(10)])
        G = riemann_mean(covs)
        assert np.linalg.norm(tangent_vectors(covs, G).mean(0)) < 1e-6

    def test_unknown_metric(self):
        with pytest.raises(InvalidInput):
            TangentSpace("euclid").fit(np.eye(3)[None])


@pytest.fixture(scope="module")
def sessions():
    plan = SessionPlan(snr="high", seed=3)
    return calibration_epochs(plan), online_epochs(plan)


class TestPipelines:
    @pytest.mark.parametrize("pid", CLASSICAL_IDS)
    def test_fit_score_roundtrip(self, pid, sessions):
        cal, onl = sessions
        p = CLASSICAL[pid]()
        with pytest.raises(NotFitted):
            p.decision_function(onl)
        p.fit(cal)
        s = p.decision_function(onl)
        assert auc(s, onl.labels) > 0.9
        q = CLASSICAL[pid].from_state(json.loads(json.dumps(p.to_state())))
        assert np.allclose(q.decision_function(onl), s, rtol=1e-12, atol=1e-12)
        assert q.threshold == p.threshold

    def test_decisions_invariant_to_monotone_maps(self, sessions):
        cal, onl = sessions
        s = CLASSICAL["sh-lda"]().fit(cal).decision_function(onl)
        for b in np.unique(onl.blocks):
            m = onl.blocks == b
            c = decide_command(s[m], onl.command_codes[m])
            assert decide_command(3.0 * s[m] - 2.0, onl.command_codes[m]) == c
            assert decide_command(np.arctan(s[m]), onl.command_codes[m]) == c

    def test_unknown_param(self):
        with pytest.raises(InvalidInput):
            CLASSICAL["sh-lda"](bogus=1)
