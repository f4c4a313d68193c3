"""Classical decoding pipelines on preprocessed epochs.

Every pipeline exposes ``fit(epochs)``, ``decision_function(epochs)``, a
``threshold`` for binary decisions and ``to_state`` / ``from_state`` for the
``.scorer.json`` container.
"""

import numpy as np

from ..errors import EmptyModel, InvalidInput, NotFitted
from ..sigproc.features import Windsorizer, moving_avg_decimate
from .linear import (
    LinearScorer,
    fit_blda,
    fit_elastic_net,
    fit_linear_svm,
    fit_shrinkage_lda,
    fit_swlda,
)
from .riemann import TangentSpace, Xdawn, augmented_covariances, fit_xdawn

CLASSICAL_IDS = ("sh-lda", "swlda", "blda", "xdawn-ts-en", "xdawn-ts-svm")


class ClassicalPipeline:
    """Base class; subclasses implement ``_features`` and ``_fit_head``."""

    id = None
    defaults = {}

    def __init__(self, **params):
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise InvalidInput(f"{self.id}: unknown parameters {sorted(unknown)}")
        self.params = {**self.defaults, **params}
        self.scorer = None

    @property
    def threshold(self):
        self._check()
        return self.scorer.threshold

    def _check(self):
        if self.scorer is None:
            raise NotFitted(f"{self.id} pipeline is not fitted")

    def fit(self, e, seed=0):
        self._fit_stages(e)
        X = self._features(e)
        self.scorer = self._fit_head(X, e.labels)
        return self

    def decision_function(self, e):
        self._check()
        return self.scorer.decision_function(self._features(e))

    def _fit_stages(self, e):
        pass

    # ------------------------------------------------------------------ state
    def _stage_state(self):
        return {}

    def _load_stage_state(self, st):
        pass

    def to_state(self):
        self._check()
        return {"pipeline": self.id, "params": self.params, "scorer": self.scorer.to_dict(),
                "stages": self._stage_state()}

    @classmethod
    def from_state(cls, st):
        p = cls(**st.get("params", {}))
        p.scorer = LinearScorer.from_dict(st["scorer"])
        p._load_stage_state(st.get("stages", {}))
        return p


class _Decimated(ClassicalPipeline):
    def _features(self, e):
        return moving_avg_decimate(e, self.params["decimation"])


class ShrinkageLdaPipeline(_Decimated):
    """Moving-average decimation, channel concatenation, shrinkage LDA."""

    id = "sh-lda"
    defaults = {"decimation": 12}

    def _fit_head(self, X, y):
        return fit_shrinkage_lda(X, y)


class SwldaPipeline(_Decimated):
    """Decimation, feature standardisation and stepwise LDA.

    Falls back to shrinkage LDA when stepwise selection admits nothing; the
    fallback is recorded in ``scorer.info``.
    """

    id = "swlda"
    defaults = {"decimation": 12, "p_enter": 0.10, "p_remove": 0.15, "max_terms": 60}

    def _fit_stages(self, e):
        X = moving_avg_decimate(e, self.params["decimation"])
        self.mean_ = X.mean(axis=0)
        sd = X.std(axis=0)
        sd[sd == 0] = 1.0
        self.std_ = sd

    def _features(self, e):
        return (moving_avg_decimate(e, self.params["decimation"]) - self.mean_) / self.std_

    def _fit_head(self, X, y):
        try:
            return fit_swlda(X, y, self.params["p_enter"], self.params["p_remove"], self.params["max_terms"])
        except EmptyModel:
            s = fit_shrinkage_lda(X, y)
            s.info["fallback"] = "sh-lda"
            return s

    def _stage_state(self):
        return {"mean": self.mean_.tolist(), "std": self.std_.tolist()}

    def _load_stage_state(self, st):
        self.mean_ = np.asarray(st["mean"])
        self.std_ = np.asarray(st["std"])


class BldaPipeline(ClassicalPipeline):
    """Windsorising (per-channel percentiles), decimation, Bayesian LDA."""

    id = "blda"
    defaults = {"decimation": 12, "lo_pct": 10.0, "hi_pct": 90.0}

    def _fit_stages(self, e):
        self.wins_ = Windsorizer(self.params["lo_pct"], self.params["hi_pct"]).fit(e)

    def _features(self, e):
        return moving_avg_decimate(self.wins_.transform(e), self.params["decimation"])

    def _fit_head(self, X, y):
        return fit_blda(X, y)

    def _stage_state(self):
        return {"lo": self.wins_.lo_.tolist(), "hi": self.wins_.hi_.tolist()}

    def _load_stage_state(self, st):
        self.wins_ = Windsorizer(self.params["lo_pct"], self.params["hi_pct"])
        self.wins_.lo_ = np.asarray(st["lo"])
        self.wins_.hi_ = np.asarray(st["hi"])


class RiemannPipeline(ClassicalPipeline):
    """xDAWN filters, augmented covariances, tangent space, normaliser, head.

    ``normalizer`` is ``"l1"`` (each feature vector divided by its L1 norm)
    or ``"zscore"`` (per tangent feature, training statistics).
    """

    defaults = {"n_filters": 4, "metric": "riemann", "normalizer": "zscore", "head": "linear_svm",
                "alpha": 1e-3, "l1_ratio": 0.5, "C": 1.0, "svm_epochs": 500}

    def _fit_stages(self, e):
        if self.params["metric"] not in ("riemann", "log-euclidean"):
            raise InvalidInput(f"unknown tangent metric {self.params['metric']!r}")
        if self.params["normalizer"] not in ("l1", "zscore"):
            raise InvalidInput(f"unknown normalizer {self.params['normalizer']!r}")
        self.xdawn_ = fit_xdawn(e, n_filters=self.params["n_filters"])
        self.ts_ = TangentSpace(self.params["metric"]).fit(augmented_covariances(self.xdawn_, e))
        T = self.ts_.transform(augmented_covariances(self.xdawn_, e))
        if self.params["normalizer"] == "zscore":
            self.mean_ = T.mean(axis=0)
            sd = T.std(axis=0)
            sd[sd == 0] = 1.0
            self.std_ = sd

    def _tangent(self, e):
        return self.ts_.transform(augmented_covariances(self.xdawn_, e))

    def _features(self, e):
        T = self._tangent(e)
        if self.params["normalizer"] == "l1":
            n = np.abs(T).sum(axis=1, keepdims=True)
            return T / np.where(n == 0, 1.0, n)
        return (T - self.mean_) / self.std_

    def _fit_head(self, X, y):
        if self.params["head"] == "elastic_net":
            return fit_elastic_net(X, y, self.params["alpha"], self.params["l1_ratio"])
        if self.params["head"] == "linear_svm":
            return fit_linear_svm(X, y, self.params["C"], self.params["svm_epochs"])
        raise InvalidInput(f"unknown head {self.params['head']!r}")

    def _stage_state(self):
        st = {"xdawn": self.xdawn_.to_dict(), "reference": self.ts_.reference.tolist()}
        if self.params["normalizer"] == "zscore":
            st |= {"mean": self.mean_.tolist(), "std": self.std_.tolist()}
        return st

    def _load_stage_state(self, st):
        self.xdawn_ = Xdawn.from_dict(st["xdawn"])
        self.ts_ = TangentSpace(self.params["metric"], np.asarray(st["reference"]))
        if "mean" in st:
            self.mean_ = np.asarray(st["mean"])
            self.std_ = np.asarray(st["std"])


class XdawnTsEnPipeline(RiemannPipeline):
    id = "xdawn-ts-en"
    defaults = {**RiemannPipeline.defaults, "metric": "log-euclidean", "normalizer": "l1", "head": "elastic_net"}


class XdawnTsSvmPipeline(RiemannPipeline):
    id = "xdawn-ts-svm"
    defaults = {**RiemannPipeline.defaults, "metric": "riemann", "normalizer": "zscore", "head": "linear_svm"}


CLASSICAL = {
    cls.id: cls
    for cls in (ShrinkageLdaPipeline, SwldaPipeline, BldaPipeline, XdawnTsEnPipeline, XdawnTsSvmPipeline)
}
