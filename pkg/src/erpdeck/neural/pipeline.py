"""Network decoding pipeline: per-feature z-score, then a trained network."""

import os

import numpy as np

from ..errors import InvalidInput, NotFitted
from ..rng import derive_seed
from ..sigproc.features import ZScore
from .architectures import ARCHITECTURES, build_architecture
from .serialize import load_model, model_paths, save_weights
from .train import TrainConfig, train


class NeuralPipeline:
    """Z-score every (channel, sample) with training statistics, train ``arch``.

    Scores are sigmoid outputs; ``threshold`` is 0.5.
    """

    threshold = 0.5

    def __init__(self, arch="eegnet", epochs=250, batch_size=64, lr=1e-3, weight_decay=1e-4, dtype="float32"):
        if arch not in ARCHITECTURES:
            raise InvalidInput(f"unknown architecture {arch!r}")
        self.id = arch
        self.params = {"epochs": int(epochs), "batch_size": int(batch_size), "lr": float(lr),
                       "weight_decay": float(weight_decay), "dtype": str(dtype)}
        self.cfg = TrainConfig(lr=lr, weight_decay=weight_decay, batch_size=batch_size, epochs=epochs)
        self.zscore = None
        self.graph = None
        self.loss_trace = []

    def fit(self, e, seed=0):
        self.zscore = ZScore().fit(e)
        x = self.zscore.transform(e.data)
        g = build_architecture(self.id, channels=e.n_channels, samples=e.n_samples,
                               seed=derive_seed(seed, "init") % (1 << 63), dtype=np.dtype(self.params["dtype"]))
        res = train(g, x, e.labels, self.cfg, seed=derive_seed(seed, "train"))
        self.graph = g
        self.loss_trace = res.loss_trace
        return self

    def _check(self):
        if self.graph is None or self.zscore is None:
            raise NotFitted(f"{self.id} pipeline is not fitted")

    def decision_function(self, e):
        self._check()
        x = self.zscore.transform(np.asarray(getattr(e, "data", e)))
        return self.graph.predict(x).astype(np.float64)

    def to_state(self, base):
        """Write the network next to ``base`` and return the JSON-able state."""
        self._check()
        self.graph.meta["zscore_checksum"] = self.zscore.state_checksum()
        save_weights(self.graph, base)
        return {"pipeline": self.id, "params": self.params, "model": os.path.basename(model_paths(base)[0]),
                "zscore": {"mean": self.zscore.mean_.tolist(), "std": self.zscore.std_.tolist()},
                "loss_trace": list(self.loss_trace)}

    @classmethod
    def from_state(cls, st, directory):
        p = cls(st["pipeline"], **st.get("params", {}))
        p.zscore = ZScore()
        p.zscore.mean_ = np.asarray(st["zscore"]["mean"])
        p.zscore.std_ = np.asarray(st["zscore"]["std"])
        p.graph = load_model(os.path.join(directory, st["model"]), dtype=np.dtype(p.params["dtype"]))
        p.loss_trace = list(st.get("loss_trace", []))
        return p
