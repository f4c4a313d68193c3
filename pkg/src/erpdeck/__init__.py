"""Single-trial ERP decoding toolkit and closed-loop speller simulator."""

__version__ = "0.1.0"

from . import baselines, metrics, neural, onlinesim, rng, sigproc, synthgen, tensorkit
from .errors import ErpDeckError

__all__ = ["ErpDeckError", "baselines", "metrics", "neural", "onlinesim", "rng", "sigproc", "synthgen", "tensorkit"]
