"""Parameter, MAC and latency accounting for built networks."""

import time
from dataclasses import asdict, dataclass

import numpy as np

from ..rng import Stream


@dataclass
class Complexity:
    name: str
    param_count: int
    mac_count: int
    mac_count_instrumented: int
    inference_ms_median: float
    inference_ms_mean: float

    def to_dict(self):
        return asdict(self)


def instrumented_macs(g, seed=0):
    """MACs issued by the tap-loop kernels for one single-trial forward pass."""
    x = Stream(seed, "mac-probe").normal((1,) + g.input_shape).astype(g.dtype)
    g.eval()
    _, macs = g.forward_counted(x)
    return int(macs)


def time_inference(g, repeats=10, seed=0, warmup=2):
    """Wall-clock single-trial eval forward passes in milliseconds."""
    x = Stream(seed, "timing").normal((1,) + g.input_shape).astype(g.dtype)
    g.eval()
    for _ in range(warmup):
        g.forward(x)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        g.forward(x)
        times.append((time.perf_counter() - t0) * 1000.0)
    return np.asarray(times)


def complexity(g, repeats=10, timing=True):
    """Parameter count, analytic and instrumented MACs, and inference latency.

    MACs are counted over convolution and dense layers only, as
    ``output_elements * kernel_taps * input_channels_per_group``; padded
    positions count.  With ``timing=False`` the latency fields are NaN.
    """
    times = time_inference(g, repeats) if timing else np.array([np.nan])
    return Complexity(
        name=g.name,
        param_count=g.param_count,
        mac_count=g.macs(),
        mac_count_instrumented=instrumented_macs(g),
        inference_ms_median=float(np.median(times)),
        inference_ms_mean=float(np.mean(times)),
    )
