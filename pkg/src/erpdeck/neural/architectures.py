"""Builders for the five ERP networks.

Node names follow the layer order of each published architecture so that
per-layer shapes and parameter counts can be read off ``layer_table``.
"""

import numpy as np

from ..errors import UnknownArchitecture
from .graph import ModelGraph
from .layers import (
    Activation,
    Add,
    AvgPool2D,
    BatchNorm,
    Chomp1D,
    Concat,
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    MaxPool2D,
    Reshape,
    SelectLast,
    SeparableConv2D,
    ZeroPad,
)

ARCHITECTURES = ("sepconv1d", "eegnet", "eegtcnet", "eeginception", "deepconvnet")


def _head(g, src=None, max_norm=None):
    g.add("flatten", Flatten(), src)
    g.add("dense", Dense(1, max_norm=max_norm))
    g.add("output", Activation("sigmoid"))


def sepconv1d(channels=15, samples=205, seed=0, dtype=np.float64):
    g = ModelGraph("sepconv1d", (1, channels, samples), seed, dtype)
    g.add("reshape", Reshape((channels, 1, samples)))
    g.add("zeropad", ZeroPad(4))
    g.add("sepconv", SeparableConv2D(4, (1, 16), stride=(1, 8), bias=True, kind="separable_conv1d"))
    g.add("tanh", Activation("tanh"))
    _head(g)
    return g.validate()


def _eegnet_front(g, channels, pools, dropout=0.5):
    g.add("conv", Conv2D(8, (1, 32), padding="same", bias=False))
    g.add("bn1", BatchNorm())
    g.add("depthwise", Conv2D.depthwise(8, (channels, 1), 2, bias=False, max_norm=1.0))
    g.add("bn2", BatchNorm())
    g.add("elu1", Activation("elu"))
    g.add("pool1", AvgPool2D((1, pools[0])))
    g.add("drop1", Dropout(dropout))
    g.add("sepconv", SeparableConv2D(16, (1, 16), padding="same", bias=False))
    g.add("bn3", BatchNorm())
    g.add("elu2", Activation("elu"))
    g.add("pool2", AvgPool2D((1, pools[1])))
    return g.add("drop2", Dropout(dropout))


def eegnet(channels=15, samples=205, seed=0, dtype=np.float64):
    g = ModelGraph("eegnet", (1, channels, samples), seed, dtype)
    _eegnet_front(g, channels, (4, 8))
    _head(g, max_norm=0.25)
    return g.validate()


def _tcn_block(g, prefix, src, filters, kernel, dilation, dropout=0.2):
    pad = (kernel - 1) * dilation
    x = src
    for i in (1, 2):
        x = g.add(f"{prefix}_conv{i}", Conv2D(filters, (1, kernel), dilation=(1, dilation),
                                              padding=((0, 0), (pad, pad)), bias=True), x)
        g.add(f"{prefix}_chomp{i}", Chomp1D(pad))
        g.add(f"{prefix}_bn{i}", BatchNorm())
        g.add(f"{prefix}_elu{i}", Activation("elu"))
        x = g.add(f"{prefix}_drop{i}", Dropout(dropout))
    skip = src
    if g.shape_of(src)[0] != filters:
        skip = g.add(f"{prefix}_downsample", Conv2D(filters, 1, bias=True), src)
    g.add(f"{prefix}_add", Add(), [x, skip])
    return g.add(f"{prefix}_elu", Activation("elu"))


def eegtcnet(channels=15, samples=205, seed=0, dtype=np.float64):
    g = ModelGraph("eegtcnet", (1, channels, samples), seed, dtype)
    x = _eegnet_front(g, channels, (8, 8))
    x = _tcn_block(g, "tcn1", x, 12, 4, 1)
    x = _tcn_block(g, "tcn2", x, 12, 4, 2)
    g.add("last", SelectLast(), x)
    g.add("dense", Dense(1))
    g.add("output", Activation("sigmoid"))
    return g.validate()


def _inception_conv(g, name, src, filters, width, bias):
    g.add(name, Conv2D(filters, (1, width), padding="same", bias=bias), src)
    g.add(f"{name}_bn", BatchNorm())
    g.add(f"{name}_elu", Activation("elu"))
    return g.add(f"{name}_drop", Dropout(0.2))


def eeginception(channels=15, samples=205, seed=0, dtype=np.float64):
    g = ModelGraph("eeginception", (1, channels, samples), seed, dtype)
    branches = []
    for i, width in enumerate((64, 32, 16), start=1):
        _inception_conv(g, f"C{i}", "input", 8, width, True)
        g.add(f"D{i}", Conv2D.depthwise(8, (channels, 1), 2, bias=False))
        g.add(f"D{i}_bn", BatchNorm())
        g.add(f"D{i}_elu", Activation("elu"))
        branches.append(g.add(f"D{i}_drop", Dropout(0.2)))
    g.add("N1", Concat(), branches)
    g.add("A1", AvgPool2D((1, 4)))
    branches = [_inception_conv(g, f"C{i}", "A1", 8, width, True) for i, width in ((4, 16), (5, 8), (6, 4))]
    g.add("N2", Concat(), branches)
    g.add("A2", AvgPool2D((1, 2)))
    _inception_conv(g, "C7", "A2", 12, 8, False)
    g.add("A3", AvgPool2D((1, 2)))
    _inception_conv(g, "C8", "A3", 6, 4, False)
    g.add("A4", AvgPool2D((1, 2)))
    _head(g)
    return g.validate()


def deepconvnet(channels=15, samples=205, seed=0, dtype=np.float64):
    g = ModelGraph("deepconvnet", (1, channels, samples), seed, dtype)
    g.add("conv1", Conv2D(25, (1, 5), bias=False, max_norm=2.0))
    g.add("conv2", Conv2D(25, (channels, 1), bias=False, max_norm=2.0))
    g.add("bn1", BatchNorm(1e-5, 0.1))
    g.add("elu1", Activation("elu"))
    g.add("pool1", MaxPool2D((1, 2)))
    g.add("drop1", Dropout(0.5))
    for i, filters in enumerate((50, 100, 200), start=2):
        g.add(f"conv{i + 1}", Conv2D(filters, (1, 5), bias=False, max_norm=2.0))
        g.add(f"bn{i}", BatchNorm(1e-5, 0.1))
        g.add(f"elu{i}", Activation("elu"))
        g.add(f"pool{i}", MaxPool2D((1, 2)))
        g.add(f"drop{i}", Dropout(0.5))
    _head(g, max_norm=0.5)
    return g.validate()


BUILDERS = {
    "sepconv1d": sepconv1d,
    "eegnet": eegnet,
    "eegtcnet": eegtcnet,
    "eeginception": eeginception,
    "deepconvnet": deepconvnet,
}


def build_architecture(name, channels=15, samples=205, seed=0, dtype=np.float32):
    """Build one of :data:`ARCHITECTURES` with seeded Glorot-uniform weights."""
    key = str(name).lower().replace("-", "").replace("_", "")
    if key not in BUILDERS:
        raise UnknownArchitecture(f"unknown architecture {name!r}; choose from {', '.join(ARCHITECTURES)}")
    return BUILDERS[key](channels, samples, seed, dtype)
