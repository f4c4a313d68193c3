"""Compact convolutional networks with manual backpropagation."""

from .architectures import ARCHITECTURES, build_architecture
from .graph import ModelGraph, Node
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
    Layer,
    MaxPool2D,
    Reshape,
    SelectLast,
    SeparableConv2D,
    ZeroPad,
    sigmoid,
)
from .train import AdamState, TrainConfig, TrainResult, adamw_step, bce, bce_with_logits, train
from .complexity import Complexity, complexity, instrumented_macs, time_inference
from .serialize import load_model, load_weights, save_weights
from .pipeline import NeuralPipeline
