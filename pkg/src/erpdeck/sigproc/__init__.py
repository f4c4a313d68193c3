"""Filtering, segmentation and feature preprocessing."""

from .epochs import MONTAGE, ContinuousRecording, EpochTensor, n_samples, segment
from .features import (
    Windsorizer,
    ZScore,
    moving_avg_decimate,
    windsorize,
    zscore_apply,
    zscore_fit,
)
from .fileio import load_any, load_epochs, load_recording, save_epochs, save_recording
from .filters import IirFilter, butter_bandpass, filtfilt, lfilter_causal, notch

__all__ = [
    "MONTAGE",
    "ContinuousRecording",
    "EpochTensor",
    "IirFilter",
    "Windsorizer",
    "ZScore",
    "butter_bandpass",
    "filtfilt",
    "lfilter_causal",
    "load_any",
    "load_epochs",
    "load_recording",
    "moving_avg_decimate",
    "n_samples",
    "notch",
    "save_epochs",
    "save_recording",
    "segment",
    "windsorize",
    "zscore_apply",
    "zscore_fit",
]
