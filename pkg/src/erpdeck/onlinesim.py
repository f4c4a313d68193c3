"""Closed-loop single-trial copy-spelling simulation and pipeline comparison.

A session plan calibrates a pipeline on a synthetic calibration session of a
synthetic subject, then decodes a (possibly shifted) online session block by
block, one flash per command.
"""

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import combinations

import numpy as np

from .baselines.pipelines import CLASSICAL, CLASSICAL_IDS
from .errors import ErpDeckError, IoError, UnknownPipeline, ValidationError
from .metrics import (
    MetricReport,
    auc,
    balanced_accuracy,
    block_decisions,
    confusion_counts,
    decide_command,
    friedman,
    itr,
    spearman,
    wilcoxon_signed_rank,
)
from .neural.architectures import ARCHITECTURES
from .neural.pipeline import NeuralPipeline
from .rng import Stream, derive_seed
from .sigproc.epochs import segment
from .sigproc.filters import butter_bandpass, filtfilt
from .synthgen.protocol import ProtocolConfig
from .synthgen.session import session_shift, synth_session
from .synthgen.subjects import make_subject

PIPELINE_IDS = CLASSICAL_IDS + ARCHITECTURES

ONLINE_BAND_HZ = (5.0, 12.0)
ONLINE_WINDOW_MS = (100.0, 500.0)
BASELINE_MS = (-200.0, 0.0)
FILTER_ORDER = 2


# ---------------------------------------------------------------- pipelines


def make_pipeline(pid, **params):
    """Unfitted pipeline for one of :data:`PIPELINE_IDS`."""
    if pid in CLASSICAL:
        return CLASSICAL[pid](**params)
    if pid in ARCHITECTURES:
        return NeuralPipeline(pid, **params)
    raise UnknownPipeline(f"unknown pipeline {pid!r}; choose from {', '.join(PIPELINE_IDS)}")


def scorer_path(base):
    base = os.fspath(base)
    return base if base.endswith(".scorer.json") else base + ".scorer.json"


def save_pipeline(p, base):
    """Write ``<base>.scorer.json`` (networks add their model files)."""
    path = scorer_path(base)
    stem = path[: -len(".scorer.json")]
    state = p.to_state(stem) if isinstance(p, NeuralPipeline) else p.to_state()
    state = {"format": "erpdeck-scorer", "version": 1, **state}
    try:
        with open(path, "w") as fh:
            json.dump(state, fh, indent=1, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def load_pipeline(path):
    path = scorer_path(path)
    try:
        with open(path) as fh:
            st = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {exc}", "scorer") from exc
    if st.get("format") != "erpdeck-scorer":
        raise ValidationError("not an erpdeck scorer file", "format")
    pid = st.get("pipeline")
    if pid in CLASSICAL:
        return CLASSICAL[pid].from_state(st)
    if pid in ARCHITECTURES:
        return NeuralPipeline.from_state(st, os.path.dirname(os.path.abspath(path)))
    raise UnknownPipeline(f"unknown pipeline {pid!r} in {path}")


# ---------------------------------------------------------------- preprocessing


def prepare_epochs(rec, band=ONLINE_BAND_HZ, window=ONLINE_WINDOW_MS, baseline=BASELINE_MS, order=FILTER_ORDER):
    """Zero-phase bandpass of the continuous data, then baseline-corrected epochs."""
    f = butter_bandpass(order, band[0], band[1], rec.fs)
    filtered = rec.with_data(filtfilt(f, rec.data, axis=1))
    return segment(filtered, window[0], window[1], baseline=baseline)


# ---------------------------------------------------------------- plans


@dataclass(frozen=True)
class ShiftSpec:
    """Change of the target response between calibration and online session."""

    amplitude_scale: float = 1.0
    latency_shift_ms: float = 0.0
    latency_jitter_ms: float = 0.0

    @property
    def is_identity(self):
        return self.amplitude_scale == 1.0 and self.latency_shift_ms == 0.0 and self.latency_jitter_ms == 0.0


@dataclass
class SessionPlan:
    """One calibrate-then-decode run.

    ``seed`` drives the subject's recordings; ``fit_seed`` (default derived
    from ``seed``) drives model initialisation and training order, so that
    repeated fits on the same data differ only there.
    """

    pipeline: str = "sh-lda"
    pipeline_params: dict = field(default_factory=dict)
    subject: int = 0
    snr: str = "high"
    subject_seed: int = 0
    seed: int = 0
    fit_seed: int = None
    calibration: ProtocolConfig = field(default_factory=ProtocolConfig.calibration)
    online: ProtocolConfig = field(default_factory=ProtocolConfig.online)
    shift: ShiftSpec = field(default_factory=ShiftSpec)
    attend_gain: float = 1.0
    session_index: int = 0
    shuffle_labels: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.online.repetitions != 1:
            raise ValidationError("online decoding is single-trial: repetitions must be 1", "online.repetitions")
        if self.pipeline not in PIPELINE_IDS:
            raise UnknownPipeline(f"unknown pipeline {self.pipeline!r}")
        if not 0.0 <= self.shift.amplitude_scale:
            raise ValidationError("amplitude scale must be >= 0", "shift.amplitude_scale")
        return self

    def resolved_fit_seed(self):
        return derive_seed(self.seed, "fit") if self.fit_seed is None else int(self.fit_seed)

    def to_dict(self):
        d = asdict(self)
        d["fit_seed"] = self.resolved_fit_seed()
        return d


def subject_profile(plan):
    return make_subject(plan.subject, plan.snr, seed=plan.subject_seed)


def calibration_epochs(plan, subject=None):
    subject = subject_profile(plan) if subject is None else subject
    rec = synth_session(plan.calibration, subject.components, subject.noise,
                        seed=derive_seed(plan.seed, "calibration"))
    e = prepare_epochs(rec)
    if plan.shuffle_labels:
        perm = Stream(plan.seed, "shuffle-labels").permutation(e.n_trials)
        e = replace(e, labels=e.labels[perm])
    return e


def online_epochs(plan, subject=None):
    subject = subject_profile(plan) if subject is None else subject
    rec = synth_session(plan.online, subject.components, subject.noise, attend_gain=plan.attend_gain,
                        seed=derive_seed(plan.seed, "online", plan.session_index))
    if not plan.shift.is_identity:
        rec = session_shift(rec, plan.shift.amplitude_scale, plan.shift.latency_jitter_ms,
                            seed=derive_seed(plan.seed, "shift", plan.session_index),
                            latency_shift_ms=plan.shift.latency_shift_ms)
    return prepare_epochs(rec)


def fit_pipeline(plan, subject=None):
    """Calibrate the plan's pipeline on its calibration session."""
    p = make_pipeline(plan.pipeline, **plan.pipeline_params)
    return p.fit(calibration_epochs(plan, subject), seed=plan.resolved_fit_seed())


# ---------------------------------------------------------------- sessions


@dataclass
class SessionResult:
    true_commands: np.ndarray
    decoded_commands: np.ndarray
    block_scores: np.ndarray
    scores: np.ndarray
    labels: np.ndarray
    report: MetricReport
    latency_ms: np.ndarray
    selection_time_s: float
    plan: dict = field(default_factory=dict)

    @property
    def n_blocks(self):
        return len(self.true_commands)

    @property
    def duration_s(self):
        return self.n_blocks * self.selection_time_s

    def same_decisions(self, other):
        """Equality of everything except wall-clock latency."""
        return (np.array_equal(self.true_commands, other.true_commands)
                and np.array_equal(self.decoded_commands, other.decoded_commands)
                and np.array_equal(self.scores, other.scores)
                and self.report.to_dict() == other.report.to_dict())

    def to_dict(self, timing=True):
        d = {
            "plan": self.plan,
            "blocks": [
                {"true": int(t), "decoded": int(c), "scores": [float(s) for s in sc]}
                for t, c, sc in zip(self.true_commands, self.decoded_commands, self.block_scores)
            ],
            "metrics": _report_dict(self.report),
            "selection_time_s": self.selection_time_s,
            "duration_s": self.duration_s,
        }
        if timing:
            d["latency_ms"] = [float(x) for x in self.latency_ms]
        return d


def _report_dict(report):
    d = report.to_dict()
    return {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in d.items()}


def _report(scores, labels, commands, blocks, threshold, n_commands, t_select_s):
    """Metrics that tolerate a single-class test set (BA and AUC become NaN)."""
    truth, decided = block_decisions(scores, labels, commands, blocks)
    cdr = float(np.mean(truth == decided))
    counts = confusion_counts(scores, labels, threshold)
    both = 0 < int(np.sum(labels)) < len(labels)
    return MetricReport(
        balanced_accuracy=balanced_accuracy(counts) if both else float("nan"),
        auc=auc(scores, labels) if both else float("nan"),
        command_detection_rate=cdr,
        itr_bits_per_min=itr(n_commands, cdr, t_select_s),
        counts=counts,
    )


def decode_session(pipeline, e, online_cfg, plan_dict=None):
    """Decode a preprocessed online session block by block."""
    blocks = np.unique(e.blocks)
    scores = np.empty(e.n_trials)
    truth, decided, block_scores, latency = [], [], [], []
    for b in blocks:
        idx = np.flatnonzero(e.blocks == b)
        sub = e.subset(idx)
        t0 = time.perf_counter()
        s = pipeline.decision_function(sub)
        d = decide_command(s, sub.command_codes)
        latency.append((time.perf_counter() - t0) * 1000.0)
        scores[idx] = s
        order = np.argsort(sub.command_codes)
        block_scores.append(s[order])
        tgt = sub.command_codes[sub.labels == 1]
        truth.append(int(tgt[0]) if len(tgt) == 1 else 0)
        decided.append(d)
    t_sel = online_cfg.selection_time_ms / 1000.0
    report = _report(scores, e.labels, e.command_codes, e.blocks, pipeline.threshold, online_cfg.n_commands, t_sel)
    return SessionResult(np.array(truth), np.array(decided), np.array(block_scores), scores, e.labels.copy(),
                         report, np.array(latency), t_sel, plan_dict or {})


def run_session(plan, pipeline=None):
    """Calibrate (unless a fitted ``pipeline`` is given) and decode one online session.

    Raises
    ------
    NotFitted
        If ``pipeline`` is given but was never fitted.
    """
    plan.validate()
    subject = subject_profile(plan)
    if pipeline is None:
        pipeline = fit_pipeline(plan, subject)
    e = online_epochs(plan, subject)
    return decode_session(pipeline, e, plan.online, plan.to_dict())


# ---------------------------------------------------------------- shift sweep


@dataclass
class SweepResult:
    scales: list
    detection: np.ndarray  # (n_seeds, n_scales)
    spearman_rho: float
    spearman_p: float

    @property
    def mean_detection(self):
        return self.detection.mean(axis=0)

    def to_dict(self):
        return {"scales": list(self.scales), "detection": self.detection.tolist(),
                "mean_detection": self.mean_detection.tolist(),
                "spearman_rho": self.spearman_rho, "spearman_p": self.spearman_p}


def shift_sweep(plan, scales=(0.0, 0.25, 0.5, 0.75, 1.0), n_seeds=10):
    """Detection rate versus ERP amplitude scale of the online session.

    For each seed the pipeline is calibrated once and decodes one online
    session per scale (same noise, target responses scaled).  Spearman's
    rho is computed over all ``(scale, detection)`` pairs.
    """
    scales = [float(s) for s in scales]
    if any(not 0.0 <= s <= 1.0 for s in scales):
        raise ValidationError("scales must lie in [0, 1]", "scales")
    if n_seeds < 1:
        raise ValidationError("need at least one seed", "n_seeds")
    det = np.zeros((n_seeds, len(scales)))
    for i in range(n_seeds):
        p0 = replace(plan, seed=derive_seed(plan.seed, "sweep", i), fit_seed=None)
        subject = subject_profile(p0)
        pipe = fit_pipeline(p0, subject)
        for j, s in enumerate(scales):
            pj = replace(p0, shift=replace(plan.shift, amplitude_scale=s))
            res = decode_session(pipe, online_epochs(pj, subject), pj.online)
            det[i, j] = res.report.command_detection_rate
    xs = np.repeat(np.array(scales)[None, :], n_seeds, axis=0).ravel()
    try:
        st = spearman(xs, det.ravel())
        rho, p = st.statistic, st.pvalue
    except ErpDeckError:
        rho, p = float("nan"), float("nan")
    return SweepResult(scales, det, float(rho), float(p))


# ---------------------------------------------------------------- comparison

CSV_FIELDS = ("subject", "session", "pipeline", "repeat", "ba", "auc", "cdr", "itr",
              "train_time_s", "infer_ms", "params", "macs", "status", "error")
METRIC_FIELDS = ("ba", "auc", "cdr", "itr")
TIMING_FIELDS = ("train_time_s", "infer_ms")


@dataclass
class Cell:
    pipeline: str
    subject: int
    repeat: int
    plan: SessionPlan


def comparison_cells(pipelines, n_subjects=6, n_repeats=30, snr="medium", seed=0, pipeline_params=None,
                     session_index=0):
    """Grid cells; a subject's recordings depend on (seed, subject) only and
    the fit seed on (seed, pipeline, subject, repeat)."""
    pipeline_params = pipeline_params or {}
    for pid in pipelines:
        if pid not in PIPELINE_IDS:
            raise UnknownPipeline(f"unknown pipeline {pid!r}")
    cells = []
    for pid in pipelines:
        for s in range(n_subjects):
            for r in range(n_repeats):
                plan = SessionPlan(
                    pipeline=pid, pipeline_params=dict(pipeline_params.get(pid, {})), subject=s, snr=snr,
                    subject_seed=seed, seed=derive_seed(seed, "subject", s),
                    fit_seed=derive_seed(seed, "fit", pid, s, r), session_index=session_index,
                )
                cells.append(Cell(pid, s, r, plan))
    return cells


def _model_size(p):
    """``(params, macs)`` of a fitted pipeline; MACs only for networks."""
    if isinstance(p, NeuralPipeline):
        return p.graph.param_count, p.graph.macs()
    return p.scorer.w.size + 1, None


def _run_cell(cell, timing=True):
    base = {"subject": cell.subject, "session": cell.plan.session_index, "pipeline": cell.pipeline,
            "repeat": cell.repeat}
    try:
        subject = subject_profile(cell.plan)
        t0 = time.perf_counter()
        pipe = fit_pipeline(cell.plan, subject)
        train_s = time.perf_counter() - t0
        res = decode_session(pipe, online_epochs(cell.plan, subject), cell.plan.online)
        m = res.report
        params, macs = _model_size(pipe)
        return {**base, "ba": m.balanced_accuracy, "auc": m.auc, "cdr": m.command_detection_rate,
                "itr": m.itr_bits_per_min,
                "train_time_s": train_s if timing else None,
                "infer_ms": float(np.median(res.latency_ms)) / max(1, cell.plan.online.n_commands) if timing else None,
                "params": params, "macs": macs, "status": "ok", "error": ""}
    except Exception as exc:  # a failing cell is recorded, not fatal
        return {**base, **{k: float("nan") for k in METRIC_FIELDS}, "train_time_s": None, "infer_ms": None,
                "params": None, "macs": None, "status": "failed", "error": f"{type(exc).__name__}: {exc}"}


def _run_cell_untimed(cell):
    return _run_cell(cell, timing=False)


@dataclass
class ComparisonReport:
    rows: list
    pipelines: list
    n_subjects: int
    n_repeats: int
    metric: str = "auc"

    @property
    def complete(self):
        return all(r["status"] == "ok" for r in self.rows)

    def subject_means(self, metric=None):
        """``subjects x pipelines`` matrix of per-subject means over repeats."""
        metric = metric or self.metric
        m = np.full((self.n_subjects, len(self.pipelines)), np.nan)
        for j, pid in enumerate(self.pipelines):
            for s in range(self.n_subjects):
                vals = [r[metric] for r in self.rows if r["pipeline"] == pid and r["subject"] == s
                        and r["status"] == "ok"]
                if vals:
                    m[s, j] = float(np.mean(vals))
        return m

    def summary(self):
        return summarize(self.rows, self.pipelines, self.n_subjects, self.metric)

    def to_csv(self):
        return rows_to_csv(self.rows)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if not np.isfinite(v) else repr(float(v))
    return str(v)


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([_fmt(r.get(k)) for k in CSV_FIELDS])
    return buf.getvalue()


def _opt(v, conv):
    return None if v is None or v == "" else conv(v)


def rows_from_csv(text):
    """Parse a report CSV; ``status`` defaults to ok and missing optional
    columns to empty."""
    rows = []
    reader = csv.DictReader(io.StringIO(text))
    missing = {"subject", "pipeline", "auc"} - set(reader.fieldnames or [])
    if missing:
        raise ValidationError(f"missing columns {sorted(missing)}", "csv")
    for i, r in enumerate(reader):
        try:
            row = {
                "subject": int(r["subject"]), "session": _opt(r.get("session"), int) or 0,
                "pipeline": r["pipeline"], "repeat": _opt(r.get("repeat"), int) or 0,
                **{k: _opt(r.get(k), float) if r.get(k) not in (None, "") else float("nan") for k in METRIC_FIELDS},
                "train_time_s": _opt(r.get("train_time_s"), float), "infer_ms": _opt(r.get("infer_ms"), float),
                "params": _opt(r.get("params"), int), "macs": _opt(r.get("macs"), int),
                "status": r.get("status") or "ok", "error": r.get("error") or "",
            }
        except ValueError as exc:
            raise ValidationError(f"row {i + 1}: {exc}", f"csv[{i + 1}]") from exc
        rows.append(row)
    return rows


def _clean(v):
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def summarize(rows, pipelines=None, n_subjects=None, metric="auc"):
    """Per-pipeline mean and std of AUC, CDR and ITR plus Friedman and
    pairwise Wilcoxon tests on subject-level means of ``metric``."""
    if pipelines is None:
        pipelines = list(dict.fromkeys(r["pipeline"] for r in rows))
    subjects = sorted({r["subject"] for r in rows})
    n_subjects = len(subjects) if n_subjects is None else n_subjects
    table = []
    for pid in pipelines:
        ok = [r for r in rows if r["pipeline"] == pid and r["status"] == "ok"]
        entry = {"pipeline": pid, "cells": len([r for r in rows if r["pipeline"] == pid]), "ok_cells": len(ok)}
        for k in ("auc", "cdr", "itr"):
            v = np.array([r[k] for r in ok], dtype=float)
            v = v[np.isfinite(v)]
            entry[k] = {"mean": _clean(float(v.mean())) if len(v) else None,
                        "std": _clean(float(v.std(ddof=1))) if len(v) > 1 else None}
        table.append(entry)
    matrix = np.full((len(subjects), len(pipelines)), np.nan)
    for j, pid in enumerate(pipelines):
        for i, s in enumerate(subjects):
            v = [r[metric] for r in rows if r["pipeline"] == pid and r["subject"] == s and r["status"] == "ok"]
            v = [x for x in v if np.isfinite(x)]
            if v:
                matrix[i, j] = float(np.mean(v))
    stats = {"metric": metric, "subject_means": [[_clean(x) for x in row] for row in matrix.tolist()]}
    keep = np.all(np.isfinite(matrix), axis=1)
    try:
        fr = friedman(matrix[keep])
        stats["friedman"] = {"chi2": fr.statistic, "df": len(pipelines) - 1, "p": fr.pvalue,
                             "subjects": int(keep.sum())}
    except ErpDeckError as exc:
        stats["friedman"] = {"error": f"{type(exc).__name__}: {exc}"}
    pairs = []
    for a, b in combinations(range(len(pipelines)), 2):
        entry = {"a": pipelines[a], "b": pipelines[b]}
        try:
            w = wilcoxon_signed_rank(matrix[keep, a], matrix[keep, b])
            entry |= {"statistic": w.statistic, "p": w.pvalue}
        except ErpDeckError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
        pairs.append(entry)
    stats["wilcoxon"] = pairs
    return {"pipelines": table, "n_subjects": n_subjects, "complete": all(r["status"] == "ok" for r in rows),
            "failed_cells": [{k: r[k] for k in ("pipeline", "subject", "repeat", "error")}
                             for r in rows if r["status"] != "ok"],
            "statistics": stats}


def run_comparison(pipelines, n_subjects=6, n_repeats=30, snr="medium", seed=0, jobs=1, pipeline_params=None,
                   metric="auc", progress=None, timing=True):
    """Run every (pipeline, subject, repeat) cell; results do not depend on ``jobs``.

    With ``timing=False`` the wall-clock columns stay empty so that reruns
    are byte-identical.
    """
    cells = comparison_cells(pipelines, n_subjects, n_repeats, snr, seed, pipeline_params)
    run = _run_cell if timing else _run_cell_untimed
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=int(jobs)) as ex:
            rows = []
            for i, r in enumerate(ex.map(run, cells)):
                rows.append(r)
                if progress:
                    progress(i + 1, len(cells), r)
    else:
        rows = []
        for i, c in enumerate(cells):
            rows.append(run(c))
            if progress:
                progress(i + 1, len(cells), rows[-1])
    return ComparisonReport(rows, list(pipelines), n_subjects, n_repeats, metric)
