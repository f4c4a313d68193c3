"""``erpdeck`` command line.

Subcommands: synth, train, eval, simulate, compare, stats, complexity.
Exit codes: 0 ok, 2 validation, 3 numeric, 4 I/O.
"""

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import EXIT_CODES, ErpDeckError, IoError, ValidationError
from .neural.architectures import ARCHITECTURES, build_architecture
from .neural.complexity import complexity
from .onlinesim import (
    PIPELINE_IDS,
    SessionPlan,
    ShiftSpec,
    decode_session,
    load_pipeline,
    make_pipeline,
    prepare_epochs,
    rows_from_csv,
    run_comparison,
    run_session,
    save_pipeline,
    summarize,
)
from .rng import derive_seed
from .sigproc.epochs import ContinuousRecording
from .sigproc.fileio import load_any, read_json, save_recording, write_json
from .synthgen.protocol import ProtocolConfig
from .synthgen.session import synth_session
from .synthgen.subjects import SNR_PRESETS, make_subject

# ---------------------------------------------------------------- config


@dataclass
class ExperimentConfig:
    """One JSON document describing an experiment.

    Unknown keys are rejected with the offending field path.
    """

    seed: int = 0
    session: str = "calibration"
    protocol: dict = field(default_factory=dict)
    subject: int = 0
    snr: str = "high"
    subject_seed: int = 0
    attend_gain: float = 1.0
    shift: dict = field(default_factory=dict)
    pipeline: str = "sh-lda"
    pipelines: list = field(default_factory=lambda: list(PIPELINE_IDS))
    pipeline_params: dict = field(default_factory=dict)
    n_subjects: int = 6
    n_repeats: int = 30
    metric: str = "auc"
    timing: bool = True

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ValidationError("config must be a JSON object", "config")
        names = {f.name for f in fields(cls)}
        for k in d:
            if k not in names:
                raise ValidationError(f"unknown key {k!r}", k)
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self):
        types = {"seed": int, "subject": int, "subject_seed": int, "n_subjects": int, "n_repeats": int,
                 "attend_gain": (int, float), "protocol": dict, "shift": dict, "pipeline_params": dict,
                 "pipelines": list, "timing": bool}
        for k, t in types.items():
            v = getattr(self, k)
            if not isinstance(v, t) or (t is int and isinstance(v, bool)):
                raise ValidationError(f"expected {getattr(t, '__name__', 'number')}, got {type(v).__name__}", k)
        if self.session not in ("calibration", "online"):
            raise ValidationError("must be 'calibration' or 'online'", "session")
        if self.snr not in SNR_PRESETS:
            raise ValidationError(f"must be one of {sorted(SNR_PRESETS)}", "snr")
        if self.metric not in ("auc", "cdr", "itr", "ba"):
            raise ValidationError("unknown metric", "metric")
        for i, p in enumerate([self.pipeline] + list(self.pipelines)):
            if p not in PIPELINE_IDS:
                raise ValidationError(f"unknown pipeline {p!r}", "pipeline" if i == 0 else f"pipelines[{i - 1}]")
        for k in self.pipeline_params:
            if k not in PIPELINE_IDS:
                raise ValidationError(f"unknown pipeline {k!r}", f"pipeline_params.{k}")
            if not isinstance(self.pipeline_params[k], dict):
                raise ValidationError("expected an object", f"pipeline_params.{k}")
        proto_names = {f.name for f in fields(ProtocolConfig)}
        for k in self.protocol:
            if k not in proto_names:
                raise ValidationError(f"unknown protocol field {k!r}", f"protocol.{k}")
        shift_names = {f.name for f in fields(ShiftSpec)}
        for k in self.shift:
            if k not in shift_names:
                raise ValidationError(f"unknown shift field {k!r}", f"shift.{k}")
        if self.n_subjects < 1 or self.n_repeats < 1:
            raise ValidationError("must be >= 1", "n_subjects" if self.n_subjects < 1 else "n_repeats")
        return self

    def protocol_config(self, online=None):
        online = self.session == "online" if online is None else online
        try:
            return (ProtocolConfig.online if online else ProtocolConfig.calibration)(**self.protocol)
        except ErpDeckError as exc:
            raise ValidationError(str(exc), "protocol") from exc

    def session_plan(self):
        return SessionPlan(
            pipeline=self.pipeline, pipeline_params=dict(self.pipeline_params.get(self.pipeline, {})),
            subject=self.subject, snr=self.snr, subject_seed=self.subject_seed, seed=self.seed,
            online=self.protocol_config(online=True), shift=ShiftSpec(**self.shift), attend_gain=self.attend_gain,
        )

    def to_dict(self):
        return asdict(self)


def load_config(path, seed=None, **overrides):
    d = read_json(path) if path else {}
    if not isinstance(d, dict):
        raise ValidationError("config must be a JSON object", "config")
    for k, v in overrides.items():
        if v is not None:
            d[k] = v
    if seed is not None:
        d["seed"] = seed
    return ExperimentConfig.from_dict(d)


# ---------------------------------------------------------------- helpers


def _ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(parent, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {parent}: {exc}") from exc


def _ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {path}: {exc}") from exc


def _write_text(path, text):
    _ensure_parent(path)
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _json_clean(obj):
    if isinstance(obj, dict):
        return {str(k): _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_clean(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def _dump(path, obj):
    _ensure_parent(path)
    write_json(path, _json_clean(obj))


def _parse_params(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValidationError(f"expected key=value, got {item!r}", "param")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _load_epochs(path):
    data = load_any(path)
    if isinstance(data, ContinuousRecording):
        return prepare_epochs(data)
    return data


# ---------------------------------------------------------------- commands


def cmd_synth(args):
    cfg = load_config(args.config, args.seed, session=args.session, snr=args.snr, subject=args.subject)
    if args.repetitions is not None or args.targets is not None:
        proto = dict(cfg.protocol)
        if args.repetitions is not None:
            proto["repetitions"] = args.repetitions
        if args.targets is not None:
            proto["targets_per_session"] = args.targets
        cfg.protocol = proto
    print(f"seed: {cfg.seed}")
    pc = cfg.protocol_config()
    subj = make_subject(cfg.subject, cfg.snr, seed=cfg.subject_seed)
    if args.out is None:
        raise ValidationError("an output path is required", "out")
    _ensure_parent(args.out)
    rec = synth_session(pc, subj.components, subj.noise, attend_gain=cfg.attend_gain,
                        seed=derive_seed(cfg.seed, "synth"))
    save_recording(rec, args.out)
    print(f"events: {rec.n_events}")
    return 0


def cmd_train(args):
    seed = 0 if args.seed is None else args.seed
    print(f"seed: {seed}")
    params = _parse_params(args.param)
    if args.epochs is not None:
        params["epochs"] = args.epochs
    if args.out is None:
        raise ValidationError("an output path is required", "out")
    e = _load_epochs(args.dataset)
    p = make_pipeline(args.pipeline, **params).fit(e, seed=seed)
    _ensure_parent(args.out)
    path = save_pipeline(p, args.out)
    print(f"model: {path}")
    return 0


def cmd_eval(args):
    e = _load_epochs(args.dataset)
    p = load_pipeline(args.model)
    res = decode_session(p, e, ProtocolConfig.online(n_commands=int(e.command_codes.max())))
    out = {"metrics": res.report.to_dict(), "blocks": len(res.true_commands),
           "decoded": res.decoded_commands.tolist(), "true": res.true_commands.tolist()}
    if args.timing:
        out["latency_ms_median"] = float(np.median(res.latency_ms))
    text = json.dumps(_json_clean(out), indent=2, sort_keys=True) + "\n"
    if args.out:
        _write_text(args.out, text)
    print(text, end="")
    return 0


def cmd_simulate(args):
    cfg = load_config(args.config, args.seed, pipeline=args.pipeline, snr=args.snr)
    print(f"seed: {cfg.seed}")
    timing = cfg.timing and args.timing
    res = run_session(cfg.session_plan())
    m = res.report
    print(f"pipeline: {cfg.pipeline}  detection: {m.command_detection_rate:.4f}  auc: {m.auc:.4f}  "
          f"itr: {m.itr_bits_per_min:.2f} bit/min  duration: {res.duration_s:.2f} s")
    if args.out:
        _ensure_dir(args.out)
        _dump(os.path.join(args.out, "config.json"), cfg.to_dict())
        _dump(os.path.join(args.out, "session.json"), res.to_dict(timing=timing))
    return 0


def cmd_compare(args):
    cfg = load_config(args.config, args.seed)
    print(f"seed: {cfg.seed}")
    if args.out is None:
        raise ValidationError("an output directory is required", "out")
    _ensure_dir(args.out)

    def progress(i, n, row):
        if args.verbose:
            print(f"[{i}/{n}] {row['pipeline']} S{row['subject'] + 1} r{row['repeat']}: {row['status']}",
                  file=sys.stderr)

    rep = run_comparison(cfg.pipelines, cfg.n_subjects, cfg.n_repeats, cfg.snr, cfg.seed, jobs=args.jobs,
                         pipeline_params=cfg.pipeline_params, metric=cfg.metric, progress=progress,
                         timing=cfg.timing and args.timing)
    _write_text(os.path.join(args.out, "metrics.csv"), rep.to_csv())
    summary = rep.summary()
    _dump(os.path.join(args.out, "summary.json"), summary)
    _dump(os.path.join(args.out, "config.json"), cfg.to_dict())
    _print_summary(summary)
    if not rep.complete:
        print(f"incomplete: {len(summary['failed_cells'])} failed cells", file=sys.stderr)
    return 0


def _fmt_ms(d):
    if d["mean"] is None:
        return "n/a"
    return f"{d['mean']:.3f} ± {d['std']:.3f}" if d["std"] is not None else f"{d['mean']:.3f}"


def _print_summary(summary):
    print(f"{'pipeline':<14} {'AUC':>16} {'CDR':>16} {'ITR':>18}")
    for e in summary["pipelines"]:
        print(f"{e['pipeline']:<14} {_fmt_ms(e['auc']):>16} {_fmt_ms(e['cdr']):>16} "
              f"{_fmt_ms(e['itr']):>18}")
    st = summary["statistics"]
    fr = st["friedman"]
    if "chi2" in fr:
        print(f"friedman ({st['metric']}): chi2 = {fr['chi2']:.4f}, df = {fr['df']}, p = {fr['p']:.4g}")
    else:
        print(f"friedman ({st['metric']}): {fr['error']}")
    for w in st["wilcoxon"]:
        if "p" in w:
            print(f"wilcoxon {w['a']} vs {w['b']}: W = {w['statistic']:g}, p = {w['p']:.4g}")


def cmd_stats(args):
    try:
        with open(args.report) as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {args.report}: {exc}") from exc
    rows = rows_from_csv(text)
    if not rows:
        raise ValidationError("report has no rows", "csv")
    summary = summarize(rows, metric=args.metric)
    _print_summary(summary)
    if args.out:
        _dump(args.out, summary)
    return 0


def cmd_complexity(args):
    archs = ARCHITECTURES if args.arch == "all" else [args.arch]
    results = []
    for a in archs:
        g = build_architecture(a, seed=0 if args.seed is None else args.seed)
        c = complexity(g, repeats=args.repeats, timing=args.timing)
        results.append(c.to_dict())
        line = f"{c.name}: params={c.param_count} macs={c.mac_count} macs_instrumented={c.mac_count_instrumented}"
        if args.timing:
            line += f" inference_ms_median={c.inference_ms_median:.3f} inference_ms_mean={c.inference_ms_mean:.3f}"
        print(line)
    if args.out:
        if not args.timing:
            for r in results:
                r.pop("inference_ms_median")
                r.pop("inference_ms_mean")
        _dump(args.out, results)
    return 0


# ---------------------------------------------------------------- parser


def build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="experiment config (JSON)")
    shared.add_argument("--seed", type=int, help="master seed (overrides the config)")
    shared.add_argument("--out", help="output file or directory")
    shared.add_argument("--jobs", type=int, default=1, help="worker processes")
    shared.add_argument("--no-timing", dest="timing", action="store_false", help="omit wall-clock fields")

    p = argparse.ArgumentParser(prog="erpdeck", description="Single-trial ERP decoding toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[shared], help="synthesise a session recording")
    s.add_argument("--session", choices=("calibration", "online"))
    s.add_argument("--snr", choices=sorted(SNR_PRESETS))
    s.add_argument("--subject", type=int)
    s.add_argument("--repetitions", type=int)
    s.add_argument("--targets", type=int)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("train", parents=[shared], help="fit a pipeline on a recording or epochs file")
    s.add_argument("dataset")
    s.add_argument("--pipeline", required=True, choices=PIPELINE_IDS)
    s.add_argument("--epochs", type=int, help="training epochs (networks)")
    s.add_argument("--param", action="append", metavar="KEY=VALUE", help="pipeline hyperparameter")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", parents=[shared], help="decode a dataset with a saved pipeline")
    s.add_argument("dataset")
    s.add_argument("--model", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("simulate", parents=[shared], help="calibrate and decode one online session")
    s.add_argument("--pipeline", choices=PIPELINE_IDS)
    s.add_argument("--snr", choices=sorted(SNR_PRESETS))
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("compare", parents=[shared], help="pipeline x subject x repeat grid")
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("stats", parents=[shared], help="Friedman and Wilcoxon tests on a metrics CSV")
    s.add_argument("report")
    s.add_argument("--metric", default="auc",
                   choices=("auc", "cdr", "itr", "ba"))
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("complexity", parents=[shared], help="parameters, MACs and inference latency")
    s.add_argument("arch", choices=list(ARCHITECTURES) + ["all"])
    s.add_argument("--repeats", type=int, default=10)
    s.set_defaults(func=cmd_complexity)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.jobs < 1:
            raise ValidationError("must be >= 1", "jobs")
        return args.func(args)
    except ErpDeckError as exc:
        print(f"error[{exc.category}]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 2)
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_CODES["io"]


if __name__ == "__main__":
    sys.exit(main())
