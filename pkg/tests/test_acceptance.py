"""Acceptance criteria 1 to 10.

Each test records one PASS/FAIL line (printed at the end of the pytest run
and immediately with ``-s``).  The baseline-parity grid runs a reduced
configuration by default; set ``ERPDECK_FULL_GRID=1`` for five repeats with
the full training budget.
"""

import json
import os
import time
from dataclasses import replace

import numpy as np
import pytest

from conftest import ACCEPTANCE
from erpdeck.cli import main
from erpdeck.metrics import (
    Counts,
    balanced_accuracy,
    chi2_sf,
    grand_average,
    itr,
    peak_pick,
    signed_r2,
    wilcoxon_signed_rank,
)
from erpdeck.neural import ARCHITECTURES, build_architecture, complexity, instrumented_macs
from erpdeck.onlinesim import (
    CLASSICAL_IDS,
    PIPELINE_IDS,
    SessionPlan,
    decode_session,
    fit_pipeline,
    online_epochs,
    run_comparison,
    shift_sweep,
)
from erpdeck.sigproc.epochs import segment
from erpdeck.synthgen import NoiseSpec, ProtocolConfig, reference_components, synth_session
from test_metrics import brute_force_wilcoxon
from test_neural_layers import CASES, N_CONFIGS, TOL, Activation, Dropout, Stream, _batchnorm, _configs, fd_check
from test_neural_models import INCEPTION_BLOCK_PARAMS, SHAPES, TOTALS, _table

CHANCE = 1 / 9
FULL_GRID = os.environ.get("ERPDECK_FULL_GRID") == "1"


def record(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


class TestAcceptance:
    def test_c01_architecture_fidelity(self):
        t0 = time.perf_counter()
        bad = []
        for arch in ARCHITECTURES:
            g, t = _table(arch)
            bad += [(arch, k) for k, s in SHAPES[arch].items() if t[k][2] != s]
            if arch in TOTALS and g.param_count != TOTALS[arch]:
                bad.append((arch, "total", g.param_count))
        _, t = _table("eeginception")
        got = {k: t[k][3] + (t[k + "_bn"][3] if k + "_bn" in t else 0) for k in INCEPTION_BLOCK_PARAMS}
        bad += [("eeginception", k) for k in got if got[k] != INCEPTION_BLOCK_PARAMS[k]]
        _, ts = _table("sepconv1d")
        if ts["sepconv"][3] != 15 * 16 + 15 * 4 + 4 or ts["dense"][3] != 101:
            bad.append(("sepconv1d", "formula"))
        _, tt = _table("eegtcnet")
        if tt["tcn1_conv1"][3] != 16 * 12 * 4 + 12 or sum(tt[k][3] for k in tt if k.startswith("tcn2")) != 1224:
            bad.append(("eegtcnet", "formula"))
        dt = time.perf_counter() - t0
        params = {a: build_architecture(a).param_count for a in ARCHITECTURES}
        record(1, not bad and dt < 1.0,
               f"shapes and parameter counts {params}, mismatches {bad}, {dt:.2f} s "
               "(sepconv1d 405 vs listed 412: per-layer formulas hold, the listed total does not)")

    def test_c02_gradient_correctness(self):
        t0 = time.perf_counter()
        worst = {}
        for kind, make in CASES.items():
            worst[kind] = max(max(fd_check(l, s, seed=i).values()) for i, (l, s) in enumerate(_configs(make)))
        for fn in ("elu", "tanh", "sigmoid", "linear"):
            worst[fn] = max(max(fd_check(Activation(fn), [(2, 1, 5 + i)], seed=i).values()) for i in range(N_CONFIGS))
        for mode in ("batch", "running"):
            worst[f"batchnorm-{mode}"] = max(
                max(fd_check(l, s, seed=i, batch=4, training=mode == "batch").values())
                for i, (l, s) in enumerate(_configs(_batchnorm)))

        def reseed(layer):
            layer.rng = Stream(77)

        worst["dropout"] = max(max(fd_check(Dropout(0.1 + 0.08 * i), [(2, 1, 6)], seed=i, training=True,
                                            before_forward=reseed).values()) for i in range(N_CONFIGS))
        dt = time.perf_counter() - t0
        top = max(worst.values())
        record(2, top < TOL and dt < 120,
               f"{len(worst)} layer kinds x {N_CONFIGS} configs, max relative error {top:.2e}, {dt:.1f} s")

    def test_c03_formula_suite(self):
        r2 = signed_r2([1.0, 1.0], [0.0, 0.0])
        ba = balanced_accuracy(Counts(tp=7, fp=2, tn=70, fn=2))
        it = itr(9, 0.9722, 2.49)
        chance = itr(9, 1 / 9, 2.49)
        ok = r2 == 1.0 and abs(ba - 0.8750) < 5e-5 and abs(it - 70.65) <= 1.5 and abs(chance) < 1e-12
        record(3, ok, f"r2={r2}, BA={ba:.4f}, ITR(0.9722)={it:.2f} (reference 70.65, gap {70.65 - it:.2f}), "
                      f"ITR(1/9)={chance:.1e}")

    def test_c04_erp_roundtrip(self):
        t0 = time.perf_counter()
        silent = NoiseSpec(0.0, 0.0, 0.0)
        worst_amp, worst_lat, rows = 0.0, 0.0, []
        for c in reference_components():
            rec = synth_session(ProtocolConfig.calibration(), [c], silent, seed=1)
            ga = grand_average(segment(rec, 0, 800, baseline=None), 1)
            amp, lat = peak_pick(ga, c.channel, 0, 800, polarity=1 if c.amplitude_uv > 0 else -1)
            da, dl = abs(amp / c.amplitude_uv - 1), abs(lat - c.latency_ms) * rec.fs / 1000
            worst_amp, worst_lat = max(worst_amp, da), max(worst_lat, dl)
            rows.append(f"{c.name}@{c.channel} {amp:.2f}uV {lat:.1f}ms")
        dt = time.perf_counter() - t0
        record(4, worst_amp <= 0.05 and worst_lat <= 1.0 and dt < 30,
               f"{'; '.join(rows)}; worst amplitude error {100 * worst_amp:.2f}%, "
               f"worst latency error {worst_lat:.2f} samples, {dt:.1f} s")

    def test_c05_end_to_end_decoding(self):
        t0 = time.perf_counter()
        plan = SessionPlan(pipeline="eegnet", snr="high", seed=7)
        pipe = fit_pipeline(plan)
        res = decode_session(pipe, online_epochs(plan), plan.online)
        cdr = res.report.command_detection_rate
        control = np.array([
            decode_session(pipe, online_epochs(replace(plan, attend_gain=0.0, seed=1000 + i)), plan.online)
            .report.command_detection_rate for i in range(50)])
        se = control.std(ddof=1) / np.sqrt(len(control))
        dt = time.perf_counter() - t0
        ok = cdr >= 0.90 and abs(control.mean() - CHANCE) <= 3 * se
        record(5, ok, f"EEGNet {pipe.params['epochs']} epochs: detection {cdr:.3f}, AUC {res.report.auc:.3f}; "
                      f"zero-gain control {control.mean():.3f} +/- {se:.3f} over 50 seeds (chance {CHANCE:.3f}); "
                      f"{dt / 60:.1f} min")

    def test_c06_shift_degradation(self):
        t0 = time.perf_counter()
        sw = shift_sweep(SessionPlan(pipeline="sh-lda", snr="medium", seed=21), n_seeds=10)
        dt = time.perf_counter() - t0
        curve = ", ".join(f"{s:.2f}:{v:.3f}" for s, v in zip(sw.scales, sw.mean_detection))
        record(6, sw.spearman_rho > 0 and sw.spearman_p < 0.05,
               f"sh-lda, 10 seeds per scale, detection {curve}; rho={sw.spearman_rho:.3f}, "
               f"p={sw.spearman_p:.2e}; {dt:.0f} s")

    def test_c07_baseline_parity(self):
        t0 = time.perf_counter()
        repeats = 5 if FULL_GRID else 1
        params = {} if FULL_GRID else {a: {"epochs": 20} for a in ARCHITECTURES}
        rep = run_comparison(PIPELINE_IDS, n_subjects=6, n_repeats=repeats, snr="medium", seed=0,
                             pipeline_params=params)
        s = rep.summary()
        means = {e["pipeline"]: e["auc"]["mean"] for e in s["pipelines"]}
        structure = (all(e[k]["mean"] is not None and e[k]["std"] is not None
                         for e in s["pipelines"] for k in ("auc", "cdr", "itr"))
                     and "chi2" in s["statistics"]["friedman"]
                     and len([w for w in s["statistics"]["wilcoxon"] if "p" in w]) == 45)
        dt = time.perf_counter() - t0
        fr = s["statistics"]["friedman"]
        ok = rep.complete and structure and all(m is not None and m > 0.85 for m in means.values())
        record(7, ok, f"{'full' if FULL_GRID else 'reduced'} grid 10x6x{repeats}: mean AUC "
                      + ", ".join(f"{k} {v:.3f}" for k, v in means.items())
                      + f"; Friedman chi2={fr.get('chi2', float('nan')):.2f} p={fr.get('p', float('nan')):.3g}; "
                      f"{dt / 60:.1f} min")

    def test_c08_statistics_oracle(self):
        p = chi2_sf(22.10, 9)
        worst = 0.0
        rng = np.random.default_rng(0)
        for n in range(1, 13):
            for _ in range(20):
                d = np.round(rng.normal(size=n), 1)
                if not np.any(d != 0):
                    continue
                w, pb = brute_force_wilcoxon(d)
                r = wilcoxon_signed_rank(d)
                worst = max(worst, abs(r.pvalue - pb), abs(r.statistic - w))
        record(8, abs(p - 0.0085) <= 1e-3 and worst < 1e-12,
               f"chi2(9) tail at 22.10 = {p:.5f}; Wilcoxon vs brute force n<=12 max deviation {worst:.1e}")

    def test_c09_determinism(self, tmp_path):
        def run_twice(make_args, files):
            outs = []
            for tag in ("a", "b"):
                d = tmp_path / f"{len(checked)}{tag}"
                d.mkdir()
                assert main(make_args(d)) == 0
                outs.append([(d / f).read_bytes() for f in files])
            checked.append(outs[0] == outs[1])

        checked = []
        run_twice(lambda d: ["synth", "--seed", "4", "--repetitions", "2", "--out", str(d / "rec")],
                  ["rec.f32", "rec.meta.json"])
        rec = tmp_path / "0a" / "rec"
        run_twice(lambda d: ["train", str(rec), "--pipeline", "xdawn-ts-svm", "--seed", "2", "--out", str(d / "m")],
                  ["m.scorer.json"])
        run_twice(lambda d: ["train", str(rec), "--pipeline", "eegnet", "--epochs", "1", "--seed", "2",
                             "--out", str(d / "m")], ["m.scorer.json", "m.weights.f32", "m.model.json"])
        model = tmp_path / "1a" / "m"
        run_twice(lambda d: ["eval", str(rec), "--model", str(model), "--no-timing", "--out", str(d / "e.json")],
                  ["e.json"])
        run_twice(lambda d: ["simulate", "--pipeline", "blda", "--seed", "8", "--no-timing", "--out", str(d)],
                  ["session.json", "config.json"])
        cfg = tmp_path / "grid.json"
        cfg.write_text(json.dumps({"pipelines": ["sh-lda", "swlda", "sepconv1d"], "n_subjects": 3, "n_repeats": 2,
                                   "pipeline_params": {"sepconv1d": {"epochs": 2}}, "snr": "medium"}))
        run_twice(lambda d: ["compare", "--config", str(cfg), "--seed", "1", "--jobs", "1" if d.name.endswith("a")
                             else "2", "--no-timing", "--out", str(d)], ["metrics.csv", "summary.json"])
        grid = tmp_path / "5a" / "metrics.csv"
        run_twice(lambda d: ["stats", str(grid), "--out", str(d / "s.json")], ["s.json"])
        run_twice(lambda d: ["complexity", "all", "--no-timing", "--out", str(d / "c.json")], ["c.json"])
        names = ["synth", "train classical", "train network", "eval", "simulate", "compare jobs 1 vs 2", "stats",
                 "complexity"]
        record(9, all(checked), "byte-identical reruns: " + ", ".join(
            f"{n} {'ok' if c else 'DIFFERS'}" for n, c in zip(names, checked)))

    def test_c10_complexity_accounting(self):
        macs = {}
        equal = True
        for a in ARCHITECTURES:
            g = build_architecture(a)
            macs[a] = g.macs()
            equal &= macs[a] == instrumented_macs(g)
        rel = macs["eegnet"] / 978_300 - 1
        c = complexity(build_architecture("eegnet"), repeats=10)
        ok = equal and abs(rel) <= 0.20 and c.inference_ms_median < 50
        record(10, ok, f"analytic == instrumented for all: {equal}; MACs {macs}; EEGNet {100 * rel:+.1f}% vs 978.3K "
                       "(convolution and dense multiply-accumulates; batchnorm, activations and pooling not counted); "
                       f"EEGNet single-trial inference median {c.inference_ms_median:.2f} ms")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v", "-s"]))
