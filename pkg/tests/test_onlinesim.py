from dataclasses import replace

import numpy as np
import pytest

from erpdeck.errors import NotFitted, UndefinedMetric, UnknownPipeline, ValidationError
from erpdeck.metrics import friedman
from erpdeck.neural.pipeline import NeuralPipeline
from erpdeck.onlinesim import (
    CSV_FIELDS,
    PIPELINE_IDS,
    SessionPlan,
    ShiftSpec,
    calibration_epochs,
    decode_session,
    fit_pipeline,
    make_pipeline,
    online_epochs,
    rows_from_csv,
    rows_to_csv,
    run_comparison,
    run_session,
    shift_sweep,
    summarize,
)
from erpdeck.rng import derive_seed
from erpdeck.sigproc.features import ZScore
from erpdeck.synthgen.protocol import ProtocolConfig

CHANCE = 1 / 9


def fake_rows(values):
    """Rows from a ``{pipeline: [auc per subject]}`` mapping."""
    rows = []
    for pid, vals in values.items():
        for s, v in enumerate(vals):
            rows.append({"subject": s, "session": 0, "pipeline": pid, "repeat": 0, "ba": v, "auc": v, "cdr": v,
                         "itr": 10 * v, "train_time_s": None, "infer_ms": None, "params": 10, "macs": None,
                         "status": "ok", "error": ""})
    return rows


class TestPlan:
    def test_online_single_trial(self):
        with pytest.raises(ValidationError):
            SessionPlan(online=ProtocolConfig(repetitions=2, targets_per_session=18))

    def test_unknown_pipeline(self):
        with pytest.raises(UnknownPipeline):
            SessionPlan(pipeline="resnet")
        with pytest.raises(UnknownPipeline):
            make_pipeline("resnet")

    def test_pipeline_ids(self):
        assert len(PIPELINE_IDS) == 10


class TestRunSession:
    def test_deterministic_and_accounting(self):
        plan = SessionPlan(pipeline="sh-lda", snr="high", seed=11)
        a, b = run_session(plan), run_session(plan)
        assert a.same_decisions(b)
        assert a.n_blocks == 18 and len(a.latency_ms) == 18
        assert a.block_scores.shape == (18, 9)
        assert a.duration_s == pytest.approx(18 * 2.49, abs=0)
        assert a.duration_s == 18 * a.selection_time_s and a.selection_time_s == 2.49
        assert a.report.command_detection_rate > 0.9

    def test_unfitted_pipeline(self):
        with pytest.raises(NotFitted):
            run_session(SessionPlan(), pipeline=make_pipeline("sh-lda"))

    def test_extended_session(self):
        plan = SessionPlan(pipeline="sh-lda", online=ProtocolConfig(repetitions=1, targets_per_session=27))
        assert run_session(plan).n_blocks == 27

    def test_zscore_isolation(self):
        plan = SessionPlan(pipeline="sepconv1d", pipeline_params={"epochs": 1}, snr="high", seed=2)
        pipe = fit_pipeline(plan)
        before = pipe.zscore.state_checksum()
        onl = online_epochs(plan)
        first = decode_session(pipe, onl, plan.online)
        assert pipe.zscore.state_checksum() == before
        assert ZScore().fit(onl).state_checksum() != before
        assert np.array_equal(decode_session(pipe, onl, plan.online).scores, first.scores)

    def test_shuffled_labels_chance_floor(self):
        cdr = []
        for i in range(50):
            plan = SessionPlan(pipeline="sh-lda", snr="high", seed=derive_seed(99, i), shuffle_labels=True)
            cdr.append(run_session(plan).report.command_detection_rate)
        se = np.std(cdr, ddof=1) / np.sqrt(len(cdr))
        assert abs(np.mean(cdr) - CHANCE) <= 3 * se


@pytest.fixture(scope="module")
def sweep():
    return shift_sweep(SessionPlan(pipeline="sh-lda", snr="medium", seed=5), n_seeds=10)


class TestShiftSweep:
    def test_trend(self, sweep):
        assert sweep.detection.shape == (10, 5)
        assert sweep.spearman_rho > 0 and sweep.spearman_p < 0.05

    def test_full_scale_matches_run_session(self, sweep):
        plan = SessionPlan(pipeline="sh-lda", snr="medium", seed=5)
        for i in (0, 3):
            ref = run_session(replace(plan, seed=derive_seed(plan.seed, "sweep", i)))
            assert sweep.detection[i, -1] == ref.report.command_detection_rate

    def test_zero_scale_chance(self, sweep):
        d = sweep.detection[:, 0]
        se = np.sqrt(CHANCE * (1 - CHANCE) / d.size / 18)
        assert abs(d.mean() - CHANCE) <= 3 * se

    def test_invalid_scales(self):
        with pytest.raises(ValidationError):
            shift_sweep(SessionPlan(), scales=(1.5,))
        with pytest.raises(ValidationError):
            shift_sweep(SessionPlan(), n_seeds=0)

    def test_latency_shift_hurts(self):
        plan = SessionPlan(pipeline="sh-lda", snr="high", seed=8)
        base = run_session(plan).report.auc
        shifted = run_session(replace(plan, shift=ShiftSpec(latency_jitter_ms=60.0))).report.auc
        assert shifted < base


class TestComparison:
    @pytest.mark.slow
    def test_smoke_grid(self):
        nets = {a: {"epochs": 0} for a in PIPELINE_IDS[5:]}
        rep = run_comparison(PIPELINE_IDS, n_subjects=6, n_repeats=2, pipeline_params=nets, timing=False)
        assert len(rep.rows) == 120 and rep.complete
        assert rep.subject_means().shape == (6, 10)
        s = rep.summary()
        assert [p["pipeline"] for p in s["pipelines"]] == list(PIPELINE_IDS)
        assert s["statistics"]["friedman"]["df"] == 9
        assert len(s["statistics"]["wilcoxon"]) == 45

    def test_single_pipeline_friedman(self):
        rep = run_comparison(["sh-lda"], n_subjects=2, n_repeats=1, timing=False)
        assert "UndefinedMetric" in rep.summary()["statistics"]["friedman"]["error"]
        with pytest.raises(UndefinedMetric):
            friedman(rep.subject_means())

    def test_wilcoxon_noise_versus_good(self):
        good = [0.95, 0.93, 0.97, 0.91, 0.96, 0.94]
        noise = [0.52, 0.48, 0.55, 0.50, 0.47, 0.51]
        pair = summarize(fake_rows({"good": good, "noise": noise}))["statistics"]["wilcoxon"][0]
        assert pair["p"] == pytest.approx(2 / 64) and pair["p"] < 0.05
        noise[0] = 0.96  # one difference changes sign
        pair = summarize(fake_rows({"good": good, "noise": noise}))["statistics"]["wilcoxon"][0]
        assert pair["p"] >= 0.05

    def test_failed_cell_recorded(self):
        rep = run_comparison(["sh-lda"], n_subjects=1, n_repeats=1, pipeline_params={"sh-lda": {"decimation": 0}},
                             timing=False)
        assert not rep.complete and rep.rows[0]["status"] == "failed"
        assert rep.summary()["failed_cells"][0]["pipeline"] == "sh-lda"

    def test_csv_round_trip(self):
        rows = fake_rows({"a": [0.9, 0.8], "b": [0.7, 0.6]})
        rows[1]["macs"] = 1234
        text = rows_to_csv(rows)
        assert text.splitlines()[0] == ",".join(CSV_FIELDS)
        back = rows_from_csv(text)
        assert back == rows
        assert rows_to_csv(back) == text

    def test_csv_missing_columns(self):
        with pytest.raises(ValidationError):
            rows_from_csv("subject,pipeline\n0,a\n")

    def test_jobs_do_not_change_rows(self):
        kw = dict(n_subjects=2, n_repeats=2, seed=4, timing=False)
        one = run_comparison(["sh-lda", "blda"], jobs=1, **kw)
        two = run_comparison(["sh-lda", "blda"], jobs=2, **kw)
        assert one.to_csv() == two.to_csv()

    def test_repeats_vary_only_fit_seed(self):
        rep = run_comparison(["sepconv1d"], n_subjects=1, n_repeats=2, pipeline_params={"sepconv1d": {"epochs": 1}},
                             timing=False)
        a, b = rep.rows
        assert a["auc"] != b["auc"]
        plans = [SessionPlan(seed=derive_seed(0, "subject", 0), subject_seed=0, fit_seed=f) for f in (1, 2)]
        assert np.array_equal(calibration_epochs(plans[0]).data, calibration_epochs(plans[1]).data)
