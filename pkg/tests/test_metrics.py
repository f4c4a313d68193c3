import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from erpdeck.errors import IncompleteBlock, InvalidWindow, UndefinedMetric
from erpdeck.metrics import (
    Counts,
    GrandAverage,
    auc,
    balanced_accuracy,
    chi2_sf,
    command_detection_rate,
    decide_command,
    evaluate,
    friedman,
    itr,
    peak_pick,
    signed_r2,
    spearman,
    wilcoxon_signed_rank,
)


def brute_force_wilcoxon(d):
    """Two-sided exact p by enumerating every sign assignment."""
    d = np.asarray(d, float)
    d = d[d != 0]
    from scipy.stats import rankdata

    r = rankdata(np.abs(d))
    w = r[d > 0].sum()
    total = r.sum()
    ws = np.array([sum(ri for ri, s in zip(r, signs) if s) for signs in itertools.product([0, 1], repeat=len(d))])
    p_ge = np.mean(ws >= w - 1e-9)
    p_le = np.mean(ws <= w + 1e-9)
    return min(w, total - w), min(1.0, 2 * min(p_ge, p_le))


class TestSignedR2:
    def test_perfect_separation(self):
        assert signed_r2([1.0, 1.0], [0.0, 0.0]) == 1.0

    def test_equal_means(self):
        assert signed_r2([1.0, -1.0], [2.0, -2.0]) == 0.0

    def test_zero_spread(self):
        assert signed_r2([3.0], [3.0]) == 0.0

    @given(st.integers(1, 20), st.integers(1, 20), st.integers(0, 10_000))
    def test_pearson_oracle_and_antisymmetry(self, n1, n2, seed):
        rng = np.random.default_rng(seed)
        x1, x2 = rng.normal(1, 1, n1), rng.normal(0, 1, n2)
        v = np.concatenate([x1, x2])
        lab = np.r_[np.ones(n1), np.zeros(n2)]
        r = np.corrcoef(v, lab)[0, 1]
        s = signed_r2(x1, x2)
        assert abs(abs(s) - r * r) < 1e-12
        assert np.sign(s) == np.sign(x1.mean() - x2.mean())
        assert signed_r2(x2, x1) == pytest.approx(-s, abs=1e-15)
        assert -1 <= s <= 1

    def test_pointwise(self):
        rng = np.random.default_rng(0)
        x1, x2 = rng.normal(size=(5, 3, 4)), rng.normal(size=(7, 3, 4))
        out = signed_r2(x1, x2)
        assert out.shape == (3, 4)
        assert out[1, 2] == pytest.approx(signed_r2(x1[:, 1, 2], x2[:, 1, 2]))


class TestBalancedAccuracy:
    def test_example(self):
        assert balanced_accuracy(Counts(tp=7, fp=2, tn=70, fn=2)) == pytest.approx(0.8750, abs=5e-5)

    def test_extremes(self):
        assert balanced_accuracy(Counts(5, 0, 40, 0)) == 1.0
        assert balanced_accuracy(Counts(0, 40, 0, 5)) == 0.0

    def test_empty_class(self):
        with pytest.raises(UndefinedMetric):
            balanced_accuracy(Counts(0, 3, 4, 0))


class TestAuc:
    def test_separated(self):
        assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_ties(self):
        assert auc(np.ones(10), [0] * 5 + [1] * 5) == 0.5

    def test_random(self):
        rng = np.random.default_rng(0)
        assert abs(auc(rng.normal(size=1000), rng.integers(0, 2, 1000)) - 0.5) < 0.05

    def test_single_class(self):
        with pytest.raises(UndefinedMetric):
            auc([1, 2], [1, 1])

    @given(st.integers(0, 10_000), st.integers(4, 60))
    def test_matches_trapezoid_and_sklearn(self, seed, n):
        from sklearn.metrics import roc_auc_score

        rng = np.random.default_rng(seed)
        s = np.round(rng.normal(size=n), 1)  # rounding creates ties
        y = np.r_[0, 1, rng.integers(0, 2, n - 2)]
        ref = roc_auc_score(y, s)
        assert abs(auc(s, y) - ref) < 1e-12
        # trapezoid over the ROC staircase
        thr = np.r_[np.inf, np.unique(s)[::-1]]
        tpr = [np.mean(s[y == 1] >= t) for t in thr]
        fpr = [np.mean(s[y == 0] >= t) for t in thr]
        trap = np.sum(np.diff(fpr) * (np.array(tpr[1:]) + np.array(tpr[:-1])) / 2)
        assert abs(auc(s, y) - trap) < 1e-12

    @given(st.integers(0, 10_000))
    def test_monotone_invariance(self, seed):
        rng = np.random.default_rng(seed)
        s, y = rng.normal(size=40), np.r_[0, 1, rng.integers(0, 2, 38)]
        assert auc(s, y) == auc(np.exp(3 * s) + 7, y)


class TestItr:
    def test_perfect(self):
        assert itr(9, 1.0, 2.49) == pytest.approx(math.log2(9) * 60 / 2.49)
        assert itr(9, 1.0, 2.49) == pytest.approx(76.38, abs=0.01)

    def test_chance(self):
        assert itr(9, 1 / 9, 2.49) == pytest.approx(0.0, abs=1e-12)

    def test_reference_row(self):
        value = itr(9, 0.9722, 2.49)
        assert abs(value - 70.65) <= 1.5
        assert value == pytest.approx(69.96, abs=0.01)

    def test_monotone_above_chance(self):
        ps = np.linspace(1 / 9, 1, 200)
        vals = [itr(9, p) for p in ps]
        assert np.all(np.diff(vals) >= -1e-12)


class TestDecisions:
    def test_target_max(self):
        assert decide_command([0.1, 0.9, 0.2], [3, 1, 2]) == 1

    def test_tie_break(self):
        assert decide_command([0.5, 0.5, 0.1], [3, 2, 1]) == 2

    def test_incomplete(self):
        with pytest.raises(IncompleteBlock):
            decide_command([0.1, 0.2], [1, 3])

    @given(st.integers(0, 10_000))
    def test_monotone_and_permutation(self, seed):
        rng = np.random.default_rng(seed)
        s = rng.normal(size=9)
        cmds = rng.permutation(9) + 1
        c = decide_command(s, cmds)
        assert decide_command(np.tanh(s) * 4 + 1, cmds) == c
        perm = rng.permutation(9)
        assert decide_command(s[perm], cmds[perm]) == c

    def test_random_scores_chance(self):
        rng = np.random.default_rng(0)
        nb = 4000
        cmds = np.tile(np.arange(1, 10), nb)
        blocks = np.repeat(np.arange(nb), 9)
        targets = rng.integers(1, 10, nb)
        labels = (cmds == np.repeat(targets, 9)).astype(int)
        cdr = command_detection_rate(rng.normal(size=9 * nb), labels, cmds, blocks)
        assert abs(cdr - 1 / 9) < 3 * math.sqrt((1 / 9) * (8 / 9) / nb)

    def test_evaluate(self):
        cmds = np.tile(np.arange(1, 10), 2)
        labels = np.r_[np.eye(9)[2], np.eye(9)[5]].astype(int)
        scores = labels * 2.0 - 1.0
        rep = evaluate(scores, labels, cmds, np.repeat([0, 1], 9))
        assert rep.command_detection_rate == 1.0 and rep.auc == 1.0 and rep.balanced_accuracy == 1.0


class TestPeakPick:
    ga = GrandAverage(np.zeros((2, 100)), np.arange(100) * 2.0, ["Fz", "Pz"])

    def test_flat(self):
        assert peak_pick(self.ga, "Pz", 20, 60) == (0.0, 20.0)

    def test_polarity(self):
        d = np.zeros((2, 100))
        d[1, 30], d[1, 40] = 3.0, -2.0
        ga = GrandAverage(d, self.ga.times_ms, ["Fz", "Pz"])
        assert peak_pick(ga, "Pz", 0, 198, 1) == (3.0, 60.0)
        assert peak_pick(ga, "Pz", 0, 198, -1) == (-2.0, 80.0)

    def test_empty_window(self):
        with pytest.raises(InvalidWindow):
            peak_pick(self.ga, "Pz", 500, 600)


class TestFriedman:
    def test_identical_columns(self):
        assert friedman(np.tile([[0.7], [0.8], [0.9]], (1, 4))).statistic == 0.0

    def test_reference_tail(self):
        assert abs(chi2_sf(22.10, 9) - 0.0085) <= 1e-3

    @given(st.floats(0.01, 60), st.integers(1, 30))
    def test_tail_matches_scipy(self, x, df):
        from scipy.stats import chi2

        assert abs(chi2_sf(x, df) - chi2.sf(x, df)) < 1e-10

    def test_matches_scipy(self):
        from scipy.stats import friedmanchisquare

        m = np.random.default_rng(0).normal(size=(6, 10))
        ref = friedmanchisquare(*m.T)
        res = friedman(m)
        assert res.statistic == pytest.approx(ref.statistic, rel=1e-12)
        assert res.pvalue == pytest.approx(ref.pvalue, rel=1e-9)

    def test_tie_correction_matches_scipy(self):
        from scipy.stats import friedmanchisquare

        m = np.round(np.random.default_rng(1).normal(size=(8, 4)), 0)
        assert friedman(m, tie_correction=True).statistic == pytest.approx(friedmanchisquare(*m.T).statistic)

    def test_degenerate(self):
        with pytest.raises(UndefinedMetric):
            friedman(np.ones((5, 1)))
        with pytest.raises(UndefinedMetric):
            friedman(np.ones((4, 3)), tie_correction=True)


class TestWilcoxon:
    def test_all_positive_n6(self):
        res = wilcoxon_signed_rank(np.arange(1, 7) * 0.1, np.zeros(6), alternative="greater")
        assert res.pvalue == pytest.approx(1 / 64, abs=1e-15)
        assert wilcoxon_signed_rank(np.arange(1, 7), np.zeros(6)).pvalue == pytest.approx(2 / 64)

    @pytest.mark.parametrize("n", range(1, 13))
    def test_brute_force(self, n):
        rng = np.random.default_rng(n)
        for _ in range(5):
            d = np.round(rng.normal(size=n), 1)  # ties and zeros included
            if not np.any(d != 0):
                continue
            w, p = brute_force_wilcoxon(d)
            res = wilcoxon_signed_rank(d)
            assert res.statistic == pytest.approx(w)
            assert res.pvalue == pytest.approx(p, abs=1e-12)

    def test_matches_scipy_exact(self):
        from scipy.stats import wilcoxon

        d = np.random.default_rng(3).normal(size=15)
        assert wilcoxon_signed_rank(d).pvalue == pytest.approx(wilcoxon(d, method="exact").pvalue, rel=1e-12)

    def test_zero_differences(self):
        with pytest.raises(UndefinedMetric):
            wilcoxon_signed_rank(np.ones(4), np.ones(4))


class TestSpearman:
    def test_matches_scipy(self):
        from scipy.stats import spearmanr

        rng = np.random.default_rng(0)
        x = np.repeat([0, 0.25, 0.5, 0.75, 1.0], 10)
        y = x + rng.normal(size=50) * 0.5
        ref = spearmanr(x, y)
        res = spearman(x, y)
        assert res.statistic == pytest.approx(ref.statistic, rel=1e-12)
        assert res.pvalue == pytest.approx(ref.pvalue, rel=1e-9)

    def test_constant(self):
        with pytest.raises(UndefinedMetric):
            spearman([1, 1, 1], [1, 2, 3])
