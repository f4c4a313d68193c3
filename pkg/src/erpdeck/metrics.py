"""Evaluation math: discriminability, classification metrics, ITR, ERP peaks
and the non-parametric tests used to compare pipelines."""

import math
from collections import namedtuple
from dataclasses import asdict, dataclass

import numpy as np

from .errors import IncompleteBlock, InvalidInput, InvalidWindow, UndefinedMetric

Counts = namedtuple("Counts", "tp fp tn fn")
TestResult = namedtuple("TestResult", "statistic pvalue")


# ---------------------------------------------------------------- ranks


def midranks(x):
    """1-based ranks with ties replaced by their average rank."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ranks = np.empty(len(x))
    i = 0
    n = len(x)
    while i < n:
        j = i
        while j + 1 < n and xs[j + 1] == xs[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


# ---------------------------------------------------------------- ERP statistics


def signed_r2(x1, x2, axis=0):
    """Signed squared point-biserial correlation between two classes.

    ``x1`` holds class-1 (target) trials and ``x2`` class-2 trials along
    ``axis``; the remaining axes are evaluated pointwise.  The standard
    deviation is the population one over the pooled trials, so perfectly
    separated constant classes give exactly +-1.  Points with zero pooled
    spread return 0.
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    n1 = x1.shape[axis]
    n2 = x2.shape[axis]
    if n1 < 1 or n2 < 1:
        raise InvalidInput("both classes need at least one trial")
    allx = np.concatenate([x1, x2], axis=axis)
    diff = x1.mean(axis=axis) - x2.mean(axis=axis)
    std = allx.std(axis=axis)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = math.sqrt(n1 * n2) / (n1 + n2) * diff / std
    r2 = np.where(std > 0, np.sign(diff) * r * r, 0.0)
    return float(r2) if np.ndim(r2) == 0 else r2


@dataclass
class GrandAverage:
    data: np.ndarray
    times_ms: np.ndarray
    channels: list

    def channel(self, name):
        return self.data[self.channels.index(name)]


def grand_average(e, label=1):
    """Mean waveform over the trials carrying ``label`` (``None`` = all)."""
    sel = np.ones(e.n_trials, bool) if label is None else (e.labels == label)
    if not sel.any():
        raise InvalidInput(f"no trials with label {label}")
    return GrandAverage(e.data[sel].mean(axis=0), e.times_ms, list(e.channels))


def peak_pick(ga, channel, t_lo_ms, t_hi_ms, polarity=1):
    """Extremum of the given polarity on ``channel`` inside ``[t_lo, t_hi]``.

    Returns ``(amplitude_uv, latency_ms)``.  Ties resolve to the earliest
    sample, so a flat waveform reports the window start.
    """
    if channel not in ga.channels:
        raise InvalidInput(f"unknown channel {channel!r}")
    t = ga.times_ms
    sel = np.flatnonzero((t >= t_lo_ms) & (t <= t_hi_ms))
    if sel.size == 0:
        raise InvalidWindow(f"no samples between {t_lo_ms} and {t_hi_ms} ms")
    w = ga.channel(channel)[sel]
    k = int(np.argmax(w)) if polarity >= 0 else int(np.argmin(w))
    return float(w[k]), float(t[sel[k]])


# ---------------------------------------------------------------- classification


def confusion_counts(scores, labels, threshold=0.0):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    pred = scores > threshold
    return Counts(
        tp=int(np.sum(pred & labels)),
        fp=int(np.sum(pred & ~labels)),
        tn=int(np.sum(~pred & ~labels)),
        fn=int(np.sum(~pred & labels)),
    )


def balanced_accuracy(counts):
    tp, fp, tn, fn = counts
    if tp + fn == 0 or tn + fp == 0:
        raise UndefinedMetric("balanced accuracy needs both classes")
    return 0.5 * (tp / (tp + fn) + tn / (tn + fp))


def auc(scores, labels):
    """ROC area from the Mann-Whitney statistic with midranks for ties."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    n1 = int(labels.sum())
    n0 = len(labels) - n1
    if n1 == 0 or n0 == 0:
        raise UndefinedMetric("AUC needs both classes")
    r = midranks(scores)
    return float((r[labels].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def itr(n_commands=9, p=1.0, t_select_s=2.49):
    """Information transfer rate in bits per minute (``0 log 0 := 0``)."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInput("accuracy must lie in [0, 1]")
    if n_commands < 2 or t_select_s <= 0:
        raise InvalidInput("need n_commands >= 2 and a positive selection time")
    n = n_commands
    bits = math.log2(n)
    if p > 0:
        bits += p * math.log2(p)
    if p < 1:
        bits += (1 - p) * math.log2((1 - p) / (n - 1))
    return bits * 60.0 / t_select_s


def decide_command(scores, commands):
    """Command whose flash scored highest; ties go to the lowest code."""
    scores = np.asarray(scores, dtype=np.float64)
    commands = np.asarray(commands, dtype=np.int64)
    n = len(commands)
    if n == 0 or not np.array_equal(np.sort(commands), np.arange(1, n + 1)):
        raise IncompleteBlock(f"block must score each of 1..{n} exactly once, got {commands.tolist()}")
    best = scores.max()
    return int(commands[scores == best].min())


def block_decisions(scores, labels, commands, blocks):
    """Per-block ``(true_command, decided_command)`` arrays."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    commands = np.asarray(commands)
    blocks = np.asarray(blocks)
    truth, decided = [], []
    for b in np.unique(blocks):
        sel = blocks == b
        tgt = commands[sel][labels[sel] == 1]
        if len(tgt) != 1:
            raise IncompleteBlock(f"block {b} has {len(tgt)} targets")
        truth.append(int(tgt[0]))
        decided.append(decide_command(scores[sel], commands[sel]))
    return np.array(truth), np.array(decided)


def command_detection_rate(scores, labels, commands, blocks):
    truth, decided = block_decisions(scores, labels, commands, blocks)
    return float(np.mean(truth == decided))


@dataclass
class MetricReport:
    balanced_accuracy: float
    auc: float
    command_detection_rate: float
    itr_bits_per_min: float
    counts: Counts

    def to_dict(self):
        d = asdict(self)
        d["counts"] = dict(self.counts._asdict())
        return d


def evaluate(scores, labels, commands, blocks, threshold=0.0, n_commands=9, t_select_s=2.49):
    counts = confusion_counts(scores, labels, threshold)
    cdr = command_detection_rate(scores, labels, commands, blocks)
    return MetricReport(
        balanced_accuracy=balanced_accuracy(counts),
        auc=auc(scores, labels),
        command_detection_rate=cdr,
        itr_bits_per_min=itr(n_commands, cdr, t_select_s),
        counts=counts,
    )


# ---------------------------------------------------------------- tests


def _gammainc_lower_series(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gammainc_upper_cf(a, x):
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammaincc(a, x):
    """Regularised upper incomplete gamma ``Q(a, x)``."""
    if a <= 0 or x < 0:
        raise InvalidInput("need a > 0 and x >= 0")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gammainc_lower_series(a, x))
    return _gammainc_upper_cf(a, x)


def chi2_sf(x, df):
    if x <= 0:
        return 1.0
    return gammaincc(df / 2.0, x / 2.0)


def friedman(matrix, tie_correction=False):
    """Friedman test on a ``subjects x methods`` matrix.

    Ranks are taken within each row (midranks for ties) and
    ``chi2 = 12 n / (k (k+1)) * sum(mean_rank_j^2) - 3 n (k+1)`` is referred to
    a chi-square with ``k - 1`` degrees of freedom.  With ``tie_correction``
    the statistic is divided by ``1 - sum(t^3 - t) / (n (k^3 - k))``, which is
    undefined when every row is fully tied.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise InvalidInput("expected a 2-D subjects x methods matrix")
    n, k = m.shape
    if k < 2 or n < 2:
        raise UndefinedMetric(f"Friedman needs >= 2 subjects and >= 2 methods, got {n}x{k}")
    if not np.all(np.isfinite(m)):
        raise InvalidInput("matrix contains non-finite values")
    ranks = np.vstack([midranks(row) for row in m])
    mean_rank = ranks.mean(axis=0)
    chi2 = 12.0 * n / (k * (k + 1)) * np.sum(mean_rank ** 2) - 3.0 * n * (k + 1)
    chi2 = max(0.0, float(chi2))
    if tie_correction:
        ties = 0.0
        for row in m:
            _, cnt = np.unique(row, return_counts=True)
            ties += np.sum(cnt ** 3 - cnt)
        denom = 1.0 - ties / (n * (k ** 3 - k))
        if denom <= 0:
            raise UndefinedMetric("every row is fully tied")
        chi2 /= denom
    return TestResult(chi2, chi2_sf(chi2, k - 1))


def _exact_wplus_distribution(ranks2):
    """Counts of each achievable doubled W+ over all sign assignments."""
    total = int(sum(ranks2))
    dist = np.zeros(total + 1, dtype=object)
    dist[0] = 1
    for r in ranks2:
        r = int(r)
        shifted = np.zeros_like(dist)
        shifted[r:] = dist[: total + 1 - r]
        dist = dist + shifted
    return dist


def wilcoxon_signed_rank(a, b=None, alternative="two-sided", exact_max_n=20):
    """Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped.  For ``n <= exact_max_n`` the null
    distribution of ``W+`` is enumerated exactly (midranks for tied
    magnitudes); otherwise a normal approximation with continuity and tie
    corrections is used.  The statistic is ``min(W+, W-)`` for the two-sided
    test and ``W+`` otherwise.
    """
    a = np.asarray(a, dtype=np.float64)
    d = a if b is None else a - np.asarray(b, dtype=np.float64)
    d = d[d != 0]
    n = len(d)
    if n == 0:
        raise UndefinedMetric("all paired differences are zero")
    if alternative not in ("two-sided", "greater", "less"):
        raise InvalidInput(f"unknown alternative {alternative!r}")
    r = midranks(np.abs(d))
    w_plus = float(r[d > 0].sum())
    w_minus = float(r[d < 0].sum())
    if n <= exact_max_n:
        r2 = np.rint(2 * r).astype(np.int64)
        dist = _exact_wplus_distribution(r2)
        total = float(2 ** n)
        w2 = int(round(2 * w_plus))
        p_ge = float(sum(dist[w2:])) / total
        p_le = float(sum(dist[: w2 + 1])) / total
    else:
        mean = n * (n + 1) / 4.0
        _, cnt = np.unique(np.abs(d), return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(cnt ** 3 - cnt) / 48.0
        sd = math.sqrt(var)
        p_ge = 0.5 * math.erfc((w_plus - mean - 0.5) / sd / math.sqrt(2))
        p_le = 0.5 * math.erfc(-(w_plus - mean + 0.5) / sd / math.sqrt(2))
    if alternative == "greater":
        return TestResult(w_plus, min(1.0, p_ge))
    if alternative == "less":
        return TestResult(w_plus, min(1.0, p_le))
    return TestResult(min(w_plus, w_minus), min(1.0, 2.0 * min(p_ge, p_le)))


def spearman(x, y):
    """Spearman rank correlation with a two-sided t-approximation p-value."""
    from scipy.stats import t as student_t

    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(x)
    if n < 3:
        raise UndefinedMetric("need at least 3 points")
    rx, ry = midranks(x), midranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    den = math.sqrt(float(np.sum(rx * rx) * np.sum(ry * ry)))
    if den == 0:
        raise UndefinedMetric("constant input")
    rho = float(np.sum(rx * ry) / den)
    if abs(rho) >= 1.0:
        return TestResult(rho, 0.0)
    tstat = rho * math.sqrt((n - 2) / (1 - rho * rho))
    return TestResult(rho, float(2 * student_t.sf(abs(tstat), n - 2)))
