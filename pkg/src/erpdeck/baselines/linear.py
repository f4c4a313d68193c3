"""Linear scorers: shrinkage LDA, stepwise LDA, Bayesian LDA, elastic net and
linear SVM, all returning :class:`LinearScorer`."""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import f as f_dist

from ..errors import DegenerateLabels, EmptyModel, InvalidInput, NotFitted


@dataclass
class LinearScorer:
    """``score = X @ w + b``; ``threshold`` splits target from non-target.

    ``threshold`` is the midpoint of the projected class means on the
    training data, so that thresholded decisions are class-balanced even for
    regression-style fits with a 1:8 class ratio.
    """

    w: np.ndarray
    b: float = 0.0
    threshold: float = 0.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.w.ndim != 1 or not np.all(np.isfinite(self.w)) or not np.isfinite(self.b):
            raise InvalidInput("scorer weights must be a finite vector")

    def decision_function(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.w.size:
            raise InvalidInput(f"expected (n, {self.w.size}) features, got {X.shape}")
        return X @ self.w + self.b

    def to_dict(self):
        return {"w": self.w.tolist(), "b": float(self.b), "threshold": float(self.threshold),
                "info": _jsonable(self.info)}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["w"], float), float(d["b"]), float(d.get("threshold", 0.0)), dict(d.get("info", {})))


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, np.ndarray):
            out[k] = v.tolist()
        elif isinstance(v, (np.floating, np.integer, np.bool_)):
            out[k] = v.item()
        elif isinstance(v, (list, tuple)):
            out[k] = [x.item() if isinstance(x, np.generic) else x for x in v]
        else:
            out[k] = v
    return out


def _check_xy(X, y, min_per_class=1):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise InvalidInput(f"features {X.shape} and labels {y.shape} do not match")
    if not np.all(np.isfinite(X)):
        raise InvalidInput("features contain non-finite values")
    yb = y.astype(bool) if set(np.unique(y)).issubset({0, 1, True, False}) else y > 0
    n1 = int(yb.sum())
    if n1 < min_per_class or len(yb) - n1 < min_per_class:
        raise DegenerateLabels(f"need >= {min_per_class} trials per class, got {n1} / {len(yb) - n1}")
    return X, yb


def _midpoint(scores, yb):
    return 0.5 * (scores[yb].mean() + scores[~yb].mean())


# ------------------------------------------------------------------ LDA


def ledoit_wolf(Xc):
    """Ledoit-Wolf shrunk covariance of already-centred rows.

    Returns ``(shrunk_cov, gamma, mu)`` with
    ``shrunk = (1 - gamma) S + gamma * mu * I`` and ``mu = tr(S) / p``.
    """
    Xc = np.asarray(Xc, dtype=np.float64)
    n, p = Xc.shape
    S = Xc.T @ Xc / n
    X2 = Xc * Xc
    trace_diag = X2.sum(axis=0) / n
    mu = trace_diag.sum() / p
    beta_ = np.sum(X2.T @ X2)
    delta_ = np.sum(S * S)
    beta = (beta_ / n - delta_) / (p * n)
    delta = (delta_ - 2.0 * mu * trace_diag.sum() + p * mu * mu) / p
    beta = min(beta, delta)
    gamma = 0.0 if beta <= 0 or delta == 0 else beta / delta
    return (1.0 - gamma) * S + gamma * mu * np.eye(p), float(gamma), float(mu)


def fit_shrinkage_lda(X, y, gamma=None):
    """LDA on the pooled within-class covariance with Ledoit-Wolf shrinkage.

    ``gamma=None`` uses the analytic Ledoit-Wolf intensity; a number forces it
    (0 gives plain LDA).  ``b`` puts the decision boundary at the midpoint of
    the projected class means.
    """
    X, yb = _check_xy(X, y, min_per_class=2)
    mu1 = X[yb].mean(axis=0)
    mu0 = X[~yb].mean(axis=0)
    Xc = np.vstack([X[yb] - mu1, X[~yb] - mu0])
    n, p = Xc.shape
    if gamma is None:
        cov, gamma, _ = ledoit_wolf(Xc)
    else:
        if not 0.0 <= gamma <= 1.0:
            raise InvalidInput("gamma must lie in [0, 1]")
        S = Xc.T @ Xc / n
        mu = np.trace(S) / p
        cov = (1.0 - gamma) * S + gamma * mu * np.eye(p)
    w = np.linalg.solve(cov, mu1 - mu0)
    b = -0.5 * float(w @ (mu1 + mu0))
    return LinearScorer(w, b, 0.0, {"method": "shrinkage-lda", "gamma": float(gamma)})


# ------------------------------------------------------------------ SWLDA


def _ols(X, y):
    A = np.column_stack([np.ones(len(X)), X])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return coef, float(resid @ resid), A


def fit_swlda(X, y, p_enter=0.10, p_remove=0.15, max_terms=60, max_steps=None):
    """Stepwise least-squares discriminant with partial-F entry and removal.

    Targets are coded ``+1`` / ``-1``.  Forward steps add the candidate with
    the lowest partial-F p-value if it is below ``p_enter``; backward steps
    then drop the selected feature with the highest p-value if it exceeds
    ``p_remove``.  Candidates collinear with the current model are skipped.

    Raises
    ------
    EmptyModel
        When no feature passes the entry test.
    """
    X, yb = _check_xy(X, y)
    if not 0 < p_enter < p_remove < 1:
        raise InvalidInput("need 0 < p_enter < p_remove < 1")
    n, p = X.shape
    t = np.where(yb, 1.0, -1.0)
    Xc = X - X.mean(axis=0)
    tc = t - t.mean()
    col_ss = np.sum(Xc * Xc, axis=0)
    selected = []
    history = []
    max_steps = 4 * (max_terms + p) if max_steps is None else max_steps
    for _ in range(max_steps):
        changed = False
        # forward
        if len(selected) < max_terms:
            if selected:
                Q, _ = np.linalg.qr(Xc[:, selected])
                E = Xc - Q @ (Q.T @ Xc)
                r = tc - Q @ (Q.T @ tc)
            else:
                E, r = Xc, tc
            rss = float(r @ r)
            ee = np.sum(E * E, axis=0)
            er = E.T @ r
            ok = ee > 1e-10 * np.maximum(col_ss, 1e-300)
            ok[selected] = False
            df = n - len(selected) - 2
            if ok.any() and df > 0:
                gain = np.where(ok, er * er / np.where(ok, ee, 1.0), 0.0)
                rss_new = np.maximum(rss - gain, 1e-300)
                F = gain / (rss_new / df)
                pv = np.where(ok, f_dist.sf(F, 1, df), np.inf)
                j = int(np.argmin(pv))
                if pv[j] < p_enter:
                    selected.append(j)
                    history.append(("add", j, float(pv[j])))
                    changed = True
        # backward
        if len(selected) > 1:
            coef, rss, A = _ols(Xc[:, selected], tc)
            df = n - len(selected) - 1
            cov_diag = np.diag(np.linalg.pinv(A.T @ A))[1:]
            F = coef[1:] ** 2 / np.maximum(cov_diag * rss / df, 1e-300)
            pv = f_dist.sf(F, 1, df)
            k = int(np.argmax(pv))
            if pv[k] > p_remove:
                history.append(("remove", selected[k], float(pv[k])))
                del selected[k]
                changed = True
        if not changed:
            break
    if not selected:
        raise EmptyModel("no feature passed the entry test")
    coef, _, _ = _ols(X[:, selected], t)
    w = np.zeros(p)
    w[selected] = coef[1:]
    b = float(coef[0])
    s = X @ w + b
    return LinearScorer(w, b, float(_midpoint(s, yb)),
                        {"method": "swlda", "selected": sorted(int(j) for j in selected), "steps": len(history)})


# ------------------------------------------------------------------ BLDA


def fit_blda(X, y, tol=1e-6, max_iter=500, alpha0=1.0, beta0=None, freeze_alpha=False):
    """Bayesian linear regression onto ``+1`` / ``-1`` targets with evidence
    maximisation of the prior precision ``alpha`` and noise precision ``beta``.

    The bias has a flat prior, handled by centring.  ``info`` holds the
    ``alpha`` / ``beta`` traces and a ``converged`` flag; non-convergence
    emits a ``RuntimeWarning`` and keeps the last iterate.
    """
    X, yb = _check_xy(X, y)
    n, p = X.shape
    t = np.where(yb, 1.0, -1.0)
    xm = X.mean(axis=0)
    tm = t.mean()
    Xc = X - xm
    tc = t - tm
    s, U = np.linalg.eigh(Xc.T @ Xc)
    s = np.maximum(s, 0.0)
    proj = U.T @ (Xc.T @ tc)
    alpha = float(alpha0)
    beta = float(1.0 / max(np.var(t), 1e-12)) if beta0 is None else float(beta0)
    alphas, betas = [alpha], [beta]
    converged = False
    for _ in range(max_iter):
        coef_u = beta * proj / (beta * s + alpha)
        m = U @ coef_u
        lam = beta * s
        gamma = float(np.sum(lam / (lam + alpha)))
        resid = tc - Xc @ m
        rss = float(resid @ resid)
        mm = float(m @ m)
        new_alpha = alpha if freeze_alpha else (gamma / mm if mm > 0 else alpha * 1e6)
        new_beta = (n - 1 - gamma) / max(rss, 1e-300)
        new_beta = min(new_beta, 1e300)
        d_alpha = abs(new_alpha - alpha) / max(abs(alpha), 1e-300)
        d_beta = abs(new_beta - beta) / max(abs(beta), 1e-300)
        alpha, beta = new_alpha, new_beta
        alphas.append(alpha)
        betas.append(beta)
        if d_alpha < tol and d_beta < tol:
            converged = True
            break
    m = U @ (beta * proj / (beta * s + alpha))
    if not converged:
        warnings.warn("BLDA evidence maximisation did not converge", RuntimeWarning, stacklevel=2)
    b = float(tm - xm @ m)
    sc = X @ m + b
    return LinearScorer(m, b, float(_midpoint(sc, yb)), {
        "method": "blda", "alpha": alpha, "beta": beta, "converged": converged,
        "alpha_trace": alphas, "beta_trace": betas,
    })


# ------------------------------------------------------------------ elastic net


def _soft(x, t):
    return np.sign(x) * max(abs(x) - t, 0.0)


def fit_elastic_net(X, y, alpha=1e-3, l1_ratio=0.5, tol=1e-6, max_iter=10_000):
    """Elastic-net regression by cyclic coordinate descent.

    Minimises ``1/(2n) ||t - Xw - b||^2 + alpha * l1_ratio * ||w||_1
    + alpha * (1 - l1_ratio) / 2 * ||w||^2`` with an unpenalised intercept;
    ``y`` is either binary (mapped to ``+1`` / ``-1``) or real-valued.
    Stops when the largest coefficient change of a sweep is below ``tol``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise InvalidInput("features and targets do not match")
    if alpha < 0 or not 0 <= l1_ratio <= 1:
        raise InvalidInput("need alpha >= 0 and l1_ratio in [0, 1]")
    binary = set(np.unique(y)).issubset({0.0, 1.0})
    t = np.where(y > 0, 1.0, -1.0) if binary else y
    n, p = X.shape
    xm = X.mean(axis=0)
    tm = t.mean()
    Xc = X - xm
    r = t - tm
    w = np.zeros(p)
    norms = np.sum(Xc * Xc, axis=0) / n
    l1 = alpha * l1_ratio
    l2 = alpha * (1.0 - l1_ratio)
    it = 0
    for it in range(1, max_iter + 1):
        max_change = 0.0
        for j in range(p):
            if norms[j] == 0:
                continue
            xj = Xc[:, j]
            old = w[j]
            rho = xj @ r / n + norms[j] * old
            new = _soft(rho, l1) / (norms[j] + l2)
            if new != old:
                r -= xj * (new - old)
                w[j] = new
                max_change = max(max_change, abs(new - old))
        if max_change < tol:
            break
    b = float(tm - xm @ w)
    info = {"method": "elastic-net", "alpha": alpha, "l1_ratio": l1_ratio, "iterations": it}
    thr = 0.0
    if binary and 0 < (t > 0).sum() < n:
        s = X @ w + b
        thr = float(_midpoint(s, t > 0))
    return LinearScorer(w, b, thr, info)


# ------------------------------------------------------------------ linear SVM


def fit_linear_svm(X, y, C=1.0, epochs=500, eta0=1.0):
    """Soft-margin linear SVM by full-batch subgradient descent.

    Minimises ``1/2 ||w||^2 + C * sum(hinge)`` (scaled by ``1 / (C n)``)
    with step ``eta0 / sqrt(t)`` for a fixed number of epochs and returns
    the iterate with the lowest objective.  Fully deterministic.
    """
    X, yb = _check_xy(X, y)
    if C <= 0:
        raise InvalidInput("C must be positive")
    n, p = X.shape
    t = np.where(yb, 1.0, -1.0)
    lam = 1.0 / (C * n)
    w = np.zeros(p)
    b = 0.0

    def objective(w, b):
        return 0.5 * lam * (w @ w) + np.mean(np.maximum(0.0, 1.0 - t * (X @ w + b)))

    best = (objective(w, b), w.copy(), b)
    for k in range(1, epochs + 1):
        margin = t * (X @ w + b)
        act = margin < 1.0
        gw = lam * w - (t[act] @ X[act]) / n
        gb = -t[act].sum() / n
        eta = eta0 / np.sqrt(k)
        w = w - eta * gw
        b = b - eta * gb
        obj = objective(w, b)
        if obj < best[0]:
            best = (obj, w.copy(), b)
    obj, w, b = best
    s = X @ w + b
    return LinearScorer(w, float(b), float(_midpoint(s, yb)),
                        {"method": "linear-svm", "C": C, "objective": float(obj)})


def require_fitted(obj, attr):
    if getattr(obj, attr, None) is None:
        raise NotFitted(f"{type(obj).__name__} is not fitted")
