"""xDAWN spatial filtering and tangent-space features of augmented covariances."""

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateLabels, InvalidInput, NotPositiveDefinite
from ..tensorkit import (
    gen_eig_spd,
    regularize,
    spd_expm,
    spd_invsqrt,
    spd_logm,
    spd_sqrtm,
    sym_eig,
    symmetrize,
)

METRICS = ("log-euclidean", "riemann")


def _epochs(e):
    x = np.asarray(getattr(e, "data", e), dtype=np.float64)
    if x.ndim != 3:
        raise InvalidInput(f"expected (trials, channels, samples), got {x.shape}")
    return x


def _cov(x):
    """Sample covariance of a stack ``(..., m, T)`` with per-row mean removed."""
    xc = x - x.mean(axis=-1, keepdims=True)
    return symmetrize(xc @ np.swapaxes(xc, -1, -2) / (x.shape[-1] - 1))


@dataclass
class Xdawn:
    """Fitted xDAWN filters.

    Attributes
    ----------
    filters : ndarray, shape (n_classes * n_filters, channels)
        Rows are spatial filters, one block per fitted class.
    eigvals : ndarray, shape (n_classes, n_filters)
    prototype : ndarray, shape (n_classes * n_filters, samples)
        Target-class average filtered by all filters.
    noise_cov : ndarray, shape (channels, channels)
    """

    filters: np.ndarray
    eigvals: np.ndarray
    prototype: np.ndarray
    noise_cov: np.ndarray
    signal_covs: np.ndarray
    n_filters: int

    def transform(self, e):
        return np.einsum("fc,ncs->nfs", self.filters, _epochs(e))

    def target_filters(self):
        return self.filters[: self.n_filters]

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in ("filters", "eigvals", "prototype", "noise_cov", "signal_covs")} | {
            "n_filters": self.n_filters
        }

    @classmethod
    def from_dict(cls, d):
        return cls(*(np.asarray(d[k], float) for k in ("filters", "eigvals", "prototype", "noise_cov", "signal_covs")),
                   int(d["n_filters"]))


def fit_xdawn(e, labels=None, n_filters=4, classes=(1,)):
    """Fit xDAWN filters for each class in ``classes`` (default: targets only).

    For class ``c`` the filters are the leading generalised eigenvectors of
    ``(P_c P_c^T, C_noise)`` where ``P_c`` is the class-average epoch and
    ``C_noise`` the covariance of all epochs concatenated.  Filters are
    ``C_noise``-orthonormal within each class.
    """
    x = _epochs(e)
    y = np.asarray(getattr(e, "labels", labels) if labels is None else labels)
    if len(y) != len(x):
        raise InvalidInput("labels do not match trials")
    n, C, T = x.shape
    if not 1 <= n_filters <= C:
        raise InvalidInput(f"n_filters must lie in 1..{C}")
    if not np.any(y == 1):
        raise DegenerateLabels("xDAWN needs target trials")
    flat = np.moveaxis(x, 1, 0).reshape(C, -1)
    flat = flat - flat.mean(axis=1, keepdims=True)
    noise = symmetrize(flat @ flat.T / (flat.shape[1] - 1))
    noise = regularize(noise)
    filters, eigvals, sig = [], [], []
    for c in classes:
        sel = y == c
        if not sel.any():
            raise DegenerateLabels(f"xDAWN needs trials of class {c}")
        P = x[sel].mean(axis=0)
        S = symmetrize(P @ P.T / (T - 1))
        w, V = gen_eig_spd(S, noise)
        filters.append(V[:, :n_filters].T)
        eigvals.append(w[:n_filters])
        sig.append(S)
    filters = np.vstack(filters)
    proto = filters @ x[y == 1].mean(axis=0)
    return Xdawn(filters, np.asarray(eigvals), proto, noise, np.asarray(sig), n_filters)


def augmented_covariances(xd, e):
    """Covariances of ``[prototype; filtered trial]`` per trial, ``(n, m, m)``."""
    z = xd.transform(e)
    proto = np.broadcast_to(xd.prototype, (len(z),) + xd.prototype.shape)
    aug = np.concatenate([proto, z], axis=1)
    return regularize(_cov(aug))


def upper_vec(S):
    """Upper triangle (row-major) with off-diagonal entries scaled by sqrt(2)."""
    S = np.asarray(S)
    m = S.shape[-1]
    iu = np.triu_indices(m)
    coef = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    return S[..., iu[0], iu[1]] * coef


def unupper_vec(v, m):
    v = np.asarray(v)
    iu = np.triu_indices(m)
    coef = np.where(iu[0] == iu[1], 1.0, 1.0 / np.sqrt(2.0))
    S = np.zeros(v.shape[:-1] + (m, m))
    S[..., iu[0], iu[1]] = v * coef
    S[..., iu[1], iu[0]] = v * coef
    return S


def log_euclidean_mean(covs):
    return spd_expm(spd_logm(covs).mean(axis=0))


def riemann_mean(covs, tol=1e-7, max_iter=100):
    """Affine-invariant (Karcher) mean by fixed-point iteration."""
    G = log_euclidean_mean(covs)
    for _ in range(max_iter):
        h = spd_sqrtm(G)
        ih = spd_invsqrt(G)
        T = spd_logm(symmetrize(ih @ covs @ ih)).mean(axis=0)
        G = symmetrize(h @ spd_expm(T) @ h)
        if np.linalg.norm(T) < tol:
            break
    return G


def airm_distance(A, B):
    """Affine-invariant geodesic distance ``||logm(A^-1/2 B A^-1/2)||_F``."""
    ih = spd_invsqrt(A)
    L = spd_logm(symmetrize(ih @ B @ ih))
    return float(np.sqrt(np.sum(L * L)))


def tangent_vectors(covs, ref, metric="riemann"):
    """Map SPD matrices to tangent vectors at ``ref``."""
    if metric not in METRICS:
        raise InvalidInput(f"metric must be one of {METRICS}")
    covs = np.asarray(covs, dtype=np.float64)
    if metric == "riemann":
        ih = spd_invsqrt(ref)
        L = spd_logm(symmetrize(ih @ covs @ ih))
    else:
        L = spd_logm(covs) - spd_logm(ref)
    return upper_vec(L)


@dataclass
class TangentSpace:
    """Reference point and metric of a fitted tangent-space map."""

    metric: str = "riemann"
    reference: np.ndarray = None

    def fit(self, covs):
        if self.metric not in METRICS:
            raise InvalidInput(f"metric must be one of {METRICS}")
        self.reference = riemann_mean(covs) if self.metric == "riemann" else log_euclidean_mean(covs)
        w, _ = sym_eig(self.reference)
        if w.min() <= 0:
            raise NotPositiveDefinite("tangent reference is not SPD")
        return self

    def transform(self, covs):
        return tangent_vectors(covs, self.reference, self.metric)


def ts_features(e, xd, ts):
    """Tangent-space feature matrix for epochs ``e`` given a fitted xDAWN and
    tangent map; length ``m (m + 1) / 2`` per trial for ``m x m`` covariances."""
    return ts.transform(augmented_covariances(xd, e))
