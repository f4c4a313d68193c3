"""Symmetric eigenproblems and SPD matrix functions.

Arrays are plain ``float64`` ndarrays.  Every function accepts a single
matrix ``(n, n)`` or a stack ``(..., n, n)``; stacks are diagonalised
together by running the same cyclic Jacobi rotation schedule on all members
at once, which keeps the per-trial covariance maps of the tangent-space
pipelines vectorised.
"""

import numpy as np

from .errors import InvalidInput, NotPositiveDefinite

SPD_FLOOR = 1e-10
JACOBI_TOL = 1e-15
MAX_SWEEPS = 60


def check_symmetric(A, name="A"):
    """Validate and return ``A`` as a float64 symmetric (stack of) matrix."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise InvalidInput(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInput(f"{name} contains non-finite values")
    scale = np.max(np.abs(A)) if A.size else 0.0
    asym = np.max(np.abs(A - np.swapaxes(A, -1, -2))) if A.size else 0.0
    if asym > 1e-12 * scale:
        raise InvalidInput(f"{name} is not symmetric (max asymmetry {asym:.3g})")
    return A


def symmetrize(A):
    A = np.asarray(A, dtype=np.float64)
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def _round_robin(n):
    """Pair schedule covering every ``(p, q)`` once per sweep in ``m - 1``
    rounds of disjoint pairs (``m`` = n rounded up to even)."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def sym_eig(A):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    A : ndarray, shape (..., n, n)
        Symmetric matrix or stack of matrices.

    Returns
    -------
    w : ndarray, shape (..., n)
        Eigenvalues in ascending order.
    V : ndarray, shape (..., n, n)
        Orthonormal eigenvectors stored as columns, ``A @ V = V * w``.
    """
    A = check_symmetric(A)
    shape = A.shape
    n = shape[-1]
    a = A.reshape(-1, n, n).copy()
    b = a.shape[0]
    v = np.broadcast_to(np.eye(n), (b, n, n)).copy()
    if n == 1:
        return a[:, 0, 0].reshape(shape[:-1]), v.reshape(shape)

    scale = np.sqrt(np.sum(a * a, axis=(1, 2)))
    scale[scale == 0] = 1.0
    iu = np.triu_indices(n, 1)
    rounds = _round_robin(n)
    for _ in range(MAX_SWEEPS):
        off = np.sqrt(2.0 * np.sum(a[:, iu[0], iu[1]] ** 2, axis=1))
        if np.all(off <= JACOBI_TOL * scale):
            break
        for P, Q in rounds:
            apq = a[:, P, Q]
            app = a[:, P, P]
            aqq = a[:, Q, Q]
            active = np.abs(apq) > 1e-300
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                theta = np.where(active, (aqq - app) / (2.0 * apq), 0.0)
                t = np.where(
                    active,
                    np.sign(theta + (theta == 0)) / (np.abs(theta) + np.sqrt(theta * theta + 1.0)),
                    0.0,
                )
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            cc = c[:, None, :]
            ss = s[:, None, :]
            ap = a[:, :, P]
            aq = a[:, :, Q]
            a[:, :, P] = cc * ap - ss * aq
            a[:, :, Q] = ss * ap + cc * aq
            cr = c[:, :, None]
            sr = s[:, :, None]
            ap = a[:, P, :]
            aq = a[:, Q, :]
            a[:, P, :] = cr * ap - sr * aq
            a[:, Q, :] = sr * ap + cr * aq
            a[:, P, Q] = 0.0
            a[:, Q, P] = 0.0
            vp = v[:, :, P]
            vq = v[:, :, Q]
            v[:, :, P] = cc * vp - ss * vq
            v[:, :, Q] = ss * vp + cc * vq
    w = np.diagonal(a, axis1=1, axis2=2).copy()
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w.reshape(shape[:-1]), v.reshape(shape)


def _apply(w, V, fn):
    return symmetrize((V * fn(w)[..., None, :]) @ np.swapaxes(V, -1, -2))


def regularize(A, eps=SPD_FLOOR):
    """Add ``eps * trace(A) / n`` to the diagonal."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[-1]
    tr = np.trace(A, axis1=-2, axis2=-1)
    return A + (eps * tr / n)[..., None, None] * np.eye(n)


def _spd_eig(A, floor=True):
    A = check_symmetric(A)
    if floor:
        A = regularize(A)
    w, V = sym_eig(A)
    if np.any(w <= 0):
        raise NotPositiveDefinite(f"matrix has eigenvalue {w.min():.3g} <= 0")
    return w, V


def spd_logm(A):
    """Matrix logarithm of an SPD matrix (after the diagonal floor)."""
    w, V = _spd_eig(A)
    return _apply(w, V, np.log)


def spd_sqrtm(A):
    w, V = _spd_eig(A)
    return _apply(w, V, np.sqrt)


def spd_invsqrt(A):
    w, V = _spd_eig(A)
    return _apply(w, V, lambda x: 1.0 / np.sqrt(x))


def spd_inv(A):
    w, V = _spd_eig(A)
    return _apply(w, V, lambda x: 1.0 / x)


def spd_powm(A, alpha):
    w, V = _spd_eig(A)
    return _apply(w, V, lambda x: x ** alpha)


def spd_expm(S):
    """Matrix exponential of a symmetric matrix (result is SPD)."""
    w, V = sym_eig(S)
    return _apply(w, V, np.exp)


def gen_eig_spd(A, B):
    """Solve ``A v = lambda B v`` for symmetric ``A`` and SPD ``B``.

    Eigenvalues are returned in descending order; eigenvectors are the
    columns of ``V`` and are ``B``-orthonormal (``V.T @ B @ V = I``).
    """
    A = check_symmetric(A, "A")
    B = check_symmetric(B, "B")
    wb, Vb = sym_eig(B)
    if np.any(wb <= 0):
        raise NotPositiveDefinite(f"B has eigenvalue {wb.min():.3g} <= 0")
    isq = _apply(wb, Vb, lambda x: 1.0 / np.sqrt(x))
    C = symmetrize(isq @ A @ isq)
    w, U = sym_eig(C)
    V = isq @ U
    return w[..., ::-1].copy(), V[..., ::-1].copy()
