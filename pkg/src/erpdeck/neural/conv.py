"""Grouped, strided, dilated 2-D convolution kernels on ``(N, C, H, W)`` arrays.

Two forward paths are kept on purpose: an im2col/GEMM path used for training
and a per-tap loop that also counts the multiply-accumulates it performs.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def same_pads(size, k_eff, stride):
    """TF/Keras "same" split: the odd sample of padding goes to the end."""
    out = -(-size // stride)
    total = max((out - 1) * stride + k_eff - size, 0)
    return total // 2, total - total // 2


def resolve_pads(padding, in_hw, kernel, stride, dilation):
    """``((top, bottom), (left, right))`` for a padding mode or explicit pads."""
    k_eff = [(k - 1) * d + 1 for k, d in zip(kernel, dilation)]
    if padding == "valid":
        return (0, 0), (0, 0)
    if padding == "same":
        return tuple(same_pads(n, k, s) for n, k, s in zip(in_hw, k_eff, stride))
    if padding == "causal":
        return (0, 0), (k_eff[1] - 1, 0)
    (t, b), (l, r) = padding
    return (int(t), int(b)), (int(l), int(r))


def out_size(n, pad, k, stride, dilation):
    return (n + pad[0] + pad[1] - (k - 1) * dilation - 1) // stride + 1


def _pad(x, pads):
    if pads == ((0, 0), (0, 0)):
        return x
    return np.pad(x, ((0, 0), (0, 0), pads[0], pads[1]))


def conv2d_forward(x, w, stride=(1, 1), dilation=(1, 1), groups=1, pads=((0, 0), (0, 0))):
    """Cross-correlation; returns ``(y, cache)``.

    ``w`` has shape ``(C_out, C_in / groups, kh, kw)``.
    """
    N, C, H, W = x.shape
    Co, Cg, kh, kw = w.shape
    G = groups
    Cog = Co // G
    sh, sw = stride
    dh, dw = dilation
    xp = _pad(x, pads)
    Ho = out_size(H, pads[0], kh, sh, dh)
    Wo = out_size(W, pads[1], kw, sw, dw)
    win = sliding_window_view(xp, ((kh - 1) * dh + 1, (kw - 1) * dw + 1), axis=(2, 3))
    win = win[:, :, ::sh, ::sw, ::dh, ::dw][:, :, :Ho, :Wo]
    K = Cg * kh * kw
    P = Ho * Wo
    cols = win.reshape(N, G, Cg, Ho, Wo, kh, kw).transpose(0, 1, 3, 4, 2, 5, 6).reshape(N, G, P, K)
    wm = w.reshape(G, Cog, K).transpose(0, 2, 1)
    if G == 1:
        out = (cols.reshape(N * P, K) @ wm[0]).reshape(N, 1, P, Cog)
    else:
        out = np.matmul(cols, wm)
    y = np.ascontiguousarray(out.transpose(0, 1, 3, 2)).reshape(N, Co, Ho, Wo)
    cache = (x.shape, xp.shape, cols, (Ho, Wo))
    return y, cache


def conv2d_backward(dy, w, cache, stride=(1, 1), dilation=(1, 1), groups=1, pads=((0, 0), (0, 0)), need_dx=True):
    """Gradients ``(dx, dw)`` of the convolution given upstream ``dy``.

    ``dx`` is ``None`` when ``need_dx`` is false (first layer of a network).
    """
    x_shape, xp_shape, cols, (Ho, Wo) = cache
    N, C, H, W = x_shape
    Co, Cg, kh, kw = w.shape
    G = groups
    Cog = Co // G
    sh, sw = stride
    dh, dw_ = dilation
    K = Cg * kh * kw
    P = Ho * Wo
    dO = dy.reshape(N, G, Cog, P).transpose(0, 1, 3, 2)
    wm = w.reshape(G, Cog, K)
    if G == 1:
        dO2 = dO.reshape(N * P, Cog)
        dwm = (cols.reshape(N * P, K).T @ dO2).T[None]
    else:
        a = cols.transpose(1, 3, 0, 2).reshape(G, K, N * P)
        b = dO.transpose(1, 0, 2, 3).reshape(G, N * P, Cog)
        dwm = np.matmul(a, b).transpose(0, 2, 1)
    dw = dwm.reshape(Co, Cg, kh, kw)
    if not need_dx:
        return None, dw
    if G == 1:
        dcols = (dO2 @ wm[0]).reshape(N, 1, P, K)
    else:
        dcols = np.matmul(dO, wm)
    dcols = dcols.reshape(N, G, Ho, Wo, Cg, kh, kw).transpose(0, 1, 4, 5, 6, 2, 3)
    Hp, Wp = xp_shape[2], xp_shape[3]
    dxp = np.zeros((N, G, Cg, Hp, Wp), dtype=dy.dtype)
    for i in range(kh):
        r0 = i * dh
        for j in range(kw):
            c0 = j * dw_
            dxp[:, :, :, r0 : r0 + sh * (Ho - 1) + 1 : sh, c0 : c0 + sw * (Wo - 1) + 1 : sw] += dcols[
                :, :, :, i, j
            ]
    dxp = dxp.reshape(N, C, Hp, Wp)
    (pt, pb), (pl, pr) = pads
    dx = dxp[:, :, pt : Hp - pb, pl : Wp - pr]
    return dx, dw


def conv2d_counted(x, w, stride=(1, 1), dilation=(1, 1), groups=1, pads=((0, 0), (0, 0))):
    """Tap-by-tap convolution returning ``(y, macs)``.

    ``macs`` accumulates, for every kernel tap, the number of
    multiply-accumulates actually issued for that tap.
    """
    N, C, H, W = x.shape
    Co, Cg, kh, kw = w.shape
    G = groups
    Cog = Co // G
    sh, sw = stride
    dh, dw = dilation
    xp = _pad(x, pads)
    Ho = out_size(H, pads[0], kh, sh, dh)
    Wo = out_size(W, pads[1], kw, sw, dw)
    y = np.zeros((N, G, Cog, Ho, Wo), dtype=np.result_type(x, w))
    macs = 0
    for i in range(kh):
        for j in range(kw):
            xs = xp[:, :, i * dh : i * dh + sh * (Ho - 1) + 1 : sh, j * dw : j * dw + sw * (Wo - 1) + 1 : sw]
            xs = xs.reshape(N, G, Cg, Ho, Wo)
            wt = w[:, :, i, j].reshape(G, Cog, Cg)
            y += np.einsum("gcd,ngdhw->ngchw", wt, xs)
            macs += wt.size * xs.shape[3] * xs.shape[4] * N
    return y.reshape(N, Co, Ho, Wo), macs
