"""Tangent projection, its chart derivatives and the weak second fundamental form
of a graph surface ``x3 = g(x1, x2)``.

Everything is vectorized over leading axes: a gradient array of shape
``(..., 2)`` and Hessian ``(..., 2, 2)`` produce ``T`` of shape ``(..., 3, 3)``,
``dT`` of shape ``(..., 2, 3, 3)`` (``dT[..., l, j, k] = d_l T_jk``) and ``A``
of shape ``(..., 3, 3, 3)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TangentFrame:
    T: np.ndarray
    dT: np.ndarray
    A: np.ndarray
    H: np.ndarray


def projection_from_gradient(grad) -> np.ndarray:
    grad = np.asarray(grad, dtype=float)
    q = np.sum(grad * grad, axis=-1)
    n = np.concatenate([-grad, np.ones(grad.shape[:-1] + (1,))], axis=-1)
    nn = n[..., :, None] * n[..., None, :] / (1.0 + q)[..., None, None]
    return np.eye(3) - nn


def projection_deriv(grad, hess) -> np.ndarray:
    grad = np.asarray(grad, dtype=float)
    hess = np.asarray(hess, dtype=float)
    inv = 1.0 / (1.0 + np.sum(grad * grad, axis=-1))
    # w[l] = sum_m d_m g d_l d_m g, i.e. half of d_l |grad g|^2
    w = np.einsum("...m,...lm->...l", grad, hess)
    inv_ = inv[..., None, None, None]
    dT = np.zeros(grad.shape[:-1] + (2, 3, 3))
    # tangential block j, k <= 2
    term = hess[..., :, :, None] * grad[..., None, None, :]
    dT[..., :2, :2] = -(term + np.swapaxes(term, -1, -2)) * inv_ + (
        2.0 * grad[..., None, :, None] * grad[..., None, None, :] * w[..., :, None, None] * inv_**2
    )
    mixed = hess * inv[..., None, None] - 2.0 * grad[..., None, :] * w[..., :, None] * (inv**2)[..., None, None]
    dT[..., :2, 2] = mixed
    dT[..., 2, :2] = mixed
    # d_l T_33 = d_l |grad g|^2 / (1 + |grad g|^2)^2
    dT[..., 2, 2] = 2.0 * w * (inv**2)[..., None]
    return dT


def curvature_tensor(grad, hess) -> np.ndarray:
    """``A_ijk = sum_{l=1,2} T_il d_l T_jk``; symmetric in ``(j, k)``."""
    T = projection_from_gradient(grad)
    dT = projection_deriv(grad, hess)
    return np.einsum("...il,...ljk->...ijk", T[..., :, :2], dT)


def mean_curvature(A) -> np.ndarray:
    """``H_l = sum_j A_jlj``."""
    return np.einsum("...jlj->...l", np.asarray(A))


def frame_from_derivatives(grad, hess) -> TangentFrame:
    T = projection_from_gradient(grad)
    dT = projection_deriv(grad, hess)
    A = np.einsum("...il,...ljk->...ijk", T[..., :, :2], dT)
    return TangentFrame(T, dT, A, mean_curvature(A))


def pushforward_frame(Q, frame: TangentFrame) -> TangentFrame:
    """Transport a frame through the orthogonal map ``Q``."""
    Q = np.asarray(Q, dtype=float)
    T = np.einsum("ia,...ab,jb->...ij", Q, frame.T, Q)
    dT = np.einsum("ia,...lab,jb->...lij", Q, frame.dT, Q)
    A = np.einsum("ia,jb,kc,...abc->...ijk", Q, Q, Q, frame.A, optimize=True)
    H = np.einsum("ia,...a->...i", Q, frame.H)
    return TangentFrame(T, dT, A, H)
