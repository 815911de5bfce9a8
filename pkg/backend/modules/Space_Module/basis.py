"""
Scalar P2 Lagrange basis on triangles.

Local node order: vertices 0, 1, 2, then midpoints of (0,1), (1,2), (2,0).
Reference triangle (0,0), (1,0), (0,1) with barycentrics
lambda = (1 - x - y, x, y).
"""
import numpy as np

MIDPOINT_PAIRS = ((0, 1), (1, 2), (2, 0))

# barycentric coordinates of the six nodes
NODE_BARYCENTRIC = np.array([
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
])

# d lambda_i / d(x_ref, y_ref)
_DLAMBDA_REF = np.array([
    [-1.0, -1.0],
    [1.0, 0.0],
    [0.0, 1.0],
])


def eval_basis(bary: np.ndarray):
    """
    Values (..., 6) and reference gradients (..., 6, 2) at barycentric points (..., 3).
    """
    lam = np.asarray(bary, dtype=float)
    values = np.empty(lam.shape[:-1] + (6,))
    grads = np.empty(lam.shape[:-1] + (6, 2))
    for i in range(3):
        values[..., i] = lam[..., i] * (2.0 * lam[..., i] - 1.0)
        grads[..., i, :] = (4.0 * lam[..., i] - 1.0)[..., None] * _DLAMBDA_REF[i]
    for k, (i, j) in enumerate(MIDPOINT_PAIRS):
        values[..., 3 + k] = 4.0 * lam[..., i] * lam[..., j]
        grads[..., 3 + k, :] = 4.0 * (
            lam[..., j][..., None] * _DLAMBDA_REF[i] + lam[..., i][..., None] * _DLAMBDA_REF[j]
        )
    return values, grads


def physical_gradients(ref_grads: np.ndarray, inv_jacobians: np.ndarray) -> np.ndarray:
    """
    Chain rule: grad_x phi = J^{-T} grad_ref phi.

    ref_grads (..., 6, 2) broadcast against inv_jacobians (Nt, 2, 2);
    result (Nt, ..., 6, 2).
    """
    # grad_x[j] = sum_r grad_ref[r] * Jinv[r, j]
    return np.einsum("...ar,trj->t...aj", ref_grads, inv_jacobians)


def barycentric_gradients(inv_jacobians: np.ndarray) -> np.ndarray:
    """Physical gradients of the barycentric coordinates, (Nt, 3, 2)."""
    return np.einsum("ir,trj->tij", _DLAMBDA_REF, inv_jacobians)


def basis_hessians(inv_jacobians: np.ndarray) -> np.ndarray:
    """Constant physical Hessians of the six basis functions, (Nt, 6, 2, 2)."""
    g = barycentric_gradients(inv_jacobians)
    nt = len(inv_jacobians)
    hess = np.empty((nt, 6, 2, 2))
    for i in range(3):
        hess[:, i] = 4.0 * np.einsum("tj,tk->tjk", g[:, i], g[:, i])
    for k, (i, j) in enumerate(MIDPOINT_PAIRS):
        outer = np.einsum("tj,tk->tjk", g[:, i], g[:, j])
        hess[:, 3 + k] = 4.0 * (outer + outer.transpose(0, 2, 1))
    return hess
