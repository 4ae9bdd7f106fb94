"""
Bilinear interpolation over a quad of transferred centres and its inverse.

Quad vertex order follows grid indices: c00, c10 (pan + 1), c01 (tilt + 1), c11.
"""
from typing import Sequence, Tuple

import numpy as np

from exceptions import NonConvergence

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 50
EDGE_TOL_PX = 1e-9


def bilinear(quad: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    c00, c10, c01, c11 = quad
    return ((1 - alpha) * (1 - beta) * c00 + alpha * (1 - beta) * c10
            + (1 - alpha) * beta * c01 + alpha * beta * c11)


def inverse_bilinear(quad: np.ndarray, t: Sequence[float],
                     init: Tuple[float, float] = (0.5, 0.5),
                     tol: float = NEWTON_TOL, max_iter: int = NEWTON_MAX_ITER) -> Tuple[float, float]:
    """
    Solve bilinear(quad, alpha, beta) == t by 2-D Newton iteration.

    Args:
        quad: (4, 2) vertices c00, c10, c01, c11
        t: target point
        init: starting (alpha, beta)
        tol: convergence threshold on the Newton step
        max_iter: iteration cap

    Returns:
        (alpha, beta), unclamped
    """
    quad = np.asarray(quad, dtype=float)
    t = np.asarray(t, dtype=float)
    c00, c10, c01, c11 = quad
    e_a = c10 - c00
    e_b = c01 - c00
    twist = c00 - c10 - c01 + c11

    x = np.array(init, dtype=float)
    for _ in range(max_iter):
        a, b = x
        residual = c00 + a * e_a + b * e_b + a * b * twist - t
        jac = np.column_stack([e_a + b * twist, e_b + a * twist])
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        if abs(det) < 1e-18 or not np.isfinite(det):
            raise NonConvergence(f"Singular bilinear Jacobian at (alpha, beta)=({a:.4f}, {b:.4f})")
        step = np.linalg.solve(jac, residual)
        x = x - step
        if np.linalg.norm(step) < tol:
            return float(x[0]), float(x[1])
    raise NonConvergence(f"Inverse bilinear did not converge in {max_iter} iterations")


def point_in_quad(quad: np.ndarray, t: Sequence[float], tol: float = EDGE_TOL_PX) -> bool:
    """Winding test on the polygon c00 -> c10 -> c11 -> c01; boundary counts as inside."""
    c00, c10, c01, c11 = np.asarray(quad, dtype=float)
    ring = (c00, c10, c11, c01)
    p = np.asarray(t, dtype=float)
    signed = []
    for k in range(4):
        a, b = ring[k], ring[(k + 1) % 4]
        edge = b - a
        length = np.hypot(*edge)
        if length == 0:
            return False
        signed.append((edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0])) / length)
    signed = np.array(signed)
    return bool(np.all(signed >= -tol) or np.all(signed <= tol))
