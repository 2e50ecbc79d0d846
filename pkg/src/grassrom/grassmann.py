"""Geometry of the Grassmann manifold G(q, n).

Points are represented by ``(n, q)`` arrays with orthonormal columns; any
right-orthogonal change of representative names the same point. Tangent
vectors at ``y0`` are ``(n, q)`` arrays ``gamma`` with ``y0.T @ gamma == 0``.
"""
from __future__ import annotations

import numpy as np

from .errors import CutLocusError, DegenerateAlignmentError, ValidationError

ORTHONORMAL_TOL = 1e-10
CUT_LOCUS_TOL = 1e-10
HORIZONTAL_TOL = 1e-6


def check_stiefel(y, tol=ORTHONORMAL_TOL, name="subspace"):
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[1] > y.shape[0] or y.shape[1] == 0:
        raise ValidationError(f"{name} must be an n x q array with 1 <= q <= n, got {y.shape}")
    err = np.linalg.norm(y.T @ y - np.eye(y.shape[1]))
    if err > tol:
        raise ValidationError(f"{name} columns are not orthonormal (|Y'Y - I|_F = {err:.2e})")
    return y


def orthonormalize(y):
    """Thin QR with the diagonal of R made positive; keeps the span."""
    qmat, r = np.linalg.qr(y)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return qmat * d


def _same_shape(y0, y1):
    if y0.shape != y1.shape:
        raise ValidationError(f"subspace shapes differ: {y0.shape} vs {y1.shape}")


def principal_angles(y0, y1):
    """Principal angles in increasing order.

    Cosines come from the singular values of ``y0.T @ y1``; angles below
    pi/4 are recomputed from the sines of the orthogonal residual, which
    keeps full relative accuracy for nearly equal subspaces.
    """
    y0 = np.asarray(y0, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    _same_shape(y0, y1)
    cross = y0.T @ y1
    cosines = np.clip(np.linalg.svd(cross, compute_uv=False), -1.0, 1.0)
    residual = y1 - y0 @ cross
    sines = np.clip(np.linalg.svd(residual, compute_uv=False)[::-1], -1.0, 1.0)
    theta = np.arccos(cosines)
    small = sines**2 < 0.5
    theta[small] = np.arcsin(sines[small])
    return np.sort(theta)


def geodesic_distance(y0, y1):
    return float(np.linalg.norm(principal_angles(y0, y1)))


def grassmann_log(y0, y1, parameter=None):
    """Initial velocity at ``y0`` of the geodesic reaching ``span(y1)`` at t=1."""
    y0 = np.asarray(y0, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    _same_shape(y0, y1)
    cross = y0.T @ y1
    smin = np.linalg.svd(cross, compute_uv=False)[-1]
    if smin < CUT_LOCUS_TOL:
        where = "" if parameter is None else f" (parameter {parameter:g})"
        raise CutLocusError(
            f"subspaces are orthogonal along some direction{where}: logarithm undefined",
            parameter=parameter,
        )
    residual = y1 - y0 @ cross
    m = np.linalg.solve(cross.T, residual.T).T
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    gamma = (u * np.arctan(s)) @ vt
    # remove rounding drift out of the horizontal space
    return gamma - y0 @ (y0.T @ gamma)


def grassmann_exp(y0, gamma):
    """Point reached at t=1 along the geodesic from ``y0`` with velocity ``gamma``."""
    y0 = np.asarray(y0, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    _same_shape(y0, gamma)
    drift = np.linalg.norm(y0.T @ gamma)
    if drift > HORIZONTAL_TOL * max(1.0, np.linalg.norm(gamma)):
        raise ValidationError(f"tangent vector is not horizontal at the base point (|Y0'G| = {drift:.2e})")
    u, s, vt = np.linalg.svd(gamma, full_matrices=False)
    y = (y0 @ vt.T) * np.cos(s) @ vt + (u * np.sin(s)) @ vt
    return orthonormalize(y)


def geodesic(y0, y1, t):
    """Point at fraction ``t`` of the geodesic from ``span(y0)`` to ``span(y1)``."""
    return grassmann_exp(y0, t * grassmann_log(y0, y1))


def procrustes_align(target, source):
    """Orthogonal ``Q`` maximising ``trace(Q.T @ source.T @ target)``.

    ``source @ Q`` is then the representative of ``span(source)`` closest
    to ``target`` in the Frobenius norm.
    """
    return procrustes_from_cross(np.asarray(source, dtype=float).T @ np.asarray(target, dtype=float))


def procrustes_from_cross(cross):
    cross = np.asarray(cross, dtype=float)
    if not np.any(cross):
        raise DegenerateAlignmentError("cross-Gramian is zero: alignment is undefined")
    u, _, vt = np.linalg.svd(cross)
    return u @ vt
