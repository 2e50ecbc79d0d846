"""One-dimensional interpolation of scalars or arrays over sorted abscissae.

Node values may be arrays of any shape; interpolation is then entrywise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ValidationError


@dataclass(frozen=True)
class InterpNodes:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        ys = np.array(self.ys, dtype=float)
        if xs.ndim != 1:
            raise ValidationError("abscissae must be a vector")
        if ys.shape[:1] != xs.shape:
            raise ValidationError(f"{xs.shape[0]} abscissae but {ys.shape[0] if ys.ndim else 0} values")
        if xs.shape[0] < 2:
            raise ValidationError("at least 2 interpolation nodes are required")
        if not np.all(np.isfinite(xs)):
            raise ValidationError("abscissae must be finite")
        if np.any(np.diff(xs) <= 0):
            raise ValidationError(f"abscissae must be distinct and increasing: {xs.tolist()}")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self):
        return self.xs.shape[0]

    def node_index(self, x):
        hit = np.flatnonzero(self.xs == x)
        return int(hit[0]) if hit.size else None


def lagrange_weights(xs, x):
    """Lagrange basis polynomials evaluated at ``x`` (exactly 0/1 at nodes)."""
    xs = np.asarray(xs, dtype=float)
    n = xs.shape[0]
    w = np.ones(n)
    for j in range(n):
        for m in range(n):
            if m != j:
                w[j] *= (x - xs[m]) / (xs[j] - xs[m])
    return w


def lagrange_eval(nodes, x):
    j = nodes.node_index(x)
    if j is not None:
        return nodes.ys[j].copy()
    w = lagrange_weights(nodes.xs, x)
    return np.tensordot(w, nodes.ys, axes=1)


def idw_eval(nodes, x, power):
    """Inverse-distance weighting with weights ``|x - x_k| ** -power``."""
    if not power > 0:
        raise ValidationError(f"IDW power must be positive, got {power}")
    j = nodes.node_index(x)
    if j is not None:
        return nodes.ys[j].copy()
    dist = np.abs(x - nodes.xs)
    # scaled by the smallest distance so the weights cannot overflow
    w = (dist.min() / dist) ** float(power)
    return np.tensordot(w / w.sum(), nodes.ys, axes=1)


class NaturalSpline:
    """Natural cubic spline, continued linearly outside the node range."""

    def __init__(self, nodes):
        if len(nodes) < 3:
            raise ValidationError(f"cubic spline needs at least 3 nodes, got {len(nodes)}")
        self.nodes = nodes
        self._spline = CubicSpline(nodes.xs, nodes.ys, axis=0, bc_type="natural")
        self._slope_lo = self._spline(nodes.xs[0], 1)
        self._slope_hi = self._spline(nodes.xs[-1], 1)

    def __call__(self, x):
        nodes = self.nodes
        j = nodes.node_index(x)
        if j is not None:
            return nodes.ys[j].copy()
        if x < nodes.xs[0]:
            return nodes.ys[0] + (x - nodes.xs[0]) * self._slope_lo
        if x > nodes.xs[-1]:
            return nodes.ys[-1] + (x - nodes.xs[-1]) * self._slope_hi
        return self._spline(x)


def cubic_spline_eval(nodes, x):
    return NaturalSpline(nodes)(x)


def k_nearest(xs, x, k):
    """Indices of the ``k`` abscissae closest to ``x``, in increasing order.

    Equidistant candidates are resolved toward the smaller abscissa.
    """
    xs = np.asarray(xs, dtype=float)
    if not 1 <= k <= xs.shape[0]:
        raise ValidationError(f"k={k} outside [1, {xs.shape[0]}]")
    order = np.lexsort((xs, np.abs(xs - x)))
    return np.sort(order[:k])
