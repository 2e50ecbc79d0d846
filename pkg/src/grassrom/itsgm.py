"""Subspace interpolation in the tangent space of the Grassmann manifold."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grassmann, interp
from .errors import CutLocusError, ValidationError

INTERPOLATORS = ("lagrange", "idw", "spline")


@dataclass(frozen=True)
class ItsgmConfig:
    """How tangent vectors are interpolated.

    ``reference`` is ``"closest"`` (nearest training parameter) or an integer
    index into the sorted training parameters.
    """

    interpolator: str = "lagrange"
    neighbor_count: int = 3
    reference: object = "closest"
    idw_power: float = 3.0

    def __post_init__(self):
        if self.interpolator not in INTERPOLATORS:
            raise ValidationError(f"unknown interpolator {self.interpolator!r}; choose from {INTERPOLATORS}")
        minimum = 3 if self.interpolator == "spline" else 2
        if self.neighbor_count < minimum:
            raise ValidationError(f"{self.interpolator} interpolation needs neighbor_count >= {minimum}")
        if self.reference != "closest" and not isinstance(self.reference, (int, np.integer)):
            raise ValidationError(f"reference must be 'closest' or an index, got {self.reference!r}")
        if not self.idw_power > 0:
            raise ValidationError("idw_power must be positive")

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)

    def to_dict(self):
        return {"interpolator": self.interpolator, "neighbor_count": self.neighbor_count,
                "reference": self.reference, "idw_power": self.idw_power}


def _evaluate(nodes, query, config):
    if config.interpolator == "lagrange":
        return interp.lagrange_eval(nodes, query)
    if config.interpolator == "idw":
        return interp.idw_eval(nodes, query, config.idw_power)
    return interp.cubic_spline_eval(nodes, query)


def select_stencil(params, query, config):
    """Reference index and sorted neighbour indices used for ``query``."""
    params = np.asarray(params, dtype=float)
    if len(params) < config.neighbor_count:
        raise ValidationError(
            f"{len(params)} training points available, neighbor_count={config.neighbor_count}"
        )
    if config.reference == "closest":
        ref = int(interp.k_nearest(params, query, 1)[0])
    else:
        ref = int(config.reference)
        if not 0 <= ref < len(params):
            raise ValidationError(f"reference index {ref} out of range")
    neighbors = interp.k_nearest(params, query, config.neighbor_count)
    if ref not in neighbors:
        neighbors = np.sort(np.append(neighbors, ref))
    return ref, neighbors


def itsgm_interpolate(points, query, config=None):
    """Interpolate the subspaces ``points = [(parameter, Y), ...]`` at ``query``.

    The logarithms of the neighbouring training subspaces at the reference
    point are interpolated entry by entry and mapped back with the
    exponential.
    """
    config = config or ItsgmConfig()
    points = sorted(points, key=lambda p: p[0])
    params = np.array([p[0] for p in points], dtype=float)
    if np.any(np.diff(params) <= 0):
        raise ValidationError("training parameters must be distinct")
    shape = np.shape(points[0][1])
    for p, y in points:
        if np.shape(y) != shape:
            raise ValidationError(f"subspace at parameter {p:g} has shape {np.shape(y)}, expected {shape}")

    ref, neighbors = select_stencil(params, query, config)
    y_ref = np.asarray(points[ref][1], dtype=float)
    tangents = []
    for i in neighbors:
        if i == ref:
            tangents.append(np.zeros(shape))
            continue
        try:
            tangents.append(grassmann.grassmann_log(y_ref, points[i][1], parameter=params[i]))
        except CutLocusError as exc:
            raise CutLocusError(
                f"cannot map training subspace at parameter {params[i]:g} to the tangent space "
                f"at parameter {params[ref]:g}: {exc}",
                parameter=params[i],
            ) from exc
    nodes = interp.InterpNodes(params[neighbors], np.stack(tangents))
    gamma = _evaluate(nodes, query, config)
    gamma = gamma - y_ref @ (y_ref.T @ gamma)
    return grassmann.grassmann_exp(y_ref, gamma)
