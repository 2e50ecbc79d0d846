"""Bi-calibrated interpolation of POD triplets at untrained parameters.

Spatial and temporal bases are interpolated on their Grassmann manifolds,
singular values by natural cubic splines, and each interpolated basis is
then rotated within its span (weighted orthogonal Procrustes) so its columns
line up with the training modes before the triple product is formed.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import grassmann, interp
from .datastore import SnapshotSet, _frozen
from .errors import GrassromError, UndefinedErrorMetric, ValidationError
from .itsgm import ItsgmConfig, itsgm_interpolate

log = logging.getLogger(__name__)

SIGMA_FLOOR = 1e-14


@dataclass(frozen=True)
class BiCitsgmConfig:
    itsgm_spatial: ItsgmConfig = field(default_factory=ItsgmConfig)
    itsgm_temporal: ItsgmConfig = field(default_factory=ItsgmConfig)
    calib_power_spatial: float = 3.0
    calib_power_temporal: float = 3.0
    calib_neighbor_count: int | None = None

    def __post_init__(self):
        if not (self.calib_power_spatial > 0 and self.calib_power_temporal > 0):
            raise ValidationError("calibration powers must be positive")
        if self.calib_neighbor_count is not None and self.calib_neighbor_count < 1:
            raise ValidationError("calib_neighbor_count must be positive")

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        for key in ("itsgm_spatial", "itsgm_temporal"):
            if key in doc and isinstance(doc[key], dict):
                doc[key] = ItsgmConfig.from_dict(doc[key])
        return cls(**doc)

    def to_dict(self):
        return {
            "itsgm_spatial": self.itsgm_spatial.to_dict(),
            "itsgm_temporal": self.itsgm_temporal.to_dict(),
            "calib_power_spatial": self.calib_power_spatial,
            "calib_power_temporal": self.calib_power_temporal,
            "calib_neighbor_count": self.calib_neighbor_count,
        }


@dataclass(frozen=True)
class PredictedSolution:
    parameter: float
    phi_cal: np.ndarray
    sigma: np.ndarray
    psi_cal: np.ndarray
    reconstruction: np.ndarray
    wall_time: float = 0.0

    def __post_init__(self):
        for name, ndim in (("phi_cal", 2), ("sigma", 1), ("psi_cal", 2), ("reconstruction", 2)):
            object.__setattr__(self, name, _frozen(getattr(self, name), ndim, name))

    def as_snapshots(self, times, field_name="u"):
        return SnapshotSet(self.parameter, times, self.reconstruction, field_name)


def interpolate_singular_values(db, query):
    """Per-index natural cubic spline of the singular values over all parameters."""
    params = db.parameters
    sig = np.stack([t.sigma for t in db.triplets])
    nodes = interp.InterpNodes(params, sig)
    if len(params) >= 3:
        out = interp.NaturalSpline(nodes)(query)
    else:
        log.warning("only %d training parameters: singular values interpolated linearly", len(params))
        out = interp.lagrange_eval(nodes, query)
    out = np.array(out, dtype=float)
    floor = SIGMA_FLOOR * max(out[0], SIGMA_FLOOR)
    return np.maximum(out, floor)


def calibrate_basis(basis, training, power):
    """Rotation ``Q`` such that ``basis @ Q`` best matches the training bases.

    ``training`` is a sequence of ``(distance, Y_k)``; basis ``k`` is weighted by
    ``distance ** -power``. A zero distance means the query is a training
    point, and the alignment is made to that basis alone.
    """
    basis = np.asarray(basis, dtype=float)
    training = list(training)
    if not training:
        raise ValidationError("no training bases to calibrate against")
    for d, y in training:
        if np.shape(y) != basis.shape:
            raise ValidationError(f"training basis shape {np.shape(y)} differs from {basis.shape}")
        if d < 0:
            raise ValidationError("distances must be nonnegative")
    exact = [y for d, y in training if d == 0]
    if exact:
        return grassmann.procrustes_align(exact[0], basis)
    cross = np.zeros((basis.shape[1], basis.shape[1]))
    for d, y in training:
        cross += d ** (-float(power)) * (basis.T @ np.asarray(y, dtype=float))
    return grassmann.procrustes_from_cross(cross)


def _calibration_set(db, query, count, which):
    params = db.parameters
    idx = range(len(params)) if count is None else interp.k_nearest(params, query, min(count, len(params)))
    return [(abs(query - params[i]), getattr(db.triplets[i], which)) for i in idx]


class StageError(GrassromError):
    """Wraps a component failure with the pipeline stage it came from."""

    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage
        self.exit_code = getattr(exc, "exit_code", 1)


def predict(db, query, config=None):
    """Predict the snapshot matrix at an untrained parameter."""
    config = config or BiCitsgmConfig()
    query = float(query)
    params = db.parameters
    if query < params[0] or query > params[-1]:
        log.warning("query %g lies outside the training range [%g, %g]", query, params[0], params[-1])

    def stage(name, fn, *args):
        try:
            return fn(*args)
        except GrassromError as exc:
            raise StageError(name, exc) from exc

    start = time.perf_counter()
    phi = stage("spatial basis interpolation", itsgm_interpolate,
                [(t.parameter, t.phi) for t in db.triplets], query, config.itsgm_spatial)
    psi = stage("temporal basis interpolation", itsgm_interpolate,
                [(t.parameter, t.psi) for t in db.triplets], query, config.itsgm_temporal)
    sigma = stage("singular value interpolation", interpolate_singular_values, db, query)
    q_phi = stage("spatial calibration", calibrate_basis, phi,
                  _calibration_set(db, query, config.calib_neighbor_count, "phi"), config.calib_power_spatial)
    q_psi = stage("temporal calibration", calibrate_basis, psi,
                  _calibration_set(db, query, config.calib_neighbor_count, "psi"), config.calib_power_temporal)
    phi_cal = phi @ q_phi
    psi_cal = psi @ q_psi
    recon = db.mean.mean[:, None] + (phi_cal * sigma) @ psi_cal.T
    elapsed = time.perf_counter() - start
    return PredictedSolution(query, phi_cal, sigma, psi_cal, recon, elapsed)


def mean_relative_error(truth, approx, times=None, weights=None):
    """Time-integrated relative L2 error in percent.

    Time integrals use the trapezoidal rule; the spatial norm is Euclidean,
    optionally weighted by quadrature ``weights`` (one per row).
    """
    if isinstance(truth, SnapshotSet):
        times = truth.times if times is None else times
        truth = truth.data
    if isinstance(approx, SnapshotSet):
        approx = approx.data
    truth = np.asarray(truth, dtype=float)
    approx = np.asarray(approx, dtype=float)
    if truth.shape != approx.shape:
        raise ValidationError(f"shape mismatch: {truth.shape} vs {approx.shape}")
    w = np.ones(truth.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (truth.shape[0],) or np.any(w < 0):
        raise ValidationError("quadrature weights must be one nonnegative value per row")
    err_sq = w @ (truth - approx) ** 2
    ref_sq = w @ truth**2
    if times is None:
        times = np.arange(truth.shape[1], dtype=float)
    den = np.trapezoid(ref_sq, times) if truth.shape[1] > 1 else ref_sq.sum()
    num = np.trapezoid(err_sq, times) if truth.shape[1] > 1 else err_sq.sum()
    if not den > 0:
        raise UndefinedErrorMetric("reference field has zero norm: relative error undefined")
    return float(100.0 * np.sqrt(num / den))
