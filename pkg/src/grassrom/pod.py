"""Proper orthogonal decomposition of snapshot matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datastore import SnapshotSet, _frozen
from .errors import DegenerateSpectrumError, RankDeficiencyError, ValidationError

RANK_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MeanField:
    mean: np.ndarray
    field_name: str = "u"

    def __post_init__(self):
        mean = _frozen(self.mean, 1, "mean")
        if not np.all(np.isfinite(mean)):
            raise ValidationError("mean field has non-finite entries")
        object.__setattr__(self, "mean", mean)


@dataclass(frozen=True)
class PodTriplet:
    """Truncated POD of one parameter's fluctuation matrix.

    ``phi`` (n_x, q) and ``psi`` (n_s, q) have orthonormal columns,
    ``sigma`` holds the q retained singular values and ``eigenvalues`` the
    full spectrum ``sigma_i**2`` for RIC reporting.
    """

    parameter: float
    phi: np.ndarray
    sigma: np.ndarray
    psi: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parameter", float(self.parameter))
        for name, ndim in (("phi", 2), ("sigma", 1), ("psi", 2), ("eigenvalues", 1)):
            object.__setattr__(self, name, _frozen(getattr(self, name), ndim, name))
        q = self.sigma.shape[0]
        if self.phi.shape[1] != q or self.psi.shape[1] != q:
            raise ValidationError(
                f"inconsistent triplet shapes phi{self.phi.shape} sigma{self.sigma.shape} psi{self.psi.shape}"
            )

    @property
    def rank(self):
        return self.sigma.shape[0]

    def reconstruct(self):
        return (self.phi * self.sigma) @ self.psi.T


def compute_global_mean(sets):
    """Average over every snapshot of every parameter."""
    sets = list(sets)
    if not sets:
        raise ValidationError("no snapshot sets given")
    shape = sets[0].data.shape
    for s in sets:
        if s.data.shape != shape:
            raise ValidationError(f"snapshot shapes differ: {s.data.shape} vs {shape}")
    total = np.zeros(shape[0])
    for s in sets:
        total += s.data.sum(axis=1)
    return MeanField(total / (len(sets) * shape[1]), sets[0].field_name)


def subtract_mean(snapshots, mean):
    if mean.mean.shape[0] != snapshots.n_x:
        raise ValidationError(f"mean has {mean.mean.shape[0]} entries, snapshots have {snapshots.n_x} rows")
    return snapshots.with_data(snapshots.data - mean.mean[:, None])


def add_mean(snapshots, mean):
    if mean.mean.shape[0] != snapshots.n_x:
        raise ValidationError(f"mean has {mean.mean.shape[0]} entries, snapshots have {snapshots.n_x} rows")
    return snapshots.with_data(snapshots.data + mean.mean[:, None])


def fix_signs(phi, psi):
    """Make the largest-magnitude entry of each column of ``phi`` positive.

    ``psi`` receives the same column flips so that the product is unchanged.
    """
    idx = np.argmax(np.abs(phi), axis=0)
    signs = np.sign(phi[idx, np.arange(phi.shape[1])])
    signs[signs == 0] = 1.0
    return phi * signs, psi * signs


def pod_decompose(fluct, q):
    """Thin SVD of the fluctuation matrix truncated to ``q`` modes.

    Raises ``RankDeficiencyError`` if fewer than ``q`` singular values lie
    above ``1e-12 * sigma_1``.
    """
    data = fluct.data if isinstance(fluct, SnapshotSet) else np.asarray(fluct, dtype=float)
    parameter = fluct.parameter if isinstance(fluct, SnapshotSet) else float("nan")
    q = int(q)
    if q < 1 or q > min(data.shape):
        raise ValidationError(f"rank q={q} outside [1, {min(data.shape)}]")
    u, s, vt = np.linalg.svd(data, full_matrices=False)
    numerical_rank = int(np.sum(s > RANK_TOLERANCE * s[0])) if s[0] > 0 else 0
    if q > numerical_rank:
        raise RankDeficiencyError(
            f"requested q={q} but the snapshot matrix has numerical rank {numerical_rank}"
            f" (largest admissible q is {numerical_rank})",
            max_rank=numerical_rank,
        )
    phi, psi = fix_signs(u[:, :q], vt[:q].T)
    return PodTriplet(parameter, phi, s[:q], psi, s**2)


def ric(eigenvalues, k):
    """Fraction of the total eigenvalue energy held by the first ``k`` modes."""
    curve = ric_curve(eigenvalues)
    if not 1 <= k <= curve.shape[0]:
        raise ValidationError(f"k={k} outside [1, {curve.shape[0]}]")
    return float(curve[k - 1])


def ric_curve(eigenvalues):
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ValidationError("eigenvalues must be a nonempty vector")
    if np.any(lam < 0):
        raise ValidationError("eigenvalues must be nonnegative")
    total = lam.sum()
    if total <= 0:
        raise DegenerateSpectrumError("all eigenvalues are zero")
    curve = np.minimum(np.cumsum(lam) / total, 1.0)
    curve[-1] = 1.0
    return curve


def rank_for_ric(eigenvalues, threshold):
    if not 0 < threshold <= 1:
        raise ValidationError(f"RIC threshold must lie in (0, 1], got {threshold}")
    curve = ric_curve(eigenvalues)
    return int(np.argmax(curve >= threshold)) + 1
