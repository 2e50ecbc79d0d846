"""Trained POD databases: construction from snapshots and directory persistence."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import datastore
from .datastore import DatabaseManifest, read_matrix, write_matrix
from .errors import ValidationError
from .pod import MeanField, PodTriplet, compute_global_mean, pod_decompose, rank_for_ric, subtract_mean


@dataclass(frozen=True)
class TrainingDatabase:
    """POD triplets of one field, sorted by parameter, sharing a global mean."""

    field_name: str
    mean: MeanField
    triplets: tuple
    times: np.ndarray

    def __post_init__(self):
        triplets = tuple(sorted(self.triplets, key=lambda t: t.parameter))
        object.__setattr__(self, "triplets", triplets)
        times = np.array(self.times, dtype=float)
        times.flags.writeable = False
        object.__setattr__(self, "times", times)
        if len(triplets) < 2:
            raise ValidationError("a training database needs at least 2 parameters")
        params = [t.parameter for t in triplets]
        if any(b <= a for a, b in zip(params, params[1:])):
            raise ValidationError(f"duplicate training parameters: {params}")
        q = triplets[0].rank
        for t in triplets:
            if t.rank != q:
                raise ValidationError(f"triplet at {t.parameter:g} has rank {t.rank}, expected {q}")
            if t.phi.shape[0] != self.mean.mean.shape[0]:
                raise ValidationError(f"triplet at {t.parameter:g} does not match the mean field size")
            if t.psi.shape[0] != times.shape[0]:
                raise ValidationError(f"triplet at {t.parameter:g} does not match the time grid")

    @property
    def parameters(self):
        return np.array([t.parameter for t in self.triplets])

    @property
    def rank(self):
        return self.triplets[0].rank

    def triplet_at(self, parameter):
        for t in self.triplets:
            if t.parameter == parameter:
                return t
        raise KeyError(parameter)

    def reconstruct(self, parameter):
        """Mean plus rank-q POD reconstruction of a training parameter."""
        return self.mean.mean[:, None] + self.triplet_at(parameter).reconstruct()


def build_database(sets, q=None, ric_threshold=None):
    """Global mean, fluctuations and truncated POD for each snapshot set.

    Exactly one of ``q`` and ``ric_threshold`` is given. With a threshold the
    shared rank is the largest per-parameter rank reaching it.
    """
    sets = sorted(sets, key=lambda s: s.parameter)
    if (q is None) == (ric_threshold is None):
        raise ValidationError("give exactly one of q and ric_threshold")
    if len(sets) < 2:
        raise ValidationError("at least 2 snapshot sets are required")
    times = sets[0].times
    for s in sets:
        if not np.array_equal(s.times, times):
            raise ValidationError(f"snapshot set at {s.parameter:g} uses a different time grid")
    mean = compute_global_mean(sets)
    flucts = [subtract_mean(s, mean) for s in sets]
    if q is None:
        q = max(rank_for_ric(np.linalg.svd(f.data, compute_uv=False) ** 2, ric_threshold) for f in flucts)
    triplets = align_mode_signs([pod_decompose(f, q) for f in flucts])
    return TrainingDatabase(sets[0].field_name, mean, tuple(triplets), times)


def align_mode_signs(triplets):
    """Flip modes so that each triplet agrees in sign with its predecessor.

    The first triplet keeps the per-matrix convention of ``pod_decompose``;
    later ones flip mode ``j`` (in both bases) when its spatial plus temporal
    overlap with mode ``j`` of the previous parameter is negative. Without
    this, neighbouring training modes can point in opposite directions and
    the calibration averages them away.
    """
    out = [triplets[0]]
    for t in triplets[1:]:
        prev = out[-1]
        overlap = np.sum(t.phi * prev.phi, axis=0) + np.sum(t.psi * prev.psi, axis=0)
        signs = np.where(overlap < 0, -1.0, 1.0)
        out.append(PodTriplet(t.parameter, t.phi * signs, t.sigma, t.psi * signs, t.eigenvalues))
    return out


def save_databases(directory, databases, extra=None):
    """Write databases (one per field) in the standard directory layout."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    databases = list(databases)
    params = databases[0].parameters
    for db in databases[1:]:
        if not np.array_equal(db.parameters, params) or not np.array_equal(db.times, databases[0].times):
            raise ValidationError("all fields of a database must share parameters and time grid")
    ranks, triplet_paths, mean_paths = {}, {}, {}
    for db in databases:
        name = db.field_name
        ranks[name] = db.rank
        mean_paths[name] = f"mean_{name}.grom"
        write_matrix(directory / mean_paths[name], db.mean.mean)
        paths = []
        for i, t in enumerate(db.triplets):
            rel = f"triplet_{name}_{i:03d}"
            (directory / rel).mkdir(exist_ok=True)
            write_matrix(directory / rel / "phi.grom", t.phi)
            write_matrix(directory / rel / "sigma.grom", t.sigma)
            write_matrix(directory / rel / "psi.grom", t.psi)
            write_matrix(directory / rel / "eigenvalues.grom", t.eigenvalues)
            paths.append(rel)
        triplet_paths[name] = tuple(paths)
    manifest = DatabaseManifest(
        parameters=tuple(params), field_names=tuple(db.field_name for db in databases),
        ranks=ranks, triplet_paths=triplet_paths, mean_paths=mean_paths,
        times=tuple(databases[0].times), extra=extra or {},
    )
    datastore.save_manifest(manifest, directory)
    return manifest


def load_databases(directory):
    """Return ``{field_name: TrainingDatabase}`` from a database directory."""
    directory = Path(directory)
    manifest = datastore.load_manifest(directory)
    out = {}
    for name in manifest.field_names:
        mean = MeanField(read_matrix(directory / manifest.mean_paths[name])[:, 0], name)
        triplets = []
        for p, rel in zip(manifest.parameters, manifest.triplet_paths[name]):
            base = directory / rel
            eig_path = base / "eigenvalues.grom"
            sigma = read_matrix(base / "sigma.grom")[:, 0]
            eig = read_matrix(eig_path)[:, 0] if eig_path.exists() else sigma**2
            triplets.append(PodTriplet(p, read_matrix(base / "phi.grom"), sigma,
                                       read_matrix(base / "psi.grom"), eig))
        out[name] = TrainingDatabase(name, mean, tuple(triplets), np.array(manifest.times))
    return out
