"""Non-intrusive parametric reduced-order models by Grassmann interpolation of POD triplets."""

__version__ = "0.1.0"

from .bicitsgm import BiCitsgmConfig, PredictedSolution, calibrate_basis, interpolate_singular_values, mean_relative_error, predict
from .database import TrainingDatabase, build_database, load_databases, save_databases
from .datastore import SnapshotSet, read_matrix, write_matrix
from .grassmann import geodesic_distance, grassmann_exp, grassmann_log, principal_angles, procrustes_align
from .itsgm import ItsgmConfig, itsgm_interpolate
from .pod import MeanField, PodTriplet, compute_global_mean, pod_decompose, rank_for_ric, ric, subtract_mean

__all__ = [
    "BiCitsgmConfig", "ItsgmConfig", "MeanField", "PodTriplet", "PredictedSolution", "SnapshotSet",
    "TrainingDatabase", "build_database", "calibrate_basis", "compute_global_mean", "geodesic_distance",
    "grassmann_exp", "grassmann_log", "interpolate_singular_values", "itsgm_interpolate",
    "load_databases", "mean_relative_error", "pod_decompose", "predict", "principal_angles",
    "procrustes_align", "rank_for_ric", "read_matrix", "ric", "save_databases", "subtract_mean",
    "write_matrix",
]
