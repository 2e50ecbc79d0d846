import numpy as np
import pytest

from conftest import random_orthogonal, random_stiefel
from test_interp import natural_spline_reference
from grassrom import oracle
from grassrom.bicitsgm import (
    BiCitsgmConfig,
    StageError,
    calibrate_basis,
    interpolate_singular_values,
    mean_relative_error,
    predict,
)
from grassrom.database import TrainingDatabase, build_database
from grassrom.datastore import SnapshotSet
from grassrom.errors import UndefinedErrorMetric, ValidationError
from grassrom.grassmann import principal_angles
from grassrom.pod import MeanField, PodTriplet


@pytest.fixture(scope="module")
def analytic_db():
    cfg = oracle.AnalyticFamilyConfig(n_x=96, n_s=64)
    params = np.linspace(0.5, 2.5, 5)
    return cfg, build_database([oracle.analytic_field(cfg, m) for m in params], ric_threshold=0.9999)


@pytest.fixture(scope="module")
def slow_drift_db():
    # frequencies almost parameter-independent: temporal subspaces stay close
    cfg = oracle.AnalyticFamilyConfig(n_x=96, n_s=64, freq_slope=0.01)
    params = np.linspace(0.5, 2.5, 5)
    return cfg, build_database([oracle.analytic_field(cfg, m) for m in params], ric_threshold=0.9999)


def synthetic_db(sigmas, params, rng, n_x=10, n_s=8):
    phi = random_stiefel(rng, n_x, len(sigmas[0]))
    psi = random_stiefel(rng, n_s, len(sigmas[0]))
    triplets = [PodTriplet(p, phi, s, psi, np.asarray(s) ** 2) for p, s in zip(params, sigmas)]
    return TrainingDatabase("u", MeanField(np.zeros(n_x)), tuple(triplets), np.arange(n_s, dtype=float))


class TestSingularValues:
    def test_node(self, analytic_db):
        _, db = analytic_db
        for t in db.triplets:
            assert np.array_equal(interpolate_singular_values(db, t.parameter), t.sigma)

    def test_constant(self, rng):
        params = np.linspace(0, 1, 4)
        db = synthetic_db([[3.0, 2.0]] * 4, params, rng)
        assert np.allclose(interpolate_singular_values(db, 0.37), [3.0, 2.0], atol=1e-13)

    def test_matches_tridiagonal_reference(self, rng):
        params = np.linspace(1.0, 3.0, 6)
        first = 10.0 + params**3
        db = synthetic_db([[a, 1.0] for a in first], params, rng)
        for x in (1.1, 1.9, 2.55):
            ref = natural_spline_reference(params, first, x)
            assert interpolate_singular_values(db, x)[0] == pytest.approx(ref, abs=1e-10)

    def test_two_points_fall_back_to_linear(self, rng):
        db = synthetic_db([[4.0], [2.0]], [0.0, 1.0], rng)
        assert interpolate_singular_values(db, 0.25)[0] == pytest.approx(3.5, abs=1e-14)

    def test_positivity_floor(self, rng):
        params = np.linspace(0, 3, 4)
        db = synthetic_db([[5.0, 1.0], [5.0, 1e-3], [5.0, 1.0], [5.0, 3.0]], params, rng)
        out = interpolate_singular_values(db, 1.5)
        assert np.all(out > 0)


class TestCalibration:
    def test_self(self, rng):
        y = random_stiefel(rng, 9, 3)
        assert np.allclose(calibrate_basis(y, [(1.0, y)], 3), np.eye(3), atol=1e-12)

    def test_recovers_training_representative(self, rng):
        y = random_stiefel(rng, 9, 3)
        r = random_orthogonal(rng, 3)
        q = calibrate_basis(y, [(0.5, y @ r)], 3)
        assert np.linalg.norm(y @ q - y @ r) <= 1e-10

    def test_weighted_maximality(self, rng):
        interp = random_stiefel(rng, 12, 3)
        ys = [random_stiefel(rng, 12, 3) for _ in range(2)]
        d = [2.0, 1.0]
        q = calibrate_basis(interp, list(zip(d, ys)), 3)
        weights = [dk**-3 for dk in d]
        assert weights == [0.125, 1.0]

        def objective(m):
            return sum(w * np.trace(m.T @ interp.T @ y) for w, y in zip(weights, ys))

        assert np.linalg.norm(q.T @ q - np.eye(3)) <= 1e-10
        best = objective(q)
        for _ in range(1000):
            assert objective(random_orthogonal(rng, 3)) <= best + 1e-12

    def test_zero_distance_uses_that_basis(self, rng):
        interp = random_stiefel(rng, 8, 2)
        r = random_orthogonal(rng, 2)
        other = random_stiefel(rng, 8, 2)
        q = calibrate_basis(interp, [(0.0, interp @ r), (0.1, other)], 3)
        assert np.linalg.norm(q - r) <= 1e-10

    def test_shape_mismatch(self, rng):
        with pytest.raises(ValidationError):
            calibrate_basis(random_stiefel(rng, 8, 2), [(1.0, random_stiefel(rng, 8, 3))], 3)


class TestPredict:
    def test_node_recovery(self, analytic_db):
        _, db = analytic_db
        for t in db.triplets:
            pred = predict(db, t.parameter)
            ref = db.reconstruct(t.parameter)
            assert np.linalg.norm(pred.reconstruction - ref) / np.linalg.norm(ref) <= 1e-6

    def test_outputs_orthonormal_and_consistent(self, analytic_db):
        _, db = analytic_db
        pred = predict(db, 1.3)
        q = db.rank
        assert np.linalg.norm(pred.phi_cal.T @ pred.phi_cal - np.eye(q)) <= 1e-8
        assert np.linalg.norm(pred.psi_cal.T @ pred.psi_cal - np.eye(q)) <= 1e-8
        expected = db.mean.mean[:, None] + (pred.phi_cal * pred.sigma) @ pred.psi_cal.T
        assert np.array_equal(pred.reconstruction, expected)
        assert pred.wall_time > 0

    def test_calibration_keeps_span(self, analytic_db):
        from grassrom.itsgm import itsgm_interpolate
        _, db = analytic_db
        pred = predict(db, 1.7)
        phi = itsgm_interpolate([(t.parameter, t.phi) for t in db.triplets], 1.7)
        psi = itsgm_interpolate([(t.parameter, t.psi) for t in db.triplets], 1.7)
        assert np.max(principal_angles(pred.phi_cal, phi)) <= 1e-10
        assert np.max(principal_angles(pred.psi_cal, psi)) <= 1e-10

    def test_deterministic(self, analytic_db):
        _, db = analytic_db
        a, b = predict(db, 1.1), predict(db, 1.1)
        for name in ("phi_cal", "sigma", "psi_cal", "reconstruction"):
            assert getattr(a, name).tobytes() == getattr(b, name).tobytes()

    def test_slow_drift_family_is_accurate(self, slow_drift_db):
        cfg, db = slow_drift_db
        for q in (0.75, 1.25, 1.75, 2.25):
            eps = mean_relative_error(oracle.analytic_field(cfg, q), predict(db, q).reconstruction)
            assert eps <= 2.0

    def test_refinement_does_not_hurt(self):
        cfg = oracle.AnalyticFamilyConfig(n_x=96, n_s=64)
        queries = np.linspace(0.55, 2.45, 10)
        medians = []
        for n in (5, 9):
            db = build_database([oracle.analytic_field(cfg, m) for m in np.linspace(0.5, 2.5, n)],
                                ric_threshold=0.9999)
            medians.append(np.median([mean_relative_error(oracle.analytic_field(cfg, q),
                                                          predict(db, q).reconstruction) for q in queries]))
        assert medians[1] <= medians[0]

    def test_extrapolation_warns(self, analytic_db, caplog):
        _, db = analytic_db
        pred = predict(db, 2.6)
        assert np.all(np.isfinite(pred.reconstruction))
        assert "outside the training range" in caplog.text

    def test_stage_label_on_failure(self):
        e = np.eye(4)
        triplets = [PodTriplet(p, e[:, [i]], [1.0], e[:, [i]], [1.0]) for i, p in enumerate((0.0, 1.0, 2.0))]
        db = TrainingDatabase("u", MeanField(np.zeros(4)), tuple(triplets), np.arange(4.0))
        with pytest.raises(StageError) as info:
            predict(db, 0.4)
        assert info.value.stage == "spatial basis interpolation"
        assert info.value.exit_code == 3


class TestMeanRelativeError:
    def test_exact(self, rng):
        t = SnapshotSet(1.0, np.linspace(0, 1, 6), rng.standard_normal((5, 6)))
        assert mean_relative_error(t, t.data) == 0.0

    def test_zero_approx(self, rng):
        t = SnapshotSet(1.0, np.linspace(0, 1, 6), rng.standard_normal((5, 6)))
        assert mean_relative_error(t, np.zeros((5, 6))) == pytest.approx(100.0, abs=1e-12)

    def test_scaling(self, rng):
        t = SnapshotSet(1.0, np.linspace(0, 1, 6), rng.standard_normal((5, 6)))
        assert mean_relative_error(t, t.data * (1 + 1e-3)) == pytest.approx(0.1, abs=1e-4)

    def test_scale_invariant(self, rng):
        t = SnapshotSet(1.0, np.linspace(0, 1, 6), rng.standard_normal((5, 6)))
        a = rng.standard_normal((5, 6))
        assert mean_relative_error(t, a) == pytest.approx(mean_relative_error(t.with_data(7 * t.data), 7 * a), rel=1e-12)

    def test_trapezoid_weights(self):
        times = np.array([0.0, 1.0, 2.0])
        truth = SnapshotSet(0.0, times, [[1.0, 1.0, 1.0]])
        approx = np.array([[0.0, 1.0, 1.0]])
        # int err^2 = 0.5, int truth^2 = 2
        assert mean_relative_error(truth, approx) == pytest.approx(50.0, abs=1e-12)

    def test_quadrature_weights(self):
        truth = SnapshotSet(0.0, [0.0, 1.0], [[1.0, 1.0], [1.0, 1.0]])
        approx = np.array([[0.0, 0.0], [1.0, 1.0]])
        assert mean_relative_error(truth, approx, weights=[3.0, 1.0]) == pytest.approx(100 * np.sqrt(0.75))

    def test_zero_truth(self):
        truth = SnapshotSet(0.0, [0.0, 1.0], np.zeros((2, 2)))
        with pytest.raises(UndefinedErrorMetric):
            mean_relative_error(truth, np.ones((2, 2)))

    def test_shape_mismatch(self):
        truth = SnapshotSet(0.0, [0.0, 1.0], np.ones((2, 2)))
        with pytest.raises(ValidationError):
            mean_relative_error(truth, np.ones((3, 2)))


def test_config_roundtrip():
    cfg = BiCitsgmConfig(calib_power_spatial=2.0, calib_neighbor_count=4)
    assert BiCitsgmConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValidationError):
        BiCitsgmConfig(calib_power_temporal=0.0)
