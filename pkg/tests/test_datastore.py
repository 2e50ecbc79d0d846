import json

import numpy as np
import pytest

from grassrom import datastore
from grassrom.datastore import DatabaseManifest, SnapshotSet, read_matrix, write_matrix
from grassrom.errors import FormatError, ValidationError


def test_identity_file_layout(tmp_path):
    path = tmp_path / "eye.grom"
    write_matrix(path, np.eye(2))
    raw = path.read_bytes()
    assert len(raw) == 56
    assert raw[:4] == b"GROM"
    assert int.from_bytes(raw[4:8], "little") == 1
    assert int.from_bytes(raw[8:16], "little") == 2
    assert int.from_bytes(raw[16:24], "little") == 2
    assert np.frombuffer(raw[24:], "<f8").tolist() == [1.0, 0.0, 0.0, 1.0]


def test_zero_scalar(tmp_path):
    path = tmp_path / "z.grom"
    write_matrix(path, np.zeros((1, 1)))
    assert np.frombuffer(path.read_bytes()[24:], "<f8").tolist() == [0.0]


def test_column_major_payload(tmp_path):
    m = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    write_matrix(tmp_path / "m.grom", m)
    payload = np.frombuffer((tmp_path / "m.grom").read_bytes()[24:], "<f8")
    assert payload.tolist() == [1.0, 3.0, 5.0, 2.0, 4.0, 6.0]


@pytest.mark.parametrize("shape", [(3, 2), (1, 7), (40, 13)])
def test_roundtrip_bit_exact(tmp_path, rng, shape):
    m = rng.standard_normal(shape) * 10.0 ** rng.integers(-300, 300, size=shape)
    write_matrix(tmp_path / "r.grom", m)
    back = read_matrix(tmp_path / "r.grom")
    assert back.shape == m.shape
    assert back.tobytes() == m.tobytes()


def test_non_finite_rejected(tmp_path):
    with pytest.raises(ValidationError):
        write_matrix(tmp_path / "bad.grom", np.array([[1.0, np.nan]]))


def test_truncated_file(tmp_path):
    path = tmp_path / "t.grom"
    write_matrix(path, np.eye(3))
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(FormatError):
        read_matrix(path)


def test_wrong_magic(tmp_path):
    path = tmp_path / "x.grom"
    write_matrix(path, np.eye(2))
    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(FormatError):
        read_matrix(path)


def test_wrong_version(tmp_path):
    path = tmp_path / "v.grom"
    write_matrix(path, np.eye(2))
    raw = bytearray(path.read_bytes())
    raw[4] = 2
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        read_matrix(path)


def _manifest(params):
    n = len(params)
    return DatabaseManifest(
        parameters=params, field_names=("u",), ranks={"u": 1},
        triplet_paths={"u": tuple(f"triplet_u_{i:03d}" for i in range(n))},
        mean_paths={"u": "mean_u.grom"},
    )


def test_manifest_roundtrip(tmp_path):
    m = _manifest([90.0, 120.0])
    datastore.save_manifest(m, tmp_path)
    assert json.loads((tmp_path / "manifest.json").read_text())["parameters"] == [90.0, 120.0]
    assert datastore.load_manifest(tmp_path, check_files=False) == m


@pytest.mark.parametrize("params", [[120.0, 90.0], [90.0, 90.0], [90.0]])
def test_manifest_rejects_bad_parameters(params):
    with pytest.raises(ValidationError):
        _manifest(params)


def test_manifest_load_rejects_rank_mismatch(tmp_path):
    m = _manifest([1.0, 2.0])
    datastore.save_manifest(m, tmp_path)
    write_matrix(tmp_path / "mean_u.grom", np.zeros(4))
    for rel in m.triplet_paths["u"]:
        (tmp_path / rel).mkdir()
        write_matrix(tmp_path / rel / "phi.grom", np.eye(4)[:, :2])
        write_matrix(tmp_path / rel / "sigma.grom", np.ones(2))
        write_matrix(tmp_path / rel / "psi.grom", np.eye(3)[:, :2])
    with pytest.raises(ValidationError):
        datastore.load_manifest(tmp_path)


def test_snapshot_set_invariants():
    with pytest.raises(ValidationError):
        SnapshotSet(1.0, [0.0, 1.0, 3.0], np.zeros((2, 3)))
    with pytest.raises(ValidationError):
        SnapshotSet(1.0, [0.0, 1.0], np.array([[0.0, np.inf]]))
    with pytest.raises(ValidationError):
        SnapshotSet(1.0, [0.0], np.zeros((2, 1)))
    s = SnapshotSet(1.0, [0.0, 0.5], np.zeros((2, 2)))
    with pytest.raises(ValueError):
        s.data[0, 0] = 1.0


def test_snapshot_sets_roundtrip(tmp_path, rng):
    sets = [SnapshotSet(p, np.linspace(0, 1, 5), rng.standard_normal((4, 5))) for p in (0.5, 1.5)]
    datastore.write_snapshot_sets(tmp_path, sets)
    back = datastore.read_snapshot_sets(tmp_path)
    for a, b in zip(sets, back):
        assert a.parameter == b.parameter
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.data, b.data)
