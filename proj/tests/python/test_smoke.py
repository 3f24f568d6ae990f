import numpy as np
import pytest

import fastphase as fp


def test_dft_matches_numpy():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    X = fp.dft_oversampled(x, (6, 8))
    expected = np.fft.fft2(x, s=(6, 8)) / np.sqrt(48)
    assert np.allclose(X, expected, atol=1e-12)
    assert np.allclose(fp.measure(x), np.abs(expected) ** 2, atol=1e-12)


def test_retrieve_recovers_schwarz_object():
    x = fp.generate_schwarz_object((8, 8), (2, 5), seed=3)
    y = fp.measure(x)
    w = fp.winding(y, (8, 8))["w"]
    assert tuple(w) in {(2, 5), (5, 2)}
    res = fp.retrieve(y, (8, 8))
    assert res["converged"]
    assert fp.aligned_relative_error(res["x"], x) <= 1e-8
    assert fp.rmse_db(res["x"], x) <= -80


def test_masked_recovery():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    abs_x, y2, mask = fp.masked_measurements(x)
    assert mask.max() == 1.0
    assert fp.aligned_relative_error(fp.masked_retrieve(abs_x, y2), x) <= 1e-6


def test_tensor_round_trip(tmp_path):
    a = np.arange(6.0).reshape(2, 3)
    c = a + 1j * a[::-1]
    fp.write_tensor(str(tmp_path / "a.fpt"), a)
    fp.write_tensor(str(tmp_path / "c.fpt"), c)
    assert np.array_equal(fp.read_tensor(str(tmp_path / "a.fpt")), a)
    assert np.array_equal(fp.read_tensor(str(tmp_path / "c.fpt")), c)
    (tmp_path / "bad.fpt").write_bytes(b"FPX1")
    with pytest.raises(fp.FormatError, match="offset 2"):
        fp.read_tensor(str(tmp_path / "bad.fpt"))


def test_errors_map_to_exceptions():
    with pytest.raises(fp.ParameterError):
        fp.generate_schwarz_object((4, 4), (0, 0), rho=1.0)
    with pytest.raises(fp.DimensionError):
        fp.measure(np.ones((4, 4), complex), (7, 8))
    with pytest.raises(fp.DomainError):
        fp.retrieve(np.zeros((8, 8)), (4, 4))
    assert issubclass(fp.ParameterError, fp.FastPhaseError)
