import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from diffred import (
    ConfigError,
    DataMatrix,
    ParseError,
    Purpose,
    RandomStream,
    SpectrumProfile,
    ZeroRowError,
    load_matrix,
    preprocess,
    save_matrix,
    synth_spiked,
)
from diffred.errors import DataIOError, NumericError


def test_load_identity_csv(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("1,0\n0,1\n")
    A = load_matrix(f, "csv")
    assert A.shape == (2, 2)
    np.testing.assert_array_equal(A.values, np.eye(2))
    assert not A.row_normalized and not A.column_centered


def test_csv_header_skip(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("x,y\n1,2\n3,4\n")
    np.testing.assert_array_equal(load_matrix(f, "csv", header=True).values, [[1, 2], [3, 4]])


def test_csv_parse_error_location(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("1,2,3\n4,5,abc\n")
    with pytest.raises(ParseError) as info:
        load_matrix(f, "csv")
    assert (info.value.row, info.value.col) == (2, 3)
    assert "row 2, column 3" in str(info.value)


def test_csv_ragged_rows(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("1,2\n3\n")
    with pytest.raises(ParseError):
        load_matrix(f, "csv")


def test_csv_non_finite(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("1,2\n3,nan\n")
    with pytest.raises(ParseError) as info:
        load_matrix(f, "csv")
    assert (info.value.row, info.value.col) == (2, 2)


def test_missing_file(tmp_path):
    with pytest.raises(DataIOError):
        load_matrix(tmp_path / "nope.csv", "csv")
    with pytest.raises(DataIOError):
        load_matrix(tmp_path / "nope.bin", "bin")


def test_bin_layout(tmp_path):
    payload = np.arange(12, dtype="<f8")
    f = tmp_path / "m.bin"
    f.write_bytes(b"DRED" + struct.pack("<BQQ", 1, 3, 4) + payload.tobytes())
    A = load_matrix(f, "bin")
    np.testing.assert_array_equal(A.values, payload.reshape(3, 4))


def test_bin_header_payload_mismatch(tmp_path):
    f = tmp_path / "m.bin"
    f.write_bytes(b"DRED" + struct.pack("<BQQ", 1, 3, 4) + np.zeros(11).tobytes())
    with pytest.raises(ParseError):
        load_matrix(f, "bin")


def test_bin_bad_magic_and_version(tmp_path):
    f = tmp_path / "m.bin"
    f.write_bytes(b"XXXX" + struct.pack("<BQQ", 1, 1, 1) + np.zeros(1).tobytes())
    with pytest.raises(ParseError):
        load_matrix(f, "bin")
    f.write_bytes(b"DRED" + struct.pack("<BQQ", 2, 1, 1) + np.zeros(1).tobytes())
    with pytest.raises(ParseError):
        load_matrix(f, "bin")


@pytest.mark.parametrize("fmt", ["bin", "csv"])
def test_round_trip_is_exact(tmp_path, rng, fmt):
    X = rng.standard_normal((7, 5)) * 1e3
    f = tmp_path / f"m.{fmt}"
    save_matrix(f, X, fmt)
    assert load_matrix(f, fmt).values.tobytes() == X.tobytes()


def test_datamatrix_is_immutable_and_finite():
    A = DataMatrix(np.ones((2, 2)))
    with pytest.raises(ValueError):
        A.values[0, 0] = 5
    with pytest.raises(NumericError):
        DataMatrix([[1.0, np.inf], [0.0, 1.0]])
    with pytest.raises(ConfigError):
        DataMatrix([[1.0, 2.0]])


def test_preprocess_antisymmetric_pair():
    P = preprocess(np.array([[3.0, 4.0], [-3.0, -4.0]]))
    np.testing.assert_allclose(P.values, [[0.6, 0.8], [-0.6, -0.8]], atol=1e-15)
    assert P.row_normalized and P.column_centered
    assert P.history == ("row_normalize", "column_center")


def test_preprocess_identity():
    np.testing.assert_allclose(preprocess(np.eye(2)).values, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)


def test_preprocess_does_not_modify_input(rng):
    X = rng.standard_normal((5, 3))
    before = X.copy()
    preprocess(X)
    np.testing.assert_array_equal(X, before)


def test_preprocess_centers_random_matrix(rng):
    X = rng.standard_normal((50, 10)) + 3.0
    P = preprocess(X).values
    # independent recomputation of the means
    means = [sum(P[i, j] for i in range(50)) / 50 for j in range(10)]
    assert max(abs(m) for m in means) <= 1e-12


def test_zero_row_policies():
    X = np.array([[1.0, 2.0], [0.0, 0.0], [2.0, 1.0], [1.0, 1.0]])
    with pytest.raises(ZeroRowError) as info:
        preprocess(X)
    assert info.value.row == 1
    P = preprocess(X, zero_rows="drop")
    assert P.n == 3


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(1, 6)), elements=st.floats(-1e3, 1e3)))
def test_recentering_is_idempotent(X):
    if np.any(np.linalg.norm(X, axis=1) == 0):
        return
    P = preprocess(X).values
    again = P - P.mean(axis=0)
    assert np.max(np.abs(again - P)) <= 1e-12


@pytest.mark.parametrize(
    "profile, n, rho, tol",
    [((1.0,), 5, 1.0, 1e-9), ((2.0, 1.0), 10, 1.25, 1e-9), ((1.0, 1.0, 1.0, 1.0), 20, 4.0, 1e-8)],
)
def test_synth_stable_rank(profile, n, rho, tol):
    A = synth_spiked(n, n, SpectrumProfile(profile), RandomStream(1, Purpose.SYNTH_DATA))
    s = np.linalg.svd(A.values, compute_uv=False)
    assert abs(np.sum(s**2) / s[0] ** 2 - rho) <= tol


@pytest.mark.parametrize("centered", [False, True])
def test_synth_spectrum_and_energy(centered):
    profile = SpectrumProfile((5, 4, 3, 2, 1))
    A = synth_spiked(30, 12, profile, RandomStream(4, Purpose.SYNTH_DATA), centered=centered)
    s = np.linalg.svd(A.values, compute_uv=False)[:5]
    np.testing.assert_allclose(s, profile.values, rtol=1e-8)
    assert abs(np.sum(A.values**2) - profile.energy) <= 1e-8 * profile.energy
    if centered:
        assert A.column_centered
        assert np.max(np.abs(A.values.mean(axis=0))) < 1e-14


def test_synth_rejects_long_profile():
    with pytest.raises(ConfigError):
        synth_spiked(3, 5, SpectrumProfile((1, 1, 1, 1)))
    with pytest.raises(ConfigError):
        SpectrumProfile((1, 2))


def test_binary_file_read_as_csv_is_parse_error(tmp_path):
    p = tmp_path / "m.bin"
    save_matrix(p, np.eye(3) * 0.7)
    with pytest.raises(ParseError):
        load_matrix(p, "csv")
