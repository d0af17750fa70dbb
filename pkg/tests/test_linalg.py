import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from bivarfun.config import Config
from bivarfun.errors import SingularMatrixError, SizeLimitError
from bivarfun.linalg import (as_matrix, eig, kron, load_matrix, matrix_from_json,
                             matrix_to_json, resolvents, save_matrix, solve,
                             spectral_norm, unvec, vec)

from conftest import JORDAN, crandn, random_normal, random_unitary

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
complex_entries = st.builds(complex, finite, finite)


def test_kron_identity_and_scalar():
    np.testing.assert_array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))
    np.testing.assert_array_equal(kron([[2]], [[3 + 1j]]), [[6 + 2j]])


def test_kron_jordan_pair():
    K = kron(JORDAN, JORDAN)
    assert np.count_nonzero(K) == 1 and K.sum() == 1
    assert spectral_norm(K) == pytest.approx(1.0, abs=1e-15)


def test_kron_size_cap():
    cfg = Config(max_kron_size=16)
    with pytest.raises(SizeLimitError):
        kron(np.eye(5), np.eye(4), cfg)
    assert kron(np.eye(4), np.eye(4), cfg).shape == (16, 16)


def test_kron_mixed_product(rng):
    P, Q, R, S = crandn(rng, 2, 3), crandn(rng, 4, 2), crandn(rng, 3, 2), crandn(rng, 2, 5)
    lhs = kron(P, Q) @ kron(R, S)
    np.testing.assert_allclose(lhs, kron(P @ R, Q @ S), atol=1e-12)


def test_kron_bilinear(rng):
    P1, P2, Q = crandn(rng, 3, 3), crandn(rng, 3, 3), crandn(rng, 2, 2)
    a, b = 0.3 - 1j, 2.0
    np.testing.assert_allclose(kron(a * P1 + b * P2, Q), a * kron(P1, Q) + b * kron(P2, Q),
                               atol=1e-12)


def test_vec_definition():
    np.testing.assert_array_equal(vec([[1, 2], [3, 4]]).ravel(), [1, 3, 2, 4])
    c = np.array([[1.0], [2.0], [3.0]])
    np.testing.assert_array_equal(vec(c), c)


def test_vec_kron_identity(rng):
    X, P, Q = crandn(rng, 2, 3), crandn(rng, 2, 2), crandn(rng, 3, 3)
    np.testing.assert_allclose(kron(Q, P) @ vec(X), vec(P @ X @ Q.T), atol=1e-14)


@given(arrays(np.complex128, st.tuples(st.integers(1, 5), st.integers(1, 5)),
              elements=complex_entries))
def test_vec_unvec_roundtrip(X):
    np.testing.assert_array_equal(unvec(vec(X), *X.shape), X)


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])
    assert as_matrix([1, 2]).shape == (2, 1)


def test_eig_examples():
    d = eig(np.diag([1, 2j, -3]))
    key = lambda z: (z.real, z.imag)
    assert sorted(d.values, key=key) == pytest.approx(sorted([1, 2j, -3], key=key))
    J = eig(JORDAN, want_vectors=True)
    np.testing.assert_allclose(J.values, [0, 0], atol=1e-12)
    assert J.vectors is None and not J.diagonalizable
    C = np.array([[3.0, -2.0], [1.0, 0.0]])  # companion of z^2 - 3z + 2
    np.testing.assert_allclose(np.sort(eig(C).values.real), np.sort(np.roots([1, -3, 2]).real),
                               atol=1e-12)


def test_eig_residual(rng):
    A = crandn(rng, 6, 6)
    d = eig(A, want_vectors=True)
    S = d.vectors
    res = np.linalg.norm(A @ S - S * d.values, axis=0)
    assert res.max() <= 1e-10 * np.linalg.norm(A, 2)
    assert d.condition_estimate >= 1


def test_eig_normal_frobenius(rng):
    A = random_normal(rng, 7)
    vals = eig(A).values
    assert np.sum(np.abs(vals) ** 2) == pytest.approx(np.linalg.norm(A) ** 2, rel=1e-10)


def test_solve_examples(rng):
    R = crandn(rng, 3, 2)
    np.testing.assert_allclose(solve(np.eye(3), R), R)
    np.testing.assert_allclose(solve(np.diag([2.0, 4.0]), np.eye(2)), np.diag([0.5, 0.25]))
    M = crandn(rng, 5, 5) + 5 * np.eye(5)
    B = crandn(rng, 5, 3)
    X = solve(M, B)
    assert np.linalg.norm(M @ X - B) <= 1e-12 * np.linalg.norm(M, 2) * np.linalg.norm(X)


def test_solve_singular_reports_pivot():
    with pytest.raises(SingularMatrixError) as info:
        solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.eye(2))
    assert info.value.pivot is not None


def test_resolvents_match_solve(rng):
    A = crandn(rng, 4, 4)
    z = np.array([5.0, 4j, -6 + 1j])
    R = resolvents(A, z)
    for k, zk in enumerate(z):
        np.testing.assert_allclose(R[k] @ (zk * np.eye(4) - A), np.eye(4), atol=1e-13)


def test_spectral_norm_examples(rng):
    assert spectral_norm(np.eye(4)) == pytest.approx(1.0)
    assert spectral_norm(np.zeros((3, 3))) == 0.0
    M = crandn(rng, 6, 6)
    U, V = random_unitary(rng, 6), random_unitary(rng, 6)
    assert spectral_norm(U @ M @ V) == pytest.approx(spectral_norm(M), rel=1e-10)


def test_spectral_norm_is_a_norm(rng):
    for _ in range(10):
        X, Y = crandn(rng, 4, 3), crandn(rng, 4, 3)
        a = complex(*rng.standard_normal(2))
        assert spectral_norm(X + Y) <= spectral_norm(X) + spectral_norm(Y) + 1e-12
        assert spectral_norm(a * X) == pytest.approx(abs(a) * spectral_norm(X), rel=1e-12)


@given(arrays(np.complex128, st.tuples(st.integers(1, 4), st.integers(1, 4)),
              elements=complex_entries))
def test_json_roundtrip_bit_exact(X):
    text = json.dumps(matrix_to_json(X))
    Y = matrix_from_json(json.loads(text))
    assert Y.tobytes() == X.tobytes()


def test_json_rejects_bad_length():
    with pytest.raises(ValueError):
        matrix_from_json({"rows": 2, "cols": 2, "entries": [[1, 0]]})


def test_file_roundtrip(tmp_path, rng):
    X = crandn(rng, 3, 4)
    for name in ("m.json", "m.mtx"):
        path = tmp_path / name
        save_matrix(path, X)
        np.testing.assert_allclose(load_matrix(path), X, rtol=1e-15)
    save_matrix(tmp_path / "e.json", X)
    assert load_matrix(tmp_path / "e.json").tobytes() == X.tobytes()
