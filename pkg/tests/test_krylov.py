import logging

import numpy as np
import pytest

from bivarfun.errors import AnalyticityError
from bivarfun.funexpr import parse
from bivarfun.krylov import apriori_error_bound, arnoldi, bivariate_krylov
from bivarfun.matfun import eval_bivariate

from conftest import crandn

log = logging.getLogger(__name__)


def hpd(rng, n, shift=1.0):
    G = rng.standard_normal((n, n))
    return G @ G.T / n + shift * np.eye(n)


def test_arnoldi_identity_breakdown():
    c = np.array([3.0, 4.0, 0.0])
    arn = arnoldi(np.eye(3), c, 3)
    assert arn.breakdown_step == 1 and arn.k == 1
    np.testing.assert_allclose(arn.Uk.ravel(), c / 5)


def test_arnoldi_shift_chain():
    S = np.diag(np.ones(3), -1)
    arn = arnoldi(S, np.eye(4)[:, 0], 4)
    np.testing.assert_allclose(arn.basis[:, :4], np.eye(4), atol=1e-15)
    np.testing.assert_allclose(arn.hess[:4], S, atol=1e-15)


def test_arnoldi_relation(rng):
    A = crandn(rng, 8, 8)
    arn = arnoldi(A, crandn(rng, 8), 6)
    U, H = arn.basis, arn.hess
    assert np.linalg.norm(A @ U[:, :6] - U @ H) <= 1e-10 * np.linalg.norm(A, 2)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(7), atol=1e-10)


def test_arnoldi_errors(rng):
    with pytest.raises(ValueError):
        arnoldi(np.eye(3), np.zeros(3), 2)
    with pytest.raises(ValueError):
        arnoldi(np.eye(3), np.ones(3), 4)


def test_galerkin_consistency(rng):
    A, B = crandn(rng, 5, 5), crandn(rng, 4, 4)
    cA, cB = crandn(rng, 5), crandn(rng, 4)
    U = arnoldi(A, cA, 1).Uk
    V = arnoldi(B, cB, 1).Uk
    np.testing.assert_allclose(U @ (U.conj().T @ cA), cA, atol=1e-14)
    c = np.outer(cA, cB).ravel(order="F")
    proj = np.kron(V, U).conj().T @ c
    assert np.linalg.norm(proj) == pytest.approx(np.linalg.norm(c), rel=1e-13)


def test_polynomial_exactness(rng):
    A, B = crandn(rng, 6, 6), crandn(rng, 5, 5)
    cA, cB = crandn(rng, 6), crandn(rng, 5)
    res = bivariate_krylov(parse("x*y", 2), A, B, cA, cB, 2, 2, exact=True)
    scale = res.metadata["exact_norm"]
    assert res.error_vs_exact <= 1e-9 * scale
    assert np.linalg.norm(res.x_kl) == pytest.approx(np.linalg.norm(res.y_kl), rel=1e-12)


def test_full_dimension_exact(rng):
    A, B = crandn(rng, 4, 4), crandn(rng, 3, 3)
    res = bivariate_krylov(parse("exp(x*y)", 2), A, B, crandn(rng, 4), crandn(rng, 3), 4, 3,
                           exact=True)
    assert res.error_vs_exact <= 1e-8 * res.metadata["exact_norm"]


def test_breakdown_clamps(rng):
    B = crandn(rng, 3, 3)
    res = bivariate_krylov(parse("x + y", 2), np.eye(4), B, np.ones(4), np.ones(3), 3, 2)
    assert res.k == 1 and res.metadata["clamped"]


def test_hpd_monotone_and_bound(rng):
    n = 8
    A, B = hpd(rng, n), hpd(rng, n)
    c = np.ones(n)
    f = parse("1/(x+y)", 2)
    exact = eval_bivariate(f, A, B).apply(np.outer(c, c))
    # Sylvester-equation oracle: A X + X B^T = c c^T
    sylv = np.linalg.solve(np.kron(np.eye(n), A) + np.kron(B, np.eye(n)),
                           np.outer(c, c).ravel(order="F")).reshape(n, n, order="F")
    np.testing.assert_allclose(exact, sylv, atol=1e-10)
    errs = []
    for k in (2, 4, 6):
        res = bivariate_krylov(f, A, B, c, c, k, k)
        err = np.linalg.norm(res.x_kl.reshape(n, n, order="F") - sylv)
        errs.append(err)
        bound = apriori_error_bound(f, A, B, k, k, c_norm=n)
        assert err <= bound
    assert errs[0] > errs[1] > errs[2] or errs[2] <= 1e-12


def test_bound_polynomial_zero(rng):
    A, B = crandn(rng, 5, 5), crandn(rng, 5, 5)
    assert apriori_error_bound(parse("1 + x*y^2 - 3*x", 2), A, B, 2, 3) <= 1e-10


def test_bound_decreases_for_exp(rng):
    A, B = crandn(rng, 6, 6), crandn(rng, 6, 6)
    A, B = A / np.linalg.norm(A, 2), B / np.linalg.norm(B, 2)  # W inside the unit disc
    f = parse("exp(x+y)", 2)
    assert apriori_error_bound(f, A, B, 6, 6) <= 0.1 * apriori_error_bound(f, A, B, 3, 3)


def test_degree_cap(rng):
    A, B = crandn(rng, 5, 5), crandn(rng, 5, 5)
    f = parse("exp(x+y)", 2)
    assert apriori_error_bound(f, A, B, 6, 6, degree_cap=2) == pytest.approx(
        apriori_error_bound(f, A, B, 3, 3))


def test_probe_failure(rng):
    with pytest.raises(AnalyticityError):
        bivariate_krylov(parse("1/(x+y)", 2), crandn(rng, 4, 4), crandn(rng, 4, 4),
                         np.ones(4), np.ones(4), 2, 2)
