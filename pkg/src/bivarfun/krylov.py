"""Bivariate Arnoldi approximation of ``f{A, B} vec(c_A c_B^T)``.

Orthonormal Krylov bases ``U_k`` of K_k(A, c_A) and ``V_l`` of K_l(B, c_B)
compress the problem to ``f{U_k* A U_k, V_l* B V_l}``; the compressed
solution is lifted back with ``V_l (x) U_k``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, K_CP
from .fieldvals import enclosing_contour, numrange
from .errors import AnalyticityError
from .funexpr import analyticity_probe
from .linalg import as_matrix, vec
from .matfun import default_contour, eval_bivariate

__all__ = [
    "ArnoldiDecomposition", "KrylovApproxResult", "apriori_error_bound",
    "arnoldi", "bivariate_krylov", "chebyshev_estimate",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ArnoldiDecomposition:
    basis: np.ndarray      # n x (k+1), or n x k after breakdown
    hess: np.ndarray       # (k+1) x k, or k x k after breakdown
    breakdown_step: int = None

    @property
    def k(self):
        return self.hess.shape[1]

    @property
    def Uk(self):
        return self.basis[:, : self.k]


def arnoldi(A, c, k):
    """``k`` steps of Arnoldi (modified Gram-Schmidt, one reorthogonalization
    pass).  Stops early on happy breakdown."""
    A = as_matrix(A)
    c = as_matrix(c).ravel()
    n = A.shape[0]
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    beta = np.linalg.norm(c)
    if beta == 0:
        raise ValueError("zero starting vector")
    U = np.zeros((n, k + 1), dtype=np.complex128)
    H = np.zeros((k + 1, k), dtype=np.complex128)
    U[:, 0] = c / beta
    tol = 1e-12 * max(np.linalg.norm(A, 2), np.finfo(float).tiny)
    for j in range(k):
        w = A @ U[:, j]
        for _ in range(2):
            for i in range(j + 1):
                h = np.vdot(U[:, i], w)
                H[i, j] += h
                w = w - h * U[:, i]
        H[j + 1, j] = np.linalg.norm(w)
        if H[j + 1, j].real <= tol:
            return ArnoldiDecomposition(U[:, : j + 1].copy(), H[: j + 1, : j + 1].copy(), j + 1)
        U[:, j + 1] = w / H[j + 1, j]
    return ArnoldiDecomposition(U, H, None)


@dataclass
class KrylovApproxResult:
    x_kl: np.ndarray
    y_kl: np.ndarray
    k: int
    l: int
    error_vs_exact: float = None
    apriori_bound: float = None
    metadata: dict = field(default_factory=dict)

    def as_dict(self):
        return {"k": self.k, "l": self.l,
                "x_kl": [[float(z.real), float(z.imag)] for z in self.x_kl.ravel()],
                "error_vs_exact": self.error_vs_exact,
                "apriori_bound": self.apriori_bound, "metadata": self.metadata}


def bivariate_krylov(f, A, B, c_A, c_B, k, l, q=None, exact=False, config=DEFAULT):
    """Arnoldi approximation ``x_kl = (V_l (x) U_k) y_kl`` of ``f{A, B} c``.

    Contours for the compressed matrices come from the numerical ranges of
    the full matrices, which contain those of the compressions.
    """
    A, B = as_matrix(A), as_matrix(B)
    c_A, c_B = as_matrix(c_A), as_matrix(c_B)
    contour_A = default_contour(A, config=config)
    contour_B = default_contour(B, config=config)
    if not analyticity_probe(f, [contour_A, contour_B], config.n_probe, config.probe_cap):
        raise AnalyticityError(f"{f} failed the analyticity probe")
    arnA = arnoldi(A, c_A, k)
    arnB = arnoldi(B, c_B, l)
    meta = {"k_requested": k, "l_requested": l}
    if arnA.k < k or arnB.k < l:
        meta["clamped"] = True
        log.info("Krylov dimensions clamped to (%d, %d) by breakdown", arnA.k, arnB.k)
    U, V = arnA.Uk, arnB.Uk
    Ak = U.conj().T @ A @ U
    Bl = V.conj().T @ B @ V
    op = eval_bivariate(f, Ak, Bl, contour_A, contour_B, q, config)
    C = U.conj().T @ (c_A @ c_B.T) @ V.conj()
    Y = op.apply(C)
    X = U @ Y @ V.T
    res = KrylovApproxResult(vec(X), vec(Y), arnA.k, arnB.k, metadata=meta)
    meta["N_used"] = op.info.get("N_used")
    if exact:
        full = eval_bivariate(f, A, B, contour_A, contour_B, q, config)
        ref = full.apply(c_A @ c_B.T)
        res.error_vs_exact = float(np.linalg.norm(ref - X))
        meta["exact_norm"] = float(np.linalg.norm(ref))
    return res


# --- a priori bound -----------------------------------------------------------------

def _long_axis(points):
    """Segment through the center of the bounding rectangle of ``points``,
    parallel to its longer side: ``(center, half_length_vector)``."""
    re, im = points.real, points.imag
    c = complex(0.5 * (re.max() + re.min()), 0.5 * (im.max() + im.min()))
    wr, wi = 0.5 * (re.max() - re.min()), 0.5 * (im.max() - im.min())
    half = wr if wr >= wi else 1j * wi
    if half == 0:
        half = 1.0
    return c, half


def _cheb_vander(u, deg):
    T = np.empty(u.shape + (deg + 1,), dtype=np.complex128)
    T[..., 0] = 1
    if deg >= 1:
        T[..., 1] = u
    for m in range(2, deg + 1):
        T[..., m] = 2 * u * T[..., m - 1] - T[..., m - 2]
    return T


def chebyshev_estimate(f, nr_A, nr_B, k, l):
    """Sampled ``max |f - p|`` over the boundary grid of W(A) x W(B), with
    ``p`` the tensor Chebyshev interpolant of degree ``(k-1, l-1)``.

    Interpolation nodes are Chebyshev points of the first kind on the long
    axis of each bounding rectangle.  This is an upper estimate of the best
    approximation error (up to boundary sampling), not the optimum itself.
    """
    cA, hA = _long_axis(nr_A.boundary)
    cB, hB = _long_axis(nr_B.boundary)
    tk = np.cos((2 * np.arange(k) + 1) * np.pi / (2 * k))
    tl = np.cos((2 * np.arange(l) + 1) * np.pi / (2 * l))
    F = f.evaluate((cA + hA * tk)[:, None], (cB + hB * tl)[None, :])
    TA = _cheb_vander(tk.astype(complex), k - 1)
    TB = _cheb_vander(tl.astype(complex), l - 1)
    coef = np.linalg.solve(TA, np.linalg.solve(TB, F.T).T)
    bA, bB = nr_A.dense_boundary(), nr_B.dense_boundary()
    uA = (bA - cA) / hA
    uB = (bB - cB) / hB
    PA = _cheb_vander(uA, k - 1)
    PB = _cheb_vander(uB, l - 1)
    P = PA @ coef @ PB.T
    E = f.evaluate(bA[:, None], bB[None, :]) - P
    return float(np.abs(E).max())


def apriori_error_bound(f, A, B, k, l, degree_cap=None, c_norm=1.0, n_angles=None,
                        config=DEFAULT):
    """``2 (1 + sqrt 2)^2 ||c|| E_hat``, with ``E_hat`` from
    :func:`chebyshev_estimate`.  An estimate, not a rigorous bound.

    ``degree_cap`` limits the interpolation degree in each variable (the
    estimate then uses degree ``min(k, degree_cap + 1) - 1``).
    """
    if k < 1 or l < 1:
        raise ValueError("k and l must be positive")
    if degree_cap is not None:
        k, l = min(k, degree_cap + 1), min(l, degree_cap + 1)
    A, B = as_matrix(A), as_matrix(B)
    nr_A = numrange(A, n_angles or config.n_angles, config)
    nr_B = numrange(B, n_angles or config.n_angles, config)
    contours = [enclosing_contour(nr_A), enclosing_contour(nr_B)]
    if not analyticity_probe(f, contours, config.n_probe, config.probe_cap):
        raise AnalyticityError(f"{f} failed the analyticity probe")
    est = chebyshev_estimate(f, nr_A, nr_B, k, l)
    return 2 * K_CP ** 2 * float(c_norm) * est
