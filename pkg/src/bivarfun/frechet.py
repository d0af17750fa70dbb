"""Frechet derivatives of univariate matrix functions.

``Df{A}`` is represented by the bivariate function ``f[x, y]`` (the first
divided difference) evaluated at ``(A, A^T)``: applied to ``E`` it gives
``sum c_ij (x_i I - A)^{-1} E (y_j I - A)^{-1}``.  W(A^T) = W(A), so the
contour built for A is reused for the transpose.  The operator norm
reported is the one induced by the Frobenius norm, i.e. the 2-norm of the
``n^2 x n^2`` Kronecker matrix.
"""

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, K_CP
from .fieldvals import enclosing_contour, numrange, refine_argmax
from .funexpr import diff, divided_difference
from .linalg import as_matrix, spectral_norm
from .matfun import QuadratureSpec, default_contour, eval_bivariate, eval_univariate

__all__ = [
    "FrechetResult", "frechet_block_oracle", "frechet_finite_difference_check",
    "frechet_norm_and_bound", "frechet_operator",
]


def frechet_operator(f, A, q=None, contour=None, config=DEFAULT):
    """Quadrature representation of ``E -> Df{A}(E)``."""
    A = as_matrix(A)
    contour = contour or default_contour(A, config=config)
    dd = divided_difference(f, config.dd_threshold)
    return eval_bivariate(dd, A, A.T, contour, contour, q, config)


def frechet_block_oracle(f, A, E, q=None, config=DEFAULT):
    """Top-right block of ``f([[A, E], [0, A]])``.

    ``E`` is rescaled before forming the block matrix (the block is linear
    in ``E``) so that its numerical range stays close to W(A).
    """
    A, E = as_matrix(A), as_matrix(E)
    if A.shape != E.shape or A.shape[0] != A.shape[1]:
        raise ValueError("A and E must be square and of equal size")
    n = A.shape[0]
    nE = np.linalg.norm(E, 2)
    if nE == 0:
        return np.zeros_like(E)
    t = 0.1 * max(1.0, np.linalg.norm(A, 2)) / nE
    blk = np.block([[A, t * E], [np.zeros_like(A), A]])
    contour = enclosing_contour(numrange(blk, config=config))
    F = eval_univariate(f, blk, contour, q, config)
    return F[:n, n:] / t


@dataclass
class FrechetResult:
    operator: object
    norm: float
    bound: float
    ratio: float
    fprime_sup: float
    metadata: dict

    def as_dict(self):
        return {"norm": self.norm, "bound": self.bound, "ratio": self.ratio,
                "fprime_sup": self.fprime_sup, "constant": K_CP ** 2,
                "metadata": self.metadata}


def fprime_sup_on_range(f, A, n_angles=None, config=DEFAULT):
    """Sampled sup of ``|f'|`` on W(A) (boundary samples, refined at the
    arg-max)."""
    fp = diff(f, 1)
    nr = numrange(A, n_angles or config.n_angles_cert, config)
    objective = lambda z: np.abs(fp.evaluate(z))
    best, _ = refine_argmax(nr.matrix, nr, objective)
    return max(best, float(objective(nr.dense_boundary()).max())), nr


def frechet_norm_and_bound(f, A, q=None, config=DEFAULT):
    """``||Df{A}||`` and the bound ``(1 + sqrt 2)^2 sup_{W(A)} |f'|``."""
    A = as_matrix(A)
    op = frechet_operator(f, A, q, config=config)
    if op.is_materializable:
        norm = spectral_norm(op.materialize())
        method = "svd"
    else:
        norm = op.norm()
        method = "power iteration"
    sup, nr = fprime_sup_on_range(f, A, config=config)
    bound = K_CP ** 2 * sup
    meta = {"norm_method": method, "N_used": op.info.get("N_used"),
            "n_angles": len(nr.angles), "n": A.shape[0]}
    ratio = norm / bound if bound > 0 else (0.0 if norm == 0 else np.inf)
    return FrechetResult(op, float(norm), float(bound), float(ratio), float(sup), meta)


def frechet_finite_difference_check(f, A, E, h, q=None, config=DEFAULT, operator=None):
    """``||(f(A + hE) - f(A))/h - Df{A}(E)||_2 / ||E||_2``.

    Both function values use the same contour, so quadrature error largely
    cancels in the difference.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    A, E = as_matrix(A), as_matrix(E)
    q = q or QuadratureSpec.fixed(512)
    nr = numrange(A, config=config)
    pert = numrange(A + h * E, config=config)
    contour = enclosing_contour(nr.with_points(pert.boundary))
    fa = eval_univariate(f, A, contour, q, config)
    fah = eval_univariate(f, A + h * E, contour, q, config)
    op = operator or frechet_operator(f, A, q, contour, config)
    L = op.apply(E)
    return float(np.linalg.norm((fah - fa) / h - L, 2) / np.linalg.norm(E, 2))
