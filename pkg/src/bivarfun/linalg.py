"""Dense complex linear algebra helpers.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; vectors are
``(n, 1)`` column matrices.  :func:`as_matrix` enforces that convention.
"""

import json
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.linalg

from .config import DEFAULT
from .errors import SingularMatrixError, SizeLimitError, SolverError

__all__ = [
    "EigenDecomposition", "as_matrix", "eig", "kron", "load_matrix",
    "matrix_from_json", "matrix_to_json", "resolvents", "save_matrix",
    "solve", "spectral_norm", "unvec", "vec",
]


def as_matrix(X):
    """Return ``X`` as a finite complex128 2-D array (1-D input becomes a
    column)."""
    M = np.asarray(X, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    elif M.ndim == 1:
        M = M.reshape(-1, 1)
    elif M.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {M.shape}")
    if M.size == 0:
        raise ValueError("empty matrix")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def kron(P, Q, config=DEFAULT):
    """Kronecker product; block ``(i, j)`` of the result is ``P[i, j] * Q``."""
    P, Q = as_matrix(P), as_matrix(Q)
    rows = P.shape[0] * Q.shape[0]
    cols = P.shape[1] * Q.shape[1]
    if max(rows, cols) > config.max_kron_size:
        raise SizeLimitError(
            f"Kronecker product of size {rows}x{cols} exceeds cap "
            f"{config.max_kron_size}")
    return np.kron(P, Q)


def vec(X):
    """Column-stacking vectorization."""
    X = as_matrix(X)
    return X.reshape(-1, 1, order="F")


def unvec(x, rows, cols):
    return np.asarray(x).reshape(rows, cols, order="F")


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray = None
    condition_estimate: float = np.inf

    @property
    def diagonalizable(self):
        return self.vectors is not None


def eig(A, want_vectors=False, config=DEFAULT):
    """Eigenvalues (and, if requested and well conditioned, eigenvectors).

    The eigenvector matrix is dropped when its 2-norm condition number
    (after normalizing columns) exceeds ``config.max_eigvec_cond``; the
    values are returned regardless.
    """
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError("eig requires a square matrix")
    try:
        w, S = scipy.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigenvalue iteration failed: {exc}") from exc
    nrm = np.linalg.norm(A, 2)
    res = np.linalg.norm(A @ S - S * w, axis=0)
    if nrm > 0 and np.any(res > config.tol_eig * nrm):
        raise SolverError(f"eigenpair residual {res.max():.3e} too large")
    S = S / np.linalg.norm(S, axis=0)
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(S)
    if not np.isfinite(cond):
        cond = np.inf
    if not want_vectors or cond > config.max_eigvec_cond:
        return EigenDecomposition(w, None, cond)
    return EigenDecomposition(w, S, cond)


def solve(M, RHS, config=DEFAULT):
    """Solve ``M X = RHS`` by LU with partial pivoting."""
    M, RHS = as_matrix(M), as_matrix(RHS)
    if M.shape[0] != M.shape[1]:
        raise ValueError("solve requires a square matrix")
    with warnings.catch_warnings():
        # singularity is reported below with the pivot magnitude
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    scale = np.abs(M).max()
    if scale == 0 or pivots.min() <= np.finfo(float).eps * scale * M.shape[0]:
        raise SingularMatrixError("matrix is singular to working precision",
                                  float(pivots.min()))
    X = scipy.linalg.lu_solve((lu, piv), RHS, check_finite=False)
    resid = np.linalg.norm(M @ X - RHS)
    bound = config.tol_solve * np.linalg.norm(M) * np.linalg.norm(X)
    if resid > bound:
        raise SolverError(f"solve residual {resid:.3e} exceeds tolerance")
    return X


def resolvents(A, nodes):
    """Stack of ``(z I - A)^{-1}`` for every ``z`` in ``nodes``.

    One batched LU per node; the result has shape ``(len(nodes), n, n)``.
    """
    A = as_matrix(A)
    n = A.shape[0]
    z = np.asarray(nodes, dtype=np.complex128).reshape(-1, 1, 1)
    shifted = z * np.eye(n) - A
    eye = np.broadcast_to(np.eye(n, dtype=np.complex128), shifted.shape)
    try:
        R = np.linalg.solve(shifted, eye)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("contour node hits an eigenvalue", 0.0) from exc
    if not np.all(np.isfinite(R)):
        raise SingularMatrixError("contour node hits an eigenvalue", 0.0)
    return R


def spectral_norm(M):
    """Largest singular value."""
    M = np.asarray(M, dtype=np.complex128)
    if M.size == 0 or not np.any(M):
        return 0.0
    return float(np.linalg.norm(M, 2))


# --- file I/O ----------------------------------------------------------------

def matrix_to_json(M):
    M = as_matrix(M)
    flat = M.reshape(-1)
    return {
        "rows": M.shape[0],
        "cols": M.shape[1],
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj):
    rows, cols = int(obj["rows"]), int(obj["cols"])
    entries = obj["entries"]
    if rows < 1 or cols < 1 or len(entries) != rows * cols:
        raise ValueError("matrix JSON: entries length does not match rows*cols")
    data = np.array([complex(float(re), float(im)) for re, im in entries],
                    dtype=np.complex128)
    return as_matrix(data.reshape(rows, cols))


def load_matrix(path):
    """Read a matrix from ``.json`` or Matrix Market (``.mtx``) format."""
    path = str(path)
    if path.endswith(".json"):
        with open(path) as fh:
            return matrix_from_json(json.load(fh))
    M = scipy.io.mmread(path)
    if hasattr(M, "toarray"):
        M = M.toarray()
    return as_matrix(M)


def save_matrix(path, M):
    path = str(path)
    if path.endswith(".json"):
        with open(path, "w") as fh:
            json.dump(matrix_to_json(M), fh)
    else:
        scipy.io.mmwrite(path, as_matrix(M), field="complex")
