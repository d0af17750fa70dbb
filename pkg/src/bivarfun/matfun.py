"""Matrix functions by trapezoidal quadrature of Cauchy integrals.

Univariate ``f(A)``, matrix-valued ``F(A)``, bivariate ``f{A, B}`` (the
function evaluated in the commuting pair ``I (x) A``, ``B (x) I``) and the
d-variate generalization.  Kronecker factors are ordered with the last
variable leftmost, so ``f{A, B}`` for ``f = x*y`` is ``kron(B, A)``.

Resolvent stacks are computed once per contour and node count and reused
for every tensor pair; doubling the node count only adds the midpoints.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT
from .errors import (AccuracyWarning, AnalyticityError, OracleUnavailableError,
                     SizeLimitError)
from .fieldvals import enclosing_contour, numrange
from .funexpr import Binary, Const, MatrixFunExpr, Pow, Unary, Var, analyticity_probe
from .linalg import as_matrix, eig, kron, resolvents, solve, unvec, vec

__all__ = [
    "BivariateOperator", "QuadratureSpec", "apply_bivariate", "default_contour",
    "eval_bivariate", "eval_matrix_valued", "eval_multivariate",
    "eval_univariate", "oracle_diag", "oracle_diag_univariate",
    "polynomial_oracle",
]

TWO_PI_I = 2j * np.pi


@dataclass(frozen=True)
class QuadratureSpec:
    nodes_per_contour: int = DEFAULT.nodes
    adaptive: bool = DEFAULT.adaptive
    rel_tol: float = DEFAULT.rel_tol
    max_nodes: int = DEFAULT.max_nodes

    def __post_init__(self):
        N = self.nodes_per_contour
        if N < 16 or N & (N - 1):
            raise ValueError("nodes_per_contour must be a power of two >= 16")
        if self.max_nodes < N:
            raise ValueError("max_nodes must be >= nodes_per_contour")

    @classmethod
    def fixed(cls, N):
        return cls(N, adaptive=False, max_nodes=N)

    @classmethod
    def from_config(cls, config):
        return cls(config.nodes, config.adaptive, config.rel_tol, config.max_nodes)


class _Rule:
    """Trapezoidal nodes, weights and resolvents on one contour for one
    matrix, with node doubling that reuses previous resolvents."""

    def __init__(self, contour, A):
        self.contour = contour
        self.A = A
        self._cache = {}

    def get(self, N):
        if N in self._cache:
            return self._cache[N]
        t = 2 * np.pi * np.arange(N) / N
        z = self.contour.point(t)
        w = self.contour.derivative(t) * (2 * np.pi / N) / TWO_PI_I
        half = N // 2
        if N % 2 == 0 and half in self._cache:
            R = np.empty((N, self.A.shape[0], self.A.shape[0]), dtype=np.complex128)
            R[0::2] = self._cache[half][2]
            R[1::2] = resolvents(self.A, z[1::2])
        else:
            R = resolvents(self.A, z)
        self._cache[N] = (z, w, R)
        return self._cache[N]


def default_contour(A, margin=None, config=DEFAULT):
    return enclosing_contour(numrange(A, config=config), margin)


def _check_enclosed(A, contour, label="A"):
    w = eig(A).values
    if not np.all(contour.inside(w)):
        raise ValueError(f"contour does not enclose the spectrum of {label}")


def _probe(f, contours, config):
    if not analyticity_probe(f, contours, config.n_probe, config.probe_cap):
        raise AnalyticityError(
            f"{f} failed the analyticity probe on the supplied contours")


def _rel_change(new, old):
    den = np.linalg.norm(new)
    return float(np.linalg.norm(new - old) / den) if den > 0 else float(np.linalg.norm(new - old))


def _adapt(compute, q, budget=None):
    """Run ``compute(N)`` with doubling N until the relative change between
    successive results is below ``q.rel_tol``.

    When ``budget`` forbids doubling, the error is estimated against the
    half-node result instead.
    """
    limit = q.max_nodes if budget is None else min(q.max_nodes, budget)
    N = q.nodes_per_contour
    while N > limit and N > 16:
        N //= 2
    cur = compute(N)
    info = {"N_used": N, "est_error": None, "converged": not q.adaptive}
    if not q.adaptive:
        return cur, info
    if 2 * N > limit:
        err = _rel_change(cur, compute(N // 2))
        info.update(est_error=err, converged=err <= q.rel_tol)
    while not info["converged"] and 2 * N <= limit:
        N *= 2
        new = compute(N)
        err = _rel_change(new, cur)
        cur = new
        info.update(N_used=N, est_error=err, converged=err <= q.rel_tol)
    if not info["converged"]:
        warnings.warn(f"quadrature did not reach rel_tol={q.rel_tol} with "
                      f"{N} nodes (estimate {info['est_error']:.2e})", AccuracyWarning)
    return cur, info


# --- univariate -----------------------------------------------------------------

def eval_univariate(f, A, contour=None, q=None, config=DEFAULT, full_output=False):
    """``f(A)`` by the trapezoidal rule on a closed contour around W(A)."""
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    q = q or QuadratureSpec.from_config(config)
    contour = contour or default_contour(A, config=config)
    _check_enclosed(A, contour)
    _probe(f, [contour], config)
    rule = _Rule(contour, A)
    is_matrix = isinstance(f, MatrixFunExpr)

    def compute(N):
        z, w, R = rule.get(N)
        fz = f.evaluate(z)
        if is_matrix:
            n = A.shape[0]
            m, p = f.shape
            out = np.einsum("k,kij,kab->iajb", w, fz, R)
            return out.reshape(m * n, p * n)
        return np.einsum("k,kab->ab", w * fz, R)

    M, info = _adapt(compute, q)
    info["contour"] = contour
    return (M, info) if full_output else M


def eval_matrix_valued(F, A, contour=None, q=None, config=DEFAULT, full_output=False):
    """Block matrix whose ``(i, j)`` block is ``f_ij(A)``."""
    if not isinstance(F, MatrixFunExpr):
        raise TypeError("expected a MatrixFunExpr")
    return eval_univariate(F, A, contour, q, config, full_output)


# --- bivariate ------------------------------------------------------------------

class BivariateOperator:
    """Linear operator on ``n_A x n_B`` matrices (or on vectors of length
    ``p n_A n_B`` for matrix-valued functions).

    ``apply`` never forms Kronecker products; ``materialize`` does and is
    subject to the configured size cap.
    """

    def __init__(self, n_A, n_B, applier, materializer, adjoint=None,
                 shape=(1, 1), info=None, config=DEFAULT):
        self.n_A, self.n_B = n_A, n_B
        self._applier = applier
        self._materializer = materializer
        self._adjoint = adjoint
        self.value_shape = shape
        self.info = info or {}
        self.config = config
        self._matrix = None

    @property
    def dims(self):
        return (self.n_A, self.n_B)

    @property
    def is_materializable(self):
        m, p = self.value_shape
        return max(m, p) * self.n_A * self.n_B <= self.config.max_kron_size

    def materialize(self):
        if self._matrix is None:
            if not self.is_materializable:
                raise SizeLimitError(
                    f"operator of size {self.n_A * self.n_B} exceeds cap "
                    f"{self.config.max_kron_size}; use apply()")
            self._matrix = self._materializer()
        return self._matrix

    @property
    def matrix(self):
        return self.materialize()

    def apply(self, X):
        X = as_matrix(X)
        if self.value_shape != (1, 1):
            return unvec(self.materialize() @ vec(X), -1, 1)
        if X.shape != (self.n_A, self.n_B):
            raise ValueError(f"X must have shape {(self.n_A, self.n_B)}, got {X.shape}")
        return self._applier(X)

    def apply_adjoint(self, Y):
        Y = as_matrix(Y)
        if self._adjoint is None or self.value_shape != (1, 1):
            return unvec(self.materialize().conj().T @ vec(Y), self.n_A, self.n_B)
        return self._adjoint(Y)

    def norm(self, maxiter=500, tol=1e-12, seed=0):
        """Spectral norm; power iteration on ``L* L`` when the operator is
        too large to materialize."""
        if self.is_materializable:
            return float(np.linalg.norm(self.materialize(), 2))
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((self.n_A, self.n_B)) + 1j * rng.standard_normal((self.n_A, self.n_B))
        X /= np.linalg.norm(X)
        est = 0.0
        for _ in range(maxiter):
            Y = self.apply_adjoint(self.apply(X))
            new = np.sqrt(np.linalg.norm(Y))
            X = Y / np.linalg.norm(Y)
            if abs(new - est) <= tol * new:
                est = new
                break
            est = new
        self.info["norm_method"] = "power iteration"
        return float(est)


def _materialize_bivariate(C, RA, RB, shape):
    nA, nB = RA.shape[1], RB.shape[1]
    if shape == (1, 1):
        T = np.einsum("ij,iac->jac", C, RA)
        M = np.einsum("jbd,jac->badc", RB, T)
        return M.reshape(nB * nA, nB * nA)
    m, p = shape
    T = np.einsum("ijmp,iac->jmpac", C, RA)
    M = np.einsum("jbd,jmpac->mbapdc", RB, T)
    return M.reshape(m * nB * nA, p * nB * nA)


def _apply_bivariate(C, RA, RB, X):
    Z = np.einsum("iac,cd->iad", RA, X)           # RA_i X
    W = np.einsum("ij,iad->jad", C, Z)             # sum_i c_ij RA_i X
    return np.einsum("jad,jbd->ab", W, RB)         # ... RB_j^T


def _adjoint_bivariate(C, RA, RB, Y):
    Z = np.einsum("ica,cd->iad", RA.conj(), Y)     # RA_i^H Y
    W = np.einsum("ij,iad->jad", C.conj(), Z)
    return np.einsum("jad,jdb->ab", W, RB.conj())  # ... conj(RB_j)


def _coefficients(f, zA, wA, zB, wB):
    vals = f.evaluate(zA[:, None], zB[None, :])
    wgt = wA[:, None] * wB[None, :]
    if vals.ndim == 4:
        return wgt[:, :, None, None] * vals
    return wgt * vals


def _scale(f_vals, wA, RA, wB, RB):
    nA = np.linalg.norm(RA, axis=(1, 2)).max() * np.abs(wA).sum()
    nB = np.linalg.norm(RB, axis=(1, 2)).max() * np.abs(wB).sum()
    return float(np.abs(f_vals).max() * nA * nB)


def eval_bivariate(f, A, B, contour_A=None, contour_B=None, q=None, config=DEFAULT):
    """Bivariate matrix function ``f{A, B}`` (or ``F{A, B}``) by the tensor
    trapezoidal rule; returns a :class:`BivariateOperator`."""
    A, B = as_matrix(A), as_matrix(B)
    q = q or QuadratureSpec.from_config(config)
    contour_A = contour_A or default_contour(A, config=config)
    contour_B = contour_B or default_contour(B, config=config)
    _check_enclosed(A, contour_A, "A")
    _check_enclosed(B, contour_B, "B")
    _probe(f, [contour_A, contour_B], config)
    shape = f.shape if isinstance(f, MatrixFunExpr) else (1, 1)
    ruleA, ruleB = _Rule(contour_A, A), _Rule(contour_B, B)
    nA, nB = A.shape[0], B.shape[0]
    materializable = max(shape) * nA * nB <= config.max_kron_size
    probe = np.random.default_rng(12345).standard_normal((nA, nB)) + 0j

    def parts(N):
        zA, wA, RA = ruleA.get(N)
        zB, wB, RB = ruleB.get(N)
        return _coefficients(f, zA, wA, zB, wB), RA, RB

    def compute(N):
        C, RA, RB = parts(N)
        if materializable:
            return _materialize_bivariate(C, RA, RB, shape)
        return _apply_bivariate(C, RA, RB, probe)

    # memory for the coefficient grid grows like N^2
    _, info = _adapt(compute, q, budget=2048)
    N = info["N_used"]
    C, RA, RB = parts(N)
    zA, wA, _ = ruleA.get(N)
    zB, wB, _ = ruleB.get(N)
    info.update(contour_A=contour_A, contour_B=contour_B,
                scale=_scale(f.evaluate(zA[:, None], zB[None, :]), wA, RA, wB, RB))
    op = BivariateOperator(
        nA, nB,
        applier=lambda X: _apply_bivariate(C, RA, RB, X),
        materializer=lambda: _materialize_bivariate(C, RA, RB, shape),
        adjoint=lambda Y: _adjoint_bivariate(C, RA, RB, Y),
        shape=shape, info=info, config=config)
    if materializable:
        op._matrix = compute(N)
    return op


def apply_bivariate(op, X):
    """Apply ``f{A, B}`` to ``X`` in operator form,
    ``X -> sum c_ij (x_i I - A)^{-1} X (y_j I - B)^{-T}``."""
    return op.apply(X)


# --- multivariate ------------------------------------------------------------------

def _contract(V, rules):
    """Recursive quadrature over the first variable.

    ``V`` holds function values on the tensor grid (leading batch axis
    first); ``rules`` are ``(w, R)`` pairs, one per variable.  Returns the
    batch of Kronecker-form matrices ``F_{x1}{A_2..A_d} (x) (x1 I - A_1)^{-1}``
    summed with weights.
    """
    w, R = rules[0]
    if len(rules) == 1:
        return np.einsum("bi,iac->bac", V * w, R)
    batch, N = V.shape[0], V.shape[1]
    inner = _contract(V.reshape((batch * N,) + V.shape[2:]), rules[1:])
    P = inner.shape[-1]
    inner = inner.reshape(batch, N, P, P)
    n = R.shape[-1]
    out = np.einsum("bipq,irs->bprqs", inner * w[None, :, None, None], R)
    return out.reshape(batch, P * n, P * n)


def eval_multivariate(f, A_list, contours=None, q=None, config=DEFAULT, full_output=False):
    """``f{A_1, ..., A_d}`` in Kronecker form ``A_d (x) ... (x) A_1``."""
    A_list = [as_matrix(A) for A in A_list]
    d = len(A_list)
    if d != f.arity:
        raise ValueError("need one matrix per variable")
    if not 1 <= d <= 4:
        raise ValueError("eval_multivariate supports 1 <= d <= 4")
    size = int(np.prod([A.shape[0] for A in A_list]))
    if size > config.max_kron_size:
        raise SizeLimitError(f"Kronecker size {size} exceeds cap {config.max_kron_size}")
    q = q or QuadratureSpec.from_config(config)
    if contours is None:
        contours = [default_contour(A, config=config) for A in A_list]
    contours = list(contours)
    for i, (A, c) in enumerate(zip(A_list, contours)):
        _check_enclosed(A, c, f"A_{i + 1}")
    _probe(f, contours, config)
    rules = [_Rule(c, A) for c, A in zip(contours, A_list)]

    def compute(N):
        pts = [r.get(N) for r in rules]
        z1, w1, R1 = pts[0]
        if d == 1:
            return np.einsum("k,kab->ab", w1 * f.evaluate(z1), R1)
        inner_rules = [(p[1], p[2]) for p in pts[1:]]
        chunk = max(1, (1 << 20) // N ** (d - 1))
        out = 0
        for start in range(0, N, chunk):
            sl = slice(start, start + chunk)
            grid = np.meshgrid(z1[sl], *[p[0] for p in pts[1:]], indexing="ij", sparse=True)
            V = np.broadcast_to(f.evaluate(*grid), (len(z1[sl]),) + (N,) * (d - 1))
            inner = _contract(V, inner_rules)
            P, n = inner.shape[-1], R1.shape[-1]
            blk = np.einsum("ipq,irs->prqs", inner * w1[sl, None, None], R1[sl])
            out = out + blk.reshape(P * n, P * n)
        return out

    # N^d function values per evaluation
    budget = 1 << (24 // d)
    M, info = _adapt(compute, q, budget=budget)
    info["contours"] = contours
    return (M, info) if full_output else M


# --- oracles ----------------------------------------------------------------------

def _eigbasis(A, label, config):
    dec = eig(A, want_vectors=True, config=config)
    if not dec.diagonalizable:
        raise OracleUnavailableError(
            f"{label} is not numerically diagonalizable "
            f"(eigenvector condition estimate {dec.condition_estimate:.3e})")
    return dec.values, dec.vectors


def oracle_diag_univariate(f, A, config=DEFAULT):
    """``S f(Lambda) S^{-1}`` from an eigendecomposition."""
    A = as_matrix(A)
    lam, S = _eigbasis(A, "A", config)
    fl = f.evaluate(lam)
    return solve(S.T, (S * fl).T, config).T


def oracle_diag(f, A, B, config=DEFAULT):
    """Independent evaluation of ``f{A, B}`` through eigendecompositions
    ``A = S Lambda S^{-1}``, ``B = T M T^{-1}``."""
    A, B = as_matrix(A), as_matrix(B)
    lam, S = _eigbasis(A, "A", config)
    mu, T = _eigbasis(B, "B", config)
    Sinv = solve(S, np.eye(len(lam)), config)
    Tinv = solve(T, np.eye(len(mu)), config)
    F = f.evaluate(lam[:, None], mu[None, :])
    nA, nB = len(lam), len(mu)

    def applier(X):
        return S @ (F * (Sinv @ X @ Tinv.T)) @ T.T

    def adjoint(Y):
        return Sinv.conj().T @ (F.conj() * (S.conj().T @ Y @ T.conj())) @ Tinv.conj()

    def materializer():
        left = kron(T, S, config)
        right = kron(Tinv, Sinv, config)
        return (left * vec(F).ravel()) @ right

    info = {"cond_S": float(np.linalg.cond(S)), "cond_T": float(np.linalg.cond(T))}
    return BivariateOperator(nA, nB, applier, materializer, adjoint, info=info, config=config)


def polynomial_oracle(f, matrices, config=DEFAULT):
    """Evaluate a polynomial expression directly in the commuting Kronecker
    matrices ``I (x) .. (x) A_k (x) .. (x) I`` (``A_1`` rightmost)."""
    mats = [as_matrix(A) for A in matrices]
    if len(mats) != f.arity:
        raise ValueError("need one matrix per variable")
    sizes = [A.shape[0] for A in mats]
    total = int(np.prod(sizes))
    if total > config.max_kron_size:
        raise SizeLimitError(f"Kronecker size {total} exceeds cap {config.max_kron_size}")
    lifted = []
    for k, A in enumerate(mats):
        left = int(np.prod(sizes[k + 1:]))
        right = int(np.prod(sizes[:k]))
        lifted.append(np.kron(np.eye(left), np.kron(A, np.eye(right))))
    eye = np.eye(total, dtype=np.complex128)

    def walk(node):
        if isinstance(node, Const):
            return node.value * eye
        if isinstance(node, Var):
            return lifted[node.index - 1]
        if isinstance(node, Pow):
            return np.linalg.matrix_power(walk(node.base), node.k)
        if isinstance(node, Binary) and node.op in "+-*":
            a, b = walk(node.left), walk(node.right)
            return a + b if node.op == "+" else a - b if node.op == "-" else a @ b
        if isinstance(node, Unary) and node.op == "neg":
            return -walk(node.arg)
        raise ValueError("polynomial_oracle needs a polynomial expression")

    return walk(f.root)
