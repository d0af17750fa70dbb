"""
A bivariate polynomial as an operator on matrices
==================================================

f(x, y) = 1 + xy + x^3 y^2 acts on X as X + A X B^T + A^3 X (B^T)^2,
whose Kronecker matrix is I + B (x) A + B^2 (x) A^3.  Quadrature, the
Kronecker polynomial and the eigen-decomposition oracle all agree.
"""

import numpy as np

from bivarfun import eval_bivariate, oracle_diag, parse, polynomial_oracle

rng = np.random.default_rng(1)
A = rng.standard_normal((3, 3))
B = rng.standard_normal((4, 4))
f = parse("1 + x*y + x^3*y^2", 2)

op = eval_bivariate(f, A, B)
K = polynomial_oracle(f, [A, B])
D = oracle_diag(f, A, B).materialize()
print("quadrature vs Kronecker polynomial:", np.linalg.norm(op.materialize() - K) / np.linalg.norm(K))
print("quadrature vs eigen oracle:        ", np.linalg.norm(op.materialize() - D) / np.linalg.norm(D))

# operator form, without any Kronecker product
X = rng.standard_normal((3, 4))
direct = X + A @ X @ B.T + np.linalg.matrix_power(A, 3) @ X @ B.T @ B.T
print("operator form error:", np.linalg.norm(op.apply(X) - direct))
print("nodes used:", op.info["N_used"], " estimated error:", op.info["est_error"])
