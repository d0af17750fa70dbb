"""
Condition of the matrix exponential
===================================

The Frechet derivative of f at A is the bivariate function f[x, y]
(first divided difference) evaluated at (A, A^T).  Its norm is the
absolute condition number and is bounded by (1 + sqrt 2)^2 times the
largest |f'| on W(A).
"""

import numpy as np

from bivarfun import (frechet_block_oracle, frechet_finite_difference_check,
                      frechet_norm_and_bound, frechet_operator, parse)

rng = np.random.default_rng(2)
A = rng.standard_normal((5, 5)) / 2 + 1j * rng.standard_normal((5, 5)) / 2
E = rng.standard_normal((5, 5))
f = parse("exp(x)")

L = frechet_operator(f, A).apply(E)
ref = frechet_block_oracle(f, A, E)
print("quadrature vs block-triangular oracle:", np.linalg.norm(L - ref) / np.linalg.norm(ref))

res = frechet_norm_and_bound(f, A)
print(f"||Df{{A}}|| = {res.norm:.6f}  bound = {res.bound:.6f}  ratio = {res.ratio:.4f}")

# first-order behavior: the error halves with h
for h in (1e-3, 5e-4, 2.5e-4):
    print(f"h = {h:.1e}  finite-difference error = {frechet_finite_difference_check(f, A, E, h):.3e}")
