"""
Krylov approximation of a Sylvester solution
============================================

With f(x, y) = 1/(x + y), f{A, B} vec(c c^T) solves A X + X B^T = c c^T.
Arnoldi bases of K_k(A, c) and K_l(B, c) compress the problem; the error
decays as k and l grow and stays below the a priori estimate.
"""

import numpy as np

from bivarfun import apriori_error_bound, bivariate_krylov, parse

rng = np.random.default_rng(3)
n = 8
G, H = rng.standard_normal((n, n)), rng.standard_normal((n, n))
A = G @ G.T / n + np.eye(n)
B = H @ H.T / n + np.eye(n)
c = np.ones(n)
f = parse("1/(x+y)", 2)

X = np.linalg.solve(np.kron(np.eye(n), A) + np.kron(B, np.eye(n)), np.outer(c, c).ravel(order="F"))
for k in (1, 2, 4, 6, 8):
    res = bivariate_krylov(f, A, B, c, c, k, k)
    err = np.linalg.norm(res.x_kl.ravel() - X)
    bound = apriori_error_bound(f, A, B, k, k, c_norm=n)
    print(f"k = l = {k}:  error = {err:.3e}   a priori estimate = {bound:.3e}")
