"""
The 2x2 Jordan pair and the factor 4
====================================

For A = B = [[0, 1], [0, 0]] the numerical range of each matrix is the
disc of radius 1/2, so |xy| never exceeds 1/4 on W(A) x W(B).  Yet the
bivariate function f(x, y) = xy evaluated at (A, B) is B (x) A, whose
spectral norm is 1.  The ratio 4 is a lower bound for any constant in a
bivariate Crouzeix-Palencia inequality.
"""

import numpy as np

from bivarfun import certify_bivariate, eval_bivariate, numrange, parse

J = np.array([[0, 1], [0, 0]], dtype=complex)

# the numerical range: support function and boundary radius
nr = numrange(J, 360)
print("support function range:", nr.support.min(), nr.support.max())
print("max boundary modulus:  ", np.abs(nr.boundary).max())

# f{A, B} by double contour quadrature, then its norm
op = eval_bivariate(parse("x*y", 2), J, J)
print("||f{A,B}||_2 =", op.norm())
print(np.round(op.materialize().real, 12) + 0.0)

# the certificate compares against (1 + sqrt 2)^2 times the sampled sup
rep = certify_bivariate(parse("x*y", 2), J, J)
print(f"sup |xy| on W(A) x W(B) = {rep.rhs_sup_sample:.9f}")
print(f"raw ratio = {rep.raw_ratio:.9f}, normalized ratio = {rep.ratio:.6f}, pass = {rep.passed}")
