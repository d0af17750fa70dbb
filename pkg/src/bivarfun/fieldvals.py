"""Numerical range (field of values) sampling and enclosing contours.

The support function of W(A) in direction theta is the largest eigenvalue
of the Hermitian part of ``exp(i theta) A``; the corresponding unit
eigenvector v gives the boundary point ``v* A v``.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .config import DEFAULT
from .linalg import as_matrix

__all__ = [
    "Circle", "Contour", "Ellipse", "NumericalRangeApprox", "boundary_point",
    "contains", "contour_from_json", "contour_to_json", "default_margin",
    "enclosing_contour", "min_clearance", "numrange", "numrange_csv",
    "refine_argmax",
]


@dataclass(frozen=True)
class NumericalRangeApprox:
    angles: np.ndarray
    support: np.ndarray
    boundary: np.ndarray
    matrix: np.ndarray = None

    @property
    def diameter(self):
        b = self.boundary
        return float(np.abs(b[:, None] - b[None, :]).max())

    def dense_boundary(self):
        """Boundary samples with flat edges filled in.

        Consecutive samples can be far apart where the boundary has a
        straight piece (e.g. normal matrices, whose samples are eigenvalues
        only); points on the chord are inserted at the mean sample spacing.
        They lie in W(A) by convexity.
        """
        q = self.boundary[: len(self.angles)]
        nxt = np.roll(q, -1)
        gaps = np.abs(nxt - q)
        h = max(gaps.sum() / len(q), 1e-300)
        pieces = [q]
        for a, b, g in zip(q, nxt, gaps):
            m = int(np.ceil(g / h)) - 1
            if m > 0:
                s = np.arange(1, m + 1) / (m + 1)
                pieces.append(a + s * (b - a))
        pieces.append(self.boundary[len(self.angles):])
        return np.concatenate(pieces)

    def with_points(self, extra):
        """Return a copy whose boundary sample set also contains ``extra``."""
        return NumericalRangeApprox(self.angles, self.support,
                                    np.concatenate([self.boundary, extra]),
                                    self.matrix)


def _hermitian_parts(A, angles):
    rot = np.exp(1j * np.asarray(angles))[:, None, None]
    M = rot * A
    return 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))


def _sweep(A, angles):
    H = _hermitian_parts(A, angles)
    w, V = np.linalg.eigh(H)
    v = V[:, :, -1]
    q = np.einsum("ki,ij,kj->k", np.conj(v), A, v)
    return w[:, -1], q


def numrange(A, n_angles=None, config=DEFAULT):
    """Sample the support function and boundary of W(A) at uniform angles."""
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError("numerical range needs a square matrix")
    if n_angles is None:
        n_angles = config.n_angles
    if n_angles < 8:
        raise ValueError("n_angles must be at least 8")
    angles = 2 * np.pi * np.arange(n_angles) / n_angles
    h, q = _sweep(A, angles)
    if np.allclose(A, A.conj().T, rtol=0, atol=1e-14 * max(1.0, np.abs(A).max())):
        q = q.real.astype(np.complex128)
    return NumericalRangeApprox(angles, h, q, A)


def boundary_point(A, theta):
    """Boundary point of W(A) with outward normal direction ``exp(-i theta)``."""
    _, q = _sweep(as_matrix(A), np.atleast_1d(theta))
    return q[0]


def contains(nr, z, slack=0.0):
    """Membership of ``z`` in the sampled half-plane intersection."""
    vals = np.real(np.exp(1j * nr.angles) * z)
    return bool(np.all(vals <= nr.support + slack))


def refine_argmax(A, nr, objective, iterations=40):
    """Golden-section refinement of ``objective`` (a function of a boundary
    point) in the angle bracket around the best sampled angle.

    Returns ``(best_value, best_point)``; the result never falls below the
    sampled maximum.
    """
    vals = objective(nr.boundary[: len(nr.angles)])
    k = int(np.argmax(vals))
    best, best_pt = float(vals[k]), nr.boundary[k]
    if A is None:
        return best, best_pt
    step = 2 * np.pi / len(nr.angles)
    theta0 = nr.angles[k]

    def neg(t):
        return -float(objective(np.array([boundary_point(A, t)]))[0])

    res = minimize_scalar(neg, bracket=None, bounds=(theta0 - step, theta0 + step),
                          method="bounded", options={"xatol": 1e-12, "maxiter": iterations})
    if -res.fun > best:
        best, best_pt = -res.fun, boundary_point(A, res.x)
    return best, best_pt


# --- contours -----------------------------------------------------------------

@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float
    kind = "circle"

    def point(self, t):
        return self.center + self.radius * np.exp(1j * t)

    def derivative(self, t):
        return 1j * self.radius * np.exp(1j * t)

    def shrunk(self, factor):
        return Circle(self.center, self.radius * factor)

    def inside(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius


@dataclass(frozen=True)
class Ellipse:
    center: complex
    semi_major: float
    semi_minor: float
    rotation: float
    kind = "ellipse"

    def point(self, t):
        rot = np.exp(1j * self.rotation)
        return self.center + rot * (self.semi_major * np.cos(t)
                                    + 1j * self.semi_minor * np.sin(t))

    def derivative(self, t):
        rot = np.exp(1j * self.rotation)
        return rot * (-self.semi_major * np.sin(t)
                      + 1j * self.semi_minor * np.cos(t))

    def shrunk(self, factor):
        return Ellipse(self.center, self.semi_major * factor,
                       self.semi_minor * factor, self.rotation)

    def inside(self, z):
        w = (np.asarray(z) - self.center) * np.exp(-1j * self.rotation)
        return (w.real / self.semi_major) ** 2 + (w.imag / self.semi_minor) ** 2 < 1


Contour = Circle | Ellipse


def nodes(contour, N):
    """Trapezoidal nodes and weights ``gamma'(t) * 2 pi / N``."""
    t = 2 * np.pi * np.arange(N) / N
    return contour.point(t), contour.derivative(t) * (2 * np.pi / N)


def min_clearance(contour, points, n_samples=2048):
    """Smallest distance from ``points`` to the contour curve (negative if a
    point lies outside)."""
    points = np.asarray(points, dtype=np.complex128).ravel()
    if isinstance(contour, Circle):
        d = contour.radius - np.abs(points - contour.center)
        return float(d.min())
    t = 2 * np.pi * np.arange(n_samples) / n_samples
    curve = contour.point(t)
    dist = np.abs(points[:, None] - curve[None, :])
    k = np.argmin(dist, axis=1)
    h = 2 * np.pi / n_samples
    lo, hi = t[k] - h, t[k] + h
    # vectorized golden-section search; distance is unimodal on the bracket
    g = (np.sqrt(5) - 1) / 2
    for _ in range(60):
        m1 = hi - g * (hi - lo)
        m2 = lo + g * (hi - lo)
        left = np.abs(points - contour.point(m1)) < np.abs(points - contour.point(m2))
        hi = np.where(left, m2, hi)
        lo = np.where(left, lo, m1)
    out = np.minimum(np.abs(points - contour.point(0.5 * (lo + hi))),
                     dist[np.arange(len(points)), k])
    sign = np.where(contour.inside(points), 1.0, -1.0)
    return float((sign * out).min())


def default_margin(nr):
    return 0.1 * (1.0 + nr.diameter)


def enclosing_contour(nr, margin=None):
    """Circle or ellipse around the sampled W(A) with clearance >= margin.

    Two-pass fit: center at the mean boundary point, axes from the principal
    directions of the point cloud, semi-axes from the largest projections;
    the ellipse is then scaled to contain every point and inflated until the
    clearance requirement holds.
    """
    if margin is None:
        margin = default_margin(nr)
    if margin <= 0:
        raise ValueError("margin must be positive")
    pts = nr.boundary
    c = complex(pts.mean())
    d = pts - c
    spread = np.abs(d).max()
    if spread <= 1e-12 * max(1.0, abs(c)):
        return Circle(c, float(margin))
    cov = np.cov(np.vstack([d.real, d.imag]))
    evals, evecs = np.linalg.eigh(cov)
    major = evecs[:, 1]
    rotation = float(np.arctan2(major[1], major[0]))
    w = d * np.exp(-1j * rotation)
    a0 = float(np.abs(w.real).max())
    b0 = float(np.abs(w.imag).max())
    if abs(a0 - b0) <= 1e-3 * max(a0, b0):
        return Circle(c, float(np.abs(d).max() + margin))
    if b0 <= 1e-9 * a0:
        # collinear points; semi_minor is floored at the margin below
        s = 1.0
    else:
        s = float(np.sqrt((w.real / a0) ** 2 + (w.imag / b0) ** 2).max())
    a, b = s * a0 + margin, s * b0 + margin
    # the additive offset can fall short near highly curved vertices
    for _ in range(60):
        ell = Ellipse(c, a, b, rotation)
        clr = min_clearance(ell, pts)
        if clr >= margin * (1 - 1e-9):
            return ell
        grow = (margin - clr) + 1e-3 * margin
        a += grow
        b += grow
    return ell


def contour_to_json(contour):
    if isinstance(contour, Circle):
        return {"kind": "circle", "center": [contour.center.real, contour.center.imag],
                "radius": contour.radius, "orientation": "counterclockwise"}
    return {"kind": "ellipse", "center": [contour.center.real, contour.center.imag],
            "semi_major": contour.semi_major, "semi_minor": contour.semi_minor,
            "rotation": contour.rotation, "orientation": "counterclockwise"}


def contour_from_json(obj):
    c = complex(*obj["center"])
    if obj["kind"] == "circle":
        return Circle(c, float(obj["radius"]))
    return Ellipse(c, float(obj["semi_major"]), float(obj["semi_minor"]),
                   float(obj["rotation"]))


def numrange_csv(nr):
    """CSV text with columns theta, h, re_q, im_q."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["theta", "h", "re_q", "im_q"])
    for t, h, q in zip(nr.angles, nr.support, nr.boundary):
        writer.writerow([repr(float(t)), repr(float(h)), repr(float(q.real)),
                         repr(float(q.imag))])
    return buf.getvalue()
