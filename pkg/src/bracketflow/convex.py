"""Polytope gauges, separation, cone extremal points, Mackey diagnostics.

Bodies are bounded convex polytopes with 0 interior, held in the
normalized half-space form {x : <h_i, x> <= 1}.  The gauge of such a
body is exactly max(0, max_i <h_i, x>), which makes every functional
here finitely checkable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

DEGENERACY_TOL = 1e-12


class SetsIntersect(Exception):
    """Separation was requested for sets at distance <= the degeneracy tol."""


class InvalidSeed(Exception):
    """Cone construction seeded with a1 not in B or x0 in B."""


# ---------------------------------------------------------------------------
# bodies

def _bounded_by_lp(normals: np.ndarray) -> bool:
    """{x : Nx <= 1} is bounded iff every coordinate LP has a finite optimum."""
    m, n = normals.shape
    ones = np.ones(m)
    for j in range(n):
        for sign in (1.0, -1.0):
            c = np.zeros(n)
            c[j] = -sign  # maximize sign * x_j
            res = linprog(c, A_ub=normals, b_ub=ones, bounds=[(None, None)] * n,
                          method="highs")
            if res.status == 3:  # unbounded
                return False
            if res.status != 0:
                raise RuntimeError(f"boundedness LP failed with status {res.status}")
    return True


@dataclass(eq=False)
class ConvexBody:
    """Bounded convex polytope {x : <h_i, x> <= 1} containing 0 inside."""

    normals: np.ndarray
    _vertices: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        arr = np.atleast_2d(np.array(self.normals, dtype=float))
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("normals must form a nonempty 2-d array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("normals must be finite")
        arr.setflags(write=False)
        self.normals = arr
        if not _bounded_by_lp(arr):
            raise ValueError("half-spaces do not bound the body "
                             "(normals fail to positively span)")
        if self._vertices is not None:
            v = np.atleast_2d(np.array(self._vertices, dtype=float))
            v.setflags(write=False)
            self._vertices = v

    @property
    def dim(self) -> int:
        return int(self.normals.shape[1])

    # -- constructors

    @staticmethod
    def from_normals(normals) -> "ConvexBody":
        return ConvexBody(np.array(normals, dtype=float))

    @staticmethod
    def from_vertices(points) -> "ConvexBody":
        """Hull of the points; 0 must be interior so offsets normalize to 1."""
        pts = np.atleast_2d(np.array(points, dtype=float))
        n = pts.shape[1]
        if n == 1:
            lo, hi = float(pts.min()), float(pts.max())
            if not (lo < 0 < hi):
                raise ValueError("origin must be interior")
            return ConvexBody(np.array([[1.0 / hi], [1.0 / lo]]),
                              np.array([[lo], [hi]]))
        hull = ConvexHull(pts)
        a = hull.equations[:, :-1]
        b = -hull.equations[:, -1]  # a x <= b
        if np.any(b <= 0):
            raise ValueError("origin must be interior")
        return ConvexBody(a / b[:, None], pts[hull.vertices])

    @staticmethod
    def unit_box(n: int) -> "ConvexBody":
        return ConvexBody(np.vstack([np.eye(n), -np.eye(n)]))

    @staticmethod
    def cross_polytope(n: int) -> "ConvexBody":
        signs = np.array(np.meshgrid(*([[-1.0, 1.0]] * n))).T.reshape(-1, n)
        return ConvexBody(signs)

    # -- geometry

    def vertices(self) -> np.ndarray:
        """Vertex list (computed once, deterministic lexicographic order)."""
        if self._vertices is None:
            n = self.dim
            if n == 1:
                hplus = self.normals[self.normals[:, 0] > 0, 0]
                hminus = self.normals[self.normals[:, 0] < 0, 0]
                verts = np.array([[1.0 / hminus.min()], [1.0 / hplus.max()]])
            else:
                hs = np.hstack([self.normals, -np.ones((self.normals.shape[0], 1))])
                inter = HalfspaceIntersection(hs, np.zeros(n))
                verts = np.unique(np.round(inter.intersections, 9), axis=0)
            order = np.lexsort(verts.T[::-1])
            verts = verts[order]
            verts.setflags(write=False)
            self._vertices = verts
        return self._vertices

    def contains(self, x, tol: float = 1e-9) -> bool:
        return bool(np.max(self.normals @ np.asarray(x, dtype=float)) <= 1.0 + tol)

    def is_symmetric(self, tol: float = 1e-9) -> bool:
        verts = self.vertices()
        for v in verts:
            if np.min(np.linalg.norm(verts + v, axis=1)) > tol * max(1.0, np.linalg.norm(v)):
                return False
        return True

    def scale(self, factor: float) -> "ConvexBody":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return ConvexBody(self.normals / factor,
                          None if self._vertices is None else self._vertices * factor)

    # -- serialization

    def to_json_dict(self) -> dict:
        out = {"dim": self.dim, "halfspaces": self.normals.tolist()}
        if self._vertices is not None:
            out["vertices"] = self._vertices.tolist()
        return out

    @staticmethod
    def from_json_dict(data: dict) -> "ConvexBody":
        body = ConvexBody(np.array(data["halfspaces"], dtype=float),
                          np.array(data["vertices"], dtype=float) if "vertices" in data else None)
        if body.dim != int(data["dim"]):
            raise ValueError("dim field does not match half-space width")
        return body


def minkowski(body: ConvexBody, x) -> float:
    """Gauge inf{t > 0 : x in t*body} = max(0, max_i <h_i, x>)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (body.dim,):
        raise ValueError("dimension mismatch")
    return float(max(0.0, float(np.max(body.normals @ x))))


def symmetrize(body: ConvexBody) -> ConvexBody:
    """Intersection body of D and -D: gauge becomes symmetric under sign."""
    return ConvexBody(np.vstack([body.normals, -body.normals]))


# ---------------------------------------------------------------------------
# minimum-norm point and separation

def _min_norm_point(points: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Wolfe's algorithm: the min-norm point of the convex hull of rows."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    k = P.shape[0]
    start = int(np.argmin(np.einsum("ij,ij->i", P, P)))
    S = [start]
    w = np.array([1.0])
    x = P[start].copy()
    for _ in range(16 * k + 64):
        dots = P @ x
        xx = float(x @ x)
        j = int(np.argmin(dots))
        if dots[j] >= xx - tol * max(1.0, xx) or j in S:
            break
        S.append(j)
        w = np.append(w, 0.0)
        while True:
            Q = P[S]
            r = len(S)
            M = np.zeros((r + 1, r + 1))
            M[:r, :r] = Q @ Q.T
            M[:r, r] = 1.0
            M[r, :r] = 1.0
            rhs = np.zeros(r + 1)
            rhs[r] = 1.0
            lam = np.linalg.lstsq(M, rhs, rcond=None)[0][:r]
            if np.all(lam > 1e-12):
                w = lam
                break
            # step from w toward lam until a coordinate hits zero, drop it
            mask = lam <= 1e-12
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(w - lam > 1e-18, w / (w - lam), np.inf)
            theta = min(1.0, float(np.min(ratios[mask])) if np.any(mask) else 1.0)
            w = (1.0 - theta) * w + theta * lam
            keep = w > 1e-12
            if np.all(keep):
                keep[int(np.argmin(w))] = False
            S = [s for s, kp in zip(S, keep) if kp]
            w = w[keep]
            w = w / w.sum()
        x = w @ P[S]
    return x


@dataclass
class SeparationCertificate:
    """Functional ell with max ell(A) = alpha < beta = min ell(B)."""

    functional: np.ndarray
    alpha: float
    beta: float
    witness_a: np.ndarray
    witness_b: np.ndarray

    @property
    def gap(self) -> float:
        return self.beta - self.alpha

    def to_json_dict(self) -> dict:
        return {
            "functional": self.functional.tolist(),
            "alpha": self.alpha,
            "beta": self.beta,
            "witness_a": self.witness_a.tolist(),
            "witness_b": self.witness_b.tolist(),
        }


def separate(a_points, b: Union[ConvexBody, np.ndarray, Sequence]) -> SeparationCertificate:
    """Separate conv(a_points) from a polytope (body or point hull).

    The minimum-distance pair is found via the min-norm point of the
    Minkowski difference; the functional lies along that difference and
    is oriented so the a-side sits below: ell(a) <= alpha < beta <= ell(b).
    """
    A = np.atleast_2d(np.asarray(a_points, dtype=float))
    B = b.vertices() if isinstance(b, ConvexBody) else np.atleast_2d(np.asarray(b, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError("dimension mismatch")
    diff = (A[:, None, :] - B[None, :, :]).reshape(-1, A.shape[1])
    v = _min_norm_point(diff)
    dist = float(np.linalg.norm(v))
    if dist <= DEGENERACY_TOL:
        raise SetsIntersect(f"hulls are within {dist:.3e} of touching")
    ell = -v
    scores_a = A @ ell
    scores_b = B @ ell
    return SeparationCertificate(
        functional=ell,
        alpha=float(np.max(scores_a)),
        beta=float(np.min(scores_b)),
        witness_a=A[int(np.argmax(scores_a))],
        witness_b=B[int(np.argmin(scores_b))],
    )


# ---------------------------------------------------------------------------
# cone construction

def _feasible_s(coef0: np.ndarray, coef1: np.ndarray, rho: float,
                s_min: float, tol: float) -> bool:
    """Is there s >= s_min with coef0 + s*coef1 <= rho componentwise?"""
    lo, hi = s_min, math.inf
    for c, g in zip(coef0, coef1):
        bound = rho + tol - c
        if abs(g) <= 1e-300:
            if bound < 0:
                return False
        elif g > 0:
            hi = min(hi, bound / g)
        else:
            lo = max(lo, bound / g)
    return lo <= hi


@dataclass
class ConeResult:
    """Extremal vertex with the cone and neighborhood that isolate it.

    Membership tests use the closed neighborhood (closed base, t in
    [0, 1]); that is a superset of the open one, so exclusion checked
    here is the stronger statement and the vertex itself is always a
    member.
    """

    vertex: np.ndarray            # a*
    axis: np.ndarray              # e with ell(e) = 1
    functional: np.ndarray        # ell from the separation step
    a1: np.ndarray
    x0: np.ndarray
    alpha: float                  # gauge radius of the safe ball around x0
    level_d: float                # first-round sup of ell-gains
    epsilon: float                # shift in the neighborhood base
    body: ConvexBody              # the symmetric gauge body D
    iterates: list[tuple[np.ndarray, float]]  # (a_k, rho_k)

    # -- membership tests (all via one-variable interval intersection:
    # b = a + (x - a1)/s with x in a gauge ball is linear in s)

    def in_cone(self, point, vertex=None, tol: float = DEGENERACY_TOL) -> bool:
        """point in {vertex + t (x - a1) : x in ball(x0, alpha/4), t >= 0}."""
        a = self.vertex if vertex is None else np.asarray(vertex, dtype=float)
        p = np.asarray(point, dtype=float)
        if np.linalg.norm(p - a) <= tol:
            return True
        N = self.body.normals
        return _feasible_s(N @ (self.a1 - self.x0), N @ (p - a),
                           self.alpha / 4.0, 1e-12, tol)

    def in_segment_cone(self, point, vertex=None, tol: float = DEGENERACY_TOL) -> bool:
        """Same cone but with the parameter capped at t <= 1 (s >= 1)."""
        a = self.vertex if vertex is None else np.asarray(vertex, dtype=float)
        p = np.asarray(point, dtype=float)
        if np.linalg.norm(p - a) <= tol:
            return True
        N = self.body.normals
        return _feasible_s(N @ (self.a1 - self.x0), N @ (p - a),
                           self.alpha / 4.0, 1.0, tol)

    def in_neighborhood(self, point, tol: float = DEGENERACY_TOL) -> bool:
        """Closed neighborhood: segment cone from a1 over the shifted base."""
        p = np.asarray(point, dtype=float)
        if np.linalg.norm(p - self.a1) <= tol:
            return True
        N = self.body.normals
        center = self.x0 + self.epsilon * self.axis
        return _feasible_s(N @ (self.a1 - center), N @ (p - self.a1),
                           self.alpha / 3.0, 1.0, tol)

    def isolates(self, b_points, tol: float = DEGENERACY_TOL) -> bool:
        """Brute force: neighborhood ∩ cone(a*) ∩ B == {a*}."""
        B = np.atleast_2d(np.asarray(b_points, dtype=float))
        hit = False
        for p in B:
            inside = self.in_neighborhood(p, tol) and self.in_cone(p, tol=tol)
            if np.linalg.norm(p - self.vertex) <= tol:
                hit = hit or inside
            elif inside:
                return False
        return hit

    def to_json_dict(self) -> dict:
        return {
            "vertex": self.vertex.tolist(),
            "axis": self.axis.tolist(),
            "functional": self.functional.tolist(),
            "a1": self.a1.tolist(),
            "x0": self.x0.tolist(),
            "alpha": self.alpha,
            "level_d": self.level_d,
            "epsilon": self.epsilon,
            "body": self.body.to_json_dict(),
            "base": {  # gauge ball the cone opens over
                "center": self.x0.tolist(),
                "gauge_radius": self.alpha / 4.0,
            },
            "neighborhood": {  # shifted, slightly larger ball; cone segment over it
                "center": (self.x0 + self.epsilon * self.axis).tolist(),
                "gauge_radius": self.alpha / 3.0,
            },
            "iterates": [{"point": a.tolist(), "rho": r} for a, r in self.iterates],
        }


def _gauge_many(body: ConvexBody, deltas: np.ndarray) -> np.ndarray:
    vals = deltas @ body.normals.T
    return np.maximum(0.0, vals.max(axis=1))


def cone_extremal_point(b_points, a1, x0, body: ConvexBody,
                        tol: float = DEGENERACY_TOL) -> ConeResult:
    """Find a* in B isolated by a translated cone and a neighborhood.

    The finite-cloud iteration: separate a1 from the gauge ball around
    x0, project the cone-segment members of B on the functional, move
    the vertex to the member of maximal gain (ties: lexicographically
    smallest), and repeat until the gain vanishes.  Each move at least
    halves the gauge diameter of the truncated cone.
    """
    B = np.atleast_2d(np.asarray(b_points, dtype=float))
    a1 = np.asarray(a1, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if not body.is_symmetric():
        raise ValueError("gauge body must be symmetric (run symmetrize first)")
    if B.shape[1] != body.dim or a1.shape != (body.dim,) or x0.shape != (body.dim,):
        raise ValueError("dimension mismatch")
    if np.min(np.linalg.norm(B - a1, axis=1)) > tol:
        raise InvalidSeed("a1 must be a member of B")
    gauges = _gauge_many(body, B - x0)
    if np.min(gauges) <= tol:
        raise InvalidSeed("x0 must lie outside B")

    alpha = 0.5 * float(np.min(gauges))
    base_vertices = x0 + (alpha / 4.0) * body.vertices()
    cert = separate(a1[None, :], base_vertices)
    ell = cert.functional
    ell_x0 = float(ell @ (x0 - a1))
    axis = (x0 - a1) / ell_x0

    # epsilon: largest halving of alpha/12 passing both inclusion checks
    # (shifted base inside the alpha/2 ball, and small enough along the
    # axis gauge that the alpha/4 ball stays inside the shifted base).
    third_vertices = x0 + (alpha / 3.0) * body.vertices()
    gauge_e = minkowski(body, axis)
    epsilon = alpha / 12.0
    for _ in range(200):
        shifted = third_vertices + epsilon * axis
        if np.max(_gauge_many(body, shifted - x0)) <= alpha / 2.0 + tol \
                and epsilon * gauge_e <= alpha / 12.0 + tol:
            break
        epsilon /= 2.0
    else:
        raise RuntimeError("no admissible epsilon found")

    result = ConeResult(
        vertex=a1.copy(), axis=axis, functional=ell, a1=a1.copy(), x0=x0.copy(),
        alpha=alpha, level_d=0.0, epsilon=epsilon, body=body, iterates=[],
    )

    def truncated_diameter(vertex: np.ndarray, d: float) -> float:
        if d <= tol:
            return 0.0
        dirs = base_vertices - a1
        heights = dirs @ ell
        tops = vertex + (d / heights)[:, None] * dirs
        pts = np.vstack([vertex[None, :], tops])
        diffs = (pts[:, None, :] - pts[None, :, :]).reshape(-1, body.dim)
        return float(np.max(_gauge_many(body, diffs)))

    current = a1.copy()
    for _ in range(B.shape[0] + 1):
        members = [p for p in B if result.in_segment_cone(p, vertex=current, tol=tol)]
        gains = np.array([float(ell @ (p - current)) for p in members])
        d = float(np.max(gains)) if len(gains) else 0.0
        d = max(d, 0.0)
        result.iterates.append((current.copy(), truncated_diameter(current, d)))
        if len(result.iterates) == 1:
            result.level_d = d
        if d <= tol:
            break
        best = sorted((tuple(p) for p, g in zip(members, gains) if g >= d - tol))
        current = np.array(best[0], dtype=float)
    result.vertex = current
    return result


# ---------------------------------------------------------------------------
# Mackey-Cauchy diagnostic

@dataclass
class MackeyReport:
    is_cauchy_prefix: bool
    mu: np.ndarray                 # pairwise gauges of differences
    tail_max: np.ndarray           # T[k] = max_{i,j >= k} mu_ij
    rate: Optional[float]          # geometric fit of the positive part of T

    def to_json_dict(self) -> dict:
        return {
            "is_cauchy_prefix": self.is_cauchy_prefix,
            "mu": self.mu.tolist(),
            "tail_max": self.tail_max.tolist(),
            "rate": self.rate,
        }


def mackey_cauchy_diagnostic(prefix, m_body: ConvexBody) -> MackeyReport:
    """Pairwise-gauge decay test on a finite sequence prefix.

    mu_ij is the smallest scalar with x_i - x_j in mu * M (the gauge of
    the difference).  The prefix passes when the tail maxima strictly
    decrease until they reach zero.
    """
    pts = np.atleast_2d(np.asarray(prefix, dtype=float))
    if not m_body.is_symmetric():
        raise ValueError("M must be symmetric (absolutely convex)")
    if pts.shape[1] != m_body.dim:
        raise ValueError("dimension mismatch")
    k = pts.shape[0]
    mu = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            mu[i, j] = mu[j, i] = minkowski(m_body, pts[i] - pts[j])
    tail = np.array([mu[kk:, kk:].max() if kk < k else 0.0 for kk in range(k)])
    ok = True
    for kk in range(k - 1):
        if tail[kk] == 0.0:
            break
        if not tail[kk + 1] < tail[kk]:
            ok = False
            break
    positive = tail[tail > 0]
    rate = None
    if positive.size >= 2:
        slope = np.polyfit(np.arange(positive.size), np.log(positive), 1)[0]
        rate = float(np.exp(slope))
    return MackeyReport(is_cauchy_prefix=ok, mu=mu, tail_max=tail, rate=rate)
