"""Polytope decision sets, maximum-volume inscribed ellipsoids and the
orthogonal exploration basis derived from them.

A polytope is carried in both representations: the vertex list drives the
learners' argmax, the halfspace list drives the ellipsoid solver. Neither is
derived from the other here.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .errors import (
    CertificateViolation,
    DegenerateAxis,
    DimensionMismatch,
    EmptyInterior,
    NormExceedsOne,
    SolverNonConvergence,
    UnsupportedFamily,
    VertexOutsideHalfspace,
)

TOL = 1e-9
FAMILIES = ("box", "cross_polytope", "regular_simplex")
MODES = ("exact_ellipsoid", "weak_ellipsoid")


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Polytope:
    """Validated d-polytope ``{x : A x <= b}`` with its vertex list.

    Build through :func:`validate_polytope`; the constructor does no checks.
    """

    vertices: np.ndarray
    A: np.ndarray
    b: np.ndarray
    redundant: tuple = ()

    @property
    def d(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def contains(self, x, tol: float = TOL) -> bool:
        return bool(np.all(self.A @ np.asarray(x, dtype=float) <= self.b + tol))

    def slack(self, x) -> np.ndarray:
        return self.b - self.A @ np.asarray(x, dtype=float)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "vertices": self.vertices.tolist(),
            "halfspaces": [{"a": a.tolist(), "b": float(b)} for a, b in zip(self.A, self.b)],
        }


@dataclass(frozen=True)
class Ellipsoid:
    """``{center + sum_j u_j axes[j] : ||u||_2 <= 1}`` with orthogonal rows in ``axes``."""

    center: np.ndarray
    axes: np.ndarray
    kappa: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(self.center))
        object.__setattr__(self, "axes", _frozen(np.atleast_2d(self.axes)))
        lengths = np.linalg.norm(self.axes, axis=1)
        if np.any(lengths <= 0):
            raise DegenerateAxis("semi-axis lengths must be strictly positive")
        gram = self.axes @ self.axes.T
        off = gram - np.diag(np.diag(gram))
        if np.any(np.abs(off) > TOL * np.outer(lengths, lengths) + 1e-15):
            raise ValueError("semi-axes are not mutually orthogonal")

    @property
    def d(self) -> int:
        return self.center.shape[0]

    @property
    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.axes, axis=1)

    @property
    def shape_matrix(self) -> np.ndarray:
        """Symmetric B with E = {c + B u : ||u|| <= 1}."""
        return _shape_from_axes(self.axes)

    def log_volume(self) -> float:
        d = self.d
        log_ball = 0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1)
        return float(np.sum(np.log(self.lengths)) + log_ball)

    def volume(self) -> float:
        return math.exp(self.log_volume())

    def support(self, direction) -> float:
        """max over the ellipsoid of <direction, x>."""
        a = np.asarray(direction, dtype=float)
        return float(a @ self.center + np.linalg.norm(self.axes @ a))

    def gauge(self, x) -> float:
        """Smallest scale s with x in center + s (E - center)."""
        y = np.asarray(x, dtype=float) - self.center
        coeffs = (self.axes @ y) / self.lengths**2
        return float(np.linalg.norm(coeffs))

    def to_dict(self) -> dict:
        return {
            "center": self.center.tolist(),
            "axes": self.axes.tolist(),
            "kappa": None if self.kappa is None else float(self.kappa),
        }


def _shape_from_axes(axes: np.ndarray) -> np.ndarray:
    lengths = np.linalg.norm(axes, axis=1)
    dirs = axes / lengths[:, None]
    return dirs.T @ np.diag(lengths) @ dirs


@dataclass(frozen=True)
class ExplorationBasis:
    """Center ``origin_shift`` and orthogonal axes s_1..s_d of an inscribed ellipsoid.

    ``kappa`` certifies E - s0 ⊆ D - s0 ⊆ kappa (E - s0).
    """

    origin_shift: np.ndarray
    axes: np.ndarray
    kappa: float
    mode: str = "weak_ellipsoid"
    shifted_vertices: np.ndarray = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.axes.shape[0]

    @property
    def sq_norms(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.axes, self.axes)

    @property
    def coefficient_bound(self) -> float:
        # 2d scaled by kappa/d
        return 2.0 * self.kappa

    @cached_property
    def endpoints(self) -> np.ndarray:
        """``endpoints[0, j] = s0 + s_j`` and ``endpoints[1, j] = s0 - s_j``."""
        return _frozen(np.stack([self.origin_shift + self.axes, self.origin_shift - self.axes]))

    def point(self, j: int, sign: int = 1) -> np.ndarray:
        """Axis endpoint s0 + sign * s_j in original coordinates."""
        return self.endpoints[0 if sign > 0 else 1, j]

    def shift(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) - self.origin_shift

    def reward_offset(self, theta) -> float:
        """Constant <s0, theta> added to every shifted action's expected reward."""
        return float(self.origin_shift @ np.asarray(theta, dtype=float))

    def to_dict(self) -> dict:
        return {
            "origin_shift": self.origin_shift.tolist(),
            "axes": self.axes.tolist(),
            "kappa": float(self.kappa),
            "mode": self.mode,
        }


@dataclass(frozen=True)
class Decomposition:
    coefficients: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coefficients)))


# ---------------------------------------------------------------------------
# validation


def chebyshev_center(A, b):
    """Center and radius of the largest ball inside ``{x : A x <= b}``.

    Returns ``(None, 0.0)`` if the set is empty or the LP fails.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    d = A.shape[1]
    norms = np.linalg.norm(A, axis=1)
    cost = np.zeros(d + 1)
    cost[-1] = -1.0
    res = linprog(
        cost,
        A_ub=np.hstack([A, norms[:, None]]),
        b_ub=b,
        bounds=[(None, None)] * d + [(None, None)],
        method="highs",
    )
    if res.status == 3:
        # unbounded radius: an unbounded region
        return None, math.inf
    if not res.success:
        return None, 0.0
    return res.x[:d], float(res.x[-1])


def validate_polytope(vertices, halfspaces, tol: float = TOL) -> Polytope:
    """Check and freeze a V-rep/H-rep pair.

    ``halfspaces`` is a sequence of ``(a, b)`` pairs meaning ``a . x <= b``;
    an ``(A, b)`` array pair is accepted too.
    """
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    if isinstance(halfspaces, tuple) and len(halfspaces) == 2 and np.ndim(halfspaces[0]) == 2:
        A = np.asarray(halfspaces[0], dtype=float)
        b = np.asarray(halfspaces[1], dtype=float).ravel()
    else:
        if len(halfspaces) == 0:
            raise DimensionMismatch("halfspace list is empty")
        rows = [np.asarray(a, dtype=float).ravel() for a, _ in halfspaces]
        if len({r.shape[0] for r in rows}) != 1:
            raise DimensionMismatch("halfspace normals have inconsistent lengths")
        A = np.vstack(rows)
        b = np.array([float(bi) for _, bi in halfspaces])
    if V.size == 0:
        raise DimensionMismatch("vertex list is empty")
    d = V.shape[1]
    if d < 1:
        raise DimensionMismatch("dimension must be at least 1")
    if A.shape[1] != d:
        raise DimensionMismatch(f"halfspace normals have length {A.shape[1]}, vertices have {d}")
    if A.shape[0] != b.shape[0]:
        raise DimensionMismatch("normals and offsets differ in count")
    if not (np.all(np.isfinite(V)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise DimensionMismatch("non-finite entries in polytope data")
    if np.any(np.linalg.norm(A, axis=1) == 0):
        raise DimensionMismatch("zero halfspace normal")

    norms = np.linalg.norm(V, axis=1)
    if np.any(norms > 1.0 + tol):
        i = int(np.argmax(norms))
        raise NormExceedsOne(f"vertex {i} has norm {norms[i]:.6g} > 1")
    if V.shape[0] < d + 1:
        raise DimensionMismatch(f"need at least d+1={d + 1} vertices, got {V.shape[0]}")

    _, radius = chebyshev_center(A, b)
    if not radius >= tol:
        raise EmptyInterior("no point satisfies all halfspaces strictly")
    if math.isinf(radius):
        raise EmptyInterior("halfspaces do not bound a polytope")

    viol = V @ A.T - b[None, :]
    if np.any(viol > tol):
        i, k = np.unravel_index(int(np.argmax(viol)), viol.shape)
        raise VertexOutsideHalfspace(f"vertex {i} violates halfspace {k} by {viol[i, k]:.3g}")

    scale = np.maximum(1.0, np.abs(b))
    tight = np.sum(np.abs(viol) <= tol * scale[None, :] * 10, axis=0)
    redundant = tuple(bool(n < d) for n in tight)
    return Polytope(_frozen(V), _frozen(A), _frozen(b), redundant)


def load_polytope(path) -> Polytope:
    data = json.loads(Path(path).read_text())
    V = data["vertices"]
    hs = [(h["a"], h["b"]) for h in data["halfspaces"]]
    poly = validate_polytope(V, hs)
    if "d" in data and int(data["d"]) != poly.d:
        raise DimensionMismatch(f"declared d={data['d']} but vertices have dimension {poly.d}")
    return poly


def save_polytope(poly: Polytope, path) -> None:
    Path(path).write_text(json.dumps(poly.to_dict(), indent=2))


# ---------------------------------------------------------------------------
# maximum-volume inscribed ellipsoid


def _sym_basis(d):
    idx = [(p, q) for p in range(d) for q in range(p, d)]
    return idx


def _vech_to_mat(z, idx, d):
    B = np.zeros((d, d))
    for k, (p, q) in enumerate(idx):
        B[p, q] = z[k]
        B[q, p] = z[k]
    return B


def inscribed_ellipsoid(polytope: Polytope, tolerance: float = 1e-8, max_iter: int = 10_000) -> Ellipsoid:
    """Maximum-volume ellipsoid inside the polytope's halfspaces.

    Solves  max log det B  s.t.  ||B a_i|| + a_i . c <= b_i  over symmetric
    positive definite B and center c with a log-barrier Newton method. The
    barrier weight grows until the duality-gap bound m/t drops below
    ``tolerance`` (a bound on the log-volume suboptimality).

    The returned ellipsoid carries ``kappa``: the smallest factor with every
    vertex inside the ellipsoid scaled about its center.
    """
    if not (0 < tolerance <= 1e-3):
        raise ValueError("tolerance must lie in (0, 1e-3]")
    A = np.asarray(polytope.A, dtype=float)
    b = np.asarray(polytope.b, dtype=float)
    row = np.linalg.norm(A, axis=1)
    A = A / row[:, None]
    b = b / row
    m, d = A.shape

    c0, r0 = chebyshev_center(A, b)
    if c0 is None or not r0 > TOL:
        raise EmptyInterior("polytope has no interior point")

    idx = _sym_basis(d)
    nB = len(idx)
    n = nB + d
    # W[i, k, :] = E_k a_i for the symmetric basis matrix E_k
    W = np.zeros((m, nB, d))
    for k, (p, q) in enumerate(idx):
        W[:, k, p] += A[:, q]
        if p != q:
            W[:, k, q] += A[:, p]
    diag_weight = np.array([1.0 if p == q else 2.0 for p, q in idx])
    P_idx = np.array([p for p, _ in idx])
    Q_idx = np.array([q for _, q in idx])

    Ek = np.zeros((nB, d, d))
    for k, (p, q) in enumerate(idx):
        Ek[k, p, q] = 1.0
        Ek[k, q, p] = 1.0
    WW = np.einsum("ikj,ilj->ikl", W, W)

    z = np.zeros(n)
    z[:nB] = _mat_to_vech(0.5 * r0 * np.eye(d), idx)
    z[nB:] = c0

    def evaluate(z):
        B = _vech_to_mat(z[:nB], idx, d)
        try:
            L = np.linalg.cholesky(B)
        except np.linalg.LinAlgError:
            return None
        U = A @ B  # rows are B a_i (B symmetric)
        g = np.linalg.norm(U, axis=1)
        s = b - A @ z[nB:] - g
        if np.any(s <= 0):
            return None
        logdet = 2.0 * np.sum(np.log(np.diag(L)))
        return B, U, g, s, logdet

    def objective(z, t):
        ev = evaluate(z)
        if ev is None:
            return math.inf
        _, _, _, s, logdet = ev
        return -t * logdet - np.sum(np.log(s))

    t = 1.0
    mu = 10.0
    iters = 0
    while True:
        # centering by damped Newton
        while True:
            iters += 1
            if iters > max_iter:
                raise SolverNonConvergence(f"no convergence within {max_iter} Newton iterations")
            B, U, g, s, logdet = evaluate(z)
            Binv = np.linalg.inv(B)
            Binv = 0.5 * (Binv + Binv.T)

            grad = np.zeros(n)
            H = np.zeros((n, n))
            grad[:nB] = -t * diag_weight * Binv[P_idx, Q_idx]
            # Hessian of -log det: tr(Binv E_k Binv E_l)
            BE = np.einsum("ij,kjl->kil", Binv, Ek)
            H[:nB, :nB] = t * np.einsum("kij,lji->kl", BE, BE)

            Uh = U / g[:, None]
            Lb = np.einsum("ikj,ij->ik", W, Uh)  # d g_i / d vech(B)
            Lfull = np.hstack([Lb, A])  # d(-s_i)/dz
            inv_s = 1.0 / s
            grad += Lfull.T @ inv_s
            H += (Lfull * inv_s[:, None] ** 2).T @ Lfull
            # curvature of ||B a_i||: W_i (I - uu^T) W_i^T / g_i, weighted by 1/s_i
            curv = (WW - Lb[:, :, None] * Lb[:, None, :]) * (inv_s / g)[:, None, None]
            H[:nB, :nB] += curv.sum(axis=0)

            try:
                step = -np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(H, grad, rcond=None)[0]
            dec2 = float(-grad @ step)
            # dec2 / 2 bounds the barrier suboptimality; divided by t it is in log-volume units
            if dec2 / 2.0 <= 1e-10:
                break
            f0 = -t * logdet - np.sum(np.log(s))
            alpha = 1.0
            while alpha >= 1e-14:
                f1 = objective(z + alpha * step, t)
                if f1 <= f0 - 0.25 * alpha * dec2:
                    break
                alpha *= 0.5
            if alpha < 1e-14 or not f1 < f0:
                # no representable progress left at this barrier weight
                break
            z = z + alpha * step
        if m / t < tolerance:
            break
        t *= mu

    B = _vech_to_mat(z[:nB], idx, d)
    center = z[nB:].copy()
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(-evals)
    axes = (evecs[:, order] * evals[order]).T
    E = Ellipsoid(center, axes)
    kappa = containment_factor(E, polytope)
    return Ellipsoid(center, axes, kappa)


def _mat_to_vech(M, idx):
    return np.array([M[p, q] for p, q in idx])


def containment_factor(ellipsoid: Ellipsoid, polytope: Polytope) -> float:
    """Certify E ⊆ D ⊆ kappa E (scaled about the center) and return kappa.

    Inner containment is checked through the support function along every
    facet normal; outer containment through the gauge of every vertex.
    """
    A, b = polytope.A, polytope.b
    support = A @ ellipsoid.center + np.linalg.norm(A @ ellipsoid.axes.T, axis=1)
    excess = support - b
    if np.any(excess > TOL * np.maximum(1.0, np.abs(b))):
        k = int(np.argmax(excess))
        raise CertificateViolation(f"ellipsoid leaves halfspace {k} by {excess[k]:.3g}")
    Y = polytope.vertices - ellipsoid.center
    coeffs = (Y @ ellipsoid.axes.T) / ellipsoid.lengths**2
    gauges = np.linalg.norm(coeffs, axis=1)
    return float(max(1.0, gauges.max()))


def kappa_bound(d: int, mode: str) -> float:
    if mode == "exact_ellipsoid":
        return float(d)
    if mode == "weak_ellipsoid":
        return 2.0 * d**1.5
    raise ValueError(f"unknown ellipsoid mode {mode!r}")


def exploration_basis(polytope: Polytope, ellipsoid: Ellipsoid | None = None, mode: str = "weak_ellipsoid",
                      kappa_slack: float = 1e-6) -> ExplorationBasis:
    """Shift the ellipsoid center to the origin and use its semi-axes as the basis."""
    if ellipsoid is None:
        ellipsoid = inscribed_ellipsoid(polytope)
    axes = np.array(ellipsoid.axes, dtype=float)
    lengths = np.linalg.norm(axes, axis=1)
    if np.any(lengths < 1e-12):
        raise DegenerateAxis(f"semi-axis {int(np.argmin(lengths))} has norm {lengths.min():.3g}")
    if axes.shape != (polytope.d, polytope.d):
        raise DimensionMismatch("ellipsoid must have d semi-axes in R^d")
    s0 = np.array(ellipsoid.center, dtype=float)
    for j in range(polytope.d):
        for sign in (1, -1):
            p = s0 + sign * axes[j]
            if not polytope.contains(p):
                raise CertificateViolation(f"axis endpoint {'+' if sign > 0 else '-'}s_{j + 1} lies outside D")
    kappa = containment_factor(ellipsoid, polytope)
    bound = kappa_bound(polytope.d, mode)
    if kappa > bound * (1.0 + kappa_slack):
        raise CertificateViolation(f"containment factor {kappa:.6g} exceeds {mode} bound {bound:.6g}")
    return ExplorationBasis(
        origin_shift=_frozen(s0),
        axes=_frozen(axes),
        kappa=kappa,
        mode=mode,
        shifted_vertices=_frozen(polytope.vertices - s0),
    )


def decompose(x, basis: ExplorationBasis) -> Decomposition:
    """Coefficients of shifted point x in the orthogonal basis: <x, s_j> / ||s_j||^2."""
    x = np.asarray(x, dtype=float)
    return Decomposition(_frozen(basis.axes @ x / basis.sq_norms))


def reconstruct(dec: Decomposition, basis: ExplorationBasis) -> np.ndarray:
    return basis.axes.T @ dec.coefficients


# ---------------------------------------------------------------------------
# generator families


def box(d: int, half_width: float | None = None, center=None) -> Polytope:
    r = 1.0 / math.sqrt(d) if half_width is None else float(half_width)
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    V = np.array(list(itertools.product((1.0, -1.0), repeat=d))) * r + c
    A = np.vstack([np.eye(d), -np.eye(d)])
    b = np.concatenate([c + r, -(c - r)])
    return validate_polytope(V, (A, b))


def cross_polytope(d: int, radius: float = 1.0) -> Polytope:
    r = float(radius)
    V = np.vstack([r * np.eye(d), -r * np.eye(d)])
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=d)))
    A = signs / math.sqrt(d)
    b = np.full(len(signs), r / math.sqrt(d))
    return validate_polytope(V, (A, b))


def regular_simplex_vertices(d: int, circumradius: float = 1.0) -> np.ndarray:
    E = np.eye(d + 1) - 1.0 / (d + 1)
    # orthonormal basis of the hyperplane sum(x) = 0
    q, _ = np.linalg.qr(E[:, :d])
    V = E @ q
    V *= circumradius / np.linalg.norm(V, axis=1)[:, None]
    return V


def regular_simplex(d: int, circumradius: float = 1.0) -> Polytope:
    V = regular_simplex_vertices(d, circumradius)
    R = float(circumradius)
    # facet opposite v_i: -(v_i / R) . x <= R / d
    A = -V / R
    b = np.full(d + 1, R / d)
    return validate_polytope(V, (A, b))


def family_polytope(family: str, d: int, size: float | None = None) -> Polytope:
    if family == "box":
        return box(d, size)
    if family == "cross_polytope":
        return cross_polytope(d, 1.0 if size is None else size)
    if family == "regular_simplex":
        return regular_simplex(d, 1.0 if size is None else size)
    raise UnsupportedFamily(f"unknown polytope family {family!r}")


def reference_ellipsoid(family: str, d: int, size: float | None = None) -> Ellipsoid:
    """Closed-form maximum-volume inscribed ellipsoid (a ball) for the built-in families.

    ``size`` is the box half-width, the cross-polytope l1 radius, or the
    simplex circumradius, matching :func:`family_polytope` defaults.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if family == "box":
        r = 1.0 / math.sqrt(d) if size is None else float(size)
    elif family == "cross_polytope":
        r = (1.0 if size is None else float(size)) / math.sqrt(d)
    elif family == "regular_simplex":
        r = (1.0 if size is None else float(size)) / d
    else:
        raise UnsupportedFamily(f"no reference ellipsoid for family {family!r}")
    return Ellipsoid(np.zeros(d), r * np.eye(d))


def linear_image(poly: Polytope, L, shift=None, max_norm: float = 1.0) -> Polytope:
    """Image of ``poly`` under x -> s (L x + shift), with s chosen so the largest
    vertex norm equals ``max_norm``."""
    L = np.asarray(L, dtype=float)
    d = poly.d
    t = np.zeros(d) if shift is None else np.asarray(shift, dtype=float)
    V = poly.vertices @ L.T + t
    s = max_norm / np.linalg.norm(V, axis=1).max()
    V = s * V
    Linv_T = np.linalg.inv(L).T
    A = poly.A @ Linv_T.T  # rows: L^{-T} a_i
    b = s * (poly.b + A @ t)
    scale = np.linalg.norm(A, axis=1)
    return validate_polytope(V, (A / scale[:, None], b / scale))


def random_linear_image(poly: Polytope, rng: np.random.Generator, min_singular: float = 0.3,
                        max_shift: float = 0.3) -> Polytope:
    d = poly.d
    q1, _ = np.linalg.qr(rng.standard_normal((d, d)))
    q2, _ = np.linalg.qr(rng.standard_normal((d, d)))
    sv = rng.uniform(min_singular, 1.0, size=d)
    L = q1 @ np.diag(sv) @ q2
    shift = rng.uniform(-max_shift, max_shift, size=d)
    return linear_image(poly, L, shift, max_norm=float(rng.uniform(0.5, 1.0)))


def random_hull(d: int, n_points: int, rng: np.random.Generator) -> Polytope:
    """Convex hull of random points in the unit ball (Qhull supplies both reps)."""
    if n_points < d + 1:
        raise ValueError("need at least d+1 points")
    if d == 1:
        pts = rng.uniform(-1, 1, size=(n_points, 1))
        lo, hi = pts.min(), pts.max()
        return validate_polytope([[hi], [lo]], [([1.0], hi), ([-1.0], -lo)])
    X = rng.standard_normal((n_points, d))
    X /= np.linalg.norm(X, axis=1)[:, None]
    X *= rng.uniform(0.3, 1.0, size=(n_points, 1)) ** (1.0 / d)
    hull = ConvexHull(X)
    V = X[hull.vertices]
    eq = np.round(hull.equations, 12)
    eq = np.unique(eq, axis=0)
    A, b = eq[:, :d], -eq[:, d]
    scale = np.linalg.norm(A, axis=1)
    A, b = A / scale[:, None], b / scale
    # Qhull equations are approximate; relax offsets to cover the vertices exactly
    b = np.maximum(b, (V @ A.T).max(axis=0))
    return validate_polytope(V, (A, b))


def random_polytope(d: int, rng: np.random.Generator) -> Polytope:
    """Random instance: a linear image of a built-in family, or a random hull."""
    kind = rng.integers(4)
    if kind == 3:
        return random_hull(d, int(rng.integers(d + 2, 4 * d + 6)), rng)
    return random_linear_image(family_polytope(FAMILIES[kind], d), rng)
