"""Circle extraction for a Kraus branch and a numerical scan of the
superposable locus on the Bloch sphere.

With the known state fixed to ``|0>`` and a branch that can superpose
``|0>`` with itself (``a21 == 0``), the states the branch superposes away
from the north pole satisfy

    A cos x + B sin x cos y + C sin x sin y + D = 0

with

    r1 e^{i g1} = a11 - a23,    r2 e^{i g2} = a13,    g = g2 - g1,
    A = (r1^2 - r2^2) / 2,       B = r1 r2 cos g,      C = r1 r2 sin g,
    D = (r1^2 + r2^2) / 2 - |a23 beta / alpha|^2,

and the branch scale is ``lam = |a23|^2 / |alpha|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bloch import (
    TWO_PI,
    ZERO,
    BlochPoint,
    PureQubit,
    SphereCircle,
    circle_residuals,
    states_from_angles,
    states_to_bloch,
)
from .linalg import DEFAULT_TOL
from .superposition import CPMap, KrausOperator, SuperpositionSpec, defect_batch, superposable_mask

_BISECT_STEPS = 64


class ExtractionError(ValueError):
    """The branch does not define a superposable circle."""


@dataclass(frozen=True)
class ExtractionTrace:
    lam: float
    r1: float
    gamma1: float
    r2: float
    gamma2: float
    gamma: float
    A: float
    B: float
    C: float
    D: float

    def to_json(self) -> dict:
        return {
            "lambda": self.lam,
            "r1": self.r1,
            "r2": self.r2,
            "gamma": self.gamma,
            "A": self.A,
            "B": self.B,
            "C": self.C,
            "D": self.D,
        }


def extract_circle(
    k: KrausOperator, spec: SuperpositionSpec, tol: float = DEFAULT_TOL
) -> tuple[SphereCircle, ExtractionTrace]:
    m = k.m
    a11, a13, a21, a23 = (complex(m[0, 0]), complex(m[0, 2]), complex(m[1, 0]), complex(m[1, 2]))
    if abs(a21) >= tol:
        raise ExtractionError("channel cannot superpose |0> with |0> (a21 != 0)")
    if abs(a23) <= tol:
        raise ExtractionError("lambda undefined: a23 vanishes")
    lam = abs(a23) ** 2 / abs(spec.alpha) ** 2
    z1 = a11 - a23
    r1, g1 = abs(z1), math.atan2(z1.imag, z1.real)
    r2, g2 = abs(a13), math.atan2(a13.imag, a13.real)
    g = g2 - g1
    A = 0.5 * (r1 * r1 - r2 * r2)
    B = r1 * r2 * math.cos(g)
    C = r1 * r2 * math.sin(g)
    D = 0.5 * (r1 * r1 + r2 * r2) - abs(a23 * spec.beta / spec.alpha) ** 2
    trace = ExtractionTrace(lam, r1, g1, r2, g2, g, A, B, C, D)
    norm = math.sqrt(A * A + B * B + C * C)
    if norm <= tol:
        raise ExtractionError("no circle: the modulus condition cannot be satisfied")
    offset = D / norm
    if abs(offset) > 1.0 + tol:
        raise ExtractionError(f"empty locus: normalized offset {offset:.6g} lies outside the sphere")
    offset = max(-1.0, min(1.0, offset))
    # (A, B, C) multiply (Z, X, Y)
    return SphereCircle.from_plane(B, C, A, offset * norm), trace


def extract_circles(cp: CPMap, spec: SuperpositionSpec, tol: float = DEFAULT_TOL):
    """One (circle, trace) pair per Kraus branch; the map's locus is their intersection."""
    return [extract_circle(k, spec, tol) for k in cp.ops]


def _bisect_roots(f, lo: np.ndarray, hi: np.ndarray, flo: np.ndarray) -> np.ndarray:
    """Vectorized bisection of bracketed sign changes."""
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _line_roots(defect, fixed: np.ndarray, free: np.ndarray, along_x: bool):
    """Roots of ``defect`` along grid lines; returns (x, y) arrays of refined points."""
    F, G = np.meshgrid(fixed, free, indexing="ij")
    if along_x:
        vals = defect(G, F)
    else:
        vals = defect(F, G)
    s = np.sign(vals)
    cross = (s[:, :-1] * s[:, 1:]) < 0
    i, j = np.nonzero(cross)
    if i.size == 0:
        return np.empty(0), np.empty(0)
    lo, hi = free[j], free[j + 1]
    fix = fixed[i]
    if along_x:
        f = lambda t: defect(t, fix)
    else:
        f = lambda t: defect(fix, t)
    root = _bisect_roots(f, lo, hi, vals[i, j])
    return (root, fix) if along_x else (fix, root)


def scan_superposable(
    cp,
    spec: SuperpositionSpec,
    grid_n: int,
    tol: float = DEFAULT_TOL,
    phi0: PureQubit = ZERO,
    include_known: bool = False,
) -> list[BlochPoint]:
    """Accepted points of a ``grid_n x grid_n`` (x, y) scan plus both poles.

    A bare grid almost never lands on a circle, so every meridian and every
    parallel of the grid is also searched for sign changes of each branch's
    exact-fit defect, refined by bisection. Candidates are accepted through
    the same predicate as single states. The known state itself is
    superposable with itself for any branch that keeps it alive, so it is
    left out unless ``include_known`` is set.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    if isinstance(cp, KrausOperator):
        cp = CPMap.single(cp)
    xs = math.pi * np.arange(1, grid_n + 1) / (grid_n + 1)
    ys = TWO_PI * np.arange(grid_n) / grid_n
    ys_closed = np.append(ys, TWO_PI)

    X, Y = np.meshgrid(xs, ys, indexing="ij")
    cand_x = [np.array([0.0, math.pi]), X.ravel()]
    cand_y = [np.array([0.0, 0.0]), Y.ravel()]
    xs_closed = np.concatenate([[0.0], xs, [math.pi]])
    for k in cp.ops:
        def defect(x, y, k=k):
            shape = np.shape(x)
            psis = states_from_angles(np.ravel(x), np.ravel(y))
            return defect_batch(k, psis, spec, phi0).reshape(shape)

        for along_x, fixed, free in ((True, ys, xs_closed), (False, xs, ys_closed)):
            rx, ry = _line_roots(defect, fixed, free, along_x)
            cand_x.append(rx)
            cand_y.append(ry)

    x_all = np.concatenate(cand_x)
    y_all = np.concatenate(cand_y)
    psis = states_from_angles(x_all, y_all)
    ok = superposable_mask(cp, spec, psis, phi0, tol)
    if not include_known:
        overlap = np.abs(psis @ phi0.vector.conj())
        ok &= overlap < 1.0 - 1e-12
    pts = states_to_bloch(psis[ok])
    # drop duplicates (pole hits, line intersections) keeping first occurrence
    _, first = np.unique(np.round(pts, 12), axis=0, return_index=True)
    pts = pts[np.sort(first)]
    return [BlochPoint.normalized(*row) for row in pts]


def fit_plane(points) -> tuple[SphereCircle, float]:
    """Total-least-squares plane through the points, as a canonical circle.

    Returns the circle and the largest absolute circle residual over the
    inputs. Raises ``ValueError`` for fewer than 3 points or when the
    points do not pin down a unique plane.
    """
    pts = np.array(
        [p.as_array() if isinstance(p, BlochPoint) else np.asarray(p, dtype=float) for p in points]
    ).reshape(-1, 3)
    if len(pts) < 3:
        raise ValueError("fit_plane needs at least 3 points")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    scale = max(s[0], 1e-300)
    if s[0] < 1e-12 or s[1] / scale < 1e-9:
        raise ValueError("degenerate fit: points are identical or collinear")
    normal = vt[2]
    d = -float(normal @ centroid)
    circ = SphereCircle.from_plane(normal[0], normal[1], normal[2], d)
    return circ, float(np.max(np.abs(circle_residuals(pts, circ))))
