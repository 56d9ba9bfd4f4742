"""Independent reference computations used to pin expected values.

None of these call into the fitting, extraction or sampling code paths
they are used to check.
"""

import math

import numpy as np
from scipy import integrate, optimize

TWO_PI = 2 * math.pi


def _residual_at(P, t):
    Q = np.outer(t, t.conj())
    qq = np.vdot(Q, Q).real
    lam = max(0.0, np.vdot(Q, P).real / qq) if qq > 0 else 0.0
    return float(np.linalg.norm(P - lam * Q)), lam


def grid_fit(out, alpha, beta, psi_vec, phi_vec, n_theta=720, refine=True):
    """Minimum over theta of ||out out^dag - lam Psi Psi^dag||_F, lam optimal per theta.

    720-point grid, then a bounded scalar minimization around the best cell.
    Returns (theta, lam, residual).
    """
    out = np.asarray(out, dtype=complex)
    P = np.outer(out, out.conj())

    def f(th):
        t = alpha * np.asarray(psi_vec) + beta * np.exp(1j * th) * np.asarray(phi_vec)
        return _residual_at(P, t)[0]

    grid = TWO_PI * np.arange(n_theta) / n_theta
    vals = np.array([f(th) for th in grid])
    j = int(np.argmin(vals))
    th_best, res_best = grid[j], vals[j]
    if refine:
        step = TWO_PI / n_theta
        r = optimize.minimize_scalar(
            f, bounds=(th_best - step, th_best + step), method="bounded", options={"xatol": 1e-13}
        )
        if r.fun < res_best:
            th_best, res_best = r.x, r.fun
    t = alpha * np.asarray(psi_vec) + beta * np.exp(1j * th_best) * np.asarray(phi_vec)
    return th_best % TWO_PI, _residual_at(P, t)[1], res_best


def min_singular_over_phase(mat_of_phase, n_theta=720, vectorized=False):
    """min over theta of the smallest singular value of mat_of_phase(theta).

    With ``vectorized`` the callable takes an array of phases and returns a
    stack of matrices, which lets the grid pass run as one batched SVD.
    """
    if vectorized:
        def f(th):
            return np.linalg.svd(mat_of_phase(np.array([th])), compute_uv=False)[0, -1]
    else:
        def f(th):
            return np.linalg.svd(mat_of_phase(th), compute_uv=False)[-1]

    grid = TWO_PI * np.arange(n_theta) / n_theta
    if vectorized:
        vals = np.linalg.svd(mat_of_phase(grid), compute_uv=False)[:, -1]
    else:
        vals = np.array([f(th) for th in grid])
    j = int(np.argmin(vals))
    step = TWO_PI / n_theta
    r = optimize.minimize_scalar(
        f, bounds=(grid[j] - step, grid[j] + step), method="bounded", options={"xatol": 1e-14}
    )
    if r.fun < vals[j]:
        return r.x % TWO_PI, r.fun
    return grid[j], vals[j]


def band_fraction_quadrature(normal_xyz, c, eps):
    """Fraction of the sphere with |n . p + c| < eps, by 1-D quadrature along n.

    Uses only that the pushforward of the uniform measure onto any unit
    direction has density 1/2 on [-1, 1] (Archimedes), integrated numerically.
    """
    val, _ = integrate.quad(lambda s: 0.5 * float(abs(s + c) < eps), -1, 1, points=[-c - eps, -c + eps], limit=200)
    return val


def great_circle_band_quadrature(gamma, eps):
    """Fraction with |sin x cos(y - gamma)| < eps, integrating in (x, y) directly."""
    def inner(x):
        sx = math.sin(x)
        if sx < eps:
            return TWO_PI * sx
        # |cos(y - gamma)| < eps / sin x on an angular set of total length 4 * arcsin(eps / sin x)
        return 4 * math.asin(eps / sx) * sx

    val, _ = integrate.quad(inner, 0, math.pi, limit=400, points=[math.asin(min(1, eps)), math.pi - math.asin(min(1, eps))])
    return val / (4 * math.pi)
