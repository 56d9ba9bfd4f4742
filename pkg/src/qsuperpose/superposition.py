"""The superposition predicate for a single Kraus branch.

A Kraus operator ``M`` (2x4) superposes ``|psi>`` with the known state
``|phi0>`` when

    M (|psi><psi| (x) |phi0><phi0|) M^dagger = lam |Psi><Psi|,   lam > 0,
    |Psi> = alpha |psi> + beta exp(i theta) |phi0>

for some phase ``theta``. In vector form the branch output is
``out = M (psi (x) phi0)`` and the condition says ``out`` is parallel to
``Psi(theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bloch import TWO_PI, PureQubit
from .linalg import DEFAULT_TOL, adjoint, as_matrix, hermitian_eigenvalues, kron, outer

# outputs with squared norm at or below this are treated as the zero vector
ZERO_PROB = 1e-24
# slack allowed on the eigenvalues of I - sum M^dagger M
PSD_SLACK = 1e-12


@dataclass(frozen=True)
class SuperpositionSpec:
    alpha: complex
    beta: complex

    def __post_init__(self):
        a, b = complex(self.alpha), complex(self.beta)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > DEFAULT_TOL:
            raise ValueError("weights must satisfy |alpha|^2 + |beta|^2 = 1")
        if a == 0 or b == 0:
            raise ValueError("alpha and beta must both be nonzero")


def _check_contraction(total: np.ndarray) -> None:
    dim = total.shape[1]
    eig = hermitian_eigenvalues(np.eye(dim) - total)
    if eig[0] < -PSD_SLACK:
        raise ValueError(
            f"operators are not trace-nonincreasing: min eig(I - sum M^dag M) = {eig[0]:.3e}"
        )


@dataclass(frozen=True, eq=False)
class KrausOperator:
    m: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.m).copy()
        if m.shape != (2, 4):
            raise ValueError(f"Kraus operator must be 2x4, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)
        _check_contraction(adjoint(m) @ m)


@dataclass(frozen=True, eq=False)
class CPMap:
    ops: tuple[KrausOperator, ...]

    def __post_init__(self):
        ops = tuple(self.ops)
        if not ops:
            raise ValueError("a CP map needs at least one Kraus operator")
        object.__setattr__(self, "ops", ops)
        _check_contraction(sum(adjoint(k.m) @ k.m for k in ops))

    @classmethod
    def single(cls, k: KrausOperator) -> "CPMap":
        return cls((k,))


@dataclass(frozen=True)
class FitReport:
    theta: Optional[float]
    lam: Optional[float]
    residual_norm: float
    success_prob: float

    @property
    def fitted(self) -> bool:
        return self.theta is not None

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "lambda": self.lam,
            "residual": self.residual_norm,
            "success_prob": self.success_prob,
        }


def target_vector(spec: SuperpositionSpec, theta: float, psi: PureQubit, phi0: PureQubit) -> np.ndarray:
    """``alpha psi + beta exp(i theta) phi0`` (not normalized)."""
    return spec.alpha * psi.vector + spec.beta * np.exp(1j * theta) * phi0.vector


def apply_kraus(k: KrausOperator, psi: PureQubit, phi0: PureQubit) -> np.ndarray:
    return k.m @ kron(psi.vector, phi0.vector)


def residual_H(
    k: KrausOperator,
    spec: SuperpositionSpec,
    psi: PureQubit,
    phi0: PureQubit,
    lam: float,
    theta: float,
) -> np.ndarray:
    if lam <= 0:
        raise ValueError("lambda must be positive")
    out = apply_kraus(k, psi, phi0)
    return outer(out) - lam * outer(target_vector(spec, theta, psi, phi0))


def _rank1_residual(out: np.ndarray, psi_t: np.ndarray, lam: np.ndarray) -> np.ndarray:
    diff = out[:, :, None] * out.conj()[:, None, :] - lam[:, None, None] * (
        psi_t[:, :, None] * psi_t.conj()[:, None, :]
    )
    return np.sqrt(np.sum(np.abs(diff) ** 2, axis=(1, 2)))


def fit_batch(out: np.ndarray, a: np.ndarray, b: np.ndarray):
    """Best phase and scale for ``out out^dag ~ lam |a + e^{i theta} b><...|``.

    All inputs are ``(N, 2)`` arrays. Returns ``(theta, lam, residual)``
    arrays, with theta in [0, 2 pi).

    For a fixed ``theta`` the optimal scale is
    ``lam = |<Psi, out>|^2 / ||Psi||^4``, so the problem reduces to
    maximizing ``f = |<Psi, out>|^2 / ||Psi||^2``. Both numerator and
    denominator are first-order trigonometric polynomials in ``theta``, so
    ``f' = 0`` collapses to ``k1 sin + k2 cos + k3 = 0`` with two closed-form
    roots. The exact-fit phase ``exp(i theta) = -(out ^ a) / (out ^ b)``
    is added as a candidate too; it is the most accurate one whenever an
    exact fit exists. The final pick is by directly evaluated residual.
    """
    out = np.asarray(out, dtype=complex)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    u = np.sum(a.conj() * out, axis=1)
    w = np.sum(b.conj() * out, axis=1)
    ab = np.sum(a.conj() * b, axis=1)
    uw = u.conj() * w
    P0 = np.abs(u) ** 2 + np.abs(w) ** 2
    P1, P2 = 2 * uw.real, 2 * uw.imag
    Q0 = np.sum(np.abs(a) ** 2 + np.abs(b) ** 2, axis=1)
    Q1, Q2 = 2 * ab.real, -2 * ab.imag
    k1 = P0 * Q1 - Q0 * P1
    k2 = Q0 * P2 - P0 * Q2
    k3 = P2 * Q1 - P1 * Q2
    R = np.hypot(k1, k2)
    phi = np.arctan2(k1, k2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(R > 0, np.clip(-k3 / R, -1.0, 1.0), 1.0)
    delta = np.arccos(ratio)

    p = out[:, 0] * a[:, 1] - out[:, 1] * a[:, 0]
    q = out[:, 0] * b[:, 1] - out[:, 1] * b[:, 0]
    wedge = np.where(np.abs(q) > 0, np.angle(-p * np.conj(q)), 0.0)

    candidates = np.stack([wedge, phi + delta, phi - delta, np.arctan2(Q2, Q1), np.zeros_like(phi)], axis=1)

    # rank by the cheap expanded residual, then evaluate the winner exactly
    o2 = np.sum(np.abs(out) ** 2, axis=1)
    exp_th = np.exp(1j * candidates)
    psi_all = a[:, None, :] + exp_th[:, :, None] * b[:, None, :]
    n2 = np.sum(np.abs(psi_all) ** 2, axis=2)
    ov = np.abs(np.sum(psi_all.conj() * out[:, None, :], axis=2)) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_all = np.where(n2 > 1e-300, ov / n2**2, 0.0)
    approx = o2[:, None] ** 2 - lam_all * ov
    pick = np.argmin(approx, axis=1)
    rows = np.arange(len(out))
    best_theta = candidates[rows, pick]
    best_lam = lam_all[rows, pick]
    best_res = _rank1_residual(out, psi_all[rows, pick], best_lam)
    return np.mod(best_theta, TWO_PI), best_lam, best_res


def fit_phase(
    out,
    spec: SuperpositionSpec,
    psi: PureQubit,
    phi0: PureQubit,
    tol: float = DEFAULT_TOL,
) -> FitReport:
    """Fit ``theta`` and ``lam`` so that ``out out^dag = lam |Psi><Psi|``.

    ``theta``/``lam`` are reported only when the fitted residual is below
    ``tol * max(1, ||out||^2)``. A zero output gives an empty report with
    zero success probability.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    out = np.asarray(out, dtype=complex).reshape(1, 2)
    prob = float(np.sum(np.abs(out) ** 2))
    if prob <= ZERO_PROB:
        return FitReport(None, None, 0.0, prob)
    theta, lam, res = fit_batch(
        out, (spec.alpha * psi.vector)[None, :], (spec.beta * phi0.vector)[None, :]
    )
    theta, lam, res = float(theta[0]), float(lam[0]), float(res[0])
    if res < tol * max(1.0, prob) and lam > 0.0:
        if theta >= TWO_PI:
            theta = 0.0
        return FitReport(theta, lam, res, prob)
    return FitReport(None, None, res, prob)


def is_superposable(
    cp: CPMap,
    spec: SuperpositionSpec,
    psi: PureQubit,
    phi0: PureQubit,
    tol: float = DEFAULT_TOL,
) -> tuple[bool, FitReport]:
    """Every branch with nonzero output must fit (each with its own phase),
    and at least one branch must have nonzero output.

    The returned report carries the phase and scale of the most probable
    branch, the worst residual over branches, and the total success
    probability.
    """
    if isinstance(cp, KrausOperator):
        cp = CPMap.single(cp)
    reports = [fit_phase(apply_kraus(k, psi, phi0), spec, psi, phi0, tol) for k in cp.ops]
    total = sum(r.success_prob for r in reports)
    live = [r for r in reports if r.success_prob > ZERO_PROB]
    worst = max((r.residual_norm for r in live), default=0.0)
    ok = bool(live) and all(r.fitted for r in live)
    if ok:
        lead = max(live, key=lambda r: r.success_prob)
        return True, FitReport(lead.theta, lead.lam, worst, total)
    return False, FitReport(None, None, worst, total)


def superposable_mask(
    cp: CPMap,
    spec: SuperpositionSpec,
    psis: np.ndarray,
    phi0: PureQubit,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Vectorized :func:`is_superposable` over an ``(N, 2)`` array of states."""
    psis = np.asarray(psis, dtype=complex)
    inputs = np.einsum("ni,j->nij", psis, phi0.vector).reshape(len(psis), 4)
    a = spec.alpha * psis
    b = np.broadcast_to(spec.beta * phi0.vector, psis.shape)
    ok = np.ones(len(psis), dtype=bool)
    any_live = np.zeros(len(psis), dtype=bool)
    for k in cp.ops:
        out = inputs @ k.m.T
        prob = np.sum(np.abs(out) ** 2, axis=1)
        live = prob > ZERO_PROB
        _, lam, res = fit_batch(out, a, b)
        fitted = (res < tol * np.maximum(1.0, prob)) & (lam > 0.0)
        ok &= ~live | fitted
        any_live |= live
    return ok & any_live


def defect_batch(k: KrausOperator, psis: np.ndarray, spec: SuperpositionSpec, phi0: PureQubit) -> np.ndarray:
    """Signed exact-fit defect ``|out ^ a|^2 - |out ^ b|^2``.

    An exact fit exists iff the two wedge products have equal modulus, so
    the superposable locus of a branch sits inside the zero set of this
    smooth function.
    """
    psis = np.asarray(psis, dtype=complex)
    inputs = np.einsum("ni,j->nij", psis, phi0.vector).reshape(len(psis), 4)
    out = inputs @ k.m.T
    a = spec.alpha * psis
    b = spec.beta * phi0.vector
    p = out[:, 0] * a[:, 1] - out[:, 1] * a[:, 0]
    q = out[:, 0] * b[1] - out[:, 1] * b[0]
    return np.abs(p) ** 2 - np.abs(q) ** 2


def success_probability(cp, psi: PureQubit, phi0: PureQubit) -> float:
    """``Tr(sum M^dag M (rho_psi (x) rho_phi0))``."""
    ops: Sequence[KrausOperator] = cp.ops if isinstance(cp, CPMap) else (cp,)
    v = kron(psi.vector, phi0.vector)
    return float(sum(np.real(np.vdot(v, adjoint(k.m) @ k.m @ v)) for k in ops))

