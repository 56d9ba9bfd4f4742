"""Consistency of a hypothetical universal superposer with probabilistic
no-cloning, restricted to span{|0>, |1>, |2>}.

A protocol sends ``|0>, |1>, |psi>`` (paired with a fixed ``|2>``) to

    |Psi_0> = alpha|0> + beta e^{i theta0}|2>
    |Psi_1> = alpha|1> + beta e^{i theta1}|2>
    |Psi>   = alpha|psi> + beta e^{i theta_psi}|2>.

The inputs are linearly dependent, so the outputs must be too. That
happens for some ``theta_psi`` exactly when

    |cos(x/2) + sin(x/2) e^{i(gamma - y)}| = 1,    gamma = theta1 - theta0,

i.e. on the great circle ``cos(gamma) X + sin(gamma) Y = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bloch import TWO_PI, PureQubit, SphereCircle, iter_sphere_chunks
from .linalg import DEFAULT_TOL
from .superposition import SuperpositionSpec


@dataclass(frozen=True)
class QuditProtocol:
    spec: SuperpositionSpec
    theta0: float
    theta1: float

    @property
    def gamma(self) -> float:
        return self.theta1 - self.theta0


def dependence_matrix(p: QuditProtocol, psi: PureQubit, theta_psi: float) -> np.ndarray:
    """Columns are the three protocol outputs in the basis (|0>, |1>, |2>)."""
    al, be = p.spec.alpha, p.spec.beta
    return np.array(
        [
            [al, 0, al * psi.a0],
            [0, al, al * psi.a1],
            [be * np.exp(1j * p.theta0), be * np.exp(1j * p.theta1), be * np.exp(1j * theta_psi)],
        ],
        dtype=complex,
    )


def _modulus_defect(gamma: float, a0: complex, a1: complex) -> float:
    # |a0 + a1 e^{i gamma}|^2 - 1 = sin x cos(y - gamma), the great-circle residual
    return abs(a0 + a1 * np.exp(1j * gamma)) ** 2 - 1.0


def is_dependent(p: QuditProtocol, psi: PureQubit, tol: float = DEFAULT_TOL) -> bool:
    return abs(_modulus_defect(p.gamma, psi.a0, psi.a1)) < tol


def dependence_witness(p: QuditProtocol, psi: PureQubit, tol: float = DEFAULT_TOL) -> Optional[float]:
    """The phase theta_psi that makes the outputs dependent, or None."""
    if not is_dependent(p, psi, tol):
        return None
    z = psi.a0 + psi.a1 * np.exp(1j * p.gamma)
    return math.fmod(p.theta0 + math.atan2(z.imag, z.real), TWO_PI) % TWO_PI


def violation_circle(p: QuditProtocol) -> SphereCircle:
    return SphereCircle(math.pi / 2, p.gamma, 0.0).canonical()


def violation_fraction(p: QuditProtocol, eps: float, n: int, seed: int) -> float:
    """Fraction of uniform samples with ``|cos(gamma) X + sin(gamma) Y| < eps``."""
    if eps <= 0 or n < 1:
        raise ValueError("need eps > 0 and n >= 1")
    cg, sg = math.cos(p.gamma), math.sin(p.gamma)
    hits = 0
    for pts in iter_sphere_chunks(n, seed):
        hits += int(np.count_nonzero(np.abs(cg * pts[:, 0] + sg * pts[:, 1]) < eps))
    return hits / n
