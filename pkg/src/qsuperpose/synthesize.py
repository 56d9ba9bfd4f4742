"""Explicit superposition channels for a prescribed circle on the Bloch sphere.

For a canonical circle ``(mu, nu, c)`` the single Kraus operator

    M0 = [[0, 0, sin(mu/2) e^{i nu}, 0],
          [0, 0, -cos(mu/2),         0]]

with weights ``alpha = sqrt((1 + cos mu) / (2 + cos mu - c))``,
``beta = sqrt((1 - c) / (2 + cos mu - c))`` superposes every state on the
circle with ``|0>``. Branch scale is ``lam = (1 + cos mu) / (2 alpha^2)``,
the success probability is ``sin^2(x/2) = (1 - Z) / 2``, and every input on
the circle lands on the same output ray, the antipode of the circle's
normal on the Bloch sphere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bloch import (
    ZERO,
    BlochPoint,
    PureQubit,
    SphereCircle,
    circle_residual,
    state_to_bloch,
)
from .linalg import DEFAULT_TOL, array_from_json, array_to_json, complex_from_json, complex_to_json
from .superposition import (
    CPMap,
    KrausOperator,
    SuperpositionSpec,
    apply_kraus,
    fit_phase,
)


@dataclass(frozen=True, eq=False)
class SuperpositionChannel:
    kraus: KrausOperator
    spec: SuperpositionSpec
    lam: Optional[float] = None
    circle: Optional[SphereCircle] = None
    output_state: Optional[PureQubit] = None

    @property
    def cp_map(self) -> CPMap:
        return CPMap.single(self.kraus)

    def to_json(self) -> dict:
        return {
            "kraus": array_to_json(self.kraus.m),
            "alpha": complex_to_json(self.spec.alpha),
            "beta": complex_to_json(self.spec.beta),
            "lambda": self.lam,
            "circle": self.circle.to_json() if self.circle is not None else None,
            "output_state": (
                array_to_json(self.output_state.vector) if self.output_state is not None else None
            ),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SuperpositionChannel":
        kraus = KrausOperator(array_from_json(data["kraus"]))
        spec = SuperpositionSpec(complex_from_json(data["alpha"]), complex_from_json(data["beta"]))
        lam = data.get("lambda")
        circle = data.get("circle")
        state = data.get("output_state")
        return cls(
            kraus,
            spec,
            float(lam) if lam is not None else None,
            SphereCircle.from_json(circle) if circle is not None else None,
            PureQubit.from_vector(array_from_json(state), normalize=True) if state is not None else None,
        )


def save_channel(ch: SuperpositionChannel, path) -> None:
    with open(path, "w") as fh:
        json.dump(ch.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_channel(path) -> SuperpositionChannel:
    with open(path) as fh:
        return SuperpositionChannel.from_json(json.load(fh))


def synthesize_channel(circ: SphereCircle, canonicalize: bool = True) -> SuperpositionChannel:
    if not circ.is_canonical():
        if not canonicalize:
            raise ValueError("circle is not canonical (cos mu < 0) and canonicalization is disabled")
        circ = circ.canonical()
    mu, nu, c = circ.mu, circ.nu, circ.c
    if c >= 1.0 - DEFAULT_TOL:
        raise ValueError("c = 1 forces beta = 0; the tangent-point circle has no channel")
    denom = 2.0 + math.cos(mu) - c
    alpha = math.sqrt((1.0 + math.cos(mu)) / denom)
    beta = math.sqrt((1.0 - c) / denom)
    m0 = np.array(
        [
            [0, 0, math.sin(mu / 2) * np.exp(1j * nu), 0],
            [0, 0, -math.cos(mu / 2), 0],
        ],
        dtype=complex,
    )
    lam = (1.0 + math.cos(mu)) / (2.0 * alpha * alpha)
    # M0 sends every live input to the ray of (sin(mu/2) e^{i nu}, -cos(mu/2))
    out = PureQubit.from_amplitudes(math.sin(mu / 2), np.exp(1j * (math.pi - nu)) * math.cos(mu / 2))
    return SuperpositionChannel(KrausOperator(m0), SuperpositionSpec(alpha, beta), lam, circ, out)


def on_circle(ch: SuperpositionChannel, psi: PureQubit, tol: float = DEFAULT_TOL) -> bool:
    return abs(circle_residual(state_to_bloch(psi), ch.circle)) <= tol


def phase_for_state(ch: SuperpositionChannel, psi: PureQubit, tol: float = DEFAULT_TOL) -> float:
    """Phase theta in [0, 2 pi) realizing the superposition for an on-circle state.

    Found by phase matching; zero-output inputs report 0.
    """
    if ch.circle is None:
        raise ValueError("channel carries no circle")
    if not on_circle(ch, psi, tol):
        raise ValueError("state is not on the channel's circle")
    out = apply_kraus(ch.kraus, psi, ZERO)
    report = fit_phase(out, ch.spec, psi, ZERO, tol)
    if report.success_prob == 0.0:
        return 0.0
    if not report.fitted:
        raise RuntimeError(
            f"phase fit failed on the circle (residual {report.residual_norm:.3e}); this is a bug"
        )
    return report.theta


def closed_form_phase(ch: SuperpositionChannel, psi: PureQubit) -> float:
    """``-arctan(cot(mu/2) cot(x/2) csc(nu - y) + cot(nu - y)) - pi/2``.

    Only defined for mu not in {0, pi}, x not in {0, pi}, sin(nu - y) != 0.
    Matches :func:`phase_for_state` modulo pi.
    """
    mu, nu = ch.circle.mu, ch.circle.nu
    x, y = psi.angles
    d = nu - y
    if math.sin(mu / 2) == 0.0 or math.sin(x / 2) == 0.0 or math.sin(d) == 0.0:
        raise ValueError("closed-form phase is singular here")
    cot = lambda t: math.cos(t) / math.sin(t)
    return -math.atan(cot(mu / 2) * cot(x / 2) / math.sin(d) + cot(d)) - math.pi / 2


def success_probability(ch: SuperpositionChannel, psi: PureQubit) -> float:
    out = apply_kraus(ch.kraus, psi, ZERO)
    return float(np.vdot(out, out).real)


def output_point(ch: SuperpositionChannel) -> BlochPoint:
    return state_to_bloch(ch.output_state)


def alternate_channel_example() -> tuple[KrausOperator, SuperpositionSpec, float]:
    """A second channel for the ring Z = -1/2 with a state-dependent output.

    ``M = [[r, 0, 0, 0], [0, 0, -r, 0]]`` with ``r = sqrt(2)/2``, weights
    ``alpha = -r``, ``beta = r`` and phase 0. Every ring input succeeds with
    probability 1/2.
    """
    r = math.sqrt(0.5)
    m = np.array([[r, 0, 0, 0], [0, 0, -r, 0]], dtype=complex)
    return KrausOperator(m), SuperpositionSpec(-r, r), 0.0


def alternate_channel() -> SuperpositionChannel:
    k, spec, _ = alternate_channel_example()
    return SuperpositionChannel(k, spec, 1.0, SphereCircle(0.0, 0.0, 0.5), None)
