"""Monte Carlo area fractions on the Bloch sphere."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import binomtest

from .bloch import ZERO, PureQubit, SphereCircle, bloch_to_states, circle_residuals, iter_sphere_chunks
from .superposition import CPMap, KrausOperator, SuperpositionSpec, superposable_mask


@dataclass(frozen=True)
class FractionEstimate:
    hits: int
    n: int
    ci95: tuple[float, float]
    expected: Optional[float] = None

    @property
    def fraction(self) -> float:
        return self.hits / self.n

    @property
    def sigma(self) -> float:
        """Binomial standard error at the expected (or estimated) rate."""
        q = self.expected if self.expected is not None else self.fraction
        return float(np.sqrt(q * (1.0 - q) / self.n))

    def to_json(self) -> dict:
        return {"fraction": self.fraction, "ci95": list(self.ci95), "expected": self.expected}


def _estimate(hits: int, n: int, expected: Optional[float] = None) -> FractionEstimate:
    ci = binomtest(hits, n).proportion_ci(confidence_level=0.95, method="wilson")
    return FractionEstimate(hits, n, (float(ci.low), float(ci.high)), expected)


def zone_fraction(circ: SphereCircle, eps: float) -> float:
    """Exact area fraction of ``|n . p + c| < eps`` on the unit sphere.

    The band is the zone between two parallel planes clipped to the sphere;
    by the hat-box theorem its area is 2 pi times the clipped height.
    """
    lo = max(-1.0, -circ.c - eps)
    hi = min(1.0, -circ.c + eps)
    return max(0.0, hi - lo) / 2.0


def band_fraction(circ: SphereCircle, eps: float, n: int, seed: int) -> FractionEstimate:
    if eps <= 0 or n < 1:
        raise ValueError("need eps > 0 and n >= 1")
    hits = 0
    for pts in iter_sphere_chunks(n, seed):
        hits += int(np.count_nonzero(np.abs(circle_residuals(pts, circ)) < eps))
    expected = eps if abs(circ.c) + eps <= 1.0 else zone_fraction(circ, eps)
    return _estimate(hits, n, expected)


def superposable_fraction(
    cp,
    spec: SuperpositionSpec,
    tol: float,
    n: int,
    seed: int,
    phi0: PureQubit = ZERO,
) -> FractionEstimate:
    """Fraction of uniformly sampled states the map superposes with ``phi0``."""
    if tol <= 0 or n < 1:
        raise ValueError("need tol > 0 and n >= 1")
    if isinstance(cp, KrausOperator):
        cp = CPMap.single(cp)
    hits = 0
    for pts in iter_sphere_chunks(n, seed):
        hits += int(np.count_nonzero(superposable_mask(cp, spec, bloch_to_states(pts), phi0, tol)))
    return _estimate(hits, n)
