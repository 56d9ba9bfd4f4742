"""Pure qubit states, Bloch sphere points and circles on the sphere.

Angle convention: a pure state is written

    |psi> = cos(x/2)|0> + exp(-i y) sin(x/2)|1>,   x in [0, pi], y in [0, 2 pi)

and mapped to the Bloch point (X, Y, Z) = (sin x cos y, sin x sin y, cos x).
Because of the minus sign in the phase, Y = -2 Im(conj(a0) a1), the opposite
of the usual physics convention.

Circles are stored through (mu, nu, c), the plane

    Z cos(mu) + X sin(mu) cos(nu) + Y sin(mu) sin(nu) + c = 0

intersected with the unit sphere.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .linalg import DEFAULT_TOL

TWO_PI = 2.0 * math.pi
# |a0| below this is treated as the south pole when fixing the global phase
_POLE_EPS = 1e-15
# tolerance used to decide whether a circle is in canonical orientation
_CANON_TOL = 1e-12


def _wrap(angle: float) -> float:
    w = math.fmod(angle, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    return 0.0 if w >= TWO_PI else w


@dataclass(frozen=True)
class PureQubit:
    """Normalized qubit amplitudes in canonical global phase.

    Canonical form: ``a0`` is real and nonnegative; at the south pole
    (``a0 == 0``) ``a1 == 1``. Construct through :meth:`from_amplitudes`
    or :meth:`from_angles` to get canonicalization for free.
    """

    a0: complex
    a1: complex

    def __post_init__(self):
        norm2 = abs(self.a0) ** 2 + abs(self.a1) ** 2
        if not math.isfinite(norm2) or abs(norm2 - 1.0) > DEFAULT_TOL:
            raise ValueError(f"state is not normalized: |a0|^2 + |a1|^2 = {norm2}")

    @classmethod
    def from_amplitudes(cls, a0: complex, a1: complex, normalize: bool = False) -> "PureQubit":
        a0, a1 = complex(a0), complex(a1)
        if normalize:
            n = math.hypot(abs(a0), abs(a1))
            if n == 0.0:
                raise ValueError("cannot normalize the zero vector")
            a0, a1 = a0 / n, a1 / n
        if abs(a0) > _POLE_EPS:
            ph = a0 / abs(a0)
            a0, a1 = complex(abs(a0), 0.0), a1 / ph
        elif abs(a1) > 0.0:
            a0, a1 = 0j, complex(abs(a1), 0.0)
        return cls(a0, a1)

    @classmethod
    def from_vector(cls, v, normalize: bool = False) -> "PureQubit":
        v = np.asarray(v, dtype=complex)
        if v.shape != (2,):
            raise ValueError(f"qubit vector must have shape (2,), got {v.shape}")
        return cls.from_amplitudes(v[0], v[1], normalize=normalize)

    @classmethod
    def from_angles(cls, x: float, y: float) -> "PureQubit":
        return cls.from_amplitudes(math.cos(x / 2), np.exp(-1j * y) * math.sin(x / 2))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a0, self.a1], dtype=complex)

    @property
    def angles(self) -> tuple[float, float]:
        """(x, y); y is pinned to 0 at both poles."""
        x = 2.0 * math.atan2(abs(self.a1), abs(self.a0))
        if abs(self.a1) == 0.0 or abs(self.a0) <= _POLE_EPS:
            return x, 0.0
        # a1 carries exp(-i y) relative to the real a0
        rel = self.a1 * np.conj(self.a0)
        return x, _wrap(-math.atan2(rel.imag, rel.real))


ZERO = PureQubit(1.0 + 0j, 0j)
ONE = PureQubit(0j, 1.0 + 0j)


@dataclass(frozen=True)
class BlochPoint:
    X: float
    Y: float
    Z: float

    def __post_init__(self):
        n2 = self.X**2 + self.Y**2 + self.Z**2
        if abs(n2 - 1.0) > DEFAULT_TOL:
            raise ValueError(f"point is not on the unit sphere: |p|^2 = {n2}")

    @classmethod
    def normalized(cls, X: float, Y: float, Z: float) -> "BlochPoint":
        n = math.sqrt(X * X + Y * Y + Z * Z)
        if n == 0.0:
            raise ValueError("cannot normalize the origin")
        return cls(X / n, Y / n, Z / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z])


def state_to_bloch(psi: PureQubit) -> BlochPoint:
    a0, a1 = complex(psi.a0), complex(psi.a1)
    rel = np.conj(a0) * a1
    X = 2.0 * rel.real
    Y = -2.0 * rel.imag
    Z = abs(a0) ** 2 - abs(a1) ** 2
    return BlochPoint.normalized(X, Y, Z)


def bloch_to_state(p: BlochPoint) -> PureQubit:
    X, Y, Z = p.X, p.Y, p.Z
    n = math.sqrt(X * X + Y * Y + Z * Z)
    X, Y, Z = X / n, Y / n, Z / n
    rho = math.hypot(X, Y)  # sin x
    # pick the larger half-angle factor from Z, derive the other from sin x
    if Z >= 0.0:
        a0 = math.sqrt(0.5 * (1.0 + Z))
        s = rho / (2.0 * a0)
    else:
        s = math.sqrt(0.5 * (1.0 - Z))
        a0 = rho / (2.0 * s)
    if rho == 0.0:
        return ZERO if Z > 0 else ONE
    # exp(-i y) sin x = X - i Y
    phase = complex(X, -Y) / rho
    return PureQubit.from_amplitudes(a0, phase * s, normalize=True)


def states_to_bloch(vecs: np.ndarray) -> np.ndarray:
    """Vectorized :func:`state_to_bloch` for an ``(N, 2)`` amplitude array."""
    vecs = np.asarray(vecs, dtype=complex)
    rel = vecs[:, 0].conj() * vecs[:, 1]
    norm2 = np.abs(vecs[:, 0]) ** 2 + np.abs(vecs[:, 1]) ** 2
    pts = np.stack(
        [2.0 * rel.real, -2.0 * rel.imag, np.abs(vecs[:, 0]) ** 2 - np.abs(vecs[:, 1]) ** 2],
        axis=1,
    )
    return pts / norm2[:, None]


def bloch_to_states(points: np.ndarray) -> np.ndarray:
    """Vectorized :func:`bloch_to_state`; returns an ``(N, 2)`` array with real a0 >= 0."""
    pts = np.asarray(points, dtype=float)
    pts = pts / np.linalg.norm(pts, axis=1)[:, None]
    X, Y, Z = pts[:, 0], pts[:, 1], pts[:, 2]
    rho = np.hypot(X, Y)
    upper = Z >= 0.0
    a0 = np.where(upper, np.sqrt(0.5 * (1.0 + Z)), 0.0)
    s = np.where(upper, 0.0, np.sqrt(0.5 * (1.0 - Z)))
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(upper, rho / (2.0 * a0), s)
        a0 = np.where(upper, a0, rho / (2.0 * s))
        phase = np.where(rho > 0.0, (X - 1j * Y) / rho, 1.0)
    out = np.stack([a0.astype(complex), phase * s], axis=1)
    return out / np.linalg.norm(out, axis=1)[:, None]


def states_from_angles(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.stack([np.cos(x / 2).astype(complex), np.exp(-1j * y) * np.sin(x / 2)], axis=-1)


@dataclass(frozen=True)
class SphereCircle:
    """Plane ``n . (Z, X, Y) + c = 0`` with unit normal
    ``n = (cos mu, sin mu cos nu, sin mu sin nu)``, cut with the unit sphere.

    ``(mu, nu, c)`` and ``(pi - mu, nu + pi, -c)`` describe the same circle;
    :meth:`canonical` picks the representative with ``cos mu > 0``, or with
    the first nonzero (X, Y) normal component positive when ``cos mu == 0``.
    """

    mu: float
    nu: float
    c: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.mu, self.nu, self.c)):
            raise ValueError("circle parameters must be finite")
        if abs(self.c) > 1.0 + _CANON_TOL:
            raise ValueError(f"empty locus: plane offset |c| = {abs(self.c)} exceeds 1")

    @classmethod
    def from_plane(cls, nx: float, ny: float, nz: float, d: float) -> "SphereCircle":
        """Circle of the plane ``nx X + ny Y + nz Z + d = 0`` (any normal length)."""
        norm = math.sqrt(nx * nx + ny * ny + nz * nz)
        if norm == 0.0:
            raise ValueError("plane normal must be nonzero")
        mu = math.atan2(math.hypot(nx, ny), nz)
        nu = math.atan2(ny, nx) if math.hypot(nx, ny) > 0.0 else 0.0
        return cls(float(mu), float(nu), float(d) / norm).canonical()

    @property
    def normal_zxy(self) -> np.ndarray:
        s = math.sin(self.mu)
        return np.array([math.cos(self.mu), s * math.cos(self.nu), s * math.sin(self.nu)])

    @property
    def normal(self) -> np.ndarray:
        """Unit normal in (X, Y, Z) order."""
        s = math.sin(self.mu)
        return np.array([s * math.cos(self.nu), s * math.sin(self.nu), math.cos(self.mu)])

    @property
    def radius(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.c * self.c))

    @property
    def center(self) -> np.ndarray:
        return -self.c * self.normal

    def is_canonical(self) -> bool:
        return self == self.canonical()

    def canonical(self) -> "SphereCircle":
        mu = _wrap(self.mu)
        nu = self.nu
        c = self.c
        if mu > math.pi:
            # sin(2 pi - mu) = -sin(mu) is absorbed by rotating nu by pi
            mu = TWO_PI - mu
            nu += math.pi
        cz = math.cos(mu)
        flip = cz < -_CANON_TOL
        if not flip and abs(cz) <= _CANON_TOL:
            s = math.sin(mu)
            cx, cy = s * math.cos(nu), s * math.sin(nu)
            if abs(cx) > _CANON_TOL:
                flip = cx < 0.0
            else:
                flip = cy < 0.0
        if flip:
            mu, nu, c = math.pi - mu, nu + math.pi, -c
        if math.sin(mu) <= _CANON_TOL:
            nu = 0.0
        c = 0.0 if c == 0.0 else c
        return SphereCircle(mu, _wrap(nu), c)

    def isclose(self, other: "SphereCircle", tol: float = DEFAULT_TOL) -> bool:
        """Same circle up to orientation, comparing unit normals and offsets."""
        n1, n2 = self.normal, other.normal
        if np.max(np.abs(n1 - n2)) <= tol and abs(self.c - other.c) <= tol:
            return True
        return bool(np.max(np.abs(n1 + n2)) <= tol and abs(self.c + other.c) <= tol)

    def to_json(self) -> dict:
        return {"mu": self.mu, "nu": self.nu, "c": self.c}

    @classmethod
    def from_json(cls, data: dict) -> "SphereCircle":
        return cls(float(data["mu"]), float(data["nu"]), float(data["c"]))


def circle_residual(p: BlochPoint, circ: SphereCircle) -> float:
    sm = math.sin(circ.mu)
    return (
        p.Z * math.cos(circ.mu)
        + p.X * sm * math.cos(circ.nu)
        + p.Y * sm * math.sin(circ.nu)
        + circ.c
    )


def circle_residuals(points: np.ndarray, circ: SphereCircle) -> np.ndarray:
    """Vectorized :func:`circle_residual` for an ``(N, 3)`` array of (X, Y, Z)."""
    return np.asarray(points, dtype=float) @ circ.normal + circ.c


def _plane_basis(circ: SphereCircle) -> tuple[np.ndarray, np.ndarray]:
    # built from the angles, not the normal: dividing tiny normal components
    # by their hypot loses precision (subnormal mu)
    cm, sm = math.cos(circ.mu), math.sin(circ.mu)
    cn, sn = math.cos(circ.nu), math.sin(circ.nu)
    return np.array([cm * cn, cm * sn, -sm]), np.array([-sn, cn, 0.0])


def circle_point_array(circ: SphereCircle, n: int) -> np.ndarray:
    """``n`` points equally spaced in angle around the circle, as an ``(n, 3)`` array."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if abs(circ.c) > 1.0:
        if abs(circ.c) > 1.0 + _CANON_TOL:
            raise ValueError("empty locus")
    u, v = _plane_basis(circ)
    t = TWO_PI * np.arange(n) / n
    pts = circ.center + circ.radius * (np.cos(t)[:, None] * u + np.sin(t)[:, None] * v)
    # project back onto the sphere and the plane to shave rounding error
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    return pts


def circle_points(circ: SphereCircle, n: int) -> list[BlochPoint]:
    return [BlochPoint.normalized(*row) for row in circle_point_array(circ, n)]


SAMPLE_CHUNK = 1 << 18


def iter_sphere_chunks(n: int, seed: int, chunk: int = SAMPLE_CHUNK) -> Iterator[np.ndarray]:
    """Uniform points on the sphere as ``(m, 3)`` chunks.

    Chunk ``k`` draws from its own child of ``SeedSequence(seed)``, so the
    stream does not depend on how callers consume it. Z and the azimuth are
    independent uniforms, which is area-uniform by the hat-box theorem.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    n_chunks = -(-n // chunk)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    for k, child in enumerate(children):
        m = min(chunk, n - k * chunk)
        rng = np.random.default_rng(child)
        # one (z, phi) pair per row keeps shorter runs a prefix of longer ones
        u = rng.random((m, 2))
        z = 2.0 * u[:, 0] - 1.0
        phi = TWO_PI * u[:, 1]
        rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        yield np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


def sample_sphere_array(n: int, seed: int) -> np.ndarray:
    if n == 0:
        return np.empty((0, 3))
    return np.concatenate(list(iter_sphere_chunks(n, seed)), axis=0)


def sample_sphere(n: int, seed: int) -> list[BlochPoint]:
    return [BlochPoint.normalized(*row) for row in sample_sphere_array(n, seed)]


def write_points_csv(path, points, extra: dict[str, np.ndarray] | None = None) -> None:
    """CSV dump with header ``X,Y,Z`` (plus any extra columns), 17 significant digits."""
    arr = np.array(
        [p.as_array() if isinstance(p, BlochPoint) else np.asarray(p, dtype=float) for p in points]
    ).reshape(-1, 3)
    extra = extra or {}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["X", "Y", "Z", *extra])
        for i, row in enumerate(arr):
            cols = [format(v, ".17g") for v in row]
            cols += [format(float(col[i]), ".17g") for col in extra.values()]
            writer.writerow(cols)


def read_points_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return np.array([[float(r["X"]), float(r["Y"]), float(r["Z"])] for r in reader]).reshape(-1, 3)
