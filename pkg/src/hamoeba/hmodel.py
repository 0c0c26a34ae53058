"""Matrix model of hyperbolic 3-space (and its plane reduction).

A point is a Hermitian positive-definite 2x2 matrix of determinant 1,
stored as a ``(..., 2, 2)`` complex ndarray; the base point O is the
identity. Distance is the log of the top eigenvalue of ``P^-1 Q``,
computed stably as ``arccosh(tau/2)`` with ``tau = Re tr(adj(P) Q)``
(valid because det P = 1). Rescaling toward O is the matrix power
``P -> P^(1/s)``.

The upper-half-space chart, the associated half-plane point map for
real symmetric matrices, Busemann functions and horospheres are all
here; they feed the separation-estimate checker in :mod:`hamoeba.lab`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import mat2
from .mat2 import Projector2

__all__ = [
    "ORIGIN",
    "Horosphere",
    "LemmaConfig",
    "BallBoundarySample",
    "origin",
    "check_hpoint",
    "renormalize",
    "pack",
    "unpack",
    "distance",
    "distance_to_origin",
    "pairwise_distance",
    "geodesic_from_origin",
    "rescale",
    "busemann",
    "sphere_sample",
    "circle_sample_h2",
    "to_uhs",
    "from_uhs",
    "uhs_distance",
    "uhp_point",
    "closed_form_im",
    "type_ab_sample",
    "hopf_direction",
    "direction_to_unit",
    "fibonacci_directions",
]

_EYE = np.eye(2, dtype=complex)

ORIGIN = np.eye(2, dtype=complex)
ORIGIN.setflags(write=False)

#: tau values beyond this are handled in the log domain, where
#: arccosh(tau/2) = log(tau) to double precision.
_LOG_DOMAIN_TAU = 2e150
#: tau this close to 2 is indistinguishable from coincident points at
#: double precision (the arccosh path loses half the digits near 1).
_COINCIDENT_RTOL = 1e-12


def origin() -> np.ndarray:
    """A writable copy of the base point O (the identity matrix)."""
    return np.eye(2, dtype=complex)


def check_hpoint(p: np.ndarray, det_tol: float = 1e-9) -> None:
    """Validate the point invariants: Hermitian, p11 > 0, det within tol of 1."""
    p = np.asarray(p, dtype=complex)
    if not mat2.is_hermitian(p):
        raise ValueError("point matrix is not Hermitian")
    if not np.all(p[..., 0, 0].real > 0):
        raise ValueError("point matrix is not positive-definite")
    drift = np.abs(mat2.det(p).real - 1.0)
    if not np.all(drift <= det_tol):
        raise ValueError(f"point determinant drifts from 1 by {drift.max():.3e}")


def renormalize(p: np.ndarray) -> np.ndarray:
    """Divide by sqrt(det) so the determinant is 1 again after drift.

    At norms beyond ~1e8 the determinant of a unit-determinant matrix is
    pure cancellation noise in doubles; entries there are left untouched
    (such points sit far outside every cap and their distances do not
    depend on determinant precision).
    """
    d = mat2.det(p).real
    sane = (d > 0.0625) & (d < 16.0)
    factor = np.sqrt(np.where(sane, d, 1.0))
    return p / factor[..., None, None]


def pack(p: np.ndarray) -> np.ndarray:
    """Pack Hermitian points into real rows [p11, Re p12, Im p12, p22]."""
    p = np.asarray(p, dtype=complex)
    return np.stack(
        [p[..., 0, 0].real, p[..., 0, 1].real, p[..., 0, 1].imag, p[..., 1, 1].real],
        axis=-1,
    )


def unpack(rows: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pack`."""
    rows = np.asarray(rows, dtype=float)
    out = np.empty(rows.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = rows[..., 0]
    out[..., 0, 1] = rows[..., 1] + 1j * rows[..., 2]
    out[..., 1, 0] = rows[..., 1] - 1j * rows[..., 2]
    out[..., 1, 1] = rows[..., 3]
    return out


def _acosh_half(tau: np.ndarray) -> np.ndarray:
    """arccosh(tau/2) with clamping at 2 and a log-domain fallback."""
    tau = np.asarray(tau, dtype=float)
    t = np.clip(tau, 2.0, None)
    d = np.arccosh(0.5 * t)
    d = np.where(t > _LOG_DOMAIN_TAU, np.log(t), d)
    return np.where(t <= 2.0 * (1.0 + _COINCIDENT_RTOL), 0.0, d)


def _tau(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Re tr(adj(P) Q) from Hermitian entries; symmetric bit-for-bit."""
    p11 = p[..., 0, 0].real
    p22 = p[..., 1, 1].real
    q11 = q[..., 0, 0].real
    q22 = q[..., 1, 1].real
    cross = (
        p[..., 0, 1].real * q[..., 0, 1].real + p[..., 0, 1].imag * q[..., 0, 1].imag
    )
    return p11 * q22 + p22 * q11 - 2.0 * cross


def distance(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hyperbolic distance between points of the matrix model.

    Symmetric to the bit, zero exactly on coincident points, and valid
    for tau up to 1e300 through the log-domain fallback.
    """
    return _acosh_half(_tau(np.asarray(p, complex), np.asarray(q, complex)))


def distance_to_origin(p: np.ndarray) -> np.ndarray:
    """d(O, P) = arccosh(tr(P)/2)."""
    p = np.asarray(p, dtype=complex)
    return _acosh_half(p[..., 0, 0].real + p[..., 1, 1].real)


def pairwise_distance(rows_a: np.ndarray, rows_b: np.ndarray) -> np.ndarray:
    """Distance matrix between packed point rows: shape (n, m).

    Operates on :func:`pack` output so the nearest-neighbor engines can
    share one kernel (and therefore agree bit-for-bit).
    """
    a = np.asarray(rows_a, dtype=float)
    b = np.asarray(rows_b, dtype=float)
    tau = (
        np.outer(a[:, 0], b[:, 3])
        + np.outer(a[:, 3], b[:, 0])
        - 2.0 * (np.outer(a[:, 1], b[:, 1]) + np.outer(a[:, 2], b[:, 2]))
    )
    return _acosh_half(tau)


def geodesic_from_origin(u: np.ndarray, t) -> np.ndarray:
    """Unit-speed geodesic through O with direction ``u``:
    ``e^t u u† + e^-t (I - u u†)``.
    """
    u = np.asarray(u, dtype=complex)
    t = np.asarray(t, dtype=float)
    proj = mat2.outer(u, u)
    hi = np.asarray(np.exp(t), dtype=complex)[..., None, None]
    lo = np.asarray(np.exp(-t), dtype=complex)[..., None, None]
    return hi * proj + lo * (_EYE - proj)


def geodesic_rows(u: np.ndarray, t) -> np.ndarray:
    """Packed-row form of :func:`geodesic_from_origin` (for bulk pipelines
    that never need the complex matrices)."""
    u = np.asarray(u, dtype=complex)
    t = np.asarray(t, dtype=float)
    a1 = np.abs(u[..., 0]) ** 2
    a2 = np.abs(u[..., 1]) ** 2
    hi, lo = np.exp(t), np.exp(-t)
    cross = (hi - lo) * (u[..., 0] * np.conj(u[..., 1]))
    return np.stack([hi * a1 + lo * a2, cross.real, cross.imag, hi * a2 + lo * a1], axis=-1)


def rescale(p: np.ndarray, s: float) -> np.ndarray:
    """Contraction toward O by factor s: ``P -> P^(1/s)``.

    Fixes O, divides distances from O by s, and preserves the direction
    (top eigenvector) of every point. The spectral reconstruction uses
    the model constraint det = 1 (lambda_lo := 1/lambda_hi), which keeps
    the power well-defined even where the determinant of an extreme point
    has degraded to rounding noise, and makes the output determinant
    exactly 1 by construction.
    """
    if s <= 0:
        raise ValueError("rescaling factor must be positive")
    if s == 1.0:
        return np.array(p, dtype=complex, copy=True)
    lam_hi, _, u = mat2.herm_eigen(p, check=False)
    hi = np.asarray(lam_hi, dtype=float) ** (1.0 / s)
    proj = mat2.outer(u, u)
    hi_c = np.asarray(hi, dtype=complex)[..., None, None]
    lo_c = np.asarray(1.0 / hi, dtype=complex)[..., None, None]
    return hi_c * proj + lo_c * (_EYE - proj)


def busemann(w: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Busemann function ``log(w† P w)`` for a unit covector ``w``.

    Vanishes at O for every w, is 1-Lipschitz in P, and its level sets
    are the horospheres centered at the ideal point in direction
    ``perp(w)``.
    """
    w = np.asarray(w, dtype=complex)
    p = np.asarray(p, dtype=complex)
    val = np.einsum("...i,...ij,...j->...", np.conj(w), p, w).real
    return np.log(val)


def sphere_sample(center: np.ndarray, radius: float, k: int, rng: np.random.Generator):
    """Sample the distance sphere around ``center``.

    Points are ``C^(1/2) (e^r u u† + e^-r (I - u u†)) C^(1/2)`` with u
    Haar-uniform, which puts every sample at distance ``radius`` exactly.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if k < 1:
        raise ValueError("need at least one sample")
    u = mat2.haar_unit_vector(rng, k)
    shell = geodesic_from_origin(u, np.full(k, float(radius)))
    center = np.asarray(center, dtype=complex)
    if np.allclose(center, _EYE, atol=0, rtol=0):
        pts = shell
    else:
        half = mat2.spd_power(center, 0.5, check=False)
        pts = renormalize(half @ shell @ half)
    return BallBoundarySample(center=np.array(center), radius=float(radius), points=pts)


def circle_sample_h2(center: np.ndarray, radius: float, k: int) -> np.ndarray:
    """Deterministic grid on a circle boundary in the plane reduction.

    Real symmetric points only (the rotational-symmetry slice). The grid
    angles are ``j*pi/k``; with even k the grid contains the direction
    pointing straight away from the ideal point, which the separation
    estimate needs to hit exactly.
    """
    if k < 2 or k % 2:
        raise ValueError("k must be even and >= 2")
    theta = np.arange(k) * (np.pi / k)
    u = np.stack([np.cos(theta), np.sin(theta)], axis=-1).astype(complex)
    shell = geodesic_from_origin(u, np.full(k, float(radius)))
    center = np.asarray(center, dtype=complex)
    if np.allclose(center, _EYE, atol=0, rtol=0):
        return shell
    half = mat2.spd_power(center, 0.5, check=False)
    return renormalize(half @ shell @ half)


# ---------------------------------------------------------------------------
# charts


def to_uhs(p: np.ndarray):
    """Upper-half-space coordinates ``z = p12/p22, h = 1/p22``.

    This is the image of the chart base point under any A with
    ``A A† = P``; the pulled-back distance agrees with :func:`distance`.
    """
    p = np.asarray(p, dtype=complex)
    p22 = p[..., 1, 1].real
    return p[..., 0, 1] / p22, 1.0 / p22


def from_uhs(z: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Rebuild the determinant-1 Hermitian point from chart coordinates."""
    z = np.asarray(z, dtype=complex)
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise ValueError("height must be positive")
    out = np.empty(np.broadcast(z, h).shape + (2, 2), dtype=complex)
    out[..., 1, 1] = 1.0 / h
    out[..., 0, 1] = z / h
    out[..., 1, 0] = np.conj(z) / h
    out[..., 0, 0] = h + (z * np.conj(z)).real / h
    return out


def uhs_distance(z1, h1, z2, h2) -> np.ndarray:
    """Half-space model distance
    ``arccosh(1 + (|z1-z2|^2 + (h1-h2)^2) / (2 h1 h2))``."""
    z1, z2 = np.asarray(z1, complex), np.asarray(z2, complex)
    h1, h2 = np.asarray(h1, float), np.asarray(h2, float)
    num = np.abs(z1 - z2) ** 2 + (h1 - h2) ** 2
    return _acosh_half(2.0 + num / (h1 * h2))


def uhp_point(m: np.ndarray, *, check: bool = True):
    """Half-plane point of a real SPD determinant-1 matrix.

    Applying the Moebius transformation of ``M = [[A,B],[B,C]]`` to i
    gives ``(B(A+C) + i) / (B^2 + C^2)``; returns ``(re, im)``.
    """
    m = np.asarray(m)
    a = m[..., 0, 0].real
    b = m[..., 0, 1].real
    c = m[..., 1, 1].real
    if check:
        if np.any(np.abs(np.asarray(m, complex)[..., 0, 1].imag) > 1e-10):
            raise ValueError("matrix must be real symmetric")
        if np.any(a <= 0) or np.any(a * c - b * b <= 0):
            raise ValueError("matrix must be positive-definite")
    denom = b * b + c * c
    return b * (a + c) / denom, 1.0 / denom


def closed_form_im(proj: Projector2, r, s) -> np.ndarray:
    """Height of the half-plane point of ``M^s`` without forming ``M^s``.

    For ``M = e^r P1 + e^-r P2`` with rank-one projector ``P1 = [[a,b],[b,c]]``
    the height is ``1 / (e^(2rs)(c^2+ac) + e^(-2rs)(a^2+ac))``: the numerator
    of the Moebius image is ``(a+c)^2 = det M = 1`` because orthonormal
    projector algebra gives ``a + c = 1`` and ``b^2 = ac``. Since
    ``c^2+ac = c`` and ``a^2+ac = a``, the denominator is a convex mix of
    ``e^(2rs)`` and ``e^(-2rs)``, so the value is bounded below by
    ``e^(-2rs)`` for every projector — the uniform decay floor. The floor
    is attained at a = 0; numerically the bound therefore holds up to the
    projector-entry rounding (~1e-12) near that boundary.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    if np.any(s < 0):
        raise ValueError("s must be nonnegative")
    a, c = proj.a, proj.c
    e = np.exp(2.0 * r * s)
    return 1.0 / (e * (c * c + a * c) + (1.0 / e) * (a * a + a * c))


# ---------------------------------------------------------------------------
# reference limit sets


def type_ab_sample(u: np.ndarray, r: float, r_cap: float, kind: str, k: int) -> np.ndarray:
    """Deterministic samples of the two candidate line-limit sets.

    Kind "A" is the closed geodesic ray segment ``{gamma_u(t): r <= t <= r_cap}``;
    kind "B" adds the sphere of radius r about O (Fibonacci directions).
    """
    if not 0 <= r <= r_cap:
        raise ValueError("need 0 <= r <= r_cap")
    if kind not in ("A", "B"):
        raise ValueError("kind must be 'A' or 'B'")
    ts = np.linspace(r, r_cap, k)
    ray = geodesic_from_origin(np.broadcast_to(u, (k, 2)), ts)
    if kind == "A":
        return ray
    if r == 0:
        return ray
    dirs = direction_to_unit(fibonacci_directions(k))
    sphere = geodesic_from_origin(dirs, np.full(k, float(r)))
    return np.concatenate([ray, sphere], axis=0)


# ---------------------------------------------------------------------------
# visual-sphere utilities


def hopf_direction(u: np.ndarray) -> np.ndarray:
    """Map a unit vector in C^2 to S^2: phase-invariant direction chart."""
    u = np.asarray(u, dtype=complex)
    cross = u[..., 0] * np.conj(u[..., 1])
    return np.stack(
        [
            2.0 * cross.real,
            2.0 * cross.imag,
            np.abs(u[..., 0]) ** 2 - np.abs(u[..., 1]) ** 2,
        ],
        axis=-1,
    )


def direction_to_unit(n: np.ndarray) -> np.ndarray:
    """Right inverse of :func:`hopf_direction` (a section of the phase circle)."""
    n = np.asarray(n, dtype=float)
    z = np.clip(n[..., 2], -1.0, 1.0)
    half = 0.5 * np.arccos(z)
    phi = np.arctan2(n[..., 1], n[..., 0])
    return np.stack(
        [np.cos(half).astype(complex), np.sin(half) * np.exp(-1j * phi)], axis=-1
    )


def fibonacci_directions(n: int) -> np.ndarray:
    """n near-equal-area direction bins on S^2 (Fibonacci lattice)."""
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    golden = np.pi * (3.0 - np.sqrt(5.0))
    phi = golden * i
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


# ---------------------------------------------------------------------------
# structured values


@dataclass(frozen=True)
class Horosphere:
    """Level set ``{P : w† P w = c}`` for a unit covector w and level c > 0.

    Contains O iff c = 1; the center at infinity is the direction
    ``perp(w)``. The contracting family advances the level as
    ``c_t = c e^(-2(t-1))``: the lift of the level set to a line in the
    unit-determinant quadric follows a matrix geodesic whose group
    parameter moves the Busemann value at rate -2, so this is unit speed
    in the lifted parametrization.
    """

    w: np.ndarray
    c: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex).reshape(2)
        norm = np.linalg.norm(w)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError("defining covector must be a unit vector")
        if self.c <= 0:
            raise ValueError("level must be positive")
        object.__setattr__(self, "w", w)

    def level_value(self, p: np.ndarray) -> np.ndarray:
        """``w† P w``; equals c exactly on the horosphere."""
        p = np.asarray(p, dtype=complex)
        return np.einsum("...i,...ij,...j->...", np.conj(self.w), p, self.w).real

    def center_direction(self) -> np.ndarray:
        return mat2.perp(self.w)

    def contracted(self, t: float) -> "Horosphere":
        """Member H_t of the contracting family, H_1 = self."""
        return Horosphere(self.w, self.c * float(np.exp(-2.0 * (t - 1.0))))


@dataclass(frozen=True)
class LemmaConfig:
    """Geometry of the two-ball separation experiment.

    ``d`` is the distance from the off-center ball's center Q to O,
    ``epsilon`` its radius, ``rho`` the radius of the ball about O.
    The recorded hypothesis ``epsilon + rho > d`` is validated here but
    is not what makes the horocycle crossing feasible; the checker
    reports the crossing (or its absence) as data.
    """

    d: float
    epsilon: float
    rho: float

    def __post_init__(self):
        if min(self.d, self.epsilon, self.rho) <= 0:
            raise ValueError("all lengths must be positive")
        if not self.epsilon + self.rho > self.d:
            raise ValueError("configuration requires epsilon + rho > d")


@dataclass(frozen=True)
class BallBoundarySample:
    """Sampled boundary sphere of a metric ball."""

    center: np.ndarray
    radius: float
    points: np.ndarray = field(repr=False)

    def distances_to_center(self) -> np.ndarray:
        return distance(self.center, self.points)
