"""Closed-form linear algebra for complex 2x2 matrices.

Everything here is batched: a "matrix" argument is an ndarray of shape
``(..., 2, 2)`` and scalar results come back with the leading shape.
The spectral routines solve the trace/determinant quadratic in closed
form instead of calling a general eigensolver; at the 1e6-call scale of
the sampling loops this is faster and keeps the error model simple.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HERMITIAN_RTOL",
    "DEGENERATE_GAP",
    "Projector2",
    "det",
    "adjugate",
    "frobenius",
    "outer",
    "perp",
    "symplectic",
    "is_hermitian",
    "herm_eigen",
    "spd_power",
    "svd2",
    "haar_su2",
    "haar_unit_vector",
    "random_sl2",
]

HERMITIAN_RTOL = 1e-10
# Below this relative spectral gap the eigenvector is ambiguous; any unit
# vector is valid and e1 is returned by convention.
DEGENERATE_GAP = 1e-14

_EYE = np.eye(2, dtype=complex)


def det(a: np.ndarray) -> np.ndarray:
    """Determinant of ``(..., 2, 2)`` matrices."""
    return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]


def adjugate(a: np.ndarray) -> np.ndarray:
    """Adjugate (classical adjoint): ``adjugate(a) @ a = det(a) * I``."""
    out = np.empty_like(np.asarray(a, dtype=complex))
    out[..., 0, 0] = a[..., 1, 1]
    out[..., 1, 1] = a[..., 0, 0]
    out[..., 0, 1] = -a[..., 0, 1]
    out[..., 1, 0] = -a[..., 1, 0]
    return out


def frobenius(a: np.ndarray) -> np.ndarray:
    """Frobenius norm over the last two axes."""
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def outer(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Hermitian outer product ``u v†`` for ``(..., 2)`` vectors."""
    return u[..., :, None] * np.conj(v)[..., None, :]


def perp(u: np.ndarray) -> np.ndarray:
    """Hermitian-orthogonal complement of a 2-vector, same norm.

    ``<u, perp(u)>`` cancels to a rounding-level residual (vectorized
    complex products do not commute bitwise, so it is not an exact zero).
    """
    u = np.asarray(u, dtype=complex)
    return np.stack([-np.conj(u[..., 1]), np.conj(u[..., 0])], axis=-1)


def symplectic(u: np.ndarray) -> np.ndarray:
    """Apply the bilinear symplectic form J = [[0,-1],[1,0]]: ``u -> J u``.

    ``(J v)^T v`` vanishes identically, which is what the in-quadric
    line construction needs; numerically it cancels to rounding level.
    """
    u = np.asarray(u, dtype=complex)
    return np.stack([-u[..., 1], u[..., 0]], axis=-1)


def is_hermitian(h: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    dev = frobenius(h - np.conj(np.swapaxes(h, -1, -2)))
    scale = np.maximum(frobenius(h), 1.0)
    return bool(np.all(dev <= rtol * scale))


def _require_hermitian(h: np.ndarray, rtol: float) -> None:
    if not is_hermitian(h, rtol):
        raise ValueError("matrix is not Hermitian within tolerance")


def herm_eigen(h: np.ndarray, *, check: bool = True):
    """Eigen-decomposition of Hermitian 2x2 matrices.

    Parameters
    ----------
    h : ndarray, shape (..., 2, 2)
        Hermitian matrices (within ``HERMITIAN_RTOL`` relative).
    check : bool
        Skip the hermiticity check when the caller guarantees it.

    Returns
    -------
    lam_hi, lam_lo : ndarray, shape (...)
        Real eigenvalues, ``lam_hi >= lam_lo``.
    u : ndarray, shape (..., 2)
        Unit eigenvector for ``lam_hi``. Built from the larger-residual
        row of ``h - lam_hi I`` to avoid cancellation; on a relative
        spectral gap below ``DEGENERATE_GAP`` the convention is e1.
    """
    h = np.asarray(h, dtype=complex)
    if check:
        _require_hermitian(h, HERMITIAN_RTOL)
    # pre-scale by the largest entry so no intermediate product can
    # overflow, even at norms ~1e300 (the uncapped sampling tails)
    s0 = np.maximum.reduce(np.abs(h), axis=(-2, -1))
    s0 = np.where(s0 > 0, s0, 1.0)
    h11 = h[..., 0, 0].real / s0
    h22 = h[..., 1, 1].real / s0
    h12 = h[..., 0, 1] / s0
    mean = 0.5 * (h11 + h22)
    # hypot form of sqrt(tr^2/4 - det): immune to cancellation
    disc = np.hypot(0.5 * (h11 - h22), np.abs(h12))
    # the root on mean's side of zero is safe to form by addition; the other
    # one comes from the determinant product to dodge the cancellation that
    # would zero out 1/lam on ill-conditioned inputs
    big = mean + np.copysign(disc, mean)
    dete = h11 * h22 - np.abs(h12) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        other = np.where(big != 0.0, dete / np.where(big != 0.0, big, 1.0), mean - disc)
    lam_hi = s0 * np.maximum(big, other)
    lam_lo = s0 * np.minimum(big, other)

    # candidate eigenvectors from each row of (h - lam I), in scaled units
    lam = np.maximum(big, other)
    row1_sq = (h11 - lam) ** 2 + np.abs(h12) ** 2
    row2_sq = np.abs(h12) ** 2 + (h22 - lam) ** 2
    use_row1 = row1_sq >= row2_sq
    u1 = np.where(use_row1, h12, lam - h22)
    u2 = np.where(use_row1, lam - h11, np.conj(h12))

    degenerate = (2.0 * disc) <= DEGENERATE_GAP * np.maximum(
        np.maximum(np.abs(big), np.abs(other)), 1.0
    )
    u1 = np.where(degenerate, 1.0 + 0.0j, u1)
    u2 = np.where(degenerate, 0.0 + 0.0j, u2)
    norm = np.sqrt(np.abs(u1) ** 2 + np.abs(u2) ** 2)
    u = np.stack([u1 / norm, u2 / norm], axis=-1)
    return lam_hi, lam_lo, u


def spd_power(p: np.ndarray, t, *, check: bool = True) -> np.ndarray:
    """Real matrix power of Hermitian positive-definite matrices.

    ``spd_power(p, 1) == p`` and ``spd_power(p, 0) == I`` up to rounding;
    the semigroup law ``spd_power(spd_power(p, s), t) = spd_power(p, s*t)``
    holds to ~1e-10.
    """
    p = np.asarray(p, dtype=complex)
    lam_hi, lam_lo, u = herm_eigen(p, check=check)
    if check and not np.all(lam_lo > 0):
        raise ValueError("matrix is not positive-definite")
    t = np.asarray(t, dtype=float)
    proj = outer(u, u)
    hi = np.asarray(lam_hi**t, dtype=complex)[..., None, None]
    lo = np.asarray(lam_lo**t, dtype=complex)[..., None, None]
    return hi * proj + lo * (_EYE - proj)


def svd2(a: np.ndarray):
    """Singular values and top left-singular vector of 2x2 matrices.

    Returns ``(sigma_hi, sigma_lo, u)`` with ``sigma_hi >= sigma_lo`` and
    ``u`` the top eigenvector of ``a a†``. Raises on the zero matrix.
    """
    a = np.asarray(a, dtype=complex)
    gram = a @ np.conj(np.swapaxes(a, -1, -2))
    lam_hi, lam_lo, u = herm_eigen(gram, check=False)
    if np.any(lam_hi <= 0):
        raise ValueError("svd2 is undefined for the zero matrix")
    sigma_hi = np.sqrt(lam_hi)
    sigma_lo = np.sqrt(np.clip(lam_lo, 0.0, None))
    return sigma_hi, sigma_lo, u


def haar_su2(rng: np.random.Generator, size=None) -> np.ndarray:
    """Haar-random SU(2) matrices via normalized Gaussian quaternions."""
    shape = () if size is None else (size,) if np.isscalar(size) else tuple(size)
    q = rng.standard_normal(shape + (4,))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    alpha = q[..., 0] + 1j * q[..., 1]
    beta = q[..., 2] + 1j * q[..., 3]
    out = np.empty(shape + (2, 2), dtype=complex)
    out[..., 0, 0] = alpha
    out[..., 0, 1] = beta
    out[..., 1, 0] = -np.conj(beta)
    out[..., 1, 1] = np.conj(alpha)
    return out


def haar_unit_vector(rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform unit vectors in C^2 (the S^3 round measure)."""
    shape = () if size is None else (size,) if np.isscalar(size) else tuple(size)
    g = rng.standard_normal(shape + (4,))
    g /= np.linalg.norm(g, axis=-1, keepdims=True)
    return np.stack([g[..., 0] + 1j * g[..., 1], g[..., 2] + 1j * g[..., 3]], axis=-1)


def random_sl2(rng: np.random.Generator, size=None, log_radius=(-1.5, 1.5)) -> np.ndarray:
    """Random unit-determinant matrices ``U1 diag(e^t, e^-t) U2``.

    ``t`` is uniform over ``log_radius``, so the top singular value is
    log-uniform over the corresponding window.
    """
    shape = () if size is None else (size,) if np.isscalar(size) else tuple(size)
    t = rng.uniform(log_radius[0], log_radius[1], shape)
    u1 = haar_su2(rng, size)
    u2 = haar_su2(rng, size)
    d = np.zeros(shape + (2, 2), dtype=complex)
    d[..., 0, 0] = np.exp(t)
    d[..., 1, 1] = np.exp(-t)
    return u1 @ d @ u2


@dataclass(frozen=True)
class Projector2:
    """Entries (a, b, c) of a real rank-one orthogonal projector [[a,b],[b,c]].

    Orthonormal-projector algebra forces ``a + c = 1`` and ``b^2 = a c``;
    both are validated at construction. The complementary projector is
    ``[[c,-b],[-b,a]]``.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.a < -1e-12 or self.c < -1e-12:
            raise ValueError("projector diagonal entries must be nonnegative")
        if abs(self.a + self.c - 1.0) > 1e-12:
            raise ValueError("projector trace must be 1")
        if abs(self.b * self.b - self.a * self.c) > 1e-12:
            raise ValueError("projector must be rank one (b^2 = a*c)")

    @classmethod
    def from_angle(cls, theta: float) -> "Projector2":
        ct, st = np.cos(theta), np.sin(theta)
        return cls(ct * ct, ct * st, st * st)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b, self.c]], dtype=float)

    def complement(self) -> np.ndarray:
        return np.array([[self.c, -self.b], [-self.b, self.a]], dtype=float)
