"""Quotient map to hyperbolic space, amoeba point clouds, and the exact
trace-surface oracle.

Two normalizations of the quotient are supported and always recorded:

* ``polar``: ``A -> sqrt(A A†)``, so ``d(O, .) = log sigma_1(A)``;
* ``gram``: ``A -> A A†``, so ``d(O, .) = 2 log sigma_1(A)``.

They differ by the dilation with factor 2 centered at O. ``polar`` is the
default because it makes the trace family realize its radius on the nose;
``gram`` is the convention under which line images are exactly horospheres.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hmodel, mat2

__all__ = [
    "CONVENTIONS",
    "PointCloud",
    "RadialProfile",
    "kappa",
    "project_cloud",
    "rescale_cloud",
    "radial_profile",
    "trace_oracle_rmin",
    "trace_oracle_member",
]

CONVENTIONS = ("polar", "gram")


def _check_convention(conv: str) -> str:
    if conv not in CONVENTIONS:
        raise ValueError(f"unknown convention {conv!r}; expected one of {CONVENTIONS}")
    return conv


def kappa(a: np.ndarray, conv: str = "polar", det_tol: float = 1e-9) -> np.ndarray:
    """Quotient map of unit-determinant matrices into the matrix model.

    ``gram`` returns ``A A†`` renormalized to determinant 1. ``polar``
    returns ``sqrt(A A†)`` through the Cayley-Hamilton square root
    ``(A A† + I) / sqrt(tr(A A†) + 2)``, which needs no eigenvectors.

    The determinant gate scales with the squared matrix norm: at norm
    ``e^30`` a double-precision determinant cannot be closer to 1 than
    roundoff times that scale.
    """
    _check_convention(conv)
    a = np.asarray(a, dtype=complex)
    scale = 1.0 + np.sum(np.abs(a) ** 2, axis=(-2, -1))
    drift = np.abs(mat2.det(a) - 1.0) / scale
    if np.any(drift > det_tol):
        raise ValueError(f"input determinant drifts from 1 by {drift.max():.3e} (norm-relative)")
    gram = a @ np.conj(np.swapaxes(a, -1, -2))
    if conv == "gram":
        return hmodel.renormalize(gram)
    trace = gram[..., 0, 0].real + gram[..., 1, 1].real
    root = (gram + np.eye(2)) / np.sqrt(trace + 2.0)[..., None, None]
    return hmodel.renormalize(root)


@dataclass
class PointCloud:
    """Amoeba samples in the matrix model plus their provenance."""

    points: np.ndarray = field(repr=False)
    convention: str = "polar"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_convention(self.convention)
        self.points = np.asarray(self.points, dtype=complex).reshape(-1, 2, 2)

    def __len__(self) -> int:
        return self.points.shape[0]

    def packed(self) -> np.ndarray:
        return hmodel.pack(self.points)

    def radii(self) -> np.ndarray:
        return hmodel.distance_to_origin(self.points)


def project_cloud(samples: np.ndarray, conv: str = "polar", meta: dict | None = None,
                  det_tol: float = 1e-9) -> PointCloud:
    """Apply the quotient map pointwise to matrix samples."""
    pts = kappa(samples, conv, det_tol=det_tol)
    return PointCloud(points=pts, convention=conv, meta=dict(meta or {}))


def rescale_cloud(cloud: PointCloud, s: float) -> PointCloud:
    """Contract a cloud toward O by factor s, recording s in the metadata."""
    pts = hmodel.rescale(cloud.points, s)
    meta = dict(cloud.meta)
    meta["s"] = float(s)
    return PointCloud(points=pts, convention=cloud.convention, meta=meta)


@dataclass
class RadialProfile:
    """Per-direction-bin minimum distances from O, over Fibonacci bins."""

    bin_min: np.ndarray
    bin_counts: np.ndarray
    r_min: float

    @property
    def occupied(self) -> np.ndarray:
        return self.bin_counts > 0

    def spread(self) -> float:
        """Max minus min of the occupied bin minima."""
        vals = self.bin_min[self.occupied]
        return float(vals.max() - vals.min())


def radial_profile(cloud: PointCloud, bins: int = 256) -> RadialProfile:
    """Directional minimum-radius profile of a cloud.

    The direction of a point is the Hopf image of its top eigenvector;
    points are assigned to the nearest of ``bins`` Fibonacci-lattice
    direction centers.
    """
    if len(cloud) == 0:
        raise ValueError("cannot profile an empty cloud")
    _, _, u = mat2.herm_eigen(cloud.points, check=False)
    dirs = hmodel.hopf_direction(u)
    centers = hmodel.fibonacci_directions(bins)
    # nearest center by max inner product; chunked to bound memory
    radii = cloud.radii()
    bin_min = np.full(bins, np.inf)
    bin_counts = np.zeros(bins, dtype=np.int64)
    step = 1 << 16
    for lo in range(0, len(cloud), step):
        sl = slice(lo, lo + step)
        idx = np.argmax(dirs[sl] @ centers.T, axis=1)
        np.minimum.at(bin_min, idx, radii[sl])
        np.add.at(bin_counts, idx, 1)
    return RadialProfile(bin_min=bin_min, bin_counts=bin_counts, r_min=float(radii.min()))


# ---------------------------------------------------------------------------
# exact amoeba of the trace family (polar convention)
#
# For P at distance r from O, the trace values attainable over {P U : U in
# SU(2)} form the filled ellipse with semi-axes 2 cosh r (real direction)
# and 2 sinh r (imaginary): writing P = diag(e^r, e^-r) up to conjugation
# and U = [[alpha, beta], [-conj(beta), conj(alpha)]],
#   tr(P U) = 2 cosh(r) Re(alpha) + 2i sinh(r) Im(alpha),  |alpha| <= 1.
# The brute-force validation of this is in the test suite; membership of a
# point in the amoeba of {tr = c} depends only on its radius.


def _ellipse_gap(c: complex, r: float) -> float:
    """(Re c / 2cosh r)^2 + (Im c / 2sinh r)^2 - 1, i.e. <= 0 iff inside."""
    re2 = (c.real / (2.0 * np.cosh(r))) ** 2
    if c.imag == 0.0:
        return re2 - 1.0
    if r == 0.0:
        return np.inf
    return re2 + (c.imag / (2.0 * np.sinh(r))) ** 2 - 1.0


def trace_oracle_rmin(c: complex, tol: float = 1e-12) -> float:
    """Radius of the ball whose complement is the polar amoeba of {tr = c}.

    Smallest r >= 0 with the ellipse condition satisfied; 0 when c lies in
    [-2, 2] on the real axis. Solved by bisection to ``tol``.
    """
    c = complex(c)
    if _ellipse_gap(c, 0.0) <= 0.0:
        return 0.0
    hi = 1.0
    while _ellipse_gap(c, hi) > 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise RuntimeError("failed to bracket the amoeba radius")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _ellipse_gap(c, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def trace_oracle_member(c: complex, p: np.ndarray) -> np.ndarray:
    """Exact membership of polar-model points in the amoeba of {tr = c}."""
    c = complex(c)
    r = np.atleast_1d(hmodel.distance_to_origin(p))
    re2 = (c.real / (2.0 * np.cosh(r))) ** 2
    if c.imag == 0.0:
        out = re2 <= 1.0
    else:
        with np.errstate(divide="ignore"):
            im2 = (c.imag / (2.0 * np.sinh(r))) ** 2
        out = re2 + im2 <= 1.0
    if np.asarray(hmodel.distance_to_origin(p)).ndim == 0:
        return bool(out[0])
    return out
