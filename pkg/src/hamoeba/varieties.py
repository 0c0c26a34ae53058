"""Surfaces in the unit-determinant group, complex lines in the quadric,
samplers, and the prescribed-growth solution steering construction.

A surface is a polynomial in the four matrix entries restricted to the
quadric det = 1. A line is an affine family ``base + tau * N`` with N of
rank one and ``tr(adj(base) N) = 0``, which keeps the determinant equal
to 1 identically in tau.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hmodel, mat2
from .hmodel import Horosphere

__all__ = [
    "MAX_DEGREE",
    "SurfaceSpec",
    "Line",
    "SteerRequest",
    "SteerResult",
    "ZeroRestrictionError",
    "trace_surface",
    "det_minus_one_surface",
    "make_line",
    "lift_horosphere",
    "horosphere_of_line",
    "restrict_to_line",
    "poly_roots",
    "sample_trace_surface",
    "sample_surface_via_lines",
    "steer",
]

MAX_DEGREE = 6


class ZeroRestrictionError(ValueError):
    """A polynomial restricted to a line vanished identically."""


@dataclass(frozen=True)
class SurfaceSpec:
    """Polynomial equation on 2x2 matrices, as a monomial table.

    ``terms`` maps exponent tuples ``(i, j, k, l)`` for
    ``a11^i a12^j a21^k a22^l`` to complex coefficients.
    """

    terms: dict
    name: str = ""
    param: complex | None = None
    max_degree: int = MAX_DEGREE

    def __post_init__(self):
        clean = {}
        for expo, coeff in self.terms.items():
            expo = tuple(int(e) for e in expo)
            if len(expo) != 4 or min(expo) < 0:
                raise ValueError(f"bad exponent tuple {expo}")
            if sum(expo) > self.max_degree:
                raise ValueError(f"degree {sum(expo)} exceeds maximum {self.max_degree}")
            coeff = complex(coeff)
            if coeff != 0:
                clean[expo] = coeff
        if not clean:
            raise ValueError("surface polynomial is identically zero")
        object.__setattr__(self, "terms", clean)

    @property
    def degree(self) -> int:
        return max(sum(e) for e in self.terms)

    def eval(self, a: np.ndarray) -> np.ndarray:
        """Evaluate on ``(..., 2, 2)`` matrices; |value| is the membership residual."""
        a = np.asarray(a, dtype=complex)
        e11, e12 = a[..., 0, 0], a[..., 0, 1]
        e21, e22 = a[..., 1, 0], a[..., 1, 1]
        out = np.zeros(a.shape[:-2], dtype=complex)
        for (i, j, k, l), coeff in sorted(self.terms.items()):
            out = out + coeff * e11**i * e12**j * e21**k * e22**l
        return out

    def multiply(self, other: "SurfaceSpec") -> "SurfaceSpec":
        """Product polynomial (used as an algebra oracle in tests)."""
        terms: dict = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                key = tuple(x + y for x, y in zip(ea, eb))
                terms[key] = terms.get(key, 0.0) + ca * cb
        return SurfaceSpec(terms=terms, name=f"({self.name})*({other.name})",
                           max_degree=self.max_degree + other.max_degree)


def trace_surface(c: complex) -> SurfaceSpec:
    """The level set {tr A = c}."""
    return SurfaceSpec(
        terms={(1, 0, 0, 0): 1.0, (0, 0, 0, 1): 1.0, (0, 0, 0, 0): -complex(c)},
        name="trace",
        param=complex(c),
    )


def det_minus_one_surface() -> SurfaceSpec:
    """det - 1: degenerate on the quadric (every line lies inside it)."""
    return SurfaceSpec(
        terms={(1, 0, 0, 1): 1.0, (0, 1, 1, 0): -1.0, (0, 0, 0, 0): -1.0},
        name="det-1",
    )


@dataclass(frozen=True)
class Line:
    """Affine line ``base + tau * x y^T`` inside the quadric det = 1.

    x is unit; y carries the in-quadric constraint ``tr(adj(base) x y^T) = 0``
    and is therefore not normalized.
    """

    base: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def direction(self) -> np.ndarray:
        return self.x[:, None] * self.y[None, :]

    def at(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=complex)
        return self.base + tau[..., None, None] * self.direction()


def make_line(base: np.ndarray, x: np.ndarray) -> Line:
    """Line through ``base`` with rank-one direction of column span ``x``.

    ``y = J (adj(base) x)`` with J the bilinear symplectic form, so the
    constraint ``y^T adj(base) x = 0`` cancels to rounding level and
    ``det(base + tau x y^T) = 1`` for all tau up to that residual.
    """
    base = np.asarray(base, dtype=complex)
    if abs(complex(mat2.det(base)) - 1.0) > 1e-10:
        raise ValueError("line base point must have unit determinant")
    x = np.asarray(x, dtype=complex).reshape(2)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("direction seed must be nonzero")
    x = x / nx
    y = mat2.symplectic(mat2.adjugate(base) @ x)
    return Line(base=base, x=x, y=y)


def lift_horosphere(h: Horosphere, twist: np.ndarray | None = None) -> Line:
    """A line whose gram-convention amoeba lies inside the horosphere.

    The base is ``(sqrt(c) w w† + (1/sqrt(c)) (I - w w†)) @ twist`` for a
    unitary ``twist`` (identity by default), and the line direction has
    column span orthogonal to w; then ``w† (A A†) w = c`` along the whole
    line because ``x† w = 0``. Every unitary twist lifts the same
    horosphere; the Hermitian default is the line through the horosphere
    point on the axis through O, while a generic twist is needed when the
    lift must meet a given surface (the Hermitian lift of the axis
    direction has constant trace, for instance).
    """
    rc = np.sqrt(h.c)
    w = h.w
    base = rc * mat2.outer(w, w) + (1.0 / rc) * (np.eye(2) - mat2.outer(w, w))
    if twist is not None:
        twist = np.asarray(twist, dtype=complex)
        base = base @ twist
    return make_line(base, mat2.perp(w))


def horosphere_of_line(line: Line) -> Horosphere:
    """Fit the horosphere containing the line's gram amoeba: w = perp(x),
    c = |base† w|^2."""
    w = mat2.perp(line.x)
    w = w / np.linalg.norm(w)
    bw = np.conj(line.base.T) @ w
    return Horosphere(w=w, c=float(np.vdot(bw, bw).real))


def restrict_to_line(f: SurfaceSpec, line: Line, radius: float = 1.0) -> np.ndarray:
    """Coefficients (ascending) of ``tau -> f(base + tau N)``.

    Evaluates at the ``deg f + 1`` scaled roots of unity and interpolates
    exactly through the inverse DFT; the result has degree <= deg f.
    """
    d = f.degree
    nodes = radius * np.exp(2j * np.pi * np.arange(d + 1) / (d + 1))
    vals = f.eval(line.at(nodes))
    coeffs = np.fft.ifft(vals)
    coeffs /= radius ** np.arange(d + 1)
    return coeffs


def poly_roots(coeffs: np.ndarray, tol: float = 1e-12, max_iter: int = 80) -> np.ndarray:
    """All complex roots (with multiplicity) by simultaneous iteration.

    Aberth-Ehrlich updates from a circle of initial guesses, with a
    residual stopping rule ``|p(z)| <= tol * sum_k |c_k| |z|^k``, then two
    Newton polish steps and one derivative-free correction per root.
    Raises :class:`ZeroRestrictionError` on the identically-zero input
    (a line contained in the surface) and ValueError on degree zero.
    """
    c = np.asarray(coeffs, dtype=complex).copy()
    scale = np.abs(c).max() if c.size else 0.0
    if scale == 0.0:
        raise ZeroRestrictionError("line contained in surface")
    # trailing-zero trim (highest powers) relative to the coefficient scale
    keep = np.nonzero(np.abs(c) > 1e-14 * scale)[0]
    if keep.size == 0:
        raise ZeroRestrictionError("line contained in surface")
    c = c[: keep[-1] + 1]
    deg = c.size - 1
    if deg < 1:
        raise ValueError("polynomial degree must be at least 1 after trimming")

    if deg == 1:
        return np.array([-c[0] / c[1]])

    abs_c = np.abs(c)
    if abs_c[0] > 0:
        r0 = (abs_c[0] / abs_c[-1]) ** (1.0 / deg)
    else:
        r0 = 1.0 + abs_c[:-1].max() / abs_c[-1]
    r0 = max(r0, 1e-12)
    angles = 2.0 * np.pi * np.arange(deg) / deg + 0.4
    z = r0 * np.exp(1j * angles)

    dc = c[1:] * np.arange(1, deg + 1)

    def p_of(zz):
        return np.polyval(c[::-1], zz)

    def dp_of(zz):
        return np.polyval(dc[::-1], zz)

    def residual_ok(zz, pz):
        bound = np.polyval(abs_c[::-1], np.abs(zz))
        return np.abs(pz) <= tol * np.maximum(bound, 1e-300)

    for _ in range(max_iter):
        pz = p_of(z)
        if np.all(residual_ok(z, pz)):
            break
        dpz = dp_of(z)
        dpz = np.where(dpz == 0, 1e-300, dpz)
        newton = pz / dpz
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = (1.0 / diff).sum(axis=1)
        denom = 1.0 - newton * s
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        step = newton / denom
        z = z - np.where(residual_ok(z, pz), 0.0, step)

    # polish: two Newton steps, then one derivative-free simultaneous step
    for _ in range(2):
        pz = p_of(z)
        dpz = dp_of(z)
        safe = np.abs(dpz) > 0
        z = np.where(safe, z - pz / np.where(safe, dpz, 1.0), z)
    pz = p_of(z)
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, 1.0)
    denom = c[-1] * diff.prod(axis=1)
    ok = np.abs(denom) > 0
    correction = np.where(ok, pz / np.where(ok, denom, 1.0), 0.0)
    z_dk = z - correction
    # keep the correction only where it reduced the residual
    improved = np.abs(p_of(z_dk)) < np.abs(pz)
    return np.where(improved, z_dk, z)


def sample_trace_surface(
    c: complex, log_norm_window: tuple, k: int, rng: np.random.Generator
) -> np.ndarray:
    """k points of {tr A = c, det A = 1}.

    Matrices ``[[p, q], [u, c - p]]`` with ``u = (p(c-p) - 1)/q``; p and q
    have log-uniform moduli over the window and uniform phases, so the
    sampled norms span the whole window (the rescaled experiments need
    coverage out to norms e^(cap * s)). The trace is exact by construction
    and the determinant is exact up to one rounding of u.
    """
    if k < 1:
        raise ValueError("need at least one sample")
    lo, hi = float(log_norm_window[0]), float(log_norm_window[1])
    if not lo <= hi:
        raise ValueError("empty log-norm window")
    c = complex(c)
    p = np.exp(rng.uniform(lo, hi, k)) * np.exp(1j * rng.uniform(0, 2 * np.pi, k))
    q = np.exp(rng.uniform(lo, hi, k)) * np.exp(1j * rng.uniform(0, 2 * np.pi, k))
    bad = q == 0
    while np.any(bad):  # practically unreachable; the window keeps |q| > 0
        q[bad] = np.exp(rng.uniform(lo, hi, int(bad.sum()))) * np.exp(
            1j * rng.uniform(0, 2 * np.pi, int(bad.sum()))
        )
        bad = q == 0
    top = p * (c - p) - 1.0
    u = top / q
    out = np.empty((k, 2, 2), dtype=complex)
    out[:, 0, 0] = p
    out[:, 0, 1] = q
    out[:, 1, 0] = u
    out[:, 1, 1] = c - p
    return out


def sample_surface_via_lines(
    f: SurfaceSpec,
    k: int,
    log_norm_window: tuple,
    rng: np.random.Generator,
    residual_tol: float = 1e-9,
    max_lines: int | None = None,
):
    """General-surface sampler: intersect random lines with the surface.

    Draws lines with base points at log-uniform radius and Haar column
    directions, restricts f, and keeps roots whose membership residual is
    below ``residual_tol * (1 + |A|^deg)``. Returns ``(points, flags)``
    where flags note an exhausted retry budget. Propagates
    :class:`ZeroRestrictionError` for surfaces containing the drawn line.
    """
    if f.degree < 1:
        raise ValueError("surface degree must be at least 1")
    if max_lines is None:
        max_lines = max(50, 4 * k)
    points = []
    flags: list[str] = []
    for _ in range(max_lines):
        if len(points) >= k:
            break
        base = mat2.random_sl2(rng, None, log_radius=(log_norm_window[0], log_norm_window[1]))
        x = mat2.haar_unit_vector(rng)
        line = make_line(base, x)
        coeffs = restrict_to_line(f, line)
        try:
            roots = poly_roots(coeffs)
        except ValueError as err:
            if isinstance(err, ZeroRestrictionError):
                raise
            continue
        cand = line.at(roots)
        norms = mat2.frobenius(cand)
        resid = np.abs(f.eval(cand))
        good = resid <= residual_tol * (1.0 + norms**f.degree)
        for a in cand[good]:
            points.append(a)
    if len(points) < k:
        flags.append("retry-budget-exhausted")
    pts = np.array(points[:k]) if points else np.zeros((0, 2, 2), dtype=complex)
    return pts, flags


# ---------------------------------------------------------------------------
# steering


@dataclass(frozen=True)
class SteerRequest:
    """Prescription for a solution with controlled norm growth.

    ``c`` is the trace level (|c| > 2 so the surface avoids the compact
    part), ``image_line`` spans the subspace L that the normalized limit
    should have as image (or kernel), and ``lam >= 1`` scales the log-norm
    target.
    """

    c: complex
    image_line: np.ndarray
    lam: float
    prescribe: str = "image"

    def __post_init__(self):
        if abs(complex(self.c)) <= 2:
            raise ValueError("trace level must satisfy |c| > 2")
        if self.lam < 1:
            raise ValueError("growth exponent must be >= 1")
        if self.prescribe not in ("image", "kernel"):
            raise ValueError("prescribe must be 'image' or 'kernel'")
        l = np.asarray(self.image_line, dtype=complex).reshape(2)
        norm = np.linalg.norm(l)
        if norm == 0:
            raise ValueError("subspace line must be nonzero")
        object.__setattr__(self, "image_line", l / norm)


@dataclass(frozen=True)
class SteerResult:
    B: np.ndarray
    base: np.ndarray
    direction: np.ndarray
    tau: complex
    log_norm_base: float
    log_norm_target: float
    log_norm_actual: float
    trace_residual_rel: float
    det_residual_rel: float
    gap: float
    prescribe: str

    def as_dict(self) -> dict:
        return {
            "B": [[_c2pair(v) for v in row] for row in self.B],
            "tau": _c2pair(self.tau),
            "log_norm_base": self.log_norm_base,
            "log_norm_target": self.log_norm_target,
            "log_norm_actual": self.log_norm_actual,
            "trace_residual_rel": self.trace_residual_rel,
            "det_residual_rel": self.det_residual_rel,
            "gap": self.gap,
            "prescribe": self.prescribe,
        }


def _c2pair(v: complex):
    return [float(np.real(v)), float(np.imag(v))]


def _steer_gap(b: np.ndarray, l: np.ndarray, prescribe: str) -> float:
    """Distance from B/|B| to the rank-one cone with prescribed image
    (column space) or kernel equal to span(l)."""
    bn = b / mat2.frobenius(b)
    proj = mat2.outer(l, l)
    if prescribe == "image":
        return float(mat2.frobenius((np.eye(2) - proj) @ bn))
    return float(mat2.frobenius(bn @ proj))


def _candidate_bases(req: SteerRequest, n_grid: int = 24):
    """Feasible base points on {tr = c} for the direction N = l (J l)^T.

    The feasibility constraint ``tr(adj(A) N) = 0`` is one scalar equation;
    with ``A = [[p, q], [u, c-p]]`` and ``u = (p(c-p)-1)/q`` it becomes a
    quadratic in q for each p, which is scanned over a p-grid. The grid is
    seeded with the two eigen-adapted points ``W diag(lam_pm) W†``
    (W unitary with first column l), which are the minimal-norm feasible
    solutions, one per diagonal order.
    """
    c = complex(req.c)
    l = req.image_line
    m = mat2.symplectic(l)
    lam_hi = (c + np.sqrt(c * c - 4.0 + 0j)) / 2.0
    lam_lo = 1.0 / lam_hi

    w2 = mat2.perp(l)
    w = np.stack([l, w2], axis=-1)  # unitary, first column l
    wh = np.conj(w.T)
    cands = []
    for top, bot in ((lam_hi, lam_lo), (lam_lo, lam_hi)):
        cands.append(w @ np.diag([top, bot]) @ wh)

    # p-grid scan of the quadratic alpha q^2 + beta q + gamma = 0
    alpha = -(m[0] * l[1])
    for p in _p_grid(c, n_grid):
        beta = m[0] * (c - p) * l[0] + p * m[1] * l[1]
        gamma = -(p * (c - p) - 1.0) * m[1] * l[0]
        for q in _quadratic_roots(alpha, beta, gamma):
            if q == 0 or not np.isfinite(q):
                continue
            a = np.array(
                [[p, q], [(p * (c - p) - 1.0) / q, c - p]], dtype=complex
            )
            cands.append(a)
    return cands


def _p_grid(c: complex, n: int):
    """Scan values for the p parameter around the scale of the trace level."""
    mags = np.abs(c) * np.logspace(-3, 0, n // 2)
    phases = np.exp(1j * np.linspace(0, 2 * np.pi, 8, endpoint=False))
    grid = [complex(c) / 2.0]
    for r in mags:
        for ph in phases:
            grid.append(r * ph)
    return grid


def _quadratic_roots(a: complex, b: complex, c: complex):
    if a == 0:
        if b == 0:
            return []
        return [-c / b]
    disc = np.sqrt(b * b - 4.0 * a * c + 0j)
    # stable form: avoid cancellation in the small root
    qq = -(b + disc) / 2.0 if abs(b + disc) >= abs(b - disc) else -(b - disc) / 2.0
    if qq == 0:
        return [0.0, 0.0]
    return [qq / a, c / qq]


def steer(req: SteerRequest) -> SteerResult:
    """Construct a surface solution with prescribed log-norm growth and
    prescribed image (or kernel) of the normalized limit.

    The line direction is ``N = l (J l)^T`` (traceless and rank one, which
    forces image = kernel = span(l)); the base point is the minimal-norm
    feasible solution found by the p-parameter search, preferring — among
    equal norms — the base whose own normalized matrix is already close to
    the prescribed cone. ``tau`` then solves
    ``log |base + tau N| = lam * log |base|`` exactly.
    """
    c = complex(req.c)
    l = req.image_line
    n_dir = l[:, None] * mat2.symplectic(l)[None, :]

    best = None
    for a in _candidate_bases(req):
        tr_resid = abs(a[0, 0] + a[1, 1] - c) / abs(c)
        det_resid = abs(complex(mat2.det(a)) - 1.0)
        constraint = abs(np.trace(mat2.adjugate(a) @ n_dir))
        norm = float(mat2.frobenius(a))
        if tr_resid > 1e-10 or det_resid > 1e-8 * max(1.0, norm**2):
            continue
        if constraint > 1e-8 * max(1.0, norm):
            continue
        gap0 = _steer_gap(a, l, req.prescribe)
        key = (round(norm, 9), gap0)
        if best is None or key < best[0]:
            best = (key, a)
    if best is None:
        raise ValueError("no feasible base point found on the surface")
    base = best[1]

    norm_base = float(mat2.frobenius(base))
    target = req.lam * np.log(norm_base)
    # |base + tau N|^2 is a real quadratic in tau > 0 with unit |N|
    n_norm2 = float(mat2.frobenius(n_dir) ** 2)
    cross = 2.0 * float(np.trace(np.conj(base.T) @ n_dir).real)
    const = norm_base**2 - np.exp(2.0 * target)
    disc = cross * cross - 4.0 * n_norm2 * const
    tau = max((-cross + np.sqrt(max(disc, 0.0))) / (2.0 * n_norm2), 0.0)

    b = base + tau * n_dir
    norm_b = float(mat2.frobenius(b))
    return SteerResult(
        B=b,
        base=base,
        direction=n_dir,
        tau=complex(tau),
        log_norm_base=float(np.log(norm_base)),
        log_norm_target=float(target),
        log_norm_actual=float(np.log(norm_b)),
        trace_residual_rel=float(abs(b[0, 0] + b[1, 1] - c) / abs(c)),
        det_residual_rel=float(abs(complex(mat2.det(b)) - 1.0) / max(1.0, norm_b**2)),
        gap=_steer_gap(b, l, req.prescribe),
        prescribe=req.prescribe,
    )
