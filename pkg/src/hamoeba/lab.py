"""Experiment runners assembling the geometric kernel into the headline
claims: rescaled-amoeba convergence runs, the two-ball separation
estimate checker, line/horosphere verification, and the contracting
horosphere sweep.

Everything is deterministic given (config, seed); worker counts only
chunk pure pointwise transforms, so outputs are bit-identical for any
worker count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import amoeba, hdist, hmodel, mat2, varieties
from .amoeba import PointCloud
from .hmodel import Horosphere, LemmaConfig
from .rng import SampleStream

__all__ = [
    "FamilySpec",
    "LimitRow",
    "LimitSeries",
    "LemmaReport",
    "LineHorosphereReport",
    "SweepRecord",
    "tropical_limit_run",
    "lemma_check",
    "verify_line_horosphere",
    "horosphere_sweep",
]

LIMIT_CSV_HEADER = "n,s_n,samples,r_min_rescaled,hausdorff_to_shell,flags"


#: fixed work-unit size for chunked pipelines; never derived from the
#: worker count, so outputs are bit-identical for any parallelism
_CHUNK = 1 << 20


def _indexed_map(fn, n_items: int, workers: int):
    """Evaluate ``fn(chunk_index, size)`` over fixed-size chunks and
    concatenate in index order; worker count only affects speed."""
    sizes = [min(_CHUNK, n_items - lo) for lo in range(0, n_items, _CHUNK)]
    if workers <= 1 or len(sizes) == 1:
        out = [fn(i, size) for i, size in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(fn, range(len(sizes)), sizes))
    return np.concatenate(out, axis=0)


# ---------------------------------------------------------------------------
# rescaled-limit runs


@dataclass(frozen=True)
class FamilySpec:
    """Built-in surface families for the limit experiments.

    * ``trace-pow``: trace level ``n**r`` — rescaled amoebas converge to
      the complement of the ball of radius r;
    * ``trace-exp``: trace level ``e**n`` — the rescaled sequence leaves
      every cap ("empty" limit);
    * ``trace-const``: fixed trace level — the limit fills the whole space.
    """

    kind: str = "trace-pow"
    r: float = 1.0
    c: complex = 3.0 + 0j

    def __post_init__(self):
        if self.kind not in ("trace-pow", "trace-exp", "trace-const"):
            raise ValueError(f"unknown family kind {self.kind!r}")

    def trace_level(self, n: int) -> complex:
        if self.kind == "trace-pow":
            return complex(float(n) ** self.r)
        if self.kind == "trace-exp":
            return complex(np.exp(float(n)))
        return complex(self.c)

    def reference_radius(self, n: int, s_n: float) -> float:
        """Inner radius of the predicted limit shell at this n.

        The finite-n oracle radius for the growing families; for a
        constant family the predicted limit is the whole space, so the
        reference is the full cap ball.
        """
        if self.kind == "trace-const":
            return 0.0
        return amoeba.trace_oracle_rmin(self.trace_level(n)) / s_n

    def label(self) -> str:
        if self.kind == "trace-pow":
            return f"trace-pow(r={self.r})"
        if self.kind == "trace-exp":
            return "trace-exp"
        return f"trace-const(c={self.c})"


@dataclass(frozen=True)
class LimitRow:
    n: int
    s_n: float
    samples: int
    r_min_rescaled: float
    hausdorff_to_shell: float
    flags: tuple = ()
    oracle_r_min_rescaled: float = float("nan")
    below_oracle_count: int = 0
    in_cap_count: int = 0
    bin_spread: float = float("nan")


@dataclass
class LimitSeries:
    rows: list
    family: str = ""
    convention: str = "polar"
    cap: float = 3.0
    seed: int = 0

    def to_csv(self) -> str:
        lines = [LIMIT_CSV_HEADER]
        for row in self.rows:
            lines.append(
                ",".join(
                    [
                        str(row.n),
                        repr(row.s_n),
                        str(row.samples),
                        repr(row.r_min_rescaled),
                        repr(row.hausdorff_to_shell),
                        ";".join(row.flags),
                    ]
                )
            )
        return "\n".join(lines) + "\n"


def _per_n_counts(value, n_list, name):
    if np.isscalar(value):
        return [int(value)] * len(n_list)
    counts = [int(v) for v in value]
    if len(counts) != len(n_list):
        raise ValueError(f"{name} list must match n_list")
    return counts


def _scaling_values(scaling, n_list):
    if scaling == "log":
        vals = [float(np.log(n)) for n in n_list]
    elif callable(scaling):
        vals = [float(scaling(n)) for n in n_list]
    else:
        vals = [float(s) for s in scaling]
        if len(vals) != len(n_list):
            raise ValueError("explicit scaling list must match n_list")
    if any(s <= 0 for s in vals):
        raise ValueError("scaling values must be positive (n >= 2 for log scaling)")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError("scaling sequence must be strictly increasing")
    return vals


def tropical_limit_run(
    family: FamilySpec,
    n_list,
    scaling="log",
    cap: float = 3.0,
    samples: int = 20000,
    conv: str = "polar",
    seed: int = 0,
    shell_samples: int | None = None,
    window_pad: float = 2.0,
    workers: int = 1,
    profile_bins: int = 256,
) -> LimitSeries:
    """Sample, project, rescale, and compare against the predicted shell.

    For each n: draw ``samples`` points of the trace surface over a
    log-norm window wide enough to cover the cap after rescaling, apply
    the quotient map and the contraction by s_n, record the measured
    minimum rescaled radius and the capped Hausdorff distance to the
    reference shell. A row is flagged "empty-in-cap" when no sample
    survives the cap.
    """
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    sample_list = _per_n_counts(samples, n_list, "samples")
    if min(sample_list) < 1000:
        raise ValueError("need at least 1e3 samples per run")
    shell_list = _per_n_counts(
        samples if shell_samples is None else shell_samples, n_list, "shell_samples"
    )
    s_vals = _scaling_values(scaling, n_list)
    stream = SampleStream(seed)
    conv_factor = 1.0 if conv == "polar" else 2.0

    rows = []
    for n, s_n, samples, shell_samples in zip(n_list, s_vals, sample_list, shell_list):
        c_n = family.trace_level(n)
        window = (-(cap * s_n + window_pad), cap * s_n + window_pad)

        def sample_radii(i, size):
            mats = varieties.sample_trace_surface(
                c_n, window, size, stream.generator(f"surface-n{n}", index=i)
            )
            return hmodel.distance_to_origin(amoeba.kappa(mats, conv, det_tol=1e-9))

        radii0 = _indexed_map(sample_radii, samples, workers)
        oracle = conv_factor * amoeba.trace_oracle_rmin(c_n)
        below = int(np.sum(radii0 < oracle - conv_factor * 1e-9))

        # The trace surface is invariant under unitary conjugation, which the
        # quotient map turns into the rotation about O; the (p, q)
        # parametrization is directionally biased toward the coordinate axes
        # at large norms. Each projected point is therefore rotated to a Haar
        # direction. Doing it on direction/radius form (keep the radius,
        # redraw the direction) realizes the exact same rotation measure
        # while leaving every radius bit-identical, so the oracle lower bound
        # is untouched; the rescaling by s_n is then exact arithmetic on the
        # radii.
        dirs = mat2.haar_unit_vector(stream.generator(f"rotate-n{n}"), samples)
        radii = radii0 / s_n
        in_cap_mask = radii <= cap
        in_cap = int(np.sum(in_cap_mask))
        flags: list[str] = []
        r_min = float(radii.min())
        spread = float("nan")
        if in_cap == 0:
            flags.append("empty-in-cap")
            value = float("inf")
        else:
            r_ref = family.reference_radius(n, s_n)
            if r_ref >= cap:
                flags.append("reference-outside-cap")
                value = float("inf")
            else:
                cloud_rows = hmodel.geodesic_rows(dirs[in_cap_mask], radii[in_cap_mask])
                shell_gen = stream.generator(f"shell-n{n}")
                shell_dirs = mat2.haar_unit_vector(shell_gen, shell_samples)
                shell_radii = shell_gen.uniform(r_ref, cap, shell_samples)
                shell_rows = hmodel.geodesic_rows(shell_dirs, shell_radii)
                report = hdist.hausdorff_capped(cloud_rows, shell_rows, cap)
                flags.extend(report.flags)
                value = report.value
                spread = _direction_bin_spread(
                    dirs[in_cap_mask], radii[in_cap_mask], profile_bins
                )
        rows.append(
            LimitRow(
                n=n,
                s_n=s_n,
                samples=samples,
                r_min_rescaled=r_min,
                hausdorff_to_shell=value,
                flags=tuple(flags),
                oracle_r_min_rescaled=oracle / s_n,
                below_oracle_count=below,
                in_cap_count=in_cap,
                bin_spread=spread,
            )
        )
    return LimitSeries(rows=rows, family=family.label(), convention=conv, cap=cap, seed=seed)


def _direction_bin_spread(dirs: np.ndarray, radii: np.ndarray, bins: int) -> float:
    """Spread of per-direction-bin minimum radii (profile machinery on the
    direction/radius form the run already holds)."""
    centers = hmodel.fibonacci_directions(bins)
    n_hat = hmodel.hopf_direction(dirs)
    bin_min = np.full(bins, np.inf)
    step = 1 << 16
    for lo in range(0, n_hat.shape[0], step):
        idx = np.argmax(n_hat[lo : lo + step] @ centers.T, axis=1)
        np.minimum.at(bin_min, idx, radii[lo : lo + step])
    vals = bin_min[np.isfinite(bin_min)]
    return float(vals.max() - vals.min()) if vals.size else float("nan")


# ---------------------------------------------------------------------------
# two-ball separation estimate


@dataclass
class LemmaReport:
    """Measured decay of the rescaled boundary height against the
    reference floor of the ball about O."""

    config: LemmaConfig
    s_grid: list
    mu: list
    reference: list
    rho_boundary_min_im: list
    sigma_hat: float | None
    crossing_found: bool
    decay_rate_fit: float
    fit_window: tuple
    k: int
    seed: int

    def as_dict(self) -> dict:
        return {
            "config": {"d": self.config.d, "epsilon": self.config.epsilon, "rho": self.config.rho},
            "s_grid": list(self.s_grid),
            "mu": list(self.mu),
            "reference": list(self.reference),
            "rho_boundary_min_im": list(self.rho_boundary_min_im),
            "sigma_hat": self.sigma_hat,
            "crossing_found": self.crossing_found,
            "decay_rate_fit": self.decay_rate_fit,
            "fit_window": list(self.fit_window),
            "k": self.k,
            "seed": self.seed,
        }


def _powered_min_im(boundary: np.ndarray, s: float) -> float:
    """Minimum half-plane height of the boundary points raised to the s-th
    power, through the spectral data of the (real symmetric) points."""
    lam_hi, lam_lo, u = mat2.herm_eigen(boundary, check=False)
    proj = mat2.outer(u, u)
    eye = np.eye(2, dtype=complex)
    powered = (lam_hi**s)[:, None, None] * proj + (lam_lo**s)[:, None, None] * (eye - proj)
    _, im = hmodel.uhp_point(powered.real, check=False)
    return float(im.min())


def lemma_check(cfg: LemmaConfig, s_grid, k: int = 4096, seed: int = 0) -> LemmaReport:
    """Plane-reduction check of the separation estimate.

    Works on the rotational-symmetry slice: deterministic circle grids on
    the boundary of the ball of radius epsilon about Q (at distance d from
    O along the first axis) and of the ball of radius rho about O. For
    each s the boundaries are magnified by the matrix power s and pushed
    through the half-plane chart; ``mu_s`` is the minimum height of the
    rescaled epsilon-boundary, and the rho-boundary minimum is compared
    against its closed form ``e^(-2 rho s)``. ``sigma_hat`` is the first
    grid point after which ``mu_s`` stays below the reference floor; the
    absence of a crossing is a reported outcome, not an error.

    The grids are deterministic (even k hits the extremal directions
    exactly); the seed is recorded for provenance only.
    """
    s_grid = [float(s) for s in s_grid]
    if not s_grid or any(s <= 0 for s in s_grid):
        raise ValueError("s grid must be positive")
    if any(b <= a for a, b in zip(s_grid, s_grid[1:])):
        raise ValueError("s grid must be strictly increasing")
    k = int(k)
    if k % 2:
        k += 1

    e1 = np.array([1.0, 0.0], dtype=complex)
    q_center = hmodel.geodesic_from_origin(e1, cfg.d)
    bnd_eps = hmodel.circle_sample_h2(q_center, cfg.epsilon, k)
    bnd_rho = hmodel.circle_sample_h2(hmodel.origin(), cfg.rho, k)

    mu, rho_min = [], []
    for s in s_grid:
        mu.append(_powered_min_im(bnd_eps, s))
        rho_min.append(_powered_min_im(bnd_rho, s))
    reference = [float(np.exp(-2.0 * cfg.rho * s)) for s in s_grid]

    below = [m < ref for m, ref in zip(mu, reference)]
    sigma_hat = None
    for i in range(len(s_grid)):
        if all(below[i:]):
            sigma_hat = s_grid[i]
            break

    half = 0.5 * (s_grid[0] + s_grid[-1])
    sel = [i for i, s in enumerate(s_grid) if s >= half]
    if len(sel) < 2:
        sel = list(range(len(s_grid)))
    slope = float(
        np.polyfit([s_grid[i] for i in sel], [np.log(mu[i]) for i in sel], 1)[0]
    )
    return LemmaReport(
        config=cfg,
        s_grid=s_grid,
        mu=mu,
        reference=reference,
        rho_boundary_min_im=rho_min,
        sigma_hat=sigma_hat,
        crossing_found=sigma_hat is not None,
        decay_rate_fit=slope,
        fit_window=(s_grid[sel[0]], s_grid[-1]),
        k=k,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# line / horosphere verification


@dataclass(frozen=True)
class LineHorosphereReport:
    max_rel_residual: float
    polar_busemann_spread: float
    lines: int
    tau_count: int


def verify_line_horosphere(
    count: int = 100,
    tau_count: int = 1000,
    seed: int = 0,
    log_tau_max: float = 3.0,
) -> LineHorosphereReport:
    """Measure how exactly the gram-convention image of a line sits on its
    fitted horosphere.

    For each random line the covector is the Hermitian complement of the
    direction's column span and the level is forced by the base point; the
    reported figure is the worst relative deviation of ``w† (A A†) w``
    from the level over the parameter grid. As a convention diagnostic,
    the same sweep under the polar map records how far the Busemann value
    wanders (it is not constant there).
    """
    stream = SampleStream(seed)
    rng = stream.generator("line-horosphere")
    moduli = np.logspace(-log_tau_max, log_tau_max, tau_count)
    worst = 0.0
    spread = 0.0
    for _ in range(count):
        base = mat2.random_sl2(rng)
        x = mat2.haar_unit_vector(rng)
        line = varieties.make_line(base, x)
        h = varieties.horosphere_of_line(line)
        taus = moduli * np.exp(1j * rng.uniform(0, 2 * np.pi, tau_count))
        pts = line.at(taus)
        gram = pts @ np.conj(np.swapaxes(pts, -1, -2))
        resid = np.abs(h.level_value(gram) - h.c) / h.c
        worst = max(worst, float(resid.max()))

        small = np.abs(taus) <= 10.0
        if np.any(small):
            polar = amoeba.kappa(pts[small], "polar", det_tol=1e-6)
            vals = hmodel.busemann(h.w, polar)
            spread = max(spread, float(vals.max() - vals.min()))
    return LineHorosphereReport(
        max_rel_residual=worst,
        polar_busemann_spread=spread,
        lines=count,
        tau_count=tau_count,
    )


# ---------------------------------------------------------------------------
# contracting horosphere sweep


_DEFAULT_TWIST = np.array(
    [[np.cos(1.0), np.sin(1.0)], [-np.sin(1.0), np.cos(1.0)]], dtype=complex
)


@dataclass(frozen=True)
class SweepRecord:
    t: float
    level: float
    root_count: int
    roots: tuple
    norms: tuple
    escaped: tuple
    busemann_values: tuple
    flags: tuple = ()


def horosphere_sweep(
    f: varieties.SurfaceSpec,
    h0: Horosphere,
    t_grid,
    norm_bound: float = 1e8,
    conv: str = "gram",
    twist: np.ndarray | None = None,
) -> list:
    """Track surface intersections along a contracting horosphere family.

    For each t the level set is contracted (``c_t = c0 e^(-2(t-1))``),
    lifted to a line, and the surface restricted to the line is solved for
    all roots. Roots whose matrices exceed ``norm_bound`` are flagged as
    escaped to infinity. A restriction that vanishes identically raises
    (the line lies inside the surface); a nonzero constant restriction
    yields a no-intersection record.
    """
    if twist is None:
        twist = _DEFAULT_TWIST
    records = []
    for t in t_grid:
        t = float(t)
        h_t = h0.contracted(t)
        line = varieties.lift_horosphere(h_t, twist=twist)
        coeffs = varieties.restrict_to_line(f, line)
        try:
            roots = varieties.poly_roots(coeffs)
        except varieties.ZeroRestrictionError:
            raise
        except ValueError:
            records.append(
                SweepRecord(
                    t=t, level=h_t.c, root_count=0, roots=(), norms=(),
                    escaped=(), busemann_values=(), flags=("no-intersection",),
                )
            )
            continue
        pts = line.at(roots)
        norms = mat2.frobenius(pts)
        escaped = norms > norm_bound
        flags = ("escaped-to-infinity",) if bool(np.any(escaped)) else ()
        amoeba_pts = amoeba.kappa(pts, conv, det_tol=1e-6 * (1.0 + float(norms.max()) ** 2))
        bus = hmodel.busemann(h_t.w, amoeba_pts)
        records.append(
            SweepRecord(
                t=t,
                level=h_t.c,
                root_count=int(roots.size),
                roots=tuple(complex(z) for z in roots),
                norms=tuple(float(v) for v in norms),
                escaped=tuple(bool(b) for b in escaped),
                busemann_values=tuple(float(b) for b in bus),
                flags=flags,
            )
        )
    return records
