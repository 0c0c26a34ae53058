"""Command-line interface.

Subcommands: sample, amoeba, tropical-limit, lemma-check, line-amoeba,
sweep, steer, hausdorff, export-ball. Flags can be preloaded from a
line-oriented ``key = value`` config file (explicit flags win). Exit
codes: 0 success, 1 invalid or infeasible configuration, 2 numerical
failure (a non-finite intermediate).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, cloudio, hdist, lab, varieties
from .amoeba import kappa, PointCloud
from .hmodel import Horosphere, LemmaConfig, to_uhs
from .rng import SampleStream


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the interface contract wants 1 + usage
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


class NumericalFailure(RuntimeError):
    pass


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as err:
        raise UsageError(f"cannot parse complex number from {text!r}") from err


def _parse_grid(text: str) -> np.ndarray:
    """'a:b:step' inclusive grid."""
    try:
        a, b, step = (float(v) for v in text.split(":"))
    except ValueError as err:
        raise UsageError(f"grid must look like 'a:b:step', got {text!r}") from err
    if step <= 0 or b < a:
        raise UsageError(f"bad grid bounds {text!r}")
    return np.arange(a, b + 0.5 * step, step)


def _parse_vec2(text: str):
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise UsageError("expected four reals: re1,im1,re2,im2")
    return np.array([parts[0] + 1j * parts[1], parts[2] + 1j * parts[3]])


def _parse_family(text: str) -> varieties.SurfaceSpec:
    """Mini-language: trace:<complex> | poly:<coefficient table file>."""
    kind, _, arg = text.partition(":")
    if kind == "trace":
        return varieties.trace_surface(_parse_complex(arg))
    if kind == "poly":
        return _load_poly(arg)
    raise UsageError(f"unknown family {text!r} (expected trace:<c> or poly:<file>)")


def _load_poly(path: str) -> varieties.SurfaceSpec:
    """Coefficient table: lines 'i j k l re [im]', comments with '#'."""
    terms = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (5, 6):
            raise UsageError(f"{path}:{lineno}: expected 'i j k l re [im]'")
        expo = tuple(int(v) for v in parts[:4])
        coeff = float(parts[4]) + 1j * (float(parts[5]) if len(parts) == 6 else 0.0)
        terms[expo] = terms.get(expo, 0.0) + coeff
    return varieties.SurfaceSpec(terms=terms, name=Path(path).stem)


def _load_config(path: str) -> dict:
    """Line-oriented 'key = value' configuration."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _emit(args, payload: str, config: dict, started: str) -> None:
    if args.out:
        cloudio.write_with_manifest(
            args.out,
            payload,
            command=args.command,
            config=config,
            seed=getattr(args, "seed", None),
            started_utc=started,
            tool_version=__version__,
        )
    else:
        sys.stdout.write(payload)
        if not payload.endswith("\n"):
            sys.stdout.write("\n")


def _require_finite(value, what: str):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NumericalFailure(f"non-finite value in {what}")
    return value


def _public_config(args) -> dict:
    skip = {"command", "func", "config"}
    out = {}
    for key, val in vars(args).items():
        if key in skip or val is None:
            continue
        out[key] = val if isinstance(val, (int, float, str, bool)) else str(val)
    return out


# ---------------------------------------------------------------------------
# subcommand runners


def _cmd_sample(args):
    f = _parse_family(args.family)
    window = (args.window_lo, args.window_hi)
    rng = SampleStream(args.seed).generator("cli-sample")
    if f.name == "trace":
        mats = varieties.sample_trace_surface(f.param, window, args.samples, rng)
    else:
        mats, flags = varieties.sample_surface_via_lines(f, args.samples, window, rng)
        if flags:
            print(f"warning: {';'.join(flags)}", file=sys.stderr)
    meta = {"family": args.family, "seed": args.seed, "window": list(window)}
    return json.dumps(cloudio.matrices_to_dict(mats, meta)) + "\n"


def _cmd_amoeba(args):
    mats, meta = cloudio.read_matrices(args.infile)
    pts = kappa(mats, args.kappa, det_tol=1e-6)
    meta["convention"] = args.kappa
    cloud = PointCloud(points=pts, convention=args.kappa, meta=meta)
    return json.dumps(cloudio.cloud_to_dict(cloud)) + "\n"


def _cmd_tropical_limit(args):
    if args.family == "trace":
        fam = lab.FamilySpec(kind="trace-pow", r=args.r)
    elif args.family == "trace-exp":
        fam = lab.FamilySpec(kind="trace-exp")
    elif args.family == "trace-const":
        fam = lab.FamilySpec(kind="trace-const", c=_parse_complex(args.c))
    else:
        raise UsageError(f"unknown family {args.family!r}")
    n_list = [int(v) for v in args.n.split(",")]
    series = lab.tropical_limit_run(
        fam,
        n_list,
        scaling=args.scaling,
        cap=args.cap,
        samples=args.samples,
        conv=args.kappa,
        seed=args.seed,
        shell_samples=args.shell_samples,
        workers=args.workers,
    )
    return series.to_csv()


def _cmd_lemma_check(args):
    cfg = LemmaConfig(d=args.d, epsilon=args.eps, rho=args.rho)
    report = lab.lemma_check(cfg, _parse_grid(args.s), k=args.samples, seed=args.seed)
    _require_finite(report.mu, "boundary heights")
    return json.dumps(report.as_dict()) + "\n"


def _cmd_line_amoeba(args):
    report = lab.verify_line_horosphere(
        count=args.count, tau_count=args.tau_count, seed=args.seed
    )
    _require_finite(report.max_rel_residual, "residuals")
    return json.dumps(
        {
            "max_rel_residual": report.max_rel_residual,
            "polar_busemann_spread": report.polar_busemann_spread,
            "lines": report.lines,
            "tau_count": report.tau_count,
        }
    ) + "\n"


def _cmd_sweep(args):
    f = _parse_family(args.family)
    h0 = Horosphere(w=_parse_vec2(args.horo_w) / np.linalg.norm(_parse_vec2(args.horo_w)),
                    c=args.horo_c)
    # the level identity along lifted lines is exact under gram, so that is
    # the sweep default; an explicit --kappa still wins
    conv = args.kappa if args.kappa_given else "gram"
    records = lab.horosphere_sweep(
        f, h0, _parse_grid(args.t), norm_bound=args.norm_bound, conv=conv
    )
    lines = ["t,level,root_count,root_re,root_im,norm,escaped,busemann"]
    for rec in records:
        if rec.root_count == 0:
            lines.append(f"{rec.t!r},{rec.level!r},0,,,,,")
        for z, nm, esc, bus in zip(rec.roots, rec.norms, rec.escaped, rec.busemann_values):
            lines.append(
                f"{rec.t!r},{rec.level!r},{rec.root_count},{z.real!r},{z.imag!r},"
                f"{nm!r},{int(esc)},{bus!r}"
            )
    return "\n".join(lines) + "\n"


def _cmd_steer(args):
    req = varieties.SteerRequest(
        c=_parse_complex(args.c),
        image_line=_parse_vec2(args.L),
        lam=args.lam,
        prescribe=args.mode,
    )
    result = varieties.steer(req)
    _require_finite([result.gap, result.log_norm_actual], "steering diagnostics")
    return json.dumps(result.as_dict()) + "\n"


def _cmd_hausdorff(args):
    x = cloudio.read_cloud(args.x, expect_convention=args.kappa if args.kappa_given else None)
    y = cloudio.read_cloud(args.y, expect_convention=args.kappa if args.kappa_given else None)
    if x.convention != y.convention:
        raise cloudio.ConventionMismatch(
            f"clouds use different conventions: {x.convention!r} vs {y.convention!r}"
        )
    report = hdist.hausdorff_capped(x, y, args.cap)
    return json.dumps(report.as_dict()) + "\n"


def _cmd_export_ball(args):
    cloud = cloudio.read_cloud(
        args.infile, expect_convention=args.kappa if args.kappa_given else None
    )
    z, h = to_uhs(cloud.points)
    x = np.stack([z.real, z.imag, h], axis=-1)
    # inversion through the sphere of radius sqrt(2) at the chart floor point
    shifted = x + np.array([0.0, 0.0, 1.0])
    ball = 2.0 * shifted / np.sum(shifted * shifted, axis=-1, keepdims=True)
    ball = ball - np.array([0.0, 0.0, 1.0])
    _require_finite(ball, "ball coordinates")
    if args.format == "json":
        return json.dumps(
            {
                "note": "poincare ball export - visual chart, not the computation metric",
                "points": [[float(v) for v in row] for row in ball],
            }
        ) + "\n"
    lines = ["# poincare ball export - visual chart, not the computation metric", "x,y,z"]
    lines += [f"{p[0]!r},{p[1]!r},{p[2]!r}" for p in ball]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(sub, *, seed_required: bool):
    sub.add_argument("--seed", type=int, required=seed_required,
                     help="base seed for all randomness" + (" (required)" if seed_required else ""))
    sub.add_argument("--kappa", choices=["polar", "gram"], default=None,
                     help="quotient convention (default polar)")
    sub.add_argument("--cap", type=float, default=None, help="cap radius (default 3.0)")
    sub.add_argument("--samples", type=int, default=None)
    sub.add_argument("--out", type=str, default=None, help="output file (stdout if omitted)")
    sub.add_argument("--format", choices=["json", "csv"], default=None)
    sub.add_argument("--config", type=str, default=None,
                     help="key = value config file; explicit flags override")
    sub.add_argument("--workers", type=int, default=None)


_DEFAULTS = {
    "kappa": "polar",
    "cap": 3.0,
    "samples": 20000,
    "format": "json",
    "workers": 1,
    "scaling": "log",
    "r": 1.0,
    "c": "3",
    "shell_samples": None,
    "window_lo": -3.0,
    "window_hi": 3.0,
    "count": 100,
    "tau_count": 1000,
    "d": 1.0,
    "eps": 0.5,
    "rho": 1.2,
    "s": "10:40:0.5",
    "n": "100,1000,10000",
    "horo_c": 1.0,
    "horo_w": "0,0,1,0",
    "t": "1:5:0.5",
    "norm_bound": 1e8,
    "lam": 1.0,
    "L": "1,0,0,0",
    "mode": "image",
}


def build_parser() -> _Parser:
    parser = _Parser(prog="hamoeba", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = subs.add_parser("sample",
                        help="draw matrices from a surface family")
    p.add_argument("--family", required=True, help="trace:<complex> or poly:<file>")
    p.add_argument("--window-lo", dest="window_lo", type=float, default=None)
    p.add_argument("--window-hi", dest="window_hi", type=float, default=None)
    _add_common(p, seed_required=True)
    p.set_defaults(func=_cmd_sample)

    p = subs.add_parser("amoeba",
                        help="project matrices to a point cloud")
    p.add_argument("--in", dest="infile", required=True)
    _add_common(p, seed_required=False)
    p.set_defaults(func=_cmd_amoeba)

    p = subs.add_parser("tropical-limit",
                        help="rescaled-amoeba convergence experiment")
    p.add_argument("--family", default="trace", help="trace | trace-exp | trace-const")
    p.add_argument("--r", type=float, default=None, help="exponent of the trace level")
    p.add_argument("--c", type=str, default=None, help="constant trace level")
    p.add_argument("--n", type=str, default=None, help="comma-separated n values")
    p.add_argument("--scaling", type=str, default=None, help="'log' (s_n = log n)")
    p.add_argument("--shell-samples", dest="shell_samples", type=int, default=None)
    _add_common(p, seed_required=True)
    p.set_defaults(func=_cmd_tropical_limit)

    p = subs.add_parser("lemma-check",
                        help="two-ball separation estimate")
    p.add_argument("--d", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--s", type=str, default=None, help="s grid 'a:b:step'")
    _add_common(p, seed_required=True)
    p.set_defaults(func=_cmd_lemma_check)

    p = subs.add_parser("line-amoeba",
                        help="line-to-horosphere residual check")
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--tau-count", dest="tau_count", type=int, default=None)
    _add_common(p, seed_required=True)
    p.set_defaults(func=_cmd_line_amoeba)

    p = subs.add_parser("sweep",
                        help="contracting-horosphere intersection tracker")
    p.add_argument("--family", required=True)
    p.add_argument("--horo-c", dest="horo_c", type=float, default=None)
    p.add_argument("--horo-w", dest="horo_w", type=str, default=None,
                   help="covector re1,im1,re2,im2")
    p.add_argument("--t", type=str, default=None, help="t grid 'a:b:step'")
    p.add_argument("--norm-bound", dest="norm_bound", type=float, default=None)
    _add_common(p, seed_required=False)
    p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser("steer",
                        help="prescribed-growth solution construction")
    p.add_argument("--c", type=str, required=True)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--L", type=str, default=None, help="subspace line re1,im1,re2,im2")
    p.add_argument("--mode", choices=["image", "kernel"], default=None)
    _add_common(p, seed_required=False)
    p.set_defaults(func=_cmd_steer)

    p = subs.add_parser("hausdorff",
                        help="capped Hausdorff distance between cloud files")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    _add_common(p, seed_required=False)
    p.set_defaults(func=_cmd_hausdorff)

    p = subs.add_parser("export-ball",
                        help="Poincare-ball coordinates for external plotting")
    p.add_argument("--in", dest="infile", required=True)
    _add_common(p, seed_required=False)
    p.set_defaults(func=_cmd_export_ball)

    return parser


def _apply_config_and_defaults(args) -> None:
    file_conf = _load_config(args.config) if args.config else {}
    args.kappa_given = args.kappa is not None
    for key, val in vars(args).copy().items():
        if val is not None or key in ("func", "config"):
            continue
        if key in file_conf:
            raw = file_conf[key]
            default = _DEFAULTS.get(key)
            caster = type(default) if default is not None else str
            if caster is bool:
                setattr(args, key, raw.lower() in ("1", "true", "yes"))
            else:
                setattr(args, key, caster(raw))
            if key == "kappa":
                args.kappa_given = True
        elif key in _DEFAULTS:
            setattr(args, key, _DEFAULTS[key])


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        _apply_config_and_defaults(args)
        started = cloudio.utc_now()
        payload = args.func(args)
        _emit(args, payload, _public_config(args), started)
        return 0
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError, cloudio.SchemaError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (NumericalFailure, FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
