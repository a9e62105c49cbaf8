"""
Command line: classify, sweep, braid, surface, check, invert, mapsweep.

Exit codes: 0 success, 2 input error, 3 loop touching a degeneracy,
4 numerical failure.
"""

import functools
import math
import sys
from typing import Any, Dict, Optional, Tuple

import click
import numpy as np

from braid import PROJECTIONS, braid_loop
from catastrophe import (
    DEFAULT_RANGES,
    PARAMETRIC_MODES,
    classify,
    parallel_map,
    sample_surface_implicit,
    sample_surface_parametric,
)
from config import DEFAULT_CONFIG, Config, get_logger, load_json_file, setup_logger
from errors import ArgumentError, LoopTouchesDegeneracyError, SwallowtailError
from export import strand_path_for, write_json, write_table
from loops import LoopSpec
from model import (
    PARAM_FIELDS,
    ModelParams,
    particle_hole_residual,
    physical_eigenvalues,
    pseudo_hermiticity_residual,
    traceless_matrix,
)
from parammap import (
    MAP_COLUMNS,
    forward_map,
    invert_local,
    jacobian,
    jacobian_det_closed_form,
    loop_feasibility,
    map_sweep,
)
from spectral import Quartic, char_poly_coeffs, solve_depressed_quartic

logger = get_logger("cli")

SWEEP_COLUMNS = ["q", "r", "s"] + [f"{part}_lambda_{k}" for k in range(1, 5) for part in ("re", "im")] + ["kind"]
MESH_COLUMNS = ["q", "r", "s", "kind", "defectiveness"]
STRAND_COLUMNS = ["phi", "strand", "re_lambda", "im_lambda"]


# =========================
# Helpers
# =========================
def handle_errors(fn):
    """Map library errors onto the exit-code contract."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except LoopTouchesDegeneracyError as e:
            logger.error(f"{e} (min gap {e.min_gap:.3e})")
            sys.exit(e.exit_code)
        except SwallowtailError as e:
            logger.error(str(e))
            sys.exit(e.exit_code)
        except (ArithmeticError, np.linalg.LinAlgError) as e:
            logger.error(f"Numerical failure: {e}")
            sys.exit(4)
    return wrapper


def param_options(fn):
    """--params FILE plus one option per model parameter (and --gamma-minus)."""
    for name in reversed(PARAM_FIELDS):
        fn = click.option(f"--{name.replace('_', '-')}", name, type=float, default=None)(fn)
    fn = click.option("--gamma-minus", "gamma_minus", type=float, default=None,
                      help="Signed loss difference; sets gamma_1/gamma_2 to max(+-gamma_minus, 0).")(fn)
    fn = click.option("--params", "params_file", type=click.Path(dir_okay=False), default=None,
                      help="JSON file with model parameters.")(fn)
    return fn


def build_params(params_file: Optional[str], gamma_minus: Optional[float], **fields: Any) -> ModelParams:
    data: Dict[str, Any] = load_json_file(params_file) if params_file else {}
    data.update({k: v for k, v in fields.items() if k in PARAM_FIELDS and v is not None})
    if gamma_minus is not None:
        if fields.get("gamma_1") is not None or fields.get("gamma_2") is not None:
            raise ArgumentError("--gamma-minus cannot be combined with --gamma-1/--gamma-2")
        data.pop("gamma_1", None)
        data.pop("gamma_2", None)
        return ModelParams.from_gamma_minus(gamma_minus, **data)
    return ModelParams.from_dict(data)


def quartic_from(q, r, s) -> Optional[Quartic]:
    given = [v is not None for v in (q, r, s)]
    if not any(given):
        return None
    if not all(given):
        raise ArgumentError("Give all of --q, --r and --s")
    return Quartic(q, r, s)


def sweep_axis(name: str, bounds: Tuple[float, float], resolution: int) -> np.ndarray:
    lo, hi = bounds
    if resolution < 1:
        raise ArgumentError(f"Resolution for {name} must be >= 1")
    if resolution == 1:
        if lo != hi:
            raise ArgumentError(f"A single {name} sample needs a zero-width range")
        return np.array([float(lo)])
    if not lo < hi:
        raise ArgumentError(f"Zero-area range for {name}: [{lo}, {hi}]")
    return np.linspace(lo, hi, resolution)


def fmt_roots(roots) -> str:
    return ", ".join(f"{z.real:+.12g}{z.imag:+.12g}i" for z in roots)


# =========================
# Group
# =========================
@click.group()
@click.option("--out", "out", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None,
              help="Output format (default: csv for tables, json for reports).")
@click.option("--tol-scale", type=float, default=1.0, show_default=True, help="Multiplies every tolerance.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"]), default="INFO")
@click.option("--log-file", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def cli(ctx, out, fmt, tol_scale, threads, log_level, log_file):
    """Swallowtail degeneracies and eigenvalue braids of two-mode bosonic systems."""
    if not (tol_scale > 0 and math.isfinite(tol_scale)):
        raise click.BadParameter("must be a positive number", param_hint="--tol-scale")
    if threads < 1:
        raise click.BadParameter("must be >= 1", param_hint="--threads")
    cfg = DEFAULT_CONFIG.with_overrides(tol_scale=tol_scale, threads=threads,
                                        log_level=log_level, log_file=log_file)
    setup_logger(cfg)
    ctx.obj = {"cfg": cfg, "out": out, "fmt": fmt}


def _cfg(ctx) -> Config:
    return ctx.obj["cfg"]


# =========================
# Commands
# =========================
@cli.command("classify")
@click.option("--q", type=float, default=None)
@click.option("--r", type=float, default=None)
@click.option("--s", type=float, default=None)
@click.option("--physical", is_flag=True, help="Also report eigenvalues of the raw matrix (shifted by -gamma_plus/4).")
@param_options
@click.pass_context
@handle_errors
def cmd_classify(ctx, q, r, s, physical, params_file, gamma_minus, **fields):
    """Classify a (q, r, s) point, or the point of a parameter set (with defectiveness)."""
    cfg = _cfg(ctx)
    c = quartic_from(q, r, s)
    E = params = None
    if c is None:
        params = build_params(params_file, gamma_minus, **fields)
        E = traceless_matrix(params, cfg)
        c = char_poly_coeffs(E, cfg)
    if physical and params is None:
        raise ArgumentError("--physical needs model parameters, not a bare (q, r, s) point")
    logger.info(f"classify {c.as_tuple()}")
    res = classify(c, E, cfg)

    click.echo(f"kind: {res.kind.value}")
    click.echo(f"defectiveness: {res.defectiveness.value}")
    click.echo(f"D: {res.witnesses['D']!r}")
    click.echo(f"L: {res.witnesses['L']!r}")
    click.echo(f"roots: {fmt_roots(res.spectrum.roots)}")
    payload = res.to_dict()
    if physical:
        shifted = physical_eigenvalues(res.spectrum.roots, params)
        click.echo(f"physical roots: {fmt_roots(shifted)}")
        payload["physical_roots"] = [[float(z.real), float(z.imag)] for z in shifted]
    click.echo(f"multiplicities: {res.spectrum.multiplicities}")
    if res.boundary:
        click.echo("boundary: true")

    out, fmt = ctx.obj["out"], ctx.obj["fmt"] or "json"
    if out:
        if fmt == "json":
            write_json(out, payload)
        else:
            row = {"q": c.q, "r": c.r, "s": c.s, "kind": res.kind.value,
                   "defectiveness": res.defectiveness.value, "D": res.witnesses["D"], "L": res.witnesses["L"]}
            write_table(out, [row], list(row))


@cli.command("sweep")
@click.option("--q", type=float, required=True, help="Fixed q of the plane.")
@click.option("--r-range", type=(float, float), required=True)
@click.option("--s-range", type=(float, float), required=True)
@click.option("--resolution", type=int, default=50, show_default=True, help="Samples per axis.")
@click.pass_context
@handle_errors
def cmd_sweep(ctx, q, r_range, s_range, resolution):
    """Eigenvalues and classes over a fixed-q plane."""
    cfg = _cfg(ctx)
    rs = sweep_axis("r", r_range, resolution)
    ss = sweep_axis("s", s_range, resolution)

    def row(point):
        r, s = point
        res = classify(Quartic(q, r, s), cfg=cfg)
        out = {"q": q, "r": r, "s": s}
        for k, lam in enumerate(res.spectrum.roots, start=1):
            out[f"re_lambda_{k}"] = float(lam.real)
            out[f"im_lambda_{k}"] = float(lam.imag)
        out["kind"] = res.kind.value
        return out

    rows = parallel_map(row, [(float(r), float(s)) for r in rs for s in ss], cfg.threads)
    logger.info(f"Sweep q={q}: {len(rows)} points")
    if (ctx.obj["fmt"] or "csv") == "json":
        write_json(ctx.obj["out"], {"q": q, "rows": rows})
    else:
        write_table(ctx.obj["out"], rows, SWEEP_COLUMNS)


@cli.command("braid")
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--delta-omega-2", type=float, default=None, help="Override the loop's delta_omega_2.")
@click.option("--n-samples", type=int, default=None, help="Override the loop's n_samples (>= 64).")
@click.option("--projection", type=click.Choice(PROJECTIONS), default="imag", show_default=True,
              help="Strands are ordered by Im(lambda) (imag) or Re(lambda) (real); the other part decides "
                   "over/under at a crossing. Conjugate pairs share Re(lambda), so real ordering "
                   "can fail to serialize crossings (it does on L2).")
@click.option("--strands", "strands_out", type=click.Path(dir_okay=False), default=None,
              help="Strand CSV (default: next to --out).")
@click.pass_context
@handle_errors
def cmd_braid(ctx, config_path, delta_omega_2, n_samples, projection, strands_out):
    """Track eigenvalues around a loop and report the braid.

    Generators are numbered along the projection order, so the default word
    is in the Im(lambda) convention.
    """
    cfg = _cfg(ctx)
    spec = LoopSpec.from_json_file(config_path).with_overrides(delta_omega_2=delta_omega_2,
                                                                n_samples=n_samples)
    feasibility = loop_feasibility(spec, cfg)

    res = braid_loop(spec, projection=projection, cfg=cfg)
    payload = res.to_dict()
    payload["loop"] = spec.to_dict()
    payload["feasibility"] = feasibility.to_dict()

    out = ctx.obj["out"]
    write_json(out, payload)
    strands_out = strands_out or (strand_path_for(out) if out else None)
    if strands_out:
        write_table(strands_out, res.strands.rows(), STRAND_COLUMNS)


@cli.command("surface")
@click.option("--mode", type=click.Choice(list(PARAMETRIC_MODES) + ["implicit"]), required=True)
@click.option("--range", "ranges", type=(str, float, float), multiple=True,
              help="Axis range NAME LO HI (repeatable).")
@click.option("--resolution", type=int, default=50, show_default=True)
@click.option("--axis", type=click.Choice(["q", "r", "s"]), default="s", show_default=True,
              help="Scan axis for implicit mode.")
@click.option("--with-matrix", is_flag=True, help="Report defectiveness for the g-zero/g-offset presets.")
@click.pass_context
@handle_errors
def cmd_surface(ctx, mode, ranges, resolution, axis, with_matrix):
    """Point cloud on the swallowtail surface."""
    cfg = _cfg(ctx)
    given = {name: (lo, hi) for name, lo, hi in ranges}
    if mode == "implicit":
        mesh = sample_surface_implicit(given, resolution=resolution, axis=axis, cfg=cfg)
    else:
        unknown = set(given) - set(DEFAULT_RANGES[mode])
        if unknown:
            raise ArgumentError(f"Mode {mode} has no axes {sorted(unknown)}")
        mesh = sample_surface_parametric(mode, given, resolution=resolution,
                                         with_matrix=with_matrix, cfg=cfg)
    if (ctx.obj["fmt"] or "csv") == "json":
        write_json(ctx.obj["out"], mesh.to_dict())
    else:
        write_table(ctx.obj["out"], mesh.rows(), MESH_COLUMNS)


@cli.command("check")
@param_options
@click.option("--physical", is_flag=True, help="Also report eigenvalues of the raw matrix (shifted by -gamma_plus/4).")
@click.pass_context
@handle_errors
def cmd_check(ctx, physical, params_file, gamma_minus, **fields):
    """Symmetry residuals and (q, r, s) from traces and closed form."""
    cfg = _cfg(ctx)
    params = build_params(params_file, gamma_minus, **fields)
    E = traceless_matrix(params, cfg)
    report: Dict[str, Any] = {
        "params": params.to_dict(),
        "particle_hole_residual": particle_hole_residual(E),
        "pseudo_hermiticity_residual": pseudo_hermiticity_residual(E),
        "coeffs_traces": char_poly_coeffs(E, cfg).to_dict(),
        "coeffs_closed_form": forward_map(params, cfg=cfg).to_dict(),
    }
    if params.is_simple:
        report["det_J"] = jacobian(params)[1]
        if params.delta_omega_2 == 0.0:
            report["det_J_closed_form"] = jacobian_det_closed_form(params)
    if physical:
        roots = solve_depressed_quartic(char_poly_coeffs(E, cfg), cfg)
        report["physical_eigenvalues"] = [[float(z.real), float(z.imag)] for z in physical_eigenvalues(roots, params)]

    for key in ("particle_hole_residual", "pseudo_hermiticity_residual"):
        click.echo(f"{key}: {report[key]!r}")
    click.echo(f"coeffs (traces): {tuple(report['coeffs_traces'].values())}")
    click.echo(f"coeffs (closed form): {tuple(report['coeffs_closed_form'].values())}")
    if "det_J" in report:
        click.echo(f"det J: {report['det_J']!r}")
    if physical:
        click.echo(f"physical eigenvalues: {fmt_roots(complex(*z) for z in report['physical_eigenvalues'])}")

    out, fmt = ctx.obj["out"], ctx.obj["fmt"] or "json"
    if out:
        if fmt == "json":
            write_json(out, report)
        else:
            row = {k: v for k, v in report.items() if not isinstance(v, (dict, list))}
            write_table(out, [row], list(row))


@cli.command("invert")
@click.option("--q", type=float, required=True)
@click.option("--r", type=float, required=True)
@click.option("--s", type=float, required=True)
@click.option("--delta-omega-1", type=float, default=0.0, show_default=True)
@click.option("--delta-omega-2", type=float, default=0.0, show_default=True)
@click.option("--seed", type=(float, float, float), required=True, help="gamma_minus xi_1 g")
@click.pass_context
@handle_errors
def cmd_invert(ctx, q, r, s, delta_omega_1, delta_omega_2, seed):
    """Local Newton inversion of the forward map."""
    cfg = _cfg(ctx)
    gm, xi, g = invert_local(Quartic(q, r, s), delta_omega_1, seed, delta_omega_2=delta_omega_2, cfg=cfg)
    params = ModelParams.from_gamma_minus(gm, xi_1=xi, g=g, delta_omega_1=delta_omega_1,
                                          delta_omega_2=delta_omega_2)
    payload = {"gamma_minus": gm, "xi_1": xi, "g": g, "params": params.to_dict(),
               "det_J": jacobian(params)[1]}
    click.echo(f"gamma_minus={gm!r} xi_1={xi!r} g={g!r}")
    if ctx.obj["out"]:
        write_json(ctx.obj["out"], payload)


@cli.command("mapsweep")
@click.option("--gamma-range", type=(float, float), required=True)
@click.option("--xi-range", type=(float, float), required=True)
@click.option("--g", type=float, required=True)
@click.option("--delta-omega-1", type=float, default=0.0, show_default=True)
@click.option("--delta-omega-2", type=float, default=0.0, show_default=True)
@click.option("--resolution", type=int, default=50, show_default=True)
@click.pass_context
@handle_errors
def cmd_mapsweep(ctx, gamma_range, xi_range, g, delta_omega_1, delta_omega_2, resolution):
    """Forward map over a (gamma_minus, xi_1) grid."""
    cfg = _cfg(ctx)
    points = map_sweep(gamma_range, xi_range, g, delta_omega_1, delta_omega_2, resolution, cfg)
    if (ctx.obj["fmt"] or "csv") == "json":
        write_json(ctx.obj["out"], [p.to_dict() for p in points])
    else:
        write_table(ctx.obj["out"], [p.row() for p in points], MAP_COLUMNS)


if __name__ == "__main__":
    cli()
