"""``ldg`` command-line front end.

Exit codes: 0 success, 1 configuration error, 2 numerical criterion not met,
3 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import summarize, write_summary
from .config import ConfigError, RunConfig, load_config
from .dynamics import MinimizeReport, StagnationError, gradient_check, init_state, minimize
from .fields import Grid2D, _atomic_write_text, integrate, save_csv
from .sharp import (BoundaryCurve, QuadraticFormField, VolumeBracketError, gamma_gap, gap_criterion,
                    generalized_sdf, write_gap_csv)

logger = logging.getLogger("ldg")

EXIT_OK, EXIT_CONFIG, EXIT_CRITERION, EXIT_IO = 0, 1, 2, 3

SWEEP_LAMBDAS = (0.8e-6, 1e-6, 2e-6, 5e-6, 7.5e-6)
SWEEP_OMEGA_A = (1e7, 3e7, 6e7, 9e7, 15e7, 30e7)
DEFAULT_EPS = (0.04, 0.02, 0.01, 0.005)
PHASE_HEADER = ["lambda", "omega_a_over_L", "label", "n_defects", "aspect_ratio", "sup_abs_P",
                "total_energy"]


def _float_list(text: str):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    over = {}
    if getattr(args, "out", None):
        over["output"] = args.out
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
    if over:
        cfg = replace(cfg, **over)
    return cfg


def _write_history(path, report) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "energy", "volume"])
    for k, (e, v) in enumerate(zip(report.energy_history, report.volume_history)):
        w.writerow([k, repr(float(e)), repr(float(v))])
    _atomic_write_text(path, buf.getvalue())


def run_minimization(cfg: RunConfig, outdir) -> tuple[int, dict]:
    """Minimize one configuration and write fields.csv, summary.json, energy_history.csv.

    Returns ``(exit code, summary)``; non-convergence still writes the artifacts.
    """
    params = cfg.params()
    grid = Grid2D(cfg.grid_n)
    init = init_state(cfg.init.kind, params, grid, seed=cfg.seed,
                      director_angle=cfg.init.director_angle, order_factor=cfg.init.order_factor,
                      noise=cfg.init.noise)
    try:
        state, report = minimize(init, cfg.solver, params)
    except StagnationError as exc:
        logger.warning("%s", exc)
        state = exc.state if exc.state is not None else init
        report = MinimizeReport("stagnation", state.iteration, state.grad_norm,
                                [state.energy.total], [integrate(state.phi)])
    summary = summarize(state.P, state.phi, params, cfg.thresholds)
    summary.update(stop_reason=report.stop_reason, iterations=report.iterations,
                   grad_norm=report.grad_norm, config=cfg.to_dict())
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    save_csv(out / "fields.csv", state.phi, state.P)
    write_summary(out / "summary.json", summary)
    _write_history(out / "energy_history.csv", report)
    return (EXIT_OK if report.converged else EXIT_CRITERION), summary


def cmd_minimize(args) -> int:
    cfg = _config(args)
    code, s = run_minimization(cfg, cfg.output)
    print(f"{s['stop_reason']}: label={s['label']} defects={len(s['defects'])} "
          f"aspect={s['aspect_ratio']} sup|P|={s['sup_abs_P']:.6g} E={s['energy']['total']:.10g}")
    return code


def cell_name(lam: float, omega_a: float) -> str:
    return f"lam{lam:g}_oa{omega_a:g}"


def _sweep_cell(job):
    cfg, lam, oa, outdir = job
    try:
        _, s = run_minimization(replace(cfg.with_cell(lam, oa), output=str(outdir)), outdir)
        return [lam, oa, s["label"], len(s["defects"]), s["aspect_ratio"], s["sup_abs_P"],
                s["energy"]["total"]], None
    except Exception as exc:  # noqa: BLE001 - any cell failure is recorded, not raised
        return [lam, oa, "failed", "", "", "", ""], f"{type(exc).__name__}: {exc}"


def max_workers(jobs: int, n_cells: int) -> int:
    cap = os.environ.get("LDG_NUM_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(jobs, limit, n_cells))


def _fmt(v):
    if v is None or v == "":
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def cmd_sweep(args) -> int:
    cfg = _config(args)
    lams = args.lambda_list or list(SWEEP_LAMBDAS)
    oas = args.omega_a_list or list(SWEEP_OMEGA_A)
    root = Path(cfg.output)
    root.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, lam, oa, root / cell_name(lam, oa)) for lam in lams for oa in oas]
    workers = max_workers(args.jobs, len(jobs))
    if workers == 1:
        results = [_sweep_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, jobs))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PHASE_HEADER)
    failed = 0
    for row, err in results:
        w.writerow([_fmt(v) for v in row])
        if err:
            failed += 1
            logger.error("cell lambda=%g omega_a=%g failed: %s", row[0], row[1], err)
    _atomic_write_text(root / "phase_diagram.csv", buf.getvalue())
    print(f"{len(results)} cells, {failed} failed -> {root / 'phase_diagram.csv'}")
    return EXIT_CRITERION if failed else EXIT_OK


def gamma_setup(cfg: RunConfig):
    """Constant-director anchoring form and the centred circle of area v0_bar."""
    if cfg.omega_p_over_L <= 0:
        raise ConfigError("gamma-check needs omega_p_over_L > 0")
    ratio = cfg.omega_a_over_L / cfg.omega_p_over_L
    form = QuadraticFormField.constant_director(cfg.gamma.director_angle, ratio,
                                                cfg.params().s_plus)
    curve = BoundaryCurve.circle(radius=float(np.sqrt(cfg.v0_bar / np.pi)))
    return form, curve


def cmd_gamma_check(args) -> int:
    cfg = _config(args)
    eps_list = args.eps_list or list(DEFAULT_EPS)
    form, curve = gamma_setup(cfg)
    grids = [Grid2D(cfg.gamma.grid_n)] * len(eps_list) if cfg.gamma.grid_n else None
    try:
        rows = gamma_gap(form, curve, eps_list, profile=cfg.gamma.profile, grids=grids,
                         band_halfwidth=cfg.gamma.band_halfwidth)
    except VolumeBracketError as exc:
        print(f"recovery sequence failed: {exc}")
        return EXIT_CRITERION
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    write_gap_csv(out / "gamma_gap.csv", rows)
    for r in rows:
        print(f"eps={r.eps:g} n={r.n} diffuse={r.diffuse:.6f} target={r.sharp_target:.6f} "
              f"gap={r.rel_gap:.4%} equipartition={r.equipartition_ratio:.4f}")
    ok = gap_criterion(rows)
    print("gaps decrease and final gap < 5%:", "yes" if ok else "no")
    return EXIT_OK if ok else EXIT_CRITERION


def sdf_check(n_samples: int = 1000, seed: int = 0) -> dict:
    """Identity-form error against the exact signed distance, Hamiltonian drift and
    the ellipticity sandwich for the constant-director form with ratio 1."""
    rng = np.random.default_rng(seed)
    curve = BoundaryCurve.circle()
    r0 = 0.169257
    ident = generalized_sdf(QuadraticFormField.identity(), curve)
    th = rng.uniform(0, 2 * np.pi, 4 * n_samples)
    rad = r0 + rng.uniform(-0.045, 0.045, th.size)
    pts = 0.5 + rad[:, None] * np.column_stack([np.cos(th), np.sin(th)])
    res = ident.evaluate(pts)
    err = float(np.max(np.abs(res.h[res.in_band] - (rad[res.in_band] - r0))))
    n_ident = int(np.count_nonzero(res.in_band))

    aniso = QuadraticFormField.constant_director(0.0, 1.0, 1.8285714285714285)
    sdf = generalized_sdf(aniso, curve)
    pts = 0.5 + rng.uniform(-0.25, 0.25, (20 * n_samples, 2))
    res = sdf.evaluate(pts)
    sel = np.nonzero(res.in_band)[0][:n_samples]
    d = curve.distance(pts[sel])
    ah = np.abs(res.h[sel])
    tol = 1e-6 * d + 1e-12
    lower = bool(np.all(ah >= d / np.sqrt(aniso.Lam) - tol))
    upper = bool(np.all(ah <= d / np.sqrt(aniso.lam) + tol))
    # points within 1e-9 of the curve may fall on either side of the polygon
    inside = curve.contains(pts[sel])
    sign_ok = bool(np.all(((res.h[sel] < 0) == inside) | (d < 1e-9)))
    return {
        "identity_max_error": err,
        "identity_samples": n_ident,
        "drift": max(ident.hamiltonian_drift(), sdf.hamiltonian_drift()),
        "sandwich_samples": int(sel.size),
        "sandwich_lower": lower,
        "sandwich_upper": upper,
        "sign_matches": sign_ok,
    }


def cmd_sdf_check(args) -> int:
    rep = sdf_check(seed=args.seed or 0)
    for k, v in rep.items():
        print(f"{k}: {v}")
    ok = (rep["identity_max_error"] < 1e-4 and rep["drift"] < 1e-8 and rep["sandwich_lower"]
          and rep["sandwich_upper"] and rep["sandwich_samples"] >= 1000 and rep["sign_matches"])
    return EXIT_OK if ok else EXIT_CRITERION


def cmd_gradcheck(args) -> int:
    errs = gradient_check(seed=args.seed or 0)
    for k, v in errs.items():
        print(f"{k}: max relative error {v:.3e}")
    return EXIT_OK if max(errs.values()) < 1e-6 else EXIT_CRITERION


COMMANDS = {"minimize": cmd_minimize, "sweep": cmd_sweep, "gamma-check": cmd_gamma_check,
            "sdf-check": cmd_sdf_check, "gradcheck": cmd_gradcheck}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ldg", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep cells")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--eps-list", type=_float_list)
    p.add_argument("--lambda-list", type=_float_list, help="lambda values in metres")
    p.add_argument("--omega-a-list", type=_float_list, help="omega_a / L values in 1/m")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
