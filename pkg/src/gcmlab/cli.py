"""Command-line interface.

Subcommands: spectrum, brody, classical, compare, density, bias-study,
freg-map.  Every command reads one config file (all keys overridable by
flags), writes CSV tables with a metadata header plus rendered PNG figures
into the output directory, and finishes by writing a run manifest listing
every output with its content hash.

Exit codes: 0 success, 1 computational failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .basis import QuantScheme
from .classical import freg_map, regular_fraction
from .config import RunConfig, config_hash, parse_grid
from .density import density_grid
from .eigensolver import solve
from .hamiltonian import assemble
from .io import read_csv, read_levels_file, write_csv, write_pgm
from .manifest import RunManifest
from .model import ModelParams
from .pipeline import csv_meta, resolve_basis_spec, run_spectrum
from .spectral_stats import bias_study, omega_vs_energy
from . import plots

USAGE_ERROR = 2
COMPUTE_ERROR = 1


class UsageError(Exception):
    pass


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="run configuration file (INI)")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--seed", type=int, help="override stats/classical seed")
    p.add_argument("--threads", type=int, help="numba thread count for classical runs")
    p.add_argument("--cache-dir", help="matrix/spectrum cache directory "
                                       "(overrides output.cache_dir)")


def _overrides(args: argparse.Namespace) -> dict:
    table = {
        "out": "output.dir",
        "cache_dir": "output.cache_dir",
        "scheme": "basis.scheme",
        "dimension": "basis.dimension",
        "a_osc": "basis.a_osc",
        "c_shift": "basis.c_shift",
        "certify": "solver.certify",
        "bin_size": "stats.bin_size",
        "shift": "stats.shift",
        "unfold_degree": "stats.unfold_degree",
        "trials": "stats.error_trials",
        "t_max": "classical.t_max",
        "count": "classical.count",
        "energies": "classical.energies",
        "b_values": "map.b_values",
        "e_values": "map.e_values",
        "levels_arg": "density.levels",
        "grid_points": "density.grid_points",
        "A": "model.a", "B": "model.b", "C": "model.c",
        "K": "model.k", "hbar": "model.hbar",
    }
    out = {}
    for attr, dotted in table.items():
        val = getattr(args, attr, None)
        if val is not None:
            out[dotted] = val
    if getattr(args, "seed", None) is not None:
        out["stats.seed"] = args.seed
        out["classical.seed"] = args.seed
    return out


def _setup(args: argparse.Namespace, command: str):
    try:
        cfg = RunConfig.load(args.config, _overrides(args))
        schemes = cfg.schemes  # validates the scheme strings
    except (ValueError, KeyError, OSError) as exc:
        raise UsageError(str(exc)) from exc
    out_dir = Path(cfg.get("output", "dir"))
    out_dir.mkdir(parents=True, exist_ok=True)
    cache_raw = cfg.get("output", "cache_dir").strip()
    cache_dir = Path(cache_raw) if cache_raw else None
    if cache_dir is not None:
        cache_dir.mkdir(parents=True, exist_ok=True)
    if getattr(args, "threads", None):
        import numba
        numba.set_num_threads(max(1, args.threads))
    cfg_hash = config_hash(cfg.raw)
    manifest = RunManifest(out_dir, cfg_hash, command)
    return cfg, schemes, out_dir, cache_dir, cfg_hash, manifest


def _want_plots(cfg: RunConfig) -> bool:
    return cfg.getbool("output", "plots")


def cmd_spectrum(args) -> int:
    cfg, schemes, out_dir, cache_dir, cfg_hash, mani = _setup(args, "spectrum")
    for scheme in schemes:
        spectrum, spec = run_spectrum(cfg, scheme, cache_dir, mani)
        n = len(spectrum.levels)
        path = write_csv(
            out_dir / f"levels_{scheme.value}.csv",
            {"index": np.arange(n),
             "energy": spectrum.levels,
             "converged": (np.arange(n) < spectrum.converged_count).astype(int)},
            csv_meta(cfg_hash, scheme=scheme.value, a_osc=f"{spec.a_osc:.17g}",
                     dimension=spec.dimension,
                     converged_count=spectrum.converged_count,
                     **{k: f"{v:.17g}" for k, v in cfg.model_params.as_dict().items()}))
        mani.add_output(path)
        if _want_plots(cfg):
            fig = plots.save_levels_plot(out_dir / f"levels_{scheme.value}.png",
                                         cfg.model_params,
                                         spectrum.converged_levels,
                                         title=scheme.value)
            mani.add_output(fig)
    mani.write()
    return 0


def _brody_columns(curve):
    omegas = curve.omegas()
    return {
        "centroid_energy": curve.centroids(),
        "omega": omegas,
        "one_minus_omega": 1.0 - omegas,
        "stat_err": np.array([p.stat_err for p in curve.points]),
        "bin_start": np.array([p.bin_start for p in curve.points]),
        "bin_size": np.array([p.bin_size for p in curve.points]),
        "flags": np.array([";".join(p.flags) for p in curve.points]),
    }


def cmd_brody(args) -> int:
    cfg, schemes, out_dir, cache_dir, cfg_hash, mani = _setup(args, "brody")
    stats = dict(bin_size=cfg.getint("stats", "bin_size"),
                 shift=cfg.getint("stats", "shift"),
                 degree=cfg.getint("stats", "unfold_degree"),
                 attach_errors=cfg.getbool("stats", "attach_errors"),
                 error_trials=cfg.getint("stats", "error_trials"),
                 seed=cfg.getint("stats", "seed"))
    curves = {}
    if args.levels:
        levels = read_levels_file(args.levels)
        with mani.stage("brody:external", n_levels=len(levels)):
            curve = omega_vs_energy(levels, scheme="external", **stats)
        curves["external"] = curve
    else:
        for scheme in schemes:
            spectrum, _ = run_spectrum(cfg, scheme, cache_dir, mani)
            with mani.stage(f"brody:{scheme.value}",
                            n_levels=spectrum.converged_count):
                curve = omega_vs_energy(spectrum, scheme=scheme.value, **stats)
            curves[scheme.value] = curve
    if not curves:
        raise UsageError("no input levels: configure basis.scheme or pass --levels")
    for label, curve in curves.items():
        path = write_csv(out_dir / f"brody_{label}.csv", _brody_columns(curve),
                         csv_meta(cfg_hash, scheme=label, **{
                             k: v for k, v in cfg.raw["stats"].items()}))
        mani.add_output(path)
    if _want_plots(cfg):
        fig = plots.save_brody_plot(
            out_dir / "brody_omega.png",
            {lbl: (c.centroids(), c.omegas(),
                   np.array([p.stat_err for p in c.points]))
             for lbl, c in curves.items()})
        mani.add_output(fig)
    mani.write()
    return 0


def _classical_kwargs(cfg: RunConfig) -> dict:
    return dict(t_max=cfg.getfloat("classical", "t_max"),
                sali_chaotic=cfg.getfloat("classical", "sali_chaotic"),
                sali_regular=cfg.getfloat("classical", "sali_regular"),
                renorm_interval=cfg.getfloat("classical", "renorm_interval"),
                rtol=cfg.getfloat("classical", "rtol"),
                atol=cfg.getfloat("classical", "atol"),
                drift_tol=cfg.getfloat("classical", "drift_tol"))


def cmd_classical(args) -> int:
    cfg, _, out_dir, _, cfg_hash, mani = _setup(args, "classical")
    params = cfg.model_params
    energies = parse_grid(cfg.get("classical", "energies"))
    count = cfg.getint("classical", "count")
    seed = cfg.getint("classical", "seed")
    kwargs = _classical_kwargs(cfg)
    rows = []
    with mani.stage("classical:curve", n_energies=len(energies), count=count):
        for i, e in enumerate(energies):
            pt = regular_fraction(params, float(e), count, seed + 101 * i, **kwargs)
            rows.append(pt)
    path = write_csv(out_dir / "freg_curve.csv",
                     {"B": np.full(len(rows), params.B),
                      "E": np.array([r.energy for r in rows]),
                      "f_reg": np.array([r.f_reg for r in rows]),
                      "sigma": np.array([r.sigma for r in rows]),
                      "n_regular": np.array([r.n_regular for r in rows]),
                      "n_chaotic": np.array([r.n_chaotic for r in rows]),
                      "n_undecided": np.array([r.n_undecided for r in rows])},
                     csv_meta(cfg_hash, count=count, seed=seed,
                              **{k: f"{v:.17g}" for k, v in params.as_dict().items()}))
    mani.add_output(path)
    if _want_plots(cfg):
        fig = plots.save_freg_curve_plot(
            out_dir / "freg_curve.png",
            [r.energy for r in rows], [r.f_reg for r in rows],
            [r.sigma for r in rows], title=f"B = {params.B}")
        mani.add_output(fig)
    mani.write()
    return 0


def cmd_freg_map(args) -> int:
    cfg, _, out_dir, _, cfg_hash, mani = _setup(args, "freg-map")
    params = cfg.model_params
    b_values = parse_grid(cfg.get("map", "b_values"))
    e_values = parse_grid(cfg.get("map", "e_values"))
    count = cfg.getint("classical", "count")
    seed = cfg.getint("classical", "seed")
    with mani.stage("classical:map", cells=len(b_values) * len(e_values),
                    count=count):
        rows = freg_map(params, b_values, e_values, count, seed,
                        **_classical_kwargs(cfg))
    cols = {k: np.array([r[k] for r in rows])
            for k in ("B", "E", "f_reg", "sigma", "n_regular", "n_chaotic",
                      "n_undecided", "error")}
    path = write_csv(out_dir / "freg_map.csv", cols,
                     csv_meta(cfg_hash, count=count, seed=seed))
    mani.add_output(path)
    if _want_plots(cfg):
        grid = np.array([r["f_reg"] for r in rows]).reshape(len(b_values),
                                                            len(e_values)).T
        fig = plots.save_freg_map_plot(out_dir / "freg_map.png",
                                       b_values, e_values, grid)
        mani.add_output(fig)
    mani.write()
    return 0


def cmd_compare(args) -> int:
    cfg, _, out_dir, _, cfg_hash, mani = _setup(args, "compare")
    _, bcols = read_csv(args.brody)
    _, fcols = read_csv(args.freg)
    if "one_minus_omega" not in bcols or "centroid_energy" not in bcols:
        raise UsageError(f"{args.brody} is not a brody curve file")
    if "f_reg" not in fcols or "E" not in fcols:
        raise UsageError(f"{args.freg} is not an f_reg file")
    be = bcols["centroid_energy"]
    adj = bcols["one_minus_omega"]
    fe = fcols["E"]
    fr = fcols["f_reg"]
    good = np.isfinite(adj)
    be, adj = be[good], adj[good]
    lo = max(be.min(), fe.min()) if len(be) and len(fe) else math.inf
    hi = min(be.max(), fe.max()) if len(be) and len(fe) else -math.inf
    if args.e_min is not None:
        lo = max(lo, args.e_min)
    if args.e_max is not None:
        hi = min(hi, args.e_max)
    tol = args.join_tol if args.join_tol is not None else \
        (np.median(np.diff(np.sort(fe))) if len(fe) > 1 else math.inf)
    rows = []
    for e, a in zip(be, adj):
        if not lo <= e <= hi:
            continue
        j = int(np.argmin(np.abs(fe - e)))
        if abs(fe[j] - e) <= tol:
            rows.append((e, fe[j], a, fr[j]))
    if not rows:
        print("error: no overlapping energy window between the two curves",
              file=sys.stderr)
        return COMPUTE_ERROR
    if len(rows) < good.sum():
        print(f"warning: join restricted to E in [{lo:.4g}, {hi:.4g}] "
              f"({len(rows)} of {int(good.sum())} bins)", file=sys.stderr)
    arr = np.array(rows)
    r = float(np.corrcoef(arr[:, 2], arr[:, 3])[0, 1]) if len(rows) > 1 else math.nan
    path = write_csv(out_dir / "compare.csv",
                     {"E": arr[:, 0], "E_freg": arr[:, 1],
                      "one_minus_omega": arr[:, 2], "f_reg": arr[:, 3]},
                     csv_meta(cfg_hash, pearson_r=f"{r:.6f}",
                              window=f"[{lo:.17g},{hi:.17g}]"))
    mani.add_output(path)
    if _want_plots(cfg):
        fig = plots.save_compare_plot(out_dir / "compare.png", arr[:, 0],
                                      arr[:, 3], arr[:, 2], r)
        mani.add_output(fig)
    mani.write()
    print(f"pearson_r = {r:.6f} over {len(rows)} joined bins")
    return 0


def cmd_density(args) -> int:
    cfg, schemes, out_dir, cache_dir, cfg_hash, mani = _setup(args, "density")
    params = cfg.model_params
    try:
        level_ids = [int(v) for v in cfg.get("density", "levels").split(",")]
    except ValueError as exc:
        raise UsageError(f"bad density.levels: {exc}") from exc
    n_points = cfg.getint("density", "grid_points")
    for scheme in schemes:
        spec = resolve_basis_spec(cfg, scheme, params)
        if max(level_ids) >= spec.dimension or min(level_ids) < 0:
            raise UsageError(f"level index out of range for dimension "
                             f"{spec.dimension}: {level_ids}")
        matrix = assemble(params, spec)
        with mani.stage(f"density:{scheme.value}", levels=len(level_ids)):
            levels, vecs = solve(matrix, want_vectors=True,
                                 vector_range=(min(level_ids), max(level_ids)))
            for q in level_ids:
                vec = vecs.vectors[:, q - vecs.first_index]
                grid = density_grid(vec, spec, params, float(levels[q]),
                                    level_index=q, n_points=n_points)
                stem = f"density_{scheme.value}_L{q:04d}"
                path = write_csv(
                    out_dir / f"{stem}.csv",
                    {f"x={x:.10g}": grid.values[:, i]
                     for i, x in enumerate(grid.x)},
                    csv_meta(cfg_hash, scheme=scheme.value, level=q,
                             energy=f"{levels[q]:.17g}", norm=f"{grid.norm():.6f}"))
                mani.add_output(path)
                mani.add_output(write_pgm(out_dir / f"{stem}.pgm", grid.values))
                sidecar = out_dir / f"{stem}.json"
                with open(sidecar, "w") as fh:
                    json.dump({"scheme": scheme.value, "level": q,
                               "energy": levels[q], "norm": grid.norm(),
                               "x": [grid.x[0], grid.x[-1], len(grid.x)],
                               "y": [grid.y[0], grid.y[-1], len(grid.y)]},
                              fh, indent=2)
                mani.add_output(sidecar)
                if _want_plots(cfg):
                    fig = plots.save_density_plot(
                        out_dir / f"{stem}.png", grid,
                        title=f"{scheme.value} level {q}, E = {levels[q]:.4f}")
                    mani.add_output(fig)
    mani.write()
    return 0


def cmd_bias_study(args) -> int:
    cfg, _, out_dir, _, cfg_hash, mani = _setup(args, "bias-study")
    omegas = [float(v) for v in (args.omegas or "0,0.25,0.5,0.75,1").split(",")]
    with mani.stage("bias-study", trials=cfg.getint("stats", "error_trials")):
        rows = bias_study(cfg.getint("stats", "bin_size"), omegas,
                          trials=cfg.getint("stats", "error_trials"),
                          seed=cfg.getint("stats", "seed"))
    path = write_csv(out_dir / "bias_study.csv",
                     {k: np.array([r[k] for r in rows])
                      for k in ("omega_true", "mean_omega", "std_omega",
                                "bias", "trials", "bin_size")},
                     csv_meta(cfg_hash))
    mani.add_output(path)
    if _want_plots(cfg):
        mani.add_output(plots.save_bias_plot(out_dir / "bias_study.png", rows))
    mani.write()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gcmlab",
                                description="collective-model chaos laboratory")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="diagonalize and certify spectra")
    _common_flags(sp)
    for flag, kw in (("--scheme", {}), ("--dimension", {"type": int}),
                     ("--a-osc", {"dest": "a_osc"}), ("--c-shift", {"dest": "c_shift"}),
                     ("--certify", {"choices": ["none", "tail", "dimension", "both"]}),
                     ("--A", {"dest": "A"}), ("--B", {"dest": "B"}),
                     ("--C", {"dest": "C"}), ("--K", {"dest": "K"}),
                     ("--hbar", {})):
        sp.add_argument(flag, **kw)
    sp.set_defaults(func=cmd_spectrum)

    bp = sub.add_parser("brody", help="energy-resolved Brody parameter")
    _common_flags(bp)
    bp.add_argument("--levels", help="external level list (CSV or one per line)")
    for flag in ("--scheme", "--dimension", "--bin-size", "--shift",
                 "--unfold-degree", "--A", "--B", "--C", "--K", "--hbar"):
        bp.add_argument(flag, dest=flag.lstrip("-").replace("-", "_"))
    bp.set_defaults(func=cmd_brody)

    cp = sub.add_parser("classical", help="classical regular fraction vs energy")
    _common_flags(cp)
    for flag in ("--energies", "--count", "--t-max", "--A", "--B", "--C", "--K"):
        cp.add_argument(flag, dest=flag.lstrip("-").replace("-", "_"))
    cp.set_defaults(func=cmd_classical)

    mp = sub.add_parser("freg-map", help="f_reg over a (B, E) grid")
    _common_flags(mp)
    for flag in ("--b-values", "--e-values", "--count", "--t-max"):
        mp.add_argument(flag, dest=flag.lstrip("-").replace("-", "_"))
    mp.set_defaults(func=cmd_freg_map)

    qp = sub.add_parser("compare", help="join a Brody curve with an f_reg curve")
    _common_flags(qp)
    qp.add_argument("--brody", required=True, help="brody_*.csv file")
    qp.add_argument("--freg", required=True, help="freg_curve.csv file")
    qp.add_argument("--e-min", type=float, dest="e_min")
    qp.add_argument("--e-max", type=float, dest="e_max")
    qp.add_argument("--join-tol", type=float, dest="join_tol")
    qp.set_defaults(func=cmd_compare)

    dp = sub.add_parser("density", help="eigenstate densities on the shape plane")
    _common_flags(dp)
    dp.add_argument("--levels", dest="levels_arg",
                    help="comma-separated level ordinals")
    for flag in ("--scheme", "--dimension", "--grid-points", "--A", "--B",
                 "--C", "--K", "--hbar"):
        dp.add_argument(flag, dest=flag.lstrip("-").replace("-", "_"))
    dp.set_defaults(func=cmd_density)

    ap = sub.add_parser("bias-study", help="Monte-Carlo fitter calibration")
    _common_flags(ap)
    ap.add_argument("--omegas", help="comma-separated true omega values")
    for flag in ("--bin-size", "--trials"):
        ap.add_argument(flag, dest=flag.lstrip("-").replace("-", "_"))
    ap.set_defaults(func=cmd_bias_study)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, RuntimeError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return COMPUTE_ERROR


if __name__ == "__main__":
    sys.exit(main())
