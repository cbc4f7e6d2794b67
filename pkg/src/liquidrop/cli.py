"""Command-line front end.

Subcommands
-----------
energy      EnergyBreakdown of a shape file (balls or voxels)
curve       shape-optimized upper bounds over a mass grid, plus diagnostics
dissociate  dissociation-into-balls table and switch thresholds
split       sphere-cut decomposition demo on a voxel file
stability   mode-stability scan and sign-change threshold
converge    voxel refinement study for the unit ball

Configuration is plain ``key value`` text with command-line overrides; every
CSV row carries a hash of the effective configuration and all quantities are
in dimensionless model units.  Exit codes: 0 success, 1 configuration error,
2 numerical failure in a required stage.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import ballmodel, curve as curvemod, decomposition, geometry, riesz

__all__ = ["main"]


class ConfigError(Exception):
    pass


def _parse_grid(text: str) -> np.ndarray:
    """Grid spec ``min:max:count[:linear|log]``."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"bad grid spec {text!r}, want min:max:count[:linear|log]")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {text!r}: {exc}") from None
    scale = parts[3] if len(parts) == 4 else "linear"
    if lo <= 0.0 or hi <= lo or count < 2:
        raise ConfigError("grid must be positive, increasing, with at least 2 points")
    if scale == "linear":
        return np.linspace(lo, hi, count)
    if scale == "log":
        return np.geomspace(lo, hi, count)
    raise ConfigError(f"unknown grid scale {scale!r}")


def _parse_float_list(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"bad list {text!r}: {exc}") from None
    if not values:
        raise ConfigError("empty list")
    return values


# option name -> (converter from string, default)
_OPTIONS: dict[str, dict[str, tuple]] = {
    "energy": {
        "input": (str, None),
        "lambda": (float, 1.0),
        "dim": (int, 3),
        "voxel_h": (float, None),
        "out": (str, None),
    },
    "curve": {
        "a_grid": (str, "0.5:5:8:linear"),
        "legendre_order": (int, 6),
        "seed": (int, 0),
        "restarts": (int, 2),
        "max_iterations": (int, 600),
        "quadrature_order": (int, 64),
        "out": (str, None),
        "report": (str, None),
    },
    "dissociate": {
        "amin": (float, 0.5),
        "amax": (float, 20.0),
        "points": (int, 100),
        "out": (str, None),
        "report": (str, None),
    },
    "split": {
        "input": (str, None),
        "radius": (float, None),
        "rlo": (float, None),
        "rhi": (float, None),
        "lambda": (float, 1.0),
        "out": (str, None),
    },
    "stability": {
        "a_grid": (str, "1:20:8:linear"),
        "mode": (int, 2),
        "eps": (float, 1e-3),
        "out": (str, None),
        "report": (str, None),
    },
    "converge": {
        "h": (str, "0.2,0.1,0.05"),
        "lambda": (float, 1.0),
        "out": (str, None),
        "report": (str, None),
    },
}


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" in line:
                    key, _, val = line.partition("=")
                else:
                    key, _, val = line.partition(" ")
                key, val = key.strip().replace("-", "_"), val.strip()
                if not key or not val:
                    raise ConfigError(f"{path}:{lineno}: expected 'key value'")
                values[key] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    return values


def _merge_settings(subcommand: str, cli: dict, config_path: str | None) -> dict:
    table = _OPTIONS[subcommand]
    file_values = _read_config_file(config_path) if config_path else {}
    unknown = set(file_values) - set(table)
    if unknown:
        raise ConfigError(f"unknown config keys for {subcommand}: {sorted(unknown)}")
    merged = {}
    for key, (conv, default) in table.items():
        if cli.get(key) is not None:
            merged[key] = cli[key]
        elif key in file_values:
            try:
                merged[key] = conv(file_values[key])
            except ValueError as exc:
                raise ConfigError(f"config key {key}: {exc}") from None
        else:
            merged[key] = default
    return merged


def _config_hash(subcommand: str, settings: dict) -> str:
    """Hash of the computational configuration; output paths excluded."""
    lines = [f"subcommand={subcommand}"]
    lines += [f"{k}={settings[k]!r}" for k in sorted(settings) if k not in ("out", "report")]
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:12]


def _kernel_params(settings: dict, dim_key: str = "dim") -> riesz.RieszParams:
    try:
        return riesz.RieszParams(settings.get(dim_key, 3), settings["lambda"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _write_csv(path: str, columns: list[str], rows: list[list], config_hash: str) -> None:
    with open(path, "w") as fh:
        fh.write("# units: dimensionless model units\n")
        fh.write(",".join(columns + ["config"]) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + f",{config_hash}\n")


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_report(path: str | None, payload: dict) -> None:
    if path is None:
        return
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj)!r}")


def _load_shape_file(path: str):
    try:
        with open(path) as fh:
            first = fh.readline()
    except OSError as exc:
        raise ConfigError(f"cannot read input file: {exc}") from None
    if first.startswith("voxel"):
        return geometry.load_voxel_set(path)
    return geometry.load_ball_configuration(path)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _run_energy(settings: dict, chash: str) -> int:
    if not settings["input"]:
        raise ConfigError("energy requires --input")
    params = _kernel_params(settings)
    shape = _load_shape_file(settings["input"])
    breakdown = riesz.total_energy(shape, params)
    payload = {
        "config": settings,
        "config_hash": chash,
        "volume": breakdown.volume,
        "perimeter": breakdown.perimeter,
        "riesz": breakdown.riesz,
        "total": breakdown.total,
    }
    _write_report(settings["out"], payload)
    print(
        f"volume={breakdown.volume!r} perimeter={breakdown.perimeter!r} "
        f"riesz={breakdown.riesz!r} total={breakdown.total!r}"
    )
    return 0


def _run_curve(settings: dict, chash: str) -> int:
    grid = _parse_grid(settings["a_grid"])
    config = curvemod.OptimizerConfig(
        legendre_order=settings["legendre_order"],
        restarts=settings["restarts"],
        max_iterations=settings["max_iterations"],
        quadrature_order=settings["quadrature_order"],
        seed=settings["seed"],
    )
    t0 = time.perf_counter()
    curve = curvemod.build_curve(grid, config)
    structure = curvemod.structural_checks(curve)
    diam = curvemod.diameter_monitor(curve)
    elapsed = time.perf_counter() - t0
    if all(pt.status.startswith("failed") for pt in curve.points):
        print("error: every grid point failed", file=sys.stderr)
        return 2

    rows = [
        [pt.mass, pt.upper_bound, pt.per_particle, pt.source, pt.diameter, pt.virial_residual, pt.status]
        for pt in curve.points
    ]
    if settings["out"]:
        _write_csv(
            settings["out"],
            ["A", "E_upper", "e_upper", "source", "diam", "virial_residual", "status"],
            rows,
            chash,
        )
    payload = {
        "config": settings,
        "config_hash": chash,
        "seed": settings["seed"],
        "relaxed_curve": curvemod.relaxed_curve(curve),
        "a_star": structure.a_star,
        "a_zero": structure.a_zero,
        "max_concavity_defect": structure.max_concavity_defect,
        "subadditivity_violations": structure.subadditivity_violations,
        "subadditivity_tolerance": structure.subadditivity_tolerance,
        "diameter_over_mass": diam.ratios,
        "diameter_constant": diam.empirical_constant,
        "timings_seconds": {"total": elapsed},
    }
    _write_report(settings["report"], payload)
    print(
        f"curve over {len(grid)} points: A*={structure.a_star!r} A0={structure.a_zero!r} "
        f"violations={len(structure.subadditivity_violations)}"
    )
    return 0


def _run_dissociate(settings: dict, chash: str) -> int:
    if settings["amax"] <= settings["amin"]:
        raise ConfigError("amax must exceed amin")
    grid = np.linspace(settings["amin"], settings["amax"], settings["points"])
    rows = []
    max_k = 1
    for mass in grid:
        res = ballmodel.dissociation_energy(float(mass))
        max_k = max(max_k, res.k)
        rows.append([float(mass), res.k, res.energy_per_particle, res.per_ball_mass])
    if settings["out"]:
        _write_csv(settings["out"], ["A", "k", "e_tilde", "per_ball_mass"], rows, chash)
    thresholds = {f"a_{k}": ballmodel.dissociation_threshold(k) for k in range(1, max_k + 1)}
    payload = {"config": settings, "config_hash": chash, "thresholds": thresholds}
    _write_report(settings["report"], payload)
    print(f"dissociation table: {len(rows)} rows, k up to {max_k}, a_1={thresholds['a_1']!r}")
    return 0


def _run_split(settings: dict, chash: str) -> int:
    if not settings["input"]:
        raise ConfigError("split requires --input")
    shape = _load_shape_file(settings["input"])
    if not isinstance(shape, geometry.VoxelSet):
        raise ConfigError("split expects a voxel file")
    params = _kernel_params(settings)
    if settings["radius"] is not None:
        radius = settings["radius"]
    elif settings["rlo"] is not None and settings["rhi"] is not None:
        radius = decomposition.select_split_radius(shape, settings["rlo"], settings["rhi"])
    else:
        raise ConfigError("split requires --radius or both --rlo and --rhi")
    result = decomposition.split(shape, radius, params)
    payload = {
        "config": settings,
        "config_hash": chash,
        "radius": result.radius,
        "volume_inside": geometry.volume(result.inside),
        "volume_outside": geometry.volume(result.outside),
        "slice_area": result.slice_area,
        "perimeter_defect": result.perimeter_defect,
        "riesz_defect": result.riesz_defect,
    }
    _write_report(settings["out"], payload)
    print(
        f"split at r={result.radius!r}: slice={result.slice_area!r} "
        f"per_defect={result.perimeter_defect!r} riesz_defect={result.riesz_defect!r}"
    )
    return 0


def _run_stability(settings: dict, chash: str) -> int:
    grid = _parse_grid(settings["a_grid"])
    mode = settings["mode"]
    eps = settings["eps"]
    rows = []
    kappas = []
    for mass in grid:
        kappa = curvemod.stability_probe(float(mass), mode, eps)
        kappas.append(kappa)
        rows.append([float(mass), kappa])
    if settings["out"]:
        _write_csv(settings["out"], ["A", f"kappa_{mode}"], rows, chash)
    threshold = None
    signs = np.sign(kappas)
    flips = np.flatnonzero(np.diff(signs) != 0)
    if len(flips):
        i = int(flips[0])
        threshold = curvemod.instability_threshold(mode, (float(grid[i]), float(grid[i + 1])), eps)
    payload = {
        "config": settings,
        "config_hash": chash,
        "kappa": kappas,
        "threshold": threshold,
    }
    _write_report(settings["report"], payload)
    print(f"stability mode {mode}: threshold={threshold!r}")
    return 0


def _run_converge(settings: dict, chash: str) -> int:
    h_values = _parse_float_list(settings["h"])
    if any(h <= 0 for h in h_values):
        raise ConfigError("h values must be positive")
    params = _kernel_params(settings)
    ball = geometry.ball_of_volume(geometry.UNIT_BALL_VOLUME)
    per_exact = geometry.UNIT_BALL_AREA
    d_exact = riesz.ball_riesz_self_energy(1.0, settings["lambda"])
    rows = []
    per_errs, d_errs = [], []
    for h in h_values:
        vox = geometry.voxelize(ball, h)
        vol = geometry.volume(vox)
        per = geometry.perimeter(vox)
        d_val = riesz.riesz_energy_voxel(vox, params)
        per_err = abs(per - per_exact) / per_exact
        d_err = abs(d_val - d_exact) / d_exact
        per_errs.append(per_err)
        d_errs.append(d_err)
        rows.append([h, vol, per, per_err, d_val, d_err])
    if settings["out"]:
        _write_csv(
            settings["out"],
            ["h", "volume", "perimeter", "perimeter_relerr", "coulomb", "coulomb_relerr"],
            rows,
            chash,
        )
    payload = {
        "config": settings,
        "config_hash": chash,
        "perimeter_relative_errors": per_errs,
        "coulomb_relative_errors": d_errs,
        "perimeter_monotone": bool(np.all(np.diff(per_errs) < 0)),
        "coulomb_monotone": bool(np.all(np.diff(d_errs) < 0)),
    }
    _write_report(settings["report"], payload)
    for row in rows:
        print(f"h={row[0]!r} per_relerr={row[3]!r} coulomb_relerr={row[5]!r}")
    return 0


_RUNNERS = {
    "energy": _run_energy,
    "curve": _run_curve,
    "dissociate": _run_dissociate,
    "split": _run_split,
    "stability": _run_stability,
    "converge": _run_converge,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liquidrop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, flags: dict[str, str]):
        p = sub.add_parser(name)
        p.add_argument("--config", help="key-value configuration file")
        for opt, help_text in flags.items():
            flag = "--" + opt.replace("_", "-")
            p.add_argument(flag, dest=opt, default=None, help=help_text)
        return p

    add("energy", {"input": "shape file (balls or voxel)", "lambda": "Riesz exponent", "dim": "dimension", "out": "JSON output"})
    add("curve", {
        "a_grid": "mass grid min:max:count[:linear|log]",
        "legendre_order": "highest deformation mode",
        "seed": "optimizer seed",
        "restarts": "random restarts",
        "max_iterations": "Nelder-Mead iteration cap",
        "quadrature_order": "polar quadrature order",
        "out": "CSV output",
        "report": "JSON report",
    })
    add("dissociate", {"amin": "grid start", "amax": "grid end", "points": "grid size", "out": "CSV output", "report": "JSON report"})
    add("split", {"input": "voxel file", "radius": "cut radius", "rlo": "radius search start", "rhi": "radius search end", "lambda": "Riesz exponent", "out": "JSON output"})
    add("stability", {"a_grid": "mass grid", "mode": "deformation mode l", "eps": "probe amplitude", "out": "CSV output", "report": "JSON report"})
    add("converge", {"h": "comma-separated voxel spacings", "lambda": "Riesz exponent", "out": "CSV output", "report": "JSON report"})
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    sub = args.subcommand
    cli_values = {}
    for key, (conv, _default) in _OPTIONS[sub].items():
        raw = getattr(args, key, None)
        if raw is None:
            cli_values[key] = None
        else:
            try:
                cli_values[key] = conv(raw)
            except ValueError as exc:
                print(f"error: option {key}: {exc}", file=sys.stderr)
                return 1

    try:
        settings = _merge_settings(sub, cli_values, args.config)
        chash = _config_hash(sub, settings)
        return _RUNNERS[sub](settings, chash)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # numerical failure in a required stage
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
