"""Command-line front end: ``hardylab --config run.json [overrides]``.

Each run writes ``result.json`` (with the effective config embedded) and,
depending on the command, ``result.csv``, ``mesh.txt`` and ``plot.svg``
into the output directory.  Exit status: 0 on success, 2 for an invalid
configuration or out-of-range input, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, cone1d
from .errors import ConfigInvalid, HardyLabError, InvariantViolation, NumericalError
from .geometry import DomainSpec, diameter
from .io import dumps_record, save_mesh, write_csv, write_json

COMMANDS = ("mu", "scan", "cone", "cap", "remainder", "ef-check", "phi-delta", "mesh")
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

DEFAULT_TOLERANCES = {"eig": 1e-10, "bisect": 1e-2, "cap": 1e-8, "bessel": 1e-10}
KNOWN_KEYS = {
    "command", "domain", "lambda", "lambda_range", "level", "tolerances", "mesh",
    "output_dir", "seed", "N", "theta", "phi0", "sigma", "samples", "mode", "R",
    "delta", "radii", "S", "pairs",
}


# ------------------------------------------------------------ validation


def _number(cfg, key, default=None, lo=-math.inf, hi=math.inf, integer=False):
    value = cfg.get(key, default)
    if value is None:
        raise ConfigInvalid(f"missing required field {key!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigInvalid(f"{key!r} must be a number")
    if integer and int(value) != value:
        raise ConfigInvalid(f"{key!r} must be an integer")
    if not math.isfinite(value) or not lo <= value <= hi:
        raise ConfigInvalid(f"{key!r} = {value} outside [{lo}, {hi}]")
    return int(value) if integer else float(value)


def normalize_config(raw: dict) -> dict:
    """Check a raw config against the command's preconditions and fill defaults."""
    if not isinstance(raw, dict):
        raise ConfigInvalid("config must be a JSON object")
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigInvalid(f"unknown config fields: {sorted(unknown)}")
    cmd = raw.get("command")
    if cmd not in COMMANDS:
        raise ConfigInvalid(f"command must be one of {COMMANDS}, got {cmd!r}")
    cfg = {"command": cmd, "output_dir": str(raw.get("output_dir", "out"))}
    tol = dict(DEFAULT_TOLERANCES)
    given = raw.get("tolerances", {})
    if not isinstance(given, dict) or set(given) - set(tol):
        raise ConfigInvalid(f"tolerances must be an object with keys from {sorted(tol)}")
    for k in given:
        tol[k] = _number(given, k, lo=1e-300)
    cfg["tolerances"] = tol

    if cmd in ("mu", "scan", "remainder", "mesh"):
        if "domain" not in raw:
            raise ConfigInvalid("a domain is required")
        domain = DomainSpec.from_dict(raw["domain"])
        cfg["domain"] = domain.to_dict()
        default_level = 0 if cmd == "remainder" else analysis.DEFAULT_LEVEL
        cfg["level"] = _number(raw, "level", default_level, 0, analysis.MAX_LEVEL, integer=True)
        m = raw.get("mesh", {})
        if not isinstance(m, dict) or set(m) - {"target_h", "q", "layers"}:
            raise ConfigInvalid("mesh must be an object with keys target_h, q, layers")
        recipe = {"q": _number(m, "q", 0.5, 1e-6, 1 - 1e-6)}
        recipe["target_h"] = _number(m, "target_h", lo=1e-9) if m.get("target_h") is not None else None
        recipe["layers"] = _number(m, "layers", analysis.DEFAULT_LAYERS, 0, 10_000, integer=True)
        cfg["mesh"] = recipe
    if cmd == "mu":
        cfg["lambda"] = _number(raw, "lambda", 0.0)
        radii = raw.get("radii")
        if radii is not None:
            if not isinstance(radii, list) or not radii:
                raise ConfigInvalid("radii must be a non-empty list")
            radii = [_number({"r": r}, "r", lo=0.0) for r in radii]
        cfg["radii"] = radii
    if cmd == "scan":
        rng = raw.get("lambda_range", [-50.0, 50.0])
        if not isinstance(rng, list) or len(rng) != 2:
            raise ConfigInvalid("lambda_range must be [lo, hi]")
        lo, hi = (_number({"v": v}, "v") for v in rng)
        if not lo < hi:
            raise ConfigInvalid("lambda_range needs lo < hi")
        cfg["lambda_range"] = [lo, hi]
    if cmd == "cone":
        N = _number(raw, "N", lo=2, integer=True)
        cfg["N"] = N
        sigma = raw.get("sigma", "Arc" if N == 2 else ("Cap" if "phi0" in raw else "FullSphere"))
        cfg["sigma"] = sigma
        if sigma == "Arc":
            cfg["theta"] = _number(raw, "theta", lo=0.0, hi=2 * math.pi)
        elif sigma == "Cap":
            cfg["phi0"] = _number(raw, "phi0", lo=0.0, hi=math.pi)
        elif sigma != "FullSphere":
            raise ConfigInvalid(f"unknown sigma {sigma!r}")
    if cmd == "cap":
        cfg["N"] = _number(raw, "N", lo=3, integer=True)
        cfg["phi0"] = _number(raw, "phi0", lo=0.0, hi=math.pi)
    if cmd == "remainder":
        cfg["samples"] = _number(raw, "samples", 100, 1, 1_000_000, integer=True)
        cfg["seed"] = _number(raw, "seed", 0, 0, 2**64 - 1, integer=True)
        cfg["mode"] = raw.get("mode", "half-plane")
        if cfg["mode"] not in ("half-plane", "cone"):
            raise ConfigInvalid("mode must be 'half-plane' or 'cone'")
    if cmd == "ef-check":
        N = _number(raw, "N", 2, 2, 64, integer=True)
        cfg["N"] = N
        if N == 2:
            cfg["theta"] = _number(raw, "theta", math.pi, 0.0, 2 * math.pi)
        else:
            cfg["phi0"] = _number(raw, "phi0", math.pi / 2, 0.0, math.pi)
        cfg["S"] = _number(raw, "S", cone1d.DEFAULT_CYLINDER_LENGTH, 1e-6)
        cfg["pairs"] = _number(raw, "pairs", 20, 1, 10_000, integer=True)
        cfg["seed"] = _number(raw, "seed", 0, 0, 2**64 - 1, integer=True)
    if cmd == "phi-delta":
        cfg["R"] = _number(raw, "R", lo=0.0, hi=1.0)
        cfg["delta"] = _number(raw, "delta", lo=0.5, hi=1.0)
    return cfg


def _recipe(cfg):
    m = cfg["mesh"]
    return analysis.MeshRecipe(m["target_h"], m["q"], m["layers"])


# -------------------------------------------------------------- commands


def _run_mu(cfg, out):
    domain = DomainSpec.from_dict(cfg["domain"])
    res = analysis.compute_mu(domain, cfg["lambda"], cfg["level"], _recipe(cfg), cfg["tolerances"]["eig"])
    radii = cfg["radii"]
    if radii is None:
        radii = np.geomspace(1e-4, 1.0, 41) * domain.scale
    prof = analysis.concentration_profile(res, radii)
    save_mesh(res.mesh, out / "mesh.txt")
    write_csv(out / "result.csv", ["r", "mass_fraction"], zip(prof.radii, prof.mass_fraction))
    from .plotting import line_plot

    line_plot(out / "plot.svg", [(prof.radii, prof.mass_fraction, f"level {res.mesh_level}")],
              "r", "m(r)", "singular-mass fraction", logx=True)
    record = res.to_dict()
    record["concentration"] = prof.to_dict()
    return record


def _run_scan(cfg, out):
    domain = DomainSpec.from_dict(cfg["domain"])
    res = analysis.scan_lambda(domain, cfg["lambda_range"], cfg["level"], cfg["tolerances"]["bisect"],
                               _recipe(cfg), cfg["tolerances"]["eig"])
    write_csv(out / "result.csv", ["lambda", "mu_h", "certificate"],
              [(lam, mu, cert) for lam, mu, _, cert in res.samples])
    from .plotting import line_plot

    lam = [s[0] for s in res.samples]
    mu = [s[1] for s in res.samples]
    line_plot(out / "plot.svg", [(lam, mu, "mu_h")], "lambda", "mu_h",
              "discrete mu_lambda", hlines=[(cone1d.mu_plus(2), "mu+")])
    record = res.to_dict()
    record["domain"] = domain.to_dict()
    record["mu_plus"] = cone1d.mu_plus(2)
    record["diameter_bound"] = cone1d.bessel_disc_lambda1(cfg["tolerances"]["bessel"]) / diameter(domain) ** 2
    return record


def _run_cone(cfg, out):
    N, sigma = cfg["N"], cfg["sigma"]
    angle = cfg.get("theta", cfg.get("phi0"))
    spec = cone1d.ConeSpec(N, sigma, angle)
    lam1 = cone1d.cone_lambda1(spec, cfg["tolerances"]["cap"])
    return {"N": N, "spec": spec.to_dict(), "lambda1": lam1,
            "mu0": cone1d.cone_hardy_constant(N, lam1), "mu_plus": cone1d.mu_plus(N)}


def _run_cap(cfg, out):
    res = cone1d.cap_lambda1(cfg["N"], cfg["phi0"], cfg["tolerances"]["cap"])
    write_csv(out / "result.csv", ["phi", "Phi"], zip(res.grid, res.profile))
    from .plotting import line_plot

    line_plot(out / "plot.svg", [(res.grid, res.profile, f"N = {cfg['N']}")], "phi", "Phi",
              "cap eigenfunction")
    return {"N": cfg["N"], "phi0": cfg["phi0"], "lambda1": res.lambda1, "tol_achieved": res.tol_achieved,
            "mu0": cone1d.cone_hardy_constant(cfg["N"], res.lambda1),
            "history": [list(h) for h in res.history]}


def _run_remainder(cfg, out):
    domain = DomainSpec.from_dict(cfg["domain"])
    return analysis.verify_remainder(domain, cfg["samples"], cfg["seed"], cfg["level"], cfg["mode"],
                                     recipe=_recipe(cfg))


def _run_ef(cfg, out):
    if cfg["N"] == 2:
        spec = cone1d.ConeSpec.arc(cfg["theta"])
    else:
        spec = cone1d.ConeSpec.cap(cfg["N"], cfg["phi0"])
    rows = []
    for k in range(cfg["pairs"]):
        w, g = cone1d.seeded_profiles(spec, cfg["seed"] + k, cfg["S"])
        r = cone1d.emden_fowler_check(spec, w, g, cfg["S"])
        r["err1"] = abs(r["lhs1"] - r["rhs1"]) / max(r["lhs1"], 1.0)
        r["err2"] = abs(r["lhs2"] - r["rhs2"]) / max(r["lhs2"], 1.0)
        rows.append(r)
    write_csv(out / "result.csv", ["lhs1", "rhs1", "lhs2", "rhs2"],
              [(r["lhs1"], r["rhs1"], r["lhs2"], r["rhs2"]) for r in rows])
    return {"cone": spec.to_dict(), "pairs": rows,
            "max_err1": max(r["err1"] for r in rows), "max_err2": max(r["err2"] for r in rows)}


def _run_phi(cfg, out):
    return analysis.phi_delta_integral(cfg["R"], cfg["delta"])


def _run_mesh(cfg, out):
    domain = DomainSpec.from_dict(cfg["domain"])
    mesh = analysis.mesh_for(domain, cfg["level"], _recipe(cfg))
    save_mesh(mesh, out / "mesh.txt")
    from .plotting import mesh_plot

    mesh_plot(out / "plot.svg", mesh, f"{domain.kind}, level {cfg['level']}")
    return {"vertices": mesh.n_vertices, "triangles": mesh.n_triangles,
            "total_area": mesh.total_area(), "domain_area": domain.area(),
            "grading": {"q": mesh.grading.q, "layers": mesh.grading.layers}}


RUNNERS = {
    "mu": _run_mu, "scan": _run_scan, "cone": _run_cone, "cap": _run_cap,
    "remainder": _run_remainder, "ef-check": _run_ef, "phi-delta": _run_phi, "mesh": _run_mesh,
}


def run(raw_config: dict) -> int:
    """Execute one configured command; returns the process exit status."""
    config = raw_config
    out = Path(str(raw_config.get("output_dir", "out"))) if isinstance(raw_config, dict) else Path("out")
    try:
        config = normalize_config(raw_config)
        out = Path(config["output_dir"])
        out.mkdir(parents=True, exist_ok=True)
        result = RUNNERS[config["command"]](config, out)
    except NumericalError as exc:
        return _fail(config, out, exc, EXIT_NUMERICAL)
    except InvariantViolation as exc:
        return _fail(config, out, exc, EXIT_NUMERICAL)
    except HardyLabError as exc:
        return _fail(config, out, exc, EXIT_INVALID)
    except OSError as exc:
        return _fail(config, out, ConfigInvalid(f"output directory not writable: {exc}"), EXIT_INVALID)
    write_json(out / "result.json", {"config": config, "result": result})
    return EXIT_OK


def _fail(config, out, exc, code):
    record = {"config": config, "error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    sys.stderr.write(dumps_record(record))
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "result.json", record)
    except OSError:
        pass
    return code


def build_parser():
    p = argparse.ArgumentParser(prog="hardylab", description="Hardy constants with a boundary singularity.")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--lambda", dest="lam", type=float, help="override the lambda field")
    p.add_argument("--level", type=int, help="override the mesh refinement level")
    p.add_argument("--seed", type=int, help="override the random seed")
    p.add_argument("--out", help="override the output directory")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        return _fail({"config_path": args.config}, Path(args.out or "out"), ConfigInvalid(str(exc)), EXIT_INVALID)
    if isinstance(raw, dict):
        for key, value in (("lambda", args.lam), ("level", args.level), ("seed", args.seed), ("output_dir", args.out)):
            if value is not None:
                raw[key] = value
    return run(raw)


if __name__ == "__main__":
    sys.exit(main())
