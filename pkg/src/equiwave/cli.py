"""Command-line entry point.

Subcommands: validate, stationary, evolve, stability, geometry-check,
regularity-check.  Every run is driven by a JSON config (``--config``),
optionally overridden with ``--set key.path=value``; outputs are CSV
series plus JSON sidecars stamped with the config hash, byte-identical
across repeated runs with the same config and seed.

Exit codes: 0 success (including a "stable" verdict), 1 unstable verdict,
2 solver non-convergence or refused parameters, 3 evolution abort.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import diagnostics, evolution, geodesics, operators, stationary
from .config import (ConfigError, RunConfig, apply_overrides, build_surface,
                     build_target, parse_config)
from .profiles import validate_profile

EXIT_OK = 0
EXIT_UNSTABLE = 1
EXIT_SOLVER = 2
EXIT_EVOLUTION = 3


def _write_json(path, payload, cfg):
    payload = dict(payload)
    payload["config_hash"] = cfg.hash
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(cfg):
    d = cfg["output"]["directory"]
    os.makedirs(d, exist_ok=True)
    return d


def _solve(cfg, surface, target):
    opts = stationary.SolverOptions(
        N=cfg["grid"]["N"], tol=cfg["solver"]["tol"],
        max_iter=cfg["solver"]["max_iter"],
        multistart=cfg["solver"]["multistart"],
        seed=cfg["stability"]["seed"])
    return stationary.solve_stationary(surface, target, cfg["l"],
                                       cfg["omega"], options=opts)


def cmd_validate(cfg):
    surface = build_surface(cfg)
    report = validate_profile(surface)
    _write_json(os.path.join(_outdir(cfg), "validate_report.json"),
                report.as_dict(), cfg)
    print(f"validate: {'pass' if report.passed else 'fail'} "
          f"({len(report.checks)} checks)")
    return EXIT_OK


def cmd_stationary(cfg):
    surface, target = build_surface(cfg), build_target(cfg)
    sol = _solve(cfg, surface, target)
    out = _outdir(cfg)
    with open(os.path.join(out, "solution.csv"), "w") as fh:
        fh.write("r,phi\n")
        for r, p in zip(sol.r, sol.phi):
            fh.write(f"{r:.17g},{p:.17g}\n")
    _write_json(os.path.join(out, "solution.json"), {
        "l": sol.l, "omega": sol.omega, "action": sol.action,
        "residual_norm": sol.residual_norm, "grad_norm": sol.grad_norm,
        "exponents": list(sol.exponents), "converged": sol.converged,
        "iterations": sol.iterations,
    }, cfg)
    print(f"stationary: action={sol.action:.8f} converged={sol.converged}")
    return EXIT_OK if sol.converged else EXIT_SOLVER


def _write_series(path, series):
    with open(path, "w") as fh:
        fh.write(diagnostics.DiagnosticsRecord.CSV_HEADER + "\n")
        for rec in series:
            fh.write(rec.csv_row() + "\n")


def cmd_evolve(cfg):
    surface, target = build_surface(cfg), build_target(cfg)
    sol = _solve(cfg, surface, target)
    if not sol.converged:
        print("evolve: stationary solve did not converge", file=sys.stderr)
        return EXIT_SOLVER
    state = evolution.state_from_stationary(sol, cfg["omega"], surface,
                                            N=cfg["grid"]["N"])
    state = evolution.perturb_state(state, cfg["stability"]["delta"],
                                    seed=cfg["stability"]["seed"])
    try:
        final, snapshots = evolution.run(
            state, cfg["evolve"]["T"], cfl=cfg["evolve"]["cfl"],
            record_every=cfg["evolve"]["record_every"])
    except evolution.EvolutionError as exc:
        print(f"evolve: aborted: {exc}", file=sys.stderr)
        return EXIT_EVOLUTION
    out = _outdir(cfg)
    series = [diagnostics.record_state(s, sol, cfg["omega"],
                                       snapshots=snapshots, t_bar=final.t,
                                       delta_hoelder=cfg["diagnostics"]
                                       ["delta_hoelder"])
              for s in snapshots]
    _write_series(os.path.join(out, "series.csv"), series)
    with open(os.path.join(out, "snapshot.csv"), "w") as fh:
        fh.write("r,u1,u2,u3,v1,v2,v3\n")
        for i in range(final.N):
            row = [final.r[i], *final.u[i], *final.v[i]]
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
    _write_json(os.path.join(out, "snapshot.json"), {
        "t": final.t, "l": final.l, "N": final.N, "R": surface.R,
    }, cfg)
    print(f"evolve: reached t={final.t:.6g}, E drift "
          f"{abs(series[-1].E - series[0].E) / max(abs(series[0].E), 1e-300):.3e}")
    return EXIT_OK


def cmd_stability(cfg):
    surface, target = build_surface(cfg), build_target(cfg)
    sol = _solve(cfg, surface, target)
    if not sol.converged:
        print("stability: stationary solve did not converge", file=sys.stderr)
        return EXIT_SOLVER
    try:
        res = diagnostics.stability_experiment(
            sol, cfg["omega"], cfg["stability"]["delta"], cfg["evolve"]["T"],
            surface, epsilon=cfg["stability"]["epsilon"],
            N=cfg["grid"]["N"], cfl=cfg["evolve"]["cfl"],
            record_every=cfg["evolve"]["record_every"],
            seed=cfg["stability"]["seed"],
            delta_hoelder=cfg["diagnostics"]["delta_hoelder"])
    except evolution.EvolutionError as exc:
        print(f"stability: aborted: {exc}", file=sys.stderr)
        return EXIT_EVOLUTION
    out = _outdir(cfg)
    _write_series(os.path.join(out, "series.csv"), res.series)
    _write_json(os.path.join(out, "summary.json"), {
        "verdict": res.verdict, "sup_dist": res.sup_dist,
        "drifts": {"energy": res.energy_drift, "charge": res.charge_drift},
        "epsilon": res.epsilon,
    }, cfg)
    print(f"stability: {res.verdict} (sup dist {res.sup_dist:.3e}, "
          f"epsilon {res.epsilon:g})")
    return EXIT_OK if res.verdict == "stable" else EXIT_UNSTABLE


def cmd_geometry_check(cfg):
    surface = build_surface(cfg)
    rng = np.random.default_rng(cfg["stability"]["seed"])
    K = 1.05 * float(np.max(surface.k(np.linspace(0.0, surface.R, 512))))
    violations = 0
    sine_res = 0.0
    n_tri = 60
    for _ in range(n_tri):
        r = rng.uniform(0.05, 0.5)
        rp = rng.uniform(0.05, 0.5)
        tp = rng.uniform(0.1, 2.5)
        tri = geodesics.fill_comparisons(
            surface, geodesics.geodesic_distance(surface, r, rp, tp), K)
        if not (tri.dK <= tri.d + 1e-12 and tri.d <= tri.d0 + 1e-12):
            violations += 1
        sine_res = max(sine_res, abs(
            float(surface.f(tri.r)) * math.sin(tri.beta)
            - float(surface.f(tri.rp)) * math.sin(tri.alpha)))
    tri = geodesics.geodesic_distance(surface, 0.3, 0.4, 1.0)
    ident = geodesics.angle_identities_check(surface, tri, K=K)
    eik = geodesics.eikonal_residual(surface, 0.3, 0.4, 1.0)
    payload = {
        "triangles": n_tri,
        "comparison_violations": violations,
        "sine_transfer_max_residual": sine_res,
        "eikonal_residual": eik,
        "identities": {
            "law_of_sines_ratios": list(ident["law_of_sines_ratios"]),
            "dy_drp_residual": ident["dy_drp_residual"],
            "gauss_bonnet_residual": ident["gauss_bonnet_residual"],
            "ratio_m": list(ident["ratio_m"]),
            "angle_derivative_brackets": ident["angle_derivative_brackets"],
        },
        "lightcone_kernel_sample": geodesics.lightcone_kernel_integral(
            surface, 0.3, 0.4, 0.2),
    }
    _write_json(os.path.join(_outdir(cfg), "geometry_report.json"),
                payload, cfg)
    ok = violations == 0 and sine_res < 1e-6
    print(f"geometry-check: {'pass' if ok else 'fail'} "
          f"({violations} comparison violations)")
    return EXIT_OK if ok else EXIT_SOLVER


def cmd_regularity_check(cfg):
    report = operators.regularity_report()
    _write_json(os.path.join(_outdir(cfg), "regularity_report.json"),
                report, cfg)
    rates = [r for c in report["checks"] if c["rate"] for r in c["rate"]]
    ok = all(1.8 <= r <= 2.2 for r in rates)
    print(f"regularity-check: {'pass' if ok else 'fail'} "
          f"({len(report['checks'])} checks)")
    return EXIT_OK if ok else EXIT_SOLVER


_COMMANDS = {
    "validate": cmd_validate,
    "stationary": cmd_stationary,
    "evolve": cmd_evolve,
    "stability": cmd_stability,
    "geometry-check": cmd_geometry_check,
    "regularity-check": cmd_regularity_check,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="equiwave",
        description="Stationary and evolving equivariant wave maps on "
                    "surfaces of revolution.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--set", action="append", default=[],
                       metavar="KEY=VALUE", dest="overrides",
                       help="override a config field (dot-path syntax)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="seed override")
    args = parser.parse_args(argv)

    try:
        text = "{}"
        if args.config:
            with open(args.config) as fh:
                text = fh.read()
        cfg = parse_config(text)
        data = apply_overrides(cfg.data, args.overrides)
        if args.out is not None:
            data["output"]["directory"] = args.out
        if args.seed is not None:
            data["stability"]["seed"] = args.seed
        cfg = parse_config(json.dumps(data))
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    return _COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
