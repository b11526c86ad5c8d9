"""Command-line scenario runner."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import focal, holonomy, orbits, report, scenarios, symspace, torusvar, tube
from .errors import UsageError
from .scenarios import Scenario

CURVATURE_TOL = 1e-9
TRANSPORT_TOL = 1e-5


def _germ_summary(amb, germ) -> dict:
    return {"ambient": amb.name, "dim_ambient": report.measure(amb.dim), "kind": germ.kind,
            "dim_orbit": report.measure(germ.dim), "codim_orbit": report.measure(germ.codim)}


def _probe_record(p: dict) -> dict:
    """Failing focal probe with every number tagged by its tolerance."""
    out = {"probe": report.measure(int(p["probe"])), "passed": bool(p["passed"]),
           "direction": [report.measure(float(x), 0.0, "+-") for x in p["direction"]],
           "radius_residual": report.measure(float(p["radius_residual"]), 1e-6)}
    for side in ("p", "q"):
        out[f"radii_{side}"] = [report.measure(float(r), 1e-6, "+-") for r in p[f"radii_{side}"]]
        out[f"mult_{side}"] = [report.measure(int(m)) for m in p[f"mult_{side}"]]
    for key in ("source",):
        if key in p:
            out[key] = p[key]
    if "psi_index" in p:
        out["psi_index"] = report.measure(int(p["psi_index"]))
    return out


def _check_curvature(amb, sc, seed):
    res = symspace.curvature_identity_residuals(amb, int(sc.sampling.get("curvature_samples", 1000)), seed)
    metrics = {k: report.measure(res[k], CURVATURE_TOL) for k in ("antisym_xy", "antisym_zw", "pair_symmetry", "bianchi")}
    metrics["min_sectional"] = report.measure(res["min_sectional"], -1e-10, ">=")
    outcomes = {"identities": all(res[k] <= CURVATURE_TOL for k in ("antisym_xy", "antisym_zw", "pair_symmetry", "bianchi")),
                "nonnegative_sectional": res["min_sectional"] >= -1e-10}
    return report.check_entry("curvature", outcomes, metrics, sc.expect), {}


def _check_focal_profile(germ, sc, xi):
    dirs = [("e%d" % i, e) for i, e in enumerate(np.eye(germ.codim))]
    if xi is not None:
        dirs.append(("xi", xi))
    csvs, profiles = {}, {}
    for tag, d in dirs:
        prof = focal.focal_profile(germ, d)
        csvs[f"focal_profile_{tag}.csv"] = prof.to_csv()
        profiles[tag] = {"scan_limit": report.measure(prof.scan_limit, 0.0, "+-"),
                         "events": [{"radius": report.measure(r, 1e-6, "+-"), "multiplicity": report.measure(int(m)),
                                     "min_singular_value": report.measure(s, focal.EVENT_TOL)}
                                    for r, m, s in prof.events]}
    entry = report.check_entry("focal_profile", {"computed": True}, {}, sc.expect, profiles)
    return entry, csvs


def _check_transport(germ, sc, seed):
    n = min(germ.dim, int(sc.sampling["transport_vectors"]))
    worst, mapping = 0.0, 0.0
    for i in range(n):
        res = torusvar.isometry_transport_check(germ, germ.m_unit[:, i], seed=seed + i)
        worst = max(worst, res["residual"])
        mapping = max(mapping, res["mapping_residual"])
    metrics = {"transport_residual": report.measure(worst, TRANSPORT_TOL),
               "mapping_residual": report.measure(mapping, 1e-6)}
    return report.check_entry("transport", {"isometries_transport": worst <= TRANSPORT_TOL}, metrics, sc.expect), {}


def _check_equifocal(tb, sc, seed):
    res = tube.verify_equifocal(tb, seed=seed, n_loops=int(sc.sampling["loops"]))
    tols = {"section_bracket": tube.ABELIAN_TOL, "section_curvature": tube.ABELIAN_TOL,
            "normal_space_angle": tube.FLAT_TOL, "isotropy_on_section": tube.FLAT_TOL,
            "holonomy_in_group": tube.FLAT_TOL, "loop_transport": tube.FLAT_TOL, "loop_closure": 1e-8,
            "focal_radius": 1e-6}
    metrics = {k: report.measure(v, tols.get(k, tube.FLAT_TOL)) for k, v in res["worst_residuals"].items()}
    metrics["n_focal_probes"] = report.measure(int(res["n_focal_probes"]))
    metrics["n_failing_probes"] = report.measure(len(res["failing_probes"]))
    outcomes = {k: res[k] for k in ("abelian", "globally_flat", "constant_focal")}
    details = {"failing_probes": [_probe_record(p) for p in res["failing_probes"][:5]]}
    return report.check_entry("equifocal", outcomes, metrics, sc.expect, details), {}


def _check_reconstruction(tb, sc, seed):
    res = tube.reconstruct_check(tb, int(sc.sampling["reference"]), seed)
    metrics = {"tube_dim": report.measure(int(res["tube_dim"])), "reference_dim": report.measure(int(res["reference_dim"])),
               "hausdorff_forward": report.measure(res["hausdorff_forward"], tube.HAUSDORFF_TOL),
               "hausdorff_backward": report.measure(res["hausdorff_backward"], tube.HAUSDORFF_TOL)}
    if not res["structural_failure"]:
        metrics["samples_tube"] = report.measure(int(res["samples_tube"]))
        metrics["samples_reference"] = report.measure(int(res["samples_reference"]))
    outcomes = {"structure": not res["structural_failure"], "hausdorff": res["passed"]}
    return report.check_entry("reconstruction", outcomes, metrics, sc.expect), {}


def focal_preservation_probes(germ, hat_g, n_probes: int, seed=0, max_length: float = 2.0) -> dict:
    """Probe focal data under elements of the polar group and under loop holonomies (alternating)."""
    rng = np.random.default_rng(seed)
    limit = focal.default_scan_limit(germ)
    records = []
    for k in range(n_probes):
        if k % 2 == 0 or germ.dim == 0:
            c = rng.uniform(-np.pi, np.pi, hat_g.dim)
            psi, kind = tube.group_exp(hat_g, c), "polar_group"
        else:
            segs, _ = orbits.close_loop(germ, orbits.random_segments(germ, rng, 2, max_length))
            psi, kind = orbits.loop_holonomy(germ, segs), "loop_transport"
        rep = focal.preserves_focal_structure(psi, germ, germ, 1, seed=seed + k, scan_limit=limit)
        p = dict(rep["probes"][0], probe=k, source=kind)
        records.append(p)
    failing = [p for p in records if not p["passed"]]
    return {"passed": not failing, "n_probes": n_probes, "n_failed": len(failing), "probes": records}


def _check_focal_preservation(germ, hat_g, sc, seed):
    res = focal_preservation_probes(germ, hat_g, int(sc.sampling["probes"]), seed, float(sc.sampling["max_length"]))
    worst = max([p["radius_residual"] for p in res["probes"] if np.isfinite(p["radius_residual"])], default=0.0)
    metrics = {"n_probes": report.measure(res["n_probes"]), "n_failed": report.measure(res["n_failed"]),
               "radius_residual": report.measure(worst, 1e-6)}
    details = {"failing_probes": [_probe_record(p) for p in res["probes"] if not p["passed"]][:5]}
    return report.check_entry("focal_preservation", {"preserved": res["passed"]}, metrics, sc.expect, details), {}


def _check_rank_additivity(tb, sc):
    rows, ok = [], True
    for spec in sc.rank_additivity:
        nu = scenarios.normal_coefficients(spec, tb.germ.codim)
        res = tube.rank_additivity(tb, nu)
        ok = ok and res["holds"]
        rows.append({"rho_norm": report.measure(res["rho_norm"], 0.0, "+-"), "ker_exp": report.measure(int(res["lhs"])),
                     "ker_omega": report.measure(int(res["ker_omega"])),
                     "focal_multiplicity_rho": report.measure(int(res["focal_multiplicity_rho"])),
                     "holds": bool(res["holds"])})
    return report.check_entry("rank_additivity", {"additive": ok}, {}, sc.expect, rows), {}


def run_scenario(sc: Scenario, seed: int | None = None) -> tuple[dict, dict]:
    """Execute the requested checks in dependency order; returns (report, csv files)."""
    seed = int(sc.sampling["seed"] if seed is None else seed)
    amb = scenarios.build_ambient(sc)
    germ = scenarios.build_orbit(sc, amb)
    xi = scenarios.normal_coefficients(sc.xi, germ.codim) if sc.xi is not None else None
    samp = sc.sampling
    rep = {"schema_version": report.SCHEMA_VERSION, "scenario": sc.name, "seed": report.measure(seed),
           "description": sc.description, "germ": _germ_summary(amb, germ), "checks": []}
    csvs = {}
    hat_g = tb = None
    needs_group = any(c in sc.checks for c in scenarios.TUBE_CHECKS + ("focal_preservation",))
    if needs_group:
        hat_g = holonomy.build_hat_G(germ, int(samp["hat_g_curves"]), int(samp["hat_g_loops"]), seed)
        rep["polar_group"] = {"dim": report.measure(int(hat_g.dim)),
                              "dim_L_p": report.measure(int(hat_g.meta.get("dim_L_p", 0)))}
    if any(c in sc.checks for c in scenarios.TUBE_CHECKS):
        tb = tube.build_partial_tube(germ, xi, hat_g, n_curves=int(samp["curves"]), n_group=int(samp["group"]),
                                     seed=seed, max_length=float(samp["max_length"]))
        rep["tube"] = {"xi_norm": report.measure(float(np.linalg.norm(xi)), 0.0, "+-"),
                       "epsilon": report.measure(float(tb.epsilon), 0.0, "+-"), "principal": bool(tb.principal),
                       "fibre_dim": report.measure(int(tb.fibre_dim)), "codim": report.measure(int(tb.codim)),
                       "samples": report.measure(len(tb.frame_isometries))}
    for name in scenarios.KNOWN_CHECKS:
        if name not in sc.checks:
            continue
        if name == "curvature":
            entry, files = _check_curvature(amb, sc, seed)
        elif name == "focal_profile":
            entry, files = _check_focal_profile(germ, sc, xi)
        elif name == "transport":
            entry, files = _check_transport(germ, sc, seed)
        elif name == "equifocal":
            entry, files = _check_equifocal(tb, sc, seed)
        elif name == "reconstruction":
            entry, files = _check_reconstruction(tb, sc, seed)
        elif name == "focal_preservation":
            entry, files = _check_focal_preservation(germ, hat_g, sc, seed)
        else:
            entry, files = _check_rank_additivity(tb, sc)
        rep["checks"].append(entry)
        csvs.update(files)
    rep["expectations"] = dict(sorted(sc.expect.items()))
    rep["passed"] = all(c["passed"] for c in rep["checks"])
    return rep, csvs


def _describe(sc: Scenario) -> str:
    lines = [f"{sc.name}: {sc.description}",
             f"  pair: {sc.pair}", f"  action: {sc.action}",
             f"  checks: {', '.join(sc.checks) or '(none)'}"]
    if sc.expect:
        lines.append(f"  expected outcomes: {sc.expect}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="equifocal", description="Equifocal submanifold scenario runner")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file or built-in scenario")
    r.add_argument("scenario")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", default=None, help="directory for report.json and CSV profiles")
    sub.add_parser("list-scenarios", help="list built-in scenarios")
    d = sub.add_parser("describe", help="describe a built-in scenario")
    d.add_argument("name")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-scenarios":
            for name in scenarios.builtin_names():
                print(f"{name}: {scenarios.load_scenario(name).description}")
            return 0
        if args.command == "describe":
            print(_describe(scenarios.load_scenario(args.name)))
            return 0
        sc = scenarios.load_scenario(args.scenario)
        rep, csvs = run_scenario(sc, args.seed)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        report.write(rep, csvs, args.out)
    else:
        sys.stdout.write(report.dumps(rep))
    for line in report.summary_lines(rep):
        print(line, file=sys.stderr)
    return 0 if rep["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
