"""Command-line entry point: configure, run, export, and check one experiment.

Exit codes: 0 success, 1 a monitor failed, 2 the configuration could not be
parsed, 3 scenario validation failed (all violated assumptions are listed),
4 the solver stopped at runtime.
"""
from __future__ import annotations

import argparse
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .diagnostics import (all_pairs_dependence_residual, bounds_monitor,
                          stability_experiment, stability_report)
from .errors import CflError, ConfigError, ResolutionError, SolverError
from .mesh import DiscreteField, Mesh, l1_norm, support_bounds
from .model import (ConstraintFunction, Profile, Scenario, box_profile,
                    bump_profile, burgers_flux, cubic_flux, linear_flux,
                    make_truncation_g, polynomial_flux, step_profile,
                    sum_profile, validate_scenario)
from .stepper import (ConvergenceTable, SplittingParameters, Trajectory,
                      export_trajectory, refine_delta, solve)

EXPERIMENTS = ("solve", "stability", "refine", "regions")


@dataclass(frozen=True)
class OutputOptions:
    out_dir: str
    snapshot_stride: int = 1
    emit_regions: bool = False
    emit_diagnostics: bool = True
    figures: bool = True
    inner_stride: int = 0

    def __post_init__(self):
        if self.snapshot_stride < 1:
            raise ConfigError("snapshot_stride must be >= 1")
        if self.inner_stride < 0:
            raise ConfigError("inner_stride must be >= 0")


@dataclass(frozen=True)
class StabilityOptions:
    relative_sizes: tuple = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
    mode: str = "alternate"  # scale | shape | alternate

    def __post_init__(self):
        if self.mode not in ("scale", "shape", "alternate"):
            raise ConfigError(f"unknown perturbation mode {self.mode!r}")
        if not self.relative_sizes:
            raise ConfigError("need at least one perturbation size")


@dataclass(frozen=True)
class RefineOptions:
    levels: int = 4  # measured levels; one extra run serves as reference
    factor: int = 2

    def __post_init__(self):
        if self.levels < 1:
            raise ConfigError("need at least one refinement level")
        if self.factor < 2:
            raise ConfigError("refinement factor must be >= 2")


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs: problem, splitting, outputs, verb."""

    scenario: Scenario
    splitting: SplittingParameters
    outputs: OutputOptions
    experiment: str
    initial_profile: Profile
    stability: StabilityOptions = StabilityOptions()
    refine: RefineOptions = RefineOptions()


# -- config parsing -----------------------------------------------------------


def _require(mapping, key, where):
    if key not in mapping:
        raise ConfigError(f"missing key {key!r} in {where}")
    return mapping[key]


def _build_profile(params) -> Profile:
    kind = _require(params, "kind", "initial data")
    try:
        if kind == "box":
            return box_profile(float(params["left"]), float(params["right"]),
                               float(params["height"]))
        if kind == "bump":
            return bump_profile(float(params["center"]), float(params["width"]),
                                float(params["height"]))
        if kind == "riemann":
            window = params.get("window")
            if window is None:
                raise ConfigError("riemann initial data needs a finite window")
            return step_profile(float(params["jump_at"]), float(params["left"]),
                                float(params["right"]),
                                (float(window[0]), float(window[1])))
        if kind == "two_bumps":
            bumps = _require(params, "bumps", "two_bumps initial data")
            if len(bumps) != 2:
                raise ConfigError("two_bumps needs exactly two bump entries")
            return sum_profile(*[
                bump_profile(float(b["center"]), float(b["width"]),
                             float(b["height"])) for b in bumps
            ])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad initial-data parameters: {exc}") from exc
    raise ConfigError(f"unknown initial-data kind {kind!r}")


def _build_flux(params, range_radius: float):
    if isinstance(params, str):
        params = {"name": params}
    name = _require(params, "name", "flux")
    if name == "linear":
        return linear_flux(float(params.get("speed", 1.0)))
    if name == "burgers":
        return burgers_flux()
    if name == "cubic":
        return cubic_flux(range_radius)
    if name == "poly":
        return polynomial_flux(_require(params, "coefficients", "poly flux"),
                               range_radius)
    raise ConfigError(f"unknown flux preset {name!r}")


def build_run_config(raw: dict, out_override: Optional[str] = None,
                     experiment_override: Optional[str] = None) -> RunConfig:
    """Assemble a RunConfig from a parsed JSON document."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a JSON object")
    sc = _require(raw, "scenario", "configuration")

    try:
        mesh = Mesh(float(_require(sc, "x_left", "scenario")),
                    float(_require(sc, "x_right", "scenario")),
                    int(_require(sc, "n_cells", "scenario")))
    except ValueError as exc:
        raise ConfigError(f"bad mesh: {exc}") from exc

    profile = _build_profile(_require(sc, "initial", "scenario"))
    w0 = profile.field(mesh)
    flux = _build_flux(_require(sc, "flux", "scenario"), l1_norm(w0))

    try:
        constraint = make_truncation_g(float(_require(sc, "bound", "scenario")),
                                       float(_require(sc, "epsilon", "scenario")))
    except ValueError as exc:
        raise ConfigError(f"bad constraint: {exc}") from exc

    horizon = float(_require(sc, "horizon", "scenario"))
    try:
        scenario = Scenario(flux=flux, constraint=constraint, w0=w0,
                            horizon=horizon)
        splitting = SplittingParameters.from_horizon(
            horizon, float(_require(sc, "delta", "scenario")),
            cfl_safety=float(sc.get("cfl_safety", 0.9)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    out_raw = dict(raw.get("outputs", {}))
    if out_override is not None:
        out_raw["out_dir"] = out_override
    if "out_dir" not in out_raw:
        raise ConfigError("outputs.out_dir is required (or pass --out)")
    outputs = OutputOptions(
        out_dir=str(out_raw["out_dir"]),
        snapshot_stride=int(out_raw.get("snapshot_stride", 1)),
        emit_regions=bool(out_raw.get("emit_regions", False)),
        emit_diagnostics=bool(out_raw.get("emit_diagnostics", True)),
        figures=bool(out_raw.get("figures", True)),
        inner_stride=int(out_raw.get("inner_stride", 0)),
    )

    experiment = experiment_override or raw.get("experiment", "solve")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}"
        )

    stab_raw = raw.get("stability", {})
    stability = StabilityOptions(
        relative_sizes=tuple(float(r) for r in stab_raw.get(
            "relative_sizes", StabilityOptions.relative_sizes)),
        mode=stab_raw.get("mode", "alternate"),
    )
    ref_raw = raw.get("refine", {})
    refine = RefineOptions(levels=int(ref_raw.get("levels", 4)),
                           factor=int(ref_raw.get("factor", 2)))

    return RunConfig(scenario=scenario, splitting=splitting, outputs=outputs,
                     experiment=experiment, initial_profile=profile,
                     stability=stability, refine=refine)


def load_config(path, out_override=None, experiment_override=None) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    return build_run_config(raw, out_override, experiment_override)


# -- artifact helpers ----------------------------------------------------------


def _write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def emit_convergence_table(table: ConvergenceTable, out_dir) -> tuple:
    """Write the aligned text table and the CSV; return both paths."""
    header = ("level", "delta", "dx", "n_cells", "l1_distance", "rate")
    lines = []
    rows = []
    for r in table.rows:
        rate = "" if r.rate is None else f"{r.rate:.6g}"
        rows.append((str(r.level), f"{r.delta:.6g}", f"{r.dx:.6g}",
                     str(r.n_cells), f"{r.l1_distance:.10g}", rate))
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    fmt = "  ".join(f"{{:>{w}}}" for w in widths)
    lines.append(fmt.format(*header))
    for row in rows:
        lines.append(fmt.format(*row))
    lines.append("")
    lines.append(f"reference: delta = {table.reference_delta:.6g}, "
                 f"dx = {table.reference_dx:.6g}")
    txt_path = os.path.join(out_dir, "convergence.txt")
    with open(txt_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    csv_path = os.path.join(out_dir, "convergence.csv")
    with open(csv_path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in table.rows:
            rate = "" if r.rate is None else f"{r.rate:.17g}"
            fh.write(f"{r.level},{r.delta:.17g},{r.dx:.17g},{r.n_cells},"
                     f"{r.l1_distance:.17g},{rate}\n")
    return txt_path, csv_path


def perturbed_data(w0: DiscreteField, rel: float, mode: str) -> DiscreteField:
    """Shrink the data by rel, uniformly or weighted by a hump shape.

    Both variants keep |v0| <= |w0| pointwise, so amplitude and support
    margins survive the perturbation.
    """
    if mode == "scale":
        return w0.with_values(w0.values * (1.0 - rel))
    if mode == "shape":
        supp = support_bounds(w0)
        if supp is None:
            return w0
        lo, hi = supp
        center = 0.5 * (lo + hi)
        width = max(0.5 * (hi - lo), w0.mesh.dx)
        shape = bump_profile(center, width, 1.0)(w0.mesh.centers())
        return w0.with_values(w0.values * (1.0 - rel * shape))
    raise ConfigError(f"unknown perturbation mode {mode!r}")


# -- experiment drivers --------------------------------------------------------


def _emit(quiet, text):
    if not quiet:
        print(text)


def _print_monitors(quiet, report):
    for e in report.entries:
        status = "pass" if e.passed else "FAIL"
        _emit(quiet, f"  [{status}] {e.estimate}: lhs = {e.lhs:.6g}, "
                     f"rhs = {e.rhs:.6g}, margin = {e.margin:.6g}")


def _solve_with_artifacts(cfg: RunConfig, quiet: bool) -> tuple:
    out = cfg.outputs
    traj = solve(cfg.scenario, cfg.splitting, validate=False,
                 inner_stride=out.inner_stride)
    os.makedirs(out.out_dir, exist_ok=True)
    if out.emit_diagnostics:
        export_trajectory(traj, out.out_dir, out.snapshot_stride)
    else:
        export_trajectory(traj, out.out_dir, out.snapshot_stride)
    mon = bounds_monitor(traj)
    _write_json(mon.to_json_dict(), os.path.join(out.out_dir, "monitors.json"))
    if out.emit_regions:
        from .constraint import write_region_csv
        times = [traj.snapshots[i].time for i in traj.outer_indices]
        write_region_csv(traj, times, os.path.join(out.out_dir, "regions.csv"))
    if out.figures:
        from . import report as rpt
        rpt.plot_snapshots(traj, os.path.join(out.out_dir, "snapshots.png"))
        rpt.plot_diagnostics(traj, os.path.join(out.out_dir, "diagnostics.png"))
        if out.emit_regions:
            rpt.plot_regions(traj, os.path.join(out.out_dir, "regions.png"))
    _emit(quiet, f"solve: {len(traj.snapshots)} snapshots -> {out.out_dir}")
    _print_monitors(quiet, mon)
    return traj, mon


def _run_solve(cfg: RunConfig, quiet: bool) -> bool:
    _, mon = _solve_with_artifacts(cfg, quiet)
    return mon.passed


def _run_regions(cfg: RunConfig, quiet: bool) -> bool:
    from .constraint import regime_equation_residual, write_region_csv

    out = cfg.outputs
    cfg = replace(cfg, outputs=replace(out, emit_regions=True))
    traj, mon = _solve_with_artifacts(cfg, quiet)
    times = [traj.snapshots[i].time for i in traj.outer_indices]
    regime = regime_equation_residual(traj, times)
    _write_json(regime.to_json_dict(),
                os.path.join(out.out_dir, "regime_report.json"))
    worst_i = max(r.max_res_i for r in regime.rows)
    worst_k = max(r.max_res_k for r in regime.rows)
    _emit(quiet, f"regions: max I-residual {worst_i:.6g}, "
                 f"max K-residual {worst_k:.6g} (diagnostic only)")
    return mon.passed


def _run_stability(cfg: RunConfig, quiet: bool) -> bool:
    out = cfg.outputs
    os.makedirs(out.out_dir, exist_ok=True)
    w0 = cfg.scenario.w0
    modes = []
    for i, rel in enumerate(cfg.stability.relative_sizes):
        if cfg.stability.mode == "alternate":
            modes.append("scale" if i % 2 == 0 else "shape")
        else:
            modes.append(cfg.stability.mode)

    records = []
    summaries = []
    all_pass = True
    w_run = None
    for i, (rel, mode) in enumerate(zip(cfg.stability.relative_sizes, modes)):
        v0 = perturbed_data(w0, rel, mode)
        rec = stability_experiment(cfg.scenario, w0, v0, cfg.splitting,
                                   validate=False, w_run=w_run)
        w_run = rec.w_run
        records.append(rec)
        rep = stability_report(rec)
        dep_min, dep_pair = all_pairs_dependence_residual(rec.w_run, rec.v_run)
        dep_ok = dep_min >= -1e-8
        passed = rep.passed and dep_ok
        all_pass = all_pass and passed
        summaries.append({
            "pair": i,
            "relative_size": rel,
            "mode": mode,
            "psi0": rec.psi0,
            "psi_final": float(rec.psi[-1]),
            "growth_exponent": rec.growth_exponent,
            "bound_C": rec.bound_C,
            "min_dependence_residual": dep_min,
            "worst_dependence_window": list(dep_pair),
            "pass": passed,
        })
        with open(os.path.join(out.out_dir, f"psi_pair{i}.csv"), "w") as fh:
            fh.write("t,psi\n")
            for t, p_val in zip(rec.times, rec.psi):
                fh.write(f"{t:.17g},{p_val:.17g}\n")
        _emit(quiet, f"pair {i}: rel = {rel:g} ({mode}), growth exponent "
                     f"{rec.growth_exponent:.4g} <= bound {rec.bound_C:.4g}, "
                     f"min dependence residual {dep_min:.3g}")
    _write_json({"pairs": summaries, "pass": all_pass},
                os.path.join(out.out_dir, "stability.json"))
    if out.figures:
        from . import report as rpt
        rpt.plot_stability(records, os.path.join(out.out_dir, "psi.png"))
    return all_pass


def _run_refine(cfg: RunConfig, quiet: bool) -> bool:
    out = cfg.outputs
    os.makedirs(out.out_dir, exist_ok=True)
    n_runs = cfg.refine.levels + 1
    factor = cfg.refine.factor
    deltas = [cfg.splitting.delta / factor ** i for i in range(n_runs)]
    base_dx = cfg.scenario.w0.mesh.dx
    dxs = [base_dx / factor ** i for i in range(n_runs)]
    table = refine_delta(cfg.scenario, deltas, dxs,
                         initial_sampler=cfg.initial_profile.field,
                         cfl_safety=cfg.splitting.cfl_safety)
    txt_path, _ = emit_convergence_table(table, out.out_dir)
    if out.figures:
        from . import report as rpt
        rpt.plot_convergence(table, os.path.join(out.out_dir, "convergence.png"))
    if not quiet:
        with open(txt_path) as fh:
            print(fh.read(), end="")
    dists = [r.l1_distance for r in table.rows]
    decreasing = all(a > b for a, b in zip(dists, dists[1:]))
    rates_ok = all(r.rate > 0.0 for r in table.rows if r.rate is not None)
    _emit(quiet, f"refine: monotone decrease = {decreasing}, "
                 f"positive rates = {rates_ok}")
    return decreasing and rates_ok


# -- entry point ---------------------------------------------------------------


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="nlclaw",
        description="Solve the prefix-integral-driven conservation law and "
                    "check its a-priori bounds.",
    )
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default=None, help="override outputs.out_dir")
    parser.add_argument("--experiment", default=None, choices=EXPERIMENTS,
                        help="override the experiment verb")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress output")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(argv)
    try:
        cfg = load_config(args.config, args.out, args.experiment)
    except ConfigError as exc:
        print(f"configuration error: {exc}")
        return 2

    report = validate_scenario(cfg.scenario, cfg.splitting.cfl_safety)
    if not report.passed:
        print("scenario validation failed:")
        for v in report.violations:
            print(f"  {v.code}: {v.message}")
        return 3

    runner = {
        "solve": _run_solve,
        "stability": _run_stability,
        "refine": _run_refine,
        "regions": _run_regions,
    }[cfg.experiment]
    try:
        passed = runner(cfg, args.quiet)
    except (CflError, ResolutionError, SolverError) as exc:
        print(f"solver error: {exc}")
        return 4
    if not passed:
        print("monitor violation: see artifacts for details")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
