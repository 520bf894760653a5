"""Time stepping for the nonlocal law by freezing the velocity coefficient.

The horizon is split into outer intervals of length delta.  At the start
of each interval the coefficient k = f'(prefix integral) is rebuilt from
the current state (the left limit at the node) and held fixed while the
frozen-coefficient solver advances the interval with inner steps.  The
assembled trajectory carries per-node diagnostics for every quantity the
a-priori estimates bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ConfigError, SolverError
from .frozen import (FrozenCoefficient, StepParameters, admissible_dt,
                     build_coefficient, discrete_entropy_residual, evolve)
from .mesh import (DiscreteField, Mesh, l1_distance_nested, l1_norm, linf_norm,
                   total_variation, write_field_csv)
from .model import Scenario, validate_scenario
from .parallel import run_indexed


@dataclass(frozen=True)
class SplittingParameters:
    """Outer interval length, count, and the inner stability safety factor.

    ``inner_dt`` optionally caps the inner step below the stability bound;
    it exists so runs with different delta can share one inner step when
    comparing them step for step.
    """

    delta: float
    n_outer: int
    cfl_safety: float = 0.9
    inner_dt: Optional[float] = None

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError("delta must be positive")
        if self.n_outer < 1:
            raise ValueError("need at least one outer interval")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.inner_dt is not None and not self.inner_dt > 0.0:
            raise ValueError("inner_dt must be positive when given")

    @classmethod
    def from_horizon(cls, horizon: float, delta: float, cfl_safety: float = 0.9,
                     inner_dt: Optional[float] = None) -> "SplittingParameters":
        """Split horizon into outer intervals; delta must divide it evenly."""
        n = round(horizon / delta)
        if n < 1 or abs(n * delta - horizon) > 1e-12 * max(1.0, abs(horizon)):
            raise ConfigError(
                f"delta = {delta!r} does not divide horizon = {horizon!r} evenly"
            )
        return cls(delta=delta, n_outer=n, cfl_safety=cfl_safety, inner_dt=inner_dt)

    @property
    def horizon(self) -> float:
        return self.n_outer * self.delta


@dataclass(frozen=True)
class StepDiagnostics:
    """Per-outer-node record of the monitored quantities.

    ``max_entropy_residual`` is the largest per-cell entropy residual over
    the inner steps of the interval ending at this node (0 at t = 0);
    ``sup_k`` and ``lip_x_k`` describe the coefficient frozen from the
    state at this node; ``tv_bound_rhs`` is the total-variation bound
    (1 + TV(w0)) exp(C t) with the assembled growth constant C.
    """

    t: float
    linf: float
    l1: float
    tv: float
    mass: float
    max_entropy_residual: float
    sup_k: float
    lip_x_k: float
    tv_bound_rhs: float


DIAGNOSTIC_COLUMNS = ("t", "linf", "l1", "tv", "mass", "max_entropy_residual",
                      "sup_k", "lip_x_k", "tv_bound_rhs")


@dataclass(frozen=True)
class Trajectory:
    """Snapshots and diagnostics of one solve."""

    scenario: Scenario
    splitting: SplittingParameters
    snapshots: tuple
    diagnostics: tuple
    outer_indices: tuple
    tv_constant: float

    def outer_snapshots(self):
        return [self.snapshots[i] for i in self.outer_indices]

    def snapshot_at(self, t: float) -> DiscreteField:
        for snap in self.snapshots:
            if abs(snap.time - t) <= 1e-12 * max(1.0, abs(t)):
                return snap
        raise KeyError(f"no snapshot at t = {t!r}")

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])


def tv_growth_constant(s: Scenario) -> float:
    """Growth constant C in the bound TV(w(t)) <= (1 + TV(w0)) exp(C t).

    Assembled from the model constants as
        C = M (lip_g lip_f' + sup|f''|) + M^2 lip_f'' |w0|_L1,
    the coefficient produced by chaining the continuous-dependence estimate
    over vanishing freezing intervals.  Sufficient, never tight.
    """
    M = s.constraint.M
    return (M * (s.constraint.lip_g * s.flux.lip_f_prime + s.flux.sup_f_second)
            + M * M * s.flux.lip_f_second * l1_norm(s.w0))


def default_entropy_levels(s: Scenario):
    M = s.constraint.M
    if math.isfinite(M):
        return (-0.5 * M, 0.0, 0.5 * M)
    return (0.0,)


def _node_record(w, t, k, res, tv0, c_growth):
    return StepDiagnostics(
        t=t,
        linf=linf_norm(w),
        l1=l1_norm(w),
        tv=total_variation(w),
        mass=float(np.sum(w.values) * w.mesh.dx),
        max_entropy_residual=res,
        sup_k=k.sup,
        lip_x_k=k.lip_x_k,
        tv_bound_rhs=(1.0 + tv0) * math.exp(c_growth * t),
    )


def solve(s: Scenario, p: SplittingParameters, *, entropy_levels=None,
          track_entropy: bool = True, inner_stride: int = 0,
          validate: bool = True) -> Trajectory:
    """Run the full coefficient-freezing construction over the horizon.

    The splitting must tile the scenario horizon.  Snapshots are stored at
    every outer node; inner_stride > 0 additionally stores every
    inner_stride-th inner step.  Entropy residuals are tracked per inner
    step at the given levels (default -M/2, 0, M/2).
    """
    if abs(p.horizon - s.horizon) > 1e-12 * max(1.0, s.horizon):
        raise ConfigError(
            f"splitting covers {p.horizon!r} but the scenario horizon is {s.horizon!r}"
        )
    if validate:
        validate_scenario(s, cfl_safety=p.cfl_safety).raise_if_failed()

    levels = default_entropy_levels(s) if entropy_levels is None else tuple(entropy_levels)
    g = s.constraint
    tv0 = total_variation(s.w0)
    c_growth = tv_growth_constant(s)

    w = s.w0 if s.w0.time == 0.0 else s.w0.with_values(s.w0.values, time=0.0)
    snapshots = [w]
    outer_indices = [0]
    records = []
    residual_in = [0.0]

    for n in range(p.n_outer):
        k = build_coefficient(w, s.flux)
        records.append(_node_record(w, n * p.delta, k, 0.0, tv0, c_growth))

        cap = min(p.delta, admissible_dt(k, g, w.mesh.dx, p.cfl_safety))
        if p.inner_dt is not None:
            cap = min(cap, p.inner_dt)
        sp = StepParameters(dt=cap, dx=w.mesh.dx, cfl_safety=p.cfl_safety)

        interval_res = 0.0
        inner_count = 0

        def on_step(before, after, kk, pp, gg):
            nonlocal interval_res, inner_count
            inner_count += 1
            if track_entropy:
                for c in levels:
                    r = discrete_entropy_residual(before, after, kk, pp, gg, c)
                    m = float(np.max(r))
                    if m > interval_res:
                        interval_res = m
            if inner_stride > 0 and inner_count % inner_stride == 0:
                snapshots.append(after)

        w = evolve(w, k, p.delta, sp, g, on_step=on_step)
        w = w.with_values(w.values, time=(n + 1) * p.delta)
        if inner_stride > 0 and snapshots[-1].time >= w.time:
            snapshots.pop()  # drop an inner snapshot that coincides with the node
        snapshots.append(w)
        outer_indices.append(len(snapshots) - 1)
        residual_in.append(interval_res)

        if w.values[0] != 0.0 or w.values[-1] != 0.0:
            raise SolverError(
                f"support reached the domain boundary at t = {w.time:.6g}; "
                "enlarge the domain margin"
            )

    k_final = build_coefficient(w, s.flux)
    records.append(_node_record(w, p.horizon, k_final, 0.0, tv0, c_growth))
    records = [replace(r, max_entropy_residual=res)
               for r, res in zip(records, residual_in)]

    return Trajectory(
        scenario=s,
        splitting=p,
        snapshots=tuple(snapshots),
        diagnostics=tuple(records),
        outer_indices=tuple(outer_indices),
        tv_constant=c_growth,
    )


# -- export -------------------------------------------------------------------


def export_trajectory(traj: Trajectory, out_dir, snapshot_stride: int = 1) -> list:
    """Write snapshot CSVs and diagnostics.csv into out_dir.

    Every snapshot_stride-th snapshot is written (the final one always).
    Returns the list of written paths.
    """
    import os

    if snapshot_stride < 1:
        raise ValueError("snapshot_stride must be >= 1")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    picks = list(range(0, len(traj.snapshots), snapshot_stride))
    if picks[-1] != len(traj.snapshots) - 1:
        picks.append(len(traj.snapshots) - 1)
    for idx in picks:
        path = os.path.join(out_dir, f"snapshot_{idx:04d}.csv")
        write_field_csv(traj.snapshots[idx], path)
        written.append(path)
    diag_path = os.path.join(out_dir, "diagnostics.csv")
    with open(diag_path, "w") as fh:
        fh.write(",".join(DIAGNOSTIC_COLUMNS) + "\n")
        for r in traj.diagnostics:
            fh.write(",".join(
                f"{getattr(r, col):.17g}" for col in DIAGNOSTIC_COLUMNS) + "\n")
    written.append(diag_path)
    return written


# -- refinement under delta and dx --------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    delta: float
    dx: float
    n_cells: int
    l1_distance: float
    rate: Optional[float]


@dataclass(frozen=True)
class ConvergenceTable:
    """Distances of each run to the finest run at the final time."""

    rows: tuple
    reference_delta: float
    reference_dx: float


def refine_delta(s: Scenario, deltas, dx_list, *, initial_sampler=None,
                 cfl_safety: float = 0.9) -> ConvergenceTable:
    """Self-convergence study under simultaneous (delta, dx) refinement.

    Both lists must decrease, the finest pair is the reference, and every
    mesh must refine evenly into the finest one so distances are exact for
    piecewise-constant fields.  Initial data are rebuilt per mesh with
    initial_sampler(mesh) when given, else by exact piecewise-constant
    injection of s.w0 (which then must be the coarsest level's data).
    Levels run independently; NONLOCAL_CLAW_THREADS caps the worker pool.
    """
    deltas = [float(d) for d in deltas]
    dxs = [float(d) for d in dx_list]
    if len(deltas) != len(dxs) or len(deltas) < 2:
        raise ConfigError("need matching delta and dx lists with >= 2 levels")
    if any(a <= b for a, b in zip(deltas, deltas[1:])):
        raise ConfigError("deltas must be strictly decreasing")
    if any(a <= b for a, b in zip(dxs, dxs[1:])):
        raise ConfigError("dx values must be strictly decreasing")

    base_mesh = s.w0.mesh
    extent = base_mesh.x_right - base_mesh.x_left
    meshes = []
    for dx in dxs:
        n = round(extent / dx)
        if n < 2 or abs(n * dx - extent) > 1e-9 * extent:
            raise ConfigError(f"dx = {dx!r} does not tile the domain evenly")
        meshes.append(Mesh(base_mesh.x_left, base_mesh.x_right, n))
    n_fine = meshes[-1].n_cells
    for m in meshes:
        if n_fine % m.n_cells != 0:
            raise ConfigError("every mesh must refine evenly into the finest")

    def build_level(args):
        delta, mesh = args
        if initial_sampler is not None:
            w0 = initial_sampler(mesh)
        else:
            from .mesh import inject_to_finer
            w0 = inject_to_finer(s.w0, mesh)
        level_s = replace(s, w0=w0)
        sp = SplittingParameters.from_horizon(s.horizon, delta, cfl_safety)
        return solve(level_s, sp, track_entropy=False)

    runs = run_indexed(build_level, list(zip(deltas, meshes)))

    reference = runs[-1].snapshots[runs[-1].outer_indices[-1]]
    rows = []
    dists = []
    for i, run in enumerate(runs[:-1]):
        final = run.snapshots[run.outer_indices[-1]]
        dists.append(l1_distance_nested(final, reference))
    for i, d in enumerate(dists):
        if i == 0:
            rate = None
        else:
            prev = dists[i - 1]
            if d > 0.0 and prev > 0.0:
                rate = math.log(prev / d) / math.log(dxs[i - 1] / dxs[i])
            else:
                rate = None
        rows.append(ConvergenceRow(
            level=i, delta=deltas[i], dx=dxs[i],
            n_cells=meshes[i].n_cells, l1_distance=d, rate=rate,
        ))
    return ConvergenceTable(
        rows=tuple(rows), reference_delta=deltas[-1], reference_dx=dxs[-1]
    )
