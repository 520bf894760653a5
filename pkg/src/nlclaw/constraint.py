"""Reconstruction of the primitive u and classification of its regimes.

Integrating the conserved quantity w up to each interface gives a
Lipschitz profile u with |du/dx| <= M that the solve transports.  Cells
split into three regimes by how far |w| sits from the bound M: on I
(|w| <= M - eps) the profile obeys the unconstrained law
d/dt u + d/dx f(u) = 0, on the saturated set J the slope sits at the bound
itself, and on the transition set K the law picks up the multiplier
h(w) = g(w)/w.  The residual evaluations here are diagnostics: they are
reported and refinement-trend-checked, not asserted against fixed
tolerances.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .mesh import DiscreteField, Mesh, prefix_integral
from .model import ConstraintFunction
from .stepper import Trajectory


@dataclass(frozen=True)
class ReconstructedState:
    """Primitive profile at cell interfaces; increments equal w_j dx."""

    mesh: Mesh
    u_values: np.ndarray
    time: float

    def __post_init__(self):
        vals = np.asarray(self.u_values, dtype=np.float64)
        if vals.shape != (self.mesh.n_cells + 1,):
            raise ValueError("need one value per interface")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "u_values", vals)

    def difference_quotients(self) -> np.ndarray:
        return np.diff(self.u_values) / self.mesh.dx

    def cell_values(self) -> np.ndarray:
        """Profile averaged to cell centers (linear interpolation)."""
        return 0.5 * (self.u_values[:-1] + self.u_values[1:])


def reconstruct(w: DiscreteField) -> ReconstructedState:
    """Integrate w into its primitive; u starts at exactly zero."""
    return ReconstructedState(mesh=w.mesh, u_values=prefix_integral(w), time=w.time)


@dataclass(frozen=True)
class RegionMap:
    """Per-cell regime labels I/J/K forming a partition of the mesh."""

    labels: np.ndarray
    epsilon: float
    tol_j: float
    time: float

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype="<U1")
        lab.flags.writeable = False
        object.__setattr__(self, "labels", lab)

    def counts(self):
        return {name: int(np.sum(self.labels == name)) for name in ("I", "J", "K")}

    def mask(self, name: str) -> np.ndarray:
        return self.labels == name


def classify_regions(w: DiscreteField, c: ConstraintFunction,
                     tol_j: Optional[float] = None) -> RegionMap:
    """Label each cell I (interior), J (saturated), or K (transition).

    I takes precedence where the bands would overlap, so shrinking tol_j
    can only move cells from J to K.  Requires a constraint with a
    transition width epsilon.
    """
    if c.epsilon is None:
        raise ValueError("region classification needs a constraint with epsilon")
    tol = 1e-6 * c.M if tol_j is None else float(tol_j)
    absw = np.abs(w.values)
    labels = np.full(w.values.shape, "K", dtype="<U1")
    interior = absw <= c.M - c.epsilon
    saturated = (absw >= c.M - tol) & ~interior
    labels[saturated] = "J"
    labels[interior] = "I"
    return RegionMap(labels=labels, epsilon=c.epsilon, tol_j=tol, time=w.time)


@dataclass(frozen=True)
class RegimeRow:
    """Residual summary of one snapshot, split by regime."""

    time: float
    count_i: int
    count_j: int
    count_k: int
    max_res_i: float
    l1_res_i: float
    max_res_k: float
    l1_res_k: float
    max_j_deviation: float

    def to_json_dict(self):
        return {
            "time": self.time,
            "count_i": self.count_i, "count_j": self.count_j,
            "count_k": self.count_k,
            "max_res_i": self.max_res_i, "l1_res_i": self.l1_res_i,
            "max_res_k": self.max_res_k, "l1_res_k": self.l1_res_k,
            "max_j_deviation": self.max_j_deviation,
        }


@dataclass(frozen=True)
class RegimeReport:
    rows: tuple

    def to_json_dict(self):
        return {"rows": [r.to_json_dict() for r in self.rows]}


def _time_derivative_stencil(times: np.ndarray, m: int):
    """Indices and weight for a centered (one-sided at the ends) d/dt."""
    if m == 0:
        return 0, 1
    if m == len(times) - 1:
        return m - 1, m
    return m - 1, m + 1


def regime_equation_residual(run: Trajectory, map_times) -> RegimeReport:
    """Evaluate the per-regime transport residuals at the requested times.

    For every requested snapshot time, d/dt u is formed by differencing the
    reconstructed profiles of neighboring snapshots (one-sided at the first
    and last) and d/dx f(u) by the interface difference across each cell.
    I cells check d/dt u + d/dx f(u), K cells the same with the multiplier
    h(w), and J cells report how far |w| sits from M.
    """
    c = run.scenario.constraint
    if c.h is None:
        raise ValueError("regime residuals need the truncation-family multiplier h")
    f = run.scenario.flux.f
    snaps = run.snapshots
    times = run.times
    if len(snaps) < 2:
        raise ValueError("need at least two snapshots to difference in time")
    recon = [reconstruct(s) for s in snaps]
    dx = run.scenario.w0.mesh.dx
    rows = []
    for t in map_times:
        m = int(np.argmin(np.abs(times - t)))
        if abs(times[m] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"t = {t!r} is not a snapshot time")
        lo, hi = _time_derivative_stencil(times, m)
        dudt = (recon[hi].u_values - recon[lo].u_values) / (times[hi] - times[lo])
        rate = 0.5 * (dudt[:-1] + dudt[1:])
        fu = np.asarray(f(recon[m].u_values), dtype=float)
        flux_grad = np.diff(fu) / dx
        w_m = snaps[m]
        regions = classify_regions(w_m, c)
        res_i = rate + flux_grad
        res_k = rate + np.asarray(c.h(w_m.values), dtype=float) * flux_grad

        mask_i = regions.mask("I")
        mask_j = regions.mask("J")
        mask_k = regions.mask("K")
        rows.append(RegimeRow(
            time=float(times[m]),
            count_i=int(mask_i.sum()),
            count_j=int(mask_j.sum()),
            count_k=int(mask_k.sum()),
            max_res_i=float(np.max(np.abs(res_i[mask_i]))) if mask_i.any() else 0.0,
            l1_res_i=float(np.sum(np.abs(res_i[mask_i])) * dx) if mask_i.any() else 0.0,
            max_res_k=float(np.max(np.abs(res_k[mask_k]))) if mask_k.any() else 0.0,
            l1_res_k=float(np.sum(np.abs(res_k[mask_k])) * dx) if mask_k.any() else 0.0,
            max_j_deviation=(float(np.max(np.abs(np.abs(w_m.values[mask_j]) - c.M)))
                             if mask_j.any() else 0.0),
        ))
    return RegimeReport(rows=tuple(rows))


def write_region_csv(run: Trajectory, times, path) -> None:
    """Write (t, x, label, w, u) rows for the requested snapshot times.

    u is interpolated from the interfaces to the cell centers, matching the
    x column; the file is suitable for external heat-map plotting.
    """
    c = run.scenario.constraint
    xs = run.scenario.w0.mesh.centers()
    with open(path, "w") as fh:
        fh.write("t,x,label,w,u\n")
        for t in times:
            snap = run.snapshot_at(t)
            regions = classify_regions(snap, c)
            u_cells = reconstruct(snap).cell_values()
            for x, lab, wv, uv in zip(xs, regions.labels, snap.values, u_cells):
                fh.write(f"{snap.time:.17g},{x:.17g},{lab},{wv:.17g},{uv:.17g}\n")
