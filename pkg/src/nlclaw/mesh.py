"""Uniform 1-d meshes and piecewise-constant fields with zero extension.

A field holds one value per cell and represents the function that equals
``values[j]`` on cell j and zero outside the domain.  All norms and the
prefix integral are defined for that zero-extended function, so total
variation counts the jumps at both domain boundaries and the prefix
integral starts from zero at the leftmost interface.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Mesh:
    """Uniform cell partition of [x_left, x_right]."""

    x_left: float
    x_right: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError(f"need at least 2 cells, got {self.n_cells}")
        if not self.x_right > self.x_left:
            raise ValueError("x_right must exceed x_left")

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    def centers(self) -> np.ndarray:
        """Cell centers x_j = x_left + (j + 1/2) dx."""
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.dx

    def interfaces(self) -> np.ndarray:
        """Cell interfaces x_{j+1/2}, n_cells + 1 points."""
        return self.x_left + np.arange(self.n_cells + 1) * self.dx


@dataclass(frozen=True)
class DiscreteField:
    """Cell-average values on a mesh at a fixed time, zero outside."""

    mesh: Mesh
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.mesh.n_cells,):
            raise ValueError(
                f"expected {self.mesh.n_cells} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        if self.time < 0.0:
            raise ValueError("time must be nonnegative")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def with_values(self, values, time=None) -> "DiscreteField":
        """Same mesh, new values and optionally a new time stamp."""
        t = self.time if time is None else time
        return DiscreteField(self.mesh, values, t)


def l1_norm(w: DiscreteField) -> float:
    """L1 norm sum_j |w_j| dx, summed in fixed left-to-right pairwise order."""
    return float(np.sum(np.abs(w.values)) * w.mesh.dx)


def linf_norm(w: DiscreteField) -> float:
    """Max norm max_j |w_j|."""
    return float(np.max(np.abs(w.values)))


def total_variation(w: DiscreteField) -> float:
    """Total variation of the zero-extended field.

    Includes the jump from 0 into the first cell and from the last cell
    back to 0, so a field that is 1 on a single cell has variation 2.
    """
    v = w.values
    interior = np.sum(np.abs(np.diff(v)))
    return float(abs(v[0]) + interior + abs(v[-1]))


def prefix_integral(w: DiscreteField) -> np.ndarray:
    """Integral of the zero-extended field from -inf up to each interface.

    Returns n_cells + 1 values; the first is exactly 0 and consecutive
    increments equal w_j dx.
    """
    out = np.empty(w.mesh.n_cells + 1)
    out[0] = 0.0
    np.cumsum(w.values * w.mesh.dx, out=out[1:])
    return out


def l1_distance(w: DiscreteField, v: DiscreteField) -> float:
    """L1 distance between two fields on the same mesh."""
    if w.mesh != v.mesh:
        raise ValueError("fields live on different meshes")
    return float(np.sum(np.abs(w.values - v.values)) * w.mesh.dx)


def support_bounds(w: DiscreteField, atol: float = 0.0):
    """Return (x_lo, x_hi) spanning the nonzero cells, or None if all zero."""
    nz = np.flatnonzero(np.abs(w.values) > atol)
    if nz.size == 0:
        return None
    return (
        w.mesh.x_left + nz[0] * w.mesh.dx,
        w.mesh.x_left + (nz[-1] + 1) * w.mesh.dx,
    )


def write_field_csv(w: DiscreteField, path) -> None:
    """Write one row per cell center with 17 significant digits."""
    xs = w.mesh.centers()
    with open(path, "w") as fh:
        fh.write("x,w\n")
        for x, v in zip(xs, w.values):
            fh.write(f"{x:.17g},{v:.17g}\n")


def read_field_csv(path):
    """Read a field snapshot written by write_field_csv as (x, w) arrays."""
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    return data[:, 0].copy(), data[:, 1].copy()


def field_from_samples(mesh: Mesh, sampler, time: float = 0.0) -> DiscreteField:
    """Build a field by evaluating a vectorized profile at cell centers."""
    return DiscreteField(mesh, np.asarray(sampler(mesh.centers()), dtype=float), time)


def inject_to_finer(w: DiscreteField, fine: Mesh) -> DiscreteField:
    """Repeat cell values onto a nested finer mesh with the same extent.

    Exact for piecewise-constant fields; requires the fine cell count to be
    an integer multiple of the coarse one.
    """
    if (fine.x_left, fine.x_right) != (w.mesh.x_left, w.mesh.x_right):
        raise ValueError("meshes must share extent")
    ratio, rem = divmod(fine.n_cells, w.mesh.n_cells)
    if rem != 0:
        raise ValueError("fine mesh must refine the coarse mesh evenly")
    return DiscreteField(fine, np.repeat(w.values, ratio), w.time)


def l1_distance_nested(w: DiscreteField, v: DiscreteField) -> float:
    """Exact L1 distance between fields on nested meshes of equal extent."""
    if w.mesh == v.mesh:
        return l1_distance(w, v)
    if w.mesh.n_cells > v.mesh.n_cells:
        w, v = v, w
    coarse_on_fine = inject_to_finer(w, v.mesh)
    return float(np.sum(np.abs(coarse_on_fine.values - v.values)) * v.mesh.dx)
