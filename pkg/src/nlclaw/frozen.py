"""Monotone finite-volume solver for d/dt w + d/dx ( k(x) g(w) ) = 0.

The coefficient k is frozen in time and sampled at cell interfaces.  The
numerical flux is the local Lax-Friedrichs (Rusanov) flux for s -> k g(s)
with dissipation speed |k| lip_g, which keeps the three-point update
monotone under the step-size restriction

    (dt / dx) * lip_g * max(sup|k|, 1) <= cfl_safety.

The discrete maximum principle additionally needs the mesh fine enough
that dx * (lip_x_k + 1) <= 1; both conditions are enforced here as
preconditions rather than assumed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CflError, ResolutionError
from .mesh import DiscreteField, prefix_integral
from .model import ConstraintFunction, FluxModel


@dataclass(frozen=True)
class FrozenCoefficient:
    """Interface samples of the frozen velocity k and its roughness.

    values has n_cells + 1 entries; lip_x_k is the largest interface
    difference quotient and tv_dx_k the total variation of that quotient
    (zero-extended, since k is constant outside the support of the data).
    """

    values: np.ndarray
    lip_x_k: float
    tv_dx_k: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            raise ValueError("coefficient values must be finite")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class StepParameters:
    """Time step, mesh width, and the stability safety factor."""

    dt: float
    dx: float
    cfl_safety: float = 0.9

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if not self.dx > 0.0:
            raise ValueError("dx must be positive")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError("cfl_safety must lie in (0, 1]")

    @property
    def lam(self) -> float:
        return self.dt / self.dx


def build_coefficient(w: DiscreteField, flux: FluxModel) -> FrozenCoefficient:
    """Freeze k_{j+1/2} = f'(U_{j+1/2}) from the prefix integral of w."""
    u = prefix_integral(w)
    k = np.asarray(flux.f_prime(u), dtype=float)
    dx = w.mesh.dx
    quot = np.diff(k) / dx
    if quot.size:
        lip = float(np.max(np.abs(quot)))
        tv = float(abs(quot[0]) + np.sum(np.abs(np.diff(quot))) + abs(quot[-1]))
    else:
        lip = 0.0
        tv = 0.0
    return FrozenCoefficient(values=k, lip_x_k=lip, tv_dx_k=tv)


def constant_coefficient(value: float, n_cells: int) -> FrozenCoefficient:
    """Spatially constant coefficient on a mesh with n_cells cells."""
    return FrozenCoefficient(
        values=np.full(n_cells + 1, float(value)), lip_x_k=0.0, tv_dx_k=0.0
    )


def numerical_flux(k_iface, w_left, w_right, g: ConstraintFunction):
    """Rusanov flux 0.5 k (g(wl) + g(wr)) - 0.5 |k| lip_g (wr - wl).

    Consistent (equal states give k g(s)) and monotone in both states for
    any Lipschitz g with |g'| <= lip_g.
    """
    k = np.asarray(k_iface, dtype=float)
    wl = np.asarray(w_left, dtype=float)
    wr = np.asarray(w_right, dtype=float)
    alpha = np.abs(k) * g.lip_g
    out = 0.5 * k * (g.g(wl) + g.g(wr)) - 0.5 * alpha * (wr - wl)
    if out.ndim == 0:
        return float(out)
    return out


def admissible_dt(k: FrozenCoefficient, g: ConstraintFunction, p_or_dx,
                  cfl_safety: float = None) -> float:
    """Largest dt the stability condition allows for this coefficient."""
    if isinstance(p_or_dx, StepParameters):
        dx = p_or_dx.dx
        cfl = p_or_dx.cfl_safety if cfl_safety is None else cfl_safety
    else:
        dx = float(p_or_dx)
        cfl = 0.9 if cfl_safety is None else cfl_safety
    speed = g.lip_g * max(k.sup, 1.0)
    if speed == 0.0:
        return math.inf
    return cfl * dx / speed


def _interface_states(values: np.ndarray):
    """Left/right states at all n+1 interfaces with zero ghost cells."""
    wl = np.empty(values.size + 1)
    wl[0] = 0.0
    wl[1:] = values
    wr = np.empty(values.size + 1)
    wr[:-1] = values
    wr[-1] = 0.0
    return wl, wr


def _flux_values(values, k_vals, g):
    wl, wr = _interface_states(values)
    alpha = np.abs(k_vals) * g.lip_g
    return 0.5 * k_vals * (g.g(wl) + g.g(wr)) - 0.5 * alpha * (wr - wl)


def _check_preconditions(k: FrozenCoefficient, p: StepParameters,
                         g: ConstraintFunction) -> None:
    if p.dx * (k.lip_x_k + 1.0) > 1.0 + 1e-12:
        raise ResolutionError(
            f"dx = {p.dx:.6g} too coarse for coefficient slope "
            f"lip_x_k = {k.lip_x_k:.6g}: need dx * (lip_x_k + 1) <= 1"
        )
    load = p.lam * g.lip_g * max(k.sup, 1.0)
    if load > p.cfl_safety * (1.0 + 1e-12):
        raise CflError(
            f"dt = {p.dt:.6g} violates the stability condition "
            f"(load {load:.6g} > {p.cfl_safety:.3g})",
            admissible_dt=admissible_dt(k, g, p),
        )


def step(w: DiscreteField, k: FrozenCoefficient, p: StepParameters,
         g: ConstraintFunction) -> DiscreteField:
    """One conservative explicit update of every cell."""
    if k.values.size != w.mesh.n_cells + 1:
        raise ValueError("coefficient does not match the mesh")
    if abs(p.dx - w.mesh.dx) > 1e-15 * w.mesh.dx:
        raise ValueError("step parameters carry a different dx than the mesh")
    _check_preconditions(k, p, g)
    flux = _flux_values(w.values, k.values, g)
    new_vals = w.values - p.lam * np.diff(flux)
    return DiscreteField(w.mesh, new_vals, w.time + p.dt)


def evolve(w: DiscreteField, k: FrozenCoefficient, t_span: float,
           p: StepParameters, g: ConstraintFunction, on_step=None) -> DiscreteField:
    """Advance by exactly t_span with a fixed inner step.

    The inner step is the largest value that divides t_span evenly while
    staying below both p.dt and the stability bound.  t_span = 0 returns
    the input unchanged.  ``on_step(before, after, k, p, g)`` is invoked
    after every update when given.
    """
    if t_span < 0.0:
        raise ValueError("t_span must be nonnegative")
    if t_span == 0.0:
        return w
    cap = min(p.dt, admissible_dt(k, g, p))
    n_steps = max(1, math.ceil(t_span / cap - 1e-12))
    dt_eff = t_span / n_steps
    p_eff = StepParameters(dt=dt_eff, dx=p.dx, cfl_safety=p.cfl_safety)
    t0 = w.time
    for i in range(n_steps):
        w_next = step(w, k, p_eff, g)
        if on_step is not None:
            on_step(w, w_next, k, p_eff, g)
        w = w_next
    # land on t0 + t_span exactly instead of accumulating n * (t_span / n)
    return w.with_values(w.values, time=t0 + t_span)


def discrete_entropy_residual(w_before: DiscreteField, w_after: DiscreteField,
                              k: FrozenCoefficient, p: StepParameters,
                              g: ConstraintFunction, c: float) -> np.ndarray:
    """Per-cell residual of the discrete entropy inequality at level c.

    Uses the numerical entropy flux
        Q = F(k, w v c, w' v c) - F(k, w ^ c, w' ^ c)
    and the source term sign(w_new - c) (k_{j+1/2} - k_{j-1/2}) g(c) / dx
    that discretizes the contribution of the x-dependence of k.  For the
    monotone flux and an admissible step the residual is nonpositive up to
    rounding error.
    """
    vals = w_before.values
    wl, wr = _interface_states(vals)
    hi = numerical_flux(k.values, np.maximum(wl, c), np.maximum(wr, c), g)
    lo = numerical_flux(k.values, np.minimum(wl, c), np.minimum(wr, c), g)
    q = hi - lo
    dx = w_before.mesh.dx
    dt = w_after.time - w_before.time
    if not dt > 0.0:
        raise ValueError("w_after must be strictly later than w_before")
    gc = float(np.asarray(g.g(np.float64(c))))
    source = np.sign(w_after.values - c) * (np.diff(k.values) / dx) * gc
    rate = (np.abs(w_after.values - c) - np.abs(vals - c)) / dt
    return rate + np.diff(q) / dx + source
