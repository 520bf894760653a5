"""Problem data: flux models, constraint functions, scenarios, validation.

The conservation law being solved is

    d/dt w + d/dx ( f'(U) g(w) ) = 0,      U(t, x) = integral of w up to x,

so a scenario couples a smooth flux f, a Lipschitz constraint function g
supported in [-M, M], compactly supported initial data with |w0| <= M, and
a time horizon.  The solver layers accept any Lipschitz g; the validation
here is what enforces the compact-support and amplitude assumptions that
the a-priori bounds rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError
from .mesh import DiscreteField, Mesh, l1_norm, linf_norm, support_bounds

_SAMPLES = 10_001  # dense-sampling resolution for estimated constants


@dataclass(frozen=True)
class FluxModel:
    """Flux f with first and second derivatives and their size constants.

    The constants are understood on the symmetric interval
    [-range_radius, range_radius]; velocities only ever see prefix
    integrals, whose magnitude is bounded by the L1 norm of the data.
    """

    f: Callable
    f_prime: Callable
    f_second: Callable
    lip_f_prime: float
    lip_f_second: float
    sup_f_second: float
    range_radius: float
    name: str = "custom"


@dataclass(frozen=True)
class ConstraintFunction:
    """Lipschitz velocity-shaping function g, zero outside [-M, M].

    ``h`` is the multiplier with g(w) = w h(w) when the constraint comes
    from the smoothed-truncation family; generic g used in solver-level
    tests leave it None.  ``epsilon`` is the transition-band width for that
    family and is required by the region classifier.
    """

    g: Callable
    M: float
    lip_g: float
    epsilon: Optional[float] = None
    h: Optional[Callable] = None

    def __post_init__(self):
        if not self.M > 0.0:
            raise ValueError("M must be positive")
        if self.epsilon is not None and not 0.0 < self.epsilon < self.M:
            raise ValueError("epsilon must lie in (0, M)")


@dataclass(frozen=True)
class Scenario:
    """One complete problem instance."""

    flux: FluxModel
    constraint: ConstraintFunction
    w0: DiscreteField
    horizon: float

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise ValueError("horizon must be positive")


@dataclass(frozen=True)
class Violation:
    """A single failed scenario assumption."""

    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def passed(self) -> bool:
        return len(self.violations) == 0

    def raise_if_failed(self):
        if not self.passed:
            raise ValidationError(self.violations)


def _smoothstep(t):
    return t * t * (3.0 - 2.0 * t)


def _band_slope_extremum(a: float) -> float:
    """Largest |d g/d w| on the transition band of the truncation family.

    On the band, with t in [0, 1] the normalized distance in from the outer
    edge and a = M / epsilon, the slope is the cubic
    phi(t) = -8 t^3 + (6 a + 9) t^2 - 6 a t; its interior critical point is
    found from the quadratic phi'(t) = 0.
    """
    phi = lambda t: ((-8.0 * t + (6.0 * a + 9.0)) * t - 6.0 * a) * t
    disc = math.sqrt(4.0 * a * a - 4.0 * a + 9.0)
    candidates = [0.0, 1.0]
    for root in ((2.0 * a + 3.0 - disc) / 8.0, (2.0 * a + 3.0 + disc) / 8.0):
        if 0.0 < root < 1.0:
            candidates.append(root)
    return max(abs(phi(t)) for t in candidates)


def make_truncation_g(M: float, epsilon: float) -> ConstraintFunction:
    """Smoothed truncation g(w) = w h(w): identity on [-M+eps, M-eps],
    zero outside [-M, M], cubic smoothstep on the transition bands.

    The Lipschitz constant is evaluated in closed form from the band slope
    polynomial, not by sampling.
    """
    if not (0.0 < epsilon < M):
        raise ValueError("need 0 < epsilon < M")

    def h(w):
        t = np.clip((M - np.abs(w)) / epsilon, 0.0, 1.0)
        return _smoothstep(t)

    def g(w):
        w = np.asarray(w, dtype=float)
        return w * h(w)

    lip_g = max(1.0, _band_slope_extremum(M / epsilon))
    return ConstraintFunction(g=g, M=M, lip_g=lip_g, epsilon=epsilon, h=h)


def generic_constraint(g: Callable, lip_g: float, M: float = math.inf) -> ConstraintFunction:
    """Wrap an arbitrary Lipschitz g for solver-level use.

    Such constraints generally fail scenario validation; they exist so the
    frozen-coefficient solver can be exercised against classical fluxes.
    """
    return ConstraintFunction(g=g, M=M, lip_g=lip_g)


# -- flux presets ------------------------------------------------------------


def linear_flux(speed: float) -> FluxModel:
    """f(u) = speed * u; the velocity field is constant."""
    return FluxModel(
        f=lambda u: speed * np.asarray(u, dtype=float),
        f_prime=lambda u: np.full_like(np.asarray(u, dtype=float), speed),
        f_second=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
        lip_f_prime=0.0,
        lip_f_second=0.0,
        sup_f_second=0.0,
        range_radius=math.inf,
        name="linear",
    )


def burgers_flux() -> FluxModel:
    """f(u) = u^2 / 2; constants are global."""
    return FluxModel(
        f=lambda u: 0.5 * np.square(np.asarray(u, dtype=float)),
        f_prime=lambda u: np.asarray(u, dtype=float),
        f_second=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        lip_f_prime=1.0,
        lip_f_second=0.0,
        sup_f_second=1.0,
        range_radius=math.inf,
        name="burgers",
    )


def cubic_flux(range_radius: float) -> FluxModel:
    """f(u) = u^3 / 3 with constants on [-range_radius, range_radius]."""
    r = float(range_radius)
    return FluxModel(
        f=lambda u: np.asarray(u, dtype=float) ** 3 / 3.0,
        f_prime=lambda u: np.square(np.asarray(u, dtype=float)),
        f_second=lambda u: 2.0 * np.asarray(u, dtype=float),
        lip_f_prime=2.0 * r,
        lip_f_second=2.0,
        sup_f_second=2.0 * r,
        range_radius=r,
        name="cubic",
    )


def flux_from_callables(f, f_prime, f_second, range_radius: float, name="custom") -> FluxModel:
    """Estimate the size constants of a user flux by dense sampling.

    The reported constants are estimates over 10^4+1 uniformly spaced
    points of the stated range.
    """
    r = float(range_radius)
    u = np.linspace(-r, r, _SAMPLES) if r > 0 else np.zeros(1)
    fpp = np.asarray(f_second(u), dtype=float)
    sup_fpp = float(np.max(np.abs(fpp)))
    lip_fp = sup_fpp
    if u.size > 1:
        lip_fpp = float(np.max(np.abs(np.diff(fpp) / np.diff(u))))
    else:
        lip_fpp = 0.0
    return FluxModel(
        f=f,
        f_prime=f_prime,
        f_second=f_second,
        lip_f_prime=lip_fp,
        lip_f_second=lip_fpp,
        sup_f_second=sup_fpp,
        range_radius=r,
        name=name,
    )


def polynomial_flux(coefficients, range_radius: float) -> FluxModel:
    """Flux sum_i c_i u^i from the coefficient list (constant term first)."""
    c = np.asarray(coefficients, dtype=float)
    p = np.polynomial.Polynomial(c)
    dp = p.deriv()
    ddp = p.deriv(2)
    return flux_from_callables(
        f=lambda u: p(np.asarray(u, dtype=float)),
        f_prime=lambda u: dp(np.asarray(u, dtype=float)),
        f_second=lambda u: ddp(np.asarray(u, dtype=float)),
        range_radius=range_radius,
        name="poly",
    )


def reachable_velocity_bound(s: Scenario) -> float:
    """Sup of |f'| over the interval the prefix integral can reach.

    Prefix integrals of w(t) stay within [-|w0|_L1, |w0|_L1], so velocities
    are sampled on that interval (10^4+1 points, endpoints included).
    """
    r = l1_norm(s.w0)
    u = np.linspace(-r, r, _SAMPLES) if r > 0 else np.zeros(1)
    return float(np.max(np.abs(s.flux.f_prime(u))))


# -- initial-data profiles ---------------------------------------------------


def _box_antiderivative(x, left, right, height):
    return height * (np.clip(x, left, right) - left)


def _hump_antiderivative(x, center, width, height):
    # antiderivative of height * cos^4(pi (x - c) / (2 width)) on the hump
    r = np.clip((np.asarray(x, dtype=float) - center) / width, -1.0, 1.0)
    th = 0.5 * np.pi * r
    inner = 3.0 * th / 8.0 + np.sin(2.0 * th) / 4.0 + np.sin(4.0 * th) / 32.0
    return height * width * (2.0 / np.pi) * (inner + 3.0 * np.pi / 16.0)


class Profile:
    """Initial-data profile with an exact antiderivative.

    Cell averages are computed as antiderivative differences, so box edges
    that fall inside a cell contribute their exact overlap fraction.
    """

    def __init__(self, antiderivative, pointwise):
        self._anti = antiderivative
        self._point = pointwise

    def __call__(self, x):
        return self._point(np.asarray(x, dtype=float))

    def antiderivative(self, x):
        return self._anti(np.asarray(x, dtype=float))

    def cell_averages(self, mesh: Mesh) -> np.ndarray:
        xi = mesh.interfaces()
        anti = self._anti(xi)
        return np.diff(anti) / mesh.dx

    def field(self, mesh: Mesh, time: float = 0.0) -> DiscreteField:
        return DiscreteField(mesh, self.cell_averages(mesh), time)


def box_profile(left: float, right: float, height: float) -> Profile:
    """Constant height on [left, right], zero elsewhere."""
    if not right > left:
        raise ValueError("box needs right > left")
    return Profile(
        antiderivative=lambda x: _box_antiderivative(x, left, right, height),
        pointwise=lambda x: np.where((x >= left) & (x < right), height, 0.0),
    )


def bump_profile(center: float, width: float, height: float) -> Profile:
    """C2 cosine hump height * cos^4(pi (x-center)/(2 width)) on |x-c|<=width."""
    if not width > 0:
        raise ValueError("bump needs positive width")
    return Profile(
        antiderivative=lambda x: _hump_antiderivative(x, center, width, height),
        pointwise=lambda x: np.where(
            np.abs(x - center) <= width,
            height * np.cos(0.5 * np.pi * np.clip((x - center) / width, -1, 1)) ** 4,
            0.0,
        ),
    )


def step_profile(jump_at: float, left_value: float, right_value: float,
                 window: tuple) -> Profile:
    """Two-level step inside a finite window, zero outside.

    A compactly supported stand-in for Riemann data: left_value on
    [window[0], jump_at), right_value on [jump_at, window[1]).
    """
    a, b = window
    if not (a < jump_at < b):
        raise ValueError("jump must fall inside the window")
    left_box = box_profile(a, jump_at, left_value) if left_value != 0 else None
    right_box = box_profile(jump_at, b, right_value) if right_value != 0 else None

    def anti(x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        if left_box is not None:
            out = out + left_box.antiderivative(x)
        if right_box is not None:
            out = out + right_box.antiderivative(x)
        return out

    def point(x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        if left_box is not None:
            out = out + left_box(x)
        if right_box is not None:
            out = out + right_box(x)
        return out

    return Profile(anti, point)


def sum_profile(*profiles: Profile) -> Profile:
    """Pointwise sum of profiles (e.g. two humps of opposite sign)."""
    return Profile(
        antiderivative=lambda x: sum(p.antiderivative(x) for p in profiles),
        pointwise=lambda x: sum(p(x) for p in profiles),
    )


# -- validation ---------------------------------------------------------------


def required_margin(s: Scenario, cfl_safety: float = 0.9) -> float:
    """Width the support needs on each side to stay inside the domain.

    The three-point explicit scheme moves information one cell per step;
    with the step size pinned to the stability condition that is a speed of
    lip_g * max(velocity_bound, 1) / cfl_safety.  Using this discrete cone
    (which dominates the physical speed velocity_bound * lip_g) keeps the
    boundary cells exactly zero, so conservation and the maximum principle
    hold to rounding error rather than up to a boundary leak.
    """
    v = reachable_velocity_bound(s)
    speed = s.constraint.lip_g * max(v, 1.0) / cfl_safety
    # small slack for inner steps rounded up to divide the outer interval
    return s.horizon * speed * 1.05 + 2.0 * s.w0.mesh.dx


def validate_scenario(s: Scenario, cfl_safety: float = 0.9) -> ValidationReport:
    """Check every assumption the a-priori estimates rely on.

    Violations are reported, not raised; callers decide how to escalate.
    """
    viol = []
    c = s.constraint
    M = c.M

    amp = linf_norm(s.w0)
    if not (math.isfinite(M) and amp <= M):
        viol.append(Violation(
            "amplitude_bound",
            f"initial data must satisfy |w0| <= M; max |w0| = {amp:.6g}, M = {M:.6g}",
        ))

    if math.isfinite(M):
        tail = np.concatenate([
            np.linspace(M, 4.0 * M, 256),
            np.linspace(-4.0 * M, -M, 256),
        ])
        gt = np.asarray(c.g(tail), dtype=float)
        if np.max(np.abs(gt)) > 1e-14 * max(1.0, M):
            viol.append(Violation(
                "constraint_support",
                "g must vanish outside [-M, M]; sampled values do not",
            ))
    else:
        viol.append(Violation(
            "constraint_support",
            "constraint has no finite support bound M",
        ))

    # sampled Lipschitz check for g on [-2M, 2M] (or a unit box if M = inf)
    span = 2.0 * M if math.isfinite(M) else 1.0
    xs = np.linspace(-span, span, 4097)
    gs = np.asarray(c.g(xs), dtype=float)
    quot = np.max(np.abs(np.diff(gs))) / (xs[1] - xs[0])
    if quot > c.lip_g * (1.0 + 1e-9) + 1e-12:
        viol.append(Violation(
            "constraint_lipschitz",
            f"sampled slope {quot:.6g} of g exceeds declared lip_g {c.lip_g:.6g}",
        ))

    viol.extend(_check_flux_derivatives(s))

    supp = support_bounds(s.w0)
    if supp is not None:
        margin = required_margin(s, cfl_safety)
        lo, hi = supp
        mesh = s.w0.mesh
        if lo - margin < mesh.x_left or hi + margin > mesh.x_right:
            viol.append(Violation(
                "domain_margin",
                f"support [{lo:.4g}, {hi:.4g}] plus propagation margin "
                f"{margin:.4g} leaves [{mesh.x_left:.4g}, {mesh.x_right:.4g}]",
            ))

    return ValidationReport(tuple(viol))


def _check_flux_derivatives(s: Scenario):
    """Finite-difference consistency of f' and f'' on the reachable range."""
    viol = []
    r = l1_norm(s.w0)
    if r == 0.0:
        return viol
    u = np.linspace(-r, r, 101)
    step = max(1e-6 * r, 1e-9)
    fp = np.asarray(s.flux.f_prime(u), dtype=float)
    fp_fd = (np.asarray(s.flux.f(u + step), dtype=float)
             - np.asarray(s.flux.f(u - step), dtype=float)) / (2.0 * step)
    scale_p = max(1.0, float(np.max(np.abs(fp))))
    if np.max(np.abs(fp - fp_fd)) > 1e-6 * scale_p:
        viol.append(Violation(
            "flux_derivative",
            "f_prime is inconsistent with f beyond relative tolerance 1e-6",
        ))
    fpp = np.asarray(s.flux.f_second(u), dtype=float)
    fpp_fd = (np.asarray(s.flux.f_prime(u + step), dtype=float)
              - np.asarray(s.flux.f_prime(u - step), dtype=float)) / (2.0 * step)
    scale_pp = max(1.0, float(np.max(np.abs(fpp))))
    if np.max(np.abs(fpp - fpp_fd)) > 1e-6 * scale_pp:
        viol.append(Violation(
            "flux_second_derivative",
            "f_second is inconsistent with f_prime beyond relative tolerance 1e-6",
        ))
    return viol
