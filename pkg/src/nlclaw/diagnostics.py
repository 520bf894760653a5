"""Quantitative checks of every bound the construction is supposed to obey.

Three families: pairwise L1 stability experiments with an a-priori growth
bound, continuous-dependence residuals comparing measured L1 drift against
the coefficient-difference estimate, and single-run monitors for the sup
bound, L1 monotonicity, mass, total variation, and entropy residuals.
All bounds are assembled from model constants as sufficient upper bounds;
they are never tight, and the monitors only certify that runs stay inside
them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .frozen import build_coefficient
from .mesh import l1_distance, l1_norm, total_variation
from .model import Scenario
from .parallel import run_indexed
from .stepper import SplittingParameters, Trajectory, solve

PSI_ZERO_TOL = 1e-10  # psi(0) = 0 runs must stay below this forever


# -- monitor reports ----------------------------------------------------------


@dataclass(frozen=True)
class MonitorEntry:
    """One checked estimate: lhs must stay below rhs (margin = rhs - lhs)."""

    name: str
    estimate: str
    lhs: float
    rhs: float
    margin: float
    passed: bool

    def __post_init__(self):
        # numpy scalars sneak in from reductions; JSON needs native types
        object.__setattr__(self, "lhs", float(self.lhs))
        object.__setattr__(self, "rhs", float(self.rhs))
        object.__setattr__(self, "margin", float(self.margin))
        object.__setattr__(self, "passed", bool(self.passed))

    def to_json_dict(self):
        return {
            "name": self.name,
            "estimate": self.estimate,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class MonitorReport:
    entries: tuple

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def entry(self, estimate: str) -> MonitorEntry:
        for e in self.entries:
            if e.estimate == estimate:
                return e
        raise KeyError(estimate)

    def to_json_dict(self):
        return {
            "pass": self.passed,
            "monitors": [e.to_json_dict() for e in self.entries],
        }


def bounds_monitor(run: Trajectory) -> MonitorReport:
    """Check the solution bounds along one trajectory.

    sup bound: max_t |w(t)| <= M; L1 bound and monotonicity; mass
    conservation; total-variation growth against (1 + TV(w0)) exp(C t);
    entropy residuals nonpositive up to rounding.
    """
    diag = run.diagnostics
    M = run.scenario.constraint.M
    t = np.array([r.t for r in diag])
    linf = np.array([r.linf for r in diag])
    l1 = np.array([r.l1 for r in diag])
    tv = np.array([r.tv for r in diag])
    mass = np.array([r.mass for r in diag])
    res = np.array([r.max_entropy_residual for r in diag])
    tv_rhs = np.array([r.tv_bound_rhs for r in diag])

    entries = []

    lhs = float(np.max(linf))
    entries.append(MonitorEntry(
        name="sup norm stays below the constraint bound",
        estimate="sup_bound", lhs=lhs, rhs=M,
        margin=M - lhs, passed=lhs <= M + 1e-12,
    ))

    lhs = float(np.max(l1))
    entries.append(MonitorEntry(
        name="L1 norm never exceeds the initial L1 norm",
        estimate="l1_bound", lhs=lhs, rhs=float(l1[0]),
        margin=float(l1[0]) - lhs, passed=lhs <= l1[0] + 1e-10,
    ))

    inc = float(np.max(np.diff(l1))) if l1.size > 1 else 0.0
    entries.append(MonitorEntry(
        name="L1 norm is nonincreasing across outer nodes",
        estimate="l1_monotone", lhs=inc, rhs=0.0,
        margin=-inc, passed=inc <= 1e-10,
    ))

    mass_err = float(np.max(np.abs(mass - mass[0])))
    mass_tol = 1e-11 * (1.0 + abs(float(mass[0])))
    entries.append(MonitorEntry(
        name="mass is conserved",
        estimate="mass_conservation", lhs=mass_err, rhs=mass_tol,
        margin=mass_tol - mass_err, passed=mass_err <= mass_tol,
    ))

    slack = tv_rhs * (1.0 + 1e-6)
    worst = int(np.argmin(slack - tv))
    entries.append(MonitorEntry(
        name="total variation stays below the growth bound",
        estimate="tv_bound", lhs=float(tv[worst]), rhs=float(slack[worst]),
        margin=float(slack[worst] - tv[worst]),
        passed=bool(np.all(tv <= slack)),
    ))

    res_max = float(np.max(res))
    entries.append(MonitorEntry(
        name="entropy residuals are nonpositive up to rounding",
        estimate="entropy_residual", lhs=res_max, rhs=1e-10,
        margin=1e-10 - res_max, passed=res_max <= 1e-10,
    ))

    return MonitorReport(entries=tuple(entries))


# -- pairwise stability -------------------------------------------------------


@dataclass(frozen=True)
class StabilityRecord:
    """Measured L1 distance between two runs and its a-priori growth bound.

    growth_exponent is max_n log(psi(t_n)/psi(0)) / t_n over nodes with
    positive psi (0 when psi(0) = 0, where the fit is undefined);
    uniqueness_violation flags psi(0) = 0 runs that later separate.
    """

    times: np.ndarray
    psi: np.ndarray
    psi0: float
    growth_exponent: float
    bound_C: float
    uniqueness_violation: bool
    w_run: Trajectory
    v_run: Trajectory


def stability_growth_bound(s: Scenario, w0, v0, horizon: float) -> float:
    """Growth constant C with psi(t) <= psi(0) exp(C t).

    Assembled from the model constants: with
        theta(z0) = (TV(z0) + T sup|f''| |z0|_L1) exp(M lip_g sup|f''| T)
    the constant is
        C = lip_g lip_f' min(theta(w0), theta(v0))
            + M (lip_f'' min(|w0|_L1, |v0|_L1) + sup|f''|).
    Sufficient and typically far from tight.
    """
    c = s.constraint
    fx = s.flux
    T = horizon

    def theta(z0):
        return ((total_variation(z0) + T * fx.sup_f_second * l1_norm(z0))
                * math.exp(c.M * c.lip_g * fx.sup_f_second * T))

    m_min = min(l1_norm(w0), l1_norm(v0))
    return (c.lip_g * fx.lip_f_prime * min(theta(w0), theta(v0))
            + c.M * (fx.lip_f_second * m_min + fx.sup_f_second))


def stability_experiment(s: Scenario, w0, v0, p: SplittingParameters,
                         *, validate: bool = True,
                         w_run=None) -> StabilityRecord:
    """Solve twice on one discretization and track psi(t) = |w - v|_L1.

    Both data sets must live on the same mesh.  The fitted growth exponent
    is compared against the assembled bound by callers; swapping the two
    data sets leaves the record unchanged.  A trajectory for w0 obtained
    from an earlier call with the same scenario and splitting may be passed
    back in to skip recomputing it.
    """
    if w0.mesh != v0.mesh:
        raise ValueError("stability pairs must share one mesh")
    if w_run is not None:
        if (w_run.snapshots[0].mesh != w0.mesh
                or not np.array_equal(w_run.snapshots[0].values, w0.values)):
            raise ValueError("supplied base trajectory does not start at w0")
        v_run = solve(replace(s, w0=v0), p, track_entropy=False,
                      validate=validate)
    else:
        runs = run_indexed(
            lambda z0: solve(replace(s, w0=z0), p, track_entropy=False,
                             validate=validate),
            [w0, v0],
        )
        w_run, v_run = runs
    w_snaps = w_run.outer_snapshots()
    v_snaps = v_run.outer_snapshots()
    times = np.array([snap.time for snap in w_snaps])
    psi = np.array([l1_distance(a, b) for a, b in zip(w_snaps, v_snaps)])
    psi0 = float(psi[0])

    uniqueness_violation = False
    if psi0 == 0.0:
        growth = 0.0
        uniqueness_violation = bool(np.any(psi[1:] > PSI_ZERO_TOL))
    else:
        exps = [math.log(p_n / psi0) / t_n
                for t_n, p_n in zip(times[1:], psi[1:]) if p_n > 0.0]
        growth = max(exps) if exps else -math.inf

    return StabilityRecord(
        times=times,
        psi=psi,
        psi0=psi0,
        growth_exponent=growth,
        bound_C=stability_growth_bound(s, w0, v0, p.horizon),
        uniqueness_violation=uniqueness_violation,
        w_run=w_run,
        v_run=v_run,
    )


def stability_report(rec: StabilityRecord) -> MonitorReport:
    """Turn a stability record into pass/fail monitor entries."""
    entries = []
    entries.append(MonitorEntry(
        name="fitted L1 growth exponent stays below the assembled bound",
        estimate="stability_exponent",
        lhs=rec.growth_exponent, rhs=rec.bound_C,
        margin=rec.bound_C - rec.growth_exponent,
        passed=rec.growth_exponent <= rec.bound_C,
    ))
    psi_T = float(rec.psi[-1])
    # the envelope can exceed float range for stiff constants; saturate
    exponent = rec.bound_C * float(rec.times[-1])
    if rec.psi0 == 0.0:
        envelope = 0.0
    elif exponent > 700.0:
        envelope = math.inf
    else:
        envelope = rec.psi0 * math.exp(exponent)
    entries.append(MonitorEntry(
        name="final separation stays below the exponential envelope",
        estimate="stability_envelope",
        lhs=psi_T, rhs=envelope,
        margin=envelope - psi_T,
        passed=psi_T <= envelope + 1e-12 * (1.0 + min(envelope, 1e300)),
    ))
    entries.append(MonitorEntry(
        name="identical data never separate",
        estimate="uniqueness",
        lhs=float(rec.uniqueness_violation), rhs=0.0,
        margin=-float(rec.uniqueness_violation),
        passed=not rec.uniqueness_violation,
    ))
    return MonitorReport(entries=tuple(entries))


# -- continuous dependence ----------------------------------------------------


@dataclass(frozen=True)
class DependenceTerms:
    """Window aggregates entering the continuous-dependence bound.

    sup_k_minus_l and tv_k_minus_l are suprema over the window of the
    coefficient difference's sup norm and total variation; tv_w and tv_v
    are the largest total variations of each run; theta_w and theta_v are
    the assembled variation bounds for each run's coefficient history.
    """

    sup_k_minus_l: float
    tv_k_minus_l: float
    tv_w: float
    tv_v: float
    theta_w: float
    theta_v: float


@dataclass(frozen=True)
class DependenceReport:
    t1: float
    t2: float
    psi_t1: float
    psi_t2: float
    rhs: float
    residual: float
    terms: DependenceTerms

    @property
    def passed(self) -> bool:
        return self.residual >= -1e-8

    def to_json_dict(self):
        return {
            "t1": self.t1, "t2": self.t2,
            "psi_t1": self.psi_t1, "psi_t2": self.psi_t2,
            "rhs": self.rhs, "residual": self.residual,
            "pass": self.passed,
            "terms": {
                "sup_k_minus_l": self.terms.sup_k_minus_l,
                "tv_k_minus_l": self.terms.tv_k_minus_l,
                "tv_w": self.terms.tv_w, "tv_v": self.terms.tv_v,
                "theta_w": self.terms.theta_w, "theta_v": self.terms.theta_v,
            },
        }


def _check_same_discretization(w_run: Trajectory, v_run: Trajectory):
    if w_run.scenario.w0.mesh != v_run.scenario.w0.mesh:
        raise ValueError("runs use different meshes; no interpolation is done")
    if (w_run.splitting.delta != v_run.splitting.delta
            or w_run.splitting.n_outer != v_run.splitting.n_outer):
        raise ValueError("runs use different outer splittings")


def _node_index(run: Trajectory, t: float) -> int:
    times = [r.t for r in run.diagnostics]
    for i, tn in enumerate(times):
        if abs(tn - t) <= 1e-12 * max(1.0, abs(t)):
            return i
    raise KeyError(f"t = {t!r} is not an outer node of the run")


def _coefficient_differences(w_run: Trajectory, v_run: Trajectory):
    """Per-node sup and total variation of k - l from the stored snapshots."""
    flux = w_run.scenario.flux
    sups, tvs, w_coeffs, v_coeffs = [], [], [], []
    for ws, vs in zip(w_run.outer_snapshots(), v_run.outer_snapshots()):
        kw = build_coefficient(ws, flux)
        kv = build_coefficient(vs, v_run.scenario.flux)
        diff = kw.values - kv.values
        sups.append(float(np.max(np.abs(diff))))
        tvs.append(float(np.sum(np.abs(np.diff(diff)))))
        w_coeffs.append(kw)
        v_coeffs.append(kv)
    return np.array(sups), np.array(tvs), w_coeffs, v_coeffs


def dependence_terms(w_run: Trajectory, v_run: Trajectory,
                     t1: float, t2: float) -> DependenceTerms:
    """Aggregate the coefficient-difference terms over [t1, t2]."""
    _check_same_discretization(w_run, v_run)
    i1 = _node_index(w_run, t1)
    i2 = _node_index(w_run, t2)
    if i2 < i1:
        raise ValueError("need t1 <= t2")
    sups, tvs, w_coeffs, v_coeffs = _coefficient_differences(w_run, v_run)
    window = slice(i1, i2 + 1)
    tv_w = max(r.tv for r in w_run.diagnostics[window])
    tv_v = max(r.tv for r in v_run.diagnostics[window])
    span = t2 - t1
    lip_g = w_run.scenario.constraint.lip_g

    def theta(run, coeffs):
        tv_start = run.diagnostics[i1].tv
        tv_dx = max(c.tv_dx_k for c in coeffs[window])
        lip_x = max(c.lip_x_k for c in coeffs[window])
        return (tv_start + span * tv_dx) * math.exp(lip_g * lip_x * span)

    return DependenceTerms(
        sup_k_minus_l=float(np.max(sups[window])),
        tv_k_minus_l=float(np.max(tvs[window])),
        tv_w=tv_w,
        tv_v=tv_v,
        theta_w=theta(w_run, w_coeffs),
        theta_v=theta(v_run, v_coeffs),
    )


def continuous_dependence_check(w_run: Trajectory, v_run: Trajectory,
                                k_terms: DependenceTerms,
                                t1: float, t2: float) -> DependenceReport:
    """Compare measured separation growth against the dependence bound.

    Evaluates
        rhs = psi(t1) + integral_{t1}^{t2} [ lip_g sup|k - l| min(TV w, TV v)
                                             + M TV(k - l) ] dt
    with the window aggregates of k_terms, the per-node variations from the
    run diagnostics, and the trapezoid rule over the outer nodes, then
    reports rhs - psi(t2); anything below -1e-8 fails.
    """
    _check_same_discretization(w_run, v_run)
    i1 = _node_index(w_run, t1)
    i2 = _node_index(w_run, t2)
    if i2 < i1:
        raise ValueError("need t1 <= t2")
    w_snaps = w_run.outer_snapshots()
    v_snaps = v_run.outer_snapshots()
    psi1 = l1_distance(w_snaps[i1], v_snaps[i1])
    psi2 = l1_distance(w_snaps[i2], v_snaps[i2])
    lip_g = w_run.scenario.constraint.lip_g
    M = w_run.scenario.constraint.M

    times = np.array([r.t for r in w_run.diagnostics[i1:i2 + 1]])
    tv_min = np.array([
        min(rw.tv, rv.tv)
        for rw, rv in zip(w_run.diagnostics[i1:i2 + 1], v_run.diagnostics[i1:i2 + 1])
    ])
    integrand = lip_g * k_terms.sup_k_minus_l * tv_min + M * k_terms.tv_k_minus_l
    integral = float(np.trapezoid(integrand, times)) if times.size > 1 else 0.0
    rhs = psi1 + integral
    return DependenceReport(
        t1=t1, t2=t2, psi_t1=psi1, psi_t2=psi2,
        rhs=rhs, residual=rhs - psi2, terms=k_terms,
    )


def all_pairs_dependence_residual(w_run: Trajectory, v_run: Trajectory):
    """Worst dependence residual over every ordered pair of outer nodes.

    Returns (min_residual, (t1, t2)).  Window aggregates are recomputed per
    pair from running maxima, so each pair sees its own k-difference terms.
    """
    _check_same_discretization(w_run, v_run)
    w_snaps = w_run.outer_snapshots()
    v_snaps = v_run.outer_snapshots()
    n = len(w_snaps)
    psi = np.array([l1_distance(a, b) for a, b in zip(w_snaps, v_snaps)])
    times = np.array([r.t for r in w_run.diagnostics])
    tv_min = np.array([min(rw.tv, rv.tv)
                       for rw, rv in zip(w_run.diagnostics, v_run.diagnostics)])
    sups, tvs, _, _ = _coefficient_differences(w_run, v_run)
    lip_g = w_run.scenario.constraint.lip_g
    M = w_run.scenario.constraint.M

    worst = math.inf
    worst_pair = (float(times[0]), float(times[-1]))
    for i1 in range(n - 1):
        sup_run = float(sups[i1])
        tv_run = float(tvs[i1])
        for i2 in range(i1 + 1, n):
            sup_run = max(sup_run, float(sups[i2]))
            tv_run = max(tv_run, float(tvs[i2]))
            seg = lip_g * sup_run * tv_min[i1:i2 + 1] + M * tv_run
            integral = float(np.trapezoid(seg, times[i1:i2 + 1]))
            residual = float(psi[i1] + integral - psi[i2])
            if residual < worst:
                worst = residual
                worst_pair = (float(times[i1]), float(times[i2]))
    if not math.isfinite(worst):
        # single-node trajectory: nothing to compare
        worst = 0.0
    return worst, worst_pair
