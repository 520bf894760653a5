"""Shared scenario builders and canonical fixtures."""
import numpy as np
import pytest

import nlclaw as nl


def sized_scenario(flux_factory, constraint, profile, support, horizon, dx,
                   pad_cells=4, cfl_safety=0.9):
    """Build a scenario whose mesh covers the propagation cone.

    flux_factory receives the L1 norm of the initial data, so presets whose
    derivative bounds depend on the reachable range get the right radius.
    The mesh extent is the profile support plus the required margin plus a
    few spare cells on each side, all tiled with the requested dx.
    """
    lo, hi = support
    n_prov = max(2, int(np.ceil((hi - lo) / dx)))
    prov = nl.Mesh(lo, lo + n_prov * dx, n_prov)
    w0_prov = profile.field(prov)
    flux = flux_factory(nl.l1_norm(w0_prov))
    s_prov = nl.Scenario(flux=flux, constraint=constraint, w0=w0_prov,
                         horizon=horizon)
    half_extra = nl.required_margin(s_prov, cfl_safety) + pad_cells * dx
    n = int(np.ceil((hi - lo + 2 * half_extra) / dx))
    x_left = lo - (n * dx - (hi - lo)) / 2
    mesh = nl.Mesh(x_left, x_left + n * dx, n)
    return nl.Scenario(flux=flux, constraint=constraint,
                       w0=profile.field(mesh), horizon=horizon)


def canonical_scenario():
    """Burgers flux, cos^4 bump of height 0.8, bound 1, band 0.2."""
    return sized_scenario(lambda r: nl.burgers_flux(),
                          nl.make_truncation_g(1.0, 0.2),
                          nl.bump_profile(0.0, 1.0, 0.8),
                          (-1.0, 1.0), 0.5, 0.01)


@pytest.fixture(scope="session")
def canonical_run():
    s = canonical_scenario()
    p = nl.SplittingParameters.from_horizon(0.5, 0.05)
    return nl.solve(s, p)


@pytest.fixture(scope="session")
def canonical_pair(canonical_run):
    """Canonical run plus a 1% uniformly shrunk companion."""
    s = canonical_run.scenario
    p = canonical_run.splitting
    w0 = s.w0
    v0 = w0.with_values(w0.values * 0.99)
    rec = nl.stability_experiment(s, w0, v0, p, validate=False,
                                  w_run=canonical_run)
    return rec
