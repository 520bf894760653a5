"""Coefficient-refreezing time stepper, diagnostics rows, refinement."""
import numpy as np
import pytest
from conftest import canonical_scenario, sized_scenario

import nlclaw as nl


class TestSplittingParameters:
    def test_from_horizon(self):
        p = nl.SplittingParameters.from_horizon(0.5, 0.05)
        assert p.n_outer == 10
        assert p.horizon == pytest.approx(0.5)

    def test_rejects_nondividing_delta(self):
        with pytest.raises(nl.ConfigError):
            nl.SplittingParameters.from_horizon(0.5, 0.03)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            nl.SplittingParameters(delta=-0.1, n_outer=5)


class TestSolveBasics:
    def test_zero_data_stays_bitwise_zero(self):
        m = nl.Mesh(-2.0, 2.0, 200)
        s = nl.Scenario(flux=nl.burgers_flux(),
                        constraint=nl.make_truncation_g(1.0, 0.2),
                        w0=nl.DiscreteField(m, np.zeros(200)), horizon=0.3)
        traj = nl.solve(s, nl.SplittingParameters.from_horizon(0.3, 0.1))
        for snap in traj.snapshots:
            assert np.all(snap.values == 0.0)
        for row in traj.diagnostics:
            assert row.linf == 0.0 and row.mass == 0.0

    def test_horizon_mismatch_is_config_error(self):
        s = canonical_scenario()
        p = nl.SplittingParameters.from_horizon(0.4, 0.05)
        with pytest.raises(nl.ConfigError):
            nl.solve(s, p)

    def test_invalid_scenario_raises_by_default(self):
        s = canonical_scenario()
        bad = nl.Scenario(flux=s.flux, constraint=s.constraint,
                          w0=s.w0.with_values(s.w0.values + 2.0),
                          horizon=s.horizon)
        with pytest.raises(nl.ValidationError):
            nl.solve(bad, nl.SplittingParameters.from_horizon(0.5, 0.05))

    def test_outer_node_times_are_exact(self, canonical_run):
        traj = canonical_run
        times = [traj.snapshots[i].time for i in traj.outer_indices]
        expect = [0.05 * n for n in range(11)]
        assert times == pytest.approx(expect, abs=1e-15)
        assert times[-1] == 0.5

    def test_snapshot_at(self, canonical_run):
        snap = canonical_run.snapshot_at(0.25)
        assert snap.time == pytest.approx(0.25)
        with pytest.raises(KeyError):
            canonical_run.snapshot_at(0.123)

    def test_diagnostics_rows_align_with_outer_nodes(self, canonical_run):
        traj = canonical_run
        assert len(traj.diagnostics) == len(traj.outer_indices) == 11
        row0 = traj.diagnostics[0]
        assert row0.t == 0.0
        assert row0.max_entropy_residual == 0.0
        assert row0.tv_bound_rhs == pytest.approx(
            1.0 + nl.total_variation(traj.snapshots[0]))
        w0 = traj.snapshots[0]
        assert row0.l1 == pytest.approx(nl.l1_norm(w0))
        assert row0.linf == pytest.approx(nl.linf_norm(w0))
        assert row0.mass == pytest.approx(np.sum(w0.values) * w0.mesh.dx)

    def test_coefficient_columns_reflect_snapshot(self, canonical_run):
        traj = canonical_run
        for idx, row in zip(traj.outer_indices, traj.diagnostics):
            k = nl.build_coefficient(traj.snapshots[idx], traj.scenario.flux)
            assert row.sup_k == pytest.approx(k.sup, rel=1e-12)
            assert row.lip_x_k == pytest.approx(k.lip_x_k, rel=1e-12)

    def test_inner_snapshots_optional(self):
        s = canonical_scenario()
        p = nl.SplittingParameters.from_horizon(0.5, 0.25)
        bare = nl.solve(s, p)
        dense = nl.solve(s, p, inner_stride=5)
        assert len(bare.snapshots) == 3
        assert len(dense.snapshots) > len(bare.snapshots)
        # outer nodes unchanged by storing inner states
        for i, j in zip(bare.outer_indices, dense.outer_indices):
            np.testing.assert_array_equal(bare.snapshots[i].values,
                                          dense.snapshots[j].values)

    def test_entropy_levels_default(self):
        s = canonical_scenario()
        assert nl.default_entropy_levels(s) == (-0.5, 0.0, 0.5)


class TestLinearFluxExactness:
    """With a linear flux the coefficient never changes, so the refreezing
    interval cannot matter once the inner step is pinned."""

    def build(self, delta, inner_dt):
        c = nl.make_truncation_g(1.0, 0.3)
        # forcing inner steps below the admissible size widens the one-cell-
        # per-step cone, so give the support room for 0.2/0.0025 = 80 cells
        s = sized_scenario(lambda r: nl.linear_flux(1.0), c,
                           nl.bump_profile(0.0, 1.0, 0.6), (-1.0, 1.0),
                           0.2, 0.02, pad_cells=85)
        p = nl.SplittingParameters.from_horizon(0.2, delta,
                                                inner_dt=inner_dt)
        return nl.solve(s, p, track_entropy=False)

    def test_outer_interval_is_invisible(self):
        coarse = self.build(0.1, 0.0025)
        fine = self.build(0.05, 0.0025)
        a = coarse.snapshots[coarse.outer_indices[-1]]
        b = fine.snapshots[fine.outer_indices[-1]]
        np.testing.assert_array_equal(a.values, b.values)

    def test_tv_never_grows(self):
        traj = self.build(0.1, 0.0025)
        tvs = [row.tv for row in traj.diagnostics]
        assert all(b <= a + 1e-12 for a, b in zip(tvs, tvs[1:]))


class TestExport:
    def test_files_and_roundtrip(self, canonical_run, tmp_path):
        nl.export_trajectory(canonical_run, tmp_path)
        snaps = sorted(tmp_path.glob("snapshot_*.csv"))
        assert len(snaps) == 11
        x, vals = nl.read_field_csv(snaps[-1])
        final = canonical_run.snapshots[canonical_run.outer_indices[-1]]
        np.testing.assert_array_equal(vals, final.values)
        np.testing.assert_array_equal(x, final.mesh.centers())

        diag = (tmp_path / "diagnostics.csv").read_text().splitlines()
        assert diag[0] == ",".join(nl.DIAGNOSTIC_COLUMNS)
        assert len(diag) == 1 + 11

    def test_stride_subsamples_but_keeps_final(self, canonical_run, tmp_path):
        nl.export_trajectory(canonical_run, tmp_path, snapshot_stride=4)
        snaps = sorted(tmp_path.glob("snapshot_*.csv"))
        # nodes 0, 4, 8 plus the forced final node 10
        assert len(snaps) == 4


class TestRefineDelta:
    def test_guards(self):
        s = canonical_scenario()
        with pytest.raises(nl.ConfigError):
            nl.refine_delta(s, [0.1], [0.01])
        with pytest.raises(nl.ConfigError):
            nl.refine_delta(s, [0.1, 0.1], [0.02, 0.01])
        with pytest.raises(nl.ConfigError):
            nl.refine_delta(s, [0.1, 0.05], [0.02, 0.015])

    def test_table_contents(self):
        c = nl.make_truncation_g(1.0, 0.2)
        prof = nl.bump_profile(0.0, 1.0, 0.8)
        s = sized_scenario(lambda r: nl.burgers_flux(), c, prof,
                           (-1.0, 1.0), 0.5, 0.04)
        deltas = [0.1 / 2 ** i for i in range(3)]
        dxs = [s.w0.mesh.dx / 2 ** i for i in range(3)]
        table = nl.refine_delta(s, deltas, dxs, initial_sampler=prof.field)
        assert len(table.rows) == 2
        assert table.reference_delta == deltas[-1]
        assert table.rows[0].rate is None
        assert table.rows[1].rate is not None
        assert table.rows[1].l1_distance < table.rows[0].l1_distance

    def test_injection_fallback_without_sampler(self):
        c = nl.make_truncation_g(1.0, 0.2)
        prof = nl.bump_profile(0.0, 1.0, 0.8)
        s = sized_scenario(lambda r: nl.burgers_flux(), c, prof,
                           (-1.0, 1.0), 0.5, 0.04)
        deltas = [0.1, 0.05]
        dxs = [s.w0.mesh.dx, s.w0.mesh.dx / 2]
        table = nl.refine_delta(s, deltas, dxs)
        assert table.rows[0].l1_distance > 0.0
