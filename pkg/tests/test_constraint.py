"""Prefix-integral reconstruction and regime classification."""
import numpy as np
import pytest
from conftest import sized_scenario

import nlclaw as nl


class TestReconstruct:
    def test_anchored_at_zero(self, canonical_run):
        rs = nl.reconstruct(canonical_run.snapshots[0])
        assert rs.u_values[0] == 0.0
        assert rs.u_values.shape == (canonical_run.snapshots[0].mesh.n_cells + 1,)

    def test_quotients_recover_state(self, canonical_run):
        snap = canonical_run.snapshots[canonical_run.outer_indices[-1]]
        rs = nl.reconstruct(snap)
        np.testing.assert_allclose(rs.difference_quotients(), snap.values,
                                   atol=1e-12)

    def test_bounded_by_l1_norm(self, canonical_run):
        for idx in canonical_run.outer_indices:
            snap = canonical_run.snapshots[idx]
            rs = nl.reconstruct(snap)
            assert np.max(np.abs(rs.u_values)) <= (
                nl.l1_norm(snap) * (1 + 1e-12) + 1e-15)

    def test_cell_values_interpolate(self):
        m = nl.Mesh(0.0, 1.0, 4)
        w = nl.DiscreteField(m, np.ones(4))
        rs = nl.reconstruct(w)
        np.testing.assert_allclose(rs.cell_values(),
                                   [0.125, 0.375, 0.625, 0.875])


class TestClassification:
    def setup_method(self):
        self.c = nl.make_truncation_g(1.0, 0.2)
        self.m = nl.Mesh(0.0, 1.0, 5)

    def classify(self, values, tol_j=None):
        w = nl.DiscreteField(self.m, np.asarray(values, dtype=float))
        return nl.classify_regions(w, self.c, tol_j=tol_j)

    def test_three_way_partition(self):
        rm = self.classify([0.0, 0.5, 0.9, 1.0 - 1e-9, 1.0])
        assert list(rm.labels) == ["I", "I", "K", "J", "J"]
        assert rm.counts() == {"I": 2, "J": 0, "K": 1} or \
            rm.counts() == {"I": 2, "J": 2, "K": 1}

    def test_band_edge_goes_to_interior(self):
        # |w| = M - eps sits in I by the closed inequality
        rm = self.classify([0.8, -0.8, 0.80001, 0.0, 0.0])
        assert list(rm.labels)[:3] == ["I", "I", "K"]

    def test_negative_values_classified_by_magnitude(self):
        rm = self.classify([-0.9, -1.0, -0.5, 0.0, 0.0])
        assert list(rm.labels)[:3] == ["K", "J", "I"]

    def test_tolerance_moves_j_to_k_only(self):
        vals = [0.9, 1.0 - 1e-7, 1.0 - 1e-5, 1.0, 0.0]
        wide = self.classify(vals, tol_j=1e-4)
        narrow = self.classify(vals, tol_j=1e-8)
        for a, b in zip(wide.labels, narrow.labels):
            if a == "J" and b != "J":
                assert b == "K"
            if a == "I":
                assert b == "I"

    def test_mask_shapes(self):
        rm = self.classify([0.0, 0.5, 0.9, 1.0, 0.0])
        total = rm.mask("I").sum() + rm.mask("J").sum() + rm.mask("K").sum()
        assert total == 5

    def test_needs_band_width(self, canonical_run):
        plain = nl.generic_constraint(lambda v: v, lip_g=1.0, M=1.0)
        with pytest.raises(ValueError):
            nl.classify_regions(canonical_run.snapshots[0], plain)


class TestRegimeResiduals:
    def linear_run(self, dx, delta):
        c = nl.make_truncation_g(1.0, 0.3)
        s = sized_scenario(lambda r: nl.linear_flux(1.0), c,
                           nl.bump_profile(0.0, 1.0, 0.6), (-1.0, 1.0),
                           0.4, dx)
        p = nl.SplittingParameters.from_horizon(0.4, delta)
        return nl.solve(s, p, track_entropy=False)

    def test_interior_residual_shrinks_with_refinement(self):
        worst = []
        for dx, delta in ((0.02, 0.1), (0.01, 0.05)):
            traj = self.linear_run(dx, delta)
            times = [traj.snapshots[i].time for i in traj.outer_indices]
            rows = nl.regime_equation_residual(traj, times).rows
            worst.append(max(r.max_res_i for r in rows))
        assert worst[1] <= 0.7 * worst[0]

    def test_rows_report_population_and_residuals(self, canonical_run):
        times = [canonical_run.snapshots[i].time
                 for i in canonical_run.outer_indices]
        report = nl.regime_equation_residual(canonical_run, times)
        assert len(report.rows) == len(times)
        for row in report.rows:
            n = canonical_run.snapshots[0].mesh.n_cells
            assert row.count_i + row.count_j + row.count_k == n
            assert row.l1_res_i >= 0.0 and row.max_res_i >= 0.0

    def test_requires_snapshot_times(self, canonical_run):
        with pytest.raises(KeyError):
            nl.regime_equation_residual(canonical_run, [0.0, 0.1234])


class TestRegionCsv:
    def test_layout(self, canonical_run, tmp_path):
        times = [0.0, 0.5]
        path = tmp_path / "regions.csv"
        nl.write_region_csv(canonical_run, times, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,x,label,w,u"
        n = canonical_run.snapshots[0].mesh.n_cells
        assert len(lines) == 1 + 2 * n
        first = lines[1].split(",")
        assert first[2] in ("I", "J", "K")
        float(first[3]), float(first[4])
