"""Flux presets, the truncation family, profiles, scenario validation."""
import numpy as np
import pytest

import nlclaw as nl


class TestTruncation:
    # M = 1, eps = 0.1: identity below 0.9, dead above 1, smooth in between
    def setup_method(self):
        self.c = nl.make_truncation_g(1.0, 0.1)

    def test_identity_inside(self):
        g = self.c.g
        assert g(0.5) == 0.5
        assert g(-0.7) == -0.7
        assert g(0.9) == pytest.approx(0.9)

    def test_dead_outside(self):
        g = self.c.g
        assert g(1.0) == 0.0
        assert g(-1.0) == 0.0
        assert g(1.5) == 0.0

    def test_band_midpoint(self):
        # smoothstep is 1/2 halfway through the band
        assert self.c.g(0.95) == pytest.approx(0.475, abs=1e-14)
        assert self.c.g(-0.95) == pytest.approx(-0.475, abs=1e-14)

    def test_odd_symmetry(self):
        x = np.linspace(-1.2, 1.2, 241)
        np.testing.assert_allclose(self.c.g(-x), -self.c.g(x), atol=1e-15)

    def test_never_amplifies(self):
        x = np.linspace(-2.0, 2.0, 801)
        assert np.all(np.abs(self.c.g(x)) <= np.abs(x) + 1e-15)

    def test_lipschitz_constant_dominates_sampled_slope(self):
        x = np.linspace(-1.05, 1.05, 200_001)
        slopes = np.abs(np.diff(self.c.g(x)) / np.diff(x))
        assert slopes.max() <= self.c.lip_g * (1 + 1e-6)
        # and it is attained inside the band, not a loose cap
        assert slopes.max() >= 0.999 * self.c.lip_g

    def test_wide_band_lip_is_one(self):
        # a gentle band never steepens beyond the identity part
        c = nl.make_truncation_g(10.0, 9.0)
        x = np.linspace(-10.5, 10.5, 100_001)
        slopes = np.abs(np.diff(c.g(x)) / np.diff(x))
        assert slopes.max() <= c.lip_g * (1 + 1e-6)

    def test_constructor_guards(self):
        with pytest.raises(ValueError):
            nl.make_truncation_g(1.0, 1.5)
        with pytest.raises(ValueError):
            nl.make_truncation_g(-1.0, 0.1)
        with pytest.raises(ValueError):
            nl.make_truncation_g(1.0, 0.0)


class TestFluxPresets:
    def test_linear(self):
        fl = nl.linear_flux(2.0)
        assert fl.f_prime(3.7) == 2.0
        assert fl.lip_f_prime == 0.0
        assert fl.sup_f_second == 0.0

    def test_burgers(self):
        fl = nl.burgers_flux()
        u = np.linspace(-2, 2, 9)
        np.testing.assert_allclose(fl.f(u), 0.5 * u * u)
        np.testing.assert_allclose(fl.f_prime(u), u)
        assert fl.lip_f_prime == 1.0
        assert fl.lip_f_second == 0.0

    def test_cubic(self):
        fl = nl.cubic_flux(2.0)
        assert fl.f(3.0) == pytest.approx(9.0)
        assert fl.f_prime(2.0) == pytest.approx(4.0)
        assert fl.lip_f_prime == pytest.approx(4.0)   # 2 * radius
        assert fl.sup_f_second == pytest.approx(4.0)
        assert fl.lip_f_second == pytest.approx(2.0)

    def test_polynomial_matches_callable_derivatives(self):
        fl = nl.polynomial_flux([0.0, 1.0, 0.5, -0.25], range_radius=1.5)
        u = np.linspace(-1.5, 1.5, 21)
        expect = u + 0.5 * u ** 2 - 0.25 * u ** 3
        np.testing.assert_allclose(fl.f(u), expect, atol=1e-12)
        np.testing.assert_allclose(fl.f_prime(u), 1 + u - 0.75 * u ** 2,
                                   atol=1e-12)

    def test_flux_from_callables_estimates_bounds(self):
        fl = nl.flux_from_callables(
            f=lambda u: np.sin(u), f_prime=np.cos,
            f_second=lambda u: -np.sin(u), range_radius=np.pi,
        )
        assert fl.sup_f_second == pytest.approx(1.0, rel=1e-4)
        assert fl.lip_f_prime == pytest.approx(1.0, rel=1e-4)


class TestVelocityBound:
    def test_linear_is_speed(self):
        m = nl.Mesh(-1, 1, 10)
        w0 = nl.bump_profile(0, 0.5, 0.5).field(m)
        s = nl.Scenario(flux=nl.linear_flux(-3.0),
                        constraint=nl.make_truncation_g(1.0, 0.2),
                        w0=w0, horizon=1.0)
        assert nl.reachable_velocity_bound(s) == pytest.approx(3.0)

    def test_quadratic_is_l1_norm(self):
        m = nl.Mesh(-1, 1, 100)
        w0 = nl.box_profile(-0.5, 0.5, 0.6).field(m)
        s = nl.Scenario(flux=nl.burgers_flux(),
                        constraint=nl.make_truncation_g(1.0, 0.2),
                        w0=w0, horizon=1.0)
        assert nl.reachable_velocity_bound(s) == pytest.approx(0.6, rel=1e-12)

    def test_zero_data_reads_origin_speed(self):
        m = nl.Mesh(-1, 1, 10)
        w0 = nl.DiscreteField(m, np.zeros(10))
        s = nl.Scenario(flux=nl.linear_flux(2.5),
                        constraint=nl.make_truncation_g(1.0, 0.2),
                        w0=w0, horizon=1.0)
        assert nl.reachable_velocity_bound(s) == 2.5


class TestProfiles:
    def test_box_cell_averages_split_partial_cells(self):
        m = nl.Mesh(0.0, 1.0, 10)
        w = nl.box_profile(0.05, 0.25, 1.0).field(m)
        np.testing.assert_allclose(w.values[:4], [0.5, 1.0, 0.5, 0.0],
                                   atol=1e-14)
        assert nl.l1_norm(w) == pytest.approx(0.2, abs=1e-14)

    def test_bump_mass_is_three_quarters_height_width(self):
        # integral of cos^4 over a period is 3/8 of its length
        prof = nl.bump_profile(0.3, 0.7, 0.9)
        m = nl.Mesh(-1.0, 2.0, 600)
        w = prof.field(m)
        assert nl.l1_norm(w) == pytest.approx(0.75 * 0.9 * 0.7, rel=1e-12)
        assert prof(np.array([0.3]))[0] == pytest.approx(0.9)
        assert prof(np.array([1.1]))[0] == 0.0

    def test_bump_averages_match_quadrature(self):
        prof = nl.bump_profile(0.0, 1.0, 1.0)
        m = nl.Mesh(-1.0, 1.0, 16)
        w = prof.field(m)
        for j in (4, 8, 11):
            xs = np.linspace(m.x_left + j * m.dx, m.x_left + (j + 1) * m.dx,
                             20_001)
            ref = np.trapezoid(prof(xs), xs) / m.dx
            assert w.values[j] == pytest.approx(ref, abs=1e-9)

    def test_step_profile_levels(self):
        prof = nl.step_profile(0.0, 1.0, 0.25, window=(-1.0, 2.0))
        x = np.array([-1.5, -0.5, 0.5, 1.5, 2.5])
        np.testing.assert_allclose(prof(x), [0.0, 1.0, 0.25, 0.25, 0.0])

    def test_sum_profile_adds(self):
        a = nl.bump_profile(-0.5, 0.5, 0.4)
        b = nl.bump_profile(0.5, 0.5, -0.3)
        m = nl.Mesh(-2.0, 2.0, 100)
        np.testing.assert_allclose(
            nl.sum_profile(a, b).field(m).values,
            a.field(m).values + b.field(m).values, atol=1e-15)


class TestValidation:
    def good(self):
        from conftest import canonical_scenario
        return canonical_scenario()

    def test_canonical_passes(self):
        rep = nl.validate_scenario(self.good())
        assert rep.passed
        assert rep.violations == ()

    def test_amplitude_violation(self):
        s = self.good()
        w_bad = s.w0.with_values(s.w0.values + 1.5)
        rep = nl.validate_scenario(nl.Scenario(
            flux=s.flux, constraint=s.constraint, w0=w_bad,
            horizon=s.horizon))
        codes = [v.code for v in rep.violations]
        assert "amplitude_bound" in codes

    def test_margin_violation(self):
        s = self.good()
        m = nl.Mesh(-1.2, 1.2, 240)
        w0 = nl.bump_profile(0.0, 1.0, 0.8).field(m)
        rep = nl.validate_scenario(nl.Scenario(
            flux=s.flux, constraint=s.constraint, w0=w0, horizon=s.horizon))
        codes = [v.code for v in rep.violations]
        assert "domain_margin" in codes

    def test_unbounded_constraint_flagged(self):
        s = self.good()
        c = nl.generic_constraint(lambda v: v, lip_g=1.0)
        rep = nl.validate_scenario(nl.Scenario(
            flux=s.flux, constraint=c, w0=s.w0, horizon=s.horizon))
        codes = [v.code for v in rep.violations]
        assert "constraint_support" in codes

    def test_understated_lipschitz_flagged(self):
        s = self.good()
        c = nl.ConstraintFunction(g=s.constraint.g, M=1.0, lip_g=1.0,
                                  epsilon=0.2, h=s.constraint.h)
        rep = nl.validate_scenario(nl.Scenario(
            flux=s.flux, constraint=c, w0=s.w0, horizon=s.horizon))
        codes = [v.code for v in rep.violations]
        assert "constraint_lipschitz" in codes

    def test_wrong_derivative_flagged(self):
        s = self.good()
        bad_flux = nl.FluxModel(
            f=s.flux.f, f_prime=lambda u: 0.5 * np.asarray(u),
            f_second=s.flux.f_second,
            lip_f_prime=s.flux.lip_f_prime, lip_f_second=s.flux.lip_f_second,
            sup_f_second=s.flux.sup_f_second,
            range_radius=s.flux.range_radius, name="broken")
        rep = nl.validate_scenario(nl.Scenario(
            flux=bad_flux, constraint=s.constraint, w0=s.w0,
            horizon=s.horizon))
        codes = [v.code for v in rep.violations]
        assert "flux_derivative" in codes

    def test_report_raises_with_all_codes(self):
        s = self.good()
        m = nl.Mesh(-1.2, 1.2, 240)
        w0 = nl.bump_profile(0.0, 1.0, 1.7).field(m)
        rep = nl.validate_scenario(nl.Scenario(
            flux=s.flux, constraint=s.constraint, w0=w0, horizon=s.horizon))
        assert not rep.passed
        with pytest.raises(nl.ValidationError) as err:
            rep.raise_if_failed()
        text = str(err.value)
        assert "amplitude_bound" in text and "domain_margin" in text
