import math

import numpy as np
import pytest

from reglab import criteria as cr
from reglab import kernels

C_STAR_4TH = 3.0 ** (-0.75) * 2.0**2.75  # ~2.9512, threshold of the fourth-order family
C_STAR_DISP_LEFT = (1.5 * math.sqrt(3.0)) ** (2.0 / 3.0)


class TestSlowGrowth:
    def test_log_power_family_passes(self):
        assert cr.validate_slow_growth(cr.PowerLog(1.0, 0.75)).all_pass

    def test_sqrt_log_family_passes(self):
        assert cr.validate_slow_growth(cr.PetrovskiiSqrtLog(2.0)).all_pass

    def test_power_growth_fails_the_sharp_tests(self):
        report = cr.validate_slow_growth(cr.PowerOfTau(1.0, 0.1))
        assert not report.all_pass
        assert not report.inverse_log_derivative_diverges
        assert not report.below_any_power

    def test_tabulated_power_fails(self):
        taus = np.geomspace(10.0, 1e8, 60)
        phi = cr.Tabulated(tuple(taus), tuple(taus**0.1))
        report = cr.validate_slow_growth(phi)
        assert not report.below_any_power

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            cr.validate_slow_growth(cr.Constant(2.0))


@pytest.fixture(scope="module")
def wrapped():
    return cr.apply_cutoff(cr.PowerLog(2.0, 0.75), kernels.biharmonic())


class TestCutoff:

    def test_nondecreasing_and_dominating(self, wrapped):
        tau = np.geomspace(cr.TAU0, 1e8, 20000)
        base = wrapped.base(tau)
        vals = wrapped(tau)
        assert np.all(np.diff(vals) >= -1e-10)
        assert np.all(vals >= base - 1e-10)

    def test_positive_phase_fraction_small(self, wrapped):
        spec = wrapped.spec
        tau = np.geomspace(1e3, 1e6, 200000)
        theta = spec.osc_rate * wrapped(tau) ** spec.exponent + spec.phase
        frac = np.mean(np.cos(theta) > 1e-12)
        assert frac < 0.01

    def test_integrand_nonpositive_off_ramps(self, wrapped):
        # positive contributions only survive inside the short ramps; the
        # negative mass dominates by a wide margin
        spec = wrapped.spec
        tau = np.geomspace(10.0, 1e7, 50000)
        integrand = cr._criterion_integrand(spec, wrapped)(tau)
        total_positive = np.sum(integrand[integrand > 0])
        total_negative = -np.sum(integrand[integrand < 0])
        assert total_positive < 0.05 * total_negative

    def test_non_oscillatory_family_passes_through(self):
        phi = cr.PowerLog(1.0, 0.5)
        assert cr.apply_cutoff(phi, kernels.heat()) is phi

    def test_halving_smoothing_width_keeps_verdicts(self):
        phi = cr.PowerLog(2.0, 0.75)
        for eps in (math.pi / 20.0, math.pi / 40.0):
            wrapped = cr.apply_cutoff(phi, kernels.biharmonic(), eps_s=eps)
            assert cr.classify_biharmonic(wrapped).verdict == cr.REGULAR


class TestBiharmonicClassification:
    def test_critical_family_regular_with_cutoff(self):
        phi = cr.apply_cutoff(cr.PowerLog(C_STAR_4TH, 0.75), kernels.biharmonic())
        verdict = cr.classify_biharmonic(phi)
        assert verdict.verdict == cr.REGULAR
        assert verdict.rationale == "analytic-family"

    def test_above_threshold_irregular(self):
        verdict = cr.classify_biharmonic(cr.PowerLog(C_STAR_4TH + 0.1, 0.75))
        assert verdict.verdict == cr.IRREGULAR_NONSINGULAR

    def test_verdict_flips_exactly_at_threshold(self):
        eps = 1e-9
        lo = cr.classify_biharmonic(cr.apply_cutoff(cr.PowerLog(C_STAR_4TH - eps, 0.75),
                                                    kernels.biharmonic()))
        hi = cr.classify_biharmonic(cr.PowerLog(C_STAR_4TH + eps, 0.75))
        assert lo.verdict == cr.REGULAR
        assert hi.verdict == cr.IRREGULAR_NONSINGULAR

    def test_below_threshold_without_cutoff_indeterminate(self):
        verdict = cr.classify_biharmonic(cr.PowerLog(C_STAR_4TH - 0.3, 0.75))
        assert verdict.verdict == cr.INDETERMINATE

    def test_sign_alternating_partial_integrals_without_cutoff(self):
        spec = cr.oscillation_spec(kernels.biharmonic())
        diag = cr.diagnose_tail(spec, cr.PowerLog(2.0, 0.75))
        assert diag.kind == "divergent-oscillatory"
        signs = np.sign(diag.window_sums)
        assert np.any(signs[1:] * signs[:-1] < 0)

    def test_constant_boundaries_delegate_to_spectrum(self):
        assert cr.classify_biharmonic(cr.Constant(4.0)).verdict == cr.REGULAR
        v5 = cr.classify_biharmonic(cr.Constant(5.0))
        assert v5.verdict == cr.IRREGULAR_SINGULAR
        assert v5.rationale == "delegated-spectral"

    def test_constant_near_branch_root(self):
        v = cr.classify_biharmonic(cr.Constant(4.0775))
        assert v.verdict == cr.IRREGULAR_NONSINGULAR

    def test_verdict_monotonicity_in_amplitude(self):
        # larger domains are more irregular along the critical family
        cs = [2.0, 2.5, C_STAR_4TH - 0.05, C_STAR_4TH + 0.05, 3.2, 4.0]
        verdicts = [cr.classify_biharmonic(
            cr.apply_cutoff(cr.PowerLog(c, 0.75), kernels.biharmonic())).verdict
            for c in cs]
        seen_irregular = False
        for v in verdicts:
            if v == cr.IRREGULAR_NONSINGULAR:
                seen_irregular = True
            elif seen_irregular:
                pytest.fail("regular verdict above an irregular one")

    def test_steep_log_power_converges_regardless_of_cutoff(self):
        v = cr.classify_biharmonic(cr.PowerLog(1.0, 1.0))
        assert v.verdict == cr.IRREGULAR_NONSINGULAR


class TestHeatClassification:
    def test_classic_threshold(self):
        assert cr.classify_heat(cr.PetrovskiiSqrtLog(2.0)).verdict == cr.REGULAR
        assert cr.classify_heat(cr.PetrovskiiSqrtLog(2.0 * 1.05)).verdict == \
            cr.IRREGULAR_NONSINGULAR

    def test_flip_exactly_at_two(self):
        eps = 1e-9
        assert cr.classify_heat(cr.PetrovskiiSqrtLog(2.0 - eps)).verdict == cr.REGULAR
        assert cr.classify_heat(cr.PetrovskiiSqrtLog(2.0 + eps)).verdict == \
            cr.IRREGULAR_NONSINGULAR

    def test_full_logarithm_is_irregular(self):
        # phi = ln(tau) decays like tau^(-ln(tau)/4): faster than any power
        assert cr.classify_heat(cr.PowerLog(1.0, 1.0)).verdict == cr.IRREGULAR_NONSINGULAR

    def test_slow_log_power_regular(self):
        assert cr.classify_heat(cr.PowerLog(5.0, 0.3)).verdict == cr.REGULAR

    def test_no_cutoff_needed(self):
        # regular verdicts come without any cut-off for the positive kernel
        v = cr.classify_heat(cr.PowerLog(1.0, 0.4))
        assert v.verdict == cr.REGULAR

    def test_constant_interval_always_regular(self):
        assert cr.classify_heat(cr.Constant(3.0)).verdict == cr.REGULAR

    def test_density_form_agrees_on_sweep(self):
        # 20-case family sweep: the phi-form verdict matches the density form
        cases = [cr.PetrovskiiSqrtLog(c) for c in np.linspace(1.2, 3.2, 10)]
        cases += [cr.PowerLog(c, g) for c, g in
                  [(1.0, 0.3), (2.0, 0.35), (0.7, 0.45), (3.0, 0.55), (1.5, 0.65),
                   (1.0, 0.8), (2.5, 0.42), (2.2, 0.58), (4.0, 0.25), (1.2, 1.2)]]
        for phi in cases:
            verdict = cr.classify_heat(phi).verdict
            rho = cr.petrovskii_rho_form(phi)
            if verdict == cr.REGULAR:
                assert rho.kind == "divergent"
            else:
                assert rho.kind == "convergent"


class TestDispersionClassification:
    def test_right_boundary_threshold(self):
        assert cr.classify_dispersion("right", cr.PowerOfTau(1.0, 1.5)).verdict == \
            cr.IRREGULAR_NONSINGULAR
        spec = cr.oscillation_spec(kernels.dispersion3())
        wrapped = cr.apply_cutoff(cr.PowerOfTau(1.0, 4.0 / 3.0), spec)
        assert cr.classify_dispersion("right", wrapped).verdict == cr.REGULAR

    def test_right_threshold_is_amplitude_independent(self):
        for c in (0.3, 1.0, 7.0):
            v = cr.classify_dispersion("right", cr.PowerOfTau(c, 1.4))
            assert v.verdict == cr.IRREGULAR_NONSINGULAR

    def test_right_without_cutoff_indeterminate(self):
        v = cr.classify_dispersion("right", cr.PowerOfTau(1.0, 1.0))
        assert v.verdict == cr.INDETERMINATE

    def test_right_accepts_single_log_spelled_as_powerlog(self):
        # the natural right-boundary family carries a single logarithm in
        # the original time; (C, gamma) are read off either spelling
        assert cr.classify_dispersion("right", cr.PowerLog(1.0, 1.5)).verdict == \
            cr.IRREGULAR_NONSINGULAR

    def test_left_boundary_threshold(self):
        reg = cr.classify_dispersion("left", cr.PowerLog(C_STAR_DISP_LEFT, 2.0 / 3.0))
        irr = cr.classify_dispersion("left", cr.PowerLog(C_STAR_DISP_LEFT + 0.05, 2.0 / 3.0))
        assert reg.verdict == cr.REGULAR
        assert irr.verdict == cr.IRREGULAR_NONSINGULAR

    def test_left_needs_no_cutoff(self):
        v = cr.classify_dispersion("left", cr.PowerLog(1.0, 0.5))
        assert v.verdict == cr.REGULAR

    def test_bad_side_rejected(self):
        with pytest.raises(ValueError):
            cr.classify_dispersion("top", cr.PowerLog(1.0, 1.0))


class TestPolyharmonicClassification:
    def test_order_six_threshold_constant(self):
        kc = kernels.kernel_constants(kernels.parabolic(3))
        c_star = kc.d0 ** (-1.0 / kc.alpha)
        crit_gamma = 5.0 / 6.0
        hi = cr.classify_polyharmonic(3, cr.PowerLog(c_star + 0.1, crit_gamma))
        assert hi.verdict == cr.IRREGULAR_NONSINGULAR
        lo = cr.classify_polyharmonic(3, cr.apply_cutoff(
            cr.PowerLog(c_star - 0.1, crit_gamma), kernels.parabolic(3)))
        assert lo.verdict == cr.REGULAR

    def test_matches_fourth_order_wrapper(self):
        v1 = cr.classify_biharmonic(cr.PowerLog(3.2, 0.75))
        v2 = cr.classify_polyharmonic(2, cr.PowerLog(3.2, 0.75))
        assert v1.verdict == v2.verdict

    def test_epsilon_above_threshold_irregular_any_order(self):
        for m in (2, 3, 4):
            kc = kernels.kernel_constants(kernels.parabolic(m))
            c_star = kc.d0 ** (-1.0 / kc.alpha)
            gamma = (2 * m - 1) / (2 * m)
            v = cr.classify_polyharmonic(m, cr.PowerLog(c_star + 0.1, gamma))
            assert v.verdict == cr.IRREGULAR_NONSINGULAR

    def test_second_order_redirected(self):
        with pytest.raises(ValueError):
            cr.classify_polyharmonic(1, cr.PowerLog(2.0, 0.5))


class TestNumericTail:
    def test_analytic_numeric_agreement_near_threshold(self):
        # five percent away from the critical constant the dyadic-tail
        # diagnosis must agree with the analytic verdict
        spec = cr.oscillation_spec(kernels.biharmonic())
        for c, expected in [(1.05 * C_STAR_4TH, "convergent"),
                            (1.2 * C_STAR_4TH, "convergent")]:
            diag = cr.diagnose_tail(spec, cr.PowerLog(c, 0.75))
            assert diag.kind == expected, (c, diag)
        wrapped = cr.apply_cutoff(cr.PowerLog(0.95 * C_STAR_4TH, 0.75), kernels.biharmonic())
        diag = cr.diagnose_tail(spec, wrapped)
        assert diag.kind == "divergent"

    def test_heat_numeric_agreement(self):
        spec = cr.oscillation_spec(kernels.heat())
        diag = cr.diagnose_tail(spec, cr.PetrovskiiSqrtLog(2.0 * 1.05))
        assert diag.kind == "convergent"
        diag = cr.diagnose_tail(spec, cr.PetrovskiiSqrtLog(2.0 * 0.95))
        assert diag.kind == "divergent"

    def test_tabulated_short_range_indeterminate(self):
        taus = np.geomspace(cr.TAU0, 1e4, 32)
        phi = cr.Tabulated(tuple(taus), tuple(2.0 * np.log(taus) ** 0.75))
        assert cr.classify_biharmonic(phi).verdict == cr.INDETERMINATE

    def test_tabulated_long_range_classified(self):
        taus = np.geomspace(cr.TAU0, 1e70, 200)
        phi = cr.Tabulated(tuple(taus), tuple(4.2 * np.log(taus) ** 0.75))
        verdict = cr.classify_biharmonic(phi)
        assert verdict.verdict == cr.IRREGULAR_NONSINGULAR
        assert verdict.rationale == "numeric-tail"


class TestCoefficientTraces:
    def test_heat_coefficient_decreases_to_zero(self):
        tr = cr.integrate_a0("heat", cr.PetrovskiiSqrtLog(2.0), lntau_span=(1.0, 2000.0))
        assert not tr.hit_zero
        assert np.all(np.diff(tr.log_a0) <= 1e-12)
        assert tr.log_a0[-1] < -15.0  # diverging negative log-integral

    def test_heat_positivity_preserved(self):
        tr = cr.integrate_a0("heat", cr.PowerLog(1.5, 0.4), tau_span=(cr.TAU0, 1e8))
        assert np.all(np.isfinite(tr.log_a0))  # a0 stayed positive

    def test_fourth_order_below_threshold_oscillates_unboundedly(self):
        tr = cr.integrate_a0("biharmonic", cr.PowerLog(2.5, 0.75),
                             tau_span=(cr.TAU0, 1e12), n_out=1200)
        la = tr.log_a0
        assert la.max() > 20.0 and la.min() < -20.0
        # excursions grow: the singular-irregular signature
        half = len(la) // 2
        assert np.max(np.abs(la[half:])) > np.max(np.abs(la[:half]))

    def test_fourth_order_above_threshold_settles(self):
        tr = cr.integrate_a0("biharmonic", cr.PowerLog(3.5, 0.75),
                             tau_span=(cr.TAU0, 1e12), n_out=1200)
        la = tr.log_a0
        tail_swing = la[-300:].max() - la[-300:].min()
        assert tail_swing < 0.05  # convergent envelope, finite nonzero limit

    def test_reduced_cubic_model_asymptotics(self):
        tr = cr.integrate_a0("pme4-reduced", cr.Constant(1.0),
                             lntau_span=(1.0, 3000.0), n_out=800)
        p, amp = tr.fit_log_power(lntau_window=(700.0, 3000.0))
        assert p == pytest.approx(-1.5, abs=0.05)
        assert amp == pytest.approx(3.0**1.5 * 2.0**-5.5, rel=0.15)

    def test_full_cubic_model_decays_for_unit_boundary(self):
        tr = cr.integrate_a0("pme4", cr.Constant(1.0), lntau_span=(1.0, 60.0))
        assert tr.log_a0[-1] < tr.log_a0[0] - 2.0

    def test_positive_start_required(self):
        with pytest.raises(ValueError):
            cr.integrate_a0("pme4-reduced", cr.Constant(1.0), lntau_span=(1.0, 10.0),
                            a0_init=-1.0)

    def test_beam_trace_swings_both_ways(self):
        tr = cr.integrate_a0("beam4", cr.PowerLog(1.0, 0.5), tau_span=(cr.TAU0, 1e8))
        assert tr.log_a0.max() > 1.0 and tr.log_a0.min() < -1.0


class TestCubicCriticalFamily:
    def test_scale_invariance(self):
        report = cr.pme4_critical()
        assert report.gamma == 0.75
        assert report.scale_invariant
        assert report.verdicts["C=1, gamma=3/4"] == report.verdicts["C=2, gamma=3/4"]

    def test_steeper_power_stays_positive(self):
        fate, trace = cr.pme4_coefficient_fate(cr.PowerLog(1.0, 0.9))
        assert fate == "frozen"
        assert trace.log_a0[-1] > math.log(1e-6)

    def test_shallower_power_decays(self):
        fate, _ = cr.pme4_coefficient_fate(cr.PowerLog(1.0, 0.5))
        assert fate == "decaying"
