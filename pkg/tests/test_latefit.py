import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import hosplab.latefit as lf
from hosplab.stokesgeo import classify_activity
from hosplab.latefit import (
    evaluate_table,
    fit_factorial_power,
    measure_remainder,
    measure_remainder_detail,
    model_radial_arc,
    optimal_truncation,
    richardson,
    smoothing_model,
    smoothing_scan,
)

LAMBDA0 = 1 / math.sqrt(2 * math.pi)


def _synthetic(chi, alpha, lam, N):
    with mpmath.workdps(40):
        return [lam * mpmath.gamma(n + alpha) / mpmath.mpc(chi) ** (n + alpha) for n in range(N + 1)]


class TestFit:
    def test_synthetic(self):
        f = fit_factorial_power(_synthetic(2, 0.5, 1, 100))
        assert f.chi_hat == pytest.approx(2, rel=1e-3)
        assert f.alpha_hat == pytest.approx(0.5, rel=1e-3)
        assert f.prefactor_hat == pytest.approx(1, rel=1e-3)
        assert f.status == "converged"
        ns = [n for n, _ in f.convergence_table]
        assert all(b > a for a, b in zip(ns, ns[1:]))

    def test_synthetic_complex(self):
        chi = 0.3 - 0.7j
        f = fit_factorial_power(_synthetic(chi, 1.25, 2 - 1j, 120))
        assert f.chi_hat == pytest.approx(chi, rel=1e-6)
        assert f.alpha_hat == pytest.approx(1.25, rel=1e-5)
        assert f.prefactor_hat == pytest.approx(2 - 1j, rel=1e-4)

    def test_alpha_known(self):
        f = fit_factorial_power(_synthetic(3, 0.5, 1, 60), alpha_known=0.5)
        assert f.chi_hat == pytest.approx(3, rel=1e-10)
        assert f.alpha_hat == 0.5

    def test_model_base(self, base200):
        f = fit_factorial_power(evaluate_table(base200, Fraction(2, 5)))
        assert f.chi_hat == pytest.approx(0.08, rel=1e-3)
        # prefactor = Lambda0 * B0(z), B0 = 1/(1 - z)
        assert f.prefactor_hat * (1 - 0.4) == pytest.approx(LAMBDA0, rel=5e-3)

    def test_model_amplitude(self, amp200, mcase):
        f = fit_factorial_power(evaluate_table(amp200, Fraction(1, 2)))
        assert f.chi_hat == pytest.approx(-0.125, rel=1e-2)
        assert f.alpha_hat == pytest.approx(0.5, rel=1e-2)
        # B_p is normalized by Lambda0, so the fitted prefactor is Lambda_tilde/Lambda0
        lam_t = mcase.constants["Lambda_tilde"]
        assert f.prefactor_hat * LAMBDA0 == pytest.approx(lam_t, rel=1e-2)
        assert lam_t == pytest.approx(1j / (2 * math.pi), rel=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(c=st.complex_numbers(min_magnitude=0.1, max_magnitude=1e6, allow_nan=False, allow_infinity=False))
    def test_scale_equivariance(self, c):
        vals = _synthetic(0.5 + 0.2j, 0.75, 1, 60)
        f0 = fit_factorial_power(vals)
        with mpmath.workdps(40):
            scaled = [mpmath.mpc(c) * v for v in vals]
        f1 = fit_factorial_power(scaled)
        assert abs(f1.chi_hat - f0.chi_hat) <= 1e-12 * abs(f0.chi_hat)
        assert abs(f1.alpha_hat - f0.alpha_hat) <= 1e-12
        assert abs(f1.prefactor_hat - c * f0.prefactor_hat) <= 1e-12 * abs(c * f0.prefactor_hat)

    def test_error_shrinks_with_n(self):
        # a 1/n correction to the leading behaviour; without it the fit is exact
        def seq(N):
            return [v * (1 + mpmath.mpf(3) / (n + 1)) for n, v in enumerate(_synthetic(2, 0.5, 1, N))]
        errs = [abs(fit_factorial_power(seq(N), depth=0).chi_hat - 2) for N in (30, 60, 120)]
        assert errs[1] < errs[0] and errs[2] < errs[1]

    def test_richardson_step_halves_error(self):
        # chi_n = (n + alpha) y_n/y_(n+1) from the synthetic sequence
        ys = _synthetic(2, 0.5, 1, 80)
        with mpmath.workdps(40):
            raw = [(n + 0.3) * ys[n] / ys[n + 1] for n in range(80)]
            for d in range(3):
                e0 = abs(richardson(raw, 0, d)[-1] - 2)
                e1 = abs(richardson(raw, 0, d + 1)[-1] - 2)
                assert e1 <= 0.5 * e0

    def test_richardson_exact_on_polynomial_in_inverse_n(self):
        with mpmath.workdps(30):
            seq = [3 + mpmath.mpf(2) / n - mpmath.mpf(5) / n ** 2 for n in range(1, 20)]
            assert abs(richardson(seq, 1, 2)[-1] - 3) < 1e-20

    def test_insufficient_and_zero(self):
        assert fit_factorial_power([1, 2, 3]).status == "insufficient_data"
        with pytest.raises(ValueError):
            fit_factorial_power([1.0] * 10 + [0.0] + [1.0] * 5)


class TestTruncation:
    def test_symmetric(self):
        t = optimal_truncation(100, 1, 1)
        assert t.P == 50 and t.rho_tilde == 0

    def test_model_half(self, mcase):
        chi, chit = 0.125, mcase.singulants["chi_tilde"](0.5)
        assert abs(chit) == pytest.approx(0.125)
        for n in (40, 41, 60, 61):
            t = optimal_truncation(n, chi, chit)
            assert t.P - n / 2 == pytest.approx(t.rho_tilde)
            assert 0 <= t.rho_tilde < 1

    @settings(max_examples=50, deadline=None)
    @given(n=st.integers(1, 500), r=st.floats(0.01, 10), rt=st.floats(0.01, 10),
           a=st.floats(-3, 3), b=st.floats(-3, 3))
    def test_rho_in_unit_interval(self, n, r, rt, a, b):
        t = optimal_truncation(n, r * cmath.exp(1j * a), rt * cmath.exp(1j * b))
        assert 0 <= t.rho_tilde < 1
        assert t.P - t.rho_tilde == pytest.approx(rt * n / (r + rt), rel=1e-12, abs=1e-9)
        assert t.n_minus_P == n - t.P

    def test_hyper_check(self):
        t = optimal_truncation(90, 2.0, 1.0, eps=2.0 / 90)
        assert t.hyper_check == pytest.approx(t.P - t.rho_tilde)

    def test_errors(self):
        with pytest.raises(ValueError):
            optimal_truncation(0, 1, 1)
        with pytest.raises(ValueError):
            optimal_truncation(10, 0, 1)


class TestRemainder:
    def test_active_side_matches_switched_term(self, base200, amp200, mcase):
        z = 0.5 + 0.7j
        R = measure_remainder(z, 40, base200, amp200, mcase)
        asym = smoothing_model(z, 40, mcase)["asymptote"]
        q = complex((R / asym).to_mp())
        assert abs(abs(q) - 1) <= 0.15

    @pytest.mark.parametrize("z", [0.3 + 0.2j, 0.7 + 0.1j, Fraction(2, 5), 0.6 - 0.3j])
    def test_inactive_side_absent(self, z, base200, amp200, mcase):
        R = measure_remainder(z, 40, base200, amp200, mcase)
        asym = smoothing_model(complex(z), 40, mcase)["asymptote"]
        assert R.log_magnitude - asym.log_magnitude <= math.log(0.1)

    def test_last_term_bounds_remainder(self, base200, amp200, mcase):
        r = measure_remainder_detail(Fraction(2, 5), 40, base200, amp200, mcase)
        assert r.P == optimal_truncation(40, 0.08, -0.18).P == 28
        assert r.value.log_magnitude < r.last_term.log_magnitude

    def test_remainder_dominance_inactive_side(self, base200, amp200, mcase):
        rng = np.random.default_rng(3)
        pair = mcase.hosl_pairs["HOSL"]
        for _ in range(10):
            z = 0.5 + rng.uniform(0.05, 0.35) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
            assert classify_activity(z, pair, mcase) == 0
            r = measure_remainder_detail(z, 40, base200, amp200, mcase)
            assert r.value.log_magnitude <= r.last_term.log_magnitude, z

    def test_high_precision_fallback(self, base200, amp200, mcase):
        r = measure_remainder_detail(Fraction(2, 5), 40, base200, amp200, mcase)
        assert r.high_precision and r.digits_lost > 10
        # float input converted exactly gives the same value
        r2 = measure_remainder_detail(0.4, 40, base200, amp200, mcase)
        assert r2.value.log_magnitude == pytest.approx(r.value.log_magnitude, rel=1e-12)

    def test_table_too_short(self, amp200, mcase):
        from hosplab.recurrences import model_base_coefficients
        with pytest.raises(ValueError):
            measure_remainder(0.5 + 0.7j, 40, model_base_coefficients(10), amp200, mcase)

    def test_non_model_case(self, base200, amp200, pcase):
        with pytest.raises(ValueError):
            measure_remainder(0.5 + 0.7j, 40, base200, amp200, pcase)


class TestSmoothing:
    def test_erf_integral_odd(self, mcase, monkeypatch):
        for T in (0.3, 1.0, 2.5, 4.0):
            monkeypatch.setattr(lf, "_transverse", lambda z, n, case, T=T: T)
            plus = smoothing_model(0.5 + 0.7j, 40, mcase)
            monkeypatch.setattr(lf, "_transverse", lambda z, n, case, T=T: -T)
            minus = smoothing_model(0.5 + 0.7j, 40, mcase)
            assert plus["erf_value"] == pytest.approx(-minus["erf_value"], abs=1e-15)
            assert plus["cdf"] + minus["cdf"] == pytest.approx(1, abs=1e-15)

    def test_limits(self, mcase, monkeypatch):
        monkeypatch.setattr(lf, "_transverse", lambda z, n, case: 40.0)
        m = smoothing_model(0.5 + 0.7j, 40, mcase)
        assert m["erf_value"] == pytest.approx(math.sqrt(math.pi / 2))
        assert m["value"].log_magnitude == pytest.approx(m["asymptote"].log_magnitude)
        monkeypatch.setattr(lf, "_transverse", lambda z, n, case: 0.0)
        m = smoothing_model(0.5 + 0.7j, 40, mcase)
        assert m["erf_value"] == 0
        assert m["value"].log_magnitude == pytest.approx(m["asymptote"].log_magnitude - math.log(2))

    def test_on_hosl(self, mcase):
        z = 0.5 + 0.5j
        assert smoothing_model(z, 60, mcase)["transverse_coordinate"] == 0.0

    def test_sign_of_T(self, mcase):
        assert smoothing_model(0.5 + 0.7j, 60, mcase)["transverse_coordinate"] > 0
        assert smoothing_model(0.5 + 0.3j, 60, mcase)["transverse_coordinate"] < 0

    def test_scan(self, base200, amp200, mcase):
        prof = smoothing_scan(model_radial_arc(num=31), 60, mcase, (base200, amp200))
        assert prof.max_deviation(3.0) <= 0.05
        ends = sorted([prof.points[0], prof.points[-1]], key=lambda p: p.T)
        assert ends[0].T < -3 and ends[1].T > 3
        assert abs(ends[0].cdf) <= 0.05 and abs(ends[1].cdf - 1) <= 0.05
        assert abs(prof.far_inactive) <= 0.05  # measured remainder vanishes off the HOSL
        assert abs(abs(prof.far_active) - 1) <= 0.15
        text = prof.to_csv()
        assert text.splitlines()[0] == "s,re_z,im_z,T,re_meas,im_meas,re_model,im_model,normalized"
        assert len(text.splitlines()) == 32
