import cmath
import math
import random

import numpy as np
import pytest

from hosplab.borel import (
    PRINCIPAL,
    SECOND,
    BorelSingularityError,
    PadeError,
    SheetPoint,
    borel_residual_checks,
    classify_poles,
    exact_borel_eval,
    hankel_contribution,
    inverse_borel_quadrature,
    model_borel_series,
    model_inverse_borel,
    pade_build,
    pade_poles,
    pole_visible,
    stokes_multiplier,
)


class TestExactBorel:
    def test_boundary_value_is_y0(self):
        rng = random.Random(5)
        for _ in range(10):
            z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            assert exact_borel_eval(SheetPoint(0), z) == pytest.approx(1 / z, rel=1e-14)

    def test_z_one_has_no_sheet_dependence(self):
        for w in (0.1 + 0.2j, -0.3j, 0.25):
            v1 = exact_borel_eval(SheetPoint(w, PRINCIPAL), 1)
            v2 = exact_borel_eval(SheetPoint(w, SECOND), 1)
            assert v1 == pytest.approx(1 / (2 * (0.5 - w)))
            assert v2 == pytest.approx(v1)

    def test_second_sheet_limit_at_chi2(self):
        z = 0.5 + 1j
        chi2 = z - 0.5
        v = exact_borel_eval(SheetPoint(chi2 + 1e-7, SECOND), z)
        assert v == pytest.approx(1 / (2 * (z - 1) ** 2), rel=1e-5)

    def test_pole_on_principal_sheet_raises(self):
        z = 0.5 + 1j
        with pytest.raises(BorelSingularityError):
            exact_borel_eval(SheetPoint(z - 0.5), z)
        with pytest.raises(BorelSingularityError):
            exact_borel_eval(SheetPoint(z * z / 2), z)

    def test_square_root_monodromy(self):
        z = 0.5 + 1j
        chi1 = z * z / 2
        r = 0.1 * abs(chi1 - (z - 0.5))

        def continue_loop(sheet, turns):
            ts = np.linspace(0, 2 * math.pi * turns, 400 * turns + 1)
            prev = exact_borel_eval(SheetPoint(chi1 + r, sheet), z)
            for t in ts[1:]:
                w = chi1 + r * cmath.exp(1j * t)
                cands = [exact_borel_eval(SheetPoint(w, s), z) for s in (PRINCIPAL, SECOND)]
                prev = min(cands, key=lambda c: abs(c - prev))
            return prev

        start = exact_borel_eval(SheetPoint(chi1 + r, PRINCIPAL), z)
        other = exact_borel_eval(SheetPoint(chi1 + r, SECOND), z)
        assert continue_loop(PRINCIPAL, 1) == pytest.approx(other, rel=1e-10)
        assert continue_loop(PRINCIPAL, 2) == pytest.approx(start, rel=1e-10)

    def test_visibility_matches_circle(self):
        for z in (0.5 + 1j, 2.0, -1 + 0.1j):
            assert pole_visible(z)
        for z in (0.5, 0.5 + 0.3j, 0.8 + 0.1j):
            assert not pole_visible(z)


class TestPade:
    def test_geometric_series(self):
        approx = pade_build(np.ones(7), 3)
        poles = [p for p, r in pade_poles(approx) if np.isfinite(r)]
        assert min(abs(p - 1) for p in poles) < 1e-12
        w = 0.3 + 0.2j
        assert approx(w) == pytest.approx(1 / (1 - w), rel=1e-12)

    def test_shifted_pole(self):
        c = 2.0 ** -(np.arange(7) + 1)
        poles = pade_poles(pade_build(c, 3))
        assert min(abs(p - 2) for p, _ in poles) < 1e-10

    def test_single_pole_residual(self):
        poles = pade_poles(pade_build(np.ones(2), 1))
        assert len(poles) == 1
        p, res = poles[0]
        assert p == pytest.approx(1.0) and res < 1e-15

    def test_too_short_series(self):
        with pytest.raises(ValueError):
            pade_build(np.ones(5), 3)

    def test_nonfinite_series(self):
        with pytest.raises(PadeError):
            pade_build([1, np.inf, 1, 1], 2)

    @staticmethod
    def _sorted_poles(approx):
        return np.sort_complex(np.array([p for p, _ in pade_poles(approx)]))

    def test_projective_invariance(self):
        # three simple poles: the [2:3] approximant is exact and well conditioned
        k = np.arange(6)
        series = 1.0 ** -(k + 1) + 2 * 3.0 ** -(k + 1) + 1j * (2j) ** -(k + 1)
        c = 3.7j - 0.4
        a = pade_build(series, 3)
        b = pade_build(c * series, 3)
        np.testing.assert_allclose(b.num_coeffs, c * a.num_coeffs, rtol=1e-12)
        assert np.max(np.abs(self._sorted_poles(a) - self._sorted_poles(b))) <= 1e-12

    def test_projective_invariance_scales_with_condition(self):
        series, scale = model_borel_series(0.5 + 1j, 12)
        a = pade_build(series, 6, scale=scale)
        b = pade_build(3.7j * series, 6, scale=scale)
        drift = np.max(np.abs(self._sorted_poles(a) - self._sorted_poles(b)))
        assert drift <= 1e-14 * a.condition

    @pytest.mark.parametrize("z", [0.5 + 1j, 1.5 + 0.2j, -0.5 + 0.9j, 1.2])
    def test_isolated_pole_outside_hosl(self, z):
        series, scale = model_borel_series(z, 120)
        poles = pade_poles(pade_build(series, 60, scale=scale))
        chi2 = z - 0.5
        assert min(abs(p - chi2) for p, _ in poles) < 1e-6

    @pytest.mark.parametrize("z", [0.5 + 0.2j, 0.7 + 0.3j, 0.4 - 0.3j])
    def test_no_pole_inside_hosl(self, z):
        series, scale = model_borel_series(z, 120)
        poles = pade_poles(pade_build(series, 60, scale=scale))
        chi2 = z - 0.5
        assert min(abs(p - chi2) for p, _ in poles) > 0.01

    def test_classifier(self):
        ray = [0.5 + 0.01 * k for k in range(20)]
        labels = classify_poles(ray + [3j])
        assert labels[-1] == "isolated"
        assert set(labels[:-1]) == {"cluster"}


class TestLaplace:
    @pytest.mark.parametrize("eps", [0.05, 0.3, 1.0])
    def test_unit_function(self, eps):
        assert inverse_borel_quadrature(0, eps, lambda p: 1.0) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("k", [1, 2, 4])
    def test_powers(self, k):
        eps = 0.2
        f = lambda p: p.w ** k / math.factorial(k)
        assert inverse_borel_quadrature(0, eps, f) == pytest.approx(eps ** k, rel=1e-10)

    def test_linearity(self):
        rng = random.Random(2)
        f = lambda p: 1 / (1 + p.w) ** 2
        g = lambda p: cmath.exp(-p.w) * (1 + 1j * p.w)
        for _ in range(3):
            a, b = complex(rng.random(), rng.random()), complex(rng.random(), -rng.random())
            lhs = inverse_borel_quadrature(0, 0.3, lambda p: a * f(p) + b * g(p))
            rhs = a * inverse_borel_quadrature(0, 0.3, f) + b * inverse_borel_quadrature(0, 0.3, g)
            assert abs(lhs - rhs) <= 1e-10

    def test_singularity_on_contour(self):
        with pytest.raises(BorelSingularityError):
            inverse_borel_quadrature(0, 0.1, lambda p: 1 / (1 - p.w), singularities=[1.0])

    def test_rejects_nonpositive_eps(self):
        with pytest.raises(ValueError):
            inverse_borel_quadrature(0, -0.1, lambda p: 1.0)
        with pytest.raises(ValueError):
            inverse_borel_quadrature(0, 0.1j, lambda p: 1.0)

    def test_model_small_eps_close_to_base(self):
        z = -1 - 1j
        eps = 0.02
        approx = 1 / z + eps * (1 + z) / z ** 3 + eps ** 2 * (2 * z * z + 3 * z + 3) / z ** 5
        assert abs(model_inverse_borel(z, eps) - approx) < 20 * eps ** 3


class TestHankel:
    def test_multiplier(self):
        assert stokes_multiplier(0.04) == pytest.approx(-10 * math.sqrt(math.pi) * 1j)

    def test_prefactor_at_two(self):
        eps = 0.1
        h = hankel_contribution(2, eps).to_complex()
        assert h / (stokes_multiplier(eps) * math.exp(-20)) == pytest.approx(-1 / math.sqrt(2))

    def test_magnitude_log(self):
        h = hankel_contribution(2, 0.1)
        expect = math.log(abs(stokes_multiplier(0.1)) / math.sqrt(2)) - 20
        assert h.log_magnitude == pytest.approx(expect, rel=1e-14)

    def test_z_one_raises(self):
        with pytest.raises(ValueError):
            hankel_contribution(1, 0.1)


class TestResidualChecks:
    def test_pde_and_taylor(self):
        rng = random.Random(9)
        z = 0.5 + 1j
        grid = []
        while len(grid) < 50:
            w = complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3))
            grid.append(SheetPoint(w))
        r = borel_residual_checks(z, grid)
        assert r["pde_residual_max"] <= 1e-8
        assert r["taylor_match_count"] >= 25

    def test_grid_near_singularity(self):
        z = 0.5 + 1j
        with pytest.raises(BorelSingularityError):
            borel_residual_checks(z, [SheetPoint(z - 0.5 + 1e-5)])
