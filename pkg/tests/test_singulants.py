import cmath
import math
import random
from fractions import Fraction

import mpmath
import pytest

from hosplab.coeffkernel import GaussianRational as G
from hosplab.recurrences import PEARCEY_ZPLUS, pearcey_S_mp, pearcey_sprime_mp
from hosplab.singulants import (
    PearceyTracker,
    get_case,
    hamiltonian_flow,
    kelvin_case,
    model_case,
    pearcey_case,
    trinh_case,
)


def _cdiff(f, z, h=1e-6):
    return (f(z + h) - f(z - h)) / (2 * h)


class TestModel:
    def test_values(self, mcase):
        z = 0.5 + 1j
        assert mcase.singulants["chi1"](z) == pytest.approx(-0.375 + 0.5j)
        assert mcase.singulants["chi2"](z) == pytest.approx(1j)

    def test_constants(self, mcase):
        c = mcase.constants
        assert c["alpha1"] == Fraction(1, 2) and c["beta"] == Fraction(1, 2)
        assert c["alpha2"] == c["alpha1"] + c["beta"] == 1
        assert c["Lambda0"] == pytest.approx(0.39894228, abs=1e-8)
        assert c["Lambda_tilde"] == pytest.approx(0.15915494j, abs=1e-8)
        assert c["z_star"] == 1.0
        assert set(mcase.singular_points) == {0.0, 1.0}

    def test_chi_equal_at_z_star(self, mcase):
        s = mcase.singulants
        assert s["chi1"](1.0) == s["chi2"](1.0)

    def test_origins(self, mcase):
        assert mcase.singulants["chi1"](0.0) == 0
        assert mcase.singulants["chi2"](0.5) == 0

    def test_chi_tilde_identity_exact(self, mcase):
        # chi_tilde = chi2 - chi1 at rational z, evaluated in exact arithmetic
        rng = random.Random(4)
        for _ in range(10):
            z = G(Fraction(rng.randint(-9, 9), rng.randint(1, 9)), Fraction(rng.randint(-9, 9), rng.randint(1, 9)))
            chi1 = z * z / 2
            chi2 = z - G(Fraction(1, 2))
            assert chi2 - chi1 == -((z - 1) ** 2) / 2

    def test_derivatives(self, mcase):
        for z in (0.3 + 0.7j, -1.2 + 0.1j):
            for k in ("chi1", "chi2", "chi_tilde"):
                num = _cdiff(mcase.singulants[k], z)
                assert mcase.derivatives[k](z) == pytest.approx(num, rel=1e-8, abs=1e-10)


class TestTrinh:
    a = -1 + 1j

    def test_boundary_condition(self):
        c = trinh_case(G(-1, 1))
        assert abs(c.singulants["chi1"](self.a)) < 1e-15
        assert abs(c.singulants["chi2"](self.a)) < 1e-15

    def test_new_singulant_identity(self):
        c = trinh_case(G(-1, 1))
        for z in (0.3 + 0.2j, -0.5 + 1.5j, 2 - 1j):
            diff = c.singulants["chi3"](z) - c.singulants["chi1"](z)
            assert diff == pytest.approx(-4 / 3 * z * cmath.sqrt(z), abs=1e-14)
            assert diff == pytest.approx(c.singulants["chi_tilde_plus"](z), abs=1e-14)
            d4 = c.singulants["chi4"](z) - c.singulants["chi2"](z)
            assert d4 == pytest.approx(c.singulants["chi_tilde_minus"](z), abs=1e-14)

    def test_late_late_zero_at_origin(self):
        c = trinh_case(G(-1, 1))
        assert c.singulants["chi_tilde_plus"](0.0) == 0

    def test_chi1_derivative(self):
        c = trinh_case(G(-1, 1))
        for z in (0.4 + 0.3j, 1.5 - 0.5j, -0.5 + 0.8j):
            h = 1e-5
            num = (c.singulants["chi1"](z + h) - c.singulants["chi1"](z - h)) / (2 * h)
            assert num == pytest.approx(1 + cmath.sqrt(z), abs=1e-10)

    def test_string_parameter_and_rejects(self):
        assert get_case("trinh", a=G(-1, 1)).constants["a"] == G(-1, 1)
        with pytest.raises(KeyError):
            get_case("trinh")
        for bad in (0, 1):
            with pytest.raises(ValueError):
                trinh_case(bad)

    def test_chi3_zero(self):
        c = trinh_case(G(-1, 1))
        z3 = c.constants["chi3_zero"]
        assert abs(c.singulants["chi3"](z3)) < 1e-12


class TestPearcey:
    def test_singular_points(self, pcase):
        assert PEARCEY_ZPLUS == pytest.approx(2j * math.sqrt(3) / 9, abs=1e-15)
        assert abs(PEARCEY_ZPLUS - 0.3849j) < 1e-4
        assert pcase.constants["z_minus"] == -pcase.constants["z_plus"]
        assert pcase.constants["singularity_exponent"] == Fraction(1, 4)

    def test_branches_at_zero(self):
        with mpmath.workdps(30):
            vals = [complex(pearcey_sprime_mp(0, m)) for m in (1, 2, 3)]
            assert vals[0] == pytest.approx(1)
            assert sorted(v.real for v in vals) == pytest.approx([-1, 0, 1], abs=1e-25)
            assert complex(pearcey_S_mp(0, 1)) == pytest.approx(1j / 3)

    def test_cubic_residuals(self):
        rng = random.Random(8)
        for _ in range(20):
            z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            with mpmath.workdps(30):
                for m in (1, 2, 3):
                    s = pearcey_sprime_mp(z, m)
                    assert abs(s ** 3 - s + 1j * z) <= 1e-10

    def test_differences(self, pcase):
        z = 0.2 + 0.9j
        s = [complex(pearcey_S_mp(z, m)) for m in (1, 2, 3)]
        ev = pcase.evaluator(z).values(z)
        assert ev["chi1"] == pytest.approx(s[1] - s[0], abs=1e-12)
        assert ev["chi3"] == pytest.approx(s[1] - s[2], abs=1e-12)
        assert ev["chi_tilde1"] == pytest.approx(s[2] - s[1], abs=1e-12)

    def test_tracker_continuity(self):
        # a loop around z+ permutes the coalescing pair and fixes the third root
        tr = PearceyTracker(PEARCEY_ZPLUS + 0.2)
        start = list(tr.roots)
        for t in [2 * math.pi * k / 400 for k in range(1, 401)]:
            tr.advance(PEARCEY_ZPLUS + 0.2 * cmath.exp(1j * t))
        end = list(tr.roots)
        same = [abs(a - b) < 1e-9 for a, b in zip(start, end)]
        assert sum(same) == 1


class TestFlow:
    def test_tau_one(self):
        st = hamiltonian_flow(1.0)
        assert abs(st.z) <= 1e-12
        assert st.w == pytest.approx(1j / 3, abs=1e-12)
        assert st.w == pytest.approx(complex(pearcey_S_mp(0, 1)), abs=1e-12)

    def test_tau_inverse_sqrt3(self):
        st = hamiltonian_flow(1 / math.sqrt(3))
        assert abs(st.w) <= 1e-12
        assert st.z == pytest.approx(-PEARCEY_ZPLUS, abs=1e-12)

    def test_symbol_vanishes(self):
        rng = random.Random(1)
        for _ in range(20):
            t = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            assert abs(hamiltonian_flow(t).sigma) <= 1e-12 * max(1, abs(t) ** 3)

    def test_constants(self):
        st = hamiltonian_flow(0.3)
        assert st.constants["eta0"] == 1.0 and st.constants["w0"] == 0.0
        assert st.constants["xi0"] == pytest.approx(math.sqrt(3) / 3)


class TestKelvin:
    def test_values(self):
        c = kelvin_case()
        assert c.singulants["chi"](1.0) == 0
        assert c.singulants["chi_tilde"](0.0) == 0

    def test_hosl_is_imaginary_axis(self):
        c = kelvin_case()
        for y in (0.3j, -2j, 1.7j):
            r = c.singulants["chi_tilde"](y) / c.singulants["chi"](y)
            assert abs(r.imag) < 1e-15 and r.real > 0
        r = c.singulants["chi_tilde"](0.5 + 0.5j) / c.singulants["chi"](0.5 + 0.5j)
        assert abs(r.imag) > 0.1


def test_unknown_case():
    with pytest.raises(ValueError):
        get_case("airy")
