"""Exact coefficient tables for the worked problems.

* model base series ``y_n`` of ``eps^2 y'' + eps (1 + z) y' + z y = 1``;
* model late-term amplitudes ``B_p`` (overall constant factored out);
* base series ``A_n`` of ``eps^2 A'' + 2 eps A' + (1 - z) A = 1/(z - a)``;
* late-late amplitude coefficients of that problem (closed-form monomials);
* inner-region series coefficients used as exact matching fixtures;
* leading-order Pearcey WKB objects and their operator residuals.

All homogeneous integration constants beyond the first amplitude are set to
zero, which reproduces the particular solutions the matching chain needs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from .coeffkernel import GaussianRational, Polynomial, RationalFunction

__all__ = [
    "CoeffTable",
    "InnerFixture",
    "INNER_Z0",
    "INNER_Z1",
    "model_base_coefficients",
    "model_amplitude_Bp",
    "trinh_base_coefficients",
    "trinh_amplitude_coefficients",
    "inner_series_coefficient",
    "recurrence_residual",
    "pearcey_leading_objects",
    "PearceyLeading",
]


@dataclass(frozen=True)
class CoeffTable:
    """Immutable table of exact coefficients.

    ``entries[k]`` is the k-th coefficient (``y_n``, ``A_n`` or ``B_p``).  When
    ``normalization`` is true the overall constant of integration has been
    divided out (entries are then the amplitude over that constant).
    """

    case_id: str
    kind: str
    entries: tuple[RationalFunction, ...]
    normalization: bool = False
    params: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    def __iter__(self):
        return iter(self.entries)

    @property
    def N(self) -> int:
        return len(self.entries) - 1


# ---------------------------------------------------------------------------
# model problem
# ---------------------------------------------------------------------------


def _model_base_polys(N: int) -> tuple[list[list[int]], list[int]]:
    """Integer numerators ``P_n`` with ``y_n = P_n(z) / z**(2n+1)``.

    Works directly on integer coefficient lists; d/dz[P z^k] = (z P' + k P) z^(k-1).
    """
    def d(P, k):
        out = [k * c for c in P]
        for i in range(1, len(P)):
            out[i] += i * P[i]
        return out

    Ps = [[1], [1, 1]][: N + 1]
    for n in range(2, N + 1):
        k2 = -(2 * n - 3)
        a = d(d(Ps[n - 2], k2), k2 - 1)          # y''_{n-2} numerator over z^(2n-1)
        b = d(Ps[n - 1], -(2 * n - 1))            # y'_{n-1} numerator over z^(2n)
        tot = [0] * (max(len(a), len(b)) + 1)
        for i, c in enumerate(a):
            tot[i + 1] += c                        # bring to common z^(2n)
        for i, c in enumerate(b):
            tot[i] += c
            tot[i + 1] += c                        # (1 + z) factor
        Ps.append([-c for c in tot])
    return Ps, [-(2 * n + 1) for n in range(N + 1)]


def model_base_coefficients(N: int) -> CoeffTable:
    """Base-series coefficients ``y_0 .. y_N`` of the model problem.

    ``y_0 = 1/z``, ``y_1 = (1 + z)/z^3`` and
    ``y_n = -(y''_{n-2} + (1 + z) y'_{n-1}) / z`` for ``n >= 2``.
    Each ``y_n`` has a pole of order exactly ``2n + 1`` at ``z = 0`` and
    integer numerator coefficients.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    Ps, ks = _model_base_polys(N)
    entries = tuple(
        RationalFunction(Polynomial._raw(P, [0] * len(P), 1), {0: -k}) for P, k in zip(Ps, ks)
    )
    return CoeffTable("model", "base", entries)


def model_amplitude_Bp(P: int) -> CoeffTable:
    """Late-term amplitudes ``B_p / Lambda_0`` of the model problem.

    ``B_0 = 1/(1 - z)`` and ``B_p = -B'_{p-1}/(1 - z)``, which is the amplitude
    equation with the homogeneous constants of ``p >= 1`` set to zero.  The
    closed form is ``B_p = c_p (1 - z)^(-(2p+1))`` with ``c_p = -(2p - 1) c_{p-1}``.
    """
    if P < 0:
        raise ValueError("P must be >= 0")
    one_minus_z = RationalFunction(Polynomial([1, -1]), known_roots=[1])
    entries = [RationalFunction.constant(1, known_roots=[1]) / one_minus_z]
    for _ in range(1, P + 1):
        entries.append(-entries[-1].derivative() / one_minus_z)
    return CoeffTable("model", "amplitude", tuple(entries), normalization=True)


# ---------------------------------------------------------------------------
# second-order problem with a singular forcing at z = a
# ---------------------------------------------------------------------------


def _as_gaussian(a) -> GaussianRational:
    if isinstance(a, str):
        from .cli import parse_complex_exact
        return parse_complex_exact(a)
    return GaussianRational.coerce(a)


def trinh_base_coefficients(N: int, a) -> CoeffTable:
    """Base-series coefficients ``A_0 .. A_N`` for the forced problem.

    ``A_0 = 1/((1 - z)(z - a))``,
    ``A_1 = 2/((1 - z)^2 (z - a)^2) - 2/((1 - z)^3 (z - a))`` and
    ``(1 - z) A_n = -(A''_{n-2} + 2 A'_{n-1})`` for ``n >= 2``.
    ``a`` is a Gaussian rational (or an exact ``"re+imi"`` string).
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    a = _as_gaussian(a)
    if a == 0 or a == 1:
        raise ValueError("a must not be 0 or 1 (degenerate coalescence)")
    roots = [GaussianRational(1), a]
    one_minus_z = RationalFunction(Polynomial([1, -1]), known_roots=roots)
    z_minus_a = RationalFunction(Polynomial([-a, 1]), known_roots=roots)
    A0 = RationalFunction.constant(1, known_roots=roots) / (one_minus_z * z_minus_a)
    A1 = (RationalFunction.constant(2, known_roots=roots) / (one_minus_z ** 2 * z_minus_a ** 2)
          - RationalFunction.constant(2, known_roots=roots) / (one_minus_z ** 3 * z_minus_a))
    entries = [A0, A1][: N + 1]
    for n in range(2, N + 1):
        rhs = entries[n - 2].derivative().derivative() + entries[n - 1].derivative().scale(2)
        entries.append(-rhs / one_minus_z)
    return CoeffTable("trinh", "base", tuple(entries), params={"a": a})


def trinh_amplitude_coefficients(P: int, branch: int = +1) -> list[Fraction]:
    """Exact late-late coefficients ``c_p`` for the forced problem.

    With ``s = z**(1/2)``, ``chi' = 1 + branch * s`` and
    ``B_0 = Lambda_0 (1 - chi')^(-1/2)``, the amplitude equation
    ``B''_{p-2} + 2 (1 - chi') B'_{p-1} - chi'' B_{p-1} = 0``
    (homogeneous parts dropped) is solved exactly by
    ``B_p = B_0 c_p s^(-3p)`` with
    ``c_p = -branch * c_{p-1} (6p - 5)(6p - 1) / (48 p)``, ``c_0 = 1``.
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    c = [Fraction(1)]
    for p in range(1, P + 1):
        c.append(-branch * c[-1] * Fraction((6 * p - 5) * (6 * p - 1), 48 * p))
    return c


def recurrence_residual(table: CoeffTable, n: int) -> RationalFunction:
    """Exact residual of the generating recurrence at index ``n``.

    Zero for every ``n`` the recurrence covers; seeds (``n < 2`` for base
    tables, ``n < 1`` for amplitudes) are checked against their closed forms
    by the caller.
    """
    e = table.entries
    if table.case_id == "model" and table.kind == "base":
        if n < 2:
            raise ValueError("the base recurrence starts at n = 2")
        one_plus_z = RationalFunction(Polynomial([1, 1]), known_roots=[0])
        zf = RationalFunction(Polynomial([0, 1]), known_roots=[0])
        return e[n - 2].derivative().derivative() + one_plus_z * e[n - 1].derivative() + zf * e[n]
    if table.case_id == "model" and table.kind == "amplitude":
        if n < 1:
            raise ValueError("the amplitude recurrence starts at p = 1")
        one_minus_z = RationalFunction(Polynomial([1, -1]), known_roots=[1])
        return one_minus_z * e[n] + e[n - 1].derivative()
    if table.case_id == "trinh" and table.kind == "base":
        if n < 2:
            raise ValueError("the base recurrence starts at n = 2")
        one_minus_z = RationalFunction(Polynomial([1, -1]), known_roots=e[n].known_roots)
        return (e[n - 2].derivative().derivative() + e[n - 1].derivative().scale(2)
                + one_minus_z * e[n])
    raise ValueError(f"no recurrence registered for {table.case_id}/{table.kind}")


# ---------------------------------------------------------------------------
# inner-region fixtures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InnerFixture:
    """Closed-form inner-series coefficients near a singular point.

    ``location`` is ``"z=0"`` (base series, inner variable ``z = eps^(1/2) zhat``)
    or ``"z=1"`` (late-term amplitudes, inner variable ``1 - z = eps^(1/2) zhat``).
    ``scaling`` records the exponents of the inner variables and the matching
    constants.
    """

    location: str
    scaling: dict

    def coefficient(self, k: int) -> Fraction:
        return inner_series_coefficient(self, k)


INNER_Z0 = InnerFixture("z=0", {"zhat": "z / eps**(1/2)", "yhat": "eps**(1/2) y", "c1": 1, "alpha": Fraction(1, 2)})
INNER_Z1 = InnerFixture("z=1", {"zhat": "(1 - z) / eps**(1/2)", "c1": 1, "beta": Fraction(1, 2)})


def _double_factorial_odd(k: int) -> int:
    """(2k - 1)!! = Gamma(2k) 2^(1-k) / Gamma(k); equals 1 at k = 0."""
    return math.prod(range(1, 2 * k, 2)) if k > 0 else 1


def inner_series_coefficient(fixture: InnerFixture, k: int) -> Fraction:
    """Inner-series coefficient ``Gamma(2k) / (2^(k-1) Gamma(k))`` (1 at k = 0).

    The ``z=1`` fixture carries the extra sign ``(-1)^k``.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    v = Fraction(_double_factorial_odd(k))
    if fixture.location == "z=1":
        v *= (-1) ** k
    elif fixture.location != "z=0":
        raise ValueError(f"unknown fixture location {fixture.location!r}")
    return v


# ---------------------------------------------------------------------------
# Pearcey leading order
# ---------------------------------------------------------------------------


_SQ3 = math.sqrt(3.0)
PEARCEY_ZPLUS = 2j * _SQ3 / 9


def _pearcey_p(z, sqrt=mpmath.sqrt, cbrt=lambda x: x ** (mpmath.mpf(1) / 3)):
    return cbrt(12j * (-9 * z + sqrt(81 * z * z + 12)))


def pearcey_sprime_mp(z, branch: int):
    """Closed-form ``S'_m(z)`` (principal branches) in mpmath precision."""
    z = mpmath.mpc(z)
    p = _pearcey_p(z)
    if branch == 1:
        return (12 + p * p) / (6 * p)
    s = 1 if branch == 2 else -1
    r3 = mpmath.sqrt(3)
    return -((1 + s * 1j * r3) * p * p + 12 * (1 - s * 1j * r3)) / (12 * p)


def pearcey_S_mp(z, branch: int):
    sp = pearcey_sprime_mp(z, branch)
    return mpmath.mpf(3) / 4 * 1j * (sp * sp - mpmath.mpf(1) / 3) ** 2


# partner branch j with S'_m + chi'_m = S'_j (m = 2 uses the chi_2a partner)
_PEARCEY_PARTNER = {1: 2, 2: 1, 3: 2}


@dataclass(frozen=True)
class PearceyLeading:
    Sprime: complex
    S: complex
    A0: complex
    B0: complex
    residuals: dict


def _central_diff(f: Callable, z, order: int, h):
    """Central differences at high precision (order 1 or 2)."""
    if order == 1:
        return (f(z + h) - f(z - h)) / (2 * h)
    return (f(z + h) - 2 * f(z) + f(z - h)) / (h * h)


def pearcey_leading_objects(z, branch_index: int, *, dps: int = 60) -> PearceyLeading:
    """Leading WKB objects of ``eps^3 I''' - eps I' - i z I = 0`` on one branch.

    Returns ``S'``, ``S = (3i/4)(S'^2 - 1/3)^2``, ``A0 = (3 S'^2 - 1)^(-1/2)``,
    ``B0 = (3 (S' + chi')^2 - 1)^(-1/2)`` with unit constants, and residuals of
    ``D[A0] = (3 S'^2 - 1) A0' + 3 S' S'' A0`` and
    ``L[B0] = (3 U'^2 - 1) B0' + 3 U' U'' B0`` (``U' = S' + chi'``), plus the cubic
    and the singulant ODE ``12 S S'' - 3 S'^2 + 1``.  Derivatives come from
    central differences with step 1e-20 at ``dps`` digits.
    """
    if branch_index not in (1, 2, 3):
        raise ValueError("branch_index must be 1, 2 or 3")
    zc = complex(z)
    if min(abs(zc - PEARCEY_ZPLUS), abs(zc + PEARCEY_ZPLUS)) < 1e-8:
        raise ValueError("z is at a singular point z+- of the amplitude")
    with mpmath.workdps(dps):
        zm = mpmath.mpc(zc)
        h = mpmath.mpf("1e-20")
        m, j = branch_index, _PEARCEY_PARTNER[branch_index]

        def spm(x):
            return pearcey_sprime_mp(x, m)

        def spj(x):
            return pearcey_sprime_mp(x, j)

        def A0f(x):
            s = spm(x)
            return 1 / mpmath.sqrt(3 * s * s - 1)

        def B0f(x):
            u = spj(x)
            return 1 / mpmath.sqrt(3 * u * u - 1)

        sp = spm(zm)
        S = pearcey_S_mp(zm, m)
        spp = _central_diff(spm, zm, 1, h)
        up, upp = spj(zm), _central_diff(spj, zm, 1, h)
        A0, B0 = A0f(zm), B0f(zm)
        dA = (3 * sp * sp - 1) * _central_diff(A0f, zm, 1, h) + 3 * sp * spp * A0
        dB = (3 * up * up - 1) * _central_diff(B0f, zm, 1, h) + 3 * up * upp * B0
        dS = _central_diff(lambda x: pearcey_S_mp(x, m), zm, 1, h)
        res = {
            "cubic": complex(sp ** 3 - sp + 1j * zm),
            "D_A0": complex(dA),
            "L_B0": complex(dB),
            "singulant_ode": complex(12 * S * spp - 3 * sp * sp + 1),
            "dS_minus_Sprime": complex(dS - sp),
        }
        return PearceyLeading(complex(sp), complex(S), complex(A0), complex(B0), res)


def pearcey_sprime(z) -> np.ndarray:
    """Vectorized binary64 closed forms ``[S'_1, S'_2, S'_3]`` at ``z``."""
    z = np.asarray(z, dtype=complex)
    p = (12j * (-9 * z + np.sqrt(81 * z * z + 12))) ** (1 / 3)
    s1 = (12 + p * p) / (6 * p)
    s2 = -((1 + 1j * _SQ3) * p * p + 12 * (1 - 1j * _SQ3)) / (12 * p)
    s3 = -((1 - 1j * _SQ3) * p * p + 12 * (1 + 1j * _SQ3)) / (12 * p)
    return np.array([s1, s2, s3])
