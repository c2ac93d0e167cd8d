"""Closed-form case definitions for the four worked problems.

Each :class:`CaseDefinition` bundles singulants, late-late singulants, known
constants, singular points, Stokes-line specifications and higher-order
Stokes line (HOSL) pairs.  Fractional powers use principal branches.  The
Pearcey singulants are multivalued, so that case supplies a stateful
evaluator that continues root labels along a path.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .coeffkernel import GaussianRational
from .recurrences import PEARCEY_ZPLUS, pearcey_sprime

__all__ = [
    "CaseDefinition",
    "LineSpec",
    "HoslPair",
    "FlowState",
    "model_case",
    "trinh_case",
    "pearcey_case",
    "kelvin_case",
    "get_case",
    "hamiltonian_flow",
    "PearceyTracker",
    "pearcey_S",
    "pearcey_crossing_point",
]

TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class LineSpec:
    """An ordinary Stokes line ``source > target``.

    ``singulant`` names the entry of the case's singulant map whose
    imaginary part vanishes (real part nonnegative) on the line.
    ``hosl`` names the HOSL pair that controls the line's existence; lines
    without one are always active.
    """

    label: str
    source: str
    target: str
    singulant: str
    origins: tuple = ()
    hosl: str | None = None

    @property
    def kind(self) -> str:
        return "base_to_j" if self.source == "B" else "i_to_j"


@dataclass(frozen=True)
class HoslPair:
    """A (chi, chi-tilde) pair for a higher-order Stokes line.

    The HOSL is ``{z : chi_tilde/chi real and positive}``.  The higher-order
    multiplier is zero in the region containing ``inactive_anchor``;
    ``origin`` is a point on (or where) the HOSL starts and seeds tracing.
    """

    label: str
    chi: str
    chi_tilde: str
    inactive_anchor: complex
    origin: complex


@dataclass
class CaseDefinition:
    case_id: str
    singulants: dict
    derivatives: dict
    hosl_pairs: dict
    constants: dict
    singular_points: tuple
    lines: tuple
    components: tuple
    anchor_components: frozenset
    anchor_point: complex
    switching_rules: tuple = ()
    box: tuple = (-2.0, 2.0, -2.0, 2.0)
    tracker_factory: Callable | None = None

    def evaluator(self, z0: complex):
        """Return a singulant evaluator started at ``z0``.

        Closed-form cases are stateless; the Pearcey case continues its root
        labels from ``z0``.
        """
        if self.tracker_factory is not None:
            return self.tracker_factory(z0)
        return _StaticEvaluator(self)

    def line(self, label: str) -> LineSpec:
        for ln in self.lines:
            if ln.label == label:
                return ln
        raise KeyError(label)


class _StaticEvaluator:
    def __init__(self, case: CaseDefinition):
        self.case = case

    def values(self, z: complex) -> dict:
        return {k: complex(f(z)) for k, f in self.case.singulants.items()}

    def derivs(self, z: complex) -> dict:
        return {k: complex(f(z)) for k, f in self.case.derivatives.items()}

    def advance(self, z: complex) -> None:
        pass


# ---------------------------------------------------------------------------
# model problem
# ---------------------------------------------------------------------------


def model_case() -> CaseDefinition:
    """``eps^2 y'' + eps (1 + z) y' + z y = 1`` with ``y ~ 1/z`` in the lower half-plane."""
    sing = {
        "chi1": lambda z: z * z / 2,
        "chi2": lambda z: z - 0.5,
        "chi_tilde": lambda z: -(z - 1) ** 2 / 2,
    }
    der = {
        "chi1": lambda z: z,
        "chi2": lambda z: 1.0 + 0 * z,
        "chi_tilde": lambda z: -(z - 1),
    }
    hosl = {
        # chi_tilde/chi1 = -((z - 1)/z)^2 is real and >= 0 iff Re[(z - 1)/z] = 0
        "HOSL": HoslPair("HOSL", "chi1", "chi_tilde", inactive_anchor=0.5, origin=1.0),
    }
    lines = (
        LineSpec("B>1", "B", "1", "chi1", origins=(0.0,)),
        LineSpec("B>2", "B", "2", "chi2", origins=(0.5,), hosl="HOSL"),
        LineSpec("1>2", "1", "2", "chi_tilde", origins=(1.0,)),
    )
    consts = {
        "alpha1": Fraction(1, 2),
        "beta": Fraction(1, 2),
        "alpha2": Fraction(1),
        "Lambda0": 1 / math.sqrt(2 * math.pi),
        "Lambda0_symbolic": "1/sqrt(2*pi)",
        "Lambda_tilde": 1j / (2 * math.pi),
        "Lambda_tilde_symbolic": "i/(2*pi)",
        "z_star": 1.0,
        "chi1_origin": 0.0,
        "chi2_origin": 0.5,
    }
    return CaseDefinition(
        "model", sing, der, hosl, consts, (0.0, 1.0), lines, ("B", "1", "2"),
        frozenset({"B"}), anchor_point=-1.0 - 1.0j,
        switching_rules=(("B>1", "1"), ("B>2", "2"), ("1>2", "2")),
        box=(-2.5, 2.5, -2.5, 2.5),
    )


# ---------------------------------------------------------------------------
# forced second-order problem
# ---------------------------------------------------------------------------


def _pow32(z):
    return z * cmath.sqrt(z)


def trinh_case(a) -> CaseDefinition:
    """``eps^2 A'' + 2 eps A' + (1 - z) A = 1/(z - a)``.

    Singulants born at ``z = a``:
    ``chi1 = z + (2/3) z^(3/2) - a - (2/3) a^(3/2)``,
    ``chi2 = z - (2/3) z^(3/2) - a + (2/3) a^(3/2)``; the HOSP adds
    ``chi3 = chi1 - (4/3) z^(3/2)`` and ``chi4 = chi2 + (4/3) z^(3/2)``.
    Late-late singulants ``chi_tilde_pm = -+(4/3) z^(3/2)`` vanish at 0.
    """
    ga = GaussianRational.coerce(a) if not isinstance(a, complex) else GaussianRational(a)
    if ga == 0 or ga == 1:
        raise ValueError("a must not be 0 or 1 (degenerate coalescence)")
    a = complex(ga)
    a32 = _pow32(a)
    sing = {
        "chi1": lambda z: z + 2 / 3 * _pow32(z) - a - 2 / 3 * a32,
        "chi2": lambda z: z - 2 / 3 * _pow32(z) - a + 2 / 3 * a32,
        "chi3": lambda z: z - 2 / 3 * _pow32(z) - a - 2 / 3 * a32,
        "chi4": lambda z: z + 2 / 3 * _pow32(z) - a + 2 / 3 * a32,
        "chi_tilde_plus": lambda z: -4 / 3 * _pow32(z),
        "chi_tilde_minus": lambda z: 4 / 3 * _pow32(z),
    }
    der = {
        "chi1": lambda z: 1 + cmath.sqrt(z),
        "chi2": lambda z: 1 - cmath.sqrt(z),
        "chi3": lambda z: 1 - cmath.sqrt(z),
        "chi4": lambda z: 1 + cmath.sqrt(z),
        "chi_tilde_plus": lambda z: -2 * cmath.sqrt(z),
        "chi_tilde_minus": lambda z: 2 * cmath.sqrt(z),
    }
    zero3 = _principal_zero(-1, a + 2 / 3 * a32)
    birth = _trinh_birth_point(sing["chi1"])
    if birth is not None:
        # B>3 is born where B>1 meets 1>3; only one half of it can be active
        # if small loops around the birth point are to be consistent
        t = _consistent_half(der["chi1"](birth), der["chi_tilde_plus"](birth))
        anchor3 = birth - 0.05 * t
    else:
        anchor3 = zero3
    hosl = {
        "HOSL+": HoslPair("HOSL+", "chi1", "chi_tilde_plus", inactive_anchor=anchor3, origin=0.0),
    }
    lines = (
        LineSpec("B>1", "B", "1", "chi1", origins=(a,)),
        LineSpec("B>2", "B", "2", "chi2", origins=(a,)),
        LineSpec("1>3", "1", "3", "chi_tilde_plus", origins=(0.0,)),
        LineSpec("B>3", "B", "3", "chi3", origins=(birth,) if birth is not None else (zero3,),
                 hosl="HOSL+"),
    )
    consts = {
        "a": ga,
        "alpha_tilde_observed": Fraction(0),
        "chi3_zero": zero3,
        "inactive_anchor": anchor3,
        "b3_birth_point": birth,
    }
    return CaseDefinition(
        "trinh", sing, der, hosl, consts, (a, 1.0, 0.0), lines, ("B", "1", "2", "3", "4"),
        frozenset({"B"}), anchor_point=complex(a.real, a.imag - 1.0),
        switching_rules=(("B>1", "1"), ("B>2", "2"), ("1>3", "3"), ("B>3", "3")),
        box=(-3.0, 3.0, -3.0, 3.0),
    )


def _trinh_birth_point(chi1, radius: float = 6.0):
    """Nearest crossing of the B>1 line with the 1>3 Airy line from 0.

    The Airy line is ``arg z = +-2 pi/3``, where ``-(4/3) z^(3/2)`` is real and
    positive.  Returns None when neither ray meets B>1 within ``radius``.
    """
    from scipy.optimize import brentq

    best = None
    for th in (2 * math.pi / 3, -2 * math.pi / 3):
        u = cmath.exp(1j * th)
        ts = np.linspace(1e-3, radius, 2000)
        im = np.array([chi1(t * u).imag for t in ts])
        for k in np.nonzero(np.sign(im[1:]) != np.sign(im[:-1]))[0]:
            t = brentq(lambda t: chi1(t * u).imag, ts[k], ts[k + 1], xtol=1e-15)
            if chi1(t * u).real > 0 and (best is None or t < abs(best)):
                best = t * u
            break
    return best


def _consistent_half(d1: complex, dg: complex) -> complex:
    """Unit direction of the active half of a new line ``B>3``.

    Near the junction of ``B>1`` (gradient ``d1``), ``1>3`` (gradient ``dg``)
    and ``B>3`` (gradient ``d1 + dg``) the three lines are straight.  A loop
    around the junction crosses each full line twice and the new line once;
    the Stokes coefficient of component 3 returns to its start for exactly
    one choice of active half.  Crossing ``i>j`` with ``Im f`` going from +
    to - adds the coefficient of ``i`` to ``j``.
    """
    d3 = d1 + dg
    t = np.conj(d3) / abs(d3)
    th = np.linspace(0.0, 2 * np.pi, 4001) + 0.0123
    u = np.exp(1j * th)
    ims = [np.imag(d * u) for d in (d1, dg, d3)]
    for half in (t, -t):
        c1 = c3 = 0
        for k in range(len(th) - 1):
            down = [1 if (m[k] > 0 >= m[k + 1]) else -1 if (m[k] <= 0 < m[k + 1]) else 0
                    for m in ims]
            c3 += down[1] * c1  # 1>3 uses the coefficient before B>1 at this step
            c1 += down[0]
            if down[2] and (u[k] * np.conj(half)).real > 0:
                c3 += down[2]
        if c1 == 0 and c3 == 0:
            return complex(half)
    raise RuntimeError("no consistent active half")


def _principal_zero(sign: int, c: complex) -> complex:
    """Zero of ``z + sign*(2/3) z^(3/2) - c`` on the principal branch.

    With ``u = sqrt(z)`` this is a cubic; admissible roots have ``Re u > 0``.
    The one nearest the origin is returned.
    """
    roots = np.roots([sign * 2 / 3, 1.0, 0.0, -c])
    ok = [u for u in roots if u.real > 0]
    if not ok:
        raise ValueError("no principal-branch zero")
    u = min(ok, key=abs)
    for _ in range(3):  # polish
        u -= (sign * 2 / 3 * u ** 3 + u * u - c) / (2 * sign * u * u + 2 * u)
    return complex(u * u)


# ---------------------------------------------------------------------------
# Pearcey
# ---------------------------------------------------------------------------


def pearcey_S(sprime):
    """``S = (3i/4)(S'^2 - 1/3)^2`` for given ``S'`` values."""
    sp = np.asarray(sprime)
    return 0.75j * (sp * sp - 1 / 3) ** 2


class PearceyTracker:
    """Continue the three cubic roots ``S'_1, S'_2, S'_3`` along a path.

    Labels are fixed by the closed forms at the start point and then carried
    by nearest-root matching.  Steps must be small compared with the root
    separation; an ambiguous match raises RuntimeError.
    """

    def __init__(self, z0: complex):
        self.z = complex(z0)
        self.roots = pearcey_sprime(self.z).astype(complex)

    def _match(self, z: complex) -> np.ndarray:
        r = np.roots([1.0, 0.0, -1.0, 1j * z])
        best, second = None, None
        for perm in itertools.permutations(range(3)):
            cost = float(np.sum(np.abs(r[list(perm)] - self.roots)))
            if best is None or cost < best[0]:
                second = best
                best = (cost, perm)
            elif second is None or cost < second[0]:
                second = (cost, perm)
        sep = min(abs(self.roots[i] - self.roots[j]) for i in range(3) for j in range(i))
        if best[0] > 0.5 * sep:
            raise RuntimeError("root tracking lost continuity (step too large near z+-)")
        return r[list(best[1])]

    def sprime(self, z: complex) -> np.ndarray:
        return self._match(complex(z))

    def values(self, z: complex) -> dict:
        sp = self._match(complex(z))
        return _pearcey_dict(sp)

    def derivs(self, z: complex) -> dict:
        sp = self._match(complex(z))
        return _pearcey_dict(sp, derivative=True)

    def advance(self, z: complex) -> None:
        self.roots = self._match(complex(z))
        self.z = complex(z)


# label -> (j, i) meaning S_j - S_i
_PEARCEY_DIFFS = {
    "chi1": (2, 1),
    "chi2a": (1, 2),
    "chi2b": (3, 2),
    "chi3": (2, 3),
    "chi_tilde1": (3, 2),
    "chi_tilde3": (1, 2),
    "S1-S3": (1, 3),
    "S3-S1": (3, 1),
}


def _pearcey_dict(sp, derivative=False):
    vals = sp if derivative else pearcey_S(sp)
    return {k: complex(vals[j - 1] - vals[i - 1]) for k, (j, i) in _PEARCEY_DIFFS.items()}


def pearcey_crossing_point() -> float:
    """Real-axis point ``x_c > 0`` where the 2>1 and 3>2 Stokes lines cross."""
    from scipy.optimize import brentq

    def f(x):
        s = pearcey_S(pearcey_sprime(x))
        return float((s[0] - s[1]).imag)

    return brentq(f, 0.3, 1.0, xtol=1e-15)


def pearcey_case() -> CaseDefinition:
    """``eps^3 I''' - eps I' - i z I = 0``, only component 3 in the top-right sector."""
    xc = pearcey_crossing_point()
    def _mk(label, deriv=False):
        def f(z):
            t = PearceyTracker(z)
            d = _pearcey_dict(t.roots, derivative=deriv)
            return d[label]
        return f

    sing = {k: _mk(k) for k in _PEARCEY_DIFFS}
    der = {k: _mk(k, True) for k in _PEARCEY_DIFFS}
    hosl = {
        # new singulant chi3 + chi_tilde3 = S1 - S3; the multiplier is zero on
        # the side of x_c facing the origin
        "HOSL3": HoslPair("HOSL3", "chi3", "chi_tilde3", inactive_anchor=0.3, origin=xc),
        "HOSL1": HoslPair("HOSL1", "chi1", "chi_tilde1", inactive_anchor=-0.3, origin=-xc),
    }
    zp = PEARCEY_ZPLUS
    lines = (
        LineSpec("1>2", "1", "2", "chi1", origins=(-zp,)),
        LineSpec("2>1", "2", "1", "chi2a", origins=(-zp,)),
        LineSpec("2>3", "2", "3", "chi2b", origins=(zp,)),
        LineSpec("3>2", "3", "2", "chi3", origins=(zp,)),
        LineSpec("3>1", "3", "1", "S1-S3", origins=(xc,), hosl="HOSL3"),
        LineSpec("1>3", "1", "3", "S3-S1", origins=(-xc,), hosl="HOSL1"),
    )
    consts = {
        "z_plus": zp,
        "z_minus": -zp,
        "z_plus_symbolic": "2*sqrt(3)*i/9",
        "singularity_exponent": Fraction(1, 4),
        "C0": 1.0,
        "Lambda0": 1.0,
        "crossing_point": xc,
    }
    return CaseDefinition(
        "pearcey", sing, der, hosl, consts, (zp, -zp), lines, ("1", "2", "3"),
        frozenset({"3"}), anchor_point=complex(xc, 0.3),
        switching_rules=tuple((ln.label, ln.target) for ln in lines),
        box=(-2.0, 2.0, -2.0, 2.0), tracker_factory=PearceyTracker,
    )


# ---------------------------------------------------------------------------
# Kelvin waves (geometry only)
# ---------------------------------------------------------------------------


def kelvin_case() -> CaseDefinition:
    """Singulant ``chi = 1 - Y^2`` and late-late singulant ``chi_tilde = -Y^2``.

    The HOSL is the imaginary axis; the Stokes line on the negative real axis
    is switched off.
    """
    sing = {"chi": lambda y: 1 - y * y, "chi_tilde": lambda y: -y * y}
    der = {"chi": lambda y: -2 * y, "chi_tilde": lambda y: -2 * y}
    hosl = {"HOSL": HoslPair("HOSL", "chi", "chi_tilde", inactive_anchor=-0.5, origin=0.0)}
    # traced from the turning point 0: the four arms cover [-1, 1] and the imaginary axis
    lines = (LineSpec("B>1", "B", "1", "chi", origins=(0.0,), hosl="HOSL"),)
    return CaseDefinition(
        "kelvin", sing, der, hosl, {"chi_origin": 1.0}, (1.0,), lines, ("B", "1"),
        frozenset({"B"}), anchor_point=1.5 + 0.5j, switching_rules=(("B>1", "1"),),
    )


def get_case(case_id: str, **params) -> CaseDefinition:
    if case_id == "model":
        return model_case()
    if case_id == "trinh":
        if "a" not in params or params["a"] is None:
            raise KeyError("a")
        return trinh_case(params["a"])
    if case_id == "pearcey":
        return pearcey_case()
    if case_id == "kelvin":
        return kelvin_case()
    raise ValueError(f"unknown case {case_id!r}")


# ---------------------------------------------------------------------------
# Hamiltonian flow for the Pearcey Borel operator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlowState:
    tau: complex
    z: complex
    w: complex
    xi: complex
    eta: complex
    constants: dict = field(default_factory=dict)

    @property
    def sigma(self) -> complex:
        """Symbol ``xi^3 - eta^2 xi - i z eta^3``."""
        return self.xi ** 3 - self.eta ** 2 * self.xi - 1j * self.z * self.eta ** 3


def hamiltonian_flow(tau_hat: complex, z0: complex | None = None) -> FlowState:
    """Flow of the Borel-operator symbol with ``eta0 = 1``, ``w0 = 0``, ``xi0 = sqrt(3)/3``.

    In the shifted parameter ``tau_hat = -i (tau - i xi0)`` the flow reads
    ``z = i tau_hat (tau_hat^2 - 1)``, ``w = (3i/4)(tau_hat^2 - 1/3)^2`` and
    ``xi = -tau_hat`` (``eta = 1``), so ``xi^3 - xi - i z = 0`` throughout.
    """
    th = complex(tau_hat)
    xi0 = math.sqrt(3) / 3
    if z0 is None:
        z0 = PEARCEY_ZPLUS
    tau = 1j * th + 1j * xi0
    z = 1j * th * (th * th - 1)
    w = 0.75j * (th * th - 1 / 3) ** 2
    xi = 1j * tau + xi0  # equals -tau_hat
    consts = {"eta0": 1.0, "xi0": xi0, "z0": z0, "w0": 0.0}
    return FlowState(tau, z, w, xi, 1.0 + 0j, consts)
