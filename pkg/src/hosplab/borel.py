"""Borel-plane tools for the model problem.

The model's Borel transform is known in closed form.  With ``chi1 = z^2/2``,
``chi2 = z - 1/2`` and the square root ``s(w) = z * sqrt(1 - w/chi1)``
(principal branch, so ``s(0) = z``), the exact solution is

    y_B(w, z) = [1 + (z - 1)/s] / (2 (chi2 - w)) = 1 / (s (s - (z - 1))).

The second form follows from ``(s + z - 1)(s - z + 1) = 2 (chi2 - w)`` and has
no cancellation on either sheet.  The cut of ``s`` is the ray from ``chi1``
radially away from the origin; the second sheet flips the sign of ``s``.  The
pole at ``chi2`` sits on the principal sheet exactly when
``Re[(z - 1)/z] > 0``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import integrate

from .coeffkernel import LogComplex
from .recurrences import CoeffTable, model_base_coefficients

__all__ = [
    "SheetPoint",
    "PadeApproximant",
    "BorelSingularityError",
    "PadeError",
    "exact_borel_eval",
    "exact_borel_eval_mp",
    "pole_visible",
    "model_borel_series",
    "pade_build",
    "pade_poles",
    "classify_poles",
    "inverse_borel_quadrature",
    "model_inverse_borel",
    "hankel_contribution",
    "stokes_multiplier",
    "borel_taylor_coefficients",
    "borel_residual_checks",
]

PRINCIPAL = "principal"
SECOND = "second"


class BorelSingularityError(ValueError):
    """Evaluation at, or a contour through, a Borel-plane singularity."""


class PadeError(np.linalg.LinAlgError):
    """The Padé linear system could not be solved to the quality gate."""


@dataclass(frozen=True)
class SheetPoint:
    w: complex
    sheet: str = PRINCIPAL

    def __post_init__(self):
        if self.sheet not in (PRINCIPAL, SECOND):
            raise ValueError(f"sheet must be 'principal' or 'second', got {self.sheet!r}")
        object.__setattr__(self, "w", complex(self.w))


def _chis(z):
    return z * z / 2, z - 0.5


def pole_visible(z: complex) -> bool:
    """True when the ``chi2`` pole lies on the principal sheet."""
    z = complex(z)
    return ((z - 1) / z).real > 0


def exact_borel_eval(p: SheetPoint, z: complex, *, tol: float = 1e-13) -> complex:
    """Closed-form Borel transform ``y_B(w, z)`` on the requested sheet."""
    z = complex(z)
    if z == 0:
        raise BorelSingularityError("z = 0 is a singular point")
    chi1, _ = _chis(z)
    s = z * cmath.sqrt(1 - p.w / chi1)
    if p.sheet == SECOND:
        s = -s
    scale = max(1.0, abs(z))
    if abs(s) <= tol * scale:
        raise BorelSingularityError(f"w = {p.w} is the branch point chi1(z)")
    d = s - (z - 1)
    if abs(d) <= tol * scale:
        raise BorelSingularityError(f"w = {p.w} is the pole chi2(z) on this sheet")
    return 1 / (s * d)


def exact_borel_eval_mp(w, z, sheet: str = PRINCIPAL):
    """mpmath version of :func:`exact_borel_eval` (no singularity checks)."""
    w, z = mpmath.mpc(w), mpmath.mpc(z)
    s = z * mpmath.sqrt(1 - 2 * w / (z * z))
    if sheet == SECOND:
        s = -s
    return 1 / (s * (s - (z - 1)))


def stokes_multiplier(eps: float, alpha: float = 0.5) -> complex:
    """``sigma = -2 pi i / (Gamma(alpha) eps^alpha)``."""
    return -2j * math.pi / (math.gamma(alpha) * eps ** alpha)


def hankel_contribution(z: complex, eps: float) -> LogComplex:
    """Switched-on exponential ``sigma_1 y0^(1)(z) exp(-chi1/eps)`` as a LogComplex.

    ``alpha_1 = 1/2`` and ``y0^(1)(z) = -1/(sqrt(2)(z - 1))``.
    """
    z = complex(z)
    if z == 1:
        raise ValueError("the prefactor is singular at z = 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    sigma = stokes_multiplier(eps)
    pref = -1 / (math.sqrt(2) * (z - 1))
    return LogComplex.from_complex(sigma * pref) * LogComplex.from_log(-(z * z / 2) / eps)


# ---------------------------------------------------------------------------
# Padé
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PadeApproximant:
    """[N-1 : N] rational approximant ``num(u) / den(u)`` with ``u = w / scale``.

    ``den_coeffs[0] == 1``.  ``residual`` is the relative re-expansion residual
    of the defining equations and ``condition`` the condition number of the
    column-scaled denominator system.
    """

    N: int
    num_coeffs: np.ndarray
    den_coeffs: np.ndarray
    scale: float = 1.0
    residual: float = 0.0
    condition: float = 1.0

    def __call__(self, w):
        u = np.asarray(w, dtype=complex) / self.scale
        return (np.polynomial.polynomial.polyval(u, self.num_coeffs)
                / np.polynomial.polynomial.polyval(u, self.den_coeffs))


def model_borel_series(z: complex, K: int, scale: float | None = None,
                       table: CoeffTable | None = None) -> tuple[np.ndarray, float]:
    """Scaled Borel coefficients ``y_n(z) scale^n / n!`` for ``n < K``.

    The scaling is applied in extended precision before the conversion to
    binary64, so coefficients that would overflow (z near 1/2) stay finite.
    The default scale is ``|chi1(z)|``, the radius of convergence.
    """
    z = complex(z)
    if scale is None:
        scale = abs(z * z / 2)
    if table is None or len(table) < K:
        table = model_base_coefficients(K - 1)
    out = np.empty(K, dtype=complex)
    with mpmath.workprec(80):
        sc = mpmath.mpf(scale)
        for n in range(K):
            v = table[n].evaluate_mp(z) * sc ** n / mpmath.factorial(n)
            out[n] = complex(v)
    return out, float(scale)


def pade_build(series: Sequence[complex], N: int, *, scale: float = 1.0,
               gate: float = 1e-6) -> PadeApproximant:
    """Off-diagonal [N-1 : N] Padé approximant of a power series.

    ``series[k]`` is the coefficient of ``u^k`` with ``u = w / scale`` (pass
    ``scale = 1`` for an unscaled series); at least ``2N`` coefficients are
    needed.  The denominator solves the Toeplitz system
    ``sum_j q_j c_{k-j} = 0`` for ``k = N .. 2N-1`` (``q_0 = 1``) by column-scaled
    least squares.  Raises :class:`PadeError` when the relative residual
    exceeds ``gate``.
    """
    c = np.asarray(series, dtype=complex)
    if N < 1:
        raise ValueError("N must be >= 1")
    if len(c) < 2 * N:
        raise ValueError(f"need at least {2 * N} coefficients, got {len(c)}")
    if not np.all(np.isfinite(c)):
        raise PadeError("series contains non-finite entries; rescale it first")
    idx = np.arange(N, 2 * N)[:, None] - np.arange(1, N + 1)[None, :]
    A = c[idx]
    b = -c[N:2 * N]
    col = np.linalg.norm(A, axis=0)
    col[col == 0] = 1.0
    sol, _, _, sv = np.linalg.lstsq(A / col, b, rcond=None)
    q = np.concatenate([[1.0 + 0j], sol / col])
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    # re-expansion residual of rows N..2N-1 relative to the row magnitudes
    full = np.concatenate([b[:, None] * -1, A], axis=1)
    resid_rows = np.abs(full @ q)
    scale_rows = np.abs(full) @ np.abs(q)
    scale_rows[scale_rows == 0] = 1.0
    residual = float(np.max(resid_rows / scale_rows))
    if not np.isfinite(residual) or residual > gate:
        raise PadeError(f"Padé residual {residual:.3e} above gate {gate:g} (condition ~ {cond:.2e})")
    num = np.array([np.dot(q[: k + 1], c[k::-1][: k + 1]) for k in range(N)])
    return PadeApproximant(N, num, q, float(scale), residual, cond)


def pade_poles(approx: PadeApproximant) -> list[tuple[complex, float]]:
    """Denominator roots in the original ``w`` variable with a backward error.

    The residual is ``|Q(r)| / sum_j |q_j| |r|^j`` (relative backward error of
    the root); non-finite roots are reported with residual ``inf``.
    """
    q = approx.den_coeffs
    nz = np.nonzero(q)[0]
    q = q[: nz[-1] + 1]
    roots = np.roots(q[::-1])
    out = []
    for r in roots:
        if not np.isfinite(r):
            out.append((complex(r), math.inf))
            continue
        if abs(r) <= 1:
            powers = np.abs(r) ** np.arange(len(q))
            res = abs(np.polynomial.polynomial.polyval(r, q)) / float(np.abs(q) @ powers)
        else:
            # evaluate the reversed polynomial at 1/r to stay in range
            rev = q[::-1]
            powers = np.abs(1 / r) ** np.arange(len(q))
            res = abs(np.polynomial.polynomial.polyval(1 / r, rev)) / float(np.abs(rev) @ powers)
        out.append((complex(r) * approx.scale, float(res)))
    out.sort(key=lambda t: (abs(t[0]), cmath.phase(t[0])))
    return out


def classify_poles(locations: Sequence[complex], factor: float = 5.0,
                   neighbours: int = 4) -> list[str]:
    """Label each pole 'isolated' or 'cluster'.

    A pole is isolated when its nearest neighbour is more than ``factor``
    times the typical spacing of the poles around it (median nearest-neighbour
    distance of its ``neighbours`` closest poles).  A heuristic.
    """
    z = np.asarray(locations, dtype=complex)
    n = len(z)
    if n < 3:
        return ["isolated"] * n
    D = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(D, np.inf)
    nn = D.min(axis=1)
    labels = []
    k = min(neighbours, n - 1)
    for i in range(n):
        near = np.argsort(D[i])[:k]
        spacing = float(np.median(nn[near]))
        labels.append("isolated" if nn[i] > factor * spacing else "cluster")
    return labels


# ---------------------------------------------------------------------------
# Laplace transform
# ---------------------------------------------------------------------------


def inverse_borel_quadrature(z: complex, eps: float, borel_fn: Callable[[SheetPoint], complex],
                             tol: float = 1e-12, *,
                             singularities: Sequence[complex] = ()) -> complex:
    """``(1/eps) int_0^inf borel_fn(w) exp(-w/eps) dw`` along the positive real axis.

    The integral is taken in ``t = w/eps`` up to ``t_max = ln(1/tol) + 10`` by
    adaptive Gauss-Kronrod quadrature.  ``singularities`` lists Borel-plane
    singularities on the principal sheet; any within ``tol * eps`` of the
    contour raises :class:`BorelSingularityError`.  ``z`` is passed through for
    the caller's bookkeeping and singularity lookup.
    """
    if isinstance(eps, complex) or eps <= 0:
        raise ValueError("eps must be positive (complex eps would need a deformed contour)")
    for s in singularities:
        s = complex(s)
        dist = abs(s.imag) if s.real >= 0 else abs(s)
        if dist <= tol * eps:
            raise BorelSingularityError(f"singularity {s} lies on the integration contour")
    t_max = math.log(1 / tol) + 10.0

    def f(t):
        return complex(borel_fn(SheetPoint(eps * t))) * math.exp(-t)

    val, err = integrate.quad(f, 0.0, t_max, complex_func=True, epsabs=tol / 4,
                              epsrel=min(1e-13, tol), limit=400)
    if not np.isfinite(val):
        raise BorelSingularityError("non-finite quadrature result")
    return complex(val)


def model_inverse_borel(z: complex, eps: float, tol: float = 1e-12) -> complex:
    """Laplace integral of the exact model Borel transform."""
    z = complex(z)
    chi1, chi2 = _chis(z)
    sing = [chi1] + ([chi2] if pole_visible(z) else [])
    return inverse_borel_quadrature(z, eps, lambda p: exact_borel_eval(p, z), tol,
                                    singularities=sing)


# ---------------------------------------------------------------------------
# consistency checks
# ---------------------------------------------------------------------------


def _nearest_singularity(z: complex) -> float:
    chi1, chi2 = _chis(z)
    d = abs(chi1)
    if pole_visible(z):
        d = min(d, abs(chi2))
    return d


def borel_taylor_coefficients(z: complex, K: int, *, dps: int = 30) -> list:
    """Taylor coefficients of ``y_B(w, z)`` at ``w = 0`` by Cauchy-circle quadrature.

    Radius is half the distance to the nearest singularity; ``4K`` nodes.
    """
    z = complex(z)
    rho = 0.5 * _nearest_singularity(z)
    M = 4 * K
    with mpmath.workdps(dps):
        vals = [exact_borel_eval_mp(rho * mpmath.expj(2 * mpmath.pi * j / M), z) for j in range(M)]
        out = []
        for k in range(K):
            acc = mpmath.fsum(v * mpmath.expj(-2 * mpmath.pi * j * k / M) for j, v in enumerate(vals))
            out.append(acc / M / mpmath.mpf(rho) ** k)
        return out


def _pde_residual(w, z, h):
    f = exact_borel_eval_mp
    fzz = (f(w, z + h) - 2 * f(w, z) + f(w, z - h)) / h ** 2
    fww = (f(w + h, z) - 2 * f(w, z) + f(w - h, z)) / h ** 2
    fzw = (f(w + h, z + h) - f(w + h, z - h) - f(w - h, z + h) + f(w - h, z - h)) / (4 * h * h)
    return fzz + (1 + z) * fzw + z * fww


def borel_residual_checks(z: complex, grid: Sequence[SheetPoint], *, K: int = 25,
                          rel_tol: float = 1e-8, table: CoeffTable | None = None) -> dict:
    """PDE residual of the exact Borel solution and Taylor agreement with ``y_n/n!``.

    Returns ``pde_residual_max`` (max over the grid of
    ``|y_zz + (1 + z) y_zw + z y_ww|`` by high-precision central differences)
    and ``taylor_match_count`` (how many of the first ``K`` Cauchy-extracted
    coefficients match ``y_n(z)/n!`` to ``rel_tol``).
    """
    z = complex(z)
    chi1, chi2 = _chis(z)
    for p in grid:
        if p.sheet != PRINCIPAL:
            raise ValueError("the PDE check uses principal-sheet points")
        near = [abs(p.w - chi1)] + ([abs(p.w - chi2)] if pole_visible(z) else [])
        if min(near) < 1e-3:
            raise BorelSingularityError(f"grid point {p.w} too close to a singularity")
    with mpmath.workdps(40):
        h = mpmath.mpf("1e-12")
        zm = mpmath.mpc(z)
        pde = max(float(abs(_pde_residual(mpmath.mpc(p.w), zm, h))) for p in grid) if grid else 0.0
        coeffs = borel_taylor_coefficients(z, K, dps=40)
        if table is None or len(table) < K:
            table = model_base_coefficients(K - 1)
        count = 0
        for n in range(K):
            ref = table[n].evaluate_mp(z) / mpmath.factorial(n)
            if abs(coeffs[n] - ref) <= rel_tol * abs(ref):
                count += 1
    return {"pde_residual_max": pde, "taylor_match_count": count}
