"""High-precision Taylor integration of the model and Pearcey ODEs.

Both equations have polynomial coefficients, so the local Taylor series at any
point obeys a short linear recurrence.  Steps are sized from the last two
series coefficients and all arithmetic is done in mpmath at ``dps`` digits, well
below the size of the exponentially small terms being hunted.

Model:    eps^2 y'' + eps (1 + z) y' + z y = 1
Pearcey:  eps^3 I''' - eps I' - i z I = 0
"""
from __future__ import annotations

import cmath
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import mpmath
import numpy as np

from .coeffkernel import LogComplex, RationalFunction
from .recurrences import CoeffTable, pearcey_sprime_mp
from .singulants import CaseDefinition

__all__ = [
    "OdePath",
    "OracleRun",
    "SeedData",
    "ExponentialSample",
    "OracleError",
    "seed_from_base_series",
    "pearcey_integral",
    "integrate_path",
    "truncated_base_series",
    "extract_exponential",
    "oracle_to_csv",
    "MODEL_SEED_POINT",
]

DEFAULT_DPS = 40
MODEL_SEED_POINT = 5 * cmath.exp(-2j * math.pi / 3)
PEARCEY_ANCHOR_ARG = 3 * math.pi / 8


class OracleError(RuntimeError):
    """Integration or seeding could not meet its contract."""


@dataclass(frozen=True)
class SeedData:
    values: tuple          # (y, y') or (I, I', I'')
    error_estimate: float  # absolute error of values[0]
    terms: int             # truncation point (0 for WKB seeds)
    provenance: str = "asymptotic_seed"


@dataclass(frozen=True)
class OdePath:
    """Polyline in the complex plane with initial data at its first vertex."""

    waypoints: tuple
    eps: float
    initial_data: tuple
    provenance: str = "user"
    margin: float = 0.2
    singular_points: tuple = ()

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if len(self.waypoints) < 2:
            raise ValueError("a path needs at least two waypoints")
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            for s in self.singular_points:
                if _seg_dist(complex(s), complex(a), complex(b)) < self.margin:
                    raise ValueError(f"segment {a}->{b} passes within {self.margin} of {s}")

    def reversed(self, final_data) -> "OdePath":
        return OdePath(tuple(reversed(self.waypoints)), self.eps, tuple(final_data), "user",
                       self.margin, self.singular_points)


@dataclass
class OracleRun:
    case_id: str
    eps: float
    samples: list                       # (z, value) with mpmath values
    final_data: tuple
    step_stats: dict = field(default_factory=dict)
    residual_series: list | None = None

    @property
    def points(self) -> list:
        return [z for z, _ in self.samples]


def _seg_dist(p: complex, a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    t = min(1.0, max(0.0, ((p - a) * d.conjugate()).real / abs(d) ** 2))
    return abs(p - (a + t * d))


# ---------------------------------------------------------------------------
# fast table evaluation
# ---------------------------------------------------------------------------


def _eval_rf(f: RationalFunction, z, dps: int):
    """Value of ``f`` at ``z`` with guard digits for the numerator's size.

    Cheaper than exact rational evaluation for long tables; the guard covers
    the worst-case cancellation ``sum |c_k| |z|^k``.
    """
    num = f.numerator
    re, im, _ = num.gaussian_integer_parts()
    big = max((abs(a) + abs(b) for a, b in zip(re, im)), default=1) or 1
    az = abs(complex(z))
    guard = math.log10(big) + num.degree * math.log10(max(1.0, az)) + 10
    with mpmath.workdps(dps + int(guard)):
        zz = mpmath.mpc(z)
        val = num.evaluate_mp(zz)
        for r, k in f.factors.items():
            if k:
                val /= (zz - r.to_mpc()) ** k
        if f.extra.degree > 0:
            val /= f.extra.evaluate_mp(zz)
    return +val


@dataclass
class _TableCache:
    table: CoeffTable
    derivs: dict = field(default_factory=dict)

    def value(self, n, z, dps):
        return _eval_rf(self.table.entries[n], z, dps)

    def deriv(self, n, z, dps):
        if n not in self.derivs:
            self.derivs[n] = self.table.entries[n].derivative()
        return _eval_rf(self.derivs[n], z, dps)


_CACHES: dict = {}


def _cache(table: CoeffTable) -> _TableCache:
    key = id(table)
    c = _CACHES.get(key)
    if c is None or c.table is not table:
        c = _CACHES[key] = _TableCache(table)
    return c


def truncated_base_series(z, eps: float, table: CoeffTable, *, dps: int = DEFAULT_DPS,
                          derivative: bool = False):
    """Optimally truncated base series at ``z``.

    Terms ``eps^n y_n(z)`` are summed up to (not including) the smallest one.
    Returns ``(value, derivative or None, N, floor)`` where ``floor`` is the
    size of the first omitted term, or the arithmetic floor if larger.
    Raises :class:`OracleError` if the terms are still decreasing at the end of
    the table.
    """
    cache = _cache(table)
    with mpmath.workdps(dps):
        e = mpmath.mpf(eps)
        terms, dterms, mags = [], [], []
        for n in range(len(table)):
            t = e ** n * cache.value(n, z, dps)
            terms.append(t)
            mags.append(abs(t))
            if n >= 3 and mags[-1] > mags[-2] > mags[-3]:
                break
        else:
            raise OracleError(f"base series is not yet optimal with {len(table)} terms at z = {z}")
        N = min(range(1, len(mags)), key=lambda k: mags[k])
        val = mpmath.fsum(terms[:N])
        dval = None
        if derivative:
            dval = mpmath.fsum(e ** n * cache.deriv(n, z, dps) for n in range(N))
        floor = max(mags[N], mpmath.mpf(10) ** (-dps + 3) * max(mags))
        return val, dval, N, floor


# ---------------------------------------------------------------------------
# seeding
# ---------------------------------------------------------------------------


def _pearcey_branch(z) -> int:
    """Branch whose exponential matches the behavioural condition at ``z``."""
    target = cmath.exp(1j * math.pi / 6) * complex(z) ** (1 / 3)
    return min((1, 2, 3), key=lambda m: abs(-complex(pearcey_sprime_mp(z, m)) - target))


def pearcey_integral(z, eps: float, *, dps: int = DEFAULT_DPS):
    """``I, I', I''`` of ``I(z) = int exp((i t^4/4 - i t^2/2 + z t)/eps) dt``.

    The contour runs from the valley at ``arg t = pi/8`` to the one at
    ``5 pi/8`` through the saddle ``t = -S'`` of the behavioural branch, so
    ``I`` is the solution that behaves like ``exp(-S/eps)`` on that branch
    near ``arg z = 3 pi/8``.  Precision is raised by the number of digits lost
    to cancellation along the contour.  Returns ``(values, rel_error)``.
    """
    z = complex(z)
    ts = -complex(pearcey_sprime_mp(z, _pearcey_branch(z)))
    work = dps + 10
    for _ in range(3):
        with mpmath.workdps(work):
            e = mpmath.mpf(eps)
            zz = mpmath.mpc(z)
            # |exp| at the ends is below 10^-work relative to the saddle
            R = abs(ts) + (4 * eps * (work * math.log(10) + 10)) ** 0.25 + 1
            ends = [R * mpmath.expjpi(mpmath.mpf(k) / 8) for k in (1, 5)]
            nodes = [ends[0], mpmath.mpc(ts), ends[1]]

            def phi(t):
                return (1j * t ** 4 / 4 - 1j * t ** 2 / 2 + zz * t) / e

            vals, err = [], mpmath.mpf(0)
            for j in range(3):
                v, ev = mpmath.quad(lambda t: (t / e) ** j * mpmath.exp(phi(t)), nodes, error=True)
                vals.append(v)
                err = max(err, ev / abs(v))
            peak = max(mpmath.re(phi(nodes[0] + (nodes[1] - nodes[0]) * u)) for u in np.linspace(0.5, 1, 6))
            peak = max(peak, max(mpmath.re(phi(nodes[1] + (nodes[2] - nodes[1]) * u)) for u in np.linspace(0, 0.5, 6)))
            lost = float((peak - mpmath.log(abs(vals[0]))) / mpmath.log(10))
        if err > mpmath.mpf(10) ** (-(dps - 10)):
            raise OracleError(f"contour quadrature did not converge at z = {z} (rel. error {float(err):.1e})")
        if lost < work - dps - 5:
            return tuple(vals), float(err)
        work = dps + int(lost) + 15
    raise OracleError(f"contour integral loses {lost:.0f} digits at z = {z}")


def seed_from_base_series(z0, eps: float, case: CaseDefinition, table: CoeffTable | None = None,
                          *, dps: int = DEFAULT_DPS, method: str = "integral") -> SeedData:
    """Initial data deep inside the anchor region.

    Model: optimally truncated base series and its derivative at ``z0`` in the
    lower half-plane; the error estimate is the first omitted term.

    Pearcey: the solution singled out by the behavioural exponential near
    ``arg z = 3 pi/8``, normalized to ``I(z0) = A0(z0) ~ z0^(-1/3)/sqrt(3)``.
    ``method="integral"`` takes it from :func:`pearcey_integral` (quadrature
    error only).  ``method="wkb"`` uses the leading WKB form
    ``A0 exp(-(S - S(z0))/eps)``, whose relative error ``O(eps/|z0|^(4/3))``
    feeds the dominant solutions: that solution is recessive in the anchor
    sector, so a WKB seed only serves paths that stay near it.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    z0 = complex(z0)
    if case.case_id == "model":
        if table is None:
            raise ValueError("the model seed needs a base coefficient table")
        if not (z0.imag < 0 and abs(z0) >= 2):
            raise ValueError("model seed must lie deep in the lower half-plane (|z| >= 2)")
        y, dy, N, floor = truncated_base_series(z0, eps, table, dps=dps, derivative=True)
        return SeedData((y, dy), float(floor), N)
    if case.case_id == "pearcey":
        if abs(cmath.phase(z0) - PEARCEY_ANCHOR_ARG) > math.pi / 8 or abs(z0) < 2:
            raise ValueError("Pearcey seed must lie near arg z = 3 pi/8 with |z| >= 2")
        if method not in ("integral", "wkb"):
            raise ValueError(f"unknown seed method {method!r}")
        m = _pearcey_branch(z0)
        with mpmath.workdps(dps):
            e = mpmath.mpf(eps)
            zz = mpmath.mpc(z0)
            sp = pearcey_sprime_mp(zz, m)
            d = 3 * sp * sp - 1
            a0 = 1 / mpmath.sqrt(d)
            if method == "integral":
                vals, err = pearcey_integral(z0, eps, dps=dps)
                c = a0 / vals[0]
                return SeedData(tuple(c * v for v in vals), float(abs(a0)) * err, 0,
                                "integral_representation")
            spp = -1j / d                       # from differentiating the cubic
            g = -sp / e - 3 * sp * spp / d     # I'/I to relative O(eps)
            gp = -spp / e
            vals = (a0, g * a0, (g * g + gp) * a0)
        return SeedData(vals, float(abs(a0)) * eps / abs(z0) ** (4 / 3), 0)
    raise ValueError(f"no ODE oracle for case {case.case_id!r}")


# ---------------------------------------------------------------------------
# Taylor stepping
# ---------------------------------------------------------------------------


def _taylor_model(zc, data, eps, K):
    y, dy = data
    e2 = eps * eps
    a = [y, dy]
    for k in range(K - 1):
        rhs = (1 if k == 0 else 0) - eps * (1 + zc) * (k + 1) * a[k + 1] - (eps * k + zc) * a[k]
        if k >= 1:
            rhs -= a[k - 1]
        a.append(rhs / (e2 * (k + 2) * (k + 1)))
    return a


def _taylor_pearcey(zc, data, eps, K):
    y, dy, d2y = data
    e3 = eps ** 3
    a = [y, dy, d2y / 2]
    for k in range(K - 2):
        rhs = eps * (k + 1) * a[k + 1] + 1j * zc * a[k]
        if k >= 1:
            rhs += 1j * a[k - 1]
        a.append(rhs / (e3 * (k + 3) * (k + 2) * (k + 1)))
    return a


_STEPPERS = {"model": (_taylor_model, 2), "pearcey": (_taylor_pearcey, 3)}


def _eval_series(a, d, nder):
    """Value and first ``nder - 1`` derivatives of ``sum a_k d^k``."""
    out = []
    K = len(a) - 1
    for j in range(nder):
        s = mpmath.mpc(0)
        for k in range(K, j - 1, -1):
            s = s * d + a[k] * mpmath.ff(k, j)
        out.append(s)
    return tuple(out)


def _sample_points(waypoints, spacing):
    pts = [complex(waypoints[0])]
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        a, b = complex(a), complex(b)
        m = 1 if spacing is None else max(1, int(math.ceil(abs(b - a) / spacing - 1e-9)))
        for j in range(1, m + 1):
            pts.append(b if j == m else a + (b - a) * (j / m))
    return pts


def integrate_path(path: OdePath, case: CaseDefinition, tol: float = 1e-32, *, order: int = 30,
                   dps: int = DEFAULT_DPS, sample_spacing: float | None = None,
                   safety: float = 0.8) -> OracleRun:
    """Adaptive Taylor integration along ``path``.

    Each step uses ``order`` series terms; the step is ``safety`` times the
    radius at which the last two terms fall to ``tol`` relative to the local
    solution size ``max_j eps^j |y^(j)|``, so the relative local error
    estimate never exceeds ``tol``.  A
    sample is recorded at every waypoint and, if ``sample_spacing`` is given,
    at equally spaced points in between.
    """
    if case.case_id not in _STEPPERS:
        raise ValueError(f"no ODE oracle for case {case.case_id!r}")
    stepper, nder = _STEPPERS[case.case_id]
    if len(path.initial_data) != nder:
        raise ValueError(f"{case.case_id} needs {nder} initial values")
    if tol < 10.0 ** (-(dps - 5)):
        raise OracleError(f"tolerance {tol:g} is unattainable at {dps} digits")
    K = order
    pts = _sample_points(path.waypoints, sample_spacing)
    nsteps, max_err, min_h = 0, 0.0, math.inf
    with mpmath.workdps(dps):
        eps = mpmath.mpf(path.eps)
        t = mpmath.mpf(tol)
        data = tuple(mpmath.mpc(v) for v in path.initial_data)
        z = mpmath.mpc(pts[0])
        samples = [(pts[0], data[0])]
        for target in pts[1:]:
            B = mpmath.mpc(target)
            while z != B:
                a = stepper(z, data, eps, K)
                # local size of the solution; eps^j y^(j) are all comparable to y
                scale = max(abs(v) * eps ** j for j, v in enumerate(data)) or mpmath.mpf(1)
                radii = [(t * scale / abs(a[k])) ** (mpmath.mpf(1) / k) for k in (K - 1, K) if a[k] != 0]
                h = safety * min(radii) if radii else abs(B - z)
                last = h >= abs(B - z)
                if last:
                    h = abs(B - z)
                elif h < 1e-12 * max(1, abs(z)):
                    raise OracleError(f"step size underflow near z = {complex(z)}")
                d = (B - z) / abs(B - z) * h
                err = (abs(a[K - 1]) * h ** (K - 1) + abs(a[K]) * h ** K) / scale
                max_err = max(max_err, float(err))
                min_h = min(min_h, float(h))
                data = _eval_series(a, d, nder)
                z = B if last else z + d
                nsteps += 1
            samples.append((target, data[0]))
        stats = {"steps": nsteps, "max_local_error": max_err, "min_step": min_h,
                 "order": K, "dps": dps, "tol": tol}
    return OracleRun(case.case_id, path.eps, samples, data, stats)


# ---------------------------------------------------------------------------
# exponential extraction
# ---------------------------------------------------------------------------


class ExponentialSample(NamedTuple):
    z: complex
    residual: LogComplex
    fitted_rate: complex | None
    floor: float
    present: bool


def extract_exponential(run: OracleRun, case: CaseDefinition, table: CoeffTable, *,
                        window: int = 5, floor_factor: float = 3.0,
                        dps: int = DEFAULT_DPS) -> list:
    """Residual against the base series and its local exponential rate.

    ``residual = y - (optimally truncated base series)``.  The rate
    ``-eps d(log residual)/dz`` is the slope of a least-squares line through
    the unwrapped log-residual over ``window`` neighbouring samples (which
    must be equally spaced along one straight stretch).  Residuals within
    ``floor_factor`` of the truncation floor are reported as absent, with no
    rate.  Also stores the residuals in ``run.residual_series``.
    """
    if case.case_id != "model":
        raise ValueError("base-series residuals are implemented for the model case")
    zs = [complex(z) for z, _ in run.samples]
    res, floors = [], []
    for z, v in run.samples:
        b, _, _, fl = truncated_base_series(complex(z), run.eps, table, dps=dps)
        with mpmath.workdps(dps):
            res.append(mpmath.mpc(v) - b)
        floors.append(float(fl))
    run.residual_series = res
    present = [abs(r) > floor_factor * f for r, f in zip(res, floors)]
    logs = [complex(mpmath.log(r)) if p else None for r, p in zip(res, present)]
    half = window // 2
    out = []
    for i, z in enumerate(zs):
        rate = None
        if present[i]:
            lo, hi = max(0, i - half), min(len(zs), i + half + 1)
            idx = [j for j in range(lo, hi) if present[j]]
            if len(idx) >= 3:
                ph = np.unwrap([logs[j].imag for j in idx])
                lg = np.array([logs[j].real for j in idx]) + 1j * ph
                dz = np.array([zs[j] - z for j in idx])
                A = np.stack([np.ones_like(dz), dz], axis=1)
                coef, *_ = np.linalg.lstsq(A, lg, rcond=None)
                rate = complex(-run.eps * coef[1])
        out.append(ExponentialSample(z, LogComplex.from_mp(res[i]) if res[i] != 0 else LogComplex.from_complex(0),
                                     rate, floors[i], present[i]))
    return out


def oracle_to_csv(run: OracleRun, extracted: Sequence[ExponentialSample] | None = None) -> str:
    """CSV with columns ``z, re_y, im_y, log10_residual, fitted_rate``."""
    buf = io.StringIO()
    buf.write("z,re_y,im_y,log10_residual,fitted_rate\n")
    for i, (z, v) in enumerate(run.samples):
        z = complex(z)
        v = complex(v)
        lr, fr = "", ""
        if extracted is not None:
            e = extracted[i]
            lr = f"{e.residual.log10_magnitude:.17g}" if e.present else ""
            if e.fitted_rate is not None:
                fr = _fmt_complex(e.fitted_rate)
        buf.write(f"{_fmt_complex(z)},{v.real:.17g},{v.imag:.17g},{lr},{fr}\n")
    return buf.getvalue()


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.17g}{'+' if z.imag >= 0 else '-'}{abs(z.imag):.17g}i"
