"""Late-term fits, optimal truncation and the smoothing of the HOSP.

Coefficient magnitudes such as ``Gamma(n + alpha)/chi^(n + alpha)`` leave the
binary64 range near ``n = 171``, so everything here runs in mpmath or
:class:`LogComplex`.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .coeffkernel import GaussianRational, LogComplex, RationalFunction
from .recurrences import CoeffTable
from .singulants import CaseDefinition

__all__ = [
    "LogComplex",
    "FitResult",
    "TruncationSpec",
    "RemainderResult",
    "SmoothingPoint",
    "SmoothingProfile",
    "richardson",
    "fit_factorial_power",
    "optimal_truncation",
    "measure_remainder",
    "measure_remainder_detail",
    "smoothing_model",
    "smoothing_scan",
    "model_radial_arc",
    "evaluate_table",
]

WORK_DPS = 40


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


@dataclass
class FitResult:
    chi_hat: complex
    alpha_hat: float
    prefactor_hat: complex
    convergence_table: list
    status: str
    diagnostics: dict = field(default_factory=dict)


def _to_mp(v):
    if isinstance(v, LogComplex):
        return v.to_mp()
    if isinstance(v, GaussianRational):
        return v.to_mpc()
    return mpmath.mpc(v)


def richardson(seq: Sequence, n0: int, depth: int) -> list:
    """Richardson extrapolation of ``s_n = s + c_1/n + c_2/n^2 + ...``.

    ``seq[k]`` holds ``s_(n0 + k)``.  Returns the extrapolants indexed like
    ``seq`` (shorter by ``depth``).
    """
    if depth == 0:
        return list(seq)
    out = []
    fact = [math.factorial(k) for k in range(depth + 1)]
    for i in range(len(seq) - depth):
        n = n0 + i
        acc = 0
        for k in range(depth + 1):
            w = mpmath.mpf((-1) ** (k + depth) * (n + k) ** depth) / (fact[k] * fact[depth - k])
            acc += w * seq[i + k]
        out.append(acc)
    return out


def _monotone(seqs_by_depth) -> bool:
    """Successive extrapolants should shrink the last-step change.

    Changes below the working-precision floor count as converged.
    """
    diag = []
    for s in seqs_by_depth:
        if len(s) < 2:
            return True
        floor = abs(s[-1]) * mpmath.mpf(10) ** (-(mpmath.mp.dps - 12))
        diag.append(max(abs(s[-1] - s[-2]), floor))
    return all(diag[k + 1] <= diag[k] * (1 + 1e-9) for k in range(len(diag) - 1))


def fit_factorial_power(values: Sequence, alpha_known: float | None = None, *, n0: int = 0,
                        depth: int = 3, window: int = 40) -> FitResult:
    """Fit ``values[k] ~ Lambda Gamma(n + alpha) / chi^(n + alpha)`` with ``n = n0 + k``.

    With ``alpha`` known, ``chi_n = (n + alpha) y_n / y_(n+1)``.  Otherwise
    two consecutive ratio equations eliminate ``alpha``:
    ``chi_n = 1/(1/r_(n+1) - 1/r_n)`` and ``alpha_n = chi_n/r_n - n`` with
    ``r_n = y_n/y_(n+1)``.  All sequences are Richardson-accelerated to
    ``depth``; the prefactor ``y_n chi^(n+alpha)/Gamma(n+alpha)`` is formed in
    log space.  ``window`` limits the work to the last entries.
    """
    with mpmath.workdps(WORK_DPS):
        ys = [_to_mp(v) for v in values]
        if len(ys) < 10:
            return FitResult(complex("nan"), float("nan"), complex("nan"), [], "insufficient_data")
        if any(y == 0 for y in ys):
            raise ValueError("zero entries cannot be fitted")
        start = max(0, len(ys) - window - depth - 3)
        ys = ys[start:]
        base = n0 + start
        r = [ys[k] / ys[k + 1] for k in range(len(ys) - 1)]
        if alpha_known is None:
            chi_raw = [1 / (1 / r[k + 1] - 1 / r[k]) for k in range(len(r) - 1)]
            alpha_raw = [chi_raw[k] / r[k] - (base + k) for k in range(len(chi_raw))]
        else:
            a = mpmath.mpf(alpha_known)
            chi_raw = [(base + k + a) * r[k] for k in range(len(r))]
            alpha_raw = None

        levels = [richardson(chi_raw, base, d) for d in range(depth + 1)]
        chi_seq = levels[-1]
        chi_hat = chi_seq[-1]
        ok = _monotone(levels)
        if alpha_known is None:
            alevels = [richardson([x.real for x in alpha_raw], base, d) for d in range(depth + 1)]
            alpha_hat = alevels[-1][-1]
            alpha_hat = mpmath.re(alpha_hat)
        else:
            alpha_hat = mpmath.mpf(alpha_known)

        logchi = mpmath.log(chi_hat)
        pref_raw = []
        for k, y in enumerate(ys):
            n = base + k
            pref_raw.append(mpmath.exp(mpmath.log(y) + (n + alpha_hat) * logchi - mpmath.loggamma(n + alpha_hat)))
        plevels = [richardson(pref_raw, base, d) for d in range(depth + 1)]
        pref_hat = plevels[-1][-1]
        table = [(base + k, complex(v)) for k, v in enumerate(chi_seq)]
        status = "converged" if ok else "non_monotone"
        diag = {
            "chi_step": float(abs(chi_seq[-1] - chi_seq[-2])) if len(chi_seq) > 1 else float("nan"),
            "prefactor_step": float(abs(plevels[-1][-1] - plevels[-1][-2])) if len(plevels[-1]) > 1 else float("nan"),
            "n_last": base + len(ys) - 1,
        }
        return FitResult(complex(chi_hat), float(alpha_hat), complex(pref_hat), table, status, diag)


def evaluate_table(table: CoeffTable, z, *, dps: int = WORK_DPS) -> list:
    """mpmath values of every entry of ``table`` at ``z``.

    Rational ``z`` (Fraction, GaussianRational or an exact string) is
    evaluated exactly and rounded once.
    """
    exact = isinstance(z, (Fraction, GaussianRational, int, str))
    if isinstance(z, str):
        from .cli import parse_complex_exact
        z = parse_complex_exact(z)
    out = []
    with mpmath.workdps(dps):
        for f in table.entries:
            if exact:
                out.append(GaussianRational.coerce(f.evaluate_exact(z)).to_mpc())
            else:
                out.append(f.evaluate_mp(mpmath.mpc(z)))
    return out


# ---------------------------------------------------------------------------
# optimal truncation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncationSpec:
    n: int
    r: float
    r_tilde: float
    vartheta: float
    vartheta_tilde: float
    P: int
    rho_tilde: float
    hyper_check: float | None = None
    n_minus_P: int = 0


def optimal_truncation(n: int, chi: complex, chi_tilde: complex, eps: float | None = None) -> TruncationSpec:
    """Optimal truncation ``P = r_tilde n/(r + r_tilde) + rho_tilde`` of the late-late sum.

    ``rho_tilde`` in [0, 1) makes ``P`` an integer.  With ``eps`` given, the
    hyperasymptotic value ``r r_tilde/(eps (r + r_tilde))`` is reported for
    comparison (it equals ``P - rho_tilde`` when ``eps = r/n``).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    chi, chi_tilde = complex(chi), complex(chi_tilde)
    if chi == 0 or chi_tilde == 0:
        raise ValueError("chi and chi_tilde must be nonzero")
    r, rt = abs(chi), abs(chi_tilde)
    x = Fraction(rt * n) / Fraction(r + rt)
    P = math.ceil(x)
    rho = float(P - x)
    hyper = r * rt / (eps * (r + rt)) if eps else None
    import cmath

    return TruncationSpec(n, r, rt, cmath.phase(chi), cmath.phase(chi_tilde), P, rho, hyper, n - P)


# ---------------------------------------------------------------------------
# remainder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RemainderResult:
    value: LogComplex
    P: int
    largest_term: LogComplex
    last_term: LogComplex
    digits_lost: float
    high_precision: bool


def _model_constants(case: CaseDefinition):
    if case.case_id != "model":
        raise ValueError("remainders are implemented for the model case")
    c = case.constants
    return float(c["alpha1"]), mpmath.mpf(1) / mpmath.sqrt(2 * mpmath.pi)


def _remainder_at(z, n, base_table, amp_table, case, dps, P):
    with mpmath.workdps(dps):
        alpha, lam0 = _model_constants(case)
        zz = _exact_or_mp(z)
        chi1 = zz * zz / 2
        a = mpmath.mpf(alpha)
        logchi = mpmath.log(chi1)
        y = _eval_entry(base_table.entries[n], z)
        terms = []
        for p in range(P):
            b = _eval_entry(amp_table.entries[p], z)
            lt = mpmath.loggamma(n - p + a) - (n - p + a) * logchi
            terms.append(lam0 * b * mpmath.exp(lt))
        s = mpmath.fsum(terms)
        R = y - s
        big = max([abs(y)] + [abs(t) for t in terms])
        lost = float(mpmath.log10(big / abs(R))) if R != 0 else float("inf")
        last = terms[-1] if terms else mpmath.mpc(0)
        return R, big, last, lost


def _exact_or_mp(z):
    if isinstance(z, (GaussianRational, Fraction, int)):
        return GaussianRational.coerce(z).to_mpc()
    return mpmath.mpc(z)


def _eval_entry(f: RationalFunction, z):
    if isinstance(z, (GaussianRational, Fraction, int)):
        return GaussianRational.coerce(f.evaluate_exact(z)).to_mpc()
    return f.evaluate_mp(mpmath.mpc(z))


def measure_remainder_detail(z, n: int, base_table: CoeffTable, amp_table: CoeffTable,
                             case: CaseDefinition, *, P: int | None = None,
                             dps: int = 40) -> RemainderResult:
    """``R_P = y_n - sum_{p<P} Lambda_0 B_p Gamma(n-p+alpha_1)/chi_1^(n-p+alpha_1)``.

    ``P`` defaults to the optimal truncation.  If the subtraction loses more
    than 10 significant digits the sum is redone with the precision raised by
    the observed loss, and the value of ``z`` converted exactly.
    """
    _model_constants(case)
    zc = complex(_exact_or_mp(z))
    chi1 = zc * zc / 2
    chit = case.singulants["chi_tilde"](zc)
    if P is None:
        P = optimal_truncation(n, chi1, chit).P
    if n >= len(base_table) or P > len(amp_table):
        raise ValueError("coefficient tables are too short")
    R, big, last, lost = _remainder_at(z, n, base_table, amp_table, case, dps, P)
    hp = False
    if lost > 10:
        hp = True
        zex = z
        if not isinstance(z, (GaussianRational, Fraction, int)):
            zex = GaussianRational(Fraction(zc.real), Fraction(zc.imag))
        R, big, last, lost = _remainder_at(zex, n, base_table, amp_table, case,
                                           dps + int(math.ceil(lost)) + 10, P)
    return RemainderResult(LogComplex.from_mp(R), P, LogComplex.from_mp(big),
                           LogComplex.from_mp(last), lost, hp)


def measure_remainder(z, n: int, base_table: CoeffTable, amp_table: CoeffTable,
                      case: CaseDefinition, **kw) -> LogComplex:
    return measure_remainder_detail(z, n, base_table, amp_table, case, **kw).value


# ---------------------------------------------------------------------------
# smoothing
# ---------------------------------------------------------------------------


def _switched_asymptote(z: complex, n: int, case: CaseDefinition) -> LogComplex:
    """``2 pi i Lambda_tilde Gamma(n+alpha_1+beta)/(chi_1+chi_tilde)^(n+alpha_1+beta)``."""
    c = case.constants
    a = float(c["alpha1"]) + float(c["beta"])
    chi = complex(case.singulants["chi1"](z) + case.singulants["chi_tilde"](z))
    lam = LogComplex.from_complex(2j * math.pi * c["Lambda_tilde"])
    with mpmath.workdps(30):
        lg = mpmath.loggamma(n + a) - (n + a) * mpmath.log(mpmath.mpc(chi))
    return lam * LogComplex.from_log(complex(lg))


def _transverse(z: complex, n: int, case: CaseDefinition) -> float:
    """Signed transverse coordinate, positive on the active side of the HOSL.

    The raw coordinate ``sqrt(r r_tilde) arg(chi_tilde/chi) sqrt(n)/(r+r_tilde)``
    changes orientation with the crossing direction, so its sign is taken
    from the activity classification.
    """
    from .stokesgeo import classify_activity

    pair = next(iter(case.hosl_pairs.values()))
    chi = complex(case.singulants[pair.chi](z))
    chit = complex(case.singulants[pair.chi_tilde](z))
    r, rt = abs(chi), abs(chit)
    theta = np.angle(chit / chi)
    T = math.sqrt(r * rt) * abs(theta) * math.sqrt(n) / (r + rt)
    try:
        active = classify_activity(z, pair, case) != 0
    except ValueError:
        return 0.0
    return T if active else -T


def smoothing_model(z: complex, n: int, case: CaseDefinition) -> dict:
    """Error-function model of the switched-on late-term component.

    Returns ``erf_value = int_0^T exp(-t^2/2) dt`` (odd in ``T``), the full
    ``asymptote`` reached for ``T -> +inf``, the transverse coordinate and
    ``value = asymptote * Phi(T)``, which equals half the asymptote on the
    HOSL.
    """
    T = _transverse(complex(z), n, case)
    erf_int = math.sqrt(math.pi / 2) * math.erf(T / math.sqrt(2))
    asym = _switched_asymptote(complex(z), n, case)
    phi = 0.5 + erf_int / math.sqrt(2 * math.pi)
    value = asym * phi if phi > 0 else LogComplex(-math.inf, 0.0)
    return {"erf_value": erf_int, "asymptote": asym, "transverse_coordinate": T,
            "value": value, "cdf": phi}


@dataclass(frozen=True)
class SmoothingPoint:
    s: float
    z: complex
    T: float
    measured: LogComplex
    model: LogComplex
    ratio: complex  # measured / asymptote
    normalized: float
    residual: float  # imaginary part of the normalized profile
    cdf: float


@dataclass
class SmoothingProfile:
    n: int
    points: list
    far_inactive: complex
    far_active: complex

    def max_deviation(self, T_max: float = 3.0) -> float:
        return max((abs(p.normalized - p.cdf) for p in self.points if abs(p.T) <= T_max), default=0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "re_z", "im_z", "T", "re_meas", "im_meas", "re_model", "im_model", "normalized"])
        for p in self.points:
            m = p.measured.to_mp()
            md = p.model.to_mp()
            w.writerow([_f17(p.s), _f17(p.z.real), _f17(p.z.imag), _f17(p.T),
                        _mp17(m.real), _mp17(m.imag), _mp17(md.real), _mp17(md.imag), _f17(p.normalized)])
        return buf.getvalue()


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def _mp17(x) -> str:
    with mpmath.workdps(30):
        return mpmath.nstr(mpmath.mpf(x), 17, min_fixed=-1, max_fixed=-1) if x != 0 else "0"


def model_radial_arc(phi: float = 0.3 * math.pi, rho_min: float = 0.25, rho_max: float = 0.85,
                     num: int = 61) -> list:
    """Points ``1/2 + rho e^(i phi)`` crossing the model HOSL ``|z - 1/2| = 1/2``."""
    rho = np.linspace(rho_min, rho_max, num)
    return list(0.5 + rho * np.exp(1j * phi))


def smoothing_scan(arc: Sequence[complex], n: int, case: CaseDefinition, tables) -> SmoothingProfile:
    """Measured remainder against the error-function model along ``arc``.

    ``tables = (base_table, amp_table)``.  The measured ratio
    ``q = R_P / asymptote`` is normalized as ``(q - q_0)/(q_1 - q_0)`` with
    ``q_0``, ``q_1`` at the inactive and active arc ends, so the model is the
    standard normal CDF of ``T``; the real part is compared and the
    imaginary part kept as the residual.
    """
    base_table, amp_table = tables
    arc = [complex(z) for z in arc]
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(arc)))])
    raw = []
    for sk, z in zip(s, arc):
        R = measure_remainder(z, n, base_table, amp_table, case)
        mod = smoothing_model(z, n, case)
        q = complex((R / mod["asymptote"]).to_mp())
        raw.append((sk, z, mod["transverse_coordinate"], R, mod["value"], q, mod["cdf"]))
    ends = sorted([raw[0], raw[-1]], key=lambda x: x[2])
    q0, q1 = ends[0][5], ends[1][5]
    pts = []
    for sk, z, T, R, mv, q, cdf in raw:
        nq = (q - q0) / (q1 - q0)
        pts.append(SmoothingPoint(float(sk), z, T, R, mv, q, nq.real, nq.imag, cdf))
    return SmoothingProfile(n, pts, q0, q1)
