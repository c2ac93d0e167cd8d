"""Fast invariant suite behind ``hosplab verify``.

Each check is a short function returning ``(passed, detail)``.  The suite is a
smoke-level aggregate of the per-module invariants; the pytest suite holds the
full set.
"""
from __future__ import annotations

import cmath
import math
import random
from fractions import Fraction

import mpmath

from .coeffkernel import GaussianRational, Polynomial, RationalFunction, leading_laurent_coefficient

_CHECKS: dict = {}


def _check(case: str):
    def deco(fn):
        _CHECKS.setdefault(case, []).append(fn)
        return fn
    return deco


def _rf(num, poles):
    return RationalFunction(Polynomial(num), poles)


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------


@_check("model")
def exact_early_orders():
    from .recurrences import model_base_coefficients
    t = model_base_coefficients(2)
    want = [_rf([1], {0: 1}), _rf([1, 1], {0: 3}), _rf([3, 3, 2], {0: 5})]
    return all(a == b for a, b in zip(t.entries, want)), "y0, y1, y2"


@_check("model")
def base_recurrence():
    from .recurrences import model_base_coefficients, recurrence_residual
    t = model_base_coefficients(30)
    return all(recurrence_residual(t, n).is_zero() for n in range(2, 31)), "n = 2..30"


@_check("model")
def inner_identity_z0():
    from .recurrences import INNER_Z0, model_base_coefficients
    t = model_base_coefficients(30)
    ok = all(leading_laurent_coefficient(t[n], 0, 2 * n + 1) == INNER_Z0.coefficient(n)
             for n in range(31))
    return ok, "n <= 30"


@_check("model")
def inner_identity_z1():
    from .recurrences import INNER_Z1, model_amplitude_Bp
    t = model_amplitude_Bp(30)
    # B_p = c_p (1 - z)^-(2p+1) = -c_p (z - 1)^-(2p+1)
    ok = all(-leading_laurent_coefficient(t[p], 1, 2 * p + 1) == INNER_Z1.coefficient(p)
             for p in range(31))
    return ok, "p <= 30"


@_check("model")
def borel_taylor():
    from .borel import borel_residual_checks, SheetPoint
    grid = [SheetPoint(complex(0.05 * k, 0.03)) for k in range(1, 6)]
    r = borel_residual_checks(0.5 + 1j, grid, K=25)
    return r["taylor_match_count"] == 25 and r["pde_residual_max"] <= 1e-8, str(r)


@_check("model")
def hosl_circle():
    from .singulants import model_case
    from .stokesgeo import trace_hosl
    case = model_case()
    err = 0.0
    for c in trace_hosl(case.hosl_pairs["HOSL"], case):
        err = max(err, max(abs(abs(z) ** 2 - z.real) for z in c.points))
    return err <= 1e-9, f"max ||z|^2 - Re z| = {err:.2e}"


@_check("model")
def b2_activity():
    from .singulants import model_case
    from .stokesgeo import classify_activity
    case = model_case()
    pair = case.hosl_pairs["HOSL"]
    inactive = all(classify_activity(x, pair, case) == 0 for x in (0.6, 0.75, 0.9))
    active = all(classify_activity(x, pair, case) != 0 for x in (1.2, 1.6, 2.2))
    return inactive and active, "(1/2, 1) inactive, (1, inf) active"


@_check("model")
def loop_around_z1():
    from .singulants import model_case
    from .stokesgeo import ComponentSet, circle_path, propagate_components
    case = model_case()
    crossings = propagate_components(circle_path(1.0, 0.5, -math.pi / 2), ComponentSet.of("B"), case)
    end = crossings[-1].components
    return len(crossings) >= 3 and end == ComponentSet.of("B"), repr(end)


@_check("model")
def late_term_fit():
    from .latefit import evaluate_table, fit_factorial_power
    from .recurrences import model_base_coefficients
    vals = evaluate_table(model_base_coefficients(200), Fraction(2, 5))
    f = fit_factorial_power(vals)
    # prefactor = Lambda0 * B0(z) with B0 = 1/(1 - z)
    lam = abs(f.prefactor_hat * 0.6 / (1 / math.sqrt(2 * math.pi)) - 1)
    return abs(f.chi_hat / 0.08 - 1) <= 1e-3 and lam <= 5e-3, f"chi {f.chi_hat:.10g}"


@_check("model")
def oracle_vs_borel():
    from .borel import model_inverse_borel
    from .odeoracle import MODEL_SEED_POINT, OdePath, integrate_path, seed_from_base_series
    from .recurrences import model_base_coefficients
    from .singulants import model_case
    case = model_case()
    t = model_base_coefficients(200)
    s = seed_from_base_series(MODEL_SEED_POINT, 0.1, case, t)
    run = integrate_path(OdePath((MODEL_SEED_POINT, -1 - 1j), 0.1, s.values), case)
    d = abs(complex(run.samples[-1][1]) - model_inverse_borel(-1 - 1j, 0.1))
    return d <= 1e-6, f"|diff| = {d:.2e}"


# ---------------------------------------------------------------------------
# Pearcey
# ---------------------------------------------------------------------------


@_check("pearcey")
def closed_forms():
    from .recurrences import PEARCEY_ZPLUS, pearcey_leading_objects
    rng = random.Random(7)
    worst = 0.0
    for _ in range(20):
        z = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        for m in (1, 2, 3):
            r = pearcey_leading_objects(z, m).residuals
            worst = max(worst, abs(r["cubic"]), abs(r["singulant_ode"]))
    zp_ok = abs(PEARCEY_ZPLUS - 2j * math.sqrt(3) / 9) <= 1e-12
    return worst <= 1e-9 and zp_ok, f"max residual {worst:.2e}"


@_check("pearcey")
def flow_at_one():
    from .singulants import hamiltonian_flow
    st = hamiltonian_flow(1.0)
    return abs(st.z) <= 1e-12 and abs(st.w - 1j / 3) <= 1e-12, f"w = {st.w}"


@_check("pearcey")
def clockwise_loop():
    from .singulants import pearcey_case
    from .stokesgeo import ComponentSet, circle_path, propagate_components
    case = pearcey_case()
    xc = case.constants["crossing_point"]
    path = circle_path(xc, 0.3, math.pi / 2, clockwise=True)
    crossings = propagate_components(path, ComponentSet.of("3"), case)
    end = crossings[-1].components
    seen = [repr(c.components) for c in crossings]
    want = ["{1,3}", "{1,2,3}", "{2,3}", "{3}"]
    it = iter(seen)
    ordered = all(any(s == w for s in it) for w in want)
    return end == ComponentSet.of("3") and ordered, " -> ".join(seen)


# ---------------------------------------------------------------------------
# forced problem with a singular point at z = a
# ---------------------------------------------------------------------------


@_check("trinh")
def trinh_seeds(a):
    from .recurrences import trinh_base_coefficients
    a = GaussianRational.coerce(a)
    t = trinh_base_coefficients(1, a)
    roots = [GaussianRational(1), a]
    omz = RationalFunction(Polynomial([1, -1]), known_roots=roots)
    zma = RationalFunction(Polynomial([-a, 1]), known_roots=roots)
    one = RationalFunction.constant(1, known_roots=roots)
    A0 = one / (omz * zma)
    A1 = one.scale(2) / (omz ** 2 * zma ** 2) - one.scale(2) / (omz ** 3 * zma)
    return t[0] == A0 and t[1] == A1, "A0, A1"


@_check("trinh")
def trinh_singulant_fit(a):
    from .latefit import evaluate_table, fit_factorial_power
    from .recurrences import trinh_base_coefficients
    from .singulants import trinh_case
    case = trinh_case(a)
    z = GaussianRational(Fraction(-7, 10), 1)
    vals = evaluate_table(trinh_base_coefficients(80, a), z)
    f = fit_factorial_power(vals)
    zc = complex(z)
    chis = [case.singulants[k](zc) for k in ("chi1", "chi2")]
    best = min(chis, key=abs)
    return abs(f.chi_hat - best) / abs(best) <= 1e-3, f"chi {f.chi_hat:.8g} vs {best:.8g}"


@_check("trinh")
def trinh_late_late(a):
    from .latefit import fit_factorial_power
    from .recurrences import trinh_amplitude_coefficients
    z = 0.3 + 0.4j
    ok = True
    with mpmath.workdps(40):
        s = mpmath.sqrt(mpmath.mpc(z))
        for br in (1, -1):
            cs = trinh_amplitude_coefficients(200, br)
            vals = [mpmath.mpf(c.numerator) / c.denominator * s ** (-3 * p) for p, c in enumerate(cs)]
            f = fit_factorial_power(vals)
            want = -br * 4 / 3 * z * cmath.sqrt(z)
            ok &= abs(f.chi_hat - want) <= 1e-6 * abs(want)
    return ok, "both sign branches"


# ---------------------------------------------------------------------------
# Kelvin (geometry only)
# ---------------------------------------------------------------------------


@_check("kelvin")
def kelvin_lines():
    from .singulants import kelvin_case
    from .stokesgeo import build_atlas
    atlas = build_atlas(kelvin_case())
    n = len(atlas["curves"])
    return n > 0, f"{n} curves"


def run_checks(case: str, a=None, stream=None) -> tuple[bool, str]:
    """Run the checks for ``case``; returns ``(all_passed, report)``."""
    lines = []
    ok_all = True
    for fn in _CHECKS.get(case, []):
        try:
            ok, detail = fn(a) if case == "trinh" else fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= bool(ok)
        lines.append(f"{'PASS' if ok else 'FAIL'} {case}.{fn.__name__}: {detail}")
    lines.append(f"{'OK' if ok_all else 'FAILED'} ({len(lines)} checks)")
    return ok_all, "\n".join(lines) + "\n"
