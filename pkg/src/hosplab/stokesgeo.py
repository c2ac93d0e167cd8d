"""Stokes lines, higher-order Stokes lines and transseries component sets.

A Stokes line for ``f`` (a singulant or a difference of singulants) is the
level set ``Im f = 0`` on which ``Re f >= 0``.  Along such a curve ``Re f``
is monotone, so curves are traced in the direction of increasing ``Re f``
with a predictor step along ``conj(f')`` and a Newton correction in the
transverse direction ``i conj(f')``.

Higher-order Stokes lines (HOSLs) are traced the same way with
``f = chi_tilde / chi``.  The side of a HOSL is decided by the parity of
HOSL crossings along a bent path from the case's inactive anchor,
which stays correct where ``Im(chi_tilde/chi)`` also changes sign on curves
with ``Re < 0`` or across poles.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .singulants import CaseDefinition, HoslPair, LineSpec

__all__ = [
    "StokesCurve",
    "ComponentSet",
    "Crossing",
    "TraceError",
    "trace_curve",
    "trace_line",
    "trace_hosl",
    "classify_activity",
    "propagate_components",
    "build_atlas",
    "atlas_to_csv",
    "atlas_to_json",
    "circle_path",
]

TWO_PI_I = 2j * math.pi


class TraceError(RuntimeError):
    pass


@dataclass
class StokesCurve:
    kind: str
    label: str
    points: np.ndarray
    active_mask: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ComponentSet:
    """Transseries components present in a region.

    Components carry integer Stokes coefficients so that crossing a line
    twice in opposite directions cancels exactly; ``members`` are the labels
    with nonzero coefficient.
    """

    coefficients: tuple = ()

    @classmethod
    def of(cls, members: Iterable[str]) -> "ComponentSet":
        return cls(tuple(sorted((m, 1) for m in set(members))))

    @property
    def members(self) -> frozenset:
        return frozenset(k for k, c in self.coefficients if c != 0)

    def coefficient(self, label: str) -> int:
        return dict(self.coefficients).get(label, 0)

    def updated(self, label: str, delta: int) -> "ComponentSet":
        d = dict(self.coefficients)
        d[label] = d.get(label, 0) + delta
        return ComponentSet(tuple(sorted((k, v) for k, v in d.items() if v != 0)))

    def __contains__(self, label: str) -> bool:
        return label in self.members

    def __repr__(self) -> str:
        return "{" + ",".join(sorted(self.members)) + "}"


@dataclass(frozen=True)
class Crossing:
    z: complex
    label: str
    direction: int  # +1 when Im f goes from + to -
    active: bool
    components: ComponentSet


# ---------------------------------------------------------------------------
# function wrappers
# ---------------------------------------------------------------------------


class _Field:
    """Value/derivative of a traced function, optionally through a tracker."""

    def __init__(self, f, case: CaseDefinition | None, z0: complex):
        self.evaluator = None
        if isinstance(f, HoslPair):
            self.evaluator = case.evaluator(z0)
            self.kind = "ratio"
            self.keys = (f.chi, f.chi_tilde)
        elif isinstance(f, str):
            self.evaluator = case.evaluator(z0)
            self.kind = "label"
            self.keys = (f,)
        else:
            self.kind = "callable"
            self.f, self.fp = f

    def __call__(self, z: complex):
        if self.kind == "callable":
            return complex(self.f(z)), complex(self.fp(z))
        v = self.evaluator.values(z)
        d = self.evaluator.derivs(z)
        if self.kind == "label":
            k = self.keys[0]
            return v[k], d[k]
        c, ct = self.keys
        r = v[ct] / v[c]
        return r, (d[ct] * v[c] - v[ct] * d[c]) / (v[c] * v[c])

    def advance(self, z: complex) -> None:
        if self.evaluator is not None:
            self.evaluator.advance(z)


# ---------------------------------------------------------------------------
# tracing
# ---------------------------------------------------------------------------


def _in_box(z: complex, box) -> bool:
    return box[0] <= z.real <= box[1] and box[2] <= z.imag <= box[3]


def _correct(fld: _Field, z: complex, tol: float, maxit: int = 12):
    for _ in range(maxit):
        v, dv = fld(z)
        if abs(v.imag) <= tol:
            return z, v, dv
        g = abs(dv)
        if g == 0:
            break
        z = z - 1j * np.conj(dv) / g * (v.imag / g)
    v, dv = fld(z)
    if abs(v.imag) <= tol:
        return z, v, dv
    raise TraceError("corrector did not converge")


def _march(fld: _Field, z: complex, heading: complex, box, singular, tol, h_max, h_min,
           max_steps) -> list:
    """Follow ``Im f = 0`` from ``z`` starting along the unit vector ``heading``.

    The tangent is ``+-conj(f')`` with the sign chosen for continuity, so the
    curve passes straight through simple turning points.  Marching stops
    once ``Re f`` turns negative.
    """
    pts = []
    v, dv = fld(z)
    h = h_max
    for _ in range(max_steps):
        g = abs(dv)
        if g > 1e-13:
            t = np.conj(dv) / g
            if (t * np.conj(heading)).real < 0:
                t = -t
        else:
            t = heading  # on a turning point: keep going straight
        dsing = min((abs(z - s) for s in singular), default=np.inf)
        h = min(h * 1.5, h_max, max(0.1 * dsing, h_min))
        while True:
            zp = z + h * t
            try:
                zn, vn, dvn = _correct(fld, zp, tol)
            except (TraceError, RuntimeError, ZeroDivisionError, OverflowError):
                zn = None
            if zn is not None and abs(zn - zp) < 0.5 * h and np.isfinite(vn):
                break
            h *= 0.5
            if h < 1e-3 * h_min:
                return pts
        if vn.real < 0 or abs(vn) > 1e8:
            break  # Re f < 0, or running into a pole of f
        heading = (zn - z) / abs(zn - z)
        z, v, dv = zn, vn, dvn
        fld.advance(z)
        pts.append(z)
        if not _in_box(z, box):
            break
    return pts


def trace_curve(f, seed: complex, case: CaseDefinition | None = None, *, label: str = "",
                kind: str = "i_to_j", both_ways: bool = False, heading: complex | None = None,
                tol: float = 1e-11,
                h_max: float = 0.02, h_min: float = 1e-4, max_steps: int = 20000,
                box=None) -> StokesCurve:
    """Trace the Stokes curve ``Im f = 0, Re f >= 0`` through ``seed``.

    ``f`` is a singulant label of ``case``, a :class:`HoslPair` (traces the
    ratio ``chi_tilde/chi``) or a pair of callables ``(f, f')``.  The curve
    starts along ``heading`` (default: the direction of increasing ``Re f``)
    and passes straight through simple turning points; with ``both_ways`` it
    is also followed in the opposite direction.  Tracing stops at the case
    box, where ``Re f`` turns negative, or where evaluation fails.
    """
    box = box if box is not None else (case.box if case is not None else (-2, 2, -2, 2))
    singular = tuple(case.singular_points) if case is not None else ()
    fld = _Field(f, case, seed)
    z0, v0, _ = _correct(fld, complex(seed), tol)
    if v0.real < 0:
        raise TraceError("seed has Re f < 0")
    v0, dv0 = fld(z0)
    heading = np.conj(dv0) / abs(dv0) if heading is None else heading / abs(heading)
    fwd = _march(fld, z0, heading, box, singular, tol, h_max, h_min, max_steps)
    pts = [z0] + fwd
    if both_ways:
        bwd_fld = _Field(f, case, z0)
        bwd = _march(bwd_fld, z0, -heading, box, singular, tol, h_max, h_min, max_steps)
        pts = bwd[::-1] + pts
    arr = np.array(pts, dtype=complex)
    return StokesCurve(kind, label, arr, np.ones(len(arr), dtype=bool))


def _origin_seeds(f, case, origin: complex, rho: float, n: int = 720, tol: float = 1e-11):
    """Points near ``origin`` where ``Im f = 0`` and ``Re f > 0``.

    Each sample uses a fresh evaluator so that labels follow the closed
    forms; a sign change caused by a branch cut is rejected because the
    refined point does not satisfy ``Im f = 0``.
    """
    def val(z):
        return _Field(f, case, z)(z)[0]

    # irrational phase offset keeps samples off exact symmetry rays
    th = np.linspace(0, 2 * np.pi, n, endpoint=False) + 0.1234567 * 2 * np.pi / n
    zs = origin + rho * np.exp(1j * th)
    vals = [val(z) for z in zs]
    seeds = []
    for k in range(n):
        a, b = vals[k], vals[(k + 1) % n]
        if np.sign(a.imag) == np.sign(b.imag):
            continue
        t0, t1 = th[k], th[k] + 2 * np.pi / n
        fa = a.imag
        for _ in range(60):
            tm = 0.5 * (t0 + t1)
            fm = val(origin + rho * np.exp(1j * tm)).imag
            if np.sign(fm) == np.sign(fa):
                t0, fa = tm, fm
            else:
                t1 = tm
        z = origin + rho * np.exp(0.5j * (t0 + t1))
        v = val(z)
        if abs(v.imag) <= 1e-6 * max(1.0, abs(v)) and v.real > 0:
            if all(abs(z - q) > 1e-3 * rho for q in seeds):
                seeds.append(z)
    return seeds


def _curves_from_origin(f, case, origin, *, label, kind, rho=1e-3, **kw):
    """Trace all arms of a curve from ``origin``.

    If ``f`` is regular with ``f' != 0`` there, one curve passes through the
    origin.  At zeros, poles and turning points of ``f`` the arms are seeded
    on a small circle and traced outwards.
    """
    fld = _Field(f, case, origin + rho)
    try:
        v0, d0 = fld(complex(origin))
    except (ZeroDivisionError, RuntimeError, OverflowError):
        v0 = d0 = None
    regular = v0 is not None and np.isfinite(v0) and abs(v0) > 1e-9 and abs(d0) > 1e-9
    curves = []
    if regular:
        if abs(v0.imag) <= 1e-8 * max(1.0, abs(v0)) and v0.real > 0:
            curves.append(trace_curve(f, origin, case, label=label, kind=kind, both_ways=True, **kw))
        return curves
    for s in _origin_seeds(f, case, origin, rho):
        c = trace_curve(f, s, case, label=label, kind=kind, heading=s - origin, **kw)
        c.points = np.concatenate([[complex(origin)], c.points])
        c.active_mask = np.ones(len(c.points), dtype=bool)
        curves.append(c)
    return curves


def trace_line(line: LineSpec, case: CaseDefinition, **kw) -> list:
    """Trace every branch of an ordinary Stokes line and mark its activity."""
    curves = []
    for o in line.origins:
        for c in _curves_from_origin(line.singulant, case, o, label=line.label, kind=line.kind, **kw):
            c.meta = {"origin": complex(o), "hosl": line.hosl}
            if line.hosl is not None:
                c.active_mask = _activity_mask(c.points, case.hosl_pairs[line.hosl], case)
            curves.append(c)
    return curves


def trace_hosl(pair: HoslPair, case: CaseDefinition, **kw) -> list:
    """Trace ``{z : Im[chi_tilde/chi] = 0, Re[chi_tilde/chi] >= 0}`` from the pair origin."""
    curves = _curves_from_origin(pair, case, pair.origin, label=pair.label, kind="hosl", **kw)
    for c in curves:
        c.meta = {"origin": complex(pair.origin)}
    return curves


# ---------------------------------------------------------------------------
# activity
# ---------------------------------------------------------------------------


def _segment_samples(z0: complex, z1: complex, singular, h_max=0.01):
    """Sample a segment finely enough near singular points."""
    pts = [complex(z0)]
    z = complex(z0)
    total = abs(z1 - z0)
    if total == 0:
        return pts
    u = (z1 - z0) / total
    s = 0.0
    while s < total:
        d = min((abs(z - p) for p in singular), default=np.inf)
        h = min(h_max, max(0.1 * d, 1e-5))
        s = min(s + h, total)
        z = z0 + u * s
        pts.append(complex(z))
    return pts


def _hosl_crossings_along(samples, pair: HoslPair, case: CaseDefinition, tol=1e-9):
    """Genuine HOSL crossings (``Im r`` sign change, ``Re r > 0``) along samples."""
    ev = case.evaluator(samples[0])
    key_c, key_t = pair.chi, pair.chi_tilde

    def ratio(z):
        v = ev.values(z)
        return v[key_t] / v[key_c]

    count = 0
    prev_z, prev_r = samples[0], ratio(samples[0])
    for z in samples[1:]:
        r = ratio(z)
        if np.sign(r.imag) != np.sign(prev_r.imag) and prev_r.imag != 0:
            a, b, fa = prev_z, z, prev_r.imag
            for _ in range(80):
                m = 0.5 * (a + b)
                fm = ratio(m).imag
                if np.sign(fm) == np.sign(fa):
                    a, fa = m, fm
                else:
                    b = m
                if abs(b - a) < 1e-15:
                    break
            rm = ratio(0.5 * (a + b))
            if abs(rm.imag) <= 1e-6 * max(1.0, abs(rm)) and rm.real > 0:
                count += 1
        ev.advance(z)
        prev_z, prev_r = z, r
    return count, prev_r


def _anchor_path(z0: complex, z1: complex, singular) -> list:
    """Bent two-segment path from ``z0`` to ``z1``.

    The kink keeps the path off symmetry lines such as the real axis, where
    ``chi_tilde/chi`` can be real along a whole segment.
    """
    d = z1 - z0
    if abs(d) == 0:
        return [z0]
    for off in (0.1371, -0.1371, 0.2913, -0.2913, 0.0517, -0.0517):
        m = z0 + 0.5 * d + 1j * off * d
        far = all(_seg_dist(p, z0, m) > 0.02 and _seg_dist(p, m, z1) > 0.02 for p in singular)
        if far:
            break
    return _segment_samples(z0, m, singular) + _segment_samples(m, z1, singular)[1:]


def _seg_dist(p, a, b) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    t = min(1.0, max(0.0, ((p - a) * np.conj(d)).real / abs(d) ** 2))
    return abs(p - (a + t * d))


def classify_activity(z: complex, pair: HoslPair, case: CaseDefinition, tol: float = 1e-9) -> complex:
    """Higher-order Stokes multiplier at ``z``: ``0`` or ``2*pi*i``.

    The multiplier is zero in the region of the pair's inactive anchor; each
    HOSL crossing along the segment from the anchor to ``z`` toggles it.
    Raises ValueError when ``z`` lies on the HOSL within ``tol``.
    """
    z = complex(z)
    samples = _anchor_path(complex(pair.inactive_anchor), z, case.singular_points)
    count, r = _hosl_crossings_along(samples, pair, case)
    if abs(r.imag) <= tol * max(1.0, abs(r)) and r.real > 0:
        raise ValueError(f"z = {z} lies on the higher-order Stokes line {pair.label}")
    return TWO_PI_I if count % 2 else 0j


def _activity_mask(points, pair, case) -> np.ndarray:
    mask = np.zeros(len(points), dtype=bool)
    for k, z in enumerate(points):
        try:
            mask[k] = classify_activity(z, pair, case) != 0
        except (ValueError, ZeroDivisionError):
            mask[k] = True  # on the HOSL itself the line is drawn as present
    return mask


# ---------------------------------------------------------------------------
# component propagation
# ---------------------------------------------------------------------------


def _densify(path: Sequence[complex], singular, h_max: float) -> list:
    out = [complex(path[0])]
    for a, b in zip(path[:-1], path[1:]):
        out.extend(_segment_samples(a, b, singular, h_max)[1:])
    return out


def propagate_components(path: Sequence[complex], start, case: CaseDefinition, *,
                         h_max: float = 0.005, margin: float = 1e-3) -> list:
    """Carry a component set along ``path``, recording each line crossing.

    Crossing the line ``i>j`` with ``Im f`` going from + to - adds the
    coefficient of ``i`` to ``j``; the opposite direction subtracts it.
    Lines whose HOSL multiplier is zero at the crossing are recorded as
    inactive and change nothing.  Returns a list of :class:`Crossing`.
    """
    comps = start if isinstance(start, ComponentSet) else ComponentSet.of(start)
    for s in case.singular_points:
        for z in path:
            if abs(z - s) < margin:
                raise ValueError(f"path passes through singular point {s}")
    pts = _densify(list(path), case.singular_points, h_max)
    ev = case.evaluator(pts[0])
    prev = ev.values(pts[0])
    out = []
    for z0, z1 in zip(pts[:-1], pts[1:]):
        cur = ev.values(z1)
        found = []
        for ln in case.lines:
            a, b = prev[ln.singulant], cur[ln.singulant]
            if np.sign(a.imag) == np.sign(b.imag) or a.imag == 0:
                continue
            t0, t1, fa = 0.0, 1.0, a.imag
            for _ in range(60):
                tm = 0.5 * (t0 + t1)
                fm = ev.values(z0 + tm * (z1 - z0))[ln.singulant].imag
                if np.sign(fm) == np.sign(fa):
                    t0, fa = tm, fm
                else:
                    t1 = tm
            tc = 0.5 * (t0 + t1)
            zc = z0 + tc * (z1 - z0)
            fc = ev.values(zc)[ln.singulant]
            if abs(fc.imag) > 1e-6 * max(1.0, abs(fc)) or fc.real <= 0:
                continue  # branch-cut jump or the Re f < 0 half
            found.append((tc, zc, ln, 1 if a.imag > 0 else -1))
        found.sort(key=lambda x: x[0])
        for k in range(1, len(found)):
            la, lb = found[k - 1][2], found[k][2]
            # coincident lines are harmless unless one feeds the other
            coupled = la.target == lb.source or lb.target == la.source
            if abs(found[k][1] - found[k - 1][1]) < 1e-8 and coupled:
                raise ValueError(f"path passes through a line intersection near {found[k][1]}")
        for tc, zc, ln, direction in found:
            active = True
            if ln.hosl is not None:
                active = classify_activity(zc, case.hosl_pairs[ln.hosl], case) != 0
            if active:
                c_src = comps.coefficient(ln.source)
                if c_src:
                    comps = comps.updated(ln.target, direction * c_src)
            out.append(Crossing(complex(zc), ln.label, direction, active, comps))
        ev.advance(z1)
        prev = cur
    return out


def circle_path(center: complex, radius: float, start_angle: float = -np.pi / 2,
                clockwise: bool = False, n: int = 400) -> list:
    """Closed polygonal loop around ``center``."""
    sgn = -1 if clockwise else 1
    th = start_angle + sgn * np.linspace(0, 2 * np.pi, n + 1)
    pts = list(center + radius * np.exp(1j * th))
    pts[-1] = pts[0]
    return pts


# ---------------------------------------------------------------------------
# atlas
# ---------------------------------------------------------------------------


def _segment_intersections(p: np.ndarray, q: np.ndarray, tol=1e-9):
    out = []
    if len(p) < 2 or len(q) < 2:
        return out
    a0, a1 = p[:-1], p[1:]
    for k in range(len(q) - 1):
        b0, b1 = q[k], q[k + 1]
        d1 = a1 - a0
        d2 = b1 - b0
        den = (np.conj(d1) * d2).imag
        ok = np.abs(den) > 1e-300
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (np.conj(b0 - a0) * d2).imag / den
            s = (np.conj(b0 - a0) * d1).imag / den
        hit = ok & (t >= -tol) & (t <= 1 + tol) & (s >= -tol) & (s <= 1 + tol)
        for i in np.nonzero(hit)[0]:
            out.append(complex(a0[i] + t[i] * d1[i]))
    return out


def build_atlas(case: CaseDefinition, **kw) -> dict:
    """Trace every line and HOSL of ``case``; collect pairwise intersections."""
    curves = []
    for ln in case.lines:
        curves.extend(trace_line(ln, case, **kw))
    for pair in case.hosl_pairs.values():
        curves.extend(trace_hosl(pair, case, **kw))
    inter = []
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            if curves[i].label == curves[j].label:
                continue
            for z in _segment_intersections(curves[i].points, curves[j].points):
                if min((abs(z - s) for s in case.singular_points), default=1) < 1e-6:
                    continue
                key = tuple(sorted((curves[i].label, curves[j].label)))
                if any((a, b) == key and abs(z - w) < 1e-6 for a, b, w in inter):
                    continue
                inter.append((key[0], key[1], z))
    return {"case": case.case_id, "curves": curves, "intersections": inter}


def _fmt(x: float) -> str:
    return repr(float(x)) if not np.isfinite(x) else format(float(x), ".17g")


def atlas_to_csv(atlas: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "label", "active"])
    for c in atlas["curves"]:
        for z, a in zip(c.points, c.active_mask):
            w.writerow([_fmt(z.real), _fmt(z.imag), c.label, int(bool(a))])
    return buf.getvalue()


def atlas_to_json(atlas: dict) -> str:
    doc = {
        "case": atlas["case"],
        "curves": [
            {
                "kind": c.kind,
                "label": c.label,
                "re": [_fmt(z.real) for z in c.points],
                "im": [_fmt(z.imag) for z in c.points],
                "active": [bool(a) for a in c.active_mask],
            }
            for c in atlas["curves"]
        ],
        "intersections": [
            {"labels": [a, b], "re": _fmt(z.real), "im": _fmt(z.imag)}
            for a, b, z in atlas["intersections"]
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=True)
