"""Command-line entry point.

Every command writes a single text artifact (CSV or JSON) to ``--out`` or to
stdout.  Numbers are written with 17 significant digits and exact integers as
digit strings, so identical configurations give byte-identical files.

Complex literals are written ``a+bi`` with no spaces; parts may be integers,
decimals or fractions (``1/2+1i``, ``-0.7+1i``, ``i``, ``3``).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from .coeffkernel import GaussianRational, Polynomial, RationalFunction

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_complex_exact",
    "format_complex",
    "parse_config",
    "run_command",
    "write_outputs",
    "table_to_json",
    "table_from_json",
    "main",
]

COMMANDS = ("coeffs", "borel-pade", "stokes-map", "latefit", "smoothing-scan", "oracle", "verify")
CASES = ("model", "trinh", "pearcey", "kelvin")


class ConfigError(ValueError):
    """Invalid command line or configuration file."""


# ---------------------------------------------------------------------------
# literals
# ---------------------------------------------------------------------------

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?"
_COMPLEX_RE = re.compile(
    rf"^(?P<re>[+-]?{_NUM})?(?:(?P<isign>[+-])?(?P<im>{_NUM})?i)?$"
)


def _frac(s: str) -> Fraction:
    if "/" in s:
        num, den = s.split("/")
        return Fraction(num) / Fraction(den)
    return Fraction(s)


def parse_complex_exact(text: str) -> GaussianRational:
    """Parse ``a+bi`` exactly (decimals are read as exact decimal fractions)."""
    s = str(text).strip()
    m = _COMPLEX_RE.match(s)
    if not s or m is None or (m.group("re") is None and not s.endswith("i")):
        raise ValueError(f"not a complex literal: {text!r} (expected a+bi)")
    re_part = _frac(m.group("re")) if m.group("re") else Fraction(0)
    im_part = Fraction(0)
    if s.endswith("i"):
        if m.group("re") is not None and m.group("isign") is None:
            # "2i" parses as re="2" followed by "i"
            im_part, re_part = re_part, Fraction(0)
        else:
            mag = _frac(m.group("im")) if m.group("im") else Fraction(1)
            im_part = -mag if m.group("isign") == "-" else mag
    return GaussianRational(re_part, im_part)


def format_real(x) -> str:
    x = float(x)
    if x == 0:
        return "0"
    return f"{x:.17g}"


def format_complex(z) -> str:
    z = complex(z)
    sign = "-" if (z.imag < 0 or (z.imag == 0 and math.copysign(1, z.imag) < 0)) else "+"
    return f"{format_real(z.real)}{sign}{format_real(abs(z.imag))}i"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _complex_list(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(parse_complex_exact(str(t)) for t in text)
    return tuple(parse_complex_exact(t) for t in str(text).split(";") if t)


PARAM_TYPES: dict[str, Callable] = {
    "n": int, "p": int, "N": int, "window": int, "depth": int, "num": int,
    "branch": int, "threads": int,
    "eps": float, "tol": float, "alpha": float, "spacing": float,
    "phi": float, "rho_min": float, "rho_max": float,
    "z": _complex_list, "a": parse_complex_exact, "path": _complex_list,
    "kind": str, "format": str, "out": str,
}

# required keys by (command, case); None means any case
REQUIRED = {
    ("coeffs", None): ("n",),
    ("coeffs", "trinh"): ("n", "a"),
    ("borel-pade", None): ("z",),
    ("stokes-map", "trinh"): ("a",),
    ("latefit", None): ("z",),
    ("latefit", "trinh"): ("z", "a"),
    ("oracle", None): (),
    ("verify", "trinh"): ("a",),
}

DEFAULTS = {
    "coeffs": {"kind": "base"},
    "borel-pade": {"N": 250},
    "stokes-map": {"format": "csv"},
    "latefit": {"N": 200, "kind": "base", "branch": 1},
    "smoothing-scan": {"n": 60, "phi": 0.3 * math.pi, "rho_min": 0.25, "rho_max": 0.85, "num": 61},
    "oracle": {"eps": 0.05, "tol": 1e-32, "spacing": 0.02},
    "verify": {},
}

CASE_SUPPORT = {
    "coeffs": ("model", "trinh"),
    "borel-pade": ("model",),
    "stokes-map": CASES,
    "latefit": ("model", "trinh"),
    "smoothing-scan": ("model",),
    "oracle": ("model", "pearcey"),
    "verify": CASES,
}


@dataclass(frozen=True)
class RunConfig:
    case: str
    command: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0

    def get(self, key, default=None):
        return self.parameters.get(key, default)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hosplab",
        description="Higher-order Stokes phenomenon toolkit. Complex values are written "
                    "a+bi with no spaces (e.g. 0.5+1i, -1-1i, 1/2+i).",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON file of parameters; flags override its values")
    ap.add_argument("--case", choices=CASES)
    ap.add_argument("--seed", type=int)
    for key in PARAM_TYPES:
        # all parameters are kept as text here and typed in one place
        ap.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, metavar=key.upper())
    return ap


def _coerce(key: str, value):
    conv = PARAM_TYPES.get(key)
    if conv is None:
        raise ConfigError(f"unknown parameter '{key}'")
    try:
        if conv is int and isinstance(value, float) and not value.is_integer():
            raise ValueError
        return conv(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parameter '{key}' has an invalid value {value!r}") from exc


_VALUE_FLAGS = {"--config", "--case", "--seed"} | {f"--{k.replace('_', '-')}" for k in PARAM_TYPES}


def _glue_negative_values(argv: list[str]) -> list[str]:
    # argparse would read "-1+1i" after --a as a flag; bind it as --a=-1+1i
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            elif nxt.startswith("-") and nxt not in _VALUE_FLAGS and not nxt.startswith("--"):
                out.append(f"{tok}={nxt}")
            else:
                out.extend([tok, nxt])
        else:
            out.append(tok)
    return out


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    """Parse ``argv`` (and an optional ``--config`` JSON file) into a RunConfig."""
    ap = _build_parser()
    args = list(argv) if argv is not None else sys.argv[1:]
    try:
        ns = ap.parse_args(_glue_negative_values(args))
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise ConfigError("could not parse the command line (unknown command or flag)") from exc
    raw: dict = {}
    case, seed = None, 0
    if ns.config:
        with open(ns.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("configuration file must hold a JSON object")
        case = data.pop("case", None)
        seed = data.pop("seed", 0)
        data.pop("command", None)
        raw.update(data)
    for key in PARAM_TYPES:
        v = getattr(ns, key)
        if v is not None:
            raw[key] = v
    if ns.case is not None:
        case = ns.case
    if ns.seed is not None:
        seed = ns.seed
    return validate_config(ns.command, case or "model", raw, seed)


def validate_config(command: str, case: str, raw: dict, seed: int = 0) -> RunConfig:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command '{command}'")
    if case not in CASES:
        raise ConfigError(f"parameter 'case' has an invalid value {case!r}")
    if case not in CASE_SUPPORT[command]:
        raise ConfigError(f"command '{command}' does not support case '{case}'")
    params = dict(DEFAULTS.get(command, {}))
    for k, v in raw.items():
        params[k] = _coerce(k, v)
    need = REQUIRED.get((command, case), REQUIRED.get((command, None), ()))
    for key in need:
        if params.get(key) is None:
            raise ConfigError(f"missing required parameter '{key}' for {command} --case {case}")
    try:
        seed = int(seed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parameter 'seed' has an invalid value {seed!r}") from exc
    return RunConfig(case, command, params, seed)


def worker_count(config: RunConfig) -> int:
    n = config.get("threads")
    if n is None:
        env = os.environ.get("HOSP_LAB_THREADS")
        n = int(env) if env and env.strip().isdigit() else 1
    return max(1, int(n))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _gauss_json(g: GaussianRational) -> dict:
    return {"re": [str(g.re.numerator), str(g.re.denominator)],
            "im": [str(g.im.numerator), str(g.im.denominator)]}


def _gauss_from_json(d: dict) -> GaussianRational:
    return GaussianRational(Fraction(int(d["re"][0]), int(d["re"][1])),
                            Fraction(int(d["im"][0]), int(d["im"][1])))


def _poly_json(p: Polynomial) -> dict:
    re_, im_, den = p.gaussian_integer_parts()
    return {"re": [str(c) for c in re_], "im": [str(c) for c in im_], "den": str(den)}


def _poly_from_json(d: dict) -> Polynomial:
    return Polynomial._raw([int(c) for c in d["re"]], [int(c) for c in d["im"]], int(d["den"]))


def _rf_json(f: RationalFunction) -> dict:
    return {
        "numerator": _poly_json(f.numerator),
        "poles": [{"root": _gauss_json(r), "order": k} for r, k in f.factors.items() if k],
        "extra": _poly_json(f.extra),
    }


def _rf_from_json(d: dict) -> RationalFunction:
    fac = {_gauss_from_json(p["root"]): int(p["order"]) for p in d["poles"]}
    return RationalFunction(_poly_from_json(d["numerator"]), fac, _poly_from_json(d["extra"]))


def table_to_json(table) -> str:
    """Exact coefficient table as JSON (numerators/denominators as digit strings)."""
    params = {k: (_gauss_json(v) if isinstance(v, GaussianRational) else v)
              for k, v in sorted(table.params.items())}
    doc = {
        "case": table.case_id,
        "kind": table.kind,
        "normalization": table.normalization,
        "params": params,
        "entries": [_rf_json(f) for f in table.entries],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def table_from_json(text: str):
    from .recurrences import CoeffTable
    doc = json.loads(text)
    params = {k: (_gauss_from_json(v) if isinstance(v, dict) else v) for k, v in doc["params"].items()}
    return CoeffTable(doc["case"], doc["kind"], tuple(_rf_from_json(e) for e in doc["entries"]),
                      doc["normalization"], params)


def _fractions_json(case: str, kind: str, cs, params: dict) -> str:
    doc = {"case": case, "kind": kind, "params": params,
           "entries": [[str(c.numerator), str(c.denominator)] for c in cs]}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _jsonable(x):
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return format_real(x)
    if isinstance(x, (complex, np.complexfloating, mpmath.mpc)):
        return format_complex(complex(x))
    if isinstance(x, mpmath.mpf):
        return format_real(float(x))
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return str(x)


def write_outputs(artifacts: dict, paths: dict | None = None, stream=None) -> list:
    """Write each named text artifact to ``paths[name]`` (or ``stream``).

    Files are written with ``\\n`` line endings regardless of platform.
    """
    written = []
    for name in sorted(artifacts):
        text = artifacts[name]
        path = (paths or {}).get(name)
        if path:
            with open(path, "w", newline="\n", encoding="utf-8") as fh:
                fh.write(text)
            written.append(path)
        else:
            (stream or sys.stdout).write(text)
    return written


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _first_z(cfg: RunConfig) -> GaussianRational:
    zs = cfg.get("z")
    if not zs:
        raise ConfigError("missing required parameter 'z'")
    return zs[0]


def _cmd_coeffs(cfg: RunConfig) -> str:
    from . import recurrences as rc
    n, kind = cfg.get("n"), cfg.get("kind")
    if n < 0:
        raise ConfigError("parameter 'n' must be >= 0")
    if cfg.case == "model":
        if kind == "base":
            return table_to_json(rc.model_base_coefficients(n))
        if kind == "amplitude":
            return table_to_json(rc.model_amplitude_Bp(n))
    else:
        if kind == "base":
            return table_to_json(rc.trinh_base_coefficients(n, cfg.get("a")))
        if kind == "amplitude":
            br = cfg.get("branch", 1)
            return _fractions_json("trinh", "amplitude", rc.trinh_amplitude_coefficients(n, br),
                                   {"branch": str(br)})
    raise ConfigError(f"parameter 'kind' has an invalid value {kind!r}")


def _pade_one(args):
    z, N = args
    from .borel import classify_poles, model_borel_series, pade_build, pade_poles
    series, scale = model_borel_series(z, 2 * N)
    approx = pade_build(series, N, scale=scale)
    poles = pade_poles(approx)
    labels = classify_poles([p for p, _ in poles])
    return z, [(p, r, lab) for (p, r), lab in zip(poles, labels)]


def _cmd_borel_pade(cfg: RunConfig) -> str:
    N = cfg.get("N")
    jobs = [(complex(z), N) for z in cfg.get("z")]
    workers = min(worker_count(cfg), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_pade_one, jobs))
    else:
        results = [_pade_one(j) for j in jobs]
    lines = ["z,re_w,im_w,residual,label"]
    for z, poles in results:
        for p, r, lab in poles:
            lines.append(f"{format_complex(z)},{format_real(p.real)},{format_real(p.imag)},"
                         f"{format_real(r) if math.isfinite(r) else 'inf'},{lab}")
    return "\n".join(lines) + "\n"


def _case(cfg: RunConfig):
    from .singulants import get_case
    return get_case(cfg.case, a=cfg.get("a"))


def _cmd_stokes_map(cfg: RunConfig) -> str:
    from .stokesgeo import atlas_to_csv, atlas_to_json, build_atlas
    atlas = build_atlas(_case(cfg))
    fmt = cfg.get("format")
    if fmt == "csv":
        return atlas_to_csv(atlas)
    if fmt == "json":
        return atlas_to_json(atlas)
    raise ConfigError(f"parameter 'format' has an invalid value {fmt!r}")


def fit_to_json(fit, extra: dict | None = None) -> str:
    doc = {
        "chi_hat": fit.chi_hat,
        "alpha_hat": fit.alpha_hat,
        "prefactor_hat": fit.prefactor_hat,
        "status": fit.status,
        "convergence_table": fit.convergence_table,
        "diagnostics": fit.diagnostics,
    }
    doc.update(extra or {})
    return json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n"


def _cmd_latefit(cfg: RunConfig) -> str:
    from . import recurrences as rc
    from .latefit import evaluate_table, fit_factorial_power
    z = _first_z(cfg)
    N, kind, alpha = cfg.get("N"), cfg.get("kind"), cfg.get("alpha")
    if cfg.case == "model":
        if kind == "base":
            vals = evaluate_table(rc.model_base_coefficients(N), z)
        elif kind == "amplitude":
            vals = evaluate_table(rc.model_amplitude_Bp(N), z)
        else:
            raise ConfigError(f"parameter 'kind' has an invalid value {kind!r}")
    else:
        if kind == "base":
            vals = evaluate_table(rc.trinh_base_coefficients(N, cfg.get("a")), z)
        elif kind == "amplitude":
            br = cfg.get("branch")
            cs = rc.trinh_amplitude_coefficients(N, br)
            with mpmath.workdps(40):
                s = mpmath.sqrt(GaussianRational.coerce(z).to_mpc())
                vals = [mpmath.mpf(c.numerator) / c.denominator * s ** (-3 * p) for p, c in enumerate(cs)]
        else:
            raise ConfigError(f"parameter 'kind' has an invalid value {kind!r}")
    fit = fit_factorial_power(vals, alpha)
    return fit_to_json(fit, {"z": complex(z), "N": N, "kind": kind, "case": cfg.case})


def _cmd_smoothing(cfg: RunConfig) -> str:
    from . import recurrences as rc
    from .latefit import model_radial_arc, smoothing_scan
    n = cfg.get("n")
    arc = model_radial_arc(cfg.get("phi"), cfg.get("rho_min"), cfg.get("rho_max"), cfg.get("num"))
    tables = (rc.model_base_coefficients(n), rc.model_amplitude_Bp(n))
    return smoothing_scan(arc, n, _case(cfg), tables).to_csv()


def _cmd_oracle(cfg: RunConfig) -> str:
    from . import odeoracle as oo
    from .recurrences import model_base_coefficients
    case = _case(cfg)
    eps, tol = cfg.get("eps"), cfg.get("tol")
    path = cfg.get("path")
    if case.case_id == "model":
        table = model_base_coefficients(cfg.get("N") or 320)
        pts = [complex(p) for p in path] if path else [oo.MODEL_SEED_POINT, -1 - 0.5j, -1 + 0.5j,
                                                        -0.5 + 0.5j, 1 + 0.5j, 2 + 0.5j]
        seed = oo.seed_from_base_series(pts[0], eps, case, table)
        run = oo.integrate_path(oo.OdePath(tuple(pts), eps, seed.values, "asymptotic_seed",
                                           singular_points=case.singular_points),
                                case, tol, sample_spacing=cfg.get("spacing"))
        return oo.oracle_to_csv(run, oo.extract_exponential(run, case, table))
    x = case.constants["crossing_point"]
    pts = [complex(p) for p in path] if path else [3 * np.exp(3j * math.pi / 8), complex(x, 0.3)]
    seed = oo.seed_from_base_series(pts[0], eps, case)
    run = oo.integrate_path(oo.OdePath(tuple(pts), eps, seed.values, "asymptotic_seed"),
                            case, tol, sample_spacing=cfg.get("spacing"))
    return oo.oracle_to_csv(run)


def _cmd_verify(cfg: RunConfig) -> str:
    from .verify_checks import run_checks
    ok, report = run_checks(cfg.case, a=cfg.get("a"))
    if not ok:
        raise VerifyFailed(report)
    return report


class VerifyFailed(RuntimeError):
    pass


_HANDLERS = {
    "coeffs": _cmd_coeffs,
    "borel-pade": _cmd_borel_pade,
    "stokes-map": _cmd_stokes_map,
    "latefit": _cmd_latefit,
    "smoothing-scan": _cmd_smoothing,
    "oracle": _cmd_oracle,
    "verify": _cmd_verify,
}


def run_command(config: RunConfig) -> tuple[int, dict]:
    """Run one command; returns ``(exit_status, {artifact_name: text})``."""
    np.random.seed(config.seed)
    try:
        text = _HANDLERS[config.command](config)
    except VerifyFailed as exc:
        return 1, {"report": str(exc)}
    except ConfigError:
        raise
    except (ValueError, ArithmeticError, RuntimeError, KeyError) as exc:
        raise RuntimeError(f"{config.command} --case {config.case}: {exc}") from exc
    return 0, {"output": text}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        status, arts = run_command(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = cfg.get("out")
    write_outputs(arts, {"output": out, "report": out} if out else None)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
