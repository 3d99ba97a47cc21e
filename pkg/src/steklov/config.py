"""Experiment configuration: JSON schema, shorthand field terms and named presets.

A config document looks like::

    {
      "mode": "compare",
      "name": "fig3a",
      "domain": {"kind": "annulus", "d": 2, "r_i": 0.4, "r_o": 1.0},
      "field": {"outer": ["2cos(6θ)"], "inner": ["2cos(6θ)"]},
      "mps": {"L": 7, "K_o": 28, "K_i": 20, "t_grid": [...], "count": 20},
      "eigen": [{"n": 3, "k": 1}, {"n": 3, "k": 2}],
      "count": 10
    }

Field terms are either shorthand strings or explicit objects
``{"l": 6, "m": 1, "coefficient": 3.5449, "basis": "real"}``. Complex
coefficients are written as ``[re, im]``. Shorthand is expanded on parsing, so
printing a config always emits explicit terms.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import json
import math
import re
import warnings

from . import harmonics as sh
from .mps import DEFAULT_T_GRID, MpsConfig
from .perturbation import DeformationField
from .spectra import DomainSpec

MODES = ("spectrum", "emp", "branches", "compare")
PRESETS = ("fig3a", "fig3b", "fig4", "fig5", "fig6")


class ConfigError(ValueError):
    """Schema or consistency violation, with a dotted path to the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Term:
    l: int
    m: int
    coefficient: complex
    basis: str = "real"


@dataclass(frozen=True)
class EigenSelector:
    n: int
    k: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    domain: DomainSpec
    field: Dict[str, Tuple[Term, ...]] = field(default_factory=dict)
    mps: MpsConfig = MpsConfig()
    eigen: Tuple[EigenSelector, ...] = ()
    count: int = 10
    name: str = "experiment"

    def deformation(self):
        """The configured field as a complex-basis DeformationField."""
        d = self.domain.d
        out = {}
        for label, terms in self.field.items():
            coeffs = {}
            for term in terms:
                idx = sh.HarmonicIndex(term.l, term.m)
                sh.validate_index(idx, d)
                part = {idx: term.coefficient}
                if term.basis == "real":
                    part = sh.coeff_conjugate_transform(part, "real->complex", d)
                for key, c in part.items():
                    coeffs[key] = coeffs.get(key, 0) + c
            out[label] = coeffs
        return DeformationField(d, out, "complex")


# ---------------------------------------------------------------- shorthand

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TRIG = re.compile(r"^(?P<c>" + _NUM + r")?\*?(?P<f>cos|sin)\((?P<l>\d*)\*?(?:θ|theta)\)$")
_YSUB = re.compile(r"^(?P<c>" + _NUM + r")?\*?Y_\{(?P<l>\d+),(?P<m>[+-]?\d+)\}$")
_YSUP = re.compile(r"^(?P<c>" + _NUM + r")?\*?Y_\{?(?P<l>\d+)\}?\^\{?(?P<m>[+-]?\d+)\}?$")
_CONST = re.compile(r"^(?P<c>" + _NUM + r")$")


def _split_terms(text):
    s = text.replace(" ", "").replace("−", "-")
    if not s:
        return []
    parts, start, depth = [], 0, 0
    for i, ch in enumerate(s):
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start and s[i - 1] not in "eE*^_":
            parts.append(s[start:i])
            start = i
    parts.append(s[start:])
    return parts


def _coef(group):
    if group in (None, "", "+"):
        return 1.0
    if group == "-":
        return -1.0
    return float(group)


def parse_shorthand(text, d):
    """Expand real-harmonic shorthand into explicit real-basis terms.

    Planar terms: ``c cos(lθ)``, ``c sin(lθ)`` and constants, rescaled to the
    orthonormal real basis (cos(lθ) = sqrt(pi) Y_{l,1}, 1 = sqrt(2 pi) Y_{0,1}).
    Any dimension: ``c Y_{l,m}`` or ``c Y_l^m`` for the real harmonic (l, m).
    """
    terms = []
    for raw in _split_terms(text):
        sign = 1.0
        body = raw
        if body[:1] in "+-" and not _CONST.match(body):
            sign = -1.0 if body[0] == "-" else 1.0
            body = body[1:]
        if (m := _TRIG.match(body)) is not None:
            if d != 2:
                raise ValueError(f"trigonometric shorthand {raw!r} needs d=2")
            l = int(m["l"] or 1)
            c = sign * _coef(m["c"])
            if l == 0:
                if m["f"] == "sin":
                    continue
                terms.append(Term(0, 1, complex(c * math.sqrt(2 * math.pi))))
            else:
                terms.append(Term(l, 1 if m["f"] == "cos" else 2, complex(c * math.sqrt(math.pi))))
            continue
        m = _YSUB.match(body) or _YSUP.match(body)
        if m is not None:
            terms.append(Term(int(m["l"]), int(m["m"]), complex(sign * _coef(m["c"]))))
            continue
        if (m := _CONST.match(body)) is not None:
            c = sign * float(m["c"])
            terms.append(Term(*sh.constant_index(d), complex(c * math.sqrt(sh.sphere_area(d)))))
            continue
        raise ValueError(f"cannot parse field term {raw!r}")
    return terms


# ---------------------------------------------------------------- parsing

def _require(obj, key, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigError(f"{path}.{key}", "missing")
    val = obj[key]
    if kind is not None and (not isinstance(val, kind) or isinstance(val, bool)):
        raise ConfigError(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return val


def _number(val, path):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(path, "expected a number")
    return float(val)


def _int(val, path, lo=None):
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(path, "expected an integer")
    if lo is not None and val < lo:
        raise ConfigError(path, f"must be >= {lo}")
    return val


def _parse_domain(obj):
    path = "domain"
    kind = _require(obj, "kind", path, str)
    d = _int(_require(obj, "d", path), f"{path}.d", 2)
    r_o = _number(obj.get("r_o", 1.0), f"{path}.r_o")
    try:
        if kind == "ball":
            if obj.get("r_i") is not None:
                raise ConfigError(f"{path}.r_i", "a ball has no inner radius")
            return DomainSpec.ball(d, r_o)
        if kind == "annulus":
            r_i = _number(_require(obj, "r_i", path), f"{path}.r_i")
            return DomainSpec.annulus(d, r_i, r_o)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}")


def _parse_coefficient(val, path):
    if isinstance(val, list):
        if len(val) != 2:
            raise ConfigError(path, "complex coefficient must be [re, im]")
        return complex(_number(val[0], path), _number(val[1], path))
    return complex(_number(val, path))


def _parse_terms(items, d, path):
    if isinstance(items, str):
        items = [items]
    if not isinstance(items, list):
        raise ConfigError(path, "expected a list of terms")
    out = []
    for i, item in enumerate(items):
        p = f"{path}[{i}]"
        if isinstance(item, str):
            try:
                out.extend(parse_shorthand(item, d))
            except ValueError as exc:
                raise ConfigError(p, str(exc)) from exc
            continue
        if not isinstance(item, dict):
            raise ConfigError(p, "expected a shorthand string or a term object")
        basis = item.get("basis", "real")
        if basis not in sh.VARIANTS:
            raise ConfigError(f"{p}.basis", f"unknown basis {basis!r}")
        term = Term(_int(_require(item, "l", p), f"{p}.l", 0), _int(_require(item, "m", p), f"{p}.m"),
                    _parse_coefficient(_require(item, "coefficient", p), f"{p}.coefficient"), basis)
        try:
            sh.validate_index(sh.HarmonicIndex(term.l, term.m), d)
        except ValueError as exc:
            raise ConfigError(p, str(exc)) from exc
        out.append(term)
    return tuple(out)


def _parse_mps(obj, d):
    if obj is None:
        return MpsConfig()
    if not isinstance(obj, dict):
        raise ConfigError("mps", "expected an object")
    known = {"L", "K_o", "K_i", "t_grid", "count", "cutoff", "points"}
    extra = set(obj) - known
    if extra:
        raise ConfigError("mps", f"unknown keys {sorted(extra)}")
    kw = {}
    if "L" in obj:
        kw["L"] = _int(obj["L"], "mps.L", 0)
    for key in ("K_o", "K_i"):
        if obj.get(key) is not None:
            kw[key] = _int(obj[key], f"mps.{key}", 1)
    if "count" in obj:
        kw["count"] = _int(obj["count"], "mps.count", 1)
    if "cutoff" in obj:
        kw["cutoff"] = _number(obj["cutoff"], "mps.cutoff")
    if "points" in obj:
        if obj["points"] not in ("fibonacci", "deserno"):
            raise ConfigError("mps.points", "expected 'fibonacci' or 'deserno'")
        kw["points"] = obj["points"]
    if "t_grid" in obj:
        grid = obj["t_grid"]
        if not isinstance(grid, list) or not grid:
            raise ConfigError("mps.t_grid", "expected a nonempty list")
        vals = tuple(sorted(_number(v, f"mps.t_grid[{i}]") for i, v in enumerate(grid)))
        if 0.0 not in vals:
            raise ConfigError("mps.t_grid", "must contain 0")
        kw["t_grid"] = vals
    return MpsConfig(**kw)


def config_from_dict(obj):
    if not isinstance(obj, dict):
        raise ConfigError("$", "config must be a JSON object")
    mode = _require(obj, "mode", "$", str)
    if mode not in MODES:
        raise ConfigError("mode", f"unknown mode {mode!r}; expected one of {MODES}")
    domain = _parse_domain(_require(obj, "domain", "$", dict))
    fields = {}
    raw_field = obj.get("field", {})
    if not isinstance(raw_field, dict):
        raise ConfigError("field", "expected an object keyed by boundary")
    for label, items in raw_field.items():
        if label not in ("outer", "inner"):
            raise ConfigError(f"field.{label}", "boundary must be 'outer' or 'inner'")
        if label == "inner" and domain.kind != "annulus":
            raise ConfigError("field.inner", "a ball has no inner boundary")
        fields[label] = _parse_terms(items, domain.d, f"field.{label}")
    eigen = []
    for i, sel in enumerate(obj.get("eigen", [])):
        p = f"eigen[{i}]"
        n = _int(_require(sel, "n", p), f"{p}.n", 0)
        k = _int(sel.get("k", 1), f"{p}.k", 1)
        if k > (2 if domain.kind == "annulus" else 1):
            raise ConfigError(f"{p}.k", f"branch {k} does not exist for a {domain.kind}")
        eigen.append(EigenSelector(n, k))
    if mode in ("emp", "compare") and not eigen:
        raise ConfigError("eigen", f"mode {mode!r} needs at least one eigenvalue selector")
    if mode in ("emp", "branches", "compare") and not any(fields.values()):
        if "field" not in obj:
            raise ConfigError("field", f"mode {mode!r} needs a field block")
    if domain.d not in (2, 3) and mode != "spectrum":
        raise ConfigError("domain.d", f"mode {mode!r} is implemented for d in (2, 3)")
    mps = _parse_mps(obj.get("mps"), domain.d)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            mps.resolve(domain)
        except ValueError as exc:
            raise ConfigError("mps", str(exc)) from exc
    count = _int(obj.get("count", 10), "count", 1)
    name = obj.get("name", "experiment")
    if not isinstance(name, str) or not re.fullmatch(r"[A-Za-z0-9_.-]+", name):
        raise ConfigError("name", "must be a nonempty file-name-safe string")
    return ExperimentConfig(mode, domain, fields, mps, tuple(eigen), count, name)


def parse_config(text):
    """Parse and validate a JSON config document."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from exc
    return config_from_dict(obj)


def _coef_json(c):
    c = complex(c)
    return c.real if c.imag == 0 else [c.real, c.imag]


def config_to_dict(cfg):
    dom = {"kind": cfg.domain.kind, "d": cfg.domain.d, "r_o": cfg.domain.r_o}
    if cfg.domain.r_i is not None:
        dom["r_i"] = cfg.domain.r_i
    mps = {"L": cfg.mps.L, "t_grid": list(cfg.mps.t_grid), "count": cfg.mps.count,
           "cutoff": cfg.mps.cutoff, "points": cfg.mps.points}
    for key in ("K_o", "K_i"):
        if getattr(cfg.mps, key) is not None:
            mps[key] = getattr(cfg.mps, key)
    return {
        "mode": cfg.mode,
        "name": cfg.name,
        "domain": dom,
        "field": {label: [{"l": t.l, "m": t.m, "coefficient": _coef_json(t.coefficient), "basis": t.basis}
                          for t in terms] for label, terms in cfg.field.items()},
        "mps": mps,
        "eigen": [{"n": s.n, "k": s.k} for s in cfg.eigen],
        "count": cfg.count,
    }


def config_to_json(cfg):
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------- presets

# Finer grid for fast-moving clusters (slopes near 100 cross neighbours by t=0.004).
FINE_T_GRID = tuple([-1e-4 * k for k in range(10, 0, -1)] + [0.0] + [1e-4 * k for k in range(1, 11)])
REFERENCE_MPS = MpsConfig(L=7, K_o=28, K_i=20, t_grid=FINE_T_GRID, count=30)
MPS_3D = MpsConfig(L=14, t_grid=tuple(2e-4 * k for k in range(-5, 6)), count=40)


def _cfg(name, domain, outer, inner, mps, eigen, d):
    fields = {"outer": tuple(parse_shorthand(outer, d))}
    if inner is not None:
        fields["inner"] = tuple(parse_shorthand(inner, d))
    return ExperimentConfig("compare", domain, {k: v for k, v in fields.items()}, mps,
                            tuple(EigenSelector(n, k) for n, k in eigen), 10, name)


def preset(name):
    """Named experiment(s) mirroring the published figures; returns a list of configs."""
    ann2 = DomainSpec.annulus(2, 0.4)
    disk = DomainSpec.ball(2)
    ann3 = DomainSpec.annulus(3, 0.4)
    ball3 = DomainSpec.ball(3)
    low = [(n, k) for n in range(0, 4) for k in (1, 2)]
    if name == "fig3a":
        return [_cfg("fig3a", ann2, "2cos(6θ)", "2cos(6θ)", REFERENCE_MPS, low, 2)]
    if name == "fig3b":
        return [_cfg("fig3b", ann2, "2cos(5θ)", "2cos(5θ)", REFERENCE_MPS, low, 2)]
    if name == "fig4":
        m_disk = replace(REFERENCE_MPS, t_grid=DEFAULT_T_GRID, count=15)
        m_ann = replace(REFERENCE_MPS, L=12, K_o=None, K_i=None, t_grid=FINE_T_GRID, count=40)
        return [
            _cfg("fig4_disk_cos7", disk, "cos(7θ)", None, m_disk, [(5, 1)], 2),
            _cfg("fig4_disk_sin5", disk, "sin(5θ)", None, m_disk, [(5, 1)], 2),
            _cfg("fig4_annulus_cos7", ann2, "cos(7θ)", "cos(7θ)", m_ann, [(5, 2)], 2),
            _cfg("fig4_annulus_sin5", ann2, "sin(5θ)", "0", m_ann, [(5, 2)], 2),
        ]
    if name == "fig5":
        return [_cfg("fig5", ann3, "Y_{8,1}", "Y_{8,1}", MPS_3D, [(n, 1) for n in range(1, 6)], 3)]
    if name == "fig6":
        m_ball = replace(MPS_3D, L=10, t_grid=DEFAULT_T_GRID, count=16)
        m_ann = replace(MPS_3D, t_grid=DEFAULT_T_GRID, count=80)
        return [
            _cfg("fig6_ball_Y71", ball3, "Y_7^1", None, m_ball, [(2, 1)], 3),
            _cfg("fig6_ball_Y55", ball3, "Y_5^5", None, m_ball, [(2, 1)], 3),
            _cfg("fig6_annulus_Y71", ann3, "Y_7^1", "Y_7^1", m_ann, [(2, 2)], 3),
            _cfg("fig6_annulus_Y55", ann3, "Y_5^5", "Y_5^5", m_ann, [(2, 2)], 3),
        ]
    raise ConfigError("preset", f"unknown preset {name!r}; expected one of {PRESETS}")
