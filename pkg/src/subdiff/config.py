"""INI-style run configuration with line-numbered validation."""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, fields

from .data import parse_datum
from .scales import parse_norm, parse_scale
from .special import FractionalOrder

__all__ = ["ConfigError", "RunConfig", "parse_config", "serialize_config", "load_config"]


class ConfigError(ValueError):
    """Every violated constraint, one per line."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


_SCHEMA = {
    "problem": {"dim", "alpha"},
    "datum": {"spec"},
    "scale": {"scale"},
    "norm": {"norm"},
    "run": {"decades", "comparand", "method", "out", "theorem",
            "mass_tol", "cross_rtol", "moment_rtol", "rate_tol"},
}
_TOLERANCES = ("mass_tol", "cross_rtol", "moment_rtol", "rate_tol")


@dataclass(frozen=True)
class RunConfig:
    dim: int
    alpha: float
    datum: str = "gaussian()"
    scale: str = "characteristic(1.0,2.0)"
    norm: str = "p=inf"
    decades: tuple = (2, 6)
    comparand: str = "none"
    method: str = "auto"
    out: str = "."
    theorem: str = ""
    tolerances: tuple = field(default_factory=tuple)

    def tolerance(self, name, default):
        return dict(self.tolerances).get(name, default)

    def times(self):
        lo, hi = self.decades
        return tuple(10.0 ** k for k in range(lo, hi + 1))


def _line_numbers(text):
    where, section = {}, None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            where.setdefault((section, None), i)
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", s)
        if m and section is not None:
            where[(section, m.group(1).strip().lower())] = i
    return where


def parse_config(text) -> RunConfig:
    """Parse and validate; raises ConfigError listing every problem with its line."""
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        raise ConfigError(["line %s: %s" % (line if line is not None else "?", str(exc).splitlines()[0])]) from None
    where = _line_numbers(text)
    bad = []

    def err(section, key, msg):
        bad.append("line %s: %s" % (where.get((section, key), where.get((section, None), "?")), msg))

    for sec in cp.sections():
        if sec.lower() not in _SCHEMA:
            err(sec.lower(), None, "unknown section [%s]" % sec)
            continue
        for key in cp[sec]:
            if key not in _SCHEMA[sec.lower()]:
                err(sec.lower(), key, "unknown key %r in [%s]" % (key, sec))
    get = lambda s, k, d=None: cp.get(s, k, fallback=d) if cp.has_section(s) else d

    dim = alpha = None
    raw = get("problem", "dim")
    if raw is None:
        err("problem", None, "missing [problem] dim")
    else:
        try:
            dim = int(raw)
            if dim not in (1, 2, 3):
                err("problem", "dim", "dim must be 1, 2 or 3")
                dim = None
        except ValueError:
            err("problem", "dim", "dim must be an integer")
    raw = get("problem", "alpha")
    if raw is None:
        err("problem", None, "missing [problem] alpha")
    else:
        try:
            alpha = FractionalOrder(float(raw)).alpha
        except ValueError as exc:
            err("problem", "alpha", str(exc))

    vals = {}
    datum = get("datum", "spec", "gaussian()")
    if dim is not None:
        try:
            vals["datum"] = parse_datum(datum, dim).name
        except ValueError as exc:
            err("datum", "spec", str(exc))
    scale = get("scale", "scale", RunConfig.scale)
    try:
        sp = parse_scale(scale)
        if alpha is not None:
            sp.check(alpha)
        vals["scale"] = sp.text()
    except ValueError as exc:
        err("scale", "scale", str(exc))
    norm = get("norm", "norm", RunConfig.norm)
    try:
        ns = parse_norm(norm)
        if dim is not None:
            ns.check(dim)
        vals["norm"] = ns.text()
    except ValueError as exc:
        err("norm", "norm", str(exc))
    raw = get("run", "decades", "2,6")
    try:
        lo, hi = (int(x) for x in raw.split(","))
        if hi - lo < 3:
            raise ValueError("decades must span at least 4 points (e.g. 2,6)")
        vals["decades"] = (lo, hi)
    except ValueError as exc:
        err("run", "decades", "decades: %s" % exc)
    comp = get("run", "comparand", "none")
    if comp not in ("none", "MZ"):
        err("run", "comparand", "comparand must be none or MZ")
    method = get("run", "method", "auto")
    if method not in ("auto", "spectral", "convolution"):
        err("run", "method", "method must be auto, spectral or convolution")
    theorem = get("run", "theorem", "")
    if theorem and not re.fullmatch(r"V([1-9]|1[0-2])", theorem):
        err("run", "theorem", "theorem must be one of V1..V12")
    tols = []
    for k in _TOLERANCES:
        raw = get("run", k)
        if raw is None:
            continue
        try:
            v = float(raw)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError
            tols.append((k, v))
        except ValueError:
            err("run", k, "%s must be a positive number" % k)
    if bad:
        raise ConfigError(bad)
    return RunConfig(dim, alpha, vals["datum"], vals["scale"], vals["norm"], vals["decades"], comp, method,
                     get("run", "out", "."), theorem, tuple(tols))


def serialize_config(cfg: RunConfig) -> str:
    """Config text that parses back to an identical RunConfig."""
    lines = ["[problem]", "dim = %d" % cfg.dim, "alpha = %r" % cfg.alpha, "",
             "[datum]", "spec = %s" % cfg.datum, "",
             "[scale]", "scale = %s" % cfg.scale, "",
             "[norm]", "norm = %s" % cfg.norm, "",
             "[run]", "decades = %d,%d" % cfg.decades, "comparand = %s" % cfg.comparand,
             "method = %s" % cfg.method, "out = %s" % cfg.out]
    if cfg.theorem:
        lines.append("theorem = %s" % cfg.theorem)
    lines += ["%s = %r" % kv for kv in cfg.tolerances]
    return "\n".join(lines) + "\n"


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
