"""Problem configuration files and deterministic report output.

Configurations are INI files (configparser) with sections::

    [chart]
    dimension = 3
    coordinates = x1 x2 x3
    box = -0.5 0.5 ; -0.5 0.5 ; -0.5 0.5

    [metric]            # lower-triangle entries g21, g31, g32 default to 0
    g11 = 1
    g22 = 1 + 0.05*sin(x1)
    g33 = 1

    [density]
    f = 1

    [parameters]
    m = 1.0
    mu = 0.0

    [solver]
    order = 2

    [sampling]
    points = 10
    seed = 7

    [tolerances]        # optional overrides
    residual = 1e-9

Reports are flat "key = value" text: schema_version first, then sorted
keys, with floats at 17 significant digits so doubles round-trip; the
timings block comes last so byte comparison modulo timings is a prefix
comparison.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from typing import Optional

from .expressions import parse_expression
from .fields import Chart, SymTensor2Field
from .invariants import MetricMeasureSpace

__all__ = ["ProblemConfig", "ConfigError", "Report", "load_config",
           "format_value", "REPORT_SCHEMA_VERSION"]

REPORT_SCHEMA_VERSION = "1"


class ConfigError(ValueError):
    """The configuration file does not define a valid problem."""


@dataclass
class ProblemConfig:
    dimension: int
    coordinates: tuple
    box: tuple
    metric_exprs: dict
    f_expr: str
    m: float
    mu: float
    order: int
    points: int
    seed: int
    tolerances: dict

    def chart(self) -> Chart:
        return Chart(self.coordinates, box=self.box)

    def space(self) -> MetricMeasureSpace:
        chart = self.chart()
        comps = {}
        for (i, j), expr in self.metric_exprs.items():
            try:
                comps[(i, j)] = parse_expression(expr, chart)
            except Exception as exc:
                raise ConfigError(f"metric entry g{i+1}{j+1} = {expr!r}: {exc}")
        try:
            f = parse_expression(self.f_expr, chart)
        except Exception as exc:
            raise ConfigError(f"density f = {self.f_expr!r}: {exc}")
        g = SymTensor2Field(chart, comps)
        space = MetricMeasureSpace(chart, g, f, self.m, self.mu)
        space.check_at(space.sample(self.points, self.seed))
        return space

    def tolerance(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


def _parse_box(text: str, dim: int):
    parts = [p.strip() for p in text.split(";")]
    if len(parts) != dim:
        raise ConfigError(f"box needs {dim} intervals separated by ';', "
                          f"got {len(parts)}")
    box = []
    for part in parts:
        vals = part.split()
        if len(vals) != 2:
            raise ConfigError(f"box interval {part!r} must be two numbers")
        lo, hi = float(vals[0]), float(vals[1])
        if not lo < hi:
            raise ConfigError(f"box interval {part!r} is empty")
        box.append((lo, hi))
    return tuple(box)


def load_config(path: str) -> ProblemConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read configuration file {path!r}")
    try:
        dim = cp.getint("chart", "dimension")
        names = tuple(cp.get("chart", "coordinates").split())
        box = _parse_box(cp.get("chart", "box"), dim)
        f_expr = cp.get("density", "f")
        m = cp.getfloat("parameters", "m")
        mu = cp.getfloat("parameters", "mu")
    except (configparser.Error, ValueError) as exc:
        raise ConfigError(str(exc))
    if len(names) != dim:
        raise ConfigError(f"{dim} coordinates expected, got {len(names)}")
    metric = {}
    for i in range(dim):
        for j in range(i + 1):
            key = f"g{i+1}{j+1}"
            if cp.has_option("metric", key):
                metric[(j, i)] = cp.get("metric", key)
            elif i == j:
                raise ConfigError(f"metric entry {key} is required")
    order = cp.getint("solver", "order", fallback=2)
    points = cp.getint("sampling", "points", fallback=10)
    seed = cp.getint("sampling", "seed", fallback=0)
    tolerances = {}
    if cp.has_section("tolerances"):
        for key, val in cp.items("tolerances"):
            tolerances[key] = float(val)
    return ProblemConfig(dim, names, box, metric, f_expr, m, mu, order,
                         points, seed, tolerances)


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, int):
        return str(v)
    return str(v)


class Report:
    """Ordered key-value report with a deterministic serialization."""

    def __init__(self, tool_version: str):
        self.entries = {"schema_version": REPORT_SCHEMA_VERSION,
                        "tool_version": tool_version}
        self.timings = {}
        self.failures = []

    def put(self, key: str, value):
        self.entries[key] = value

    def put_check(self, key: str, value: float, limit: float):
        """Record a residual check; failures flip the exit status."""
        ok = bool(abs(float(value)) <= float(limit))
        self.entries[f"check.{key}.value"] = float(value)
        self.entries[f"check.{key}.limit"] = float(limit)
        self.entries[f"check.{key}.ok"] = ok
        if not ok:
            self.failures.append(key)
        return ok

    def put_timing(self, key: str, seconds: float):
        self.timings[key] = seconds

    @property
    def ok(self) -> bool:
        return not self.failures

    def render(self) -> str:
        lines = [f"schema_version = {self.entries['schema_version']}"]
        for key in sorted(k for k in self.entries if k != "schema_version"):
            lines.append(f"{key} = {format_value(self.entries[key])}")
        for key in sorted(self.timings):
            lines.append(f"timings.{key} = {format_value(self.timings[key])}")
        return "\n".join(lines) + "\n"

    def write(self, path: Optional[str]):
        text = self.render()
        if path:
            with open(path, "w") as fh:
                fh.write(text)
        return text
