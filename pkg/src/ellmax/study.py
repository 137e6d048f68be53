"""Convergence studies: configuration, row evaluation and report serialization.

Configurations are JSON documents::

    {
      "model": {"beta": {"a": 2, "b": 1}},
      "rho": {"one_minus_power": 0.6666666666666666},
      "grid": [[-1, -1], {"branch": "near", "x": -0.2}],
      "n_schedule": [10000, 100000, 1000000],
      "mc": {"replications": 20000, "seed": 1, "antithetic": false, "max_n": 1000},
      "tolerances": {"quadrature": {"abs_tol": 1e-12, "rel_tol": 1e-11},
                     "ratio_band": 0.15, "boundary_tol": 1e-9},
      "outputs": {"format": "csv", "path": "report.csv"}
    }

``model`` may instead be ``{"custom": {"alpha", "tau", "aux": {"scale", "power"},
"cdf_table": [[t, F], ...]}}`` and ``rho`` may be ``{"constant": d}`` or
``{"table": {"n": rho_n, ...}}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .expansions import expansion_result, inputs_from_sequence
from .limits import boundary_point, classify_regime
from .norming import RhoRule, build_sequence
from .oracle import McConfig, maxima_cdf_exact, sample_maxima
from .radial import RadialModel, beta_radius, tabulated_radial
from .specfun import QuadratureError, QuadratureSpec

__all__ = [
    "ConfigError",
    "GridPoint",
    "StudyConfig",
    "StudyRow",
    "PointSummary",
    "StudyReport",
    "load_config",
    "parse_config",
    "run_convergence_study",
    "summarize",
    "emit_report",
    "parse_report",
    "COLUMNS",
]

COLUMNS = (
    "n", "x", "y", "regime", "exact", "h", "delta_exact", "delta_pred", "ratio",
    "mc_estimate", "mc_se", "a_n", "lambda_n", "c_n", "A_val",
)


class ConfigError(ValueError):
    """Invalid study configuration; the message starts with the offending field path."""


@dataclass(frozen=True)
class GridPoint:
    """A literal ``(x, y)`` or a boundary curve point given one free coordinate."""

    x: float | None = None
    y: float | None = None
    branch: str | None = None

    def resolve(self, lam: float) -> tuple[float, float]:
        if self.branch is None:
            return self.x, self.y
        return boundary_point(self.branch, lam, x=self.x, y=self.y)


@dataclass(frozen=True)
class StudyConfig:
    model: RadialModel
    rho: RhoRule
    grid: tuple
    n_schedule: tuple
    mc: McConfig | None = None
    mc_max_n: int = 1000
    quadrature: QuadratureSpec = QuadratureSpec()
    ratio_band: float = 0.15
    boundary_tol: float = 1e-9
    output_format: str = "csv"
    output_path: str | None = None


@dataclass(frozen=True)
class StudyRow:
    n: int
    x: float
    y: float
    regime: str
    exact: float | None
    h: float | None
    delta_exact: float | None
    delta_pred: float | None
    ratio: float | None
    mc_estimate: float | None
    mc_se: float | None
    a_n: float | None
    lambda_n: float | None
    c_n: float | None
    A_val: float | None


@dataclass(frozen=True)
class PointSummary:
    x: float
    y: float
    regime: str
    final_ratio: float | None
    in_band: bool
    monotone: bool
    passed: bool


@dataclass(frozen=True)
class StudyReport:
    rows: tuple = ()
    summary: tuple = ()
    errors: tuple = field(default=(), compare=False)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.summary) and not self.errors


def _get(tree, key, path, kind=None, default=...):
    if not isinstance(tree, dict):
        raise ConfigError(f"{path}: expected an object")
    if key not in tree:
        if default is ...:
            raise ConfigError(f"{path}.{key}: required field missing".lstrip("."))
        return default
    value = tree[key]
    wrong_type = kind is not None and not isinstance(value, kind)
    if wrong_type or isinstance(value, bool) and kind is not bool:
        raise ConfigError(f"{path}.{key}: expected {getattr(kind, '__name__', 'a number')}".lstrip("."))
    return value


_NUM = (int, float)


def _parse_model(tree) -> RadialModel:
    if not isinstance(tree, dict) or len(tree) != 1:
        raise ConfigError("model: expected exactly one of 'beta' or 'custom'")
    (kind, body), = tree.items()
    try:
        if kind == "beta":
            return beta_radius(_get(body, "a", "model.beta", _NUM), _get(body, "b", "model.beta", _NUM))
        if kind == "custom":
            aux = _get(body, "aux", "model.custom", dict, default={})
            table = _get(body, "cdf_table", "model.custom", list)
            return tabulated_radial(
                table,
                alpha=_get(body, "alpha", "model.custom", _NUM),
                tau=_get(body, "tau", "model.custom", _NUM),
                aux_scale=_get(aux, "scale", "model.custom.aux", _NUM, default=0.0),
                aux_power=_get(aux, "power", "model.custom.aux", _NUM, default=None),
            )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"model.{kind}: {exc}") from None
    raise ConfigError(f"model: unknown model kind {kind!r}")


def _parse_rho(tree) -> RhoRule:
    if not isinstance(tree, dict) or len(tree) != 1:
        raise ConfigError("rho: expected exactly one of 'constant', 'one_minus_power' or 'table'")
    (kind, body), = tree.items()
    try:
        if kind == "constant":
            return RhoRule.constant(_get(tree, kind, "rho", _NUM))
        if kind == "one_minus_power":
            return RhoRule.one_minus_power(_get(tree, kind, "rho", _NUM))
        if kind == "table":
            if not isinstance(body, dict):
                raise ConfigError("rho.table: expected an object mapping n to rho_n")
            return RhoRule.from_table({int(k): float(v) for k, v in body.items()})
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"rho.{kind}: {exc}") from None
    raise ConfigError(f"rho: unknown rule kind {kind!r}")


def _parse_point(item, path) -> GridPoint:
    if isinstance(item, list):
        if len(item) != 2 or not all(isinstance(v, _NUM) and not isinstance(v, bool) for v in item):
            raise ConfigError(f"{path}: expected [x, y]")
        x, y = float(item[0]), float(item[1])
        if not (x < 0 and y < 0):
            raise ConfigError(f"{path}: x and y must be negative")
        return GridPoint(x, y)
    if isinstance(item, dict):
        branch = _get(item, "branch", path, str)
        if branch not in ("near", "far_y", "far_x"):
            raise ConfigError(f"{path}.branch: expected near, far_y or far_x")
        x = _get(item, "x", path, _NUM, default=None)
        y = _get(item, "y", path, _NUM, default=None)
        needed = {"near": None, "far_y": "x", "far_x": "y"}[branch]
        given = [k for k, v in (("x", x), ("y", y)) if v is not None]
        if len(given) != 1 or needed is not None and given != [needed]:
            want = needed or "x or y"
            raise ConfigError(f"{path}: branch {branch} takes exactly one coordinate ({want})")
        val = x if x is not None else y
        if not val < 0:
            raise ConfigError(f"{path}.{given[0]}: must be negative")
        return GridPoint(None if x is None else float(x), None if y is None else float(y), branch)
    raise ConfigError(f"{path}: expected [x, y] or a boundary object")


def parse_config(tree: dict) -> StudyConfig:
    """Validate a configuration tree and build a :class:`StudyConfig`."""
    if not isinstance(tree, dict):
        raise ConfigError("config: expected a JSON object at top level")
    known = {"model", "rho", "grid", "n_schedule", "mc", "tolerances", "outputs"}
    for key in tree:
        if key not in known:
            raise ConfigError(f"{key}: unknown field")
    model = _parse_model(_get(tree, "model", ""))
    rho = _parse_rho(_get(tree, "rho", ""))

    grid_raw = _get(tree, "grid", "", list)
    if not grid_raw:
        raise ConfigError("grid: must not be empty")
    grid = tuple(_parse_point(p, f"grid[{i}]") for i, p in enumerate(grid_raw))

    sched = _get(tree, "n_schedule", "", list)
    if not sched:
        raise ConfigError("n_schedule: must not be empty")
    for i, n in enumerate(sched):
        if not isinstance(n, int) or isinstance(n, bool) or n < 2:
            raise ConfigError(f"n_schedule[{i}]: expected an integer >= 2")
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise ConfigError("n_schedule: must be strictly increasing")

    mc = None
    mc_max_n = 1000
    if "mc" in tree and tree["mc"] is not None:
        body = tree["mc"]
        try:
            mc = McConfig(
                replications=_get(body, "replications", "mc", int),
                seed=_get(body, "seed", "mc", int, default=0),
                antithetic=_get(body, "antithetic", "mc", bool, default=False),
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"mc: {exc}") from None
        if mc.replications < 100:
            raise ConfigError("mc.replications: must be at least 100")
        mc_max_n = _get(body, "max_n", "mc", int, default=1000)

    tol = _get(tree, "tolerances", "", dict, default={})
    quad_raw = _get(tol, "quadrature", "tolerances", dict, default={})
    try:
        quad = QuadratureSpec(
            abs_tol=_get(quad_raw, "abs_tol", "tolerances.quadrature", _NUM, default=1e-12),
            rel_tol=_get(quad_raw, "rel_tol", "tolerances.quadrature", _NUM, default=1e-11),
            max_depth=_get(quad_raw, "max_depth", "tolerances.quadrature", int, default=60),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"tolerances.quadrature: {exc}") from None
    band = _get(tol, "ratio_band", "tolerances", _NUM, default=0.15)
    if not 0 < band < 1:
        raise ConfigError("tolerances.ratio_band: must lie in (0, 1)")
    btol = _get(tol, "boundary_tol", "tolerances", _NUM, default=1e-9)
    if btol < 0:
        raise ConfigError("tolerances.boundary_tol: must be nonnegative")

    out = _get(tree, "outputs", "", dict, default={})
    fmt = _get(out, "format", "outputs", str, default="csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("outputs.format: expected csv or json")
    path = _get(out, "path", "outputs", str, default=None)

    return StudyConfig(model, rho, grid, tuple(sched), mc, mc_max_n, quad, float(band), float(btol), fmt, path)


def load_config(path) -> StudyConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(tree)


def _failed_row(n, x, y, regime):
    return StudyRow(n, x, y, regime, *([None] * 11))


def _evaluate_row(cfg: StudyConfig, x: float, y: float, n: int):
    spec = cfg.quadrature
    regime = "?"
    try:
        seq = build_sequence(cfg.model, cfg.rho, n, spec)
        inp = inputs_from_sequence(cfg.model, seq, x, y, cfg.boundary_tol, spec)
        regime = inp.point.regime.label.value
        res = expansion_result(inp)
        orc = maxima_cdf_exact(cfg.model, cfg.rho, n, x, y, spec, a_n=seq.a_n)
        # exact - h evaluated through logs so the O(n^{-1}) difference keeps its digits
        delta = res.h * math.expm1(orc.log_maxima_cdf - math.log(res.h))
        ratio = delta / res.delta_pred if res.delta_pred != 0 else None
        mc_est = mc_se = None
        if cfg.mc is not None and n <= cfg.mc_max_n:
            mc = sample_maxima(cfg.model, cfg.rho, n, cfg.mc, [(x, y)], spec=spec, a_n=seq.a_n)
            mc_est, mc_se = mc.estimates[0], mc.std_errors[0]
        row = StudyRow(
            n, x, y, regime, orc.maxima_cdf, res.h, delta, res.delta_pred, ratio,
            mc_est, mc_se, seq.a_n, seq.lambda_n, seq.c_n, inp.A_val,
        )
        return row, None
    except (QuadratureError, ArithmeticError, ValueError) as exc:
        return _failed_row(n, x, y, regime), f"n={n} x={x!r} y={y!r}: {exc}"


def summarize(rows, ratio_band: float = 0.15) -> tuple:
    """Per grid point: ratio within the band at the largest ``n`` and ``|ratio - 1|`` decreasing."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.x, r.y), []).append(r)
    out = []
    for (x, y), rs in groups.items():
        rs = sorted(rs, key=lambda r: r.n)
        devs = [abs(r.ratio - 1.0) if r.ratio is not None else None for r in rs]
        final = rs[-1].ratio
        in_band = bool(final is not None and abs(final - 1.0) <= ratio_band)
        usable = [d for d in devs if d is not None]
        monotone = len(usable) == len(devs) and all(b < a for a, b in zip(usable, usable[1:]))
        out.append(PointSummary(x, y, rs[-1].regime, final, in_band, monotone, in_band and monotone))
    return tuple(out)


def run_convergence_study(cfg: StudyConfig, workers: int = 1) -> StudyReport:
    """Evaluate every grid point at every ``n`` and summarize the ratio trend.

    Rows come out in grid order, then ``n`` order, whatever the worker count.
    A row whose numerics fail is kept with empty values and reported in
    ``errors``; the study goes on.
    """
    lam = build_sequence(cfg.model, cfg.rho, cfg.n_schedule[0], cfg.quadrature).lam
    points = []
    for gp in cfg.grid:
        if gp.branch is not None and not 0 < lam < math.inf:
            raise ConfigError("grid: boundary points need a finite positive lambda")
        points.append(gp.resolve(lam))
    tasks = [(x, y, n) for x, y in points for n in cfg.n_schedule]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: _evaluate_row(cfg, *t), tasks))
    else:
        results = [_evaluate_row(cfg, *t) for t in tasks]
    rows = tuple(r for r, _ in results)
    errors = tuple(e for _, e in results if e is not None)
    return StudyReport(rows, summarize(rows, cfg.ratio_band), errors)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def emit_report(report: StudyReport, fmt: str = "csv", path=None) -> str:
    """Serialize ``report``; floats use the shortest repr that round-trips."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in report.rows:
            writer.writerow([_fmt(getattr(row, c)) for c in COLUMNS])
        text = buf.getvalue()
    elif fmt == "json":
        doc = {
            "columns": list(COLUMNS),
            "rows": [asdict(r) for r in report.rows],
            "summary": [asdict(s) for s in report.summary],
            "errors": list(report.errors),
        }
        text = json.dumps(doc, indent=2) + "\n"
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def _row_from_strings(rec: dict) -> StudyRow:
    vals: dict[str, Any] = {}
    for c in COLUMNS:
        s = rec[c]
        if c == "n":
            vals[c] = int(s)
        elif c == "regime":
            vals[c] = s
        else:
            vals[c] = float(s) if s != "" else None
    return StudyRow(**vals)


def parse_report(text: str, fmt: str = "csv", ratio_band: float = 0.15) -> StudyReport:
    """Inverse of :func:`emit_report`. CSV carries no summary, so it is recomputed from the rows."""
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError("CSV header does not match the report columns")
        rows = tuple(_row_from_strings(rec) for rec in reader)
        return StudyReport(rows, summarize(rows, ratio_band))
    if fmt == "json":
        doc = json.loads(text)
        rows = tuple(StudyRow(**r) for r in doc["rows"])
        summary = tuple(PointSummary(**s) for s in doc["summary"])
        return StudyReport(rows, summary, tuple(doc.get("errors", ())))
    raise ValueError(f"unknown report format {fmt!r}")
