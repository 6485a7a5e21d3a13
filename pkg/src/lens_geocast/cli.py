"""``lens-geocast`` command line: sweeps, Monte Carlo checks and paper-style tables.

Configuration is a flat ``section.key = value`` file; lists are comma
separated and ``#`` starts a comment::

    geometry.W = 150
    geometry.L = chord          # or a number for paper_literal mode
    geometry.R = 200, 250, 300
    geometry.n = 4
    field.lambda = 0.0004, 0.0005
    mc.trials = 10000
    mc.seed = 7
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, fields, replace
from typing import Callable

import numpy as np

from . import analytics as an
from .geometry import (
    CellRect,
    GeometryError,
    HighwayModel,
    Lens,
    SectorZone,
    lens_area,
    region_within_strip,
    zone_area,
)
from .montecarlo import MIN_TRIALS, SimEstimate, compare_to_analytic, event_hits, region_counts
from .protocol import GeocastScenario, ProtocolError, ZonePolicy, geocast_trials

CSV_COLUMNS = ("R_m", "W_m", "L_m", "lambda", "N", "region", "event", "analytic",
               "mc_p_hat", "mc_ci_low", "mc_ci_high", "z_score", "trials", "seed")
GEOCAST_COLUMNS = ("R_m", "W_m", "L_m", "lambda", "N", "policy", "hops", "delivery_p_hat",
                   "ci_low", "ci_high", "analytic_bound", "escalations_mean", "trials", "seed")
REGION_NAMES = ("lens", "zone1", "zone2", "zone3", "cell")
DEFAULT_POLICIES = ("lens_only", "fixed_zone_1", "fixed_zone_2", "fixed_zone_3", "escalating")
DEFAULT_TABLE_M = (10, 15, 20, 30, 35, 40, 50)


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# Config


@dataclass(frozen=True)
class ScenarioConfig:
    W: float
    L: float | None  # None = chord-consistent
    R: tuple[float, ...]
    n: int = 2
    lambdas: tuple[float, ...] | None = None
    Ns: tuple[int, ...] | None = None
    area: float | None = None
    trials: int | None = None
    seed: int | None = None
    workers: int = 1
    events: tuple[str, ...] = ("void",)
    source_cell: int = 0
    geocast_range: tuple[int, int] | None = None
    policies: tuple[str, ...] = DEFAULT_POLICIES
    max_hops: int | None = None
    tables_R: float | None = None
    tables_m: tuple[int, ...] = DEFAULT_TABLE_M
    out_path: str | None = None
    out_format: str = "csv"

    @property
    def chord(self) -> bool:
        return self.L is None


def _float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"not a finite number: {text!r}")
    return v


def _int(text):
    return int(text, 10)


def _list(conv):
    def parse(text):
        items = [t.strip() for t in text.split(",")]
        if not items or any(not t for t in items):
            raise ValueError("empty list item")
        return tuple(conv(t) for t in items)
    return parse


def _length(text):
    return None if text.strip() == "chord" else _float(text)


def _event(text):
    an.parse_event(text)
    return text


def _policy(text):
    return str(ZonePolicy.parse(text))


def _range(text):
    lo, sep, hi = text.partition("-")
    return (_int(lo.strip()), _int(hi.strip())) if sep else (_int(lo), _int(lo))


def _fmt_range(r):
    return f"{r[0]}-{r[1]}"


def _fmt_list(v):
    return ", ".join(repr(x) if isinstance(x, float) else str(x) for x in v)


# key -> (attribute, parser, formatter)
_KEYS: dict[str, tuple[str, Callable, Callable]] = {
    "geometry.W": ("W", _float, repr),
    "geometry.L": ("L", _length, lambda v: "chord" if v is None else repr(v)),
    "geometry.R": ("R", _list(_float), _fmt_list),
    "geometry.n": ("n", _int, str),
    "field.lambda": ("lambdas", _list(_float), _fmt_list),
    "field.N": ("Ns", _list(_int), _fmt_list),
    "field.area": ("area", _float, repr),
    "mc.trials": ("trials", _int, str),
    "mc.seed": ("seed", _int, str),
    "mc.workers": ("workers", _int, str),
    "analysis.events": ("events", _list(_event), _fmt_list),
    "protocol.source_cell": ("source_cell", _int, str),
    "protocol.geocast_range": ("geocast_range", _range, _fmt_range),
    "protocol.policy": ("policies", _list(_policy), _fmt_list),
    "protocol.max_hops": ("max_hops", _int, str),
    "tables.R": ("tables_R", _float, repr),
    "tables.m": ("tables_m", _list(_int), _fmt_list),
    "output.path": ("out_path", str.strip, str),
    "output.format": ("out_format", str.strip, str),
}
_REQUIRED = ("geometry.W", "geometry.L", "geometry.R")

# single-key constraints, checked as soon as the line is read
_CHECKS: dict[str, tuple[Callable, str]] = {
    "geometry.W": (lambda v: v > 0, "must be > 0"),
    "geometry.L": (lambda v: v is None or v > 0, "must be > 0 or 'chord'"),
    "geometry.R": (lambda v: all(r > 0 for r in v), "must be > 0"),
    "geometry.n": (lambda v: v >= 2, "must be >= 2"),
    "field.lambda": (lambda v: all(x >= 0 for x in v), "must be >= 0"),
    "field.N": (lambda v: all(x >= 0 for x in v), "must be >= 0"),
    "field.area": (lambda v: v > 0, "must be > 0"),
    "mc.trials": (lambda v: v >= MIN_TRIALS, f"must be >= {MIN_TRIALS}"),
    "mc.seed": (lambda v: 0 <= v < 2**64, "must be an unsigned 64-bit integer"),
    "mc.workers": (lambda v: v >= 1, "must be >= 1"),
    "protocol.source_cell": (lambda v: v >= 0, "must be >= 0"),
    "protocol.max_hops": (lambda v: v >= 1, "must be >= 1"),
    "tables.m": (lambda v: all(m >= 0 for m in v), "must be >= 0"),
    "output.format": (lambda v: v == "csv", "only 'csv' is supported"),
}


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a config; errors name the key and line."""
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"expected 'section.key = value' (line {lineno})")
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key} (line {lineno})")
        if key in lines:
            raise ConfigError(f"duplicate key {key} (line {lineno})")
        attr, conv, _ = _KEYS[key]
        try:
            values[attr] = conv(value.strip())
        except (ValueError, an.AnalyticsError, ProtocolError) as exc:
            raise ConfigError(f"{key}: cannot parse {value.strip()!r}: {exc} (line {lineno})") from None
        check = _CHECKS.get(key)
        if check and not check[0](values[attr]):
            raise ConfigError(f"{key}: {check[1]} (line {lineno})")
        lines[key] = lineno

    for key in _REQUIRED:
        if key not in lines:
            raise ConfigError(f"missing required key {key}")
    cfg = ScenarioConfig(**values)
    _validate(cfg, lines)
    return cfg


def _validate(cfg: ScenarioConfig, lines: dict[str, int]) -> None:
    def fail(key, msg):
        where = f" (line {lines[key]})" if key in lines else ""
        raise ConfigError(f"{key}: {msg}{where}")

    if not cfg.W > 0:
        fail("geometry.W", "must be > 0")
    if cfg.L is not None and not cfg.L > 0:
        fail("geometry.L", "must be > 0 or 'chord'")
    if any(not r > cfg.W / 2 for r in cfg.R):
        fail("geometry.R", "every radius must exceed W/2")
    if cfg.n < 2:
        fail("geometry.n", "must be >= 2")
    if (cfg.lambdas is None) == (cfg.Ns is None):
        fail("field.lambda", "give exactly one of field.lambda or field.N")
    if cfg.lambdas is not None and any(lam < 0 for lam in cfg.lambdas):
        fail("field.lambda", "must be >= 0")
    if cfg.Ns is not None:
        if any(N < 0 for N in cfg.Ns):
            fail("field.N", "must be >= 0")
        if cfg.area is None:
            fail("field.N", "requires field.area")
    if cfg.area is not None:
        if cfg.Ns is None:
            fail("field.area", "only meaningful with field.N")
        if not cfg.area > 0:
            fail("field.area", "must be > 0")
    if cfg.trials is not None and cfg.trials < MIN_TRIALS:
        fail("mc.trials", f"must be >= {MIN_TRIALS}")
    if cfg.seed is not None and not 0 <= cfg.seed < 2**64:
        fail("mc.seed", "must be an unsigned 64-bit integer")
    if cfg.workers < 1:
        fail("mc.workers", "must be >= 1")
    g_lo, g_hi = cfg.geocast_range or (cfg.n - 1, cfg.n - 1)
    if not 0 <= cfg.source_cell < g_lo <= g_hi < cfg.n:
        fail("protocol.geocast_range" if cfg.geocast_range else "protocol.source_cell",
             f"need 0 <= source_cell < g_lo <= g_hi < n={cfg.n}")
    if cfg.max_hops is not None and cfg.max_hops < 1:
        fail("protocol.max_hops", "must be >= 1")
    if cfg.tables_R is not None and not cfg.tables_R > cfg.W / 2:
        fail("tables.R", "must exceed W/2")
    if any(m < 0 for m in cfg.tables_m):
        fail("tables.m", "must be >= 0")
    if cfg.out_format != "csv":
        fail("output.format", "only 'csv' is supported")


def format_config(cfg: ScenarioConfig) -> str:
    """Inverse of :func:`parse_config` (``parse_config(format_config(c)) == c``)."""
    defaults = {f.name: f.default for f in fields(ScenarioConfig)}
    out = []
    for key, (attr, _, fmt) in _KEYS.items():
        v = getattr(cfg, attr)
        if key in _REQUIRED or (v is not None and v != defaults.get(attr)):
            out.append(f"{key} = {fmt(v)}")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# Sweep helpers


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10g")


def _model(cfg: ScenarioConfig, R: float) -> HighwayModel:
    if cfg.chord:
        return HighwayModel.chord_consistent(R, cfg.W, cfg.n)
    return HighwayModel(W=cfg.W, L=cfg.L, R=R, n=cfg.n)


def _fields(cfg: ScenarioConfig):
    """Sorted ``(NodeField, lambda, N)`` triples of the sweep."""
    if cfg.lambdas is not None:
        return [(an.NodeField.poisson(lam), lam, None) for lam in sorted(cfg.lambdas)]
    return [(an.NodeField.fixed(N, cfg.area), N / cfg.area, N) for N in sorted(cfg.Ns)]


def _regions():
    return (Lens(0), SectorZone(0, 1), SectorZone(0, 2), SectorZone(0, 3), CellRect(0))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


@dataclass
class Output:
    text: str
    rows: int
    errors: int


def _sweep(cfg: ScenarioConfig, simulate: bool, workers: int) -> Output:
    rows, errors = [], 0
    regions = _regions()
    for R in sorted(cfg.R):
        model = _model(cfg, R)
        for field, lam, N in _fields(cfg):
            mc_ok = [simulate and region_within_strip(r, model)
                     and not (isinstance(r, Lens) and not cfg.chord) for r in regions]
            counts = None
            if any(mc_ok):
                picked = [r for r, ok in zip(regions, mc_ok) if ok]
                counts = dict(zip(picked, region_counts(field, model, picked, cfg.trials,
                                                        cfg.seed, workers).T))
            for region, name in zip(regions, REGION_NAMES):
                for event in cfg.events:
                    row = [_fmt(R), _fmt(model.W), _fmt(model.L), _fmt(lam), _fmt(N), name, event]
                    try:
                        analytic = an.region_probability(field, model, region, event)
                    except (GeometryError, an.AnalyticsError) as exc:
                        errors += 1
                        rows.append(row + [f"error: {exc}"] + [""] * 6)
                        continue
                    mc = [""] * 6
                    if counts is not None and region in counts:
                        hits = np.count_nonzero(event_hits(counts[region], event))
                        est = SimEstimate.from_counts(hits, cfg.trials)
                        cmp = compare_to_analytic(est, analytic)
                        mc = [_fmt(est.p_hat), _fmt(est.ci95_low), _fmt(est.ci95_high),
                              _fmt(cmp.z_score), _fmt(cfg.trials), _fmt(cfg.seed)]
                    rows.append(row + [_fmt(analytic)] + mc)
    return Output(_csv(CSV_COLUMNS, rows), len(rows), errors)


def cmd_analyze(cfg: ScenarioConfig) -> Output:
    return _sweep(cfg, simulate=False, workers=1)


def _require_mc(cfg):
    if cfg.trials is None or cfg.seed is None:
        raise ConfigError("mc.trials and mc.seed are required for this command")


def cmd_simulate(cfg: ScenarioConfig, workers: int | None = None) -> Output:
    _require_mc(cfg)
    return _sweep(cfg, simulate=True, workers=workers or cfg.workers)


def cmd_geocast(cfg: ScenarioConfig, workers: int | None = None) -> Output:
    _require_mc(cfg)
    g_range = cfg.geocast_range or (cfg.n - 1, cfg.n - 1)
    max_hops = cfg.max_hops or 4 * cfg.n
    scenarios = [GeocastScenario(cfg.source_cell, g_range, ZonePolicy.parse(p), max_hops)
                 for p in cfg.policies]
    hops = scenarios[0].lens_hops
    rows, errors = [], 0
    for R in sorted(cfg.R):
        model = _model(cfg, R)
        for field, lam, N in _fields(cfg):
            results = geocast_trials(field, model, scenarios, cfg.trials, cfg.seed,
                                     workers or cfg.workers)
            try:
                bound = _fmt(an.end_to_end_connectivity(field, model, hops))
            except an.AnalyticsError as exc:
                bound = f"error: {exc}"
            for j, s in enumerate(scenarios):
                delivered = sum(r[j].delivered for r in results)
                est = SimEstimate.from_counts(delivered, cfg.trials)
                esc = float(np.mean([r[j].escalations for r in results]))
                rows.append([_fmt(R), _fmt(model.W), _fmt(model.L), _fmt(lam), _fmt(N),
                             str(s.zone_policy), _fmt(hops), _fmt(est.p_hat),
                             _fmt(est.ci95_low), _fmt(est.ci95_high), bound, _fmt(esc),
                             _fmt(cfg.trials), _fmt(cfg.seed)])
    return Output(_csv(GEOCAST_COLUMNS, rows), len(rows), errors)


def _table(title, corner, cols, rows) -> str:
    width = max(10, *(len(str(c)) + 2 for c in cols))
    first = max(len(corner), *(len(r[0]) for r in rows)) if rows else len(corner)
    lines = [title, corner.ljust(first) + "".join(str(c).rjust(width) for c in cols)]
    for label, vals in rows:
        cells = ("n/a" if v is None else f"{v:.4f}" for v in vals)
        lines.append(label.ljust(first) + "".join(c.rjust(width) for c in cells))
    return "\n".join(lines) + "\n"


def _safe(fn):
    try:
        return fn()
    except (GeometryError, an.AnalyticsError):
        return None


def cmd_tables(cfg: ScenarioConfig) -> Output:
    """Void table (fields x R), presence CDF table (fields x m), zone table (zones x fields)."""
    flds = _fields(cfg)
    label = (lambda lam, N: str(N)) if cfg.Ns is not None else (lambda lam, N: f"{lam:g}")
    corner = "N" if cfg.Ns is not None else "lambda"
    models = {R: _model(cfg, R) for R in sorted(cfg.R)}

    t2 = [(label(lam, N), [_safe(lambda: an.p_void(f, lens_area(m))) for m in models.values()])
          for f, lam, N in flds]
    R_t = cfg.tables_R if cfg.tables_R is not None else sorted(cfg.R)[0]
    m_t = _model(cfg, R_t)
    t3 = [(label(lam, N),
           [_safe(lambda: an.poisson_cdf(f.effective_lambda * lens_area(m_t), m))
            for m in cfg.tables_m]) for f, lam, N in flds]
    t4 = [(zone, [_safe(lambda: an.p_at_least_one(f, zone_area(m_t, k))) for f, _, _ in flds])
          for k, zone in zip((1, 2, 3), ("I", "II", "III"))]

    cells = [v for _, vals in t2 + t3 + t4 for v in vals]
    text = "\n".join([
        _table("Void probability in the intersection area", f"{corner} \\ R (m)",
               [_fmt(R) for R in models], t2),
        _table(f"P(at most m nodes in the intersection area), R = {_fmt(R_t)} m",
               f"{corner} \\ m", list(cfg.tables_m), t3),
        _table(f"P(at least one node in forwarding zone), R = {_fmt(R_t)} m",
               f"zone \\ {corner}", [label(lam, N) for _, lam, N in flds], t4),
    ])
    return Output(text, len(cells), sum(v is None for v in cells))


# --------------------------------------------------------------------------
# Entry point

COMMANDS = ("analyze", "simulate", "tables", "geocast")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lens-geocast", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="path to a section.key = value file")
    p.add_argument("--out", help="output path (default: output.path or stdout)")
    p.add_argument("--seed", type=int, help="override mc.seed")
    p.add_argument("--trials", type=int, help="override mc.trials")
    p.add_argument("--workers", type=int, help="worker processes for Monte Carlo trials")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.trials is not None:
            overrides["trials"] = args.trials
        if overrides:
            cfg = replace(cfg, **overrides)
            _validate(cfg, {})
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if args.command == "analyze":
            out = cmd_analyze(cfg)
        elif args.command == "simulate":
            out = cmd_simulate(cfg, args.workers)
        elif args.command == "geocast":
            out = cmd_geocast(cfg, args.workers)
        else:
            out = cmd_tables(cfg)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    path = args.out or cfg.out_path
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(out.text)
    else:
        sys.stdout.write(out.text)
    if out.rows and out.errors == out.rows:
        print("domain error in every row", file=sys.stderr)
        return 3
    return 0


def main(argv=None) -> int:
    try:
        code = run(argv)
    except SystemExit:
        raise
    except Exception as exc:  # noqa: BLE001 - exit code 1 is the contract
        print(f"internal error: {exc!r}", file=sys.stderr)
        code = 1
    sys.exit(code)
