"""Batch command-line front end.

``subweibull-lab analyze --config cfg.json`` reads a JSON description of
distributions, tilts and a q-grid, runs the classification pipeline and writes
``report.json`` plus one CSV per diagnostic sequence.  Output is a pure
function of the config: floats are printed with 17 significant digits and
object keys are sorted.

Exit codes: 0 success, 2 invalid config, 3 I/O failure.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import click
import numpy as np

from . import __version__
from .dist_core import DistributionSpec, SpecError, from_dict
from .subweibull import (
    MomentDivergence,
    Verdict,
    classify,
    default_t_max,
    limsup_moment_diagnostic,
    limsup_tail_diagnostic,
    radius_preservation_report,
)
from .tilting import TiltOutsideInterval, shifted_interval, tilt, tilted_sample
from .transform_engine import ToleranceConfig, convergence_interval, tail_classification

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

_TAIL_DIAGNOSTIC_POINTS = 100
_SAMPLE_SIZE = 10_000
_ENTRY_ERRORS = (TiltOutsideInterval, MomentDivergence, ArithmeticError, ValueError)


class ConfigError(ValueError):
    """Invalid analysis config; ``violations`` lists every problem found."""

    def __init__(self, violations: list[str]):
        super().__init__("\n".join(violations))
        self.violations = list(violations)


@dataclass(frozen=True)
class Entry:
    name: str
    spec: DistributionSpec
    tilts: tuple[float, ...] = ()


@dataclass(frozen=True)
class AnalysisConfig:
    distributions: tuple[Entry, ...]
    q_grid: tuple[float, ...]
    seed: int
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    output_dir: str = "results"
    emit_csv: bool = True
    t_max: float = 50.0
    p_max: int = 60

    def to_dict(self) -> dict[str, Any]:
        return {
            "distributions": [
                {"name": e.name, **e.spec.to_dict(), "tilts": list(e.tilts)} for e in self.distributions
            ],
            "q_grid": list(self.q_grid),
            "seed": self.seed,
            "tolerances": self.tolerances.to_dict(),
            "emit_csv": self.emit_csv,
            "t_max": self.t_max,
            "p_max": self.p_max,
        }


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _parse_entry(raw: Any, where: str, problems: list[str]) -> Entry | None:
    if not isinstance(raw, Mapping):
        problems.append(f"{where}: must be an object")
        return None
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        problems.append(f"{where}.name: must be a nonempty string")
    elif not all(c.isalnum() or c in "-_." for c in name):
        problems.append(f"{where}.name: use only letters, digits, '-', '_' and '.'")
    label = f"{where} ({name})" if isinstance(name, str) else where
    spec = None
    try:
        spec = from_dict({"family": raw.get("family"), "params": raw.get("params", {})}, where)
    except SpecError as exc:
        problems.extend(f"{label}: {v}" for v in exc.violations)

    tilts: list[float] = []
    raw_tilts = raw.get("tilts", [])
    if not isinstance(raw_tilts, list) or not all(_is_number(t) for t in raw_tilts):
        problems.append(f"{label}.tilts: must be a list of finite numbers")
    else:
        tilts.extend(float(t) for t in raw_tilts)
    if "tilt" in raw:
        single = raw["tilt"]
        if not isinstance(single, Mapping) or not _is_number(single.get("theta")):
            problems.append(f"{label}.tilt: must be an object with a finite number 'theta'")
        else:
            tilts.append(float(single["theta"]))
    unknown = sorted(set(raw) - {"name", "family", "params", "tilts", "tilt"})
    problems.extend(f"{label}: unknown key {k!r}" for k in unknown)
    if spec is None or not isinstance(name, str):
        return None
    return Entry(name, spec, tuple(dict.fromkeys(tilts)))


def validate_config(raw: str) -> AnalysisConfig:
    """Parse and validate config text.

    Raises
    ------
    ConfigError
        Listing every violation, each addressed by line (for JSON syntax
        errors) or by field path.
    """
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"line {exc.lineno}, column {exc.colno}: invalid JSON ({exc.msg})"]) from None
    if not isinstance(data, Mapping):
        raise ConfigError(["config: top level must be an object"])

    problems: list[str] = []
    entries: list[Entry] = []
    dists = data.get("distributions")
    if not isinstance(dists, list) or not dists:
        problems.append("distributions: must be a nonempty list")
        dists = []
    seen: set[str] = set()
    for i, raw_entry in enumerate(dists):
        entry = _parse_entry(raw_entry, f"distributions[{i}]", problems)
        name = raw_entry.get("name") if isinstance(raw_entry, Mapping) else None
        if isinstance(name, str):
            if name in seen:
                problems.append(f"distributions[{i}].name: duplicate distribution name {name!r}")
            seen.add(name)
        if entry is not None:
            entries.append(entry)

    q_grid = data.get("q_grid")
    if not isinstance(q_grid, list) or not q_grid or not all(_is_number(q) and q > 0 for q in q_grid):
        problems.append("q_grid: must be a nonempty list of positive numbers")
        q_grid = []

    seed = data.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        problems.append("seed: required nonnegative integer")

    tolerances = ToleranceConfig()
    raw_tol = data.get("tolerances", {})
    if not isinstance(raw_tol, Mapping):
        problems.append("tolerances: must be an object")
    else:
        try:
            tolerances = ToleranceConfig.from_dict(raw_tol)
        except (TypeError, ValueError) as exc:
            problems.extend(str(exc).split("; "))

    output_dir = data.get("output_dir", "results")
    if not isinstance(output_dir, str) or not output_dir:
        problems.append("output_dir: must be a nonempty string")
    emit_csv = data.get("emit_csv", True)
    if not isinstance(emit_csv, bool):
        problems.append("emit_csv: must be true or false")
    t_max = data.get("t_max", 50.0)
    if not (_is_number(t_max) and t_max > 0):
        problems.append("t_max: must be a positive number")
    p_max = data.get("p_max", 60)
    if not (isinstance(p_max, int) and not isinstance(p_max, bool) and p_max >= 1):
        problems.append("p_max: must be an integer >= 1")
    known = {"distributions", "q_grid", "seed", "tolerances", "output_dir", "emit_csv", "t_max", "p_max"}
    problems.extend(f"config: unknown key {k!r}" for k in sorted(set(data) - known))

    if problems:
        raise ConfigError(problems)
    return AnalysisConfig(
        distributions=tuple(entries),
        q_grid=tuple(float(q) for q in q_grid),
        seed=seed,
        tolerances=tolerances,
        output_dir=output_dir,
        emit_csv=emit_csv,
        t_max=float(t_max),
        p_max=p_max,
    )


# -- deterministic serialization ----------------------------------------------

def format_float(x: float) -> str:
    """17 significant digits; non-finite values become the strings ``inf``, ``-inf``, ``nan``."""
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 0) -> str:
    """JSON text with sorted keys, two-space indentation and fixed float formatting."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_text(rows: list[tuple[float, float]]) -> str:
    lines = ["x,value"]
    for x, v in rows:
        lines.append(f"{format_float(float(x)).strip(chr(34))},{format_float(float(v)).strip(chr(34))}")
    return "\n".join(lines) + "\n"


def _q_label(q: float) -> str:
    return format(q, "g")


# -- pipeline -----------------------------------------------------------------

def _endpoint_report(d: DistributionSpec, S: float, T: float) -> list[dict[str, Any]]:
    """Catalog verdicts at finite interval endpoints, flagged as not decided numerically."""
    out = []
    for side, theta, finite in (("left", -S, math.isfinite(S)), ("right", T, math.isfinite(T))):
        if finite:
            out.append({
                "side": side,
                "theta": theta,
                "catalog_finite": d.laplace_endpoint_finite(side),
                "boundary_unreliable": True,
            })
    return out


def _analyze_tilt(entry: Entry, theta: float, cfg: AnalysisConfig) -> dict[str, Any]:
    tol = cfg.tolerances
    out: dict[str, Any] = {"theta": theta, "error": None}
    try:
        td = tilt(entry.spec, theta, tol)
        ci = shifted_interval(td, tol)
        draws = tilted_sample(td, _SAMPLE_SIZE, cfg.seed)
        out.update({
            "log_normalizer": td.log_normalizer,
            "conjugate": td.conjugate.to_dict() if td.conjugate is not None else None,
            "shifted_interval": ci.to_dict(),
            "sample": {"n": _SAMPLE_SIZE, "seed": cfg.seed, "mean": float(np.mean(draws))},
        })
        pres = []
        for q in cfg.q_grid:
            if q > 1:
                try:
                    pres.append(radius_preservation_report(entry.spec, theta, q, tol).to_dict())
                except _ENTRY_ERRORS as exc:
                    pres.append({"q": q, "error": f"{type(exc).__name__}: {exc}"})
        out["preservation"] = pres
    except _ENTRY_ERRORS as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def _analyze_entry(entry: Entry, cfg: AnalysisConfig, csv_files: dict[str, str]) -> dict[str, Any]:
    d, tol = entry.spec, cfg.tolerances
    out: dict[str, Any] = {"name": entry.name, "distribution": d.to_dict(), "error": None}
    try:
        ci = convergence_interval(d, tol)
        left, right = tail_classification(d, tol)
        out["convergence_interval"] = ci.to_dict()
        out["tails"] = {"left": left.value, "right": right.value}
        out["endpoints"] = _endpoint_report(d, ci.S, ci.T)
        horizon = default_t_max(d, cfg.t_max)
        out["t_max"] = horizon
        per_q = []
        for q in cfg.q_grid:
            rec: dict[str, Any]
            try:
                rep = classify(d, q, horizon, cfg.p_max, tol)
                rec = rep.to_dict()
                rec["error"] = None
            except _ENTRY_ERRORS as exc:
                rep = None
                rec = {"q": q, "error": f"{type(exc).__name__}: {exc}"}
            rec["diagnostics"] = _diagnostics(entry, q, rep, horizon, cfg, csv_files)
            per_q.append(rec)
        out["subweibull"] = per_q
    except _ENTRY_ERRORS as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    out["tilts"] = [_analyze_tilt(entry, theta, cfg) for theta in entry.tilts]
    return out


def _diagnostics(entry, q, rep, horizon, cfg, csv_files) -> dict[str, Any]:
    """Limsup sequences for one (entry, q); CSV bodies are collected in ``csv_files``."""
    d, tol = entry.spec, cfg.tolerances
    out: dict[str, Any] = {}
    # evidence at the fitted constant when subweibull, at λ = 1 otherwise
    lam = (1.0 / rep.k1) ** q if rep is not None and rep.k1 else 1.0
    t_grid = np.linspace(horizon / _TAIL_DIAGNOSTIC_POINTS, horizon, _TAIL_DIAGNOSTIC_POINTS)
    seqs = {"limsup_tail": limsup_tail_diagnostic(d, q, lam, t_grid)}
    out["limsup_tail"] = {"lambda": lam, "error": None}
    try:
        seqs["limsup_moment"] = limsup_moment_diagnostic(d, q, range(1, cfg.p_max + 1), tol)
        out["limsup_moment"] = {"error": None}
    except MomentDivergence as exc:
        out["limsup_moment"] = {"error": f"MomentDivergence: {exc}"}
    for diag, rows in seqs.items():
        fname = f"{entry.name}_{diag}_q{_q_label(q)}.csv"
        out[diag]["csv"] = fname if cfg.emit_csv else None
        out[diag]["last"] = rows[-1][1]
        csv_files[fname] = _csv_text(rows)
    return out


def run_analysis(cfg: AnalysisConfig, output_dir: str | Path | None = None) -> dict[str, Any]:
    """Run the pipeline and write ``report.json`` (and CSVs when enabled) to the output directory.

    Raises ``OSError`` when the output cannot be written.
    """
    csv_files: dict[str, str] = {}
    entries = sorted((_analyze_entry(e, cfg, csv_files) for e in cfg.distributions), key=lambda r: r["name"])
    report = {
        "tool": {"name": "subweibull-lab", "version": __version__},
        "config": cfg.to_dict(),
        "entries": entries,
        "verdict_legend": [v.value for v in Verdict],
    }
    out = Path(output_dir if output_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report) + "\n")
    if cfg.emit_csv:
        for fname in sorted(csv_files):
            with open(out / fname, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(csv_files[fname])
    return report


def _load(path: str) -> AnalysisConfig:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        click.echo(f"error: cannot read config {path}: {exc}", err=True)
        sys.exit(EXIT_IO)
    try:
        return validate_config(raw)
    except ConfigError as exc:
        for v in exc.violations:
            click.echo(f"config error: {v}", err=True)
        sys.exit(EXIT_CONFIG)


@click.group()
@click.version_option(__version__, prog_name="subweibull-lab")
def main() -> None:
    """Subweibull tail classification and exponential tilting diagnostics."""


@main.command()
@click.option("--config", "config_path", required=True, help="Path to the JSON config.")
@click.option("--output", "output_dir", default=None, help="Output directory (overrides output_dir).")
@click.option("--no-csv", is_flag=True, help="Skip the diagnostic CSV files.")
def analyze(config_path: str, output_dir: str | None, no_csv: bool) -> None:
    """Run the analysis pipeline and write report.json."""
    cfg = _load(config_path)
    if no_csv:
        cfg = AnalysisConfig(**{**cfg.__dict__, "emit_csv": False})
    try:
        run_analysis(cfg, output_dir)
    except OSError as exc:
        click.echo(f"error: cannot write output: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"wrote {Path(output_dir or cfg.output_dir) / 'report.json'}")


@main.command()
@click.option("--config", "config_path", required=True, help="Path to the JSON config.")
def validate(config_path: str) -> None:
    """Check a config and print the normalized form."""
    cfg = _load(config_path)
    click.echo(dumps(cfg.to_dict()))


if __name__ == "__main__":
    main()
