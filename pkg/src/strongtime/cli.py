"""Scenario runner.

    strongtime run <config.json> [--out DIR] [--jobs N] [--seed S]
    strongtime validate <config.json>
    strongtime list-presets

Exit status: 0 all verdicts pass, 1 some verdict fails or a scenario errors,
2 invalid configuration or symbol, 3 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
import time
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .expr import ExprSyntaxError, ParameterError, SymbolError
from .grid import make_grid
from .oracle import CAP
from .presets import get_preset, preset_table
from .spectral import MarginError, SymbolValueError
from .states import AdmissibilityError
from .verify import MAX_N, SUITES, ResidualReport, Scenario, run_scenario, setup

CONFIG_VERSION = 1
CSV_COLUMNS = ["scenario_id", "residual", "value", "tolerance", "verdict", "N", "L", "t"]
CONVERGENCE_COLUMNS = ["scenario_id", "t", "level", "N", "L", "residual"]
TIME_SUITES = {"weak_weyl", "steps", "expectation", "convergence", "oracle"}

_SCENARIO_KEYS = {"id", "symbol", "params", "preset", "grid", "bump", "gaussian", "t", "s", "weyl_pairs",
                  "suites", "tolerances", "arai", "levels", "margin", "pairs"}
_TOP_KEYS = {"version", "output_dir", "jobs", "seed", "defaults", "scenarios"} | _SCENARIO_KEYS

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


class CapError(ValueError):
    pass


def _bundled(path: str) -> Path | None:
    p = Path(path)
    if p.exists():
        return p
    candidate = resources.files("strongtime") / "configs" / p.name
    return Path(str(candidate)) if candidate.is_file() else None


def load_config(path: str) -> dict:
    p = _bundled(path)
    if p is None:
        raise ConfigError(f"no such config file: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None


def _float_list(value, name):
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"{name} must be a list of numbers")
    return tuple(float(v) for v in value)


def _arai_item(item):
    if isinstance(item, str):
        return item
    if isinstance(item, dict) and set(item) <= {"re", "im"} and "re" in item:
        return (item["re"], item.get("im", "0"))
    raise ConfigError(f"arai entries are expression strings or {{'re': ..., 'im': ...}}, got {item!r}")


def scenario_from_dict(d: dict, index: int = 0) -> Scenario:
    unknown = set(d) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    kw: dict = {"id": str(d.get("id", f"scenario{index:03d}"))}
    suites = list(d.get("suites", ["weak_weyl"]))
    if "preset" in d:
        try:
            preset = get_preset(d["preset"])
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
        kw.update(preset=d["preset"], symbol=preset.text, params=dict(preset.params))
        if "closed_form" not in suites:
            suites.append("closed_form")
    if "symbol" in d:
        kw["symbol"] = d["symbol"]
    if "params" in d:
        kw["params"] = {**kw.get("params", {}), **d["params"]}
    if "symbol" not in kw:
        raise ConfigError(f"scenario {kw['id']}: either 'symbol' or 'preset' is required")
    bad = [s for s in suites if s not in SUITES]
    if bad:
        raise ConfigError(f"scenario {kw['id']}: unknown suites {bad}; known: {list(SUITES)}")
    kw["suites"] = tuple(suites)
    grid = d.get("grid", {})
    if not isinstance(grid, dict) or set(grid) - {"N", "L"}:
        raise ConfigError("grid must be an object with keys N and L")
    if "N" in grid:
        kw["N"] = grid["N"]
    if "L" in grid:
        kw["L"] = float(grid["L"])
    if "bump" in d:
        b = _float_list(d["bump"], "bump")
        if len(b) != 2:
            raise ConfigError("bump must be [a, b]")
        kw["bump"] = b
    gauss = d.get("gaussian", {})
    if set(gauss) - {"x0", "sigma", "k0"}:
        raise ConfigError("gaussian keys are x0, sigma, k0")
    kw.update({k: float(v) for k, v in gauss.items()})
    if "t" in d:
        kw["t"] = _float_list(d["t"], "t")
    t = kw.get("t", Scenario.t)
    if "weyl_pairs" in d:
        kw["weyl_pairs"] = tuple(_float_list(p, "weyl_pairs entry") for p in d["weyl_pairs"])
    elif "s" in d:
        kw["weyl_pairs"] = tuple((s, tt) for s in _float_list(d["s"], "s") for tt in t)
    if TIME_SUITES & set(suites) and not t:
        raise ConfigError(f"scenario {kw['id']}: t must be nonempty for suites {sorted(TIME_SUITES & set(suites))}")
    if "tolerances" in d:
        kw["tolerances"] = {str(k): float(v) for k, v in d["tolerances"].items()}
    if "arai" in d:
        kw["arai"] = tuple(_arai_item(a) for a in d["arai"])
    for key in ("levels", "pairs"):
        if key in d:
            kw[key] = int(d[key])
    if "margin" in d:
        kw["margin"] = float(d["margin"])
    return Scenario(**kw)


def parse_config(cfg: dict, seed: int | None = None) -> tuple[list[Scenario], dict]:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    if cfg.get("version", CONFIG_VERSION) != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {cfg.get('version')!r}")
    defaults = dict(cfg.get("defaults", {}))
    defaults.update({k: v for k, v in cfg.items() if k in _SCENARIO_KEYS})
    items = cfg.get("scenarios") or [{}]
    scenarios = [scenario_from_dict({**defaults, **item}, i) for i, item in enumerate(items)]
    ids = [s.id for s in scenarios]
    if len(set(ids)) != len(ids):
        raise ConfigError("scenario ids must be unique")
    seed = cfg.get("seed", 0) if seed is None else seed
    scenarios = [replace(s, seed=int(seed)) for s in scenarios]
    run = {"output_dir": cfg.get("output_dir", "reports"), "jobs": int(cfg.get("jobs", 1)), "seed": int(seed)}
    return scenarios, run


def check_scenario(sc: Scenario) -> None:
    """Resolve grid, symbol, singular set and test vector; raise on any problem."""
    try:
        make_grid(sc.N, sc.L)
    except ValueError as exc:
        raise ConfigError(f"scenario {sc.id}: {exc}") from None
    if "oracle" in sc.suites and sc.N > CAP:
        raise CapError(f"scenario {sc.id}: oracle suite needs N <= {CAP}, got {sc.N}")
    if "convergence" in sc.suites and sc.N * 2 ** (sc.levels - 1) > MAX_N:
        raise CapError(f"scenario {sc.id}: convergence would reach N = {sc.N * 2 ** (sc.levels - 1)} > {MAX_N}")
    if "convergence" in sc.suites and sc.levels < 2:
        raise ConfigError(f"scenario {sc.id}: convergence needs levels >= 2")
    try:
        setup(sc)
    except SymbolError as exc:
        raise ConfigError(f"scenario {sc.id}: symbol {sc.symbol!r} rejected: {exc}") from None
    except (ExprSyntaxError, ParameterError, SymbolValueError, MarginError, AdmissibilityError, ValueError) as exc:
        raise ConfigError(f"scenario {sc.id}: {exc}") from None


def _safe_run(sc: Scenario) -> ResidualReport:
    try:
        return run_scenario(sc)
    except Exception as exc:  # reported as a failed scenario, not a crash
        report = ResidualReport(sc)
        report.add("error", 1.0, 0.0)
        report.warnings.append(f"{type(exc).__name__}: {exc}")
        return report


def _csv_value(v) -> str:
    return "" if v is None else repr(float(v))


def write_reports(reports: list[ResidualReport], out: Path, provenance: dict) -> tuple[Path, Path]:
    out.mkdir(parents=True, exist_ok=True)
    json_path, csv_path = out / "report.json", out / "residuals.csv"
    doc = {**provenance, "passed": all(r.passed for r in reports), "reports": [r.to_dict() for r in reports]}
    json_path.write_text(json.dumps(doc, indent=2, default=list))
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in reports:
            for e in r.entries:
                w.writerow([r.scenario.id, e.name if e.s is None else f"{e.name}[s={e.s!r}]", _csv_value(e.value),
                            _csv_value(e.tolerance), "pass" if e.passed else "fail", e.N, _csv_value(e.L),
                            _csv_value(e.t)])
    if any(r.convergence for r in reports):
        with (out / "convergence.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CONVERGENCE_COLUMNS)
            for r in reports:
                levels: dict = {}
                for row in r.convergence:
                    lvl = levels.setdefault(row["t"], 0)
                    levels[row["t"]] += 1
                    w.writerow([r.scenario.id, repr(row["t"]), lvl, row["N"], repr(row["L"]), repr(row["residual"])])
    return json_path, csv_path


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        scenarios, run = parse_config(cfg, args.seed)
        for sc in scenarios:
            check_scenario(sc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    jobs = args.jobs if args.jobs is not None else run["jobs"]
    out = Path(args.out or run["output_dir"])
    start = time.perf_counter()
    if jobs > 1 and len(scenarios) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_safe_run, scenarios))
    else:
        reports = [_safe_run(sc) for sc in scenarios]
    reports.sort(key=lambda r: r.scenario.id)
    provenance = {
        "config": cfg, "config_path": str(args.config), "seed": run["seed"], "jobs": jobs,
        "versions": {"strongtime": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "wall_time": time.perf_counter() - start,
    }
    json_path, csv_path = write_reports(reports, out, provenance)
    for r in reports:
        failed = [e for e in r.entries if not e.passed]
        status = "PASS" if not failed else f"FAIL ({len(failed)} of {len(r.entries)})"
        print(f"{r.scenario.id:<24} {r.scenario.symbol:<28} {status}  [{r.wall_time:.2f}s]")
        for e in failed:
            print(f"    {e.name} t={e.t} value={e.value:.3e} {e.relation} {e.tolerance:.1e}")
        for msg in r.warnings:
            print(f"    warning: {msg}")
    print(f"wrote {json_path} and {csv_path}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_validate(args) -> int:
    try:
        scenarios, _ = parse_config(load_config(args.config))
        for sc in scenarios:
            check_scenario(sc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    for sc in scenarios:
        print(f"{sc.id}: ok (g = {sc.symbol}, N = {sc.N}, L = {sc.L}, suites = {', '.join(sc.suites)})")
    return EXIT_OK


def cmd_list_presets(args) -> int:
    for row in preset_table():
        params = ", ".join(f"{k}={v:g}" for k, v in row["params"].items())
        print(f"{row['name']}")
        print(f"    g  = {row['g']}" + (f"   ({params})" if params else ""))
        print(f"    g' = {row['gprime']}")
        print(f"    Z  = {row['Z']}")
        print(f"    D  = {row['D']}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="strongtime", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run the scenarios of a config file")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="output directory (overrides the config)")
    p.add_argument("--jobs", type=int, default=None, help="parallel scenario workers")
    p.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("validate", help="check a config file without running it")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("list-presets", help="print the built-in symbols")
    p.set_defaults(func=cmd_list_presets)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
