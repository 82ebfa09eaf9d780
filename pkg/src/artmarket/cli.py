"""Command-line entry point: ``python -m artmarket {run,factorial}``.

Configuration comes from an optional JSON file whose keys mirror
``SimConfig`` plus the factorial and output options; command-line flags
override file values.  Exit codes: 0 success, 1 configuration error,
2 run failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass, field, replace
from importlib import metadata
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .agents import StrategyWindows
from .experiment import FactorialSpec, RunFailure, emit_report, render_text, run_factorial
from .simulator import MODES, SimConfig, run_simulation

EXIT_OK, EXIT_CONFIG, EXIT_RUN = 0, 1, 2
REPORT_FORMATS = ("csv", "json", "text")


class ConfigError(ValueError):
    pass


@dataclass
class CliConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    seeds: tuple = tuple(range(100))
    workers: int = 1
    out: str = "out"
    trades: bool = False
    formats: tuple = REPORT_FORMATS


_SIM_KEYS = {f.name for f in dataclasses.fields(SimConfig)}
_WINDOW_KEYS = {f.name for f in dataclasses.fields(StrategyWindows)}
_CLI_KEYS = {"seeds", "workers", "out", "trades", "formats"}


def parse_seeds(text) -> tuple:
    """``"0..9"`` (inclusive), ``"1,5,9"``, a list of ints or a single int."""
    if isinstance(text, bool):
        raise ConfigError(f"seeds: cannot parse {text!r}")
    if isinstance(text, int):
        return (text,)
    if isinstance(text, list):
        if not all(isinstance(s, int) and not isinstance(s, bool) for s in text):
            raise ConfigError("seeds: list must contain integers")
        return tuple(text)
    try:
        if ".." in text:
            lo, hi = text.split("..")
            seeds = tuple(range(int(lo), int(hi) + 1))
        else:
            seeds = tuple(int(s) for s in text.split(","))
    except (ValueError, AttributeError):
        raise ConfigError(f"seeds: cannot parse {text!r}") from None
    if not seeds:
        raise ConfigError(f"seeds: empty range {text!r}")
    return seeds


def merge_config(file_values: dict, overrides: dict) -> CliConfig:
    """Defaults, then file values, then flag overrides.

    Both dicts use the file's key layout; window parameters may appear
    nested under ``windows`` or flat as ``dt``/``dt1``/``dt2``/``dt3``.
    """
    sim, win, cli = {}, {}, {}
    for source in (file_values, overrides):
        for key, value in source.items():
            if key == "windows":
                if not isinstance(value, dict):
                    raise ConfigError("windows: expected an object")
                unknown = set(value) - _WINDOW_KEYS
                if unknown:
                    raise ConfigError(f"windows: unknown key(s) {sorted(unknown)}")
                win.update(value)
            elif key in _WINDOW_KEYS:
                win[key] = value
            elif key in _SIM_KEYS:
                sim[key] = value
            elif key in _CLI_KEYS:
                cli[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
    try:
        if "w_max" in sim:
            sim["w_max"] = tuple(float(w) for w in sim["w_max"])
        for key in ("p_d", "delta_p", "p_f", "sigma_eps", "max_price"):
            if isinstance(sim.get(key), int) and not isinstance(sim[key], bool):
                sim[key] = float(sim[key])
        windows = replace(StrategyWindows(), **win)
        config = replace(SimConfig(), windows=windows, **sim)
        config.validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    out = CliConfig(sim=config)
    if "seeds" in cli:
        out.seeds = parse_seeds(cli["seeds"])
    if "workers" in cli:
        if not isinstance(cli["workers"], int) or cli["workers"] < 1:
            raise ConfigError(f"workers must be a positive integer, got {cli['workers']!r}")
        out.workers = cli["workers"]
    if "out" in cli:
        out.out = str(cli["out"])
    if "trades" in cli:
        out.trades = bool(cli["trades"])
    if "formats" in cli:
        fmts = cli["formats"]
        fmts = tuple(fmts.split(",")) if isinstance(fmts, str) else tuple(fmts)
        bad = [f for f in fmts if f not in REPORT_FORMATS]
        if bad:
            raise ConfigError(f"formats: unknown format(s) {bad}, choose from {REPORT_FORMATS}")
        out.formats = fmts
    return out


def load_config_file(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _flag_overrides(args) -> dict:
    pairs = {"seed": "seed", "ctaa": "ctaa_mode", "strta": "strta_mode", "t_end": "t_end",
             "dt": "dt", "dt1": "dt1", "dt2": "dt2", "dt3": "dt3", "seeds": "seeds",
             "workers": "workers", "out": "out", "format": "formats", "extreme_rule": "extreme_rule"}
    d = {key: getattr(args, attr) for attr, key in pairs.items() if getattr(args, attr, None) is not None}
    if getattr(args, "trades", False):
        d["trades"] = True
    return d


def default_table() -> str:
    c = SimConfig()
    rows = [(k, v) for k, v in c.to_dict().items() if k != "windows"]
    rows += [(k, v) for k, v in dataclasses.asdict(c.windows).items()]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"  {k:<{width}}  {v}" for k, v in rows)


def _version() -> str:
    try:
        v = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        v = "unknown"
    import numba
    return (f"artmarket {v} (python {sys.version.split()[0]}, numpy {np.__version__}, numba {numba.__version__})\n"
            f"default parameters:\n{default_table()}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artmarket", description="Artificial market with trend and reversal traders.")
    p.add_argument("--version", action="store_true", help="print build info and the default parameters")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--t-end", type=int)
        sp.add_argument("--dt", type=int)
        sp.add_argument("--dt1", type=int)
        sp.add_argument("--dt2", type=int)
        sp.add_argument("--dt3", type=int)
        sp.add_argument("--extreme-rule")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--trades", action="store_true", help="also write trade logs")

    run = sub.add_parser("run", help="one simulation")
    common(run)
    run.add_argument("--seed", type=int)
    run.add_argument("--ctaa", choices=MODES)
    run.add_argument("--strta", choices=MODES)

    fac = sub.add_parser("factorial", help="the four existence cases over many seeds")
    common(fac)
    fac.add_argument("--seeds", help='e.g. "0..99" or "1,4,9"')
    fac.add_argument("--workers", type=int)
    fac.add_argument("--format", help="comma-separated subset of csv,json,text")
    return p


def cmd_run(cfg: CliConfig) -> int:
    result = run_simulation(cfg.sim)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    trade_path = None
    if cfg.trades:
        trade_path = result.write_trades(out / f"trades_{cfg.sim.seed}.csv")
    (out / f"run_{cfg.sim.seed}.json").write_text(result.to_json(trade_path) + "\n")
    s = result.summary()
    print(f"seed {cfg.sim.seed}: final mid {s['final_mid']:.2f}, {s['n_trades']} trades")
    print(f"  CTAA ({cfg.sim.ctaa_mode}): return {s['ctaa_return_pct']:.1f}%, volume {s['ctaa_volume']}")
    print(f"  STRTA ({cfg.sim.strta_mode}): return {s['strta_return_pct']:.1f}%, volume {s['strta_volume']}")
    return EXIT_OK


def cmd_factorial(cfg: CliConfig) -> int:
    spec = FactorialSpec(base=cfg.sim, seeds=cfg.seeds, workers=cfg.workers)
    report = run_factorial(spec, out_dir=cfg.out, write_trades=cfg.trades)
    emit_report(report, cfg.out, cfg.formats)
    print(render_text(report), end="")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.version:
        print(_version())
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    try:
        cfg = merge_config(load_config_file(args.config), _flag_overrides(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return cmd_run(cfg) if args.command == "run" else cmd_factorial(cfg)
    except RunFailure as exc:
        print(f"run failure: {exc}", file=sys.stderr)
        return EXIT_RUN
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"run failure: {exc}", file=sys.stderr)
        return EXIT_RUN
