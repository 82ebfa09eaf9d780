"""The 2x2 existence factorial over many seeds.

Every seed is run in four cases that differ only in whether each strategy
agent trades for real or in shadow mode.  All four share the seed's random
streams.  Per-run metric records are the unit of persistence; tables are
always re-derived from them.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analytics import (excess_kurtosis, final_return, interval_returns, squared_return_autocorr,
                        stdev_returns, trading_volume)
from .simulator import RunResult, SimConfig, run_simulation

log = logging.getLogger(__name__)

# (label, ctaa exists, strta exists), in table order
CASES = (
    ("both", True, True),
    ("ctaa_only", True, False),
    ("strta_only", False, True),
    ("neither", False, False),
)
CASE_ORDER = {label: i for i, (label, _, _) in enumerate(CASES)}

SHORT_INTERVAL = 100
LONG_INTERVAL = 20000
ACF_LAGS = (1, 2, 3, 4, 5)

# name -> (metric key, title, cell format)
TABLES = {
    "table1": ("ctaa_return_pct", "Returns of CTAA", "{:.0f}%"),
    "table2": ("ctaa_volume", "Trading volume of CTAA", "{:.0f}"),
    "table3": ("strta_return_pct", "Returns of STRTA", "{:.0f}%"),
    "table4": ("strta_volume", "Trading volume of STRTA", "{:.0f}"),
    "table5": ("stdev_100", f"Standard deviations of returns for {SHORT_INTERVAL} tick times", "{:.3f}%"),
    "table6": ("stdev_20000", f"Standard deviations of returns for {LONG_INTERVAL} tick times", "{:.2f}%"),
}


class RunFailure(RuntimeError):
    def __init__(self, case: str, seed: int, cause: BaseException):
        super().__init__(f"run failed for case={case} seed={seed}: {cause!r}")
        self.case = case
        self.seed = seed


def case_config(base: SimConfig, case: str, seed: int) -> SimConfig:
    """A run configuration for one cell; a non-existent agent trades in shadow mode."""
    _, ctaa, strta = CASES[CASE_ORDER[case]]
    return replace(base, seed=seed, ctaa_mode="real" if ctaa else "shadow",
                   strta_mode="real" if strta else "shadow")


def run_metrics(result: RunResult, case: str) -> dict:
    c = result.config
    short = interval_returns(result.mids, SHORT_INTERVAL, c.t_c)
    long_ = interval_returns(result.mids, LONG_INTERVAL, c.t_c)
    return {
        "case": case,
        "seed": int(c.seed),
        "ctaa_return_pct": final_return(result.ctaa, result.final_mid, c.p_f),
        "ctaa_volume": trading_volume(result.ctaa),
        "strta_return_pct": final_return(result.strta, result.final_mid, c.p_f),
        "strta_volume": trading_volume(result.strta),
        "stdev_100": stdev_returns(short),
        "stdev_20000": stdev_returns(long_) if long_.size >= 2 else None,
        "excess_kurtosis_100": excess_kurtosis(short),
        "acf_sq": [float(v) for v in squared_return_autocorr(short, ACF_LAGS)],
    }


def _one_run(base: SimConfig, case: str, seed: int, trades_dir: Optional[str]) -> dict:
    try:
        result = run_simulation(case_config(base, case, seed))
        if trades_dir is not None:
            result.write_trades(Path(trades_dir) / f"trades_{case}_{seed}.csv")
        return run_metrics(result, case)
    except Exception as exc:  # re-raised with the failing cell attached
        raise RunFailure(case, seed, exc) from exc


@dataclass
class FactorialSpec:
    base: SimConfig = field(default_factory=SimConfig)
    seeds: Sequence[int] = tuple(range(100))
    workers: int = 1

    def validate(self) -> "FactorialSpec":
        self.base.validate()
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        return self


@dataclass
class Cell:
    mean: float
    se: Optional[float]
    n: int


@dataclass
class FactorialReport:
    base: SimConfig
    seeds: list
    records: list  # per-run metric dicts sorted by (case, seed)
    tables: dict  # table name -> {case: Cell}
    stylized: dict  # case -> {"kurtosis": Cell, "acf_sq": [Cell] * 5}

    def cell(self, table: str, case: str) -> Cell:
        return self.tables[table][case]

    def to_dict(self) -> dict:
        return {
            "config": self.base.to_dict(),
            "seeds": list(self.seeds),
            "tables": {name: {"metric": TABLES[name][0], "title": TABLES[name][1],
                              "cells": {case: vars(cell) for case, cell in cells.items()}}
                       for name, cells in self.tables.items()},
            "stylized_facts": {case: {"excess_kurtosis_100": vars(v["kurtosis"]),
                                      "acf_sq": [vars(c) for c in v["acf_sq"]]}
                               for case, v in self.stylized.items()},
        }


def _cell(values) -> Cell:
    x = np.asarray([v for v in values if v is not None], dtype=float)
    if x.size == 0:
        return Cell(float("nan"), None, 0)
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else None
    return Cell(float(x.mean()), se, int(x.size))


def aggregate(records: Sequence[dict], base: SimConfig, seeds: Sequence[int]) -> FactorialReport:
    """Average per-run records into the report tables (independent of record order)."""
    records = sorted(records, key=lambda r: (CASE_ORDER[r["case"]], r["seed"]))
    by_case = {label: [r for r in records if r["case"] == label] for label, _, _ in CASES}
    for label, rs in by_case.items():
        if sorted(r["seed"] for r in rs) != sorted(seeds):
            raise ValueError(f"case {label} does not cover exactly the requested seeds")
    tables = {name: {label: _cell(r[key] for r in by_case[label]) for label, _, _ in CASES}
              for name, (key, _, _) in TABLES.items()}
    stylized = {label: {"kurtosis": _cell(r["excess_kurtosis_100"] for r in rs),
                        "acf_sq": [_cell(r["acf_sq"][i] for r in rs) for i in range(len(ACF_LAGS))]}
                for label, rs in by_case.items()}
    return FactorialReport(base, sorted(seeds), records, tables, stylized)


def paired_difference(records: Sequence[dict], metric: str, case_a: str, case_b: str) -> tuple[float, float]:
    """Mean and standard error over seeds of metric(case_a) - metric(case_b)."""
    a = {r["seed"]: r[metric] for r in records if r["case"] == case_a}
    b = {r["seed"]: r[metric] for r in records if r["case"] == case_b}
    seeds = sorted(a.keys() & b.keys())
    d = np.array([a[s] - b[s] for s in seeds], dtype=float)
    if d.size < 2:
        raise ValueError("need at least two common seeds")
    return float(d.mean()), float(d.std(ddof=1) / math.sqrt(d.size))


def run_factorial(spec: FactorialSpec, out_dir=None, write_trades: bool = False) -> FactorialReport:
    """Run all four cases for every seed and aggregate.

    With ``out_dir`` set, per-run records go to ``runs/metrics.jsonl`` (and
    trade logs to ``runs/`` when ``write_trades``).
    """
    spec.validate()
    trades_dir = None
    if out_dir is not None:
        runs_dir = Path(out_dir) / "runs"
        runs_dir.mkdir(parents=True, exist_ok=True)
        if write_trades:
            trades_dir = str(runs_dir)
    jobs = [(spec.base, label, int(seed), trades_dir) for seed in spec.seeds for label, _, _ in CASES]
    log.info("running %d simulations on %d worker(s)", len(jobs), spec.workers)
    if spec.workers == 1:
        records = [_one_run(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = [pool.submit(_one_run, *job) for job in jobs]
            records = [f.result() for f in futures]
    report = aggregate(records, spec.base, spec.seeds)
    if out_dir is not None:
        write_records(report.records, Path(out_dir) / "runs" / "metrics.jsonl")
    return report


def write_records(records, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    return path


def read_records(path) -> list:
    with Path(path).open() as fh:
        return [json.loads(line) for line in fh if line.strip()]


# ---------------------------------------------------------------------------
# output


def _header_lines(report: FactorialReport) -> list[str]:
    c = report.base
    w = c.windows
    return [
        f"seeds: {len(report.seeds)} ({report.seeds[0]}..{report.seeds[-1]})",
        f"n={c.n} w_max={list(c.w_max)} tau_max={c.tau_max} sigma_eps={c.sigma_eps} p_d={c.p_d} "
        f"t_c={c.t_c} delta_p={c.delta_p} p_f={c.p_f} t_end={c.t_end}",
        f"strategy windows: dt={w.dt} dt1={w.dt1} dt2={w.dt2} dt3={w.dt3} extreme_rule={c.extreme_rule}",
    ]


def _fmt(fmt: str, cell: Cell) -> str:
    s = fmt.format(cell.mean)
    if cell.se is not None:
        s += f" ±{cell.se:.2g}"
    return s


def render_text(report: FactorialReport) -> str:
    lines = _header_lines(report) + [""]
    for name, (_, title, fmt) in TABLES.items():
        cells = report.tables[name]
        lines.append(f"{name}: {title}")
        lines.append(f"{'':16}{'STRTA exist':>20}{'STRTA not exist':>20}")
        lines.append(f"{'CTAA exist':16}{_fmt(fmt, cells['both']):>20}{_fmt(fmt, cells['ctaa_only']):>20}")
        lines.append(f"{'CTAA not exist':16}{_fmt(fmt, cells['strta_only']):>20}{_fmt(fmt, cells['neither']):>20}")
        lines.append("")
    lines.append("stylized facts (100-tick returns)")
    lines.append(f"{'':22}" + "".join(f"{label:>14}" for label, _, _ in CASES))
    lines.append(f"{'excess kurtosis':22}" + "".join(
        f"{report.stylized[label]['kurtosis'].mean:>14.2f}" for label, _, _ in CASES))
    for i, lag in enumerate(ACF_LAGS):
        lines.append(f"{'acf of r^2, lag ' + str(lag):22}" + "".join(
            f"{report.stylized[label]['acf_sq'][i].mean:>14.3f}" for label, _, _ in CASES))
    return "\n".join(lines) + "\n"


def emit_report(report: FactorialReport, out_dir, formats=("csv", "json", "text")) -> list[Path]:
    """Write the report under ``out_dir/report``; returns the files written."""
    report_dir = Path(out_dir) / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "csv":
            for name, (metric, _, _) in TABLES.items():
                path = report_dir / f"{name}.csv"
                with path.open("w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(["ctaa", "strta", "case", "metric", "mean", "se", "n"])
                    for label, ctaa, strta in CASES:
                        cell = report.tables[name][label]
                        w.writerow(["exist" if ctaa else "not exist", "exist" if strta else "not exist",
                                    label, metric, repr(cell.mean), "" if cell.se is None else repr(cell.se),
                                    cell.n])
                written.append(path)
            path = report_dir / "stylized_facts.csv"
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["statistic", "lag"] + [label for label, _, _ in CASES])
                w.writerow(["excess_kurtosis_100", ""] +
                           [repr(report.stylized[label]["kurtosis"].mean) for label, _, _ in CASES])
                for i, lag in enumerate(ACF_LAGS):
                    w.writerow(["acf_sq", lag] +
                               [repr(report.stylized[label]["acf_sq"][i].mean) for label, _, _ in CASES])
            written.append(path)
        elif fmt == "json":
            path = report_dir / "report.json"
            path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
            written.append(path)
        elif fmt in ("text", "text-table"):
            path = report_dir / "report.txt"
            path.write_text(render_text(report))
            written.append(path)
        else:
            raise ValueError(f"unknown report format {fmt!r}")
    return written
