"""Acceptance checks, one test per criterion, at the stated tolerances.

Criteria 1-3 share one factorial: 100 seeds x 4 cases at the default
configuration (1e6 ticks per run, roughly 12 minutes on one core).
"""
import os
from dataclasses import replace

import numpy as np
import pytest

from artmarket.analytics import excess_kurtosis, squared_return_autocorr, stdev_returns
from artmarket.experiment import (CASES, FactorialSpec, emit_report, paired_difference, run_factorial)
from artmarket.simulator import SimConfig, run_simulation, with_modes

from oracles import naive_acf, naive_moments, random_scenario, replay_against_oracle

DEFAULT = SimConfig()
N_SEEDS = 100


@pytest.fixture(scope="module")
def factorial(tmp_path_factory):
    spec = FactorialSpec(base=DEFAULT, seeds=range(N_SEEDS), workers=os.cpu_count() or 1)
    return run_factorial(spec, out_dir=tmp_path_factory.mktemp("acceptance"))


def test_1_stylized_facts(factorial, criterion):
    with criterion(1, "stylized facts (fat tails, volatility clustering)") as note:
        for label, _, _ in CASES:
            kurt = factorial.stylized[label]["kurtosis"].mean
            acf = [c.mean for c in factorial.stylized[label]["acf_sq"]]
            note(f"{label} kurt={kurt:.2f} acf1={acf[0]:.3f} acf5={acf[4]:.3f}")
            assert kurt > 1
            assert all(a > 0 for a in acf)
            assert acf[0] > 0.05 and acf[0] > acf[4]


def test_2_co_prosperity(factorial, criterion):
    comparisons = [
        ("CTAA return", "ctaa_return_pct", "both", "ctaa_only"),
        ("CTAA volume", "ctaa_volume", "both", "ctaa_only"),
        ("STRTA return", "strta_return_pct", "both", "strta_only"),
        ("STRTA volume", "strta_volume", "both", "strta_only"),
    ]
    with criterion(2, "co-prosperity orderings") as note:
        ok = True
        for name, metric, with_other, without in comparisons:
            diff, se = paired_difference(factorial.records, metric, with_other, without)
            note(f"{name} diff={diff:+.2f} se={se:.2f}")
            ok &= diff > 2 * se
        assert ok


def test_3_volatility_ordering(factorial, criterion):
    with criterion(3, "volatility higher with both agents") as note:
        for metric in ("stdev_100", "stdev_20000"):
            diff, se = paired_difference(factorial.records, metric, "both", "neither")
            note(f"{metric} diff={diff:+.4f}% se={se:.4f}%")
            assert diff > 2 * se


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_4_price_path_similarity(seed, criterion):
    with criterion(4, "price paths with and without agents stay close") as note:
        both = run_simulation(replace(DEFAULT, seed=seed)).mids
        neither = run_simulation(with_modes(replace(DEFAULT, seed=seed), "shadow", "shadow")).mids
        rms = float(np.sqrt(np.mean(((both - neither) / neither) ** 2)))
        note(f"seed {seed} rms={100 * rms:.3f}%")
        assert rms < 0.02


def test_5_matching_engine_oracle(criterion):
    with criterion(5, "matching engine agrees with brute-force matcher") as note:
        rng = np.random.default_rng(12345)
        for _ in range(100_000):
            replay_against_oracle(random_scenario(rng, max_orders=50))
        note("100000 scenarios")


@pytest.mark.parametrize("seed", [0, 11])
def test_6_shadow_neutrality(seed, criterion):
    with criterion(6, "shadow agents leave the market untouched") as note:
        shadow = run_simulation(with_modes(replace(DEFAULT, seed=seed), "shadow", "shadow"))
        absent = run_simulation(with_modes(replace(DEFAULT, seed=seed), "absent", "absent"))
        assert shadow.trades.shape == absent.trades.shape
        assert np.all(shadow.trades == absent.trades)
        assert len(shadow.ctaa.fills) > 0 and len(shadow.strta.fills) > 0
        note(f"seed {seed}: {len(absent.trades)} identical trades")


def test_7_determinism_and_crn(tmp_path, criterion):
    with criterion(7, "deterministic reports and common random numbers") as note:
        base = replace(DEFAULT, t_end=60_000)
        outputs = []
        for workers in (1, 3):
            out = tmp_path / f"w{workers}"
            emit_report(run_factorial(FactorialSpec(base=base, seeds=range(4), workers=workers), out_dir=out), out)
            outputs.append(sorted((p.relative_to(out).as_posix(), p.read_bytes()) for p in out.rglob("*")
                                  if p.is_file()))
        assert outputs[0] == outputs[1]
        note(f"{len(outputs[0])} files byte-identical for 1 and 3 workers")

        runs = [run_simulation(with_modes(replace(DEFAULT, seed=5), "real" if c else "shadow",
                                          "real" if s else "shadow")) for _, c, s in CASES]
        for r in runs[1:]:
            assert r.noise_checksum == runs[0].noise_checksum
            assert np.array_equal(r.mids[:DEFAULT.t_c], runs[0].mids[:DEFAULT.t_c])
        note("four cases share noise and warm-up path")


def test_8_statistics_oracles(criterion):
    with criterion(8, "statistics match direct formulas") as note:
        rng = np.random.default_rng(8)
        for _ in range(200):
            x = rng.standard_t(4, size=int(rng.integers(10, 1001))) * 1e-3
            sd, kurt = naive_moments(list(x))
            assert stdev_returns(x) == pytest.approx(100 * sd, rel=1e-12)
            assert excess_kurtosis(x) == pytest.approx(kurt, rel=1e-12)
            sq = list(x ** 2)
            acf = squared_return_autocorr(x)
            for lag in range(1, 6):
                assert acf[lag - 1] == pytest.approx(naive_acf(sq, lag), rel=1e-12, abs=1e-15)
        assert excess_kurtosis(np.tile([1.0, -1.0], 500)) == -2.0
        note("200 random series; two-point kurtosis is exactly -2")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
