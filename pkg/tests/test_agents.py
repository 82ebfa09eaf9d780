import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artmarket.agents import (ExpectationInputs, NAParams, RollingExtremum, StrategyAgentState,
                              StrategyWindows, ctaa_decide, na_expected_price, na_expected_return,
                              na_generate_order, reversal_signal, rolling_is_extreme, strta_decide,
                              trend_signal)
from artmarket.orderbook import BUY, SELL

PF = 10000.0


def inputs(mid_now, mid_lagged=None, eps=0.0):
    return ExpectationInputs(fundamental=PF, mid_now=mid_now, mid_lagged=mid_lagged, noise_draw=eps)


class TestExpectedReturn:
    def test_all_at_fundamental(self):
        assert na_expected_return(NAParams(1, 1, 0, 5), inputs(PF, PF)) == 0.0

    def test_fundamental_pull(self):
        r = na_expected_return(NAParams(1, 0, 0, 5), inputs(9900.0, PF))
        assert r == pytest.approx(math.log(10000 / 9900), rel=1e-14)
        assert r == pytest.approx(0.0100503358535014, rel=1e-12)

    def test_chartist_term(self):
        r = na_expected_return(NAParams(0, 2, 0, 5), inputs(10100.0, PF))
        assert r == pytest.approx(math.log(1.01), rel=1e-14)

    def test_chartist_term_dropped_before_lookback(self):
        with_lag = na_expected_return(NAParams(1, 3, 0.5, 5), inputs(10100.0, None, 0.01))
        alone = (1 * math.log(PF / 10100) + 0.5 * 0.01) / 4.5
        assert with_lag == pytest.approx(alone, rel=1e-14)

    def test_noise_term(self):
        assert na_expected_return(NAParams(0, 0, 0.7, 5), inputs(PF, PF, 0.03)) == pytest.approx(0.03)

    def test_zero_weights_rejected(self):
        with pytest.raises(ValueError):
            na_expected_return(NAParams(0, 0, 0, 5), inputs(PF, PF))

    @given(w=st.tuples(*[st.floats(0.01, 10)] * 3), k=st.floats(0.01, 100),
           mid=st.floats(5000, 20000), lag=st.floats(5000, 20000), eps=st.floats(-0.1, 0.1))
    def test_weight_homogeneity(self, w, k, mid, lag, eps):
        a = na_expected_return(NAParams(*w, 5), inputs(mid, lag, eps))
        b = na_expected_return(NAParams(*(k * x for x in w), 5), inputs(mid, lag, eps))
        assert b == pytest.approx(a, rel=1e-9, abs=1e-15)

    @given(w1=st.floats(0.01, 1), mid=st.floats(5000, 20000).filter(lambda m: abs(m - PF) > 1e-6))
    def test_fundamentalist_sign(self, w1, mid):
        r = na_expected_return(NAParams(w1, 0, 0, 5), inputs(mid, mid * 1.1, 0.5))
        assert np.sign(r) == -np.sign(math.log(mid / PF))


class TestExpectedPrice:
    def test_identity(self):
        assert na_expected_price(PF, 0.0) == PF

    def test_up_and_down(self):
        up = na_expected_price(PF, 0.0100503358535014)
        down = na_expected_price(PF, -0.0100503358535014)
        assert up == pytest.approx(10101.0101010101, rel=1e-12)
        assert down == pytest.approx(9900.0, rel=1e-12)
        assert up * down == pytest.approx(PF * PF, rel=1e-12)


class TestGenerateOrder:
    def test_low_draw_buys(self):
        o = na_generate_order(PF, 0.25, tick=20000, warmup=False)
        assert (o.side, o.price) == (BUY, 950000)

    def test_high_draw_sells(self):
        o = na_generate_order(PF, 0.75, tick=20000, warmup=False)
        assert (o.side, o.price) == (SELL, 1050000)

    def test_warmup_uses_fundamental(self):
        o = na_generate_order(12000.0, 0.6, tick=5, warmup=True)
        assert o.side == SELL and o.price == 1220000
        # P_o = 11800 sits below the expectation but above the fundamental
        assert na_generate_order(12000.0, 0.4, tick=5, warmup=True).side == SELL
        assert na_generate_order(12000.0, 0.4, tick=5, warmup=False).side == BUY

    def test_nonpositive_price_skipped(self):
        assert na_generate_order(500.0, 0.1, tick=1, warmup=False) is None

    def test_rounding_by_side(self):
        # P_o = 10000.0006: a sell, rounded up
        o = na_generate_order(PF, 0.5000003, 1, False)
        assert (o.side, o.price) == (SELL, 1000001)
        # P_o = 9999.9994: a buy, rounded down
        o = na_generate_order(PF, 0.4999997, 1, False)
        assert (o.side, o.price) == (BUY, 999999)


class TestRollingIsExtreme:
    @pytest.mark.parametrize("window, cur, lb, mode, expected", [
        ([3, 1, 4, 1, 5], 5, 5, "max", True),
        ([5, 5, 4], 4, 3, "max", False),
        ([2, 2, 2], 2, 3, "min", True),
        ([1, 2], 2, 3, "max", False),
        ([9, 1, 2], 2, 2, "max", True),
    ])
    def test_examples(self, window, cur, lb, mode, expected):
        assert rolling_is_extreme(window, cur, lb, mode) is expected

    def test_deque_matches_naive_scan(self):
        rng = np.random.default_rng(7)
        lookbacks = [1, 2, 3, 7, 31, 100]
        trackers = [(lb, RollingExtremum(lb - 1, 1.0), RollingExtremum(lb - 1, -1.0)) for lb in lookbacks]
        # coarse grid so ties are frequent
        series = np.cumsum(rng.integers(-1, 2, 20000)) * 0.5
        checks = 0
        for i, x in enumerate(series):
            for lb, hi, lo in trackers:
                window = series[: i + 1]
                assert hi.reached_by(x, False) == rolling_is_extreme(window, x, lb, "max")
                assert lo.reached_by(x, False) == rolling_is_extreme(window, x, lb, "min")
                if i + 1 >= lb:
                    prior = series[i - lb + 1: i]
                    assert hi.reached_by(x, True) == bool(prior.size == 0 or x > prior.max())
                checks += 1
            for _, hi, lo in trackers:
                hi.push(x)
                lo.push(x)
        assert checks >= 10 ** 5


class TestStrategyDecisions:
    W = StrategyWindows(dt1=5, dt2=3, dt3=2, dt=2)

    def test_trend_entry_long(self):
        assert ctaa_decide(StrategyAgentState("trend_follower"), [1, 2, 3, 4, 5], self.W) == BUY

    def test_trend_entry_short(self):
        assert ctaa_decide(StrategyAgentState("trend_follower"), [5, 4, 3, 2, 1], self.W) == SELL

    def test_trend_exit(self):
        s = StrategyAgentState("trend_follower", position=1)
        assert ctaa_decide(s, [5, 6, 7, 3, 2], self.W) == SELL

    def test_trend_no_pyramiding(self):
        s = StrategyAgentState("trend_follower", position=1)
        assert ctaa_decide(s, [1, 2, 3, 4, 5], self.W) is None

    def test_reversal_entry_long(self):
        assert strta_decide(StrategyAgentState("reversal"), [5, 4, 3], self.W) == BUY

    def test_reversal_buy_back(self):
        s = StrategyAgentState("reversal", position=-1)
        assert strta_decide(s, [9, 3, 2], self.W) == BUY

    def test_reversal_idle(self):
        assert strta_decide(StrategyAgentState("reversal"), [1, 3, 2], self.W) is None

    def test_flat_window_is_no_breakout(self):
        assert ctaa_decide(StrategyAgentState("trend_follower"), [2] * 5, self.W) is None

    @given(pos=st.sampled_from([-1, 0, 1]), flags=st.tuples(*[st.booleans()] * 4))
    def test_never_breaches_limit(self, pos, flags):
        for signal in (trend_signal, reversal_signal):
            side = signal(pos, *flags)
            assert abs(pos + side) <= 1
            # from flat only entries; from a position only exits
            assert side == 0 or pos == 0 or side == -pos

    @settings(max_examples=300)
    @given(st.lists(st.integers(0, 6), min_size=5, max_size=40))
    def test_opposition(self, steps):
        window = np.cumsum(steps).astype(float)
        w = StrategyWindows(dt1=5, dt2=3, dt3=2, dt=2)
        c = ctaa_decide(StrategyAgentState("trend_follower"), window, w)
        s = strta_decide(StrategyAgentState("reversal"), window, w)
        if c == BUY:
            assert s != BUY
        if c == SELL:
            assert s != SELL

    @settings(max_examples=200)
    @given(st.lists(st.floats(9000, 11000), min_size=10, max_size=200))
    def test_fills_alternate(self, path):
        s = StrategyAgentState("trend_follower")
        w = StrategyWindows(dt1=4, dt2=2, dt3=2, dt=2)
        for i in range(len(path)):
            side = ctaa_decide(s, path[: i + 1], w)
            if side is not None:
                s.record_fill(i, side, path[i])
        sides = [f[1] for f in s.fills]
        # entries and exits alternate: partial sums stay within {-1, 0, 1}
        assert all(abs(x) <= 1 for x in np.cumsum(sides))
        assert s.position == sum(sides)

    def test_record_fill_guards_limit(self):
        s = StrategyAgentState("trend_follower", position=1)
        with pytest.raises(ValueError):
            s.record_fill(0, BUY, PF)


def test_window_validation():
    with pytest.raises(ValueError):
        StrategyWindows(dt=201).validate()
    with pytest.raises(ValueError):
        StrategyWindows(dt1=0).validate()
    StrategyWindows().validate()
