"""Normal-agent expectations, order placement, and the strategy agents' triggers."""
import numpy as np

from artmarket.agents import (ExpectationInputs, NAParams, RollingExtremum, StrategyAgentState,
                              StrategyWindows, ctaa_decide, na_expected_price, na_expected_return,
                              na_generate_order, strta_decide)

# a chartist-heavy agent after a 1% rise, with no noise this tick
params = NAParams(w1=0.5, w2=6.0, w3=0.5, tau=300)
r = na_expected_return(params, ExpectationInputs(fundamental=10000.0, mid_now=10100.0,
                                                 mid_lagged=10000.0, noise_draw=0.0))
p_e = na_expected_price(10100.0, r)
print(f"expected return {r:+.5f}, expected price {p_e:.2f}")

# the order price is uniform in (p_e - p_d, p_e + p_d); below p_e it is a buy
for u in (0.2, 0.45, 0.8):
    print(u, na_generate_order(p_e, u, tick=20000, warmup=False))

# strategy agents look at window extremes of the mid series
w = StrategyWindows(dt1=6, dt2=4, dt3=3, dt=2)
path = [100, 101, 102, 103, 104, 105]
trend, rev = StrategyAgentState("trend_follower"), StrategyAgentState("reversal")
print("trend follower on a breakout:", ctaa_decide(trend, path, w))   # 1 (buy)
print("reversal trader on the same tick:", strta_decide(rev, path, w))  # -1 (sell)

# in the simulator the extremes come from monotonic deques, O(1) per tick;
# the answer is False until four earlier mids are held
hi = RollingExtremum(4, 1.0)
for x in np.array([3.0, 1.0, 4.0, 1.0, 5.0, 2.0]):
    print(f"{x}: new 5-tick high? {hi.reached_by(x, False)}")
    hi.push(x)
