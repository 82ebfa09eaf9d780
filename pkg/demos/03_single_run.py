"""One simulation and the stylized facts of its mid-price returns.

A full run (1e6 ticks) takes a couple of seconds after a one-off JIT
compilation of roughly half a minute.
"""
from artmarket.analytics import excess_kurtosis, interval_returns, squared_return_autocorr, stdev_returns
from artmarket.simulator import SimConfig, run_simulation

config = SimConfig(seed=7)
result = run_simulation(config)
print(result.summary())

r100 = interval_returns(result.mids, 100, start=config.t_c)
r20k = interval_returns(result.mids, 20000, start=config.t_c)
print(f"stdev of 100-tick returns   {stdev_returns(r100):.3f}%")
print(f"stdev of 20000-tick returns {stdev_returns(r20k):.2f}%")
print(f"excess kurtosis             {excess_kurtosis(r100):.2f}")
print("acf of squared returns     ", squared_return_autocorr(r100).round(3))

# the trade log is plain CSV
result.write_trades("trades_seed7.csv")
