"""Counterfactual accounting: a shadow agent books fills but never touches the book."""
import numpy as np

from artmarket.simulator import SimConfig, run_simulation, with_modes

base = SimConfig(seed=3, t_end=200_000)

absent = run_simulation(with_modes(base, "absent", "absent"))
shadow = run_simulation(with_modes(base, "shadow", "shadow"))
real = run_simulation(with_modes(base, "real", "real"))

# shadow agents leave every trade and every mid unchanged
print("shadow == absent:", np.array_equal(shadow.trades, absent.trades), np.array_equal(shadow.mids, absent.mids))
print("shadow CTAA fills:", len(shadow.ctaa.fills), "shadow STRTA fills:", len(shadow.strta.fills))

# all cases share the warm-up path and the noise draws
print("same warm-up:", np.array_equal(real.mids[:base.t_c], absent.mids[:base.t_c]))
print("same noise:", real.noise_checksum == absent.noise_checksum)

# real agents perturb prices without taking them over
rel = (real.mids - absent.mids) / absent.mids
print(f"rms relative mid difference: {100 * np.sqrt(np.mean(rel ** 2)):.3f}%")
for name, r in (("shadow", shadow), ("real", real)):
    s = r.summary()
    print(f"{name}: CTAA {s['ctaa_return_pct']:+.1f}% / {s['ctaa_volume']} trades, "
          f"STRTA {s['strta_return_pct']:+.1f}% / {s['strta_volume']} trades")
