"""Seeded random streams.

Each concern gets its own child of one ``SeedSequence``: agent parameters,
per-tick noise and per-tick order-price draws.  Nothing about which
strategy agents are present enters the derivation, so every factorial case
of a given seed consumes identical numbers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_N_STREAMS = 3


@dataclass
class StreamFamily:
    params: np.random.Generator
    noise: np.random.Generator
    order_price: np.random.Generator


def rng_streams(seed: int) -> StreamFamily:
    ss = np.random.SeedSequence(int(seed))
    params, noise, order_price = (np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(_N_STREAMS))
    return StreamFamily(params=params, noise=noise, order_price=order_price)


@dataclass
class Draws:
    """All random numbers one run consumes, materialised up front."""

    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    tau: np.ndarray
    eps: np.ndarray  # eps[t - 1] is the noise of the agent acting at tick t
    uniform: np.ndarray  # likewise for the order-price scatter


def draw_all(seed: int, n: int, w_max, tau_max: int, sigma_eps: float, t_end: int) -> Draws:
    s = rng_streams(seed)
    w1 = s.params.uniform(0.0, w_max[0], n)
    w2 = s.params.uniform(0.0, w_max[1], n)
    w3 = s.params.uniform(0.0, w_max[2], n)
    tau = s.params.integers(1, tau_max, size=n, endpoint=True)
    eps = s.noise.normal(0.0, sigma_eps, t_end)
    uniform = s.order_price.random(t_end)
    return Draws(w1, w2, w3, tau.astype(np.int64), eps, uniform)
