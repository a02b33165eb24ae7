"""Photon detection channel: efficiency thinning, background processes, Poisson tails.

Scattered photons become detector counts through Bernoulli thinning at the net
collection+quantum efficiency; stray light and dark counts are homogeneous
Poisson processes. Event times are continuous and no dead time is modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DetectorConfig:
    """Net photon detection efficiency and detector dark-count rate."""

    net_efficiency: float = 0.02
    dark_rate: float = 100.0   # counts/s, always-on detector noise

    def __post_init__(self) -> None:
        if not 0.0 < self.net_efficiency <= 1.0:
            raise ValueError("net_efficiency must lie in (0, 1]")
        if self.dark_rate < 0:
            raise ValueError("dark_rate must be nonnegative")


@dataclass(frozen=True)
class CountTrace:
    """Time-ordered event times inside one probe window."""

    event_times: tuple[float, ...]
    window_length: float

    def __post_init__(self) -> None:
        if self.window_length <= 0:
            raise ValueError("window_length must be positive")
        prev = 0.0
        for t in self.event_times:
            if t < 0.0 or t > self.window_length:
                raise ValueError("event times must lie within [0, window_length]")
            if t < prev:
                raise ValueError("event times must be nondecreasing")
            prev = t

    @property
    def count(self) -> int:
        return len(self.event_times)


def poisson_trace(rate: float, window: float, rng: np.random.Generator) -> CountTrace:
    """Sample a homogeneous Poisson process of the given rate over one window."""
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    if window <= 0:
        raise ValueError("window must be positive")
    n = int(rng.poisson(rate * window))
    times = np.sort(rng.random(n) * window)
    return CountTrace(tuple(times.tolist()), window)


def thin_events(trace: CountTrace, efficiency: float, rng: np.random.Generator) -> CountTrace:
    """Keep each event independently with probability ``efficiency``, order preserved."""
    if not 0.0 <= efficiency <= 1.0:
        raise ValueError("efficiency must lie in [0, 1]")
    if efficiency == 1.0:
        return trace
    if efficiency == 0.0 or not trace.event_times:
        return CountTrace((), trace.window_length)
    times = np.asarray(trace.event_times)
    kept = times[rng.random(times.size) < efficiency]
    return CountTrace(tuple(kept.tolist()), trace.window_length)


def merge_traces(a: CountTrace, b: CountTrace) -> CountTrace:
    """Time-sorted union of two traces over the same window."""
    if a.window_length != b.window_length:
        raise ValueError("cannot merge traces with different window lengths")
    merged = tuple(sorted(a.event_times + b.event_times))
    return CountTrace(merged, a.window_length)


def poisson_tail_at_least(k: int, mean: float) -> float:
    """P(X >= k) for X ~ Poisson(mean), by direct partial summation.

    For k > mean the tail is summed upward from k (terms only decrease, no
    cancellation); otherwise the complement P(X < k) is small enough to
    subtract safely. Accurate to ~1e-15 relative either way.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if mean < 0:
        raise ValueError("mean must be nonnegative")
    if k == 0:
        return 1.0
    if mean == 0.0:
        return 0.0
    if k > mean:
        term = math.exp(k * math.log(mean) - mean - math.lgamma(k + 1))
        total = term
        i = k
        while term > total * 1e-18:
            i += 1
            term *= mean / i
            total += term
        return min(total, 1.0)
    # k <= mean: tail is order unity, 1 - CDF(k-1) loses nothing
    term = math.exp(-mean)
    below = term
    for i in range(1, k):
        term *= mean / i
        below += term
    return 1.0 - below
