"""Shared oracles for the test suite, independent of the code paths they check."""

from __future__ import annotations

import numpy as np
from scipy import stats


def poisson_chisquare_pvalue(counts, mean: float, min_expected: float = 5.0) -> float:
    """Goodness-of-fit p-value of integer samples against a known Poisson mean."""
    counts = np.asarray(counts, dtype=int)
    n = counts.size
    kmax = int(counts.max())
    ks = np.arange(kmax + 1)
    probs = np.append(stats.poisson.pmf(ks, mean), stats.poisson.sf(kmax, mean))
    observed = np.append(np.bincount(counts, minlength=kmax + 1).astype(float), 0.0)
    expected = probs * n

    obs_pooled: list[float] = []
    exp_pooled: list[float] = []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_pooled.append(acc_o)
            exp_pooled.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0.0 and obs_pooled:
        obs_pooled[-1] += acc_o
        exp_pooled[-1] += acc_e
    exp_arr = np.asarray(exp_pooled)
    exp_arr = exp_arr * (np.sum(obs_pooled) / np.sum(exp_arr))
    _, pvalue = stats.chisquare(obs_pooled, exp_arr)
    return float(pvalue)


def markov_f2_error(efficiency: float, hazard: float, n_d: int, tol: float = 1e-14) -> float:
    """Brute-force bright-state error: absorbing chain over scattering-event sequences.

    State is the number of detections so far for a still-bright atom. Per
    event: detection with probability eta (the photon preempts any depump),
    otherwise depumping with probability hazard, otherwise nothing. Iterated
    until the surviving bright mass is negligible.
    """
    bright = np.zeros(n_d)
    bright[0] = 1.0
    failed = 0.0
    for _ in range(5_000_000):
        detect = bright * efficiency
        dark = bright * (1.0 - efficiency) * hazard
        stay = bright * (1.0 - efficiency) * (1.0 - hazard)
        failed += dark.sum()
        nxt = stay.copy()
        nxt[1:] += detect[:-1]
        bright = nxt
        if bright.sum() < tol:
            break
    return float(failed + bright.sum())


def binomial_3se(p: float, n: int) -> float:
    """Three binomial standard errors of a proportion estimate."""
    return 3.0 * np.sqrt(p * (1.0 - p) / n)
