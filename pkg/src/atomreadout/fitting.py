"""Histograms, binomial intervals, and the two nonlinear least-squares fits.

Both fitters use a damped normal-equations (Levenberg-Marquardt) refinement
with analytic Jacobians; the damped-sinusoid fit is seeded by a coarse grid
search over frequency so the refinement never starts in the wrong fringe.
Steps that would increase the residual are rejected, so the recorded residual
history is non-increasing by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtri

MAX_ITERATIONS = 200
RELATIVE_PARAMETER_TOL = 1e-6


@dataclass(frozen=True)
class Histogram:
    """Unit-width integer count bins; ``bin_edges`` has one more entry than ``frequencies``."""

    bin_edges: tuple[int, ...]
    frequencies: tuple[int, ...]
    total: int

    def __post_init__(self) -> None:
        if len(self.bin_edges) != len(self.frequencies) + 1:
            raise ValueError("bin_edges must have one more entry than frequencies")
        if sum(self.frequencies) != self.total:
            raise ValueError("frequencies must sum to total")

    def fraction(self, count: int) -> float:
        """Fraction of samples landing exactly on ``count`` (0 outside the range)."""
        if self.total == 0 or count < 0 or count >= len(self.frequencies):
            return 0.0
        return self.frequencies[count] / self.total


def build_histogram(counts: Sequence[int]) -> Histogram:
    """Histogram of detected counts with unit bins from 0 to max(counts)."""
    values = [int(c) for c in counts]
    if any(c < 0 for c in values):
        raise ValueError("counts must be nonnegative")
    if not values:
        return Histogram((0,), (), 0)
    top = max(values)
    freq = [0] * (top + 1)
    for c in values:
        freq[c] += 1
    return Histogram(tuple(range(top + 2)), tuple(freq), len(values))


def binomial_interval(
    successes: int, trials: int, confidence: float = 0.95
) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie strictly between 0 and 1")
    z = float(ndtri(1.0 - (1.0 - confidence) / 2.0))
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4 * trials * trials)) / denom
    # the bounds are exactly 0 and 1 at the empty/full edges; keep them so
    low = 0.0 if successes == 0 else max(center - half, 0.0)
    high = 1.0 if successes == trials else min(center + half, 1.0)
    return low, high


@dataclass(frozen=True)
class FitResult:
    """Fit outcome. ``gradient_norm`` is the scale-free stationarity measure
    max_j |J_j . r| / (||J_j|| ||r||); ``converged`` implies it is below 1e-6."""

    parameters: dict[str, float]
    residual_norm: float
    converged: bool
    iterations: int
    covariance_diag: dict[str, float]
    residual_history: tuple[float, ...]
    gradient_norm: float


def _relative_gradient(jac: np.ndarray, r: np.ndarray) -> float:
    """Stationarity measure: largest cosine between the residual and a Jacobian column."""
    rnorm = float(np.linalg.norm(r))
    if rnorm == 0.0:
        return 0.0
    col_norms = np.linalg.norm(jac, axis=0)
    grad = np.abs(jac.T @ r)
    safe = np.where(col_norms > 0.0, col_norms, 1.0)
    return float(np.max(grad / (safe * rnorm)))


def _levenberg_marquardt(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    p0: np.ndarray,
    accept: Callable[[np.ndarray], bool] | None = None,
) -> tuple[np.ndarray, float, bool, int, list[float], float, np.ndarray]:
    p = np.asarray(p0, dtype=float)
    r = residual(p)
    cost = float(r @ r)
    history = [math.sqrt(cost)]
    lam = 1e-3
    stationary = False
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        jac = jacobian(p)
        jtj = jac.T @ jac
        grad = jac.T @ r
        stepped = False
        step = np.zeros_like(p)
        cand = p
        r_new = r
        cost_new = cost
        for _ in range(60):
            damping = lam * np.diag(np.clip(np.diag(jtj), 1e-12, None))
            try:
                step = np.linalg.solve(jtj + damping, -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            cand = p + step
            if accept is not None and not accept(cand):
                lam *= 10.0
                continue
            r_new = residual(cand)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                stepped = True
                break
            lam *= 10.0
            if lam > 1e14:
                break
        if not stepped:
            # no damped step improves the cost: a numerical stationary point
            stationary = True
            break
        rel_step = float(np.max(np.abs(step) / np.maximum(np.abs(cand), 1e-30)))
        improvement = cost - cost_new
        p, r, cost = cand, r_new, cost_new
        history.append(math.sqrt(cost))
        lam = max(lam * 0.2, 1e-12)
        if math.sqrt(cost) <= 1e-12 * max(history[0], 1e-300):
            # residuals at the rounding floor of the data: a perfect fit
            stationary = True
            break
        if rel_step < RELATIVE_PARAMETER_TOL or improvement <= 1e-12 * max(cost, 1e-300):
            stationary = True
            break
    jac = jacobian(p)
    grad_measure = _relative_gradient(jac, residual(p))
    if math.sqrt(cost) <= 1e-12 * max(history[0], 1e-300):
        grad_measure = 0.0
    converged = stationary and grad_measure <= 1e-6
    dof = r.size - p.size
    if dof > 0:
        sigma2 = cost / dof
        cov_diag = np.maximum(np.diag(np.linalg.pinv(jac.T @ jac)) * sigma2, 0.0)
    else:
        cov_diag = np.full(p.size, float("nan"))
    return p, cost, converged, iterations, history, grad_measure, cov_diag


def fit_exponential(
    x: Sequence[float], y: Sequence[float], with_amplitude: bool = False
) -> FitResult:
    """Fit y = exp(-x/L) (optionally A*exp(-x/L)) and report the lifetime L.

    The derived per-step loss 1 - exp(-1/L) is included in the parameters,
    with its variance propagated from the lifetime estimate.
    """
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("x and y must be one-dimensional and equally long")
    if xs.size < 3:
        raise ValueError("need at least 3 points")
    if np.any(ys <= 0.0) or np.any(ys > 1.0):
        raise ValueError("y values must lie in (0, 1]")
    if np.all(ys == ys[0]):
        raise ValueError("degenerate data: all y values are equal")

    logy = np.log(ys)
    xc = xs - xs.mean()
    denom = float(xc @ xc)
    slope = float(xc @ (logy - logy.mean()) / denom) if denom > 0 else 0.0
    span = float(xs.max() - xs.min())
    lifetime0 = -1.0 / slope if slope < -1e-300 else 10.0 * max(span, 1.0)
    amp0 = float(math.exp(logy.mean() - slope * (-xs.mean()))) if with_amplitude else 1.0

    if with_amplitude:
        p0 = np.array([amp0, lifetime0])

        def residual(p: np.ndarray) -> np.ndarray:
            return ys - p[0] * np.exp(-xs / p[1])

        def jacobian(p: np.ndarray) -> np.ndarray:
            e = np.exp(-xs / p[1])
            return np.column_stack((-e, -p[0] * e * xs / p[1] ** 2))

        def accept(p: np.ndarray) -> bool:
            return p[0] > 0 and p[1] > 0

        names = ("amplitude", "lifetime")
    else:
        p0 = np.array([lifetime0])

        def residual(p: np.ndarray) -> np.ndarray:
            return ys - np.exp(-xs / p[0])

        def jacobian(p: np.ndarray) -> np.ndarray:
            e = np.exp(-xs / p[0])
            return np.column_stack((-e * xs / p[0] ** 2,))

        def accept(p: np.ndarray) -> bool:
            return p[0] > 0

        names = ("lifetime",)

    p, cost, converged, iterations, history, grad_norm, cov = _levenberg_marquardt(
        residual, jacobian, p0, accept
    )
    params = dict(zip(names, (float(v) for v in p)))
    cov_diag = dict(zip(names, (float(v) for v in cov)))
    lifetime = params["lifetime"]
    loss = 1.0 - math.exp(-1.0 / lifetime)
    params["loss_per_cycle"] = loss
    dloss_dL = -math.exp(-1.0 / lifetime) / lifetime**2
    cov_diag["loss_per_cycle"] = dloss_dL**2 * cov_diag["lifetime"]
    return FitResult(
        params, math.sqrt(cost), converged, iterations, cov_diag, tuple(history), grad_norm
    )


def _sinusoid_model(p: np.ndarray, ts: np.ndarray) -> np.ndarray:
    c, a, f, tau = p
    return c + 0.5 * a * (1.0 - np.cos(2.0 * math.pi * f * ts) * np.exp(-ts / tau))


def _sinusoid_linear_fit(
    ts: np.ndarray, ys: np.ndarray, f: float, tau: float
) -> tuple[float, float, float]:
    """Best (offset-like, fringe) coefficients at fixed frequency and damping."""
    basis = np.column_stack(
        (np.ones_like(ts), -np.cos(2.0 * math.pi * f * ts) * np.exp(-ts / tau))
    )
    coef, *_ = np.linalg.lstsq(basis, ys, rcond=None)
    resid = ys - basis @ coef
    return float(coef[0]), float(coef[1]), float(resid @ resid)


def fit_damped_sinusoid(t: Sequence[float], p: Sequence[float]) -> FitResult:
    """Fit p(t) = C + A/2 * (1 - cos(2 pi f t) exp(-t/tau)), phase fixed at zero.

    Times are anchored at the first sample, so a uniform shift of the scan
    leaves the fitted parameters unchanged. A 20-point frequency grid, a
    golden-section polish of the winning candidate, and a final four-parameter
    refinement avoid the usual wrong-fringe local minima.
    """
    traw = np.asarray(t, dtype=float)
    ys = np.asarray(p, dtype=float)
    if traw.shape != ys.shape or traw.ndim != 1:
        raise ValueError("t and p must be one-dimensional and equally long")
    if traw.size < 8:
        raise ValueError("need at least 8 points")
    ts = traw - traw[0]
    span = float(ts[-1])
    if span <= 0:
        raise ValueError("times must span a positive interval")

    tau0 = span
    f_grid = np.linspace(0.2 / span, 25.0 / span, 20)
    scored = [(_sinusoid_linear_fit(ts, ys, f, tau0)[2], f) for f in f_grid]
    best_f = min(scored)[1]

    # golden-section polish of the frequency within one grid cell each side
    delta = float(f_grid[1] - f_grid[0])
    lo, hi = max(best_f - delta, 1e-12), best_f + delta
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a_pt, b_pt = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
    fa = _sinusoid_linear_fit(ts, ys, a_pt, tau0)[2]
    fb = _sinusoid_linear_fit(ts, ys, b_pt, tau0)[2]
    for _ in range(48):
        if fa <= fb:
            hi, b_pt, fb = b_pt, a_pt, fa
            a_pt = hi - invphi * (hi - lo)
            fa = _sinusoid_linear_fit(ts, ys, a_pt, tau0)[2]
        else:
            lo, a_pt, fa = a_pt, b_pt, fb
            b_pt = lo + invphi * (hi - lo)
            fb = _sinusoid_linear_fit(ts, ys, b_pt, tau0)[2]
    f_seed = 0.5 * (lo + hi)
    b0, b1, _ = _sinusoid_linear_fit(ts, ys, f_seed, tau0)
    p0 = np.array([b0 - b1, 2.0 * b1, f_seed, tau0])

    def residual(q: np.ndarray) -> np.ndarray:
        return ys - _sinusoid_model(q, ts)

    def jacobian(q: np.ndarray) -> np.ndarray:
        _, a, f, tau = q
        theta = 2.0 * math.pi * f * ts
        damp = np.exp(-ts / tau)
        cos_t = np.cos(theta)
        dm_dc = np.ones_like(ts)
        dm_da = 0.5 * (1.0 - cos_t * damp)
        dm_df = 0.5 * a * 2.0 * math.pi * ts * np.sin(theta) * damp
        dm_dtau = -0.5 * a * cos_t * damp * ts / tau**2
        return -np.column_stack((dm_dc, dm_da, dm_df, dm_dtau))

    def accept(q: np.ndarray) -> bool:
        return q[2] > 0 and q[3] > 0

    pfit, cost, converged, iterations, history, grad_norm, cov = _levenberg_marquardt(
        residual, jacobian, p0, accept
    )
    names = ("offset", "amplitude", "frequency", "decoherence_time")
    return FitResult(
        dict(zip(names, (float(v) for v in pfit))),
        math.sqrt(cost),
        converged,
        iterations,
        dict(zip(names, (float(v) for v in cov))),
        tuple(history),
        grad_norm,
    )
