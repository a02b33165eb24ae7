"""Classification policies and their analytic error rates.

Two rules are supported: a fixed window with a count threshold, and the
adaptive rule that extinguishes the probe as soon as ``threshold_counts``
detections have arrived. The adaptive rule is the interesting one: a bright
atom is identified after a couple of counts instead of a full window, cutting
scattering (and heating) by an order of magnitude.

The F=2 failure channel is a race, per scattering event, between detection
(probability eta) and depumping into the dark F=1 state (probability q).
Within one event the emitted photon is credited before the depump can act:
if the photon is detected, the event cannot also dump the atom. Under that
convention the chance that one more count arrives while the atom is still
bright is p1 = eta / (eta + q - eta*q), and n_d required counts succeed with
probability p1**n_d exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .detection import poisson_tail_at_least
from .physics import F1, F2, RB87_D2, SpeciesConstants, depump_suppression

FIXED_WINDOW = "fixed-window"
ADAPTIVE_STOP = "adaptive-stop"


@dataclass(frozen=True)
class ReadoutPolicy:
    """Classification rule: threshold counts within (or before) a time limit."""

    kind: str = ADAPTIVE_STOP
    threshold_counts: int = 2
    max_duration: float = 300e-6

    def __post_init__(self) -> None:
        if self.kind not in (FIXED_WINDOW, ADAPTIVE_STOP):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.threshold_counts < 1:
            raise ValueError("threshold_counts must be at least 1")
        if self.max_duration <= 0:
            raise ValueError("max_duration must be positive")


@dataclass(frozen=True)
class ProbeEvent:
    """One event seen during a probe: a detector count and/or a scattering event."""

    time: float
    detected: bool = True
    scatter: bool = False
    depump: bool = False


@dataclass(frozen=True)
class ReadoutOutcome:
    classified: str
    detected_counts: int
    elapsed: float
    scatters: int
    depumped_during_probe: bool


def detection_events(times: Iterable[float]) -> tuple[ProbeEvent, ...]:
    """Wrap bare detection times (e.g. a background-only trace) as probe events."""
    return tuple(ProbeEvent(time=float(t)) for t in times)


def classify_fixed(counts: int, policy: ReadoutPolicy) -> str:
    """Threshold classification of a full-window count."""
    if policy.kind != FIXED_WINDOW:
        raise ValueError("classify_fixed requires a fixed-window policy")
    if counts < 0:
        raise ValueError("counts must be nonnegative")
    return F2 if counts >= policy.threshold_counts else F1


def run_adaptive(events: Iterable[ProbeEvent], policy: ReadoutPolicy) -> ReadoutOutcome:
    """Consume a time-ordered event source until the stop rule fires.

    The source ends with iterator exhaustion or the first event beyond
    ``max_duration`` (the end-of-window marker). Scattering events are
    tallied up to the stop time for the heating account.
    """
    if policy.kind != ADAPTIVE_STOP:
        raise ValueError("run_adaptive requires an adaptive-stop policy")
    counts = 0
    scatters = 0
    depumped = False
    for ev in events:
        if ev.time > policy.max_duration:
            break
        if ev.scatter:
            scatters += 1
        if ev.depump:
            depumped = True
        if ev.detected:
            counts += 1
            if counts >= policy.threshold_counts:
                return ReadoutOutcome(F2, counts, ev.time, scatters, depumped)
    return ReadoutOutcome(F1, counts, policy.max_duration, scatters, depumped)


def analytic_f1_error(policy: ReadoutPolicy, background_mean: float) -> float:
    """P(a dark atom is called bright): the Poisson tail of the background alone."""
    return poisson_tail_at_least(policy.threshold_counts, background_mean)


def _p_detect_first(efficiency: float, hazard: float) -> float:
    return efficiency / (efficiency + hazard - efficiency * hazard)


def analytic_f2_error(efficiency: float, hazard: float, n_d: int) -> float:
    """P(a bright atom fails to reach n_d counts) under the per-event race model.

    The window-timeout contribution is neglected: at the default operating
    point it is ~1e-8, four orders below the depump term. The Monte Carlo
    path does include timeouts, which validates the neglect.
    """
    if not 0.0 < efficiency <= 1.0:
        raise ValueError("efficiency must lie in (0, 1]")
    if not 0.0 <= hazard < 1.0:
        raise ValueError("hazard must lie in [0, 1)")
    if n_d < 1:
        raise ValueError("n_d must be at least 1")
    if hazard == 0.0:
        return 0.0
    return 1.0 - _p_detect_first(efficiency, hazard) ** n_d


def calibrate_depump(target_f2_error: float, efficiency: float, n_d: int) -> float:
    """Invert the race formula: the per-scatter hazard that yields a target error."""
    if not 0.0 <= target_f2_error < 1.0:
        raise ValueError("target_f2_error must lie in [0, 1)")
    if not 0.0 < efficiency <= 1.0:
        raise ValueError("efficiency must lie in (0, 1]")
    if n_d < 1:
        raise ValueError("n_d must be at least 1")
    if target_f2_error == 0.0:
        return 0.0
    if efficiency == 1.0:
        raise ValueError("a perfect detector never misses: only target 0 is reachable")
    p1 = (1.0 - target_f2_error) ** (1.0 / n_d)
    hazard = efficiency * (1.0 / p1 - 1.0) / (1.0 - efficiency)
    if hazard >= 1.0:
        raise ValueError("target error is not reachable by any hazard below 1")
    return hazard


def implied_effective_detuning(
    hazard: float,
    branching_to_F1: float = 0.5,
    constants: SpeciesConstants = RB87_D2,
) -> float:
    """Probe detuning whose depump suppression would produce the given hazard.

    Useful as a consistency check on a calibrated hazard: the implied value
    should sit near the nominal detuning plus the differential light shift.
    """
    if hazard <= 0 or branching_to_F1 <= 0:
        raise ValueError("hazard and branching must be positive")
    implied_suppression = branching_to_F1 / hazard
    on_resonance = depump_suppression(0.0, constants)
    if implied_suppression > on_resonance:
        raise ValueError("hazard is below the on-resonance floor for this branching")
    g = constants.linewidth_gamma
    return 0.5 * g * math.sqrt(on_resonance / implied_suppression - 1.0)
