"""Atomic constants and closed-form feasibility estimates for fluorescence readout.

The detection scheme drives the quasi-cycling F=2 -> F'=3 optical transition and
counts collected photons; an atom left in F=1 stays dark. This module holds the
species constants and the back-of-the-envelope formulas that set the operating
point: how many detected photons a given error target needs, how strongly the
off-resonant F'=2 channel (the "depump" route into F=1) is suppressed, and how
much recoil heating a readout costs.

Conventions: frequencies in Hz, times in seconds. Motional energies are carried
in temperature units (kelvin); multiply by ``boltzmann_energy_scale`` only at an
interface that genuinely needs joules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

F1 = "F1"
F2 = "F2"

ZEEMAN_RANGE = {F1: (-1, 1), F2: (-2, 2)}


@dataclass(frozen=True)
class SpeciesConstants:
    """Transition constants of the probed species. Defaults are the Rb-87 D2 profile."""

    linewidth_gamma: float = 6.0e6              # Hz, excited-state natural linewidth
    excited_splitting_delta23: float = 266.0e6  # Hz, F'=2 to F'=3 interval
    hyperfine_splitting: float = 6.8e9          # Hz, ground-state F=1 to F=2 interval
    recoil_temperature: float = 361.96e-9       # K, single-photon recoil scale
    boltzmann_energy_scale: float = 1.380649e-23  # J/K

    def __post_init__(self) -> None:
        positive = (
            self.linewidth_gamma,
            self.excited_splitting_delta23,
            self.hyperfine_splitting,
            self.recoil_temperature,
            self.boltzmann_energy_scale,
        )
        if any(v <= 0 for v in positive):
            raise ValueError("species constants must be strictly positive")
        if self.excited_splitting_delta23 <= self.linewidth_gamma:
            raise ValueError("excited-state splitting must exceed the linewidth")


RB87_D2 = SpeciesConstants()


@dataclass(frozen=True)
class ProbeConfig:
    """Probe-beam operating point while the readout light is on.

    ``scatter_rate`` is the photon scattering rate of a bright (F=2) atom,
    before any collection or detector losses. ``background_mean_per_window``
    is the mean number of spurious detector counts accumulated over one full
    ``max_probe_duration`` window (stray light plus dark counts); the harness
    converts it to a rate. ``effective_detuning`` includes the differential
    light shift of the trap, so it is what the depump suppression actually
    sees; the nominal value is what the synthesizer is set to.
    """

    nominal_detuning: float = 5.0e6
    effective_detuning: float = 8.594e6
    scatter_rate: float = 3.5e6
    max_probe_duration: float = 300e-6
    background_mean_per_window: float = 0.3

    def __post_init__(self) -> None:
        if self.scatter_rate <= 0:
            raise ValueError("scatter_rate must be positive")
        if self.max_probe_duration <= 0:
            raise ValueError("max_probe_duration must be positive")
        if self.background_mean_per_window < 0:
            raise ValueError("background_mean_per_window must be nonnegative")


@dataclass(frozen=True)
class AtomState:
    """The simulated particle: hyperfine/Zeeman label, motional energy, presence.

    ``motional_energy`` is accumulated energy above the cooled baseline, in
    kelvin.
    """

    hyperfine: str = F1
    zeeman_mF: int = 0
    motional_energy: float = 0.0
    present: bool = True

    def __post_init__(self) -> None:
        if self.hyperfine not in ZEEMAN_RANGE:
            raise ValueError(f"unknown hyperfine label {self.hyperfine!r}")
        lo, hi = ZEEMAN_RANGE[self.hyperfine]
        if not lo <= self.zeeman_mF <= hi:
            raise ValueError(
                f"zeeman_mF={self.zeeman_mF} outside [{lo}, {hi}] for {self.hyperfine}"
            )
        if self.motional_energy < 0:
            raise ValueError("motional_energy must be nonnegative")


def misdetection_probability(mean_detected: float) -> float:
    """P(zero detected photons) for a bright atom with the given mean, exp(-mean)."""
    if mean_detected < 0:
        raise ValueError("mean_detected must be nonnegative")
    return math.exp(-mean_detected)


def required_mean_photons(target_error: float) -> float:
    """Mean detected-photon number needed so the zero-count probability hits the target."""
    if not 0.0 < target_error < 1.0:
        raise ValueError("target_error must lie strictly between 0 and 1")
    return -math.log(target_error)


def depump_suppression(detuning: float, constants: SpeciesConstants = RB87_D2) -> float:
    """Ratio of resonant F'=3 excitation to off-resonant F'=2 excitation.

    On resonance this is (2*Delta/gamma)^2; detuning the probe by ``detuning``
    reduces the main line by the usual Lorentzian factor while leaving the far
    off-resonant channel essentially unchanged, so the suppression falls as
    1 / (1 + (2*detuning/gamma)^2).
    """
    g = constants.linewidth_gamma
    on_resonance = (2.0 * constants.excited_splitting_delta23 / g) ** 2
    return on_resonance / (1.0 + (2.0 * detuning / g) ** 2)


def depump_hazard_per_scatter(suppression: float, branching_to_F1: float) -> float:
    """Probability that one scattering event leaves the atom in F=1."""
    if suppression < 1.0:
        raise ValueError("suppression must be at least 1")
    if not 0.0 <= branching_to_F1 <= 1.0:
        raise ValueError("branching_to_F1 must be a probability")
    return branching_to_F1 / suppression


def heating_per_scatter(constants: SpeciesConstants = RB87_D2) -> float:
    """Energy kick of one absorption-emission cycle, in kelvin (two recoils)."""
    return 2.0 * constants.recoil_temperature


def heating_for_scatters(scatters: float, constants: SpeciesConstants = RB87_D2) -> float:
    """Total heating of ``scatters`` scattering events, in kelvin."""
    if scatters < 0:
        raise ValueError("scatters must be nonnegative")
    return scatters * heating_per_scatter(constants)


def heating_per_scatter_joules(constants: SpeciesConstants = RB87_D2) -> float:
    """Same kick expressed as energy in joules."""
    return constants.boltzmann_energy_scale * heating_per_scatter(constants)


def scatters_for_detected(mean_detected: float, efficiency: float) -> float:
    """Scattering events needed for a target mean detected count at a given efficiency."""
    if not 0.0 < efficiency <= 1.0:
        raise ValueError("efficiency must lie in (0, 1]")
    if mean_detected < 0:
        raise ValueError("mean_detected must be nonnegative")
    return mean_detected / efficiency
