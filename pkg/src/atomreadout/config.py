"""Run configuration: strict line-oriented parsing, defaults, serialization.

Config files are ``section.key = value`` lines with ``#`` comments. Parsing is
strict: unknown keys, malformed lines, and out-of-range values are errors that
name the offending line and key. An empty file yields the built-in
``paper-2010`` profile, the calibrated reference operating point every module
defaults to.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .detection import DetectorConfig
from .experiments import CycleConfig, RabiConfig, uniform_pulse_grid
from .physics import ProbeConfig, SpeciesConstants
from .readout import ADAPTIVE_STOP, FIXED_WINDOW, ReadoutPolicy, calibrate_depump
from .trap import CoolingConfig, LossModel, TrapConfig

DEFAULT_PROFILE = "paper-2010"
DEFAULT_SEED = 1

# Hazard calibrated so the analytic bright-state error is exactly 5.5% at the
# reference efficiency and stop threshold.
DEFAULT_DEPUMP_HAZARD = calibrate_depump(0.055, 0.02, 2)


class ConfigError(ValueError):
    """Invalid configuration input; carries the offending line and key when known."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"config error ({', '.join(where)}): " if where else "config error: "
        super().__init__(prefix + message)


@dataclass(frozen=True)
class _Key:
    kind: str                      # float | int | bool | choice | str
    default: object
    help: str
    lo: float | None = None
    hi: float | None = None
    lo_open: bool = False
    hi_open: bool = False
    choices: tuple[str, ...] = ()


SCHEMA: dict[str, _Key] = {
    "experiment": _Key("choice", "histogram", "which experiment to run",
                       choices=("histogram", "survival", "rabi", "budget")),
    "seed": _Key("int", DEFAULT_SEED, "master seed, unsigned 64-bit", lo=0, hi=2**64, hi_open=True),
    "workers": _Key("int", 1, "process-pool workers (1 = serial)", lo=1),
    "output.path": _Key("str", "", "output file stem (default results/<experiment>)"),
    "output.format": _Key("choice", "csv", "result table format", choices=("csv", "json")),
    "species.linewidth": _Key("float", 6.0e6, "excited-state linewidth, Hz", lo=0, lo_open=True),
    "species.excited_splitting": _Key("float", 266.0e6, "F'=2 to F'=3 interval, Hz",
                                      lo=0, lo_open=True),
    "species.hyperfine_splitting": _Key("float", 6.8e9, "ground hyperfine interval, Hz",
                                        lo=0, lo_open=True),
    "species.recoil_temperature": _Key("float", 361.96e-9, "recoil temperature, K",
                                       lo=0, lo_open=True),
    "detector.efficiency": _Key("float", 0.02, "net collection+quantum efficiency",
                                lo=0, hi=1, lo_open=True),
    "detector.dark_rate": _Key("float", 100.0, "dark counts per second", lo=0),
    "probe.scatter_rate": _Key("float", 3.5e6, "bright-atom scattering rate, 1/s",
                               lo=0, lo_open=True),
    "probe.max_duration": _Key("float", 300e-6, "maximum probe window, s", lo=0, lo_open=True),
    "probe.background_mean": _Key("float", 0.3, "mean background counts per full window", lo=0),
    "probe.nominal_detuning": _Key("float", 5.0e6, "set-point probe detuning, Hz"),
    "probe.effective_detuning": _Key("float", 8.594e6,
                                     "detuning including the differential light shift, Hz"),
    "readout.mode": _Key("choice", "adaptive", "stop rule", choices=("adaptive", "fixed")),
    "readout.nd": _Key("int", 2, "counts required to call the atom bright", lo=1),
    "readout.depump_hazard": _Key("float", DEFAULT_DEPUMP_HAZARD,
                                  "per-scatter probability of falling dark",
                                  lo=0, hi=1, hi_open=True),
    "readout.branching_to_f1": _Key("float", 0.5, "decay branching from the off-resonant level",
                                    lo=0, hi=1),
    "trap.depth": _Key("float", 2e-3, "trap depth, K", lo=0, lo_open=True),
    "trap.baseline_energy": _Key("float", 0.0, "post-cooling motional energy, K", lo=0),
    "loss.background_per_cycle": _Key("float", 0.012, "non-heating loss probability per cycle",
                                      lo=0, hi=1, hi_open=True),
    "loss.f1_per_cycle": _Key("float", 0.012, "histogram-run loss for F1 preparations",
                              lo=0, hi=1, hi_open=True),
    "loss.f2_per_cycle": _Key("float", 0.012, "histogram-run loss for F2 preparations",
                              lo=0, hi=1, hi_open=True),
    "loss.heating_threshold_fraction": _Key("float", 1.0,
                                            "fraction of depth at which the atom is lost",
                                            lo=0, hi=1, lo_open=True),
    "cooling.pulse_duration": _Key("float", 5e-3, "cooling pulse length, s", lo=0),
    "cooling.reset": _Key("bool", True, "cooling restores the baseline energy"),
    "prep.duration": _Key("float", 10e-3, "state-preparation pulse length, s", lo=0),
    "histogram.trials_f1": _Key("int", 1684, "F1-prepared trials", lo=1),
    "histogram.trials_f2": _Key("int", 2127, "F2-prepared trials", lo=1),
    "survival.atoms": _Key("int", 102, "atoms in the survival run", lo=1),
    "survival.cycles": _Key("int", 100, "cycles per atom", lo=1),
    "rabi.atoms": _Key("int", 312, "atoms in the ensemble", lo=1),
    "rabi.points": _Key("int", 50, "pulse lengths per atom", lo=2),
    "rabi.span": _Key("float", 3.0e-3, "longest pulse length, s", lo=0, lo_open=True),
    "rabi.frequency": _Key("float", 2950.0, "drive Rabi frequency, Hz", lo=0, lo_open=True),
    "rabi.decoherence_time": _Key("float", 2.2e-3, "oscillation damping time, s",
                                  lo=0, lo_open=True),
}

ALIASES = {"nd": "readout.nd"}

PROFILES: dict[str, dict[str, object]] = {DEFAULT_PROFILE: {}}


def _check_range(key: str, spec: _Key, value: float, line: int | None) -> None:
    if spec.lo is not None:
        if value < spec.lo or (spec.lo_open and value == spec.lo):
            bound = "(" if spec.lo_open else "["
            raise ConfigError(f"value {value!r} below allowed range {bound}{spec.lo}, ...",
                              line, key)
    if spec.hi is not None:
        if value > spec.hi or (spec.hi_open and value == spec.hi):
            bound = ")" if spec.hi_open else "]"
            raise ConfigError(f"value {value!r} above allowed range ..., {spec.hi}{bound}",
                              line, key)


def validate_value(key: str, value: object, line: int | None = None) -> object:
    """Type- and range-check one already-typed value against the schema."""
    key = ALIASES.get(key, key)
    spec = SCHEMA.get(key)
    if spec is None:
        raise ConfigError("unknown key", line, key)
    if spec.kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", line, key)
        value = float(value)
        _check_range(key, spec, value, line)
        return value
    if spec.kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", line, key)
        _check_range(key, spec, value, line)
        return value
    if spec.kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"expected true or false, got {value!r}", line, key)
        return value
    if spec.kind == "choice":
        if value not in spec.choices:
            raise ConfigError(f"expected one of {spec.choices}, got {value!r}", line, key)
        return value
    if not isinstance(value, str):
        raise ConfigError(f"expected text, got {value!r}", line, key)
    return value


def parse_value(key: str, text: str, line: int | None = None) -> object:
    """Parse one value from its config-file text form."""
    canonical = ALIASES.get(key, key)
    spec = SCHEMA.get(canonical)
    if spec is None:
        raise ConfigError("unknown key", line, key)
    if spec.kind == "float":
        try:
            typed: object = float(text)
        except ValueError:
            raise ConfigError(f"cannot parse {text!r} as a number", line, key) from None
    elif spec.kind == "int":
        try:
            typed = int(text)
        except ValueError:
            raise ConfigError(f"cannot parse {text!r} as an integer", line, key) from None
    elif spec.kind == "bool":
        if text.lower() not in ("true", "false"):
            raise ConfigError(f"cannot parse {text!r} as true/false", line, key)
        typed = text.lower() == "true"
    else:
        typed = text
    return validate_value(canonical, typed, line)


def _cross_validate(values: dict[str, object]) -> None:
    if values["species.excited_splitting"] <= values["species.linewidth"]:
        raise ConfigError("excited splitting must exceed the linewidth",
                          key="species.excited_splitting")
    if values["trap.baseline_energy"] >= values["trap.depth"]:
        raise ConfigError("baseline energy must be below the trap depth",
                          key="trap.baseline_energy")


@dataclass(frozen=True)
class RunConfig:
    """A fully populated, validated set of configuration values."""

    values: dict[str, object] = field(default_factory=dict)

    def __getitem__(self, key: str) -> object:
        return self.values[ALIASES.get(key, key)]

    @property
    def experiment(self) -> str:
        return str(self.values["experiment"])

    @property
    def master_seed(self) -> int:
        return int(self.values["seed"])

    @property
    def workers(self) -> int:
        return int(self.values["workers"])

    @property
    def output_path(self) -> str:
        return str(self.values["output.path"])

    @property
    def output_format(self) -> str:
        return str(self.values["output.format"])

    def with_updates(self, updates: dict[str, object]) -> "RunConfig":
        merged = dict(self.values)
        for key, value in updates.items():
            canonical = ALIASES.get(key, key)
            merged[canonical] = validate_value(canonical, value)
        _cross_validate(merged)
        return RunConfig(merged)

    # -- domain object builders ------------------------------------------

    def species(self) -> SpeciesConstants:
        return SpeciesConstants(
            linewidth_gamma=self.values["species.linewidth"],
            excited_splitting_delta23=self.values["species.excited_splitting"],
            hyperfine_splitting=self.values["species.hyperfine_splitting"],
            recoil_temperature=self.values["species.recoil_temperature"],
        )

    def detector(self) -> DetectorConfig:
        return DetectorConfig(
            net_efficiency=self.values["detector.efficiency"],
            dark_rate=self.values["detector.dark_rate"],
        )

    def probe(self) -> ProbeConfig:
        return ProbeConfig(
            nominal_detuning=self.values["probe.nominal_detuning"],
            effective_detuning=self.values["probe.effective_detuning"],
            scatter_rate=self.values["probe.scatter_rate"],
            max_probe_duration=self.values["probe.max_duration"],
            background_mean_per_window=self.values["probe.background_mean"],
        )

    def policy(self) -> ReadoutPolicy:
        kind = ADAPTIVE_STOP if self.values["readout.mode"] == "adaptive" else FIXED_WINDOW
        return ReadoutPolicy(
            kind=kind,
            threshold_counts=self.values["readout.nd"],
            max_duration=self.values["probe.max_duration"],
        )

    def trap(self) -> TrapConfig:
        return TrapConfig(
            depth=self.values["trap.depth"],
            baseline_energy=self.values["trap.baseline_energy"],
        )

    def loss_model(self, per_cycle: float | None = None) -> LossModel:
        return LossModel(
            background_loss_per_cycle=(
                self.values["loss.background_per_cycle"] if per_cycle is None else per_cycle
            ),
            heating_threshold_fraction=self.values["loss.heating_threshold_fraction"],
        )

    def cooling(self) -> CoolingConfig:
        return CoolingConfig(
            pulse_duration=self.values["cooling.pulse_duration"],
            reset=self.values["cooling.reset"],
        )

    def cycle_config(self) -> CycleConfig:
        return CycleConfig(
            species=self.species(),
            probe=self.probe(),
            detector=self.detector(),
            policy=self.policy(),
            trap=self.trap(),
            loss=self.loss_model(),
            cooling=self.cooling(),
            depump_hazard=self.values["readout.depump_hazard"],
            prep_duration=self.values["prep.duration"],
        )

    def histogram_loss_models(self) -> tuple[LossModel, LossModel]:
        return (
            self.loss_model(self.values["loss.f1_per_cycle"]),
            self.loss_model(self.values["loss.f2_per_cycle"]),
        )

    def rabi_config(self) -> RabiConfig:
        return RabiConfig(
            rabi_frequency=self.values["rabi.frequency"],
            decoherence_time=self.values["rabi.decoherence_time"],
            pulse_lengths=uniform_pulse_grid(
                self.values["rabi.points"], self.values["rabi.span"]
            ),
        )


def default_config(profile: str = DEFAULT_PROFILE) -> RunConfig:
    """The named profile's full value set (currently only ``paper-2010``)."""
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; known: {sorted(PROFILES)}")
    values = {key: spec.default for key, spec in SCHEMA.items()}
    values.update(PROFILES[profile])
    return RunConfig(values)


def parse_config(text: str, profile: str = DEFAULT_PROFILE) -> RunConfig:
    """Parse file contents on top of the profile defaults; strict about everything."""
    values = dict(default_config(profile).values)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError("expected 'key = value'", lineno)
        key = key.strip()
        canonical = ALIASES.get(key, key)
        values[canonical] = parse_value(key, val.strip(), lineno)
    _cross_validate(values)
    return RunConfig(values)


def serialize_config(config: RunConfig) -> str:
    """Render a config as parseable text; parse(serialize(c)) == c."""
    lines = []
    for key in SCHEMA:
        value = config.values[key]
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def config_reference() -> str:
    """Human-readable table of every key, its type, default, and meaning."""
    rows = [("key", "type", "default", "description")]
    for key, spec in SCHEMA.items():
        if isinstance(spec.default, bool):
            default = "true" if spec.default else "false"
        elif isinstance(spec.default, float):
            default = repr(spec.default)
        else:
            default = str(spec.default)
        rows.append((key, spec.kind, default, spec.help))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    out = []
    for i, row in enumerate(rows):
        out.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row[:3])) + "  " + row[3])
        if i == 0:
            out.append("-" * (sum(widths) + 6 + len(row[3])))
    return "\n".join(out) + "\n"
