"""Experiment orchestration: run a config, write result tables and a manifest.

Result and summary files are byte-identical for identical (config, seed),
independent of worker count; the manifest additionally records wall time and
is therefore the one output not covered by the byte-identity contract.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig
from .detection import poisson_tail_at_least
from .experiments import (
    CELL_LOST,
    experiment_histogram,
    experiment_rabi,
    experiment_survival,
)
from .physics import (
    F1,
    F2,
    depump_hazard_per_scatter,
    depump_suppression,
    heating_for_scatters,
    heating_per_scatter,
    misdetection_probability,
    required_mean_photons,
    scatters_for_detected,
)
from .readout import analytic_f1_error, analytic_f2_error, implied_effective_detuning
from .seeding import GENERATOR_NAME

ARTIFACT_NAME = "atomreadout"
ARTIFACT_VERSION = "0.1.0"

Row = tuple
Table = tuple[tuple[str, ...], list[Row]]


@dataclass(frozen=True)
class RunOutput:
    result_files: tuple[str, ...]
    manifest_file: str
    summary: dict


def _format_cell(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_table(path: Path, table: Table, fmt: str) -> None:
    header, rows = table
    if fmt == "csv":
        lines = [",".join(header)]
        lines.extend(",".join(_format_cell(v) for v in row) for row in rows)
        path.write_text("\n".join(lines) + "\n")
    else:
        payload = [dict(zip(header, row)) for row in rows]
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _build_budget(config: RunConfig) -> tuple[dict[str, Table], dict]:
    species = config.species()
    detector = config.detector()
    probe = config.probe()
    policy = config.policy()
    hazard = float(config["readout.depump_hazard"])
    branching = float(config["readout.branching_to_f1"])
    gamma = species.linewidth_gamma
    eta = detector.net_efficiency
    nd = policy.threshold_counts

    rows: list[Row] = [
        ("mean_detected_for_1pct_error", required_mean_photons(0.01),
         "mean counts where the zero-count probability falls below 1e-2"),
        ("mean_detected_for_0p1pct_error", required_mean_photons(0.001),
         "mean counts where the zero-count probability falls below 1e-3"),
        ("misdetection_at_mean_5", misdetection_probability(5.0), "P(0 counts | mean 5)"),
        ("misdetection_at_mean_7", misdetection_probability(7.0), "P(0 counts | mean 7)"),
        ("depump_suppression_on_resonance", depump_suppression(0.0, species),
         "resonant vs off-resonant excitation ratio at zero detuning"),
        ("depump_suppression_at_one_linewidth", depump_suppression(gamma, species),
         "same ratio detuned by one linewidth"),
        ("depump_suppression_at_two_linewidths", depump_suppression(2.0 * gamma, species),
         "same ratio detuned by two linewidths"),
        ("depump_suppression_at_effective_detuning",
         depump_suppression(probe.effective_detuning, species),
         "suppression at the light-shifted operating detuning"),
        ("depump_hazard_on_resonance",
         depump_hazard_per_scatter(depump_suppression(0.0, species), branching),
         "per-scatter dark-state probability at zero detuning"),
        ("configured_depump_hazard", hazard, "per-scatter dark-state probability in use"),
        ("scatters_for_mean_5", scatters_for_detected(5.0, eta),
         "scattering events behind 5 detected counts"),
        ("heating_per_scatter_K", heating_per_scatter(species), "two recoil temperatures"),
        ("heating_for_250_scatters_K", heating_for_scatters(250, species),
         "readout heating budget for 250 scatters"),
        ("scatters_to_fill_trap_depth",
         math.ceil(config.trap().depth / heating_per_scatter(species)),
         "scatters that would heat a cold atom to the trap depth"),
        ("dark_count_false_positive_config_window",
         poisson_tail_at_least(nd, detector.dark_rate * policy.max_duration),
         "P(threshold reached by dark counts alone in one window)"),
        ("dark_count_false_positive_1ms",
         poisson_tail_at_least(nd, detector.dark_rate * 1e-3),
         "same for a 1 ms window"),
        ("analytic_f1_error", analytic_f1_error(policy, probe.background_mean_per_window),
         "background tail at the stop threshold"),
        ("analytic_f2_error", analytic_f2_error(eta, hazard, nd),
         "race-model bright-state error"),
    ]
    if hazard > 0.0 and branching > 0.0:
        ratio = branching / hazard
        if ratio <= depump_suppression(0.0, species):
            rows.append(
                ("implied_effective_detuning_Hz",
                 implied_effective_detuning(hazard, branching, species),
                 "detuning whose suppression reproduces the configured hazard")
            )
    header = ("quantity", "value", "note")
    summary = {name: value for name, value, _ in rows}
    return {"": (header, rows)}, summary


def _build_histogram(config: RunConfig) -> tuple[dict[str, Table], dict]:
    loss_f1, loss_f2 = config.histogram_loss_models()
    result = experiment_histogram(
        int(config["histogram.trials_f1"]),
        int(config["histogram.trials_f2"]),
        config.cycle_config(),
        config.master_seed,
        loss_f1=loss_f1,
        loss_f2=loss_f2,
        workers=config.workers,
    )
    records = (
        ("trial", "prepared_state", "counts", "classified", "lost"),
        [
            (r.trial_index, r.true_state_at_probe, r.detected_counts, r.classified,
             not r.atom_present_after)
            for r in result.records
        ],
    )
    hist_rows: list[Row] = []
    for side in (result.f1, result.f2):
        for count, freq in enumerate(side.histogram.frequencies):
            hist_rows.append((side.prepared, count, freq))
    histogram = (("prepared_state", "counts", "frequency"), hist_rows)

    policy = config.policy()
    summary: dict[str, object] = {}
    for side in (result.f1, result.f2):
        tag = side.prepared.lower()
        summary[f"{tag}_trials"] = side.trials
        summary[f"{tag}_errors"] = side.errors
        summary[f"{tag}_error_rate"] = side.error_rate
        summary[f"{tag}_error_wilson_low"] = side.error_interval[0]
        summary[f"{tag}_error_wilson_high"] = side.error_interval[1]
        summary[f"{tag}_accuracy"] = 1.0 - side.error_rate
        summary[f"{tag}_losses"] = side.losses
        summary[f"{tag}_loss_rate"] = side.loss_rate
    summary["analytic_f1_error"] = analytic_f1_error(
        policy, config.probe().background_mean_per_window
    )
    summary["analytic_f2_error"] = analytic_f2_error(
        config.detector().net_efficiency,
        float(config["readout.depump_hazard"]),
        policy.threshold_counts,
    )
    summary_table = (("quantity", "value"), [(k, v) for k, v in summary.items()])
    return {"": records, "_histogram": histogram, "_summary": summary_table}, summary


def _build_survival(config: RunConfig) -> tuple[dict[str, Table], dict]:
    result = experiment_survival(
        int(config["survival.atoms"]),
        int(config["survival.cycles"]),
        config.cycle_config(),
        config.master_seed,
        workers=config.workers,
    )
    records = (
        ("atom", "cycle", "cell"),
        [
            (a, c, cell)
            for a, row in enumerate(result.matrix.rows)
            for c, cell in enumerate(row)
        ],
    )
    curve = (
        ("cycle", "fraction_alive"),
        [(k, frac) for k, frac in enumerate(result.fraction_alive)],
    )
    fit = result.lifetime_fit
    summary: dict[str, object] = {
        "atoms": len(result.matrix.rows),
        "cycles": len(result.matrix.rows[0]),
        "survivor_fraction_final": result.fraction_alive[-1],
        "full_length_rows": sum(
            1 for row in result.matrix.rows if CELL_LOST not in row
        ),
    }
    if fit is None:
        summary["lifetime_fit_degenerate"] = True
    else:
        summary["lifetime_cycles"] = fit.parameters["lifetime"]
        summary["loss_per_cycle_fit"] = fit.parameters["loss_per_cycle"]
        summary["lifetime_variance"] = fit.covariance_diag["lifetime"]
        summary["fit_converged"] = fit.converged
        summary["fit_residual_norm"] = fit.residual_norm
    summary_table = (("quantity", "value"), [(k, v) for k, v in summary.items()])
    return {"": records, "_curve": curve, "_summary": summary_table}, summary


def _build_rabi(config: RunConfig) -> tuple[dict[str, Table], dict]:
    result = experiment_rabi(
        int(config["rabi.atoms"]),
        config.rabi_config(),
        config.cycle_config(),
        config.master_seed,
        workers=config.workers,
    )
    record_rows: list[Row] = []
    for a, row in enumerate(result.outcomes):
        for i, outcome in enumerate(row):
            if outcome is None:
                continue
            record_rows.append((a, i, result.pulse_lengths[i], F2 if outcome else F1))
    records = (("atom", "point", "pulse_length", "outcome"), record_rows)
    curve = (
        ("point", "pulse_length", "n_measured", "f2_fraction"),
        [
            (i, result.pulse_lengths[i], result.n_measured[i], result.f2_fraction[i])
            for i in range(len(result.pulse_lengths))
        ],
    )
    fit = result.curve_fit
    policy = config.policy()
    summary = {
        "atoms": len(result.outcomes),
        "points": len(result.pulse_lengths),
        "fit_frequency_hz": fit.parameters["frequency"],
        "fit_decoherence_time_s": fit.parameters["decoherence_time"],
        "fit_amplitude": fit.parameters["amplitude"],
        "fit_offset": fit.parameters["offset"],
        "fit_converged": fit.converged,
        "fit_residual_norm": fit.residual_norm,
        "zero_point_fraction": result.f2_fraction[0],
        "zero_point_n": result.n_measured[0],
        "analytic_f1_floor": analytic_f1_error(
            policy, config.probe().background_mean_per_window
        ),
    }
    summary_table = (("quantity", "value"), [(k, v) for k, v in summary.items()])
    return {"": records, "_curve": curve, "_summary": summary_table}, summary


_BUILDERS = {
    "budget": _build_budget,
    "histogram": _build_histogram,
    "survival": _build_survival,
    "rabi": _build_rabi,
}


def run(config: RunConfig) -> RunOutput:
    """Execute the configured experiment and write its result files."""
    start = time.time()
    tables, summary = _BUILDERS[config.experiment](config)

    stem = Path(config.output_path or f"results/{config.experiment}")
    stem.parent.mkdir(parents=True, exist_ok=True)
    ext = ".csv" if config.output_format == "csv" else ".json"
    written = []
    for suffix, table in tables.items():
        path = stem.with_name(stem.name + suffix + ext)
        _write_table(path, table, config.output_format)
        written.append(str(path))

    manifest = {
        "artifact": {"name": ARTIFACT_NAME, "version": ARTIFACT_VERSION},
        "experiment": config.experiment,
        "master_seed": config.master_seed,
        "generator": GENERATOR_NAME,
        "config": {k: config.values[k] for k in sorted(config.values)},
        "result_files": [Path(p).name for p in written],
        "summary": summary,
        "wall_time_s": time.time() - start,
    }
    manifest_path = stem.with_name(stem.name + "_manifest.json")
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return RunOutput(tuple(written), str(manifest_path), summary)
