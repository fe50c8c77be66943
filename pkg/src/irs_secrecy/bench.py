"""Batch experiment runner: seeded Monte-Carlo trials, baselines, CSV output.

Each experiment reproduces the trend structure of one reference figure:
endpoint figures carry one row per (seed, sweep value, algorithm) while the
convergence figures emit one row per iteration of a single run.  Rows are
deterministic given the scenario seed; wall-clock timing is optional so
reruns can be byte-identical.
"""

import csv
import time
from dataclasses import dataclass, fields, field, replace
from typing import Iterable, Iterator

import numpy as np

from .channel import (
    ChannelSet,
    Dims,
    LinkDistances,
    ScenarioConfig,
    effective_channels,
    generate_channels,
    identity_phases,
    power_from_dbm,
    secrecy_rate,
    trial_rng,
)
from .errors import IrsSecrecyError
from .saddle import solve_saddle
from .schemes import (
    AoConfig,
    an_covariance,
    actual_secrecy_rate,
    ao_full_csi,
    ao_power_min,
)

FIGURE_IDS = (
    "fig2_rate_vs_power",
    "fig3_rate_vs_n_e",
    "fig4_an_vs_gamma",
    "fig5_tradeoff",
    "fig6_blocked",
    "fig7_ao_convergence",
    "fig8_powermin_convergence",
    "fig9_mm_vs_obo",
    "fig10_saddle_trace",
)

TRACE_FIGURES = (
    "fig7_ao_convergence",
    "fig8_powermin_convergence",
    "fig9_mm_vs_obo",
    "fig10_saddle_trace",
)

# Desk-scale geometry: IRS hops short enough that the reflected path competes
# with the direct one (the reference distances bury it ~65 dB below), Eve's
# reflector twice as far as Bob's.  Noise floors picked so the trends of the
# reference figures are visible at desk scale.
DESK_DISTANCES = LinkDistances(
    alice_bob=80.0, alice_irs=5.0, alice_eve=80.0, irs_bob=5.0, irs_eve=10.0
)
DESK_DISTANCES_EVE_NEAR = LinkDistances(
    alice_bob=80.0, alice_irs=5.0, alice_eve=40.0, irs_bob=5.0, irs_eve=10.0
)
DESK_NOISE_DBM = -75.0
DESK_NOISE_BLOCKED_DBM = -60.0


@dataclass(frozen=True)
class ExperimentSpec:
    """One batch experiment: scenario, swept parameter, algorithms to run."""

    figure_id: str
    scenario: ScenarioConfig
    sweep_name: str
    sweep_values: tuple
    baselines: tuple
    ao: AoConfig = field(default_factory=AoConfig)
    record_timing: bool = True

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure_id!r}")
        vals = list(self.sweep_values)
        if any(not np.isfinite(v) for v in vals):
            raise ValueError("sweep values must be finite")
        if vals != sorted(vals):
            raise ValueError("sweep values must be sorted")


@dataclass(frozen=True)
class TrialRecord:
    """One Monte-Carlo result row (or one iteration row for trace figures)."""

    figure_id: str
    seed: int
    sweep_value: float
    algorithm_label: str
    c_s: float | None = None
    c_b: float | None = None
    c_e: float | None = None
    p_min: float | None = None
    iterations: int | None = None
    wall_time_ms: float | None = None
    error: str = ""


def default_spec(figure_id: str, **overrides) -> ExperimentSpec:
    """Reference configuration for each figure, overridable field by field.

    Scenario overrides accepted: trials, rng_seed, power_dbm, qos_gamma,
    dims, distances, noise_power_dbm plus the spec-level sweep_values,
    baselines, ao and record_timing.
    """
    presets = {
        "fig2_rate_vs_power": dict(
            scenario=ScenarioConfig(
                dims=Dims(4, 4, 4, 6),
                distances=DESK_DISTANCES,
                noise_power_dbm=DESK_NOISE_DBM,
                power_dbm=35.0,
            ),
            sweep_name="power_dbm",
            sweep_values=(20.0, 25.0, 30.0, 35.0, 40.0),
            baselines=("optimized", "zero_phase", "no_irs"),
        ),
        "fig3_rate_vs_n_e": dict(
            scenario=ScenarioConfig(
                dims=Dims(4, 3, 3, 6),
                distances=DESK_DISTANCES,
                noise_power_dbm=DESK_NOISE_DBM,
                power_dbm=35.0,
            ),
            sweep_name="n",
            sweep_values=(2.0, 4.0, 6.0, 8.0),
            baselines=("optimized", "zero_phase"),
        ),
        "fig4_an_vs_gamma": dict(
            scenario=ScenarioConfig(
                dims=Dims(4, 2, 4, 8),
                distances=DESK_DISTANCES_EVE_NEAR,
                noise_power_dbm=DESK_NOISE_DBM,
                power_dbm=35.0,
            ),
            sweep_name="qos_gamma",
            sweep_values=(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0),
            baselines=("an", "no_an"),
        ),
        "fig5_tradeoff": dict(
            scenario=ScenarioConfig(
                dims=Dims(4, 2, 4, 8),
                distances=DESK_DISTANCES_EVE_NEAR,
                noise_power_dbm=DESK_NOISE_DBM,
                power_dbm=30.0,
                trials=1,
            ),
            sweep_name="qos_gamma",
            sweep_values=tuple(float(v) for v in np.arange(0.5, 16.0, 0.5)),
            baselines=("an",),
        ),
        "fig6_blocked": dict(
            scenario=ScenarioConfig(
                dims=Dims(4, 2, 2, 8),
                distances=DESK_DISTANCES,
                noise_power_dbm=DESK_NOISE_BLOCKED_DBM,
                power_dbm=35.0,
            ),
            sweep_name="qos_gamma",
            sweep_values=(0.5, 1.0, 1.5, 2.0, 2.5, 3.0),
            baselines=("bs_obo", "bs_mm"),
        ),
        "fig7_ao_convergence": dict(
            scenario=ScenarioConfig(
                dims=Dims(4, 4, 4, 6),
                distances=DESK_DISTANCES,
                noise_power_dbm=DESK_NOISE_DBM,
                power_dbm=35.0,
                trials=1,
            ),
            sweep_name="iteration",
            sweep_values=(),
            baselines=("optimized",),
        ),
        "fig8_powermin_convergence": dict(
            scenario=ScenarioConfig(
                dims=Dims(4, 2, 4, 8),
                distances=DESK_DISTANCES_EVE_NEAR,
                noise_power_dbm=DESK_NOISE_DBM,
                power_dbm=35.0,
                qos_gamma=6.0,
                trials=1,
            ),
            sweep_name="iteration",
            sweep_values=(),
            baselines=("bs_obo",),
        ),
        "fig9_mm_vs_obo": dict(
            scenario=ScenarioConfig(
                dims=Dims(4, 2, 2, 8),
                distances=DESK_DISTANCES,
                noise_power_dbm=DESK_NOISE_BLOCKED_DBM,
                power_dbm=35.0,
                qos_gamma=3.0,
                trials=1,
            ),
            sweep_name="iteration",
            sweep_values=(),
            baselines=("bs_obo", "bs_mm"),
        ),
        # reference-geometry instance at moderate SNR: here the optimal
        # covariance stays (near) full rank, so the achieved rate C(R) and the
        # saddle objective f visibly coincide at the end of the barrier ladder
        "fig10_saddle_trace": dict(
            scenario=ScenarioConfig(
                dims=Dims(4, 4, 4, 6),
                noise_power_dbm=-55.0,
                power_dbm=35.0,
                trials=1,
            ),
            sweep_name="iteration",
            sweep_values=(),
            baselines=("saddle",),
        ),
    }
    if figure_id not in presets:
        raise ValueError(f"unknown figure id {figure_id!r}")
    preset = presets[figure_id]
    scenario = preset["scenario"]
    scen_over = {
        k: overrides.pop(k)
        for k in (
            "trials",
            "rng_seed",
            "power_dbm",
            "qos_gamma",
            "dims",
            "distances",
            "noise_power_dbm",
            "path_loss_ref_db",
            "path_loss_exponent",
        )
        if k in overrides
    }
    if scen_over:
        scenario = replace(scenario, **scen_over)
    spec_kwargs = dict(preset, scenario=scenario, figure_id=figure_id)
    spec_kwargs.update(overrides)
    return ExperimentSpec(**spec_kwargs)


def _blocked(figure_id: str) -> bool:
    return figure_id in ("fig6_blocked", "fig9_mm_vs_obo")


def _channels_for(spec: ExperimentSpec, scenario: ScenarioConfig, seed: int) -> ChannelSet:
    ch = generate_channels(scenario, trial_rng(scenario.rng_seed, seed))
    return ch.with_blocked_direct() if _blocked(spec.figure_id) else ch


def _scenario_at(spec: ExperimentSpec, value: float) -> ScenarioConfig:
    """Apply one sweep value to the scenario."""
    scen = spec.scenario
    name = spec.sweep_name
    if name == "power_dbm":
        return replace(scen, power_dbm=float(value))
    if name == "qos_gamma":
        return replace(scen, qos_gamma=float(value))
    if name in ("m", "d", "e", "n"):
        dims = replace(scen.dims, **{name: int(value)})
        return replace(scen, dims=dims)
    if name == "iteration":
        return scen
    raise ValueError(f"unsupported sweep parameter {name!r}")


def _power_min_config(spec: ExperimentSpec, label: str, budget: float) -> AoConfig:
    method = "mm" if label == "bs_mm" else "obo"
    return replace(
        spec.ao,
        phase_method=method,
        p_budget_cap=min(spec.ao.p_budget_cap, budget),
        p_init=budget if method == "mm" else spec.ao.p_init,
    )


def _endpoint_cell(
    spec: ExperimentSpec,
    scenario: ScenarioConfig,
    ch: ChannelSet,
    label: str,
    cache: dict,
) -> dict:
    """Run one (seed, sweep value, algorithm) cell of an endpoint figure."""
    p = power_from_dbm(scenario.power_dbm)
    gamma = scenario.qos_gamma
    if label == "optimized":
        res = ao_full_csi(ch, p, spec.ao)
        rates = secrecy_rate(ch, res.q, res.r)
        return dict(c_s=rates.c_s, c_b=rates.c_b, c_e=rates.c_e,
                    iterations=res.iterations)
    if label == "zero_phase":
        h1, h2 = effective_channels(ch, identity_phases(ch.dims.n))
        res = solve_saddle(h1, h2, p, spec.ao.barrier)
        return dict(c_s=res.rates.c_s, c_b=res.rates.c_b, c_e=res.rates.c_e,
                    iterations=res.newton_steps)
    if label == "no_irs":
        res = solve_saddle(ch.h_ab, ch.h_ae, p, spec.ao.barrier)
        return dict(c_s=res.rates.c_s, c_b=res.rates.c_b, c_e=res.rates.c_e,
                    iterations=res.newton_steps)
    if label in ("an", "no_an", "bs_obo", "bs_mm"):
        cfg = _power_min_config(spec, label, p)
        key = ("pm", label if label in ("bs_obo", "bs_mm") else "an_shared")
        if key not in cache:
            cache[key] = ao_power_min(ch, gamma, cfg)
        pm = cache[key]
        h1, h2 = effective_channels(ch, pm.q_opt)
        if label == "no_an":
            r_an = np.zeros((ch.dims.m, ch.dims.m), dtype=complex)
        else:
            r_an = an_covariance(h1, p, pm.p_min)
        c_s = actual_secrecy_rate(gamma, pm.r_opt, r_an, h2)
        leak = gamma - c_s
        return dict(c_s=c_s, c_b=gamma, c_e=leak, p_min=pm.p_min,
                    iterations=pm.iterations)
    raise ValueError(f"unknown algorithm label {label!r}")


def _trace_rows(
    spec: ExperimentSpec, scenario: ScenarioConfig, ch: ChannelSet,
    label: str, seed: int,
) -> list[TrialRecord]:
    """Per-iteration rows for the convergence figures."""
    p = power_from_dbm(scenario.power_dbm)
    gamma = scenario.qos_gamma
    rows: list[TrialRecord] = []
    base = dict(figure_id=spec.figure_id, seed=seed, algorithm_label=label)
    if spec.figure_id == "fig7_ao_convergence":
        res = ao_full_csi(ch, p, spec.ao)
        for k, c in enumerate(res.trace):
            rows.append(TrialRecord(sweep_value=float(k), c_s=c,
                                    iterations=res.iterations, **base))
    elif spec.figure_id in ("fig8_powermin_convergence", "fig9_mm_vs_obo"):
        cfg = _power_min_config(spec, label, p)
        pm = ao_power_min(ch, gamma, cfg)
        for k, pw in enumerate(pm.power_trace):
            rows.append(TrialRecord(sweep_value=float(k), p_min=pw,
                                    iterations=pm.iterations, **base))
    elif spec.figure_id == "fig10_saddle_trace":
        h1, h2 = effective_channels(ch, identity_phases(ch.dims.n))
        res = solve_saddle(h1, h2, p, spec.ao.barrier, collect_trace=True)
        for k, row in enumerate(res.trace):
            rows.append(TrialRecord(sweep_value=float(k), c_s=row.c_value,
                                    c_b=row.f_value, c_e=row.residual_norm,
                                    iterations=res.newton_steps, **base))
    else:
        raise ValueError(f"{spec.figure_id} is not a trace figure")
    return rows


def run_experiment(spec: ExperimentSpec) -> Iterator[TrialRecord]:
    """Yield one record per (seed, sweep value, algorithm), then mean rows.

    Per-trial failures are recorded in the row's error column and never
    abort the batch.  Output is deterministic for a fixed scenario seed when
    timing capture is disabled.
    """
    records: list[TrialRecord] = []
    trials = spec.scenario.trials
    if spec.figure_id in TRACE_FIGURES:
        for seed in range(trials):
            for label in spec.baselines:
                scenario = spec.scenario
                ch = _channels_for(spec, scenario, seed)
                start = time.perf_counter()
                try:
                    rows = _trace_rows(spec, scenario, ch, label, seed)
                    if spec.record_timing and rows:
                        wall = (time.perf_counter() - start) * 1e3
                        rows[0] = replace(rows[0], wall_time_ms=wall)
                    records.extend(rows)
                except IrsSecrecyError as exc:
                    records.append(TrialRecord(
                        figure_id=spec.figure_id, seed=seed, sweep_value=0.0,
                        algorithm_label=label, error=f"{type(exc).__name__}: {exc}",
                    ))
        yield from records
        return

    for seed in range(trials):
        for value in spec.sweep_values:
            scenario = _scenario_at(spec, value)
            ch = _channels_for(spec, scenario, seed)
            cache: dict = {}
            for label in spec.baselines:
                start = time.perf_counter()
                try:
                    cell = _endpoint_cell(spec, scenario, ch, label, cache)
                    wall = (
                        (time.perf_counter() - start) * 1e3
                        if spec.record_timing else None
                    )
                    rec = TrialRecord(
                        figure_id=spec.figure_id, seed=seed,
                        sweep_value=float(value), algorithm_label=label,
                        wall_time_ms=wall, **cell,
                    )
                except IrsSecrecyError as exc:
                    rec = TrialRecord(
                        figure_id=spec.figure_id, seed=seed,
                        sweep_value=float(value), algorithm_label=label,
                        error=f"{type(exc).__name__}: {exc}",
                    )
                records.append(rec)
                yield rec

    yield from _mean_rows(spec, records)


def _mean_rows(spec: ExperimentSpec, records: list[TrialRecord]) -> list[TrialRecord]:
    """Averaged summary rows, one per (sweep value, algorithm)."""
    rows = []
    for value in spec.sweep_values:
        for label in spec.baselines:
            group = [
                r for r in records
                if r.sweep_value == float(value)
                and r.algorithm_label == label and not r.error
            ]
            n_err = sum(
                1 for r in records
                if r.sweep_value == float(value)
                and r.algorithm_label == label and r.error
            )
            if not group:
                rows.append(TrialRecord(
                    figure_id=spec.figure_id, seed=-1, sweep_value=float(value),
                    algorithm_label=f"{label}_mean",
                    error=f"all {n_err} trials errored" if n_err else "no trials",
                ))
                continue

            def mean_of(attr: str):
                vals = [getattr(r, attr) for r in group if getattr(r, attr) is not None]
                return float(np.mean(vals)) if vals else None

            rows.append(TrialRecord(
                figure_id=spec.figure_id, seed=-1, sweep_value=float(value),
                algorithm_label=f"{label}_mean",
                c_s=mean_of("c_s"), c_b=mean_of("c_b"), c_e=mean_of("c_e"),
                p_min=mean_of("p_min"), iterations=mean_of("iterations"),
                wall_time_ms=mean_of("wall_time_ms"),
                error=f"{n_err} trials errored" if n_err else "",
            ))
    return rows


CSV_FIELDS = [f.name for f in fields(TrialRecord)]


def _format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def emit_csv(records: Iterable[TrialRecord], path) -> None:
    """Write records as UTF-8 CSV: header, 9-significant-digit floats,
    deterministic (seed, sweep value, label) ordering with the mean rows
    appended at the end."""
    recs = list(records)
    trial_rows = [r for r in recs if not r.algorithm_label.endswith("_mean")]
    mean_rows = [r for r in recs if r.algorithm_label.endswith("_mean")]
    key = lambda r: (r.seed, r.sweep_value, r.algorithm_label)
    ordered = sorted(trial_rows, key=key) + sorted(mean_rows, key=key)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_FIELDS)
            for rec in ordered:
                writer.writerow(
                    [_format_value(getattr(rec, name)) for name in CSV_FIELDS]
                )
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def _parse_count(sv: str):
    if not sv:
        return None
    f = float(sv)
    return int(f) if f.is_integer() else f


def parse_csv(path) -> list[TrialRecord]:
    """Read back an emitted CSV (inverse of emit_csv up to float rounding)."""
    out: list[TrialRecord] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(TrialRecord(
                figure_id=row["figure_id"],
                seed=int(row["seed"]),
                sweep_value=float(row["sweep_value"]),
                algorithm_label=row["algorithm_label"],
                c_s=float(row["c_s"]) if row["c_s"] else None,
                c_b=float(row["c_b"]) if row["c_b"] else None,
                c_e=float(row["c_e"]) if row["c_e"] else None,
                p_min=float(row["p_min"]) if row["p_min"] else None,
                iterations=_parse_count(row["iterations"]),
                wall_time_ms=(
                    float(row["wall_time_ms"]) if row["wall_time_ms"] else None
                ),
                error=row["error"],
            ))
    return out


def saddle_trace_csv(spec: ExperimentSpec, path) -> None:
    """Emit the raw barrier-solver trace (t, step, residual, f, C) rows."""
    scenario = spec.scenario
    ch = _channels_for(spec, scenario, 0)
    h1, h2 = effective_channels(ch, identity_phases(ch.dims.n))
    res = solve_saddle(
        h1, h2, power_from_dbm(scenario.power_dbm), spec.ao.barrier,
        collect_trace=True,
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "newton_step", "residual_norm", "f_bits", "c_bits"])
        for row in res.trace:
            writer.writerow([
                f"{row.t:.9g}", row.newton_step, f"{row.residual_norm:.9g}",
                f"{row.f_value:.9g}", f"{row.c_value:.9g}",
            ])
