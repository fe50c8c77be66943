"""Command-line batch runner.

Runs one figure experiment, writes the CSV (the data contract) and renders
the matching plot next to it.  Scenario fields can be overridden from a flat
key=value config file and from the listed flags; flags win over the file.

Example:
    irs-secrecy-bench --figure fig2_rate_vs_power --trials 20 --seed 1 \
        --out results/fig2.csv
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .bench import (
    FIGURE_IDS,
    default_spec,
    emit_csv,
    run_experiment,
    saddle_trace_csv,
)
from .channel import Dims, LinkDistances

_SCENARIO_FLOAT_KEYS = (
    "path_loss_ref_db",
    "path_loss_exponent",
    "power_dbm",
    "qos_gamma",
    "noise_power_dbm",
)
_SCENARIO_INT_KEYS = ("trials", "rng_seed")
_DIM_KEYS = ("m", "d", "e", "n")
_DISTANCE_KEYS = ("alice_bob", "alice_irs", "alice_eve", "irs_bob", "irs_eve")
_AO_FLOAT_KEYS = ("eps_outer", "mm_tol", "p_budget_cap")
_AO_INT_KEYS = ("max_outer",)


def read_config_file(path: str) -> dict:
    """Parse a flat key=value file ('#' starts a comment)."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irs-secrecy-bench",
        description="IRS-assisted MIMO wiretap secrecy-rate benchmarks",
    )
    parser.add_argument("--figure", required=True, choices=FIGURE_IDS)
    parser.add_argument("--trials", type=int, help="Monte-Carlo trial count")
    parser.add_argument("--seed", type=int, help="base RNG seed")
    parser.add_argument("--out", default=None, help="output CSV path")
    parser.add_argument("--m", type=int, help="Alice antennas")
    parser.add_argument("--d", type=int, help="Bob antennas")
    parser.add_argument("--e", type=int, help="Eve antennas")
    parser.add_argument("--n", type=int, help="IRS elements")
    parser.add_argument("--power-dbm", type=float, help="transmit power budget")
    parser.add_argument("--gamma", type=float, help="QoS rate target (bits)")
    parser.add_argument(
        "--phase-method", choices=("obo", "mm"), help="phase update for power minimization"
    )
    parser.add_argument("--config", help="flat key=value scenario override file")
    parser.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    parser.add_argument(
        "--no-timing",
        action="store_true",
        help="omit wall-clock timing so reruns are byte-identical",
    )
    return parser


def _apply_config(spec_kwargs: dict, cfg: dict) -> dict:
    """Fold config-file entries into default_spec overrides."""
    scenario_over: dict = {}
    dims_over: dict = {}
    dist_over: dict = {}
    ao_over: dict = {}
    for key, value in cfg.items():
        if key in _SCENARIO_FLOAT_KEYS:
            scenario_over[key] = float(value)
        elif key in _SCENARIO_INT_KEYS:
            scenario_over[key] = int(value)
        elif key in _DIM_KEYS:
            dims_over[key] = int(value)
        elif key in _DISTANCE_KEYS:
            dist_over[key] = float(value)
        elif key in _AO_FLOAT_KEYS:
            ao_over[key] = float(value)
        elif key in _AO_INT_KEYS:
            ao_over[key] = int(value)
        elif key == "phase_method":
            ao_over[key] = value
        elif key == "sweep_values":
            spec_kwargs["sweep_values"] = tuple(
                float(v) for v in value.split(",") if v.strip()
            )
        elif key == "baselines":
            spec_kwargs["baselines"] = tuple(
                v.strip() for v in value.split(",") if v.strip()
            )
        else:
            raise ValueError(f"unknown config key {key!r}")
    spec_kwargs["_scenario"] = scenario_over
    spec_kwargs["_dims"] = dims_over
    spec_kwargs["_distances"] = dist_over
    spec_kwargs["_ao"] = ao_over
    return spec_kwargs


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    file_cfg = read_config_file(args.config) if args.config else {}
    spec_kwargs = _apply_config({}, file_cfg)

    scenario_over = spec_kwargs.pop("_scenario")
    dims_over = spec_kwargs.pop("_dims")
    dist_over = spec_kwargs.pop("_distances")
    ao_over = spec_kwargs.pop("_ao")

    if args.trials is not None:
        scenario_over["trials"] = args.trials
    if args.seed is not None:
        scenario_over["rng_seed"] = args.seed
    if args.power_dbm is not None:
        scenario_over["power_dbm"] = args.power_dbm
    if args.gamma is not None:
        scenario_over["qos_gamma"] = args.gamma
    for key in _DIM_KEYS:
        flag = getattr(args, key)
        if flag is not None:
            dims_over[key] = flag
    if args.phase_method is not None:
        ao_over["phase_method"] = args.phase_method

    spec = default_spec(args.figure, record_timing=not args.no_timing, **spec_kwargs)
    scenario = spec.scenario
    if dims_over:
        scenario = replace(
            scenario,
            dims=Dims(**{**scenario.dims.__dict__, **dims_over}),
        )
    if dist_over:
        scenario = replace(
            scenario,
            distances=LinkDistances(**{**scenario.distances.__dict__, **dist_over}),
        )
    if scenario_over:
        scenario = replace(scenario, **scenario_over)
    ao = replace(spec.ao, **ao_over) if ao_over else spec.ao
    spec = replace(spec, scenario=scenario, ao=ao)

    out = Path(args.out) if args.out else Path("results") / f"{args.figure}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)

    records = list(run_experiment(spec))
    emit_csv(records, out)
    n_err = sum(1 for r in records if r.error and not r.algorithm_label.endswith("_mean"))
    print(f"wrote {out} ({len(records)} rows, {n_err} trial errors)")

    if spec.figure_id == "fig10_saddle_trace":
        trace_path = out.with_name(out.stem + "_saddle_trace.csv")
        saddle_trace_csv(spec, trace_path)
        print(f"wrote {trace_path}")

    if not args.no_plot:
        from .plots import render_figure, render_power_panel

        png = out.with_suffix(".png")
        render_figure(spec.figure_id, records, spec.sweep_name, png)
        print(f"wrote {png}")
        if spec.figure_id == "fig6_blocked":
            panel = out.with_name(out.stem + "_power.png")
            render_power_panel(records, panel)
            print(f"wrote {panel}")

    return 1 if n_err else 0


if __name__ == "__main__":
    sys.exit(main())
