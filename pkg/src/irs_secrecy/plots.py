"""Render the benchmark figures from trial records to image files."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import TRACE_FIGURES, TrialRecord

_LABEL_STYLE = {
    "optimized": dict(marker="o", color="C0"),
    "zero_phase": dict(marker="s", color="C1"),
    "no_irs": dict(marker="^", color="C2"),
    "an": dict(marker="o", color="C0"),
    "no_an": dict(marker="s", color="C3"),
    "bs_obo": dict(marker="o", color="C0"),
    "bs_mm": dict(marker="s", color="C1"),
    "saddle": dict(marker="", color="C0"),
}

_SWEEP_AXIS = {
    "power_dbm": "transmit power (dBm)",
    "qos_gamma": "rate target $\\gamma$ (bits)",
    "n": "reflecting elements $n$",
    "e": "Eve antennas $e$",
    "iteration": "iteration",
}


def _style(label: str) -> dict:
    return _LABEL_STYLE.get(label.removesuffix("_mean"), dict(marker="."))


def render_figure(figure_id: str, records: list[TrialRecord], sweep_name: str, path) -> None:
    """Draw the standard plot for an experiment and save it to ``path``."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xlabel = _SWEEP_AXIS.get(sweep_name, sweep_name)

    if figure_id == "fig10_saddle_trace":
        rows = [r for r in records if not r.error]
        steps = [r.sweep_value for r in rows]
        ax.plot(steps, [r.c_b for r in rows], label="saddle objective f(R,K)")
        ax.plot(steps, [r.c_s for r in rows], "--", label="secrecy objective C(R)")
        ax.set_ylabel("bits")
        ax.set_xlabel("Newton step")
    elif figure_id in TRACE_FIGURES:
        value_of = (
            (lambda r: r.p_min)
            if figure_id in ("fig8_powermin_convergence", "fig9_mm_vs_obo")
            else (lambda r: r.c_s)
        )
        labels = sorted({r.algorithm_label for r in records if not r.error})
        for label in labels:
            for seed in sorted({r.seed for r in records}):
                rows = [
                    r for r in records
                    if r.algorithm_label == label and r.seed == seed and not r.error
                ]
                if not rows:
                    continue
                rows.sort(key=lambda r: r.sweep_value)
                ax.plot(
                    [r.sweep_value for r in rows],
                    [value_of(r) for r in rows],
                    label=label if seed == 0 else None,
                    **_style(label),
                )
        ax.set_ylabel(
            "transmit power (W)"
            if figure_id in ("fig8_powermin_convergence", "fig9_mm_vs_obo")
            else "secrecy rate (bits)"
        )
        ax.set_xlabel("iteration")
    else:
        mean_rows = [
            r for r in records
            if r.algorithm_label.endswith("_mean") and not r.error.startswith("all")
        ]
        labels = sorted({r.algorithm_label for r in mean_rows})
        for label in labels:
            rows = sorted(
                (r for r in mean_rows if r.algorithm_label == label and r.c_s is not None),
                key=lambda r: r.sweep_value,
            )
            if not rows:
                continue
            ax.plot(
                [r.sweep_value for r in rows],
                [r.c_s for r in rows],
                label=label,
                **_style(label),
            )
        ax.set_ylabel("secrecy rate (bits)")
        ax.set_xlabel(xlabel)

    ax.grid(True, alpha=0.4)
    ax.legend(loc="best", fontsize=9)
    ax.set_title(figure_id)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_power_panel(records: list[TrialRecord], path) -> None:
    """Companion panel for the blocked-link figure: minimum power vs target."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    mean_rows = [
        r for r in records
        if r.algorithm_label.endswith("_mean") and r.p_min is not None
    ]
    for label in sorted({r.algorithm_label for r in mean_rows}):
        rows = sorted(
            (r for r in mean_rows if r.algorithm_label == label),
            key=lambda r: r.sweep_value,
        )
        ax.plot(
            [r.sweep_value for r in rows],
            [r.p_min for r in rows],
            label=label,
            **_style(label),
        )
    ax.set_xlabel(_SWEEP_AXIS["qos_gamma"])
    ax.set_ylabel("minimum transmit power (W)")
    ax.grid(True, alpha=0.4)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
