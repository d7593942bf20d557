"""Report figures rendered next to the delimited output.

Four views of a session or experiment: the comfort trace with threshold
events and a stimulus raster, average threshold hits per session/order,
the per-phase state distribution and the per-phase modality distribution.
All figures are written to files (Agg backend); nothing is shown.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .logio import SessionLog
from .metrics import MODALITIES, STATE_GROUPS, SummaryRow, extract_events
from .params import params_from_dict

GROUP_COLORS = {
    "idle": "#b0b0b0",
    "interact": "#2a9d8f",
    "suspend": "#e76f51",
    "transitional": "#e9c46a",
}
MODALITY_COLORS = {"face": "#457b9d", "toy": "#e9c46a", "touch": "#e76f51"}


def plot_comfort_trace(log: SessionLog, path: str | Path) -> Path:
    """Comfort over the session with threshold events and stimuli."""
    params, _ = params_from_dict(log.header["config"])
    hz = params.tick_hz
    seconds = [r.tick / hz for r in log.records]
    comfort = [r.comfort for r in log.records]

    fig, (ax, ax_stim) = plt.subplots(
        2, 1, figsize=(11, 6), sharex=True, height_ratios=[3, 1]
    )
    ax.plot(seconds, comfort, lw=1.0, color="#333333", label="comfort")
    ax.axhline(params.c_critical, color="#d62828", ls="--", lw=0.8, label="critical")
    ax.axhline(params.c_saturation, color="#1d3557", ls="--", lw=0.8, label="saturation")
    ax.axhspan(
        params.c_init - params.optimal_band,
        params.c_init + params.optimal_band,
        color="#2a9d8f",
        alpha=0.12,
        label="optimal zone",
    )
    for event in extract_events(log):
        t = event.tick / hz
        c = log.records[event.tick].comfort
        if event.kind == "saturation":
            ax.plot(t, c, "^", color="#1d3557", ms=8)
        elif event.responded:
            ax.plot(t, c, "*", color="#f4a300", ms=13, mec="#7a5200")
        else:
            ax.plot(t, c, "o", color="#d62828", ms=7)
    phase_ticks = log.expected_ticks() // log.header["n_phases"]
    for boundary in range(phase_ticks, log.expected_ticks(), phase_ticks):
        ax.axvline(boundary / hz, color="0.8", lw=0.8)
        ax_stim.axvline(boundary / hz, color="0.8", lw=0.8)
    ax.set_ylabel("comfort")
    ax.set_ylim(0, params.c_max)
    ax.legend(loc="upper right", fontsize=8, ncol=2)
    mode = log.header["mode"]
    ax.set_title(f"session {log.header['session']} ({mode}), seed {log.header['seed']}")

    rows = {"face": 2, "toy": 1, "touch": 0}
    for name, row in rows.items():
        active = {
            "face": [r.face_present for r in log.records],
            "toy": [r.toy_visible for r in log.records],
            "touch": [r.touch_active for r in log.records],
        }[name]
        xs = [s for s, on in zip(seconds, active) if on]
        ax_stim.plot(xs, [row] * len(xs), "|", color=MODALITY_COLORS[name], ms=9)
    ax_stim.set_yticks(list(rows.values()), list(rows.keys()))
    ax_stim.set_ylim(-0.5, 2.5)
    ax_stim.set_xlabel("time (s)")
    ax_stim.set_ylabel("stimuli")

    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_hits_summary(rows: list[SummaryRow], path: str | Path) -> Path:
    """Average threshold hits per session label, grouped by session order."""
    orders = sorted({row.order for row in rows})
    labels = ("A", "F")
    fig, ax = plt.subplots(figsize=(6, 4))
    width = 0.35
    for i, label in enumerate(labels):
        means = []
        for order in orders:
            values = [
                r.metrics.hits_total
                for r in rows
                if r.order == order and r.session == label
            ]
            means.append(sum(values) / len(values) if values else 0.0)
        offset = (i - 0.5) * width
        ax.bar(
            [x + offset for x in range(len(orders))],
            means,
            width,
            label=f"session {label}",
            color="#2a9d8f" if label == "A" else "#e76f51",
        )
    ax.set_xticks(range(len(orders)), [f"order {o}" for o in orders])
    ax.set_ylabel("mean threshold hits per session")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def _stacked_by_phase(ax, per_phase: dict, keys, colors) -> None:
    phases = sorted(per_phase)
    bottoms = [0.0] * len(phases)
    for key in keys:
        values = [per_phase[p].get(key, 0.0) for p in phases]
        ax.bar(
            [f"phase {p}" for p in phases],
            values,
            bottom=bottoms,
            label=key,
            color=colors[key],
        )
        bottoms = [b + v for b, v in zip(bottoms, values)]
    ax.set_ylim(0, 100)


def plot_state_distribution(rows: list[SummaryRow], path: str | Path) -> Path:
    """Stacked per-phase distribution of the major states, one panel per session."""
    fig, axes = plt.subplots(
        1, len(rows), figsize=(4.0 * len(rows), 4), squeeze=False, sharey=True
    )
    for ax, row in zip(axes[0], sorted(rows, key=lambda r: (r.order, r.position))):
        _stacked_by_phase(ax, row.metrics.state_time_pct, STATE_GROUPS, GROUP_COLORS)
        ax.set_title(f"{row.order} pos {row.position}: session {row.session}")
    axes[0][0].set_ylabel("% of phase time")
    axes[0][-1].legend(fontsize=8, loc="upper right")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_modality_distribution(rows: list[SummaryRow], path: str | Path) -> Path:
    """Per-phase share of time each modality was active, one panel per session."""
    fig, axes = plt.subplots(
        1, len(rows), figsize=(4.0 * len(rows), 4), squeeze=False, sharey=True
    )
    for ax, row in zip(axes[0], sorted(rows, key=lambda r: (r.order, r.position))):
        phases = sorted(row.metrics.modality_time_pct)
        for i, modality in enumerate(MODALITIES):
            values = [row.metrics.modality_time_pct[p][modality] for p in phases]
            offset = (i - 1) * 0.28
            ax.bar(
                [x + offset for x in range(len(phases))],
                values,
                0.28,
                label=modality,
                color=MODALITY_COLORS[modality],
            )
        ax.set_xticks(range(len(phases)), [f"phase {p}" for p in phases])
        ax.set_title(f"{row.order} pos {row.position}: session {row.session}")
        ax.set_ylim(0, 100)
    axes[0][0].set_ylabel("% of phase time active")
    axes[0][-1].legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_report_figures(
    logs: list[SessionLog], rows: list[SummaryRow], out_dir: str | Path
) -> list[Path]:
    """Render the full figure set for a metrics/experiment report."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, log in enumerate(logs, start=1):
        name = f"comfort_{i:02d}_session_{log.header['session']}_seed{log.header['seed']}.png"
        written.append(plot_comfort_trace(log, out_dir / name))
    written.append(plot_hits_summary(rows, out_dir / "threshold_hits.png"))
    written.append(plot_state_distribution(rows, out_dir / "state_distribution.png"))
    written.append(plot_modality_distribution(rows, out_dir / "modality_distribution.png"))
    return written
