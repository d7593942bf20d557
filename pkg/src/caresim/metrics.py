"""Session metrics: threshold-hit counts, state and modality distributions.

``compute_metrics`` digests a complete log into per-session counts and
per-phase percentage distributions; ``export_summary`` writes the
comma-separated table used by the experiment report, with per-group means.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .behavior import (
    DISENGAGE,
    ENGAGE_CALL,
    IDLE,
    INTERACT,
    SUSPEND_CRITICAL,
    SUSPEND_SATURATION,
)
from .logio import SessionLog, TickRecord

STATE_GROUPS = ("idle", "interact", "suspend", "transitional")
MODALITIES = ("face", "toy", "touch")

_GROUP_OF = {
    IDLE: "idle",
    INTERACT: "interact",
    SUSPEND_CRITICAL: "suspend",
    SUSPEND_SATURATION: "suspend",
    ENGAGE_CALL: "transitional",
    DISENGAGE: "transitional",
}


@dataclass(frozen=True)
class LoggedEvent:
    tick: int
    kind: str
    responded: bool | None  # None for saturation events


@dataclass
class SessionMetrics:
    session: str
    mode: str
    hits_critical: int = 0
    hits_saturation: int = 0
    responded: int = 0
    ignored: int = 0
    # phase -> group/modality -> percentage of phase time
    state_time_pct: dict = field(default_factory=dict)
    modality_time_pct: dict = field(default_factory=dict)
    events: list[LoggedEvent] = field(default_factory=list)

    @property
    def hits_total(self) -> int:
        return self.hits_critical + self.hits_saturation


def extract_events(log: SessionLog) -> list[LoggedEvent]:
    """Pair trigger ticks with their later resolution markers, in order."""
    events: list[LoggedEvent] = []
    pending: list[int] = []  # indices of unresolved critical events
    for record in log.records:
        if record.event:
            responded = None if record.event == "saturation" else False
            events.append(LoggedEvent(record.tick, record.event, responded))
            if record.event == "critical":
                pending.append(len(events) - 1)
        if record.resolved:
            if not pending:
                raise ValueError(
                    f"resolution marker at tick {record.tick} without an open call"
                )
            index = pending.pop(0)
            events[index] = LoggedEvent(
                events[index].tick, "critical", record.resolved == "responded"
            )
    if pending:
        ticks = [events[i].tick for i in pending]
        raise ValueError(f"unresolved critical events at ticks {ticks}")
    return events


def compute_metrics(log: SessionLog) -> SessionMetrics:
    """Counts and per-phase distributions for one complete session log."""
    log.validate_complete()
    header = log.header
    metrics = SessionMetrics(session=header["session"], mode=header["mode"])
    metrics.events = extract_events(log)

    for event in metrics.events:
        if event.kind == "critical":
            metrics.hits_critical += 1
            if event.responded:
                metrics.responded += 1
            else:
                metrics.ignored += 1
        else:
            metrics.hits_saturation += 1

    phase_ticks: dict[int, int] = {}
    state_counts: dict[int, dict[str, int]] = {}
    modality_counts: dict[int, dict[str, int]] = {}
    for record in log.records:
        phase = record.phase
        phase_ticks[phase] = phase_ticks.get(phase, 0) + 1
        states = state_counts.setdefault(phase, dict.fromkeys(STATE_GROUPS, 0))
        states[_GROUP_OF[record.state]] += 1
        modalities = modality_counts.setdefault(phase, dict.fromkeys(MODALITIES, 0))
        if record.face_present:
            modalities["face"] += 1
        if record.toy_visible:
            modalities["toy"] += 1
        if record.touch_active:
            modalities["touch"] += 1

    for phase, total in sorted(phase_ticks.items()):
        metrics.state_time_pct[phase] = {
            group: 100.0 * count / total
            for group, count in state_counts[phase].items()
        }
        metrics.modality_time_pct[phase] = {
            modality: 100.0 * count / total
            for modality, count in modality_counts[phase].items()
        }
    return metrics


@dataclass(frozen=True)
class SummaryRow:
    order: str
    position: int  # 1 = first session of the experiment, 2 = second
    metrics: SessionMetrics

    @property
    def session(self) -> str:
        return self.metrics.session


def _phases(rows: list[SummaryRow]) -> list[int]:
    seen: set[int] = set()
    for row in rows:
        seen.update(row.metrics.state_time_pct)
    return sorted(seen)


def summary_fieldnames(phases: list[int]) -> list[str]:
    names = [
        "order",
        "position",
        "session",
        "mode",
        "hits_critical",
        "hits_saturation",
        "responded",
        "ignored",
    ]
    for group in STATE_GROUPS:
        names.extend(f"{group}_pct_p{phase}" for phase in phases)
    for modality in MODALITIES:
        names.extend(f"{modality}_pct_p{phase}" for phase in phases)
    return names


def _row_values(row: SummaryRow, phases: list[int]) -> dict:
    m = row.metrics
    values: dict = {
        "order": row.order,
        "position": row.position,
        "session": m.session,
        "mode": m.mode,
        "hits_critical": m.hits_critical,
        "hits_saturation": m.hits_saturation,
        "responded": m.responded,
        "ignored": m.ignored,
    }
    for group in STATE_GROUPS:
        for phase in phases:
            values[f"{group}_pct_p{phase}"] = (
                f"{m.state_time_pct.get(phase, {}).get(group, 0.0):.2f}"
            )
    for modality in MODALITIES:
        for phase in phases:
            values[f"{modality}_pct_p{phase}"] = (
                f"{m.modality_time_pct.get(phase, {}).get(modality, 0.0):.2f}"
            )
    return values


def export_summary(rows: list[SummaryRow], path: str | Path) -> None:
    """Write per-session rows plus per-(order, session) means as CSV."""
    if not rows:
        raise ValueError("no session metrics to summarize")
    phases = _phases(rows)
    fieldnames = summary_fieldnames(phases)
    numeric = [n for n in fieldnames if n not in ("order", "position", "session", "mode")]

    with Path(path).open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        for row in sorted(rows, key=lambda r: (r.order, r.position)):
            writer.writerow(_row_values(row, phases))
        groups: dict[tuple[str, str], list[SummaryRow]] = {}
        for row in rows:
            groups.setdefault((row.order, row.session), []).append(row)
        for (order, session), members in sorted(groups.items()):
            mean_row: dict = {
                "order": order,
                "position": "mean",
                "session": session,
                "mode": members[0].metrics.mode,
            }
            value_dicts = [_row_values(m, phases) for m in members]
            for name in numeric:
                mean = sum(float(v[name]) for v in value_dicts) / len(value_dicts)
                mean_row[name] = f"{mean:.2f}"
            writer.writerow(mean_row)
