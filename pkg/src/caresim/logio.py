"""Session logs: per-tick records, deterministic text serialization, replay IO.

A log file is one ``#``-prefixed header line (JSON: full config plus seed),
one column-name line, then one comma-separated record per tick with
fixed-width numeric fields. The fixed formatting makes logs byte-identical
across reruns and diffable, which is what the replay verdict relies on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

FORMAT_TAG = "caresim-log v1"

COLUMNS = (
    "tick",
    "t_ms",
    "session",
    "phase",
    "state",
    "comfort",
    "beta",
    "tau",
    "F",
    "T",
    "face",
    "toys",
    "touch",
    "event",
    "resolved",
    "actions",
)


@dataclass(frozen=True)
class TickRecord:
    """One annotated frame: robot state, comfort variables, stimuli, events.

    ``face`` holds the classified expression ("" when no face), ``toys`` and
    ``touch`` the validated color/region sets — their non-emptiness is the
    per-modality activity flag. ``event`` marks a threshold crossing at this
    tick; ``resolved`` marks the tick where a pending call was answered or
    given up.
    """

    tick: int
    t_ms: int
    session: str
    phase: int
    state: str
    comfort: float
    beta: float
    tau: float
    f: float
    t: float
    face: str = ""
    toys: tuple[str, ...] = ()
    touch: tuple[str, ...] = ()
    event: str = ""
    resolved: str = ""
    actions: tuple[str, ...] = ()

    @property
    def face_present(self) -> bool:
        return self.face != ""

    @property
    def toy_visible(self) -> bool:
        return bool(self.toys)

    @property
    def touch_active(self) -> bool:
        return bool(self.touch)

    def encode(self) -> str:
        return ",".join(
            (
                str(self.tick),
                str(self.t_ms),
                self.session,
                str(self.phase),
                self.state,
                f"{self.comfort:.6f}",
                f"{self.beta:.9f}",
                f"{self.tau:.3f}",
                f"{self.f:.6f}",
                f"{self.t:.6f}",
                self.face,
                "+".join(self.toys),
                "+".join(self.touch),
                self.event,
                self.resolved,
                ";".join(self.actions),
            )
        )

    @classmethod
    def decode(cls, line: str) -> "TickRecord":
        parts = line.rstrip("\n").split(",")
        if len(parts) != len(COLUMNS):
            raise ValueError(
                f"expected {len(COLUMNS)} fields, got {len(parts)}: {line!r}"
            )
        return cls(
            tick=int(parts[0]),
            t_ms=int(parts[1]),
            session=parts[2],
            phase=int(parts[3]),
            state=parts[4],
            comfort=float(parts[5]),
            beta=float(parts[6]),
            tau=float(parts[7]),
            f=float(parts[8]),
            t=float(parts[9]),
            face=parts[10],
            toys=tuple(parts[11].split("+")) if parts[11] else (),
            touch=tuple(parts[12].split("+")) if parts[12] else (),
            event=parts[13],
            resolved=parts[14],
            actions=tuple(parts[15].split(";")) if parts[15] else (),
        )


def encode_header(header: dict) -> str:
    return f"# {FORMAT_TAG} " + json.dumps(header, sort_keys=True, separators=(",", ":"))


def decode_header(line: str) -> dict:
    prefix = f"# {FORMAT_TAG} "
    if not line.startswith(prefix):
        raise ValueError(f"not a {FORMAT_TAG} header: {line[:60]!r}")
    return json.loads(line[len(prefix):])


@dataclass
class SessionLog:
    """A complete session: self-describing header plus ordered tick records."""

    header: dict
    records: list[TickRecord] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [encode_header(self.header), ",".join(COLUMNS)]
        lines.extend(record.encode() for record in self.records)
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "SessionLog":
        lines = text.splitlines()
        if len(lines) < 2:
            raise ValueError("log file too short: missing header or column line")
        header = decode_header(lines[0])
        if lines[1] != ",".join(COLUMNS):
            raise ValueError("column line does not match this log format")
        records = [TickRecord.decode(line) for line in lines[2:] if line]
        return cls(header=header, records=records)

    @classmethod
    def load(cls, path: str | Path) -> "SessionLog":
        return cls.from_text(Path(path).read_text())

    def validate_complete(self) -> None:
        """Raise if any tick is missing, duplicated or out of order."""
        missing: list[tuple[int, int]] = []
        expected = 0
        for record in self.records:
            if record.tick != expected:
                if record.tick < expected:
                    raise ValueError(f"tick {record.tick} out of order (expected {expected})")
                missing.append((expected, record.tick - 1))
                expected = record.tick
            expected += 1
        total = self.expected_ticks()
        if expected < total:
            missing.append((expected, total - 1))
        if missing:
            ranges = ", ".join(f"{a}..{b}" for a, b in missing)
            raise ValueError(f"incomplete log, missing tick ranges: {ranges}")

    def expected_ticks(self) -> int:
        h = self.header
        return int(h["n_phases"] * h["phase_s"] * h["tick_hz"])


class SessionLogWriter:
    """Streaming writer enforcing strict tick ordering.

    Records are written as they arrive; the underlying file is flushed at
    every phase boundary so a crashed session leaves whole phases behind.
    """

    def __init__(self, stream: IO[str], header: dict, phase_ticks: int) -> None:
        self._stream = stream
        self._phase_ticks = phase_ticks
        self._last_tick = -1
        self._stream.write(encode_header(header) + "\n")
        self._stream.write(",".join(COLUMNS) + "\n")

    def append(self, record: TickRecord) -> None:
        if record.tick != self._last_tick + 1:
            raise ValueError(
                f"out-of-order record: tick {record.tick} after {self._last_tick}"
            )
        self._last_tick = record.tick
        self._stream.write(record.encode() + "\n")
        if (record.tick + 1) % self._phase_ticks == 0:
            self._stream.flush()

    @classmethod
    def open(cls, path: str | Path, header: dict, phase_ticks: int) -> "SessionLogWriter":
        writer = cls(Path(path).open("w"), header, phase_ticks)
        return writer

    def close(self) -> None:
        self._stream.flush()
        self._stream.close()


def write_records(
    path: str | Path, header: dict, records: Iterable[TickRecord], phase_ticks: int
) -> None:
    with Path(path).open("w") as handle:
        writer = SessionLogWriter(handle, header, phase_ticks)
        for record in records:
            writer.append(record)
        handle.flush()
