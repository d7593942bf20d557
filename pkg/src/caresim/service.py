"""Live session service: wire-message folding and the tick-driven core.

The service owns one :class:`SessionEngine` and advances it tick by tick.
Client messages received between ticks are folded into the next tick's
perception events (last writer wins per modality; touches per region are
independent; toy sightings accumulate). No messages means zero stimuli,
exactly like a scripted caretaker going silent. The transport layer
(``server.py``) only pumps JSON frames; everything testable lives here.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

from .logio import SessionLog, TickRecord
from .params import FusionWeights, SocialParams
from .perception import AUSet, RawEvents, TOUCH_REGIONS, TouchReading
from .pollinator import Puzzle, PuzzleAnswer, generate, score
from .session import SessionEngine
from .perception import DEFAULT_TOY_PALETTE

log = logging.getLogger(__name__)

# Puzzles for live sessions come from a stream separated from the
# caretaker/attention streams.
PUZZLE_SEED_OFFSET = 7777777

CLIENT_TYPES = ("hello", "touch", "face", "toy", "puzzle_answer")


class MessageError(ValueError):
    pass


def _require(condition: bool, reason: str) -> None:
    if not condition:
        raise MessageError(reason)


def validate_message(message) -> dict:
    """Check one client frame's shape; raises :class:`MessageError`."""
    _require(isinstance(message, dict), "message must be a JSON object")
    kind = message.get("type")
    _require(kind in CLIENT_TYPES, f"unknown message type {kind!r}")
    if kind == "hello":
        _require(isinstance(message.get("name", ""), str), "hello.name must be a string")
    elif kind == "touch":
        _require(message.get("region") in TOUCH_REGIONS, "touch.region unknown")
        _require(
            isinstance(message.get("taxels"), int) and message["taxels"] >= 0,
            "touch.taxels must be a nonnegative integer",
        )
        _require(
            isinstance(message.get("pressure"), (int, float)) and message["pressure"] >= 0,
            "touch.pressure must be a nonnegative number",
        )
    elif kind == "face":
        _require(isinstance(message.get("present"), bool), "face.present must be a boolean")
        aus = message.get("aus", [])
        _require(isinstance(aus, list), "face.aus must be a list")
        try:
            AUSet.from_codes(aus)
        except ValueError as exc:
            raise MessageError(str(exc)) from exc
    elif kind == "toy":
        _require(isinstance(message.get("color"), str), "toy.color must be a string")
    elif kind == "puzzle_answer":
        _require(isinstance(message.get("filled"), dict), "puzzle_answer.filled must be a map")
    return message


def fold_messages(messages: list[dict]) -> RawEvents:
    """Collapse one tick's pending messages into raw perception events."""
    face_msg: dict | None = None
    touch_by_region: dict[str, dict] = {}
    toys: set[str] = set()
    for message in messages:
        kind = message["type"]
        if kind == "face":
            face_msg = message
        elif kind == "touch":
            touch_by_region[message["region"]] = message
        elif kind == "toy":
            toys.add(message["color"])
    events = RawEvents(toy_colors=toys)
    if face_msg is not None and face_msg["present"]:
        events.face_present = True
        events.aus = AUSet.from_codes(face_msg.get("aus", []))
    for region, message in touch_by_region.items():
        events.touches.append(
            TouchReading(region, message["taxels"], message["pressure"])
        )
    return events


@dataclass
class ServiceConfig:
    mode: str = "adaptive"
    seed: int = 0
    phase_s: float = 240.0
    n_phases: int = 3
    dual_task_phase: int = 2
    debug: bool = False


@dataclass
class SessionService:
    """Tick loop state for one live caretaker session."""

    params: SocialParams
    weights: FusionWeights
    config: ServiceConfig
    palette: frozenset = DEFAULT_TOY_PALETTE

    def __post_init__(self) -> None:
        self.engine = SessionEngine(
            self.params,
            self.weights,
            self.config.mode,
            self.config.seed,
            phase_s=self.config.phase_s,
            n_phases=self.config.n_phases,
            dual_task_phase=self.config.dual_task_phase,
            palette=self.palette,
            profile_info={"name": "live"},
        )
        self.puzzle: Puzzle = generate(
            random.Random(self.config.seed + PUZZLE_SEED_OFFSET)
        )
        self.pending: list[dict] = []
        self.client_name: str | None = None
        self.answer: PuzzleAnswer | None = None
        self.disconnects = 0

    @property
    def done(self) -> bool:
        return self.engine.done

    # -- message intake -----------------------------------------------------
    def ingest(self, message) -> dict | None:
        """Queue one client frame; returns an error frame when malformed."""
        try:
            message = validate_message(message)
        except MessageError as exc:
            log.warning("rejected client message: %s", exc)
            return {"type": "error", "reason": str(exc)}
        if message["type"] == "hello":
            self.client_name = message.get("name") or None
            if self.engine.profile_info is not None and self.client_name:
                self.engine.profile_info["client"] = self.client_name
            return None
        if message["type"] == "puzzle_answer":
            try:
                self.answer = PuzzleAnswer(
                    {int(cell): int(digit) for cell, digit in message["filled"].items()}
                )
            except (TypeError, ValueError) as exc:
                log.warning("rejected puzzle answer: %s", exc)
                return {"type": "error", "reason": f"bad puzzle answer: {exc}"}
            return None
        self.pending.append(message)
        return None

    def note_disconnect(self) -> None:
        self.disconnects += 1
        log.info("client disconnected; session continues with zero stimuli")

    # -- tick advance ---------------------------------------------------------
    def advance_tick(self) -> list[dict]:
        """Fold pending messages, advance one tick, emit server frames."""
        messages, self.pending = self.pending, []
        record = self.engine.tick_raw(fold_messages(messages))
        frames = []
        dual_start = (self.config.dual_task_phase - 1) * self.engine.phase_ticks
        if record.tick == dual_start:
            frames.append(self.puzzle_assignment())
        if record.event == "critical":
            frames.append({"type": "engage_call", "tick": record.tick})
        frames.append(self.snapshot(record))
        if self.engine.done:
            frames.append({"type": "session_end", "summary": self.summary()})
        return frames

    def snapshot(self, record: TickRecord) -> dict:
        total_s = self.engine.total_ticks / self.params.tick_hz
        frame = {
            "type": "snapshot",
            "tick": record.tick,
            "t_ms": record.t_ms,
            "state": record.state,
            "actions": list(record.actions),
            "phase": record.phase,
            "remaining_s": round(total_s - (record.tick + 1) / self.params.tick_hz, 3),
        }
        if self.config.debug:
            frame["debug"] = {
                "comfort": record.comfort,
                "beta": record.beta,
                "tau": record.tau,
                "F": record.f,
                "T": record.t,
            }
        return frame

    def puzzle_assignment(self) -> dict:
        return {
            "type": "puzzle_assignment",
            "puzzle": {
                "cells": 10,
                "constraints": [
                    {
                        "cell_a": c.cell_a,
                        "cell_b": c.cell_b,
                        "op": c.op,
                        "target": str(c.target),
                    }
                    for c in self.puzzle.constraints
                ],
            },
        }

    def summary(self) -> dict:
        from .metrics import compute_metrics

        metrics = compute_metrics(self.engine.to_log())
        out = {
            "session": metrics.session,
            "mode": metrics.mode,
            "hits_critical": metrics.hits_critical,
            "hits_saturation": metrics.hits_saturation,
            "responded": metrics.responded,
            "ignored": metrics.ignored,
            "puzzle": None,
        }
        if self.answer is not None:
            x, y, z = score(self.answer, self.puzzle.solution)
            out["puzzle"] = {"X": x, "Y": y, "Z": z}
        return out

    def to_log(self) -> SessionLog:
        return self.engine.to_log()
