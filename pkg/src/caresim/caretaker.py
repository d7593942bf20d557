"""Scripted caretaker agents: per-phase stimulus policies with call handling.

Profiles are the experimental instrument standing in for human participants.
Each phase policy gives per-tick Bernoulli rates for face presence, smiling,
toy showing and per-region touch, plus how the agent treats the robot's
engagement calls: with probability ``respond_to_call`` it answers after
``respond_latency_s`` by facing the robot (smiling) and petting its torso for
``respond_hold_s``; otherwise it stays absorbed in whatever it is doing and
gives no stimuli at all until the call expires.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .behavior import VERB_STRAIGHTEN
from .perception import AUSet, RawEvents, TOUCH_REGIONS, TouchReading

# A deliberate, valid pet: comfortably above both touch-filter bounds.
TOUCH_TAXELS = 8
TOUCH_PRESSURE = 15.0

SMILE_AUS = AUSet.from_codes({"au6", "au12"})
NEUTRAL_AUS = AUSet.from_codes(set())


@dataclass(frozen=True)
class PhasePolicy:
    """Per-tick stimulus rates for one 4-minute phase."""

    face_presence_prob: float = 0.0
    smile_prob: float = 0.0
    toy_show_prob: float = 0.0
    touch_prob: dict = field(default_factory=lambda: dict.fromkeys(TOUCH_REGIONS, 0.0))
    respond_to_call: float = 0.0
    respond_latency_s: float = 1.0

    def __post_init__(self) -> None:
        probs = [
            self.face_presence_prob,
            self.smile_prob,
            self.toy_show_prob,
            self.respond_to_call,
            *self.touch_prob.values(),
        ]
        if any(not (0.0 <= p <= 1.0) for p in probs):
            raise ValueError(f"policy probabilities must lie in [0, 1]: {self}")
        unknown = set(self.touch_prob) - set(TOUCH_REGIONS)
        if unknown:
            raise ValueError(f"unknown touch regions in policy: {sorted(unknown)}")

    @classmethod
    def make(
        cls,
        face: float = 0.0,
        smile: float = 0.0,
        toy: float = 0.0,
        touch: float = 0.0,
        respond: float = 0.0,
        latency_s: float = 1.0,
    ) -> "PhasePolicy":
        return cls(
            face_presence_prob=face,
            smile_prob=smile,
            toy_show_prob=toy,
            touch_prob=dict.fromkeys(TOUCH_REGIONS, touch),
            respond_to_call=respond,
            respond_latency_s=latency_s,
        )


@dataclass(frozen=True)
class CaretakerProfile:
    """A named caretaker script: exactly one policy per phase."""

    name: str
    phases: tuple[PhasePolicy, PhasePolicy, PhasePolicy]
    respond_hold_s: float = 5.0
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.phases) != 3:
            raise ValueError("a profile must define exactly 3 phase policies")
        if self.respond_hold_s < 0:
            raise ValueError("respond_hold_s must be nonnegative")

    def policy(self, phase: int) -> PhasePolicy:
        if phase not in (1, 2, 3):
            raise ValueError(f"phase must be 1, 2 or 3, got {phase}")
        return self.phases[phase - 1]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "respond_hold_s": self.respond_hold_s,
            "seed": self.seed,
            "phases": [
                {
                    "face_presence_prob": p.face_presence_prob,
                    "smile_prob": p.smile_prob,
                    "toy_show_prob": p.toy_show_prob,
                    "touch_prob": dict(p.touch_prob),
                    "respond_to_call": p.respond_to_call,
                    "respond_latency_s": p.respond_latency_s,
                }
                for p in self.phases
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CaretakerProfile":
        phases = tuple(PhasePolicy(**phase) for phase in data["phases"])
        return cls(
            name=data["name"],
            phases=phases,
            respond_hold_s=data.get("respond_hold_s", 5.0),
            seed=data.get("seed", 0),
        )

    @classmethod
    def load(cls, path: str | Path) -> "CaretakerProfile":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def _uniform_phases(policy: PhasePolicy) -> tuple[PhasePolicy, PhasePolicy, PhasePolicy]:
    return (policy, policy, policy)


# The four bundled caretaker styles.
#
# attentive: near-continuous face, regular petting, always answers calls.
# sparse:    rare, brief stimuli; answers about half the calls.
# distracted: engaged in phases 1 and 3, but during the dual-task phase the
#            face all but disappears while absent-minded petting continues at
#            the phase-1 rate; calls during the task are ignored, calls after
#            it draw a long compensating response.
# intense:   full multimodal stimulation on every tick.
ATTENTIVE = CaretakerProfile(
    name="attentive",
    phases=_uniform_phases(
        PhasePolicy.make(face=0.95, smile=0.35, toy=0.25, touch=0.15, respond=1.0,
                         latency_s=1.0)
    ),
    respond_hold_s=10.0,
)

SPARSE = CaretakerProfile(
    name="sparse",
    phases=_uniform_phases(
        PhasePolicy.make(face=0.07, smile=0.2, toy=0.03, touch=0.015, respond=0.5,
                         latency_s=2.0)
    ),
    respond_hold_s=20.0,
)

DISTRACTED = CaretakerProfile(
    name="distracted",
    phases=(
        PhasePolicy.make(face=0.85, smile=0.25, toy=0.15, touch=0.04, respond=1.0,
                         latency_s=1.0),
        PhasePolicy.make(face=0.03, smile=0.25, toy=0.0, touch=0.04, respond=0.0,
                         latency_s=1.0),
        PhasePolicy.make(face=0.03, smile=0.3, toy=0.0, touch=0.04, respond=1.0,
                         latency_s=1.0),
    ),
    respond_hold_s=30.0,
)

INTENSE = CaretakerProfile(
    name="intense",
    phases=_uniform_phases(
        PhasePolicy.make(face=1.0, smile=1.0, toy=1.0, touch=1.0, respond=1.0,
                         latency_s=1.0)
    ),
    respond_hold_s=10.0,
)

SILENT = CaretakerProfile(name="silent", phases=_uniform_phases(PhasePolicy.make()))

BUNDLED_PROFILES = {
    p.name: p for p in (ATTENTIVE, SPARSE, DISTRACTED, INTENSE, SILENT)
}


class ScriptedCaretaker:
    """Samples perception events per tick and reacts to engagement calls.

    The agent sees the robot's action stream from the previous tick; a
    ``straighten_up`` command (emitted only on an engagement call) is the cue
    to decide, once per call, whether to respond or to keep ignoring the
    robot until the call expires.
    """

    def __init__(
        self,
        profile: CaretakerProfile,
        rng: random.Random,
        palette,
        tick_hz: int,
        response_window_ticks: int,
    ) -> None:
        self.profile = profile
        self.rng = rng
        self.palette = tuple(sorted(palette))
        self.tick_hz = tick_hz
        self.response_window_ticks = response_window_ticks
        self.response_start: int | None = None
        self.response_end: int | None = None
        self.suppress_until: int | None = None

    def tick(self, t: int, phase: int, prev_actions: tuple[str, ...]) -> RawEvents:
        policy = self.profile.policy(phase)
        # Fixed draw order per tick keeps seeded trajectories aligned across
        # session modes until behavior actually diverges.
        u_face = self.rng.random()
        u_smile = self.rng.random()
        u_toy = self.rng.random()
        u_touch = {region: self.rng.random() for region in TOUCH_REGIONS}

        if any(a.startswith(VERB_STRAIGHTEN) for a in prev_actions):
            if self.rng.random() < policy.respond_to_call:
                start = t + round(policy.respond_latency_s * self.tick_hz)
                self.response_start = start
                self.response_end = start + round(
                    self.profile.respond_hold_s * self.tick_hz
                )
                self.suppress_until = None
            else:
                # Absorbed elsewhere: no stimuli until the call has expired.
                self.suppress_until = t + self.response_window_ticks
                self.response_start = self.response_end = None

        if self.response_start is not None and self.response_start <= t < self.response_end:
            return RawEvents(
                face_present=True,
                aus=SMILE_AUS,
                touches=[TouchReading("torso", TOUCH_TAXELS, TOUCH_PRESSURE)],
            )
        if self.response_end is not None and t >= self.response_end:
            self.response_start = self.response_end = None

        if self.suppress_until is not None:
            if t < self.suppress_until:
                return RawEvents()
            self.suppress_until = None

        events = RawEvents()
        if u_face < policy.face_presence_prob:
            events.face_present = True
            events.aus = SMILE_AUS if u_smile < policy.smile_prob else NEUTRAL_AUS
        if u_toy < policy.toy_show_prob:
            events.toy_colors.add(self.rng.choice(self.palette))
        for region in TOUCH_REGIONS:
            if u_touch[region] < policy.touch_prob.get(region, 0.0):
                events.touches.append(
                    TouchReading(region, TOUCH_TAXELS, TOUCH_PRESSURE)
                )
        return events
