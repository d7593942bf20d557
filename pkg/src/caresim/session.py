"""Session orchestration: the tick pipeline, scripted runs, replay.

``SessionEngine`` owns one session's full state (comfort, threshold detector,
behavior machine, streak counter) and advances it one tick at a time from raw
perception events. Scripted runs feed it from a caretaker agent; the live
gateway feeds it from folded wire messages; replay feeds it the fused frames
recorded in an existing log and must reproduce that log byte for byte.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .behavior import (
    ADAPTIVE,
    FIXED,
    BehaviorMachine,
    session_mode_guard,
    suspension_tick,
)
from .caretaker import CaretakerProfile, ScriptedCaretaker
from .comfort import ComfortState, ThresholdDetector, ThresholdEvent, step_comfort
from .logio import SessionLog, TickRecord
from .params import FusionWeights, SocialParams, params_from_dict, params_to_dict
from .perception import (
    DEFAULT_TOY_PALETTE,
    NEUTRAL,
    RawEvents,
    StimulusFrame,
    TOUCH_REGIONS,
    filter_touch,
    fuse_stimuli,
    toy_event,
)

# Offset separating the gaze-policy stream from the caretaker stream.
ATTENTION_SEED_OFFSET = 1000003

_REGION_ORDER = {region: i for i, region in enumerate(TOUCH_REGIONS)}


@dataclass(frozen=True)
class SessionConfig:
    mode: str
    seed: int | None = None  # falls back to the caretaker profile's seed
    phase_s: float = 240.0
    n_phases: int = 3
    dual_task_phase: int = 2

    def __post_init__(self) -> None:
        if self.mode not in (ADAPTIVE, FIXED):
            raise ValueError(f"mode must be adaptive or fixed, got {self.mode!r}")
        if self.phase_s <= 0 or self.n_phases <= 0:
            raise ValueError("phase_s and n_phases must be positive")
        if not (1 <= self.dual_task_phase <= self.n_phases):
            raise ValueError("dual_task_phase out of range")

    @property
    def session_label(self) -> str:
        return "A" if self.mode == ADAPTIVE else "F"


@dataclass(frozen=True)
class ExperimentConfig:
    """Two back-to-back sessions (adaptive and fixed) in the given order.

    Architecture parameters are re-initialized at each session start; the
    second session never inherits adapted values from the first.
    """

    order: str
    profile: CaretakerProfile
    seed: int
    phase_s: float = 240.0

    def __post_init__(self) -> None:
        if self.order not in ("AF", "FA"):
            raise ValueError(f"order must be AF or FA, got {self.order!r}")

    def session_configs(self) -> tuple[SessionConfig, SessionConfig]:
        by_letter = {
            "A": SessionConfig(mode=ADAPTIVE, seed=self.seed, phase_s=self.phase_s),
            "F": SessionConfig(mode=FIXED, seed=self.seed, phase_s=self.phase_s),
        }
        return by_letter[self.order[0]], by_letter[self.order[1]]


class SessionEngine:
    """Deterministic tick pipeline for one session."""

    def __init__(
        self,
        params: SocialParams,
        weights: FusionWeights,
        mode: str,
        seed: int,
        phase_s: float = 240.0,
        n_phases: int = 3,
        dual_task_phase: int = 2,
        palette=DEFAULT_TOY_PALETTE,
        profile_info: dict | None = None,
    ) -> None:
        if mode not in (ADAPTIVE, FIXED):
            raise ValueError(f"mode must be adaptive or fixed, got {mode!r}")
        self.params = params
        self.weights = weights
        self.mode = mode
        self.seed = seed
        self.phase_s = phase_s
        self.n_phases = n_phases
        self.dual_task_phase = dual_task_phase
        self.palette = frozenset(palette)
        self.profile_info = profile_info

        self.comfort = ComfortState.initial(params)
        self.detector = ThresholdDetector()
        self.machine = BehaviorMachine(
            params, random.Random(seed + ATTENTION_SEED_OFFSET), self.palette
        )
        self.streak = 0
        self.records: list[TickRecord] = []
        self.events: list[ThresholdEvent] = []
        self.next_tick = 0

    @property
    def session_label(self) -> str:
        return "A" if self.mode == ADAPTIVE else "F"

    @property
    def phase_ticks(self) -> int:
        return round(self.phase_s * self.params.tick_hz)

    @property
    def total_ticks(self) -> int:
        return self.n_phases * self.phase_ticks

    @property
    def done(self) -> bool:
        return self.next_tick >= self.total_ticks

    def phase_of(self, tick: int) -> int:
        return tick // self.phase_ticks + 1

    # -- tick entry points --------------------------------------------------
    def tick_raw(self, raw: RawEvents) -> TickRecord:
        """Validate and fuse one tick's raw events, then advance."""
        t = self.next_tick
        expression = raw.expression()
        touched = sorted(
            {r.region for r in raw.touches if filter_touch(r)},
            key=_REGION_ORDER.__getitem__,
        )
        toys = {c for c in raw.toy_colors if toy_event(c, self.palette)}
        any_valid = raw.face_present or bool(toys) or bool(touched)
        self.streak = self.streak + 1 if any_valid else 0
        frame = fuse_stimuli(
            t,
            raw.face_present,
            expression,
            toys,
            set(touched),
            self.streak,
            self.weights,
            self.params.tick_hz,
        )
        return self.tick_frame(frame)

    def tick_frame(self, frame: StimulusFrame) -> TickRecord:
        """Advance one tick from an already-fused stimulus frame."""
        t = self.next_tick
        if t >= self.total_ticks:
            raise RuntimeError("session already complete")
        if frame.tick != t:
            raise ValueError(f"frame tick {frame.tick} does not match engine tick {t}")

        if self.machine.stimuli_gated:
            comfort = suspension_tick(self.machine.state, self.comfort, self.params)
        else:
            comfort = step_comfort(self.comfort, frame.f, frame.t, self.params)

        event = self.detector.observe(comfort, self.params, self.machine.threshold_ineligible)
        if event is not None:
            comfort = session_mode_guard(self.mode, event, comfort, self.params)
            self.events.append(event)

        result = self.machine.step(frame, event, comfort)
        self.comfort = comfort

        resolution = result.resolution
        if t == self.total_ticks - 1 and resolution is None:
            resolution = self.machine.force_resolve()

        record = TickRecord(
            tick=t,
            t_ms=t * 1000 // self.params.tick_hz,
            session=self.session_label,
            phase=self.phase_of(t),
            state=result.state.label,
            comfort=comfort.c,
            beta=comfort.beta,
            tau=comfort.tau,
            f=frame.f,
            t=frame.t,
            face=frame.expression if frame.face_present else "",
            toys=tuple(sorted(frame.toys_visible)),
            touch=tuple(sorted(frame.touched_regions, key=_REGION_ORDER.__getitem__)),
            event=event.kind if event is not None else "",
            resolved=resolution or "",
            actions=tuple(a.encode() for a in result.actions),
        )
        self.records.append(record)
        self.next_tick += 1
        return record

    # -- results --------------------------------------------------------------
    def header(self) -> dict:
        return {
            "mode": self.mode,
            "session": self.session_label,
            "seed": self.seed,
            "phase_s": self.phase_s,
            "n_phases": self.n_phases,
            "dual_task_phase": self.dual_task_phase,
            "tick_hz": self.params.tick_hz,
            "palette": sorted(self.palette),
            "config": params_to_dict(self.params, self.weights),
            "profile": self.profile_info,
        }

    def to_log(self) -> SessionLog:
        return SessionLog(header=self.header(), records=list(self.records))


def run_session(
    config: SessionConfig,
    profile: CaretakerProfile,
    params: SocialParams | None = None,
    weights: FusionWeights | None = None,
    palette=DEFAULT_TOY_PALETTE,
) -> SessionLog:
    """Drive the full pipeline with a scripted caretaker and return the log."""
    params = params or SocialParams()
    weights = weights or FusionWeights()
    seed = config.seed if config.seed is not None else profile.seed
    engine = SessionEngine(
        params,
        weights,
        config.mode,
        seed,
        phase_s=config.phase_s,
        n_phases=config.n_phases,
        dual_task_phase=config.dual_task_phase,
        palette=palette,
        profile_info=profile.to_dict(),
    )
    agent = ScriptedCaretaker(
        profile,
        random.Random(seed),
        palette,
        params.tick_hz,
        params.response_window_ticks,
    )
    prev_actions: tuple[str, ...] = ()
    for t in range(engine.total_ticks):
        raw = agent.tick(t, engine.phase_of(t), prev_actions)
        record = engine.tick_raw(raw)
        prev_actions = record.actions
    return engine.to_log()


@dataclass
class ExperimentResult:
    order: str
    logs: list[SessionLog] = field(default_factory=list)

    @property
    def first(self) -> SessionLog:
        return self.logs[0]

    @property
    def second(self) -> SessionLog:
        return self.logs[1]

    def by_label(self, label: str) -> SessionLog:
        for log in self.logs:
            if log.header["session"] == label:
                return log
        raise KeyError(label)


def run_experiment(
    config: ExperimentConfig,
    params: SocialParams | None = None,
    weights: FusionWeights | None = None,
    palette=DEFAULT_TOY_PALETTE,
) -> ExperimentResult:
    """Run both sessions in the configured order with a reset in between."""
    result = ExperimentResult(order=config.order)
    for session_config in config.session_configs():
        log = run_session(session_config, config.profile, params, weights, palette)
        result.logs.append(log)
    return result


def rebuild_engine(header: dict) -> SessionEngine:
    params, weights = params_from_dict(header["config"])
    return SessionEngine(
        params,
        weights,
        header["mode"],
        header["seed"],
        phase_s=header["phase_s"],
        n_phases=header["n_phases"],
        dual_task_phase=header.get("dual_task_phase", 2),
        palette=frozenset(header["palette"]),
        profile_info=header.get("profile"),
    )


def frame_from_record(record: TickRecord) -> StimulusFrame:
    return StimulusFrame(
        tick=record.tick,
        f=record.f,
        t=record.t,
        face_present=record.face_present,
        expression=record.face if record.face else NEUTRAL,
        toys_visible=frozenset(record.toys),
        touched_regions=frozenset(record.touch),
        streak_ticks=0,
    )


def replay(log: SessionLog, params: SocialParams | None = None) -> SessionLog:
    """Re-drive the pipeline from a log's recorded perception.

    The embedded header supplies the configuration; passing ``params`` that
    disagree with it is rejected (a replay under different dynamics is not a
    replay). The output must serialize to the same bytes as the input.
    """
    if params is not None:
        logged_params, _ = params_from_dict(log.header["config"])
        if params != logged_params:
            raise ValueError("replay parameters do not match the log's config header")
    log.validate_complete()
    engine = rebuild_engine(log.header)
    for record in log.records:
        engine.tick_frame(frame_from_record(record))
    return engine.to_log()


def verify_replay(log: SessionLog) -> tuple[bool, int | None]:
    """Replay and byte-compare; returns (identical, first divergent tick)."""
    replayed = replay(log)
    for original, rebuilt in zip(log.records, replayed.records):
        if original.encode() != rebuilt.encode():
            return False, original.tick
    if log.header != replayed.header or len(log.records) != len(replayed.records):
        return False, None
    return True, None
