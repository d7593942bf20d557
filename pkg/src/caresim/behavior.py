"""Behavior state machine: idle/interact, engagement calls, suspensions.

Major states are idle, interact and the two suspensions; engage_call (the
robot soliciting attention after a critical hit) and disengage (the lean-away
after saturation) are short-lived transitional states excluded from the
three-state metrics. All transitions are pure functions of
(state, stimulus frame, threshold event, tick), so replaying a log reproduces
the identical state sequence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .comfort import (
    COMFORT_FLOOR,
    CRITICAL,
    SATURATION,
    ComfortState,
    ThresholdEvent,
    adapt_critical,
    adapt_saturation,
)
from .params import SocialParams
from .perception import DEFAULT_TOY_PALETTE, StimulusFrame

IDLE = "idle"
INTERACT = "interact"
ENGAGE_CALL = "engage_call"
SUSPEND_CRITICAL = "suspend_critical"
SUSPEND_SATURATION = "suspend_saturation"
DISENGAGE = "disengage"

STATE_LABELS = (
    IDLE,
    INTERACT,
    ENGAGE_CALL,
    SUSPEND_CRITICAL,
    SUSPEND_SATURATION,
    DISENGAGE,
)
SUSPEND_STATES = (SUSPEND_CRITICAL, SUSPEND_SATURATION)
TRANSITIONAL_STATES = (ENGAGE_CALL, DISENGAGE)

ADAPTIVE = "adaptive"
FIXED = "fixed"

# The lean-away posture lasts one second before the saturation suspension
# proper begins (transitional states stay well under the 3 s cap).
DISENGAGE_HOLD_S = 1.0

# Face-only interaction this long prompts a gaze cue toward the toys,
# repeated at the same interval while the situation persists.
GAZE_CUE_AFTER_S = 10.0

VERB_STRAIGHTEN = "straighten_up"
VERB_LEAN_DOWN = "lean_down"
VERB_LOOK = "look"
VERB_BOX_TOWARD = "move_box_toward"
VERB_BOX_AWAY = "move_box_away"
VERB_VOCALIZE = "vocalize"

UTTER_ENCOURAGING = "encouraging"
UTTER_PROTESTING = "protesting"


@dataclass(frozen=True)
class RobotState:
    """Current state label plus its entry tick and optional expiry.

    ``ramp_from`` records the comfort value at a critical suspension's entry
    so the recovery ramp is a pure function of the state.
    """

    label: str
    entered_tick: int
    deadline_tick: int | None = None
    ramp_from: float | None = None

    @classmethod
    def initial(cls) -> "RobotState":
        return cls(label=IDLE, entered_tick=0)


@dataclass(frozen=True)
class ActionCommand:
    verb: str
    argument: str | None = None

    def __post_init__(self) -> None:
        if self.verb == VERB_LOOK and not self.argument:
            raise ValueError("look requires a gaze target")
        if self.verb == VERB_VOCALIZE and not self.argument:
            raise ValueError("vocalize requires an utterance label")

    def encode(self) -> str:
        return self.verb if self.argument is None else f"{self.verb}:{self.argument}"

    @classmethod
    def decode(cls, text: str) -> "ActionCommand":
        verb, _, arg = text.partition(":")
        return cls(verb, arg or None)


def look(target: str) -> ActionCommand:
    return ActionCommand(VERB_LOOK, target)


def utterance_labels(palette) -> tuple[str, ...]:
    return tuple(sorted(palette)) + (UTTER_ENCOURAGING, UTTER_PROTESTING)


def session_mode_guard(
    mode: str, event: ThresholdEvent, comfort: ComfortState, params: SocialParams
) -> ComfortState:
    """Dispatch the adaptation for a fresh threshold event, or freeze.

    Behavioral response (engage call, suspension) is identical in both modes;
    only the parameter change is gated.
    """
    if mode == FIXED:
        return comfort
    if mode != ADAPTIVE:
        raise ValueError(f"unknown session mode {mode!r}")
    if event.kind == CRITICAL:
        return adapt_critical(comfort, params)
    return adapt_saturation(comfort, params)


def suspension_tick(
    state: RobotState, comfort: ComfortState, params: SocialParams
) -> ComfortState:
    """Advance comfort one tick inside a suspension, ignoring stimuli.

    Critical suspension ramps linearly back to the optimal level, landing on
    it exactly at the deadline; saturation suspension lets comfort decay
    naturally toward the optimal zone.
    """
    tick = comfort.tick + 1
    if state.label == SUSPEND_CRITICAL:
        span = state.deadline_tick - state.entered_tick
        k = tick - state.entered_tick
        if k >= span:
            c = params.c_init
        else:
            c = state.ramp_from + (params.c_init - state.ramp_from) * k / span
    else:
        c = comfort.beta * comfort.c
    c = min(max(c, COMFORT_FLOOR), params.c_max)
    return ComfortState(
        c=c,
        beta=comfort.beta,
        tau=comfort.tau,
        n_critical=comfort.n_critical,
        n_saturation=comfort.n_saturation,
        tick=tick,
    )


@dataclass
class TickResult:
    state: RobotState
    actions: list[ActionCommand] = field(default_factory=list)
    resolution: str | None = None  # "responded" | "ignored" for this tick


class BehaviorMachine:
    """Owns the robot state, the open engagement call and the gaze policy."""

    def __init__(
        self,
        params: SocialParams,
        rng: random.Random,
        palette=DEFAULT_TOY_PALETTE,
    ) -> None:
        self.params = params
        self.rng = rng
        self.palette = tuple(sorted(palette))
        self.state = RobotState.initial()
        self.pending_call: ThresholdEvent | None = None
        self.last_stimulus_tick: int | None = None
        self.last_gaze: str | None = None
        self.face_only_ticks = 0

    # -- queries used by the session loop ---------------------------------
    @property
    def stimuli_gated(self) -> bool:
        """True while external stimuli must not reach the comfort update."""
        return self.state.label in (SUSPEND_CRITICAL, SUSPEND_SATURATION, DISENGAGE)

    @property
    def threshold_ineligible(self) -> bool:
        """True while threshold events are suppressed (suspended or calling)."""
        return self.stimuli_gated or self.state.label == ENGAGE_CALL

    # -- transitions -------------------------------------------------------
    def step(
        self,
        frame: StimulusFrame,
        event: ThresholdEvent | None,
        comfort: ComfortState,
    ) -> TickResult:
        tick = frame.tick
        if frame.any_stimulus:
            self.last_stimulus_tick = tick
        if event is not None and self.threshold_ineligible:
            raise RuntimeError(
                f"threshold event delivered in state {self.state.label} at tick {tick}"
            )

        label = self.state.label
        if label == ENGAGE_CALL:
            return self._step_engage_call(frame, comfort, tick)
        if label in SUSPEND_STATES:
            return self._step_suspended(tick)
        if label == DISENGAGE:
            return self._step_disengage(tick)
        return self._step_active(frame, event, comfort, tick)

    def _enter(self, label: str, tick: int, deadline: int | None = None,
               ramp_from: float | None = None) -> None:
        self.state = RobotState(label, tick, deadline, ramp_from)
        if label != INTERACT:
            self.face_only_ticks = 0

    def _step_engage_call(
        self, frame: StimulusFrame, comfort: ComfortState, tick: int
    ) -> TickResult:
        if frame.any_stimulus:
            self.pending_call.responded = True
            self.pending_call = None
            self._enter(INTERACT, tick)
            return TickResult(self.state, self._attend(frame), resolution="responded")
        if tick >= self.state.deadline_tick:
            self.pending_call.responded = False
            self.pending_call = None
            self._enter(
                SUSPEND_CRITICAL,
                tick,
                deadline=tick + self.params.suspension_ticks,
                ramp_from=comfort.c,
            )
            return TickResult(self.state, [], resolution="ignored")
        return TickResult(self.state, [])

    def _step_suspended(self, tick: int) -> TickResult:
        if tick >= self.state.deadline_tick:
            self._enter(IDLE, tick)
        return TickResult(self.state, [])

    def _step_disengage(self, tick: int) -> TickResult:
        if tick >= self.state.deadline_tick:
            self._enter(
                SUSPEND_SATURATION, tick, deadline=tick + self.params.suspension_ticks
            )
        return TickResult(self.state, [])

    def _step_active(
        self,
        frame: StimulusFrame,
        event: ThresholdEvent | None,
        comfort: ComfortState,
        tick: int,
    ) -> TickResult:
        if event is not None and event.kind == CRITICAL:
            self.pending_call = event
            self._enter(
                ENGAGE_CALL, tick, deadline=tick + self.params.response_window_ticks
            )
            self.last_gaze = "face"
            actions = [
                ActionCommand(VERB_STRAIGHTEN),
                look("face"),
                ActionCommand(VERB_VOCALIZE, UTTER_ENCOURAGING),
            ]
            return TickResult(self.state, actions)
        if event is not None and event.kind == SATURATION:
            hold = round(DISENGAGE_HOLD_S * self.params.tick_hz)
            self._enter(DISENGAGE, tick, deadline=tick + hold)
            toy = self.rng.choice(self.palette)
            self.last_gaze = f"toy:{toy}"
            actions = [
                ActionCommand(VERB_LEAN_DOWN),
                look(f"toy:{toy}"),
                ActionCommand(VERB_BOX_AWAY),
            ]
            return TickResult(self.state, actions)

        if self.state.label == IDLE:
            if frame.any_stimulus:
                self._enter(INTERACT, tick)
                return TickResult(self.state, self._attend(frame))
            return TickResult(self.state, [])

        # interact
        if not frame.any_stimulus and self.last_stimulus_tick is not None:
            if tick - self.last_stimulus_tick >= self.params.idle_hold_ticks:
                self._enter(IDLE, tick)
                self.last_gaze = None
                return TickResult(self.state, [])
        return TickResult(self.state, self._attend(frame))

    # -- attention ----------------------------------------------------------
    def _attend(self, frame: StimulusFrame) -> list[ActionCommand]:
        """Gaze policy while interacting: track a toy when one is shown,
        otherwise the face; after sustained face-only interaction, cue the
        toys periodically (gaze shift plus a vocalization or box offer)."""
        actions: list[ActionCommand] = []
        if frame.toys_visible:
            target = f"toy:{min(frame.toys_visible)}"
        elif frame.face_present:
            target = "face"
        else:
            target = self.last_gaze
        if target is not None and target != self.last_gaze:
            actions.append(look(target))
            self.last_gaze = target

        if frame.face_present and not frame.toys_visible:
            self.face_only_ticks += 1
            cue_every = round(GAZE_CUE_AFTER_S * self.params.tick_hz)
            if cue_every > 0 and self.face_only_ticks % cue_every == 0:
                toy = self.rng.choice(self.palette)
                actions.extend([look(f"toy:{toy}"), look("face")])
                if self.rng.random() < 0.5:
                    actions.append(ActionCommand(VERB_VOCALIZE, toy))
                else:
                    actions.append(ActionCommand(VERB_BOX_TOWARD))
                self.last_gaze = "face"
        else:
            self.face_only_ticks = 0
        return actions

    # -- bookkeeping hooks --------------------------------------------------
    def force_resolve(self) -> str | None:
        """Resolve a still-open call at session end (counts as ignored)."""
        if self.pending_call is not None:
            self.pending_call.responded = False
            self.pending_call = None
            return "ignored"
        return None
