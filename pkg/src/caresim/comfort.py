"""Comfort dynamics: the leaky growth/decay recurrence, thresholds, adaptation.

The scalar comfort value grows toward ``10 * (F + T)`` while stimuli are
present and decays multiplicatively when they are not:

    stimulated:   c' = (F + T + c * tau) / (tau + 0.1)
    unstimulated: c' = beta * c

Crossing the critical bound (too little interaction) or the saturation bound
(too much) emits a threshold event; in adaptive mode each event also nudges
the matching rate (beta for critical, tau for saturation) so the robot
tolerates that caretaker's style for longer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .params import SocialParams, calibrate_thresholds

__all__ = [
    "ComfortState",
    "ThresholdEvent",
    "ThresholdDetector",
    "step_comfort",
    "check_thresholds",
    "adapt_critical",
    "adapt_saturation",
    "time_to_threshold",
    "calibrate_thresholds",
    "COMFORT_FLOOR",
]

# Keeps decay from ever producing an exact zero, which would freeze the
# multiplicative recurrence.
COMFORT_FLOOR = 1e-9

# The decay gap (1 - beta) cannot shrink below this, or beta would round to
# exactly 1.0 in float64 after ~30 adaptations and decay would stop entirely.
BETA_GAP_FLOOR = 1e-12

CRITICAL = "critical"
SATURATION = "saturation"


@dataclass(frozen=True)
class ComfortState:
    """Evolving internal state: comfort plus the current adaptation point."""

    c: float
    beta: float
    tau: float
    n_critical: int = 0
    n_saturation: int = 0
    tick: int = -1

    @classmethod
    def initial(cls, params: SocialParams) -> "ComfortState":
        return cls(c=params.c_init, beta=params.beta0, tau=params.tau0)


@dataclass
class ThresholdEvent:
    """A single threshold crossing; ``responded`` is filled for critical
    events once the engagement window closes."""

    kind: str
    tick: int
    comfort: float
    responded: bool | None = None


def _validate_stimulus(name: str, value: float) -> None:
    if not isinstance(value, (int, float)) or math.isnan(value):
        raise ValueError(f"{name} must be a number, got {value!r}")
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def step_comfort(
    state: ComfortState, f: float, t: float, params: SocialParams
) -> ComfortState:
    """Advance comfort one tick under visual stimulus ``f`` and tactile ``t``."""
    _validate_stimulus("F", f)
    _validate_stimulus("T", t)
    if f > 0.0 or t > 0.0:
        c = (f + t + state.c * state.tau) / (state.tau + 0.1)
    else:
        c = state.beta * state.c
    c = min(max(c, COMFORT_FLOOR), params.c_max)
    return replace(state, c=c, tick=state.tick + 1)


def check_thresholds(
    state: ComfortState, params: SocialParams, suspended: bool
) -> ThresholdEvent | None:
    """Level check against both bounds (inclusive; ties trigger).

    ``suspended`` covers every ineligible situation: an active suspension or
    an open engagement window. Crossing-edge semantics (one call per
    crossing) are layered on top by :class:`ThresholdDetector`.
    """
    if suspended:
        return None
    if state.c <= params.c_critical:
        return ThresholdEvent(CRITICAL, state.tick, state.c)
    if state.c >= params.c_saturation:
        return ThresholdEvent(SATURATION, state.tick, state.c)
    return None


class ThresholdDetector:
    """Edge-triggered wrapper over :func:`check_thresholds`.

    Each bound fires at most once per crossing: after a trigger the bound is
    disarmed until comfort recovers to the other side. A crossing that occurs
    while ineligible (suspended / window open) is swallowed, not deferred.
    """

    def __init__(self) -> None:
        self.armed_critical = True
        self.armed_saturation = True

    def observe(
        self, state: ComfortState, params: SocialParams, suspended: bool
    ) -> ThresholdEvent | None:
        below = state.c <= params.c_critical
        above = state.c >= params.c_saturation
        event = None
        if below and self.armed_critical and not suspended:
            event = ThresholdEvent(CRITICAL, state.tick, state.c)
        elif above and self.armed_saturation and not suspended:
            event = ThresholdEvent(SATURATION, state.tick, state.c)
        self.armed_critical = not below
        self.armed_saturation = not above
        return event


def adapt_critical(state: ComfortState, params: SocialParams) -> ComfortState:
    """Slow the decay after a critical hit.

    Default mode shrinks the gap to 1 multiplicatively, so beta < 1 holds for
    any number of adaptations. The additive mode applies the raw step and
    clamps, which distorts long-run timing; it exists for comparison runs.
    """
    if params.beta_adapt_mode == "additive":
        beta = min(state.beta + params.beta_additive_step, params.beta_additive_cap)
    else:
        gap = max((1.0 - state.beta) * params.beta_gap_shrink, BETA_GAP_FLOOR)
        beta = 1.0 - gap
    return replace(state, beta=beta, n_critical=state.n_critical + 1)


def adapt_saturation(state: ComfortState, params: SocialParams) -> ComfortState:
    """Slow the growth after a saturation hit (tau grows additively)."""
    return replace(
        state, tau=state.tau + params.tau_step, n_saturation=state.n_saturation + 1
    )


def _ticks_to_cross(c0: float, fixed_point: float, ratio: float, target: float) -> float:
    """Smallest n with ``fixed_point + (c0 - fixed_point) * ratio**n`` past
    ``target``, where "past" means on the fixed point's side of the target.

    Returns inf when the trajectory never crosses. ``ratio`` must lie in
    (0, 1) so the gap contracts monotonically.
    """
    gap0 = c0 - fixed_point
    gap_target = target - fixed_point
    if gap0 == 0.0:
        return 0.0 if gap_target == 0.0 else math.inf
    q = gap_target / gap0
    if q >= 1.0:
        return 0.0  # already past the target
    if q <= 0.0:
        return math.inf  # target on the far side of the fixed point
    return max(0.0, math.ceil(math.log(q) / math.log(ratio)))


def time_to_threshold(
    state: ComfortState,
    params: SocialParams,
    kind: str,
    stimulus: float | None = None,
) -> float:
    """Seconds until the given bound is crossed under a constant stimulus.

    ``stimulus`` is the constant total S = F + T; it defaults to 0 for the
    critical bound (robot left alone) and 2 for saturation (full multimodal
    interaction). Returns ``math.inf`` when the trajectory's fixed point
    never reaches the bound. Validated to within one tick of brute-force
    iteration in the test suite.
    """
    if kind == CRITICAL:
        s = 0.0 if stimulus is None else stimulus
        target = params.c_critical
    elif kind == SATURATION:
        s = 2.0 if stimulus is None else stimulus
        target = params.c_saturation
    else:
        raise ValueError(f"unknown threshold kind {kind!r}")
    if not (0.0 <= s <= 2.0):
        raise ValueError(f"stimulus must lie in [0, 2], got {s}")

    if s > 0.0:
        fixed_point = 10.0 * s
        ratio = state.tau / (state.tau + 0.1)
    else:
        fixed_point = 0.0
        ratio = state.beta

    # The bound must lie between the start and the fixed point to be reached
    # (unless the start is already past it, which _ticks_to_cross yields as 0).
    if kind == CRITICAL and fixed_point > target and state.c > target:
        return math.inf
    if kind == SATURATION and min(fixed_point, params.c_max) < target and state.c < target:
        return math.inf
    n = _ticks_to_cross(state.c, fixed_point, ratio, target)
    return n / params.tick_hz if math.isfinite(n) else math.inf
