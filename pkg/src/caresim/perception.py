"""Symbolic perception: expression rules, touch filtering, stimulus fusion.

No pixels or real sensors here. Upstream (scripted agents or the live
gateway) delivers facial action-unit flags, per-region touch readings and toy
color sightings; this module validates them and fuses them into the per-tick
stimulus pair (F, T) consumed by the comfort dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .params import FusionWeights

SMILING = "smiling"
CONTEMPLATING = "contemplating"
FROWNING = "frowning"
NEUTRAL = "neutral"

EXPRESSIONS = (SMILING, CONTEMPLATING, FROWNING, NEUTRAL)

TOUCH_REGIONS = ("torso", "left_arm", "right_arm")

MIN_TAXELS = 5
MIN_PRESSURE = 12.0

DEFAULT_TOY_PALETTE = frozenset({"red", "green", "blue", "yellow"})


@dataclass(frozen=True)
class AUSet:
    """Action-unit flags extracted for one detected face.

    au6 (cheek raiser) and au12 (lip corner puller) are the positive group;
    au4 (brow lowerer), au9 (nose wrinkler) and au10 (upper lip raiser) the
    negative group.
    """

    au6_cheek_raiser: bool = False
    au12_lip_corner: bool = False
    au4_brow_lowerer: bool = False
    au9_nose_wrinkler: bool = False
    au10_upper_lip_raiser: bool = False

    @classmethod
    def from_codes(cls, codes) -> "AUSet":
        known = {"au6", "au12", "au4", "au9", "au10"}
        codes = set(codes)
        unknown = codes - known
        if unknown:
            raise ValueError(f"unknown action units: {sorted(unknown)}")
        return cls(
            au6_cheek_raiser="au6" in codes,
            au12_lip_corner="au12" in codes,
            au4_brow_lowerer="au4" in codes,
            au9_nose_wrinkler="au9" in codes,
            au10_upper_lip_raiser="au10" in codes,
        )


@dataclass(frozen=True)
class TouchReading:
    """One skin patch sample; regions are processed independently."""

    region: str
    taxel_count: int
    avg_pressure: float

    def __post_init__(self) -> None:
        if self.region not in TOUCH_REGIONS:
            raise ValueError(f"unknown touch region {self.region!r}")
        if self.taxel_count < 0 or self.avg_pressure < 0:
            raise ValueError("taxel_count and avg_pressure must be nonnegative")


@dataclass(frozen=True)
class StimulusFrame:
    """Fused per-tick input to the comfort dynamics."""

    tick: int
    f: float
    t: float
    face_present: bool
    expression: str
    toys_visible: frozenset[str] = frozenset()
    touched_regions: frozenset[str] = frozenset()
    streak_ticks: int = 0

    @property
    def any_stimulus(self) -> bool:
        return self.f > 0.0 or self.t > 0.0


def classify_expression(aus: AUSet) -> str:
    """Map an action-unit set to one of the four expression labels.

    A genuine smile needs both the lip corner pull and the cheek raise; a lip
    corner pull alone is a fake smile and stays neutral. The full negative
    triple is a frown; the brow lowerer alone (no other negative units) is
    contemplation. Partial negative combinations are neutral.
    """
    smiling = aus.au12_lip_corner and aus.au6_cheek_raiser
    if smiling:
        return SMILING
    if aus.au4_brow_lowerer and aus.au9_nose_wrinkler and aus.au10_upper_lip_raiser:
        return FROWNING
    if (
        aus.au4_brow_lowerer
        and not aus.au9_nose_wrinkler
        and not aus.au10_upper_lip_raiser
    ):
        return CONTEMPLATING
    return NEUTRAL


def filter_touch(reading: TouchReading) -> bool:
    """True only for contact larger than 5 taxels at average pressure above
    12.0 — both strict, rejecting the phantom signals of overheated sensors."""
    return reading.taxel_count > MIN_TAXELS and reading.avg_pressure > MIN_PRESSURE


def toy_event(color_label: str, palette: frozenset[str] | set[str]) -> bool:
    """Accept a toy sighting only for configured colors."""
    return color_label in palette


def steadiness(streak_ticks: int, weights: FusionWeights, tick_hz: int) -> float:
    """Bonus factor for uninterrupted stimulation (applied before the cap)."""
    if streak_ticks >= weights.steady_after_s * tick_hz:
        return weights.steady_bonus
    return 1.0


def fuse_stimuli(
    tick: int,
    face_present: bool,
    expression: str,
    toys_visible: frozenset[str] | set[str],
    touched_regions: frozenset[str] | set[str],
    streak_ticks: int,
    weights: FusionWeights,
    tick_hz: int,
) -> StimulusFrame:
    """Fuse one tick's validated perception into a stimulus frame.

    F sums the face, smile and toy contributions; T is the fraction of
    touched skin regions. Both get the steadiness bonus and are capped at 1.
    ``streak_ticks`` counts consecutive stimulus ticks including this one.
    """
    if expression not in EXPRESSIONS:
        raise ValueError(f"unknown expression {expression!r}")
    bad_regions = set(touched_regions) - set(TOUCH_REGIONS)
    if bad_regions:
        raise ValueError(f"unknown touch regions: {sorted(bad_regions)}")
    bonus = steadiness(streak_ticks, weights, tick_hz)
    visual = 0.0
    if face_present:
        visual += weights.w_face
        if expression == SMILING:
            visual += weights.w_smile
    if toys_visible:
        visual += weights.w_toy
    # Quantized to the log file's decimal grid so recorded stimuli replay
    # bit-exactly through the comfort recurrence.
    f = round(min(1.0, visual * bonus), 6)
    t = round(min(1.0, (len(touched_regions) / len(TOUCH_REGIONS)) * bonus), 6)
    return StimulusFrame(
        tick=tick,
        f=f,
        t=t,
        face_present=face_present,
        expression=expression if face_present else NEUTRAL,
        toys_visible=frozenset(toys_visible),
        touched_regions=frozenset(touched_regions),
        streak_ticks=streak_ticks,
    )


@dataclass
class RawEvents:
    """Unfused perception events for one tick, as delivered by an agent or
    folded from wire messages. ``aus`` is None when no face is visible."""

    face_present: bool = False
    aus: AUSet | None = None
    toy_colors: set[str] = field(default_factory=set)
    touches: list[TouchReading] = field(default_factory=list)

    def expression(self) -> str:
        if not self.face_present or self.aus is None:
            return NEUTRAL
        return classify_expression(self.aus)
