"""Tunable constants of the social architecture and their config-file round trip.

All knobs live in two frozen dataclasses: ``SocialParams`` (comfort dynamics,
thresholds, timing) and ``FusionWeights`` (stimulus fusion). Defaults reproduce
the reference calibration: decay 0.998/tick, growth constant 500, 10 Hz loop,
and thresholds placed so that 90 s of zero stimulation reaches the critical
bound and 90 s of full multimodal stimulation reaches saturation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

DEFAULT_BETA = 0.998
DEFAULT_TAU = 500.0
# Shrinking the decay gap (1 - beta) by 5^-1/2 per adaptation quintuples the
# zero-stimulus time-to-critical after two adaptations (90 s -> 450 s).
DEFAULT_BETA_GAP_SHRINK = 5.0 ** -0.5
DEFAULT_CALIBRATION_S = 90.0


def calibrate_thresholds(
    t_critical_s: float,
    t_saturation_s: float,
    *,
    beta0: float = DEFAULT_BETA,
    tau0: float = DEFAULT_TAU,
    tick_hz: int = 10,
    c_max: float = 20.0,
) -> tuple[float, float]:
    """Solve for the comfort thresholds hit after the given target times.

    The critical bound is where zero-stimulus decay from the initial comfort
    lands after ``t_critical_s``; the saturation bound is where full
    multimodal growth (F = T = 1, fixed point ``c_max``) lands after
    ``t_saturation_s``. Both come from the closed forms of the two
    recurrences:

        decay:  c[n] = c_init * beta0**n
        growth: c[n] = c_max - (c_max - c_init) * (tau0 / (tau0 + 0.1))**n
    """
    if t_critical_s <= 0 or t_saturation_s <= 0:
        raise ValueError("calibration targets must be positive")
    c_init = 0.5 * c_max
    c_critical = c_init * beta0 ** (t_critical_s * tick_hz)
    growth_ratio = tau0 / (tau0 + 0.1)
    c_saturation = c_max - (c_max - c_init) * growth_ratio ** (t_saturation_s * tick_hz)
    if not (0.0 < c_critical < c_init < c_saturation < c_max):
        raise ValueError(
            f"targets ({t_critical_s}s, {t_saturation_s}s) put thresholds "
            f"({c_critical:.6g}, {c_saturation:.6g}) outside (0, {c_max})"
        )
    return c_critical, c_saturation


@dataclass(frozen=True)
class SocialParams:
    """Every tunable constant of the comfort architecture.

    ``c_critical``/``c_saturation`` default to the 90 s calibration when left
    as None. ``beta_adapt_mode`` selects how a critical adaptation changes the
    decay rate: ``gap_shrink`` multiplies (1 - beta) by ``beta_gap_shrink``;
    ``additive`` adds ``beta_additive_step`` (clamped below 1) and exists for
    fidelity experiments only.
    """

    beta0: float = DEFAULT_BETA
    tau0: float = DEFAULT_TAU
    tau_step: float = 500.0
    beta_gap_shrink: float = DEFAULT_BETA_GAP_SHRINK
    c_max: float = 20.0
    c_init: float = 10.0
    c_critical: float | None = None
    c_saturation: float | None = None
    optimal_band: float = 1.0
    tick_hz: int = 10
    suspension_s: float = 20.0
    response_window_s: float = 10.0
    idle_hold_s: float = 2.0
    beta_adapt_mode: str = "gap_shrink"
    beta_additive_step: float = 0.005
    beta_additive_cap: float = 0.9999

    def __post_init__(self) -> None:
        if self.c_critical is None or self.c_saturation is None:
            c_crit, c_sat = calibrate_thresholds(
                DEFAULT_CALIBRATION_S,
                DEFAULT_CALIBRATION_S,
                beta0=self.beta0,
                tau0=self.tau0,
                tick_hz=self.tick_hz,
                c_max=self.c_max,
            )
            if self.c_critical is None:
                object.__setattr__(self, "c_critical", c_crit)
            if self.c_saturation is None:
                object.__setattr__(self, "c_saturation", c_sat)
        self.validate()

    def validate(self) -> None:
        if not (0.0 < self.beta0 < 1.0):
            raise ValueError(f"beta0 must lie in (0, 1), got {self.beta0}")
        if self.tau0 <= 0 or self.tau_step <= 0:
            raise ValueError("tau0 and tau_step must be positive")
        if not (0.0 < self.beta_gap_shrink < 1.0):
            raise ValueError(f"beta_gap_shrink must lie in (0, 1), got {self.beta_gap_shrink}")
        if not (0.0 < self.c_critical < self.c_init < self.c_saturation <= self.c_max):
            raise ValueError(
                "thresholds must satisfy 0 < c_critical < c_init < c_saturation <= c_max, got "
                f"{self.c_critical}, {self.c_init}, {self.c_saturation}, {self.c_max}"
            )
        if not math.isclose(self.c_init, 0.5 * self.c_max, rel_tol=1e-9):
            raise ValueError("c_init must equal half of c_max")
        if self.tick_hz <= 0:
            raise ValueError("tick_hz must be a positive integer")
        for name in ("suspension_s", "response_window_s", "idle_hold_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.beta_adapt_mode not in ("gap_shrink", "additive"):
            raise ValueError(f"unknown beta_adapt_mode {self.beta_adapt_mode!r}")

    # Derived tick counts used all over the session loop.
    @property
    def suspension_ticks(self) -> int:
        return round(self.suspension_s * self.tick_hz)

    @property
    def response_window_ticks(self) -> int:
        return round(self.response_window_s * self.tick_hz)

    @property
    def idle_hold_ticks(self) -> int:
        return round(self.idle_hold_s * self.tick_hz)


@dataclass(frozen=True)
class FusionWeights:
    """Weights for fusing symbolic perception into the (F, T) stimulus pair.

    A plain face is deliberately sub-saturating (fixed point at optimal
    comfort); only multimodal, steady interaction can reach saturation.
    The steadiness bonus rewards uninterrupted stimulation longer than
    ``steady_after_s``.
    """

    w_face: float = 0.5
    w_smile: float = 0.3
    w_toy: float = 0.2
    steady_bonus: float = 1.25
    steady_after_s: float = 3.0

    def __post_init__(self) -> None:
        for name in ("w_face", "w_smile", "w_toy"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.steady_bonus < 1.0:
            raise ValueError("steady_bonus must be >= 1")
        if self.steady_after_s < 0:
            raise ValueError("steady_after_s must be nonnegative")


_INT_FIELDS = {"tick_hz"}
_STR_FIELDS = {"beta_adapt_mode"}


def _coerce(name: str, raw: str):
    if name in _STR_FIELDS:
        return raw
    if name in _INT_FIELDS:
        return int(raw)
    return float(raw)


def params_to_dict(params: SocialParams, weights: FusionWeights) -> dict:
    out = {f.name: getattr(params, f.name) for f in fields(params)}
    out.update({f.name: getattr(weights, f.name) for f in fields(weights)})
    return out


def params_from_dict(data: dict) -> tuple[SocialParams, FusionWeights]:
    param_names = {f.name for f in fields(SocialParams)}
    weight_names = {f.name for f in fields(FusionWeights)}
    unknown = set(data) - param_names - weight_names
    if unknown:
        raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
    params = SocialParams(**{k: v for k, v in data.items() if k in param_names})
    weights = FusionWeights(**{k: v for k, v in data.items() if k in weight_names})
    return params, weights


def save_params(path: str | Path, params: SocialParams, weights: FusionWeights) -> None:
    """Write all constants as flat ``key = value`` lines."""
    lines = [f"{k} = {v}" for k, v in params_to_dict(params, weights).items()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_params(path: str | Path) -> tuple[SocialParams, FusionWeights]:
    """Read a flat key-value file written by :func:`save_params`.

    Blank lines and ``#`` comments are allowed; unknown keys are an error.
    """
    data: dict = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        try:
            data[key] = _coerce(key, raw.strip())
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return params_from_dict(data)


def apply_overrides(
    params: SocialParams, weights: FusionWeights, overrides: dict[str, str]
) -> tuple[SocialParams, FusionWeights]:
    """Apply ``key=value`` string overrides (CLI flags) on top of loaded params."""
    param_names = {f.name for f in fields(SocialParams)}
    weight_names = {f.name for f in fields(FusionWeights)}
    p_over: dict = {}
    w_over: dict = {}
    for key, raw in overrides.items():
        if key in param_names:
            p_over[key] = _coerce(key, raw)
        elif key in weight_names:
            w_over[key] = _coerce(key, raw)
        else:
            raise ValueError(f"unknown parameter {key!r}")
    # Changing the dynamics invalidates previously resolved thresholds, so
    # recalibrate them unless the override pins them explicitly.
    if p_over.keys() & {"beta0", "tau0", "tick_hz", "c_max", "c_init"}:
        p_over.setdefault("c_critical", None)
        p_over.setdefault("c_saturation", None)
    if p_over:
        params = replace(params, **p_over)
    if w_over:
        weights = replace(weights, **w_over)
    return params, weights
