"""caresim: a comfort-driven, socially adaptive caretaker-robot simulator.

The robot's scalar comfort grows under face/toy/touch stimulation and decays
alone; crossing the calibrated critical or saturation bound triggers
engagement calls, suspensions and (in adaptive mode) rate adaptation. The
package ships scripted caretaker profiles, a two-session experiment harness
with metrics and figures, a pollinator-puzzle dual task, and a live
WebSocket gateway for human caretakers.
"""

from .comfort import (
    ComfortState,
    ThresholdDetector,
    ThresholdEvent,
    adapt_critical,
    adapt_saturation,
    check_thresholds,
    step_comfort,
    time_to_threshold,
)
from .params import FusionWeights, SocialParams, calibrate_thresholds
from .perception import (
    AUSet,
    RawEvents,
    StimulusFrame,
    TouchReading,
    classify_expression,
    filter_touch,
    fuse_stimuli,
    toy_event,
)
from .session import (
    ExperimentConfig,
    SessionConfig,
    SessionEngine,
    replay,
    run_experiment,
    run_session,
    verify_replay,
)

__version__ = "0.1.0"

__all__ = [
    "AUSet",
    "ComfortState",
    "ExperimentConfig",
    "FusionWeights",
    "RawEvents",
    "SessionConfig",
    "SessionEngine",
    "SocialParams",
    "StimulusFrame",
    "ThresholdDetector",
    "ThresholdEvent",
    "TouchReading",
    "adapt_critical",
    "adapt_saturation",
    "calibrate_thresholds",
    "check_thresholds",
    "classify_expression",
    "filter_touch",
    "fuse_stimuli",
    "replay",
    "run_experiment",
    "run_session",
    "step_comfort",
    "time_to_threshold",
    "toy_event",
    "verify_replay",
]
