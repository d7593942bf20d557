"""Caretaker policies, scripted sessions and the two-session experiment."""

import math
import random

import pytest

from caresim.caretaker import (
    BUNDLED_PROFILES,
    CaretakerProfile,
    PhasePolicy,
    ScriptedCaretaker,
)
from caresim.metrics import compute_metrics
from caresim.params import SocialParams
from caresim.perception import DEFAULT_TOY_PALETTE
from caresim.session import (
    ExperimentConfig,
    SessionConfig,
    run_experiment,
    run_session,
)

PARAMS = SocialParams()
SILENT = BUNDLED_PROFILES["silent"]
DISTRACTED = BUNDLED_PROFILES["distracted"]


def sample_policy_frequencies(profile, phase, ticks=3000, seed=11):
    """Empirical stimulus rates with no robot feedback (no calls)."""
    agent = ScriptedCaretaker(
        profile, random.Random(seed), DEFAULT_TOY_PALETTE, 10, 100
    )
    face = touch = 0
    for t in range(ticks):
        raw = agent.tick(t, phase, ())
        face += raw.face_present
        touch += bool(raw.touches)
    return face / ticks, touch / ticks


def binomial_ci_halfwidth(p, n, z=3.5):
    return z * math.sqrt(max(p * (1 - p), 1e-9) / n)


class TestPolicies:
    def test_attentive_rates_match_configuration(self):
        profile = BUNDLED_PROFILES["attentive"]
        policy = profile.policy(1)
        face, touch = sample_policy_frequencies(profile, 1)
        assert abs(face - policy.face_presence_prob) < binomial_ci_halfwidth(
            policy.face_presence_prob, 3000
        )
        expected_touch = 1 - (1 - 0.15) ** 3
        assert abs(touch - expected_touch) < binomial_ci_halfwidth(expected_touch, 3000)

    def test_distracted_dual_task_face_drop_touch_retention(self):
        face_1, touch_1 = sample_policy_frequencies(DISTRACTED, 1)
        face_2, touch_2 = sample_policy_frequencies(DISTRACTED, 2)
        assert face_2 < 0.2 * face_1
        assert abs(touch_2 - touch_1) <= 0.2 * touch_1

    def test_never_responding_profile_gets_only_ignored_calls(self):
        profile = CaretakerProfile(
            name="oblivious",
            phases=(
                PhasePolicy.make(face=0.05, touch=0.02, respond=0.0),
            ) * 3,
        )
        metrics = compute_metrics(
            run_session(SessionConfig(mode="fixed", seed=4), profile)
        )
        assert metrics.hits_critical >= 2
        assert metrics.responded == 0
        assert metrics.ignored == metrics.hits_critical

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            PhasePolicy.make(face=1.5)
        with pytest.raises(ValueError):
            CaretakerProfile(name="two", phases=(PhasePolicy.make(),) * 2)

    def test_profile_json_round_trip(self, tmp_path):
        path = tmp_path / "distracted.json"
        DISTRACTED.save(path)
        loaded = CaretakerProfile.load(path)
        assert loaded == DISTRACTED


class TestScriptedSessions:
    def test_zero_stimulus_first_critical_near_ninety_seconds(self):
        metrics = compute_metrics(
            run_session(SessionConfig(mode="fixed", seed=1), SILENT)
        )
        assert abs(metrics.events[0].tick - 900) <= 1

    def test_zero_stimulus_fixed_period_is_exactly_regular(self):
        metrics = compute_metrics(
            run_session(SessionConfig(mode="fixed", seed=1), SILENT)
        )
        ticks = [e.tick for e in metrics.events]
        assert len(ticks) >= 3
        gaps = {b - a for a, b in zip(ticks, ticks[1:])}
        assert len(gaps) == 1  # identical period, to the tick

    def test_zero_stimulus_adaptive_strictly_fewer_hits(self):
        fixed = compute_metrics(run_session(SessionConfig(mode="fixed", seed=1), SILENT))
        adaptive = compute_metrics(
            run_session(SessionConfig(mode="adaptive", seed=1), SILENT)
        )
        assert adaptive.hits_critical < fixed.hits_critical

    def test_phase_accounting(self):
        log = run_session(SessionConfig(mode="fixed", seed=2), SILENT)
        assert len(log.records) == 7200
        for record in log.records:
            assert record.phase == record.tick // 2400 + 1
        assert log.records[2399].phase == 1 and log.records[2400].phase == 2
        assert log.records[4799].phase == 2 and log.records[4800].phase == 3

    def test_seeded_rerun_is_byte_identical(self):
        first = run_session(SessionConfig(mode="adaptive", seed=9), DISTRACTED)
        second = run_session(SessionConfig(mode="adaptive", seed=9), DISTRACTED)
        assert first.to_text() == second.to_text()

    def test_different_seeds_differ(self):
        first = run_session(SessionConfig(mode="fixed", seed=1), DISTRACTED)
        second = run_session(SessionConfig(mode="fixed", seed=2), DISTRACTED)
        assert first.to_text() != second.to_text()


class TestSaturationSkew:
    def test_only_intense_reaches_saturation(self):
        for name in ("attentive", "sparse", "distracted", "intense"):
            for mode in ("fixed", "adaptive"):
                metrics = compute_metrics(
                    run_session(SessionConfig(mode=mode, seed=5), BUNDLED_PROFILES[name])
                )
                if name == "intense":
                    assert metrics.hits_saturation >= 1, (name, mode)
                    assert metrics.hits_critical == 0, (name, mode)
                else:
                    assert metrics.hits_saturation == 0, (name, mode)


class TestExperiment:
    def test_fa_distracted_fixed_has_strictly_more_hits(self):
        result = run_experiment(
            ExperimentConfig(order="FA", profile=DISTRACTED, seed=7)
        )
        fixed = compute_metrics(result.by_label("F"))
        adaptive = compute_metrics(result.by_label("A"))
        assert fixed.hits_critical > adaptive.hits_critical

    def test_order_and_labels(self):
        result = run_experiment(ExperimentConfig(order="AF", profile=SILENT, seed=1))
        assert result.first.header["session"] == "A"
        assert result.second.header["session"] == "F"
        assert result.first.header["mode"] == "adaptive"

    def test_second_session_starts_from_reset_parameters(self):
        # adaptive first: parameters adapt during session 1, but session 2
        # must start from the initial values again
        result = run_experiment(ExperimentConfig(order="AF", profile=SILENT, seed=1))
        adapted = result.first.records[-1]
        assert adapted.beta > PARAMS.beta0  # session 1 did adapt
        fresh = result.second.records[0]
        assert fresh.beta == PARAMS.beta0
        assert fresh.tau == PARAMS.tau0
        assert fresh.comfort == pytest.approx(PARAMS.c_init * PARAMS.beta0)

    def test_rejects_unknown_order(self):
        with pytest.raises(ValueError):
            ExperimentConfig(order="XY", profile=SILENT, seed=1)
