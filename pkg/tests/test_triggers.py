"""Trigger catalogue conformance and scripted evaluation."""

import pytest

from sliceswitch.errors import ScenarioError
from sliceswitch.slices import SNssai
from sliceswitch.triggers import (
    CauseGroup,
    Initiation,
    TriggerMechanism,
    TriggerName,
    TriggerSpec,
    cause_group_of,
    evaluate_triggers,
    validate_initiation,
)

SLICE = SNssai.parse("eMBB:0a")

# The full cause catalogue: trigger -> (cause group, typical initiation).
EXPECTED_TABLE = {
    TriggerName.ACCESS_NETWORK_CONDITIONS: (
        CauseGroup.SLICE_SPECIFIC_CONDITIONS, Initiation.UE_INITIATED),
    TriggerName.SLICE_DELAY: (
        CauseGroup.SLICE_SPECIFIC_CONDITIONS, Initiation.UE_INITIATED),
    TriggerName.SLICE_BANDWIDTH: (
        CauseGroup.SLICE_SPECIFIC_CONDITIONS, Initiation.NETWORK_TRIGGERED),
    TriggerName.RELIABILITY: (
        CauseGroup.SLICE_SPECIFIC_CONDITIONS, Initiation.UE_INITIATED),
    TriggerName.SLICE_STABILITY: (
        CauseGroup.SLICE_SPECIFIC_CONDITIONS, Initiation.EITHER),
    TriggerName.QOS_REQUIREMENTS: (
        CauseGroup.SERVICE_APP_REQUIREMENTS, Initiation.UE_INITIATED),
    TriggerName.SLICE_STRESS_LOAD: (
        CauseGroup.SLICE_OWNER_PREFERENCES, Initiation.NETWORK_TRIGGERED),
    TriggerName.SUBSCRIPTION_POLICIES: (
        CauseGroup.SLICE_OWNER_PREFERENCES, Initiation.NETWORK_TRIGGERED),
    TriggerName.PRICING_BILLING: (
        CauseGroup.SLICE_OWNER_PREFERENCES, Initiation.NETWORK_TRIGGERED),
    TriggerName.HORIZONTAL_HANDOVER: (
        CauseGroup.INTRA_INTER_TECH_HANDOVERS, Initiation.UE_INITIATED),
    TriggerName.VERTICAL_HANDOVER: (
        CauseGroup.INTRA_INTER_TECH_HANDOVERS, Initiation.UE_INITIATED),
    TriggerName.MONETARY_COSTS: (
        CauseGroup.USER_PREFERENCES, Initiation.UE_INITIATED),
    TriggerName.SLICE_ISOLATION_LEVEL: (
        CauseGroup.USER_PREFERENCES, Initiation.UE_INITIATED),
    TriggerName.SLICE_SECURITY: (
        CauseGroup.USER_PREFERENCES, Initiation.UE_INITIATED),
    TriggerName.SLICE_POLICIES: (
        CauseGroup.USER_PREFERENCES, Initiation.UE_INITIATED),
}


def test_catalogue_is_complete():
    assert set(EXPECTED_TABLE) == set(TriggerName)
    assert len(EXPECTED_TABLE) == 15


@pytest.mark.parametrize("name", list(TriggerName))
def test_initiation_point_mapping(name):
    _group, expected = EXPECTED_TABLE[name]
    for initiation in (Initiation.UE_INITIATED, Initiation.NETWORK_TRIGGERED):
        valid = validate_initiation(name, initiation)
        if expected is Initiation.EITHER:
            assert valid
        else:
            assert valid is (initiation is expected)


@pytest.mark.parametrize("name", list(TriggerName))
def test_cause_group_mapping(name):
    assert cause_group_of(name) is EXPECTED_TABLE[name][0]


def test_specific_rows():
    assert validate_initiation(
        TriggerName.PRICING_BILLING, Initiation.NETWORK_TRIGGERED
    )
    assert not validate_initiation(
        TriggerName.MONETARY_COSTS, Initiation.NETWORK_TRIGGERED
    )
    assert validate_initiation(
        TriggerName.SLICE_STABILITY, Initiation.UE_INITIATED
    )
    assert validate_initiation(
        TriggerName.SLICE_STABILITY, Initiation.NETWORK_TRIGGERED
    )


class TestEvaluateTriggers:
    def spec(self, at, name=TriggerName.SLICE_STRESS_LOAD,
             initiation=Initiation.NETWORK_TRIGGERED, **kwargs):
        return TriggerSpec(
            trigger_name=name, initiation=initiation, fire_at=at,
            ue_id="u1", snssai=SLICE, **kwargs,
        )

    def test_fires_exactly_at_time(self):
        script = [self.spec(10)]
        assert evaluate_triggers(script, 9) == []
        fired = evaluate_triggers(script, 10)
        assert len(fired) == 1
        assert fired[0].mechanism is TriggerMechanism.UCU_COMMAND

    def test_empty_script_never_fires(self):
        for now in range(50):
            assert evaluate_triggers([], now) == []

    def test_mechanism_resolution(self):
        via_release = self.spec(0, mechanism=TriggerMechanism.NETWORK_RELEASE)
        assert via_release.resolved_mechanism() is (
            TriggerMechanism.NETWORK_RELEASE
        )
        ue = self.spec(
            0, name=TriggerName.MONETARY_COSTS,
            initiation=Initiation.UE_INITIATED,
        )
        assert ue.resolved_mechanism() is TriggerMechanism.UE_DECISION

    def test_either_row_must_be_disambiguated(self):
        spec = self.spec(
            0, name=TriggerName.SLICE_STABILITY, initiation=Initiation.EITHER
        )
        with pytest.raises(ScenarioError):
            spec.resolved_mechanism()
        override = self.spec(
            0, name=TriggerName.SLICE_STABILITY,
            initiation=Initiation.UE_INITIATED,
        )
        assert override.resolved_mechanism() is TriggerMechanism.UE_DECISION

    def test_contradicting_initiation_rejected(self):
        spec = self.spec(
            0, name=TriggerName.MONETARY_COSTS,
            initiation=Initiation.NETWORK_TRIGGERED,
        )
        with pytest.raises(ScenarioError):
            spec.resolved_mechanism()

    def test_replay_determinism(self):
        script = [self.spec(5), self.spec(5, name=TriggerName.SLICE_BANDWIDTH),
                  self.spec(7)]
        first = [(f.spec.trigger_name, f.mechanism)
                 for f in evaluate_triggers(script, 5)]
        second = [(f.spec.trigger_name, f.mechanism)
                  for f in evaluate_triggers(script, 5)]
        assert first == second
        assert len(first) == 2
