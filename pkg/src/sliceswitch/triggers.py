"""Catalogue of inter-slice switching causes and scripted trigger evaluation.

Triggers are scenario-scripted rather than computed from modelled radio or
load metrics: the cause taxonomy is qualitative, so scenarios declare when a
trigger fires and the engine only validates and replays it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import ScenarioError
from .slices import SNssai


class CauseGroup(str, Enum):
    SLICE_SPECIFIC_CONDITIONS = "SliceSpecificConditions"
    SERVICE_APP_REQUIREMENTS = "ServiceAppRequirements"
    SLICE_OWNER_PREFERENCES = "SliceOwnerPreferences"
    INTRA_INTER_TECH_HANDOVERS = "IntraInterTechHandovers"
    USER_PREFERENCES = "UserPreferences"


class TriggerName(str, Enum):
    ACCESS_NETWORK_CONDITIONS = "AccessNetworkConditions"
    SLICE_DELAY = "SliceDelay"
    SLICE_BANDWIDTH = "SliceBandwidth"
    RELIABILITY = "Reliability"
    SLICE_STABILITY = "SliceStability"
    QOS_REQUIREMENTS = "QosRequirements"
    SLICE_STRESS_LOAD = "SliceStressLoad"
    SUBSCRIPTION_POLICIES = "SubscriptionPolicies"
    PRICING_BILLING = "PricingBilling"
    HORIZONTAL_HANDOVER = "HorizontalHandover"
    VERTICAL_HANDOVER = "VerticalHandover"
    MONETARY_COSTS = "MonetaryCosts"
    SLICE_ISOLATION_LEVEL = "SliceIsolationLevel"
    SLICE_SECURITY = "SliceSecurity"
    SLICE_POLICIES = "SlicePolicies"


class Initiation(str, Enum):
    UE_INITIATED = "UeInitiated"
    NETWORK_TRIGGERED = "NetworkTriggered"
    EITHER = "Either"


class TriggerMechanism(str, Enum):
    """How a fired trigger enters the protocol machinery."""

    UCU_COMMAND = "UcuCommand"
    NETWORK_RELEASE = "NetworkRelease"
    UE_DECISION = "UeDecision"


# (cause group, typical initiation point) for every known trigger.
TRIGGER_TABLE: dict[TriggerName, tuple[CauseGroup, Initiation]] = {
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


def cause_group_of(trigger_name: TriggerName) -> CauseGroup:
    return TRIGGER_TABLE[trigger_name][0]


def validate_initiation(trigger_name: TriggerName, initiation: Initiation) -> bool:
    """True iff the (trigger, initiation point) pair matches the catalogue.

    Rows typed Either accept both concrete initiation points.
    """
    expected = TRIGGER_TABLE[trigger_name][1]
    if expected is Initiation.EITHER:
        return True
    return initiation is expected


@dataclass
class TriggerSpec:
    """One scripted switching cause in a scenario.

    Beyond the catalogue attributes this carries the scenario-level knobs
    that drive case execution: the mechanism used by network-triggered
    causes, an optional pinned target slice, the tentative flag for
    UE-initiated causes and release-timing/initiator overrides.
    """

    trigger_name: TriggerName
    initiation: Initiation
    fire_at: int
    ue_id: str
    snssai: SNssai
    cause_group: Optional[CauseGroup] = None
    mechanism: Optional[TriggerMechanism] = None  # network causes; default UCU
    target: Optional[SNssai] = None
    tentative: bool = False
    release_timing: Optional[str] = None  # UE definitive cases
    release_initiator: Optional[str] = None  # NetworkRelease causes

    def __post_init__(self) -> None:
        if self.cause_group is None:
            self.cause_group = cause_group_of(self.trigger_name)

    def resolved_mechanism(self) -> TriggerMechanism:
        """Map the initiation point onto the concrete protocol mechanism."""
        if self.initiation is Initiation.EITHER:
            raise ScenarioError(
                f"trigger {self.trigger_name.value} at t={self.fire_at}: "
                "initiation 'Either' must be disambiguated in the scenario"
            )
        if not validate_initiation(self.trigger_name, self.initiation):
            raise ScenarioError(
                f"trigger {self.trigger_name.value}: initiation "
                f"{self.initiation.value} contradicts the cause catalogue"
            )
        if self.initiation is Initiation.UE_INITIATED:
            return TriggerMechanism.UE_DECISION
        return self.mechanism or TriggerMechanism.UCU_COMMAND


@dataclass
class FiredTrigger:
    spec: TriggerSpec
    mechanism: TriggerMechanism


def evaluate_triggers(script: list[TriggerSpec], now: int) -> list[FiredTrigger]:
    """Return the triggers firing exactly at `now`, in script order.

    The script must already be sorted by fire_at; replaying the same script
    yields the same firing sequence.
    """
    return [
        FiredTrigger(spec=spec, mechanism=spec.resolved_mechanism())
        for spec in script
        if spec.fire_at == now
    ]
