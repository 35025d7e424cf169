"""Shared scenario builders for the test suite.

Scenarios are built programmatically (same dataclasses the YAML loader
produces) so tests can tweak any knob without files.
"""

from __future__ import annotations

import pytest

from sliceswitch.engine import Simulation
from sliceswitch.nf import NfKind
from sliceswitch.scenario import (
    NfDecl,
    PolicyDecl,
    Scenario,
    SessionDecl,
    UeDecl,
    build_world,
)
from sliceswitch.slices import ServiceType, SNssai, Subscription
from sliceswitch.triggers import Initiation, TriggerMechanism, TriggerName, TriggerSpec
from sliceswitch.world import SimOptions

SLICE_A = SNssai.parse("eMBB:0a")
SLICE_B = SNssai.parse("eMBB:0b")
SLICE_C = SNssai.parse("eMBB:0c")
SLICE_Z = SNssai.parse("eMBB:ff")  # configured but never subscribed


def base_nfs(relocation: bool = False, extra_slices: list[SNssai] = ()) -> list[NfDecl]:
    """The standard topology: slices A and B, optional second AMF."""
    slices = [SLICE_A, SLICE_B, *extra_slices]
    amf1_serving = [SLICE_A] if relocation else list(slices)
    nfs = [NfDecl("amf1", NfKind.AMF, amf1_serving)]
    if relocation:
        nfs.append(NfDecl("amf2", NfKind.AMF, list(slices)))
    for snssai in slices:
        tag = snssai.sd[-1]
        nfs.append(NfDecl(f"smf-{tag}", NfKind.SMF, [snssai]))
        nfs.append(NfDecl(f"upf-{tag}", NfKind.UPF, [snssai]))
    nfs += [
        NfDecl("udm1", NfKind.UDM),
        NfDecl("pcf1", NfKind.PCF),
        NfDecl("nssf1", NfKind.NSSF),
        NfDecl("ran1", NfKind.RAN),
        NfDecl("dn1", NfKind.DN),
    ]
    return nfs


def make_scenario(
    *,
    name: str = "test",
    target_in_allowed: bool = False,
    relocation: bool = False,
    triggers: list[TriggerSpec] = (),
    options: SimOptions | None = None,
    extra_slices: list[SNssai] = (),
    extra_policies: list[PolicyDecl] = (),
    subscribed_extra: list[Subscription] = (),
    dn_auth: dict[str, bool] | None = None,
    latency_default: int = 1,
    with_session: bool = True,
) -> Scenario:
    allowed = [SLICE_A, SLICE_B] if target_in_allowed else [SLICE_A]
    sessions = (
        [SessionDecl("sess-a", SLICE_A, "internet")] if with_session else []
    )
    configured = [SLICE_A, SLICE_B, SLICE_Z, *extra_slices]
    return Scenario(
        name=name,
        configured=configured,
        nfs=base_nfs(relocation, list(extra_slices)),
        ues=[
            UeDecl(
                ue_id="ue1",
                service_type=ServiceType.EMBB,
                serving_amf="amf1",
                subscribed=[
                    Subscription(SLICE_A, is_default=True),
                    Subscription(SLICE_B),
                    *subscribed_extra,
                ],
                allowed=allowed,
                priorities={SLICE_B: 1},
                sessions=sessions,
            )
        ],
        policies=[
            PolicyDecl(SLICE_A, "internet"),
            PolicyDecl(SLICE_B, "internet"),
            *extra_policies,
        ],
        dn_auth=dn_auth or {},
        triggers=list(triggers),
        latency_default=latency_default,
        options=options or SimOptions(),
    )


def make_sim(scenario: Scenario, seed: int = 0) -> Simulation:
    world, script, latency = build_world(scenario, seed)
    sim = Simulation(world, latency)
    for spec in script:
        from sliceswitch.triggers import FiredTrigger

        sim.schedule_trigger(
            FiredTrigger(spec=spec, mechanism=spec.resolved_mechanism())
        )
    return sim


def network_trigger(
    mechanism: TriggerMechanism = TriggerMechanism.UCU_COMMAND,
    at: int = 0,
    target: SNssai | None = None,
) -> TriggerSpec:
    name = (
        TriggerName.SLICE_STRESS_LOAD
        if mechanism is TriggerMechanism.UCU_COMMAND
        else TriggerName.SUBSCRIPTION_POLICIES
    )
    return TriggerSpec(
        trigger_name=name,
        initiation=Initiation.NETWORK_TRIGGERED,
        fire_at=at,
        ue_id="ue1",
        snssai=SLICE_A,
        mechanism=mechanism,
        target=target,
    )


def ue_trigger(
    at: int = 0,
    tentative: bool = False,
    target: SNssai | None = None,
    release_timing: str | None = None,
) -> TriggerSpec:
    return TriggerSpec(
        trigger_name=TriggerName.MONETARY_COSTS,
        initiation=Initiation.UE_INITIATED,
        fire_at=at,
        ue_id="ue1",
        snssai=SLICE_A,
        tentative=tentative,
        target=target,
        release_timing=release_timing,
    )


@pytest.fixture
def plain_sim():
    """A ready world with no triggers: slice A active, slice B available."""
    return make_sim(make_scenario())
