"""The four standard control-plane procedures as message choreographies.

Each procedure is started by an initiator function that emits its opening
message(s); from there the per-NF reactions registered below advance the
choreography one delivered message at a time. A ProcedureRun records the
outcome and timing; it finishes on the delivery of its final message.

Modelling notes:
  * UE <-> core messages are single hops; the RAN relay leg is folded into
    the link latency. The RAN appears explicitly where it holds resources.
  * Failed establishments emit no reject signalling: the run is marked
    failed at the point of refusal and the switch orchestration reacts to
    the run outcome instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Optional

from . import messages as m
from .errors import AllowedNssaiOverflow, InvalidRequest, InvalidSessionState
from .nf import (
    N4Session,
    NfInstance,
    NfKind,
    amf_can_serve,
    reaction,
    select_amf,
)
from .slices import (
    PduSession,
    PduSessionState,
    RegistrationState,
    SessionType,
    SNssai,
    UeContext,
    compute_allowed_nssai,
    snssai_key,
    verify_requested_nssai,
)

if TYPE_CHECKING:  # pragma: no cover
    from .engine import Simulation


class ProcedureKind(str, Enum):
    UE_CONFIGURATION_UPDATE = "UeConfigurationUpdate"
    REGISTRATION = "Registration"
    PDU_SESSION_RELEASE = "PduSessionRelease"
    PDU_SESSION_ESTABLISHMENT = "PduSessionEstablishment"


class Initiator(str, Enum):
    UE = "UE"
    AMF = "AMF"
    SMF = "SMF"
    PCF = "PCF"


@dataclass
class ProcedureRun:
    """One executed procedure: identity, timing and outcome."""

    run_id: str
    procedure: ProcedureKind
    initiator: Initiator
    ue_id: str
    started_at: int
    target_snssai: Optional[SNssai] = None
    with_amf_relocation: bool = False
    finished_at: Optional[int] = None
    outcome: Optional[str] = None  # "Success" | "Failure"
    failure_reason: Optional[str] = None
    case_label: Optional[str] = None
    session_id: Optional[str] = None
    message_count: int = 0
    message_names: list[str] = field(default_factory=list)

    @property
    def in_flight(self) -> bool:
        return self.outcome is None


# Failure reasons surfaced through ProcedureRun.failure_reason.
NO_ACCEPTABLE_SNSSAI = "NoAcceptableSnssai"
ALLOWED_NSSAI_OVERFLOW = "AllowedNssaiOverflow"
NO_SERVING_AMF = "NoServingAmf"
DN_AUTH_REJECTED = "DnAuthRejected"
NO_POLICY = "NoPolicy"
SLICE_NOT_ALLOWED = "SliceNotAllowed"
UNKNOWN_UE = "UnknownUe"
NO_SM_SUBSCRIPTION = "NoSmSubscription"
INVALID_SESSION_STATE = "InvalidSessionState"
NO_CANDIDATE_SLICE = "NoCandidateSlice"


@dataclass
class RegistrationCtx:
    """AMF-side progress record for one Registration run."""

    run: ProcedureRun
    ue_id: str
    requested: set[SNssai]
    remove_current: bool
    current_active: Optional[SNssai]
    accepted: set[SNssai] = field(default_factory=set)
    new_allowed: set[SNssai] = field(default_factory=set)
    serving_after: Optional[str] = None


@dataclass
class EstablishmentCtx:
    """SMF-side progress record for one establishment run."""

    run: ProcedureRun
    session_id: str
    snssai: SNssai
    dn_name: str
    pending_n4: set[str] = field(default_factory=set)
    pending_sm_acks: set[str] = field(default_factory=set)
    ip_prefix: Optional[str] = None
    policy_ref: Optional[str] = None


@dataclass
class ReleaseCtx:
    """SMF-side progress record for one release run."""

    run: ProcedureRun
    session_id: str
    pending_n4: set[str] = field(default_factory=set)


# --- procedure initiators ---------------------------------------------------


def start_ue_configuration_update(
    sim: "Simulation",
    amf: NfInstance,
    ue: UeContext,
    new_allowed: set[SNssai],
    case_label: Optional[str] = None,
) -> tuple[ProcedureRun, list[ProcedureRun]]:
    """AMF pushes a modified Allowed NSSAI to the UE.

    The Command is sent first; releases of active sessions that the new set
    orphans are initiated immediately after sending, so both strands run
    concurrently. Returns the UCU run and any spawned release runs.
    """
    if ue.serving_amf != amf.nf_id:
        raise InvalidRequest(f"{amf.nf_id} is not the serving AMF of {ue.ue_id}")
    run = sim.new_run(
        ProcedureKind.UE_CONFIGURATION_UPDATE,
        Initiator.AMF,
        ue.ue_id,
        case_label=case_label,
    )
    sim.emit(
        m.UE_CONFIGURATION_UPDATE_COMMAND,
        amf.nf_id,
        ue.ue_id,
        run=run,
        payload={"new_allowed": sorted(new_allowed, key=snssai_key)},
    )
    release_runs = []
    for session in ue.active_sessions():
        if session.snssai not in new_allowed:
            release_runs.append(
                start_pdu_session_release(
                    sim, ue, session, Initiator.AMF, case_label=case_label
                )
            )
    return run, release_runs


def start_registration(
    sim: "Simulation",
    ue: UeContext,
    requested: set[SNssai],
    remove_current: bool,
    current_active: Optional[SNssai] = None,
    case_label: Optional[str] = None,
) -> ProcedureRun:
    """UE asks its serving AMF for a new Allowed NSSAI."""
    if ue.registration_state is not RegistrationState.REGISTERED:
        raise InvalidRequest(f"{ue.ue_id} is not registered")
    if not requested:
        raise InvalidRequest("Requested NSSAI must not be empty")
    for other in sim.world.runs.values():
        if (
            other.procedure is ProcedureKind.REGISTRATION
            and other.in_flight
            and other.ue_id == ue.ue_id
        ):
            raise InvalidSessionState(
                f"registration {other.run_id} already in flight for {ue.ue_id}"
            )
    run = sim.new_run(
        ProcedureKind.REGISTRATION, Initiator.UE, ue.ue_id, case_label=case_label
    )
    sim.emit(
        m.REGISTRATION_REQUEST,
        ue.ue_id,
        ue.serving_amf,
        run=run,
        payload={
            "requested": sorted(requested, key=snssai_key),
            "remove_current": remove_current,
            "current_active": current_active,
        },
    )
    return run


def start_pdu_session_release(
    sim: "Simulation",
    ue: UeContext,
    session: PduSession,
    initiator: Initiator,
    case_label: Optional[str] = None,
) -> ProcedureRun:
    """Release an Active PDU session; initiator may be UE, AMF, SMF or PCF."""
    if session.state is not PduSessionState.ACTIVE:
        raise InvalidSessionState(
            f"cannot release session {session.session_id} in state "
            f"{session.state.value}"
        )
    run = sim.new_run(
        ProcedureKind.PDU_SESSION_RELEASE,
        initiator,
        ue.ue_id,
        case_label=case_label,
        session_id=session.session_id,
        target_snssai=session.snssai,
    )
    world = sim.world
    smf_id = session.smf or world.directory.smf_for[session.snssai]
    payload = {"session_id": session.session_id}
    if initiator is Initiator.UE:
        sim.emit(
            m.PDU_SESSION_RELEASE_REQUEST, ue.ue_id, ue.serving_amf,
            run=run, payload=payload,
        )
    elif initiator is Initiator.AMF:
        sim.emit(
            m.PDU_SESSION_RELEASE_REQUEST, ue.serving_amf, smf_id,
            run=run, payload=payload,
        )
    elif initiator is Initiator.PCF:
        sim.emit(
            m.PDU_SESSION_RELEASE_REQUEST, world.directory.pcf, smf_id,
            run=run, payload=payload,
        )
    else:  # SMF starts its own teardown without a request message
        smf = world.nfs[smf_id]
        _begin_release_at_smf(smf, session, run, sim)
    return run


def start_pdu_session_establishment(
    sim: "Simulation",
    ue: UeContext,
    snssai: SNssai,
    dn_name: str,
    session_type: SessionType = SessionType.IP,
    case_label: Optional[str] = None,
) -> ProcedureRun:
    """UE requests a new PDU session on `snssai` towards `dn_name`.

    The allowed-set check happens at the AMF, so a disallowed slice still
    costs exactly the initial request message before the run fails.
    """
    for session in ue.sessions.values():
        if (
            session.snssai == snssai
            and session.dn_name == dn_name
            and session.state
            in (PduSessionState.ESTABLISHING, PduSessionState.ACTIVE)
        ):
            raise InvalidSessionState(
                f"{ue.ue_id} already has session {session.session_id} on "
                f"{snssai}/{dn_name} in state {session.state.value}"
            )
    # At most one establishment per UE per slice in flight.
    for other in sim.world.runs.values():
        if (
            other.procedure is ProcedureKind.PDU_SESSION_ESTABLISHMENT
            and other.in_flight
            and other.ue_id == ue.ue_id
            and other.target_snssai == snssai
        ):
            raise InvalidSessionState(
                f"establishment {other.run_id} already in flight for "
                f"{ue.ue_id} on {snssai}"
            )
    run = sim.new_run(
        ProcedureKind.PDU_SESSION_ESTABLISHMENT,
        Initiator.UE,
        ue.ue_id,
        case_label=case_label,
        target_snssai=snssai,
        session_id=sim.world.next_session_id(ue.ue_id),
    )
    sim.emit(
        m.PDU_SESSION_ESTABLISHMENT_REQUEST,
        ue.ue_id,
        ue.serving_amf,
        run=run,
        payload={
            "session_id": run.session_id,
            "snssai": snssai,
            "dn_name": dn_name,
            "session_type": session_type,
        },
    )
    return run


# Synchronous wrappers: start a procedure and drive the loop to its end.


def run_ue_configuration_update(sim, amf, ue, new_allowed) -> ProcedureRun:
    run, _ = start_ue_configuration_update(sim, amf, ue, new_allowed)
    sim.run_until(lambda: not run.in_flight)
    return run


def run_registration(
    sim, ue, requested, remove_current, current_active=None
) -> ProcedureRun:
    run = start_registration(sim, ue, requested, remove_current, current_active)
    sim.run_until(lambda: not run.in_flight)
    return run


def run_pdu_session_release(sim, ue, session, initiator) -> ProcedureRun:
    run = start_pdu_session_release(sim, ue, session, initiator)
    sim.run_until(lambda: not run.in_flight)
    return run


def run_pdu_session_establishment(sim, ue, snssai, dn_name) -> ProcedureRun:
    run = start_pdu_session_establishment(sim, ue, snssai, dn_name)
    sim.run_until(lambda: not run.in_flight)
    return run


# --- UE reactions ------------------------------------------------------------


@reaction(NfKind.UE, m.UE_CONFIGURATION_UPDATE_COMMAND)
def ue_on_ucu_command(nf, msg, now, sim):
    ue = sim.world.ues[nf.state_store.ue_id]
    ue.nssai.allowed = set(msg.payload["new_allowed"])
    out = [
        sim.emit(
            m.UE_CONFIGURATION_UPDATE_COMPLETE,
            nf.nf_id,
            msg.src,
            run=sim.run_of(msg),
        )
    ]
    sim.notify("ucu_applied", run=sim.run_of(msg), ue_id=ue.ue_id)
    return out


@reaction(NfKind.UE, m.REGISTRATION_ACCEPT)
def ue_on_registration_accept(nf, msg, now, sim):
    ue = sim.world.ues[nf.state_store.ue_id]
    # Allowed set and serving AMF flip together, so any relocation becomes
    # effective exactly when the UE learns the outcome.
    ue.nssai.allowed = set(msg.payload["new_allowed"])
    ue.nssai.requested = None
    ue.serving_amf = msg.payload["serving_amf"]
    sim.finish_run(sim.run_of(msg), success=True)
    return []


@reaction(NfKind.UE, m.REGISTRATION_REJECT)
def ue_on_registration_reject(nf, msg, now, sim):
    ue = sim.world.ues[nf.state_store.ue_id]
    ue.nssai.requested = None
    sim.finish_run(sim.run_of(msg), success=False, reason=msg.payload["reason"])
    return []


@reaction(NfKind.UE, m.PDU_SESSION_RELEASE_COMMAND)
def ue_on_release_command(nf, msg, now, sim):
    return [
        sim.emit(
            m.PDU_SESSION_RELEASE_COMPLETE, nf.nf_id, msg.src, run=sim.run_of(msg)
        )
    ]


@reaction(NfKind.UE, m.SM_PARAMETER_CONFIGURATION)
def ue_on_sm_parameters(nf, msg, now, sim):
    return [
        sim.emit(
            m.SM_PARAMETER_CONFIGURATION_ACK, nf.nf_id, msg.src, run=sim.run_of(msg)
        )
    ]


@reaction(NfKind.UE, m.ROUTER_ADVERTISEMENT)
def ue_on_router_advertisement(nf, msg, now, sim):
    # Prefix delivery to the UE closes the establishment; traffic may flow.
    sim.finish_run(sim.run_of(msg), success=True)
    return []


@reaction(NfKind.UE, m.NO_CANDIDATE_SLICE)
def ue_on_no_candidate(nf, msg, now, sim):
    sim.notify("no_candidate_delivered", ue_id=msg.ue_id, case_label=msg.case_label)
    return []


@reaction(NfKind.UE, m.PROCEDURE_FAILURE)
def ue_on_procedure_failure(nf, msg, now, sim):
    run = sim.run_of(msg)
    if run is not None and run.in_flight:
        sim.finish_run(run, success=False, reason=msg.payload.get("reason"))
    return []


# --- RAN reactions -----------------------------------------------------------


@reaction(NfKind.RAN, m.SM_PARAMETER_CONFIGURATION)
def ran_on_sm_parameters(nf, msg, now, sim):
    nf.state_store.resources.add(msg.payload["session_id"])
    return [
        sim.emit(
            m.SM_PARAMETER_CONFIGURATION_ACK, nf.nf_id, msg.src, run=sim.run_of(msg)
        )
    ]


@reaction(NfKind.RAN, m.RAN_RESOURCE_RELEASE)
def ran_on_resource_release(nf, msg, now, sim):
    nf.state_store.resources.discard(msg.payload["session_id"])
    return [
        sim.emit(
            m.RAN_RESOURCE_RELEASE_ACK, nf.nf_id, msg.src, run=sim.run_of(msg)
        )
    ]


# --- AMF reactions -----------------------------------------------------------


@reaction(NfKind.AMF, m.UE_CONFIGURATION_UPDATE_COMPLETE)
def amf_on_ucu_complete(nf, msg, now, sim):
    sim.finish_run(sim.run_of(msg), success=True)
    return []


@reaction(NfKind.AMF, m.REGISTRATION_REQUEST)
def amf_on_registration_request(nf, msg, now, sim):
    run = sim.run_of(msg)
    ctx = RegistrationCtx(
        run=run,
        ue_id=msg.ue_id,
        requested=set(msg.payload["requested"]),
        remove_current=msg.payload["remove_current"],
        current_active=msg.payload["current_active"],
    )
    nf.state_store.registrations[run.run_id] = ctx
    return [
        sim.emit(
            m.SUBSCRIPTION_DATA_REQUEST,
            nf.nf_id,
            sim.world.directory.udm,
            run=run,
            payload={"ue_id": msg.ue_id},
        )
    ]


def _reg_ctx(nf, msg, sim):
    """Registration context for a response, or None for stale/uncorrelated."""
    run = sim.run_of(msg)
    if run is None:
        return None
    return nf.state_store.registrations.get(run.run_id)


@reaction(NfKind.AMF, m.SUBSCRIPTION_DATA_RESPONSE)
def amf_on_subscription_data(nf, msg, now, sim):
    ctx = _reg_ctx(nf, msg, sim)
    if ctx is None:
        return []
    run = ctx.run
    ue = sim.world.ues[ctx.ue_id]
    result = verify_requested_nssai(
        ctx.requested, msg.payload["subscribed"], sim.world.configured
    )
    if not result.accepted:
        return _reject_registration(nf, ctx, sim, NO_ACCEPTABLE_SNSSAI)
    ctx.accepted = result.accepted
    try:
        ctx.new_allowed = compute_allowed_nssai(
            ue.nssai.allowed,
            ctx.accepted,
            ctx.remove_current,
            ctx.current_active,
        )
    except AllowedNssaiOverflow:
        return _reject_registration(nf, ctx, sim, ALLOWED_NSSAI_OVERFLOW)
    if sim.world.options.nssf_assist:
        return [
            sim.emit(
                m.SLICE_SELECTION_REQUEST,
                nf.nf_id,
                sim.world.directory.nssf,
                run=run,
                payload={
                    "requested": sorted(ctx.requested, key=snssai_key),
                    "accepted": sorted(ctx.accepted, key=snssai_key),
                },
            )
        ]
    return _amf_serve_check(nf, ctx, sim)


@reaction(NfKind.AMF, m.SLICE_SELECTION_RESPONSE)
def amf_on_slice_selection(nf, msg, now, sim):
    ctx = _reg_ctx(nf, msg, sim)
    if ctx is None:
        return []
    return _amf_serve_check(nf, ctx, sim)


def _amf_serve_check(nf, ctx, sim):
    """After verification: relocate if this AMF cannot serve the new set."""
    if amf_can_serve(nf, ctx.new_allowed):
        ctx.serving_after = nf.nf_id
        return _amf_complete_registration(nf, ctx, sim)
    return [
        sim.emit(
            m.AMF_SELECTION_REQUEST,
            nf.nf_id,
            sim.world.directory.nssf,
            run=ctx.run,
            payload={"allowed": sorted(ctx.new_allowed, key=snssai_key)},
        )
    ]


@reaction(NfKind.AMF, m.AMF_SELECTION_RESPONSE)
def amf_on_amf_selection(nf, msg, now, sim):
    ctx = _reg_ctx(nf, msg, sim)
    if ctx is None:
        return []
    run = ctx.run
    if not msg.payload["ok"]:
        # Registration fails; the UE stays on its old allowed set.
        return _reject_registration(nf, ctx, sim, NO_SERVING_AMF)
    run.with_amf_relocation = True
    ctx.serving_after = msg.payload["amf"]
    del nf.state_store.registrations[run.run_id]
    return [
        sim.emit(
            m.AMF_CONTEXT_TRANSFER,
            nf.nf_id,
            ctx.serving_after,
            run=run,
            payload={"ctx": ctx},
        )
    ]


@reaction(NfKind.AMF, m.AMF_CONTEXT_TRANSFER)
def amf_on_context_transfer(nf, msg, now, sim):
    ctx = msg.payload["ctx"]
    nf.state_store.registrations[ctx.run.run_id] = ctx
    return _amf_complete_registration(nf, ctx, sim)


def _amf_complete_registration(nf, ctx, sim):
    """Emit the (optional) release-during-registration and the Accept.

    When a definitive registration drops the slice of a still-active session,
    the AMF releases that session as part of the registration; the ordering
    relative to the Accept is configurable and defaults to release first.
    """
    out = []
    release_first = sim.world.options.deferred_release_order == "before_accept"
    if release_first:
        out.extend(_amf_release_orphans(nf, ctx, sim))
    out.append(
        sim.emit(
            m.REGISTRATION_ACCEPT,
            nf.nf_id,
            ctx.ue_id,
            run=ctx.run,
            payload={
                "new_allowed": sorted(ctx.new_allowed, key=snssai_key),
                "serving_amf": ctx.serving_after,
            },
        )
    )
    if not release_first:
        out.extend(_amf_release_orphans(nf, ctx, sim))
    nf.state_store.registrations.pop(ctx.run.run_id, None)
    return out


def _amf_release_orphans(nf, ctx, sim):
    if not ctx.remove_current:
        return []
    ue = sim.world.ues[ctx.ue_id]
    for session in ue.active_sessions():
        if session.snssai not in ctx.new_allowed:
            start_pdu_session_release(
                sim, ue, session, Initiator.AMF, case_label=ctx.run.case_label
            )
    return []


def _reject_registration(nf, ctx, sim, reason):
    nf.state_store.registrations.pop(ctx.run.run_id, None)
    return [
        sim.emit(
            m.REGISTRATION_REJECT,
            nf.nf_id,
            ctx.ue_id,
            run=ctx.run,
            payload={"reason": reason},
        )
    ]


@reaction(NfKind.AMF, m.PDU_SESSION_ESTABLISHMENT_REQUEST)
def amf_on_establishment_request(nf, msg, now, sim):
    run = sim.run_of(msg)
    ue = sim.world.ues[msg.ue_id]
    snssai = msg.payload["snssai"]
    if snssai not in ue.nssai.allowed:
        # Slice not in the Allowed NSSAI: refuse without further signalling.
        sim.finish_run(run, success=False, reason=SLICE_NOT_ALLOWED)
        return []
    smf_id = sim.world.directory.smf_for[snssai]
    return [
        sim.emit(
            m.PDU_SESSION_ESTABLISHMENT_REQUEST,
            nf.nf_id,
            smf_id,
            run=run,
            payload=dict(msg.payload),
        )
    ]


@reaction(NfKind.AMF, m.PDU_SESSION_RELEASE_REQUEST)
def amf_on_release_request(nf, msg, now, sim):
    run = sim.run_of(msg)
    ue = sim.world.ues[msg.ue_id]
    session = ue.sessions[msg.payload["session_id"]]
    smf_id = session.smf or sim.world.directory.smf_for[session.snssai]
    return [
        sim.emit(
            m.PDU_SESSION_RELEASE_REQUEST,
            nf.nf_id,
            smf_id,
            run=run,
            payload=dict(msg.payload),
        )
    ]


@reaction(NfKind.AMF, m.PROCEDURE_FAILURE)
def amf_on_procedure_failure(nf, msg, now, sim):
    run = sim.run_of(msg)
    if run is not None and run.in_flight:
        nf.state_store.registrations.pop(run.run_id, None)
        sim.finish_run(run, success=False, reason=msg.payload.get("reason"))
    return []


# --- SMF reactions -----------------------------------------------------------


@reaction(NfKind.SMF, m.PDU_SESSION_ESTABLISHMENT_REQUEST)
def smf_on_establishment_request(nf, msg, now, sim):
    run = sim.run_of(msg)
    ue = sim.world.ues[msg.ue_id]
    session = PduSession(
        session_id=msg.payload["session_id"],
        snssai=msg.payload["snssai"],
        dn_name=msg.payload["dn_name"],
        session_type=msg.payload.get("session_type", SessionType.IP),
        smf=nf.nf_id,
    )
    session.transition(PduSessionState.ESTABLISHING)
    ue.sessions[session.session_id] = session
    nf.state_store.establishments[session.session_id] = EstablishmentCtx(
        run=run,
        session_id=session.session_id,
        snssai=session.snssai,
        dn_name=session.dn_name,
    )
    return [
        sim.emit(
            m.SM_SUBSCRIPTION_REQUEST,
            nf.nf_id,
            sim.world.directory.udm,
            run=run,
            payload={
                "ue_id": msg.ue_id,
                "snssai": session.snssai,
                "dn_name": session.dn_name,
            },
        )
    ]


@reaction(NfKind.SMF, m.SM_SUBSCRIPTION_RESPONSE)
def smf_on_sm_subscription(nf, msg, now, sim):
    run = sim.run_of(msg)
    ctx = _est_ctx(nf, run)
    if not msg.payload.get("found") or not msg.payload.get("dn_authorized"):
        return _fail_establishment(nf, ctx, sim, NO_SM_SUBSCRIPTION)
    # SM subscription verified: the SMF accepts the request and works
    # through external DN auth, policy, user plane and SM configuration.
    sim.notify("smf_accepted", run=run, ue_id=run.ue_id)
    return [
        sim.emit(
            m.DN_AUTH_REQUEST,
            nf.nf_id,
            sim.world.directory.dn,
            run=run,
            payload={"dn_name": ctx.dn_name, "ue_id": run.ue_id},
        )
    ]


@reaction(NfKind.SMF, m.DN_AUTH_RESPONSE)
def smf_on_dn_auth(nf, msg, now, sim):
    run = sim.run_of(msg)
    ctx = _est_ctx(nf, run)
    if not msg.payload["accepted"]:
        return _fail_establishment(nf, ctx, sim, DN_AUTH_REJECTED)
    return [
        sim.emit(
            m.POLICY_RETRIEVAL,
            nf.nf_id,
            sim.world.directory.pcf,
            run=run,
            payload={"snssai": ctx.snssai, "dn_name": ctx.dn_name},
        )
    ]


@reaction(NfKind.SMF, m.POLICY_RETRIEVAL_RESPONSE)
def smf_on_policy_response(nf, msg, now, sim):
    run = sim.run_of(msg)
    ctx = _est_ctx(nf, run)
    if not msg.payload["found"]:
        return _fail_establishment(nf, ctx, sim, NO_POLICY)
    ctx.policy_ref = msg.payload["policy_ref"]
    ue = sim.world.ues[run.ue_id]
    session = ue.sessions[ctx.session_id]
    upfs = list(sim.world.directory.upfs_for[ctx.snssai])
    session.upfs = upfs
    ctx.pending_n4 = set(upfs)
    out = []
    for upf_id in upfs:
        n4 = N4Session.with_default_rules(ctx.session_id, nf.nf_id, upf_id)
        out.append(
            sim.emit(
                m.N4_SESSION_ESTABLISHMENT,
                nf.nf_id,
                upf_id,
                run=run,
                payload={"session_id": ctx.session_id, "rules": n4.rules},
            )
        )
    return out


@reaction(NfKind.SMF, m.N4_SESSION_ESTABLISHMENT_ACK)
def smf_on_n4_establishment_ack(nf, msg, now, sim):
    run = sim.run_of(msg)
    ctx = _est_ctx(nf, run)
    upf_id = msg.src
    nf.state_store.n4_sessions[(ctx.session_id, upf_id)] = (
        N4Session.with_default_rules(ctx.session_id, nf.nf_id, upf_id)
    )
    ctx.pending_n4.discard(upf_id)
    if ctx.pending_n4:
        return []
    # User plane ready on every UPF: allocate the address locally.
    return [
        sim.emit(
            m.IP_ADDRESS_ALLOCATION,
            nf.nf_id,
            nf.nf_id,
            run=run,
            payload={"session_id": ctx.session_id},
        )
    ]


@reaction(NfKind.SMF, m.IP_ADDRESS_ALLOCATION)
def smf_on_ip_allocation(nf, msg, now, sim):
    run = sim.run_of(msg)
    ctx = _est_ctx(nf, run)
    ctx.ip_prefix = f"pfx-{ctx.session_id}"
    ue = sim.world.ues[run.ue_id]
    ran = sim.world.directory.ran
    ctx.pending_sm_acks = {ue.ue_id, ran}
    payload = {"session_id": ctx.session_id, "snssai": ctx.snssai}
    return [
        sim.emit(m.SM_PARAMETER_CONFIGURATION, nf.nf_id, ue.ue_id,
                 run=run, payload=payload),
        sim.emit(m.SM_PARAMETER_CONFIGURATION, nf.nf_id, ran,
                 run=run, payload=payload),
    ]


@reaction(NfKind.SMF, m.SM_PARAMETER_CONFIGURATION_ACK)
def smf_on_sm_parameter_ack(nf, msg, now, sim):
    run = sim.run_of(msg)
    ctx = _est_ctx(nf, run)
    ctx.pending_sm_acks.discard(msg.src)
    if ctx.pending_sm_acks:
        return []
    # SM parameters confirmed at UE and RAN: establishment is complete; the
    # prefix still travels to the UE through the user plane.
    ue = sim.world.ues[run.ue_id]
    session = ue.sessions[ctx.session_id]
    session.activate(ctx.ip_prefix, ctx.policy_ref)
    nf.state_store.establishments.pop(ctx.session_id, None)
    anchor_upf = session.upfs[0]
    return [
        sim.emit(
            m.IPV6_ADDRESS_CONFIGURATION,
            nf.nf_id,
            anchor_upf,
            run=run,
            payload={
                "session_id": ctx.session_id,
                "ip_prefix": ctx.ip_prefix,
                "ue_id": ue.ue_id,
            },
        )
    ]


def _est_ctx(nf, run) -> EstablishmentCtx:
    return next(
        ctx
        for ctx in nf.state_store.establishments.values()
        if ctx.run.run_id == run.run_id
    )


def _fail_establishment(nf, ctx, sim, reason):
    ue = sim.world.ues[ctx.run.ue_id]
    session = ue.sessions[ctx.session_id]
    session.transition(PduSessionState.RELEASED)
    nf.state_store.establishments.pop(ctx.session_id, None)
    sim.finish_run(ctx.run, success=False, reason=reason)
    return []


@reaction(NfKind.SMF, m.PDU_SESSION_RELEASE_REQUEST)
def smf_on_release_request(nf, msg, now, sim):
    run = sim.run_of(msg)
    ue = sim.world.ues[msg.ue_id]
    session = ue.sessions.get(msg.payload["session_id"])
    if session is None or session.state is not PduSessionState.ACTIVE:
        state = session.state.value if session else "missing"
        sim.finish_run(run, success=False, reason=INVALID_SESSION_STATE)
        return [
            sim.emit(
                m.PROCEDURE_FAILURE,
                nf.nf_id,
                msg.src,
                run=None,
                ue_id=msg.ue_id,
                payload={"reason": INVALID_SESSION_STATE, "state": state},
            )
        ]
    return _begin_release_at_smf(nf, session, run, sim)


def _begin_release_at_smf(nf, session, run, sim):
    session.transition(PduSessionState.RELEASING)
    ctx = ReleaseCtx(run=run, session_id=session.session_id,
                     pending_n4=set(session.upfs))
    nf.state_store.releases[session.session_id] = ctx
    return [
        sim.emit(
            m.N4_SESSION_RELEASE,
            nf.nf_id,
            upf_id,
            run=run,
            payload={"session_id": session.session_id},
        )
        for upf_id in session.upfs
    ]


@reaction(NfKind.SMF, m.N4_SESSION_RELEASE_ACK)
def smf_on_n4_release_ack(nf, msg, now, sim):
    run = sim.run_of(msg)
    ctx = _rel_ctx(nf, run)
    nf.state_store.n4_sessions.pop((ctx.session_id, msg.src), None)
    ctx.pending_n4.discard(msg.src)
    if ctx.pending_n4:
        return []
    return [
        sim.emit(
            m.RAN_RESOURCE_RELEASE,
            nf.nf_id,
            sim.world.directory.ran,
            run=run,
            payload={"session_id": ctx.session_id},
        )
    ]


@reaction(NfKind.SMF, m.RAN_RESOURCE_RELEASE_ACK)
def smf_on_ran_release_ack(nf, msg, now, sim):
    run = sim.run_of(msg)
    ctx = _rel_ctx(nf, run)
    return [
        sim.emit(
            m.PDU_SESSION_RELEASE_COMMAND,
            nf.nf_id,
            run.ue_id,
            run=run,
            payload={"session_id": ctx.session_id},
        )
    ]


@reaction(NfKind.SMF, m.PDU_SESSION_RELEASE_COMPLETE)
def smf_on_release_complete(nf, msg, now, sim):
    run = sim.run_of(msg)
    ctx = _rel_ctx(nf, run)
    ue = sim.world.ues[run.ue_id]
    session = ue.sessions[ctx.session_id]
    session.transition(PduSessionState.RELEASED)
    nf.state_store.releases.pop(ctx.session_id, None)
    sim.finish_run(run, success=True)
    return []


def _rel_ctx(nf, run) -> ReleaseCtx:
    return next(
        ctx
        for ctx in nf.state_store.releases.values()
        if ctx.run.run_id == run.run_id
    )


# --- UPF reactions -----------------------------------------------------------


@reaction(NfKind.UPF, m.N4_SESSION_ESTABLISHMENT)
def upf_on_n4_establishment(nf, msg, now, sim):
    session_id = msg.payload["session_id"]
    nf.state_store.n4_sessions[session_id] = N4Session(
        session_id=session_id,
        smf=msg.src,
        upf=nf.nf_id,
        rules=dict(msg.payload["rules"]),
    )
    return [
        sim.emit(
            m.N4_SESSION_ESTABLISHMENT_ACK, nf.nf_id, msg.src, run=sim.run_of(msg),
            payload={"session_id": session_id},
        )
    ]


@reaction(NfKind.UPF, m.N4_SESSION_RELEASE)
def upf_on_n4_release(nf, msg, now, sim):
    session_id = msg.payload["session_id"]
    nf.state_store.n4_sessions.pop(session_id, None)
    return [
        sim.emit(
            m.N4_SESSION_RELEASE_ACK, nf.nf_id, msg.src, run=sim.run_of(msg),
            payload={"session_id": session_id},
        )
    ]


@reaction(NfKind.UPF, m.IPV6_ADDRESS_CONFIGURATION)
def upf_on_ipv6_configuration(nf, msg, now, sim):
    return [
        sim.emit(
            m.ROUTER_ADVERTISEMENT,
            nf.nf_id,
            msg.payload["ue_id"],
            run=sim.run_of(msg),
            payload={"ip_prefix": msg.payload["ip_prefix"]},
        )
    ]


# --- UDM / UDR reactions -----------------------------------------------------


@reaction(NfKind.UDM, m.SUBSCRIPTION_DATA_REQUEST)
def udm_on_subscription_request(nf, msg, now, sim):
    store = nf.state_store
    if store.backed_by:
        fwd = sim.emit(
            m.DATA_STORAGE_REQUEST,
            nf.nf_id,
            store.backed_by,
            run=sim.run_of(msg),
            payload={"query": "subscription", "ue_id": msg.payload["ue_id"]},
        )
        store.pending[fwd.msg_id] = msg
        return [fwd]
    return _udm_answer_subscription(nf, msg, sim, store.records)


@reaction(NfKind.UDM, m.SM_SUBSCRIPTION_REQUEST)
def udm_on_sm_subscription_request(nf, msg, now, sim):
    store = nf.state_store
    if store.backed_by:
        fwd = sim.emit(
            m.DATA_STORAGE_REQUEST,
            nf.nf_id,
            store.backed_by,
            run=sim.run_of(msg),
            payload={
                "query": "sm",
                "ue_id": msg.payload["ue_id"],
                "snssai": msg.payload["snssai"],
                "dn_name": msg.payload["dn_name"],
            },
        )
        store.pending[fwd.msg_id] = msg
        return [fwd]
    return _udm_answer_sm(nf, msg, sim, store.records)


@reaction(NfKind.UDM, m.DATA_STORAGE_RESPONSE)
def udm_on_data_storage_response(nf, msg, now, sim):
    original = nf.state_store.pending.pop(msg.payload["request_id"])
    records = msg.payload["records"]
    if original.name == m.SUBSCRIPTION_DATA_REQUEST:
        return _udm_answer_subscription(nf, original, sim, records)
    return _udm_answer_sm(nf, original, sim, records)


def _udm_answer_subscription(nf, msg, sim, records):
    rec = records.get(msg.payload["ue_id"])
    if rec is None:
        return [
            sim.emit(
                m.PROCEDURE_FAILURE, nf.nf_id, msg.src, run=sim.run_of(msg),
                payload={"reason": UNKNOWN_UE},
            )
        ]
    return [
        sim.emit(
            m.SUBSCRIPTION_DATA_RESPONSE, nf.nf_id, msg.src, run=sim.run_of(msg),
            payload={"subscribed": set(rec.subscribed)},
        )
    ]


def _udm_answer_sm(nf, msg, sim, records):
    rec = records.get(msg.payload["ue_id"])
    if rec is None:
        return [
            sim.emit(
                m.PROCEDURE_FAILURE, nf.nf_id, msg.src, run=sim.run_of(msg),
                payload={"reason": UNKNOWN_UE},
            )
        ]
    sm = rec.sm_data.get((msg.payload["snssai"], msg.payload["dn_name"]))
    payload = {
        "found": sm is not None,
        "dn_authorized": bool(sm and sm.dn_authorized),
        "session_types": sorted(t.value for t in sm.session_types) if sm else [],
    }
    return [
        sim.emit(
            m.SM_SUBSCRIPTION_RESPONSE, nf.nf_id, msg.src, run=sim.run_of(msg),
            payload=payload,
        )
    ]


@reaction(NfKind.UDR, m.DATA_STORAGE_REQUEST)
def udr_on_data_request(nf, msg, now, sim):
    return [
        sim.emit(
            m.DATA_STORAGE_RESPONSE, nf.nf_id, msg.src, run=sim.run_of(msg),
            payload={
                "request_id": msg.msg_id,
                "records": nf.state_store.records,
            },
        )
    ]


# --- PCF / NSSF / DN / NWDAF reactions ---------------------------------------


@reaction(NfKind.PCF, m.POLICY_RETRIEVAL)
def pcf_on_policy_retrieval(nf, msg, now, sim):
    key = (msg.payload["snssai"], msg.payload["dn_name"])
    record = nf.state_store.policies.get(key)
    payload: dict = {"found": record is not None}
    if record is not None:
        payload.update(
            policy_ref=f"pol-{msg.payload['snssai'].sd}-{msg.payload['dn_name']}",
            qos_profile=record.qos_profile,
            charging_profile=record.charging_profile,
        )
    return [
        sim.emit(
            m.POLICY_RETRIEVAL_RESPONSE, nf.nf_id, msg.src, run=sim.run_of(msg),
            payload=payload,
        )
    ]


@reaction(NfKind.NSSF, m.SLICE_SELECTION_REQUEST)
def nssf_on_slice_selection(nf, msg, now, sim):
    # Verification assist: the NSSF confirms the AMF's accepted set.
    return [
        sim.emit(
            m.SLICE_SELECTION_RESPONSE, nf.nf_id, msg.src, run=sim.run_of(msg),
            payload={"allowed": msg.payload["accepted"]},
        )
    ]


@reaction(NfKind.NSSF, m.AMF_SELECTION_REQUEST)
def nssf_on_amf_selection(nf, msg, now, sim):
    from .errors import NoServingAmf as NoServingAmfError

    amfs = [x for x in sim.world.nfs.values() if x.kind is NfKind.AMF]
    payload: dict
    try:
        chosen = select_amf(nf, set(msg.payload["allowed"]), amfs)
        payload = {"ok": True, "amf": chosen}
    except NoServingAmfError:
        payload = {"ok": False, "reason": NO_SERVING_AMF}
    return [
        sim.emit(
            m.AMF_SELECTION_RESPONSE, nf.nf_id, msg.src, run=sim.run_of(msg),
            payload=payload,
        )
    ]


@reaction(NfKind.DN, m.DN_AUTH_REQUEST)
def dn_on_auth_request(nf, msg, now, sim):
    accepted = nf.state_store.auth.get(msg.payload["dn_name"], True)
    return [
        sim.emit(
            m.DN_AUTH_RESPONSE, nf.nf_id, msg.src, run=sim.run_of(msg),
            payload={"accepted": accepted},
        )
    ]


@reaction(NfKind.NWDAF, m.ANALYTICS_REQUEST)
def nwdaf_on_analytics_request(nf, msg, now, sim):
    metrics = nf.state_store.metrics.get(msg.payload["snssai"], {})
    return [
        sim.emit(
            m.ANALYTICS_RESPONSE, nf.nf_id, msg.src, run=sim.run_of(msg),
            payload={
                "load": metrics.get("load"),
                "delay": metrics.get("delay"),
            },
        )
    ]
