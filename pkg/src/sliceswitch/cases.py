"""Classification and orchestration of the eleven inter-slice switching cases.

`classify_case` is the pure decision table; `CaseEngine` drives each case as
a small state machine layered over the procedure choreographies: it starts
procedures, gates follow-up steps on their completion and assembles the
SwitchOutcome with interruption and signaling metrics.

Sequencing rules (fixed here, asserted by the golden traces):
  * Network-triggered cases start the forced release together with the UCU
    Command (1a-1c) or as the trigger itself (1d-1f); the UE's establishment
    may begin only strictly after the release completes, modelled as a
    one-tick Proceed timer.
  * UE-initiated cases chain their steps in the same tick as the completion
    they react to, so a hand-trace of the choreography gives the
    interruption directly.
  * Tentative cases insert an explicit FinalDecision event after a
    successful Registration; nothing is released before it fires.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Optional

from . import messages as m
from .errors import (
    AllowedNssaiOverflow,
    InvalidCombination,
    MetricUndefined,
    ScenarioError,
)
from .nf import amf_can_serve
from .procedures import (
    NO_CANDIDATE_SLICE,
    Initiator,
    ProcedureKind,
    ProcedureRun,
    start_pdu_session_establishment,
    start_pdu_session_release,
    start_registration,
    start_ue_configuration_update,
)
from .slices import (
    PduSessionState,
    SNssai,
    UeContext,
    compute_allowed_nssai,
    lowest_priority_policy,
    select_alternate_snssai,
    verify_requested_nssai,
)
from .triggers import FiredTrigger, TriggerMechanism

if TYPE_CHECKING:  # pragma: no cover
    from .engine import Simulation, Timer


class CaseId(str, Enum):
    C1A = "C1a"
    C1B = "C1b"
    C1C = "C1c"
    C1D = "C1d"
    C1E = "C1e"
    C1F = "C1f"
    C2A = "C2a"
    C2B = "C2b"
    C2C = "C2c"
    C2BT = "C2bT"
    C2CT = "C2cT"


class CaseInitiator(str, Enum):
    NETWORK = "Network"
    UE = "UE"


class ReleaseTiming(str, Enum):
    IMMEDIATE = "Immediate"
    DEFERRED = "Deferred"
    NOT_APPLICABLE = "NotApplicable"


@dataclass
class SwitchingCase:
    id: CaseId
    initiator: CaseInitiator
    trigger_mech: TriggerMechanism
    target_in_allowed: bool
    needs_registration: bool
    needs_relocation: bool
    tentative: bool
    release_timing: ReleaseTiming


class SwitchResult(str, Enum):
    SWITCHED = "Switched"
    ABORTED = "Aborted"
    STAYED_ON_CURRENT = "StayedOnCurrent"


@dataclass
class SwitchOutcome:
    case_label: str
    case: SwitchingCase
    ue_id: str
    procedure_runs: list[ProcedureRun]
    old_snssai: Optional[SNssai]
    new_snssai: Optional[SNssai]
    interruption: Optional[int]
    signaling_count: dict[str, int]
    result: SwitchResult
    abort_reason: Optional[str] = None


def classify_case(
    initiator: CaseInitiator,
    trigger_mech: TriggerMechanism,
    target_in_allowed: bool,
    relocation_needed: bool,
    tentative: bool,
    release_timing: Optional[ReleaseTiming] = None,
) -> SwitchingCase:
    """Map a switching situation onto the unique matching case."""
    if tentative and (
        initiator is not CaseInitiator.UE or target_in_allowed
    ):
        raise InvalidCombination(
            "tentative switching requires a UE-initiated case whose target "
            "is not yet in the Allowed NSSAI"
        )
    if initiator is CaseInitiator.NETWORK:
        if trigger_mech is TriggerMechanism.UCU_COMMAND:
            table = (CaseId.C1A, CaseId.C1B, CaseId.C1C)
        elif trigger_mech is TriggerMechanism.NETWORK_RELEASE:
            table = (CaseId.C1D, CaseId.C1E, CaseId.C1F)
        else:
            raise InvalidCombination(
                f"network-triggered switching cannot use {trigger_mech.value}"
            )
    else:
        if trigger_mech is not TriggerMechanism.UE_DECISION:
            raise InvalidCombination(
                f"UE-initiated switching cannot use {trigger_mech.value}"
            )
        if tentative:
            table = (None, CaseId.C2BT, CaseId.C2CT)
        else:
            table = (CaseId.C2A, CaseId.C2B, CaseId.C2C)
    if target_in_allowed:
        if relocation_needed:
            raise InvalidCombination(
                "an in-allowed target cannot require AMF relocation"
            )
        case_id = table[0]
    else:
        case_id = table[2] if relocation_needed else table[1]
    definitive_ue = (
        initiator is CaseInitiator.UE and not tentative
    )
    if definitive_ue:
        timing = release_timing or ReleaseTiming.IMMEDIATE
        if timing is ReleaseTiming.NOT_APPLICABLE:
            timing = ReleaseTiming.IMMEDIATE
    else:
        timing = ReleaseTiming.NOT_APPLICABLE
    return SwitchingCase(
        id=case_id,
        initiator=initiator,
        trigger_mech=trigger_mech,
        target_in_allowed=target_in_allowed,
        needs_registration=not target_in_allowed,
        needs_relocation=relocation_needed,
        tentative=tentative,
        release_timing=timing,
    )


def measure_interruption(outcome: SwitchOutcome) -> int:
    """Service-interruption duration; defined only for completed switches."""
    if outcome.result is not SwitchResult.SWITCHED:
        raise MetricUndefined(
            f"interruption undefined for result {outcome.result.value}"
        )
    return outcome.interruption or 0


FINAL_DECISION_PREDICATES = {
    "always-switch": lambda world, execution: True,
    "never-switch": lambda world, execution: False,
}


@dataclass
class CaseExecution:
    """Mutable progress record of one case driven by the CaseEngine."""

    label: str
    case: SwitchingCase
    ue_id: str
    old_snssai: Optional[SNssai]
    target: Optional[SNssai]
    dn_name: str
    requested: set[SNssai] = field(default_factory=set)
    result: Optional[SwitchResult] = None
    abort_reason: Optional[str] = None
    new_snssai: Optional[SNssai] = None
    interruption: Optional[int] = None
    registration_started: bool = False
    establishment_started: bool = False
    ucu_expected: bool = False
    no_candidate: bool = False
    extra_message_names: list[str] = field(default_factory=list)

    @property
    def done(self) -> bool:
        return self.result is not None


# Timer names used for gated step transitions.
TIMER_PROCEED_ESTABLISHMENT = "ProceedEstablishment"
TIMER_PROCEED_REGISTRATION = "ProceedRegistration"
TIMER_FINAL_DECISION = "FinalDecision"


class CaseEngine:
    """Reacts to triggers, timers and finished runs; owns all executions."""

    def __init__(self, sim: "Simulation"):
        self.sim = sim
        self.world = sim.world
        self.executions: dict[str, CaseExecution] = {}
        self.outcomes: list[SwitchOutcome] = []
        self._case_seq = 0

    # --- trigger entry -------------------------------------------------------

    def on_trigger(self, fired: FiredTrigger, now: int) -> CaseExecution:
        spec = fired.spec
        ue = self.world.ues.get(spec.ue_id)
        if ue is None:
            raise ScenarioError(f"trigger references unknown UE {spec.ue_id}")
        # One switching case in flight per UE; scripts must space triggers.
        for execution in self.executions.values():
            if not execution.done and execution.ue_id == spec.ue_id:
                raise ScenarioError(
                    f"trigger at t={now}: case {execution.label} still in "
                    f"flight for {spec.ue_id}"
                )
        old = spec.snssai
        if fired.mechanism is TriggerMechanism.UE_DECISION:
            return self._start_ue_case(fired, ue, old, now)
        return self._start_network_case(fired, ue, old, now)

    def _policy(self, ue: UeContext):
        return lowest_priority_policy(ue.slice_priorities)

    def _pick_target(
        self, ue: UeContext, old: SNssai, pool_allowed: set[SNssai],
        pinned: Optional[SNssai],
    ) -> tuple[Optional[SNssai], bool]:
        """Choose the alternate slice and report whether it is in-allowed.

        An in-allowed candidate wins when one exists; otherwise selection
        falls back to the full subscribed/configured pool. A pinned target
        from the trigger short-circuits selection.
        """
        if pinned is not None:
            return pinned, pinned in pool_allowed
        view = ue.nssai
        in_allowed_pool = [
            s
            for s in pool_allowed
            if s != old and s.sst is ue.service_type
            and s in view.subscribed_snssais and s in view.configured
        ]
        if in_allowed_pool:
            return self._policy(ue)(sorted(in_allowed_pool, key=str)), True
        candidate = select_alternate_snssai(
            view, ue.service_type, exclude=old, policy=self._policy(ue)
        )
        return candidate, False

    def _predict_relocation(
        self, ue: UeContext, requested: set[SNssai], remove_current: bool,
        old: SNssai,
    ) -> bool:
        """Will the serving AMF be unable to serve the post-registration set?

        Uses the same pure verification the AMF will run, over the same
        subscription data, so the prediction matches the execution.
        """
        result = verify_requested_nssai(
            requested, ue.nssai.subscribed, self.world.configured
        )
        if not result.accepted:
            return False
        try:
            prospective = compute_allowed_nssai(
                ue.nssai.allowed, result.accepted, remove_current, old
            )
        except AllowedNssaiOverflow:
            return False
        amf = self.world.nfs[ue.serving_amf]
        return not amf_can_serve(amf, prospective)

    def _requested_set(
        self, ue: UeContext, old: SNssai, target: SNssai
    ) -> set[SNssai]:
        """The Requested NSSAI: everything kept from today plus the target.

        The abandoned slice is never re-requested; tentative cases retain it
        through the no-removal registration semantics instead, so a fully
        unacceptable target still fails the whole registration.
        """
        return (ue.nssai.allowed - {old}) | {target}

    def _start_ue_case(self, fired, ue, old, now) -> CaseExecution:
        spec = fired.spec
        target, in_allowed = self._pick_target(
            ue, old, pool_allowed=set(ue.nssai.allowed), pinned=spec.target
        )
        tentative = spec.tentative
        if target is None:
            execution = self._new_execution(
                classify_case(
                    CaseInitiator.UE, fired.mechanism, False, False, tentative
                ),
                ue, old, None,
            )
            self._emit_no_candidate(execution, ue)
            return execution
        timing = ReleaseTiming(spec.release_timing) if spec.release_timing \
            else ReleaseTiming(self.world.options.release_timing_default)
        requested = self._requested_set(ue, old, target)
        reloc = (
            False
            if in_allowed
            else self._predict_relocation(
                ue, requested, remove_current=not tentative, old=old
            )
        )
        case = classify_case(
            CaseInitiator.UE, fired.mechanism, in_allowed, reloc, tentative,
            release_timing=timing,
        )
        execution = self._new_execution(case, ue, old, target)
        execution.requested = requested
        if tentative:
            self._start_case_registration(execution, remove_current=False)
        elif case.release_timing is ReleaseTiming.IMMEDIATE:
            if self._start_case_release(execution, Initiator.UE) == 0:
                # Nothing to release: fall through to the next step.
                if case.needs_registration:
                    self._start_case_registration(execution, remove_current=True)
                else:
                    self._start_case_establishment(execution)
        elif in_allowed:
            self._start_case_establishment(execution)
        else:
            self._start_case_registration(execution, remove_current=True)
        return execution

    def _start_network_case(self, fired, ue, old, now) -> CaseExecution:
        spec = fired.spec
        mechanism = fired.mechanism
        # In 1d-1f the released slice stays allowed but is unavailable, so
        # the in-allowed candidate pool excludes it either way.
        target, in_allowed = self._pick_target(
            ue, old, pool_allowed=ue.nssai.allowed - {old}, pinned=spec.target
        )
        if target is not None and not in_allowed:
            requested = self._requested_set(ue, old, target)
            reloc = self._predict_relocation(
                ue, requested, remove_current=True, old=old
            )
        else:
            requested = set()
            reloc = False
        case = classify_case(
            CaseInitiator.NETWORK, mechanism, in_allowed and target is not None,
            reloc, tentative=False,
        )
        execution = self._new_execution(case, ue, old, target)
        execution.requested = requested
        if mechanism is TriggerMechanism.UCU_COMMAND:
            amf = self.world.nfs[ue.serving_amf]
            new_allowed = ue.nssai.allowed - {old}
            execution.ucu_expected = True
            start_ue_configuration_update(
                self.sim, amf, ue, new_allowed, case_label=execution.label
            )
        else:
            sessions = [
                s for s in ue.sessions_on(old)
                if s.state is PduSessionState.ACTIVE
            ]
            if not sessions:
                raise ScenarioError(
                    f"NetworkRelease trigger for {ue.ue_id} on {old}: "
                    "no active session to release"
                )
            initiator = Initiator(
                spec.release_initiator
                or self.world.options.network_release_initiator
            )
            for session in sessions:
                start_pdu_session_release(
                    self.sim, ue, session, initiator, case_label=execution.label
                )
        if target is None:
            self._emit_no_candidate(execution, ue)
        return execution

    # --- step transitions ----------------------------------------------------

    def _new_execution(self, case, ue, old, target) -> CaseExecution:
        self._case_seq += 1
        label = f"{case.id.value}#{self._case_seq}"
        dn_name = "internet"
        for session in ue.sessions_on(old) if old else []:
            dn_name = session.dn_name
        execution = CaseExecution(
            label=label,
            case=case,
            ue_id=ue.ue_id,
            old_snssai=old,
            target=target,
            dn_name=dn_name,
        )
        self.executions[label] = execution
        return execution

    def _emit_no_candidate(self, execution, ue) -> None:
        execution.no_candidate = True
        execution.abort_reason = NO_CANDIDATE_SLICE
        self.sim.emit(
            m.NO_CANDIDATE_SLICE,
            ue.ue_id,
            ue.ue_id,
            run=None,
            ue_id=ue.ue_id,
            case_label=execution.label,
            payload={"excluded": execution.old_snssai},
        )
        execution.extra_message_names.append(m.NO_CANDIDATE_SLICE)

    def _start_case_registration(self, execution, remove_current) -> None:
        ue = self.world.ues[execution.ue_id]
        execution.registration_started = True
        start_registration(
            self.sim,
            ue,
            execution.requested,
            remove_current=remove_current,
            current_active=execution.old_snssai,
            case_label=execution.label,
        )

    def _start_case_release(self, execution, initiator) -> int:
        ue = self.world.ues[execution.ue_id]
        sessions = [
            s
            for s in ue.sessions_on(execution.old_snssai)
            if s.state is PduSessionState.ACTIVE
        ]
        for session in sessions:
            start_pdu_session_release(
                self.sim, ue, session, initiator, case_label=execution.label
            )
        return len(sessions)

    def _start_case_establishment(self, execution) -> None:
        ue = self.world.ues[execution.ue_id]
        execution.establishment_started = True
        start_pdu_session_establishment(
            self.sim,
            ue,
            execution.target,
            execution.dn_name,
            case_label=execution.label,
        )

    # --- notification handling ------------------------------------------------

    def on_run_finished(self, run: ProcedureRun, now: int) -> None:
        execution = self.executions.get(run.case_label or "")
        if execution is None or execution.done:
            return
        case = execution.case
        if run.outcome == "Failure":
            if (
                run.procedure is ProcedureKind.REGISTRATION
                and case.tentative
            ):
                # Tentative safety: registration failed, the old session was
                # never touched; the UE simply stays where it is.
                self._finalize(
                    execution, SwitchResult.STAYED_ON_CURRENT, interruption=0
                )
            else:
                execution.abort_reason = run.failure_reason
                self._maybe_finalize_abort(execution)
            return
        if run.procedure is ProcedureKind.PDU_SESSION_RELEASE:
            self._on_release_done(execution, now)
        elif run.procedure is ProcedureKind.REGISTRATION:
            self._on_registration_done(execution, run, now)
        elif run.procedure is ProcedureKind.PDU_SESSION_ESTABLISHMENT:
            self._maybe_finalize_switched(execution)
        elif run.procedure is ProcedureKind.UE_CONFIGURATION_UPDATE:
            self._on_ucu_done(execution, now)

    def on_notification(self, note, now: int) -> None:
        if note.kind == "run_finished":
            self.on_run_finished(note.run, now)
        elif note.kind == "ucu_applied":
            self._on_ucu_applied(note, now)
        elif note.kind == "smf_accepted":
            self._on_smf_accepted(note, now)
        elif note.kind == "no_candidate_delivered":
            execution = self.executions.get(note.case_label or "")
            if execution is not None:
                self._maybe_finalize_abort(execution)

    def on_timer(self, timer: "Timer", now: int) -> None:
        execution = self.executions.get(timer.case_label or "")
        if execution is None or execution.done:
            return
        if execution.abort_reason is not None:
            self._maybe_finalize_abort(execution)
            return
        if timer.name == TIMER_PROCEED_ESTABLISHMENT:
            self._start_case_establishment(execution)
        elif timer.name == TIMER_PROCEED_REGISTRATION:
            self._start_case_registration(execution, remove_current=True)
        elif timer.name == TIMER_FINAL_DECISION:
            ue = self.world.ues[execution.ue_id]
            predicate = FINAL_DECISION_PREDICATES[
                self.world.options.final_decision
            ]
            # Switching requires the target in the Allowed NSSAI; a
            # registration that was accepted without granting the target
            # leaves the UE where it is.
            granted = execution.target in ue.nssai.allowed
            if granted and predicate(self.world, execution):
                if self._start_case_release(execution, Initiator.UE) == 0:
                    self._start_case_establishment(execution)
            else:
                self._finalize(
                    execution, SwitchResult.STAYED_ON_CURRENT, interruption=0
                )

    def _on_ucu_applied(self, note, now: int) -> None:
        execution = self.executions.get(note.run.case_label or "")
        if execution is None or execution.done or execution.no_candidate:
            return
        if execution.abort_reason is not None:
            return
        # Cases 1b/1c: the UE reacts to the Command by registering for the
        # alternate it chose outside the allowed set.
        if execution.case.needs_registration and not execution.registration_started:
            self._start_case_registration(execution, remove_current=True)

    def _on_smf_accepted(self, note, now: int) -> None:
        execution = self.executions.get(note.run.case_label or "")
        if execution is None or execution.done:
            return
        case = execution.case
        if (
            case.initiator is CaseInitiator.UE
            and case.release_timing is ReleaseTiming.DEFERRED
            and case.id is CaseId.C2A
        ):
            # Deferred 2a: the network releases the old session once the new
            # one is accepted by the SMF.
            self._start_case_release(execution, Initiator.AMF)

    def _on_ucu_done(self, execution, now: int) -> None:
        # A UCU that orphaned no session (pure allowed-set shrink with the
        # alternate already allowed) gates establishment on itself.
        if (
            execution.case.id is CaseId.C1A
            and not self.world.case_runs(
                execution.label, ProcedureKind.PDU_SESSION_RELEASE
            )
        ):
            self._schedule_network_gate(execution, TIMER_PROCEED_ESTABLISHMENT)

    def _on_release_done(self, execution, now: int) -> None:
        if not self._releases_settled(execution):
            return
        case = execution.case
        if execution.no_candidate or execution.abort_reason is not None:
            self._maybe_finalize_abort(execution)
            return
        if case.initiator is CaseInitiator.NETWORK:
            if case.needs_registration and not execution.registration_started:
                if case.trigger_mech is TriggerMechanism.NETWORK_RELEASE:
                    # 1e/1f: registration happens only after the enforced
                    # release; one tick models the UE learning the outcome.
                    self._schedule_network_gate(
                        execution, TIMER_PROCEED_REGISTRATION
                    )
                return
            if not execution.establishment_started:
                if self._registration_settled(execution):
                    self._schedule_network_gate(
                        execution, TIMER_PROCEED_ESTABLISHMENT
                    )
                return
            self._maybe_finalize_switched(execution)
        else:
            if case.tentative or case.release_timing is ReleaseTiming.IMMEDIATE:
                if case.needs_registration and not execution.registration_started:
                    self._start_case_registration(
                        execution, remove_current=not case.tentative
                    )
                elif not execution.establishment_started:
                    self._start_case_establishment(execution)
                else:
                    self._maybe_finalize_switched(execution)
            else:
                if (
                    not execution.establishment_started
                    and self._registration_settled(execution)
                ):
                    self._start_case_establishment(execution)
                else:
                    self._maybe_finalize_switched(execution)

    def _on_registration_done(self, execution, run, now: int) -> None:
        case = execution.case
        if case.tentative:
            # The UE decides only after a successful Registration; the
            # decision is a visible event in the trace.
            self.sim.schedule_timer(
                TIMER_FINAL_DECISION, now, execution.label, execution.ue_id
            )
            return
        if execution.establishment_started:
            return
        if self._releases_settled(execution):
            self._start_case_establishment(execution)
        # otherwise the release-done handler picks up from here

    def _schedule_network_gate(self, execution, timer_name: str) -> None:
        self.sim.schedule_timer(
            timer_name, self.sim.clock + 1, execution.label, execution.ue_id
        )

    def _releases_settled(self, execution) -> bool:
        releases = self.world.case_runs(
            execution.label, ProcedureKind.PDU_SESSION_RELEASE
        )
        return all(not r.in_flight for r in releases)

    def _registration_settled(self, execution) -> bool:
        regs = self.world.case_runs(
            execution.label, ProcedureKind.REGISTRATION
        )
        return all(not r.in_flight for r in regs)

    # --- finalization ----------------------------------------------------------

    def _all_runs_settled(self, execution) -> bool:
        return all(
            not r.in_flight for r in self.world.case_runs(execution.label)
        )

    def _maybe_finalize_abort(self, execution) -> None:
        if execution.done:
            return
        if not self._all_runs_settled(execution):
            return
        if execution.no_candidate and execution.abort_reason is None:
            execution.abort_reason = NO_CANDIDATE_SLICE
        self._finalize(execution, SwitchResult.ABORTED, interruption=None)

    def _maybe_finalize_switched(self, execution) -> None:
        if execution.done or execution.abort_reason is not None:
            return
        est_runs = self.world.case_runs(
            execution.label, ProcedureKind.PDU_SESSION_ESTABLISHMENT
        )
        if not est_runs or any(r.in_flight for r in est_runs):
            return
        if not self._releases_settled(execution):
            return
        est_done = max(r.finished_at for r in est_runs)
        releases = [
            r
            for r in self.world.case_runs(
                execution.label, ProcedureKind.PDU_SESSION_RELEASE
            )
            if r.outcome == "Success"
        ]
        release_done = max(
            (r.finished_at for r in releases), default=est_done
        )
        execution.new_snssai = est_runs[-1].target_snssai
        interruption = max(0, est_done - release_done)
        self._finalize(execution, SwitchResult.SWITCHED, interruption)

    def _finalize(self, execution, result, interruption) -> None:
        execution.result = result
        execution.interruption = interruption
        runs = sorted(
            self.world.case_runs(execution.label),
            key=lambda r: (r.started_at, int(r.run_id.split("-")[1])),
        )
        counts: dict[str, int] = {}
        for run in runs:
            for name in run.message_names:
                counts[name] = counts.get(name, 0) + 1
        for name in execution.extra_message_names:
            counts[name] = counts.get(name, 0) + 1
        self.outcomes.append(
            SwitchOutcome(
                case_label=execution.label,
                case=execution.case,
                ue_id=execution.ue_id,
                procedure_runs=runs,
                old_snssai=execution.old_snssai,
                new_snssai=execution.new_snssai,
                interruption=execution.interruption,
                signaling_count=counts,
                result=result,
                abort_reason=execution.abort_reason,
            )
        )

    def pending_executions(self) -> list[CaseExecution]:
        return [e for e in self.executions.values() if not e.done]


def execute_case(
    sim: "Simulation",
    case: SwitchingCase,
    ue: UeContext,
    old_snssai: Optional[SNssai],
    target: Optional[SNssai],
) -> SwitchOutcome:
    """Drive one pre-classified case to completion and return its outcome."""
    engine = sim.case_engine
    execution = engine._new_execution(case, ue, old_snssai, target)
    if target is not None:
        execution.requested = engine._requested_set(ue, old_snssai, target)
    if case.initiator is CaseInitiator.NETWORK:
        if case.trigger_mech is TriggerMechanism.UCU_COMMAND:
            amf = sim.world.nfs[ue.serving_amf]
            execution.ucu_expected = True
            if not case.needs_registration:
                execution.requested = set()
            start_ue_configuration_update(
                sim, amf, ue, ue.nssai.allowed - {old_snssai},
                case_label=execution.label,
            )
        else:
            initiator = Initiator(sim.world.options.network_release_initiator)
            for session in ue.sessions_on(old_snssai):
                if session.state is PduSessionState.ACTIVE:
                    start_pdu_session_release(
                        sim, ue, session, initiator, case_label=execution.label
                    )
    elif case.tentative:
        engine._start_case_registration(execution, remove_current=False)
    elif case.release_timing is ReleaseTiming.IMMEDIATE:
        if engine._start_case_release(execution, Initiator.UE) == 0:
            if case.needs_registration:
                engine._start_case_registration(execution, remove_current=True)
            else:
                engine._start_case_establishment(execution)
    elif case.target_in_allowed:
        engine._start_case_establishment(execution)
    else:
        engine._start_case_registration(execution, remove_current=True)
    sim.run_until(lambda: execution.done)
    return next(
        o for o in engine.outcomes if o.case_label == execution.label
    )
