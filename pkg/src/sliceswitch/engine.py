"""Deterministic discrete-event core: clock, queue, message bus and traces.

Time is integer ticks. Events are totally ordered by (at, seq) where seq is
assigned at scheduling time, so identical scenarios replay identically.
Message latency comes from the scenario's link matrix (default one tick per
NF-to-NF hop, zero for an NF talking to itself).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Optional

from . import messages as m
from .cases import CaseEngine, SwitchOutcome
from .errors import SchedulingError, SimError, SimInvariantError
from .messages import SignalingMessage
from .nf import nf_handle
from .procedures import Initiator, ProcedureKind, ProcedureRun
from .trace import TraceLine
from .triggers import FiredTrigger
from .world import LatencyModel, World


class EventKind(str, Enum):
    MESSAGE_DELIVERY = "MessageDelivery"
    TRIGGER_FIRE = "TriggerFire"
    TIMER_EXPIRY = "TimerExpiry"


@dataclass
class Timer:
    name: str
    case_label: Optional[str] = None
    ue_id: Optional[str] = None


@dataclass
class SimEvent:
    seq: int
    at: int
    kind: EventKind
    payload: Any


# Static per-procedure message ceilings (with U = most UPFs on one slice);
# exceeding one means a choreography is looping. Documented alongside the
# golden traces.
def procedure_message_bound(kind: ProcedureKind, max_upfs: int) -> int:
    if kind is ProcedureKind.UE_CONFIGURATION_UPDATE:
        return 2
    if kind is ProcedureKind.REGISTRATION:
        return 9
    if kind is ProcedureKind.PDU_SESSION_RELEASE:
        return 6 + 2 * max_upfs
    return 15 + 2 * max_upfs


# First-occurrence order required on every successful establishment: DN
# auth, policy, user plane, address allocation, SM configuration.
_ESTABLISHMENT_STEP_ORDER = [
    m.DN_AUTH_REQUEST,
    m.POLICY_RETRIEVAL,
    m.N4_SESSION_ESTABLISHMENT,
    m.IP_ADDRESS_ALLOCATION,
    m.SM_PARAMETER_CONFIGURATION,
]


class Simulation:
    """Single-threaded event loop over one World."""

    def __init__(self, world: World, latency: Optional[LatencyModel] = None):
        self.world = world
        world.sim = self
        self.clock = 0
        self.trace: list[TraceLine] = []
        self.processed = 0
        self._heap: list[tuple[int, int, SimEvent]] = []
        self._seq = 0
        self._msg_seq = 0
        self._latency = latency or LatencyModel()
        self.case_engine = CaseEngine(self)

    # --- scheduling -----------------------------------------------------------

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def schedule(self, at: int, kind: EventKind, payload: Any) -> SimEvent:
        if at < self.clock:
            raise SchedulingError(
                f"cannot schedule {kind.value} at t={at}; clock is {self.clock}"
            )
        event = SimEvent(seq=self._next_seq(), at=at, kind=kind, payload=payload)
        heapq.heappush(self._heap, (at, event.seq, event))
        return event

    def schedule_timer(
        self, name: str, at: int, case_label: Optional[str],
        ue_id: Optional[str],
    ) -> SimEvent:
        return self.schedule(
            at, EventKind.TIMER_EXPIRY, Timer(name, case_label, ue_id)
        )

    def schedule_trigger(self, fired: FiredTrigger) -> SimEvent:
        return self.schedule(fired.spec.fire_at, EventKind.TRIGGER_FIRE, fired)

    def emit(
        self,
        name: str,
        src: str,
        dst: str,
        run: Optional[ProcedureRun],
        payload: Optional[dict] = None,
        ue_id: Optional[str] = None,
        case_label: Optional[str] = None,
    ) -> SignalingMessage:
        """Mint one signaling message and schedule its delivery."""
        self._msg_seq += 1
        delivered_at = self.clock + self._latency.latency(src, dst)
        msg = SignalingMessage(
            msg_id=self._msg_seq,
            name=name,
            src=src,
            dst=dst,
            sent_at=self.clock,
            delivered_at=delivered_at,
            correlates=run.run_id if run else None,
            ue_id=ue_id or (run.ue_id if run else None),
            case_label=case_label or (run.case_label if run else None),
            proc_name=run.procedure.value if run else None,
            payload=payload or {},
        )
        assert msg.delivered_at >= msg.sent_at
        self.schedule(delivered_at, EventKind.MESSAGE_DELIVERY, msg)
        return msg

    # --- procedure-run bookkeeping ---------------------------------------------

    def new_run(
        self,
        procedure: ProcedureKind,
        initiator: Initiator,
        ue_id: str,
        case_label: Optional[str] = None,
        target_snssai=None,
        session_id: Optional[str] = None,
    ) -> ProcedureRun:
        run = ProcedureRun(
            run_id=self.world.next_run_id(),
            procedure=procedure,
            initiator=initiator,
            ue_id=ue_id,
            started_at=self.clock,
            case_label=case_label,
            target_snssai=target_snssai,
            session_id=session_id,
        )
        self.world.runs[run.run_id] = run
        return run

    def run_of(self, msg: SignalingMessage) -> Optional[ProcedureRun]:
        if msg.correlates is None:
            return None
        return self.world.runs[msg.correlates]

    def finish_run(
        self, run: ProcedureRun, success: bool, reason: Optional[str] = None
    ) -> None:
        if run is None or not run.in_flight:
            raise SimError(f"run already finished: {run}")
        run.outcome = "Success" if success else "Failure"
        run.failure_reason = reason
        run.finished_at = self.clock
        if (
            success
            and run.procedure is ProcedureKind.PDU_SESSION_ESTABLISHMENT
            and self.world.options.invariant_checks
        ):
            self._assert_establishment_order(run)
        self.notify("run_finished", run=run, ue_id=run.ue_id)

    def _assert_establishment_order(self, run: ProcedureRun) -> None:
        positions = []
        for step in _ESTABLISHMENT_STEP_ORDER:
            try:
                positions.append(run.message_names.index(step))
            except ValueError:
                raise SimInvariantError(
                    "establishment step order",
                    self._seq,
                    f"run {run.run_id} missing step {step}",
                ) from None
        if positions != sorted(positions):
            raise SimInvariantError(
                "establishment step order",
                self._seq,
                f"run {run.run_id} steps out of order: {positions}",
            )

    def notify(self, kind: str, run=None, ue_id=None, case_label=None, **data):
        from .world import Notification

        self.world.notifications.append(
            Notification(
                kind=kind, run=run, ue_id=ue_id, case_label=case_label,
                data=data,
            )
        )

    # --- event loop -------------------------------------------------------------

    @property
    def pending_events(self) -> int:
        return len(self._heap)

    def advance(self) -> SimEvent:
        """Process exactly one event and append it to the trace."""
        if not self._heap:
            raise SimError("advance() on an empty event queue")
        _at, _seq, event = heapq.heappop(self._heap)
        assert event.at >= self.clock
        self.clock = event.at
        self.processed += 1
        if self.processed > self.world.options.max_events:
            raise SimError(
                f"event budget of {self.world.options.max_events} exceeded; "
                "a choreography is likely looping"
            )
        trigger_label = None
        if event.kind is EventKind.MESSAGE_DELIVERY:
            self._deliver(event.payload)
        elif event.kind is EventKind.TRIGGER_FIRE:
            execution = self.case_engine.on_trigger(event.payload, self.clock)
            trigger_label = execution.label if execution else None
        else:
            self.case_engine.on_timer(event.payload, self.clock)
        self._drain_notifications()
        self.trace.append(self._trace_line(event, trigger_label))
        if self.world.options.invariant_checks:
            violations = self.world.invariant_violations()
            if violations:
                raise SimInvariantError(violations[0], event.seq)
        return event

    def _deliver(self, msg: SignalingMessage) -> None:
        run = self.run_of(msg)
        if run is not None:
            run.message_count += 1
            run.message_names.append(msg.name)
            bound = procedure_message_bound(
                run.procedure, self.world.max_upfs_per_slice()
            )
            if run.message_count > bound:
                raise SimInvariantError(
                    "choreography message bound",
                    self._seq,
                    f"run {run.run_id} ({run.procedure.value}) exceeded "
                    f"{bound} messages",
                )
        nf = self.world.nfs.get(msg.dst)
        if nf is None:
            raise SimError(f"message {msg.msg_id} addressed to unknown NF {msg.dst}")
        nf_handle(nf, msg, self.clock)

    def _drain_notifications(self) -> None:
        while self.world.notifications:
            note = self.world.notifications.popleft()
            self.case_engine.on_notification(note, self.clock)

    def _trace_line(
        self, event: SimEvent, trigger_label: Optional[str] = None
    ) -> TraceLine:
        if event.kind is EventKind.MESSAGE_DELIVERY:
            msg = event.payload
            return TraceLine(
                seq=event.seq, at=event.at, kind=event.kind.value,
                name=msg.name, src=msg.src, dst=msg.dst,
                ue=msg.ue_id or "-", case=msg.case_label or "-",
                proc=msg.proc_name or "-",
            )
        if event.kind is EventKind.TRIGGER_FIRE:
            fired = event.payload
            return TraceLine(
                seq=event.seq, at=event.at, kind=event.kind.value,
                name=fired.spec.trigger_name.value, src="-", dst="-",
                ue=fired.spec.ue_id, case=trigger_label or "-", proc="-",
            )
        timer = event.payload
        return TraceLine(
            seq=event.seq, at=event.at, kind=event.kind.value,
            name=timer.name, src="-", dst="-",
            ue=timer.ue_id or "-", case=timer.case_label or "-", proc="-",
        )

    def run_until(self, predicate: Callable[[], bool]) -> None:
        while not predicate():
            if not self._heap:
                raise SimError("event queue drained before condition was met")
            self.advance()

    def run_to_completion(self) -> None:
        while self._heap:
            self.advance()


@dataclass
class RunResult:
    trace: list[TraceLine]
    metrics_csv: str
    outcomes: list[SwitchOutcome]
    sim: Simulation


def run_scenario(scenario, seed: int = 0, check_invariants: Optional[bool] = None) -> RunResult:
    """Execute one scenario deterministically: same inputs, same bytes out."""
    from .metrics import build_report_csv
    from .scenario import build_world

    world, script, latency = build_world(scenario, seed)
    if check_invariants is not None:
        world.options.invariant_checks = check_invariants
    sim = Simulation(world, latency)
    for spec in script:
        sim.schedule_trigger(
            FiredTrigger(spec=spec, mechanism=spec.resolved_mechanism())
        )
    sim.run_to_completion()
    pending = sim.case_engine.pending_executions()
    if pending:
        raise SimError(
            "simulation drained with unfinished cases: "
            + ", ".join(e.label for e in pending)
        )
    metrics_csv = build_report_csv(
        scenario_name=scenario.name,
        options=world.options,
        outcomes=sim.case_engine.outcomes,
    )
    return RunResult(
        trace=sim.trace,
        metrics_csv=metrics_csv,
        outcomes=sim.case_engine.outcomes,
        sim=sim,
    )
