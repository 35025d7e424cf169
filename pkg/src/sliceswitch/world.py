"""Shared simulation state: UEs, NF instances, runs and invariant checks."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Optional

from .nf import NfInstance, NfKind, amf_can_serve
from .procedures import ProcedureKind, ProcedureRun
from .slices import PduSessionState, SNssai, UeContext


class LatencyModel:
    """Per-link delivery latency in ticks; self-messages are instantaneous."""

    def __init__(
        self,
        default: int = 1,
        overrides: Optional[dict[tuple[str, str], int]] = None,
    ):
        self.default = default
        self.overrides = overrides or {}

    def latency(self, src: str, dst: str) -> int:
        if src == dst:
            return self.overrides.get((src, dst), 0)
        return self.overrides.get((src, dst), self.default)


@dataclass
class Directory:
    """Static NF routing table; NRF-style discovery is out of scope."""

    amf_ids: list[str] = field(default_factory=list)
    smf_for: dict[SNssai, str] = field(default_factory=dict)
    upfs_for: dict[SNssai, list[str]] = field(default_factory=dict)
    udm: str = ""
    pcf: str = ""
    nssf: str = ""
    ran: str = ""
    dn: str = ""
    udr: Optional[str] = None
    nwdaf: Optional[str] = None


@dataclass
class SimOptions:
    nssf_assist: bool = False
    invariant_checks: bool = True
    final_decision: str = "always-switch"
    release_timing_default: str = "Immediate"
    deferred_release_order: str = "before_accept"
    network_release_initiator: str = "SMF"
    max_events: int = 100_000


@dataclass
class Notification:
    """Cross-cutting signal from an NF reaction to the case orchestration."""

    kind: str
    run: Optional[ProcedureRun] = None
    ue_id: Optional[str] = None
    case_label: Optional[str] = None
    data: dict[str, Any] = field(default_factory=dict)


class World:
    """All mutable state of one simulation run."""

    def __init__(self, configured: set[SNssai], options: SimOptions):
        self.configured = configured
        self.options = options
        self.ues: dict[str, UeContext] = {}
        self.nfs: dict[str, NfInstance] = {}
        self.directory = Directory()
        self.runs: dict[str, ProcedureRun] = {}
        self.notifications: deque[Notification] = deque()
        self.sim = None  # set by the owning Simulation
        self._run_seq = 0
        self._session_seq: dict[str, int] = {}

    def add_nf(self, nf: NfInstance) -> None:
        nf.world = self
        self.nfs[nf.nf_id] = nf

    def add_ue(self, ue: UeContext) -> None:
        self.ues[ue.ue_id] = ue

    def next_run_id(self) -> str:
        self._run_seq += 1
        return f"pr-{self._run_seq}"

    def next_session_id(self, ue_id: str) -> str:
        n = self._session_seq.get(ue_id, 0) + 1
        self._session_seq[ue_id] = n
        return f"{ue_id}-s{n}"

    def case_runs(
        self, case_label: str, procedure: Optional[ProcedureKind] = None
    ) -> list[ProcedureRun]:
        runs = [
            r for r in self.runs.values() if r.case_label == case_label
        ]
        if procedure is not None:
            runs = [r for r in runs if r.procedure is procedure]
        return runs

    def max_upfs_per_slice(self) -> int:
        return max(
            (len(v) for v in self.directory.upfs_for.values()), default=1
        )

    def session_in_release_window(self, session_id: str) -> bool:
        return any(
            r.procedure is ProcedureKind.PDU_SESSION_RELEASE
            and r.session_id == session_id
            and r.in_flight
            for r in self.runs.values()
        )

    # --- invariant checking -------------------------------------------------

    def invariant_violations(self) -> list[str]:
        """Every structural invariant, checked against the current state."""
        problems: list[str] = []
        for ue in self.ues.values():
            for p in ue.nssai.violations():
                problems.append(f"ue {ue.ue_id}: {p}")
            amf = self.nfs.get(ue.serving_amf)
            if amf is None or amf.kind is not NfKind.AMF:
                problems.append(
                    f"ue {ue.ue_id}: serving AMF {ue.serving_amf} missing"
                )
            elif not amf_can_serve(amf, ue.nssai.allowed):
                problems.append(
                    f"ue {ue.ue_id}: serving AMF {amf.nf_id} cannot serve "
                    "the allowed set"
                )
            for session in ue.sessions.values():
                p = session.prefix_violation()
                if p:
                    problems.append(f"ue {ue.ue_id}: {p}")
                if session.state is PduSessionState.ACTIVE:
                    if session.snssai.sst is not ue.service_type:
                        problems.append(
                            f"ue {ue.ue_id}: active session "
                            f"{session.session_id} on foreign service type "
                            f"{session.snssai.sst.value}"
                        )
                    if (
                        session.snssai not in ue.nssai.allowed
                        and not self.session_in_release_window(
                            session.session_id
                        )
                    ):
                        problems.append(
                            f"ue {ue.ue_id}: active session "
                            f"{session.session_id} on slice {session.snssai} "
                            "outside the allowed set with no release pending"
                        )
        problems.extend(self._resource_violations())
        for run in self.runs.values():
            if run.finished_at is not None and run.finished_at < run.started_at:
                problems.append(f"run {run.run_id}: finished before it started")
        return problems

    def _session_state(self, session_id: str) -> Optional[PduSessionState]:
        for ue in self.ues.values():
            session = ue.sessions.get(session_id)
            if session is not None:
                return session.state
        return None

    def _resource_violations(self) -> list[str]:
        live = (
            PduSessionState.ESTABLISHING,
            PduSessionState.ACTIVE,
            PduSessionState.RELEASING,
        )
        problems = []
        for nf in self.nfs.values():
            if nf.kind is NfKind.UPF:
                for session_id in nf.state_store.n4_sessions:
                    state = self._session_state(session_id)
                    if state not in live:
                        problems.append(
                            f"upf {nf.nf_id}: N4 session for {session_id} "
                            f"but session state is {state}"
                        )
            elif nf.kind is NfKind.SMF:
                for (session_id, _upf) in nf.state_store.n4_sessions:
                    state = self._session_state(session_id)
                    if state not in live:
                        problems.append(
                            f"smf {nf.nf_id}: N4 session for {session_id} "
                            f"but session state is {state}"
                        )
            elif nf.kind is NfKind.RAN:
                for session_id in nf.state_store.resources:
                    state = self._session_state(session_id)
                    if state not in live:
                        problems.append(
                            f"ran {nf.nf_id}: resource held for {session_id} "
                            f"but session state is {state}"
                        )
        # Active sessions must be fully plumbed on their user plane.
        for ue in self.ues.values():
            for session in ue.sessions.values():
                if session.state is not PduSessionState.ACTIVE:
                    continue
                for upf_id in session.upfs:
                    upf = self.nfs[upf_id]
                    if session.session_id not in upf.state_store.n4_sessions:
                        problems.append(
                            f"session {session.session_id} active without an "
                            f"N4 session at {upf_id}"
                        )
        return problems

    def resources_for_session(self, session_id: str) -> dict[str, int]:
        """Count live resources attributable to one session (for tests)."""
        n4 = 0
        ran = 0
        for nf in self.nfs.values():
            if nf.kind is NfKind.UPF:
                n4 += 1 if session_id in nf.state_store.n4_sessions else 0
            elif nf.kind is NfKind.SMF:
                n4 += sum(
                    1
                    for (sid, _u) in nf.state_store.n4_sessions
                    if sid == session_id
                )
            elif nf.kind is NfKind.RAN:
                ran += 1 if session_id in nf.state_store.resources else 0
        prefixes = 0
        for ue in self.ues.values():
            session = ue.sessions.get(session_id)
            if session is not None and session.ip_prefix:
                prefixes = 1
        return {"n4": n4, "ran": ran, "prefixes": prefixes}
