"""Network function instances, their per-kind state and message dispatch.

Each NF is a message-driven state machine: `nf_handle` looks up the reaction
registered for (kind, message name), runs it against the instance's state
store and returns the outbound messages. Reactions are registered by the
procedures module, which owns the choreography logic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, Callable, Optional

from . import messages as m
from .errors import NoServingAmf
from .messages import SignalingMessage
from .slices import SessionType, SNssai, Subscription

if TYPE_CHECKING:  # pragma: no cover
    from .engine import Simulation


class NfKind(str, Enum):
    AMF = "AMF"
    SMF = "SMF"
    NSSF = "NSSF"
    UDM = "UDM"
    UDR = "UDR"
    PCF = "PCF"
    UPF = "UPF"
    NWDAF = "NWDAF"
    RAN = "RAN"
    DN = "DN"
    UE = "UE"


@dataclass
class SubscriptionRecord:
    """Per-UE subscription data held by the UDM (or a backing UDR)."""

    ue_id: str
    subscribed: set[Subscription] = field(default_factory=set)
    # (snssai, dn) -> session-management record
    sm_data: dict[tuple[SNssai, str], "SmRecord"] = field(default_factory=dict)


@dataclass
class SmRecord:
    session_types: set[SessionType] = field(
        default_factory=lambda: set(SessionType)
    )
    dn_authorized: bool = True


@dataclass
class PolicyRecord:
    qos_profile: str
    charging_profile: str


@dataclass
class N4Session:
    """SMF-UPF control association for one PDU session."""

    session_id: str
    smf: str
    upf: str
    rules: dict[str, str] = field(default_factory=dict)

    @classmethod
    def with_default_rules(cls, session_id: str, smf: str, upf: str) -> "N4Session":
        return cls(
            session_id=session_id,
            smf=smf,
            upf=upf,
            rules={
                "detection": f"pdr-{session_id}",
                "enforcement": f"fer-{session_id}",
                "reporting": f"urr-{session_id}",
            },
        )


# --- kind-specific state stores -------------------------------------------


@dataclass
class AmfState:
    registrations: dict[str, Any] = field(default_factory=dict)  # run_id -> ctx


@dataclass
class SmfState:
    establishments: dict[str, Any] = field(default_factory=dict)  # session -> ctx
    releases: dict[str, Any] = field(default_factory=dict)  # session -> ctx
    n4_sessions: dict[tuple[str, str], N4Session] = field(default_factory=dict)


@dataclass
class UpfState:
    n4_sessions: dict[str, N4Session] = field(default_factory=dict)


@dataclass
class RanState:
    resources: set[str] = field(default_factory=set)  # session ids


@dataclass
class UdmState:
    records: dict[str, SubscriptionRecord] = field(default_factory=dict)
    backed_by: Optional[str] = None  # UDR id when data lives in a UDR
    pending: dict[int, SignalingMessage] = field(default_factory=dict)


@dataclass
class UdrState:
    records: dict[str, SubscriptionRecord] = field(default_factory=dict)


@dataclass
class PcfState:
    policies: dict[tuple[SNssai, str], PolicyRecord] = field(default_factory=dict)


@dataclass
class DnState:
    # dn_name -> scenario-controlled accept/deny answer
    auth: dict[str, bool] = field(default_factory=dict)


@dataclass
class NssfState:
    pass


@dataclass
class NwdafState:
    # Stub data source: per-slice load/delay scalars written by the scenario.
    metrics: dict[SNssai, dict[str, float]] = field(default_factory=dict)


@dataclass
class UeNfState:
    ue_id: str = ""


_STATE_FACTORIES = {
    NfKind.AMF: AmfState,
    NfKind.SMF: SmfState,
    NfKind.UPF: UpfState,
    NfKind.RAN: RanState,
    NfKind.UDM: UdmState,
    NfKind.UDR: UdrState,
    NfKind.PCF: PcfState,
    NfKind.DN: DnState,
    NfKind.NSSF: NssfState,
    NfKind.NWDAF: NwdafState,
    NfKind.UE: UeNfState,
}


@dataclass
class NfInstance:
    nf_id: str
    kind: NfKind
    serving_snssais: set[SNssai] = field(default_factory=set)
    state_store: Any = None
    world: Any = None  # backref set when the world is assembled

    def __post_init__(self) -> None:
        if self.state_store is None:
            self.state_store = _STATE_FACTORIES[self.kind]()


def amf_can_serve(amf: NfInstance, allowed: set[SNssai]) -> bool:
    """True iff the AMF can serve every slice in the given Allowed NSSAI."""
    assert amf.kind is NfKind.AMF
    return allowed <= amf.serving_snssais


def select_amf(
    nssf: NfInstance, allowed: set[SNssai], amfs: list[NfInstance]
) -> str:
    """NSSF-side AMF selection: first qualifying AMF in id order."""
    if not amfs:
        raise NoServingAmf("no AMF instances declared")
    for amf in sorted(amfs, key=lambda a: a.nf_id):
        if amf_can_serve(amf, allowed):
            return amf.nf_id
    raise NoServingAmf(
        f"no AMF can serve allowed set of {len(allowed)} slices"
    )


# --- reaction registry -----------------------------------------------------

Reaction = Callable[
    [NfInstance, SignalingMessage, int, "Simulation"], list[SignalingMessage]
]

_REACTIONS: dict[tuple[NfKind, str], Reaction] = {}


def reaction(kind: NfKind, msg_name: str):
    """Register the handler an NF kind runs for one message name."""

    def register(fn: Reaction) -> Reaction:
        key = (kind, msg_name)
        if key in _REACTIONS:
            raise RuntimeError(f"duplicate reaction for {key}")
        _REACTIONS[key] = fn
        return fn

    return register


def nf_handle(
    nf: NfInstance, msg: SignalingMessage, now: int
) -> list[SignalingMessage]:
    """Dispatch one delivered message to the NF's state machine.

    Returns the outbound messages the NF emits in response (already
    scheduled by the owning simulation). An unknown message produces a
    ProcedureFailure back to the originator.
    """
    if msg.dst != nf.nf_id:
        raise ValueError(f"message {msg.msg_id} addressed to {msg.dst}, "
                         f"handled by {nf.nf_id}")
    sim = nf.world.sim
    handler = _REACTIONS.get((nf.kind, msg.name))
    if handler is None:
        return [
            sim.emit(
                m.PROCEDURE_FAILURE,
                nf.nf_id,
                msg.src,
                run=None,
                ue_id=msg.ue_id,
                case_label=msg.case_label,
                payload={"reason": "UnknownMessage", "offending": msg.name},
            )
        ]
    return handler(nf, msg, now, sim)
