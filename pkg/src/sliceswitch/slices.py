"""Slice identities, per-UE NSSAI sets and PDU session state machines.

Everything in this module is a plain value type plus pure functions; all
mutation happens inside the single-threaded event loop that owns the objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional

from .errors import AllowedNssaiOverflow, InvalidRequest, InvalidSessionState

# A UE can access a maximum of eight slices simultaneously.
MAX_ALLOWED_SLICES = 8


class ServiceType(str, Enum):
    URLLC = "URLLC"
    V2X = "V2X"
    EMBB = "eMBB"
    MIOT = "MIoT"


@dataclass(frozen=True)
class SNssai:
    """Single network slice identity: service type plus slice differentiator.

    (sst, sd) pairs are unique within one simulated PLMN; the sd is an opaque
    short token.
    """

    sst: ServiceType
    sd: str

    def __str__(self) -> str:
        return f"{self.sst.value}:{self.sd}"

    @classmethod
    def parse(cls, token: str) -> "SNssai":
        """Parse the canonical '<sst>:<sd>' string form, e.g. 'eMBB:0a'."""
        try:
            sst, sd = token.split(":", 1)
        except ValueError:
            raise InvalidRequest(f"malformed S-NSSAI token {token!r}") from None
        if not sd:
            raise InvalidRequest(f"malformed S-NSSAI token {token!r}")
        try:
            return cls(ServiceType(sst), sd)
        except ValueError:
            raise InvalidRequest(f"unknown service type in {token!r}") from None


def snssai_key(snssai: SNssai) -> tuple[str, str]:
    """Canonical sort key so set-valued fields render deterministically."""
    return (snssai.sst.value, snssai.sd)


def format_snssai_set(snssais: Iterable[SNssai]) -> str:
    return "{" + ",".join(str(s) for s in sorted(snssais, key=snssai_key)) + "}"


@dataclass(frozen=True)
class Subscription:
    """One subscribed S-NSSAI and whether it is a default slice for the UE."""

    snssai: SNssai
    is_default: bool = False


class RejectReason(str, Enum):
    NOT_SUBSCRIBED = "NotSubscribed"
    NOT_CONFIGURED = "NotConfigured"


@dataclass
class VerificationResult:
    accepted: set[SNssai]
    rejected: set[tuple[SNssai, RejectReason]]


@dataclass
class NssaiView:
    """The four NSSAI sets a UE carries.

    Invariants (checked by :meth:`violations`):
      * allowed is a subset of configured,
      * every allowed S-NSSAI is subscribed,
      * allowed holds at most eight slices,
      * at least one subscription is marked default.
    """

    configured: set[SNssai]
    subscribed: set[Subscription]
    allowed: set[SNssai]
    requested: Optional[set[SNssai]] = None

    @property
    def subscribed_snssais(self) -> set[SNssai]:
        return {sub.snssai for sub in self.subscribed}

    def violations(self) -> list[str]:
        problems = []
        if not self.allowed <= self.configured:
            extra = format_snssai_set(self.allowed - self.configured)
            problems.append(f"allowed not subset of configured: {extra}")
        if not self.allowed <= self.subscribed_snssais:
            extra = format_snssai_set(self.allowed - self.subscribed_snssais)
            problems.append(f"allowed contains unsubscribed slices: {extra}")
        if len(self.allowed) > MAX_ALLOWED_SLICES:
            problems.append(
                f"allowed holds {len(self.allowed)} slices, "
                f"maximum is {MAX_ALLOWED_SLICES}"
            )
        if not any(sub.is_default for sub in self.subscribed):
            problems.append("no subscribed S-NSSAI is marked default")
        return problems


class SessionType(str, Enum):
    IP = "IP"
    ETHERNET = "Ethernet"
    UNSTRUCTURED = "Unstructured"


class PduSessionState(str, Enum):
    INACTIVE = "Inactive"
    ESTABLISHING = "Establishing"
    ACTIVE = "Active"
    RELEASING = "Releasing"
    RELEASED = "Released"


# Establishing -> Released covers establishment failure.
_LEGAL_TRANSITIONS: set[tuple[PduSessionState, PduSessionState]] = {
    (PduSessionState.INACTIVE, PduSessionState.ESTABLISHING),
    (PduSessionState.ESTABLISHING, PduSessionState.ACTIVE),
    (PduSessionState.ACTIVE, PduSessionState.RELEASING),
    (PduSessionState.RELEASING, PduSessionState.RELEASED),
    (PduSessionState.ESTABLISHING, PduSessionState.RELEASED),
}


def legal_session_transition(old: PduSessionState, new: PduSessionState) -> bool:
    return (old, new) in _LEGAL_TRANSITIONS


@dataclass
class PduSession:
    """Lifecycle of one UE-to-DN session over a single slice."""

    session_id: str
    snssai: SNssai
    dn_name: str
    session_type: SessionType = SessionType.IP
    state: PduSessionState = PduSessionState.INACTIVE
    ip_prefix: Optional[str] = None
    smf: Optional[str] = None
    upfs: list[str] = field(default_factory=list)
    policy_ref: Optional[str] = None

    def transition(self, new_state: PduSessionState) -> None:
        if not legal_session_transition(self.state, new_state):
            raise InvalidSessionState(
                f"session {self.session_id}: illegal transition "
                f"{self.state.value} -> {new_state.value}"
            )
        self.state = new_state
        # The prefix exists exactly while the session is Active or Releasing.
        if new_state is PduSessionState.ACTIVE and not self.ip_prefix:
            raise InvalidSessionState(
                f"session {self.session_id}: activated without an IP prefix"
            )
        if new_state is PduSessionState.RELEASED:
            self.ip_prefix = None

    def activate(self, ip_prefix: str, policy_ref: Optional[str] = None) -> None:
        self.ip_prefix = ip_prefix
        if policy_ref is not None:
            self.policy_ref = policy_ref
        self.transition(PduSessionState.ACTIVE)

    def prefix_violation(self) -> Optional[str]:
        should_have = self.state in (
            PduSessionState.ACTIVE,
            PduSessionState.RELEASING,
        )
        if should_have and not self.ip_prefix:
            return f"session {self.session_id} is {self.state.value} without ip_prefix"
        if not should_have and self.ip_prefix:
            return f"session {self.session_id} is {self.state.value} but holds ip_prefix"
        return None


class RegistrationState(str, Enum):
    DEREGISTERED = "Deregistered"
    REGISTERED = "Registered"


@dataclass
class UeContext:
    """Per-UE state: identity, serving AMF, NSSAI view and sessions."""

    ue_id: str
    service_type: ServiceType
    serving_amf: str
    nssai: NssaiView
    sessions: dict[str, PduSession] = field(default_factory=dict)
    registration_state: RegistrationState = RegistrationState.REGISTERED
    # Scenario-declared slice priorities; lower index wins selection.
    slice_priorities: dict[SNssai, int] = field(default_factory=dict)

    def active_sessions(self) -> list[PduSession]:
        return [
            s
            for s in self.sessions.values()
            if s.state is PduSessionState.ACTIVE
        ]

    def sessions_on(self, snssai: SNssai) -> list[PduSession]:
        return [s for s in self.sessions.values() if s.snssai == snssai]


def verify_requested_nssai(
    requested: set[SNssai],
    subscribed: Iterable[Subscription],
    configured: set[SNssai],
) -> VerificationResult:
    """Split a Requested NSSAI into accepted and rejected slices.

    A slice is accepted when it is both configured in the PLMN and subscribed
    by the UE. Rejections carry NotConfigured when the slice is unknown to the
    PLMN, otherwise NotSubscribed.
    """
    if not requested:
        raise InvalidRequest("Requested NSSAI must not be empty")
    subscribed_snssais = {sub.snssai for sub in subscribed}
    accepted: set[SNssai] = set()
    rejected: set[tuple[SNssai, RejectReason]] = set()
    for snssai in requested:
        if snssai not in configured:
            rejected.add((snssai, RejectReason.NOT_CONFIGURED))
        elif snssai not in subscribed_snssais:
            rejected.add((snssai, RejectReason.NOT_SUBSCRIBED))
        else:
            accepted.add(snssai)
    return VerificationResult(accepted=accepted, rejected=rejected)


def compute_allowed_nssai(
    current_allowed: set[SNssai],
    accepted: set[SNssai],
    remove_current: bool,
    current_active: Optional[SNssai] = None,
) -> set[SNssai]:
    """Build the new Allowed NSSAI after a registration-driven update.

    The result replaces the previous allowed set with the accepted slices; a
    tentative registration (remove_current=False) additionally retains the
    currently active slice. Exceeding the eight-slice cap rejects the update
    rather than truncating it, so traces stay unambiguous.
    """
    if not accepted:
        raise InvalidRequest("accepted set must not be empty")
    new_allowed = set(accepted)
    if not remove_current and current_active is not None:
        new_allowed.add(current_active)
    if len(new_allowed) > MAX_ALLOWED_SLICES:
        raise AllowedNssaiOverflow(
            f"new Allowed NSSAI would hold {len(new_allowed)} slices "
            f"(max {MAX_ALLOWED_SLICES})"
        )
    return new_allowed


SelectionPolicy = Callable[[list[SNssai]], SNssai]


def lowest_priority_policy(priorities: dict[SNssai, int]) -> SelectionPolicy:
    """Default slice selection: lowest numeric priority index wins.

    Slices missing from the table rank after all listed ones; ties break on
    the lexicographic slice differentiator.
    """

    def pick(candidates: list[SNssai]) -> SNssai:
        return min(
            candidates,
            key=lambda s: (priorities.get(s, len(priorities) + 10 ** 6), s.sd),
        )

    return pick


def select_alternate_snssai(
    view: NssaiView,
    service_type: ServiceType,
    exclude: SNssai,
    policy: Optional[SelectionPolicy] = None,
    restrict_to_allowed: bool = False,
) -> Optional[SNssai]:
    """Choose an alternate slice for a UE abandoning `exclude`.

    Candidates are subscribed-and-configured slices of the same service type;
    with restrict_to_allowed the pool narrows to the current Allowed NSSAI.
    Returns None when no candidate exists, which is a legal outcome.
    """
    pool = view.subscribed_snssais & view.configured
    if restrict_to_allowed:
        pool &= view.allowed
    candidates = sorted(
        (s for s in pool if s != exclude and s.sst == service_type),
        key=snssai_key,
    )
    if not candidates:
        return None
    if policy is None:
        policy = lowest_priority_policy({})
    return policy(candidates)
