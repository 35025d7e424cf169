"""Slice-model operations: set algebra, selection policy, session lifecycle."""

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sliceswitch.errors import (
    AllowedNssaiOverflow,
    InvalidRequest,
    InvalidSessionState,
)
from sliceswitch.slices import (
    MAX_ALLOWED_SLICES,
    NssaiView,
    PduSession,
    PduSessionState,
    RejectReason,
    ServiceType,
    SNssai,
    Subscription,
    compute_allowed_nssai,
    legal_session_transition,
    lowest_priority_policy,
    select_alternate_snssai,
    verify_requested_nssai,
)

A = SNssai(ServiceType.EMBB, "0a")
B = SNssai(ServiceType.EMBB, "0b")
C = SNssai(ServiceType.EMBB, "0c")
D = SNssai(ServiceType.EMBB, "0d")
E = SNssai(ServiceType.EMBB, "0e")


def subs(*snssais, default=None):
    return {
        Subscription(s, is_default=(s == default)) for s in snssais
    }


def brute_force_verify(requested, subscribed_snssais, configured):
    """Independent oracle: per-element membership scan."""
    accepted, rejected = set(), set()
    for s in requested:
        if s not in configured:
            rejected.add((s, RejectReason.NOT_CONFIGURED))
        elif s not in subscribed_snssais:
            rejected.add((s, RejectReason.NOT_SUBSCRIBED))
        else:
            accepted.add(s)
    return accepted, rejected


class TestVerifyRequestedNssai:
    def test_subset_case(self):
        result = verify_requested_nssai({A}, subs(A, B, default=A), {A, B, C})
        assert result.accepted == {A}
        assert result.rejected == set()

    def test_unsubscribed_slice(self):
        result = verify_requested_nssai(
            {D}, subs(A, B, default=A), {A, B, C, D}
        )
        assert result.accepted == set()
        assert result.rejected == {(D, RejectReason.NOT_SUBSCRIBED)}

    def test_mixed_rejections(self):
        result = verify_requested_nssai(
            {A, D, E}, subs(A, D, default=A), {A, B, C, D}
        )
        assert result.accepted == {A, D}
        assert result.rejected == {(E, RejectReason.NOT_CONFIGURED)}

    def test_exhaustive_three_element_requests(self):
        # Oracle check over every 3-element subset of a 5-slice universe.
        universe = [A, B, C, D, E]
        subscribed = subs(A, D, default=A)
        subscribed_snssais = {A, D}
        configured = {A, B, C, D}
        for requested in itertools.combinations(universe, 3):
            requested = set(requested)
            expected = brute_force_verify(
                requested, subscribed_snssais, configured
            )
            result = verify_requested_nssai(requested, subscribed, configured)
            assert (result.accepted, result.rejected) == expected

    def test_empty_request_rejected(self):
        with pytest.raises(InvalidRequest):
            verify_requested_nssai(set(), subs(A, default=A), {A})

    @given(
        requested=st.sets(st.sampled_from([A, B, C, D, E]), min_size=1),
        subscribed=st.sets(st.sampled_from([A, B, C, D, E])),
        configured=st.sets(st.sampled_from([A, B, C, D, E])),
    )
    def test_idempotent_on_accepted(self, requested, subscribed, configured):
        sub_records = {Subscription(s) for s in subscribed}
        result = verify_requested_nssai(requested, sub_records, configured)
        if result.accepted:
            again = verify_requested_nssai(
                result.accepted, sub_records, configured
            )
            assert again.accepted == result.accepted
            assert again.rejected == set()


class TestComputeAllowedNssai:
    def test_registration_removes_active_slice(self):
        assert compute_allowed_nssai({A}, {B}, True, A) == {B}

    def test_tentative_keeps_active_slice(self):
        assert compute_allowed_nssai({A}, {B}, False, A) == {A, B}

    def test_overflow_rejected_not_truncated(self):
        eight = {SNssai(ServiceType.EMBB, f"{i:02x}") for i in range(8)}
        ninth = SNssai(ServiceType.EMBB, "ff")
        with pytest.raises(AllowedNssaiOverflow):
            compute_allowed_nssai(eight, eight | {ninth}, False, next(iter(eight)))

    def test_overflow_boundary_sweep(self):
        # Oracle: plain cardinality check for accepted sizes 7..10.
        pool = [SNssai(ServiceType.EMBB, f"{i:02x}") for i in range(16)]
        for size in range(7, 11):
            accepted = set(pool[:size])
            extra = pool[15]
            expect_overflow = len(accepted | {extra}) > MAX_ALLOWED_SLICES
            if expect_overflow:
                with pytest.raises(AllowedNssaiOverflow):
                    compute_allowed_nssai(set(), accepted, False, extra)
            else:
                result = compute_allowed_nssai(set(), accepted, False, extra)
                assert result == accepted | {extra}

    def test_empty_accepted_invalid(self):
        with pytest.raises(InvalidRequest):
            compute_allowed_nssai({A}, set(), True, A)

    @given(
        accepted=st.sets(st.sampled_from([A, B, C, D, E]), min_size=1),
        current=st.sampled_from([A, B, C, D, E]),
    )
    def test_retention_property(self, accepted, current):
        result = compute_allowed_nssai(set(), accepted, False, current)
        assert current in result
        assert accepted <= result


class TestSelectAlternateSnssai:
    def view(self, *subscribed, allowed=()):
        return NssaiView(
            configured=set(subscribed),
            subscribed=subs(*subscribed, default=subscribed[0]),
            allowed=set(allowed),
        )

    def test_single_remaining_candidate(self):
        view = self.view(A, B)
        assert select_alternate_snssai(view, ServiceType.EMBB, A) == B

    def test_no_candidate(self):
        view = self.view(A)
        assert select_alternate_snssai(view, ServiceType.EMBB, A) is None

    def test_priority_policy(self):
        # Oracle: linear scan over the priority table.
        view = self.view(A, B, C)
        priorities = {B: 2, C: 1}
        candidates = [B, C]
        oracle = min(candidates, key=lambda s: priorities[s])
        policy = lowest_priority_policy(priorities)
        assert select_alternate_snssai(
            view, ServiceType.EMBB, A, policy
        ) == oracle == C

    def test_never_returns_excluded_or_foreign_sst(self):
        urllc = SNssai(ServiceType.URLLC, "0x")
        view = NssaiView(
            configured={A, B, urllc},
            subscribed=subs(A, B, urllc, default=A),
            allowed=set(),
        )
        choice = select_alternate_snssai(view, ServiceType.EMBB, A)
        assert choice not in (A, urllc)

    def test_unsubscribed_slices_ignored(self):
        view = NssaiView(
            configured={A, B},
            subscribed=subs(A, default=A),
            allowed=set(),
        )
        assert select_alternate_snssai(view, ServiceType.EMBB, A) is None


class TestNssaiViewInvariants:
    def test_valid_view(self):
        view = NssaiView(
            configured={A, B}, subscribed=subs(A, B, default=A), allowed={A}
        )
        assert view.violations() == []

    def test_allowed_must_be_configured(self):
        view = NssaiView(
            configured={A}, subscribed=subs(A, B, default=A), allowed={B}
        )
        assert any("configured" in v for v in view.violations())

    def test_allowed_must_be_subscribed(self):
        view = NssaiView(
            configured={A, B}, subscribed=subs(A, default=A), allowed={B}
        )
        assert any("unsubscribed" in v for v in view.violations())

    def test_max_eight(self):
        nine = {SNssai(ServiceType.EMBB, f"{i:02x}") for i in range(9)}
        view = NssaiView(
            configured=nine,
            subscribed={Subscription(s, is_default=True) for s in nine},
            allowed=nine,
        )
        assert any("maximum" in v for v in view.violations())

    def test_default_subscription_required(self):
        view = NssaiView(
            configured={A}, subscribed={Subscription(A)}, allowed=set()
        )
        assert any("default" in v for v in view.violations())


class TestPduSessionLifecycle:
    def test_legal_transition_matrix(self):
        # Oracle: enumerate all state pairs against the declared legal set.
        legal = {
            ("Inactive", "Establishing"),
            ("Establishing", "Active"),
            ("Active", "Releasing"),
            ("Releasing", "Released"),
            ("Establishing", "Released"),
        }
        for old in PduSessionState:
            for new in PduSessionState:
                expected = (old.value, new.value) in legal
                assert legal_session_transition(old, new) is expected

    def test_illegal_transition_raises(self):
        session = PduSession("s1", A, "internet")
        with pytest.raises(InvalidSessionState):
            session.transition(PduSessionState.ACTIVE)

    def test_release_clears_prefix(self):
        session = PduSession("s1", A, "internet")
        session.transition(PduSessionState.ESTABLISHING)
        session.activate("pfx-s1")
        assert session.ip_prefix == "pfx-s1"
        session.transition(PduSessionState.RELEASING)
        assert session.ip_prefix == "pfx-s1"
        session.transition(PduSessionState.RELEASED)
        assert session.ip_prefix is None

    def test_activation_requires_prefix(self):
        session = PduSession("s1", A, "internet")
        session.transition(PduSessionState.ESTABLISHING)
        with pytest.raises(InvalidSessionState):
            session.transition(PduSessionState.ACTIVE)

    def test_prefix_iff_active_or_releasing(self):
        session = PduSession("s1", A, "internet")
        assert session.prefix_violation() is None
        session.ip_prefix = "pfx-s1"
        assert session.prefix_violation() is not None


def test_snssai_parse_roundtrip():
    assert SNssai.parse("eMBB:0a") == A
    assert str(A) == "eMBB:0a"
    with pytest.raises(InvalidRequest):
        SNssai.parse("bogus")
    with pytest.raises(InvalidRequest):
        SNssai.parse("5G:0a")
