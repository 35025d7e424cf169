"""Scenario files: YAML schema, validation and world construction.

A scenario declares the PLMN's configured slices, the NF topology, the UEs
with their subscriptions and initial sessions, the scripted triggers and the
run options. `validate_scenario` is the single source of truth: the CLI
validate command and the run-scenario load phase both use it.

Slice tokens use the '<sst>:<sd>' form, e.g. "eMBB:0a".
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from .errors import InvalidRequest, ScenarioError
from .nf import (
    N4Session,
    NfInstance,
    NfKind,
    PolicyRecord,
    SmRecord,
    SubscriptionRecord,
)
from .slices import (
    NssaiView,
    PduSession,
    PduSessionState,
    ServiceType,
    SessionType,
    SNssai,
    Subscription,
    UeContext,
)
from .triggers import Initiation, TriggerMechanism, TriggerName, TriggerSpec
from .world import LatencyModel, SimOptions, World


@dataclass
class NfDecl:
    nf_id: str
    kind: NfKind
    serving: list[SNssai] = field(default_factory=list)


@dataclass
class SessionDecl:
    session_id: str
    snssai: SNssai
    dn_name: str
    session_type: SessionType = SessionType.IP


@dataclass
class UeDecl:
    ue_id: str
    service_type: ServiceType
    serving_amf: str
    subscribed: list[Subscription]
    allowed: list[SNssai]
    priorities: dict[SNssai, int] = field(default_factory=dict)
    sessions: list[SessionDecl] = field(default_factory=list)


@dataclass
class PolicyDecl:
    snssai: SNssai
    dn_name: str
    qos_profile: str = "default-qos"
    charging_profile: str = "default-charging"


@dataclass
class Scenario:
    name: str
    configured: list[SNssai]
    nfs: list[NfDecl]
    ues: list[UeDecl]
    policies: list[PolicyDecl] = field(default_factory=list)
    dn_auth: dict[str, bool] = field(default_factory=dict)
    triggers: list[TriggerSpec] = field(default_factory=list)
    latency_default: int = 1
    latency_overrides: dict[tuple[str, str], int] = field(default_factory=dict)
    options: SimOptions = field(default_factory=SimOptions)
    nwdaf_metrics: dict[SNssai, dict[str, float]] = field(default_factory=dict)
    # Trigger index -> (lo, hi) jitter window; resolved with the run seed.
    random_fire_windows: dict[int, tuple[int, int]] = field(default_factory=dict)


def _require(mapping: dict, key: str, context: str) -> Any:
    if key not in mapping:
        raise ScenarioError(f"{context}: missing required key '{key}'")
    return mapping[key]


def _parse_snssai(token: Any, context: str) -> SNssai:
    try:
        return SNssai.parse(str(token))
    except InvalidRequest as exc:
        raise ScenarioError(f"{context}: {exc}") from None


def load_scenario(path: str | Path) -> Scenario:
    """Parse a scenario file; raises ScenarioError with location context."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}" if mark else "unknown location"
        raise ScenarioError(f"{path}: YAML parse error at {where}: "
                            f"{exc.problem}") from None
    if not isinstance(raw, dict):
        raise ScenarioError(f"{path}: scenario must be a mapping")
    return scenario_from_dict(raw, source=str(path))


def scenario_from_dict(raw: dict, source: str = "<dict>") -> Scenario:
    plmn = _require(raw, "plmn", source)
    configured = [
        _parse_snssai(tok, f"{source}: plmn.configured")
        for tok in _require(plmn, "configured", f"{source}: plmn")
    ]
    nfs = []
    for entry in _require(raw, "nfs", source):
        ctx = f"{source}: nf {entry.get('id', '?')}"
        try:
            kind = NfKind(_require(entry, "kind", ctx))
        except ValueError:
            raise ScenarioError(f"{ctx}: unknown NF kind "
                                f"{entry['kind']!r}") from None
        nfs.append(
            NfDecl(
                nf_id=str(_require(entry, "id", ctx)),
                kind=kind,
                serving=[
                    _parse_snssai(tok, ctx) for tok in entry.get("serving", [])
                ],
            )
        )
    ues = []
    for entry in _require(raw, "ues", source):
        ctx = f"{source}: ue {entry.get('ue_id', '?')}"
        subscribed = []
        for sub in _require(entry, "subscribed", ctx):
            if isinstance(sub, dict):
                subscribed.append(
                    Subscription(
                        snssai=_parse_snssai(_require(sub, "snssai", ctx), ctx),
                        is_default=bool(sub.get("default", False)),
                    )
                )
            else:
                subscribed.append(Subscription(snssai=_parse_snssai(sub, ctx)))
        sessions = []
        for sess in entry.get("sessions", []):
            sessions.append(
                SessionDecl(
                    session_id=str(_require(sess, "session_id", ctx)),
                    snssai=_parse_snssai(_require(sess, "snssai", ctx), ctx),
                    dn_name=str(_require(sess, "dn", ctx)),
                    session_type=SessionType(sess.get("type", "IP")),
                )
            )
        try:
            service_type = ServiceType(_require(entry, "service_type", ctx))
        except ValueError:
            raise ScenarioError(f"{ctx}: unknown service type "
                                f"{entry['service_type']!r}") from None
        ues.append(
            UeDecl(
                ue_id=str(_require(entry, "ue_id", ctx)),
                service_type=service_type,
                serving_amf=str(_require(entry, "serving_amf", ctx)),
                subscribed=subscribed,
                allowed=[
                    _parse_snssai(tok, ctx) for tok in entry.get("allowed", [])
                ],
                priorities={
                    _parse_snssai(tok, ctx): int(v)
                    for tok, v in entry.get("priorities", {}).items()
                },
                sessions=sessions,
            )
        )
    policies = [
        PolicyDecl(
            snssai=_parse_snssai(_require(p, "snssai", f"{source}: policy"),
                                 f"{source}: policy"),
            dn_name=str(_require(p, "dn", f"{source}: policy")),
            qos_profile=str(p.get("qos", "default-qos")),
            charging_profile=str(p.get("charging", "default-charging")),
        )
        for p in raw.get("policies", [])
    ]
    triggers = []
    random_windows: dict[int, tuple[int, int]] = {}
    for idx, entry in enumerate(raw.get("triggers", [])):
        ctx = f"{source}: trigger[{idx}]"
        try:
            name = TriggerName(_require(entry, "name", ctx))
        except ValueError:
            raise ScenarioError(f"{ctx}: unknown trigger name "
                                f"{entry['name']!r}") from None
        fire_at = _require(entry, "at", ctx)
        if isinstance(fire_at, dict):
            window = fire_at.get("jitter")
            if (
                not isinstance(window, list) or len(window) != 2
                or not all(isinstance(v, int) for v in window)
            ):
                raise ScenarioError(f"{ctx}: 'at' must be an integer or "
                                    "{jitter: [lo, hi]}")
            random_windows[idx] = (window[0], window[1])
            fire_at = window[0]
        initiation = entry.get("initiation")
        mechanism = entry.get("mechanism")
        triggers.append(
            TriggerSpec(
                trigger_name=name,
                initiation=Initiation(initiation) if initiation
                else _default_initiation(name, ctx),
                fire_at=int(fire_at),
                ue_id=str(_require(entry, "ue", ctx)),
                snssai=_parse_snssai(_require(entry, "snssai", ctx), ctx),
                mechanism=TriggerMechanism(mechanism) if mechanism else None,
                target=(
                    _parse_snssai(entry["target"], ctx)
                    if entry.get("target") else None
                ),
                tentative=bool(entry.get("tentative", False)),
                release_timing=entry.get("release_timing"),
                release_initiator=entry.get("release_initiator"),
            )
        )
    opts_raw = raw.get("options", {})
    options = SimOptions(
        nssf_assist=bool(opts_raw.get("nssf_assist", False)),
        invariant_checks=bool(opts_raw.get("invariant_checks", True)),
        final_decision=str(opts_raw.get("final_decision", "always-switch")),
        release_timing_default=str(
            opts_raw.get("release_timing_default", "Immediate")
        ),
        deferred_release_order=str(
            opts_raw.get("deferred_release_order", "before_accept")
        ),
        network_release_initiator=str(
            opts_raw.get("network_release_initiator", "SMF")
        ),
        max_events=int(opts_raw.get("max_events", 100_000)),
    )
    latency_raw = raw.get("latency", {})
    overrides = {}
    for entry in latency_raw.get("overrides", []):
        overrides[(str(entry["src"]), str(entry["dst"]))] = int(entry["ticks"])
    nwdaf_metrics = {
        _parse_snssai(tok, f"{source}: nwdaf"): dict(vals)
        for tok, vals in raw.get("nwdaf_metrics", {}).items()
    }
    return Scenario(
        name=str(raw.get("name", Path(source).stem)),
        configured=configured,
        nfs=nfs,
        ues=ues,
        policies=policies,
        dn_auth={str(k): bool(v) for k, v in raw.get("dn_auth", {}).items()},
        triggers=triggers,
        latency_default=int(latency_raw.get("default", 1)),
        latency_overrides=overrides,
        options=options,
        nwdaf_metrics=nwdaf_metrics,
        random_fire_windows=random_windows,
    )


def _default_initiation(name: TriggerName, ctx: str) -> Initiation:
    from .triggers import TRIGGER_TABLE

    initiation = TRIGGER_TABLE[name][1]
    if initiation is Initiation.EITHER:
        raise ScenarioError(
            f"{ctx}: trigger {name.value} needs an explicit initiation "
            "('Either' rows must be disambiguated)"
        )
    return initiation


# --- validation ---------------------------------------------------------------


def validate_scenario(scenario: Scenario) -> list[str]:
    """All integrity and initial-state violations; empty means valid."""
    problems: list[str] = []
    configured = set(scenario.configured)
    nf_ids = [d.nf_id for d in scenario.nfs]
    if len(set(nf_ids)) != len(nf_ids):
        problems.append("duplicate NF ids")
    by_kind: dict[NfKind, list[NfDecl]] = {}
    for decl in scenario.nfs:
        by_kind.setdefault(decl.kind, []).append(decl)
        for snssai in decl.serving:
            if snssai not in configured:
                problems.append(
                    f"nf {decl.nf_id}: serves unconfigured slice {snssai}"
                )
    for kind in (NfKind.AMF, NfKind.UDM, NfKind.PCF, NfKind.NSSF,
                 NfKind.RAN, NfKind.DN):
        if kind not in by_kind:
            problems.append(f"scenario declares no {kind.value}")
    for kind in (NfKind.UDM, NfKind.PCF, NfKind.NSSF, NfKind.RAN, NfKind.DN):
        if len(by_kind.get(kind, [])) > 1:
            problems.append(f"scenario declares more than one {kind.value}")
    smf_for: dict[SNssai, list[str]] = {}
    for decl in by_kind.get(NfKind.SMF, []):
        for snssai in decl.serving:
            smf_for.setdefault(snssai, []).append(decl.nf_id)
    for snssai, smfs in smf_for.items():
        if len(smfs) > 1:
            problems.append(
                f"slice {snssai} has multiple SMFs: {', '.join(smfs)}"
            )
    for decl in by_kind.get(NfKind.UPF, []):
        if len(decl.serving) != 1:
            problems.append(
                f"upf {decl.nf_id}: must belong to exactly one slice"
            )
    upfs_for: dict[SNssai, list[str]] = {}
    for decl in by_kind.get(NfKind.UPF, []):
        for snssai in decl.serving:
            upfs_for.setdefault(snssai, []).append(decl.nf_id)

    policy_keys = {(p.snssai, p.dn_name) for p in scenario.policies}
    nf_id_set = set(nf_ids)
    ue_ids = set()
    for ue in scenario.ues:
        if ue.ue_id in ue_ids:
            problems.append(f"duplicate UE id {ue.ue_id}")
        ue_ids.add(ue.ue_id)
        if ue.serving_amf not in nf_id_set:
            problems.append(
                f"ue {ue.ue_id}: serving AMF {ue.serving_amf} not declared"
            )
        view = NssaiView(
            configured=configured,
            subscribed=set(ue.subscribed),
            allowed=set(ue.allowed),
        )
        for violation in view.violations():
            problems.append(f"ue {ue.ue_id}: {violation}")
        amf_decl = next(
            (d for d in scenario.nfs if d.nf_id == ue.serving_amf), None
        )
        if amf_decl is not None:
            if amf_decl.kind is not NfKind.AMF:
                problems.append(
                    f"ue {ue.ue_id}: serving NF {ue.serving_amf} is not an AMF"
                )
            elif not set(ue.allowed) <= set(amf_decl.serving):
                problems.append(
                    f"ue {ue.ue_id}: serving AMF {ue.serving_amf} cannot "
                    "serve the initial allowed set"
                )
        session_ids = set()
        for sess in ue.sessions:
            if sess.session_id in session_ids:
                problems.append(
                    f"ue {ue.ue_id}: duplicate session id {sess.session_id}"
                )
            session_ids.add(sess.session_id)
            if sess.snssai not in set(ue.allowed):
                problems.append(
                    f"ue {ue.ue_id}: session {sess.session_id} on slice "
                    f"{sess.snssai} outside the allowed set"
                )
            if sess.snssai.sst is not ue.service_type:
                problems.append(
                    f"ue {ue.ue_id}: session {sess.session_id} service type "
                    f"mismatch ({sess.snssai.sst.value} vs "
                    f"{ue.service_type.value})"
                )
            if sess.snssai not in smf_for:
                problems.append(
                    f"ue {ue.ue_id}: no SMF serves slice {sess.snssai}"
                )
            if sess.snssai not in upfs_for:
                problems.append(
                    f"ue {ue.ue_id}: no UPF serves slice {sess.snssai}"
                )
            if (sess.snssai, sess.dn_name) not in policy_keys:
                problems.append(
                    f"ue {ue.ue_id}: no policy record for "
                    f"({sess.snssai}, {sess.dn_name})"
                )
    # Establishable pairs that are statically known (pinned trigger targets)
    # must be servable and have policy records; dynamically selected targets
    # may still fail at run time, which is a legal Aborted outcome.
    ue_by_id = {u.ue_id: u for u in scenario.ues}
    for idx, trig in enumerate(scenario.triggers):
        ctx = f"trigger[{idx}] ({trig.trigger_name.value})"
        if trig.ue_id not in ue_by_id:
            problems.append(f"{ctx}: unknown UE {trig.ue_id}")
            continue
        if trig.snssai not in configured:
            problems.append(f"{ctx}: unconfigured slice {trig.snssai}")
        from .triggers import validate_initiation

        if not validate_initiation(trig.trigger_name, trig.initiation):
            problems.append(
                f"{ctx}: initiation {trig.initiation.value} contradicts the "
                "cause catalogue"
            )
        if trig.initiation is Initiation.EITHER:
            problems.append(f"{ctx}: initiation 'Either' must be disambiguated")
        if trig.target is not None:
            ue = ue_by_id[trig.ue_id]
            dns = {s.dn_name for s in ue.sessions} or {"internet"}
            subscribed = {s.snssai for s in ue.subscribed}
            if trig.target not in configured:
                problems.append(
                    f"{ctx}: target {trig.target} is not a configured slice"
                )
            # An unsubscribed pinned target fails at Registration and never
            # establishes, so it needs no user-plane coverage.
            if trig.target in configured and trig.target in subscribed:
                for dn in dns:
                    if trig.target not in smf_for:
                        problems.append(
                            f"{ctx}: no SMF serves target {trig.target}"
                        )
                        break
                    if trig.target not in upfs_for:
                        problems.append(
                            f"{ctx}: no UPF serves target {trig.target}"
                        )
                        break
                    if (trig.target, dn) not in policy_keys:
                        problems.append(
                            f"{ctx}: no policy record for "
                            f"({trig.target}, {dn})"
                        )
    for (src, dst), ticks in scenario.latency_overrides.items():
        if ticks < 0:
            problems.append(f"latency override {src}->{dst} is negative")
    if scenario.latency_default < 0:
        problems.append("default latency is negative")
    if scenario.options.final_decision not in ("always-switch", "never-switch"):
        problems.append(
            f"unknown final_decision predicate "
            f"{scenario.options.final_decision!r}"
        )
    return problems


# --- world construction ---------------------------------------------------------


def build_world(
    scenario: Scenario, seed: int = 0
) -> tuple[World, list[TriggerSpec], LatencyModel]:
    """Materialize the initial world state and the resolved trigger script.

    The seed only affects scenario fields declared random (trigger jitter
    windows); everything else is unconditionally deterministic.
    """
    problems = validate_scenario(scenario)
    if problems:
        raise ScenarioError(
            "scenario failed validation: " + "; ".join(problems)
        )
    world = World(configured=set(scenario.configured), options=scenario.options)
    directory = world.directory
    for decl in scenario.nfs:
        nf = NfInstance(
            nf_id=decl.nf_id, kind=decl.kind, serving_snssais=set(decl.serving)
        )
        world.add_nf(nf)
        if decl.kind is NfKind.AMF:
            directory.amf_ids.append(decl.nf_id)
        elif decl.kind is NfKind.SMF:
            for snssai in decl.serving:
                directory.smf_for[snssai] = decl.nf_id
        elif decl.kind is NfKind.UPF:
            for snssai in decl.serving:
                directory.upfs_for.setdefault(snssai, []).append(decl.nf_id)
        elif decl.kind is NfKind.UDM:
            directory.udm = decl.nf_id
        elif decl.kind is NfKind.PCF:
            directory.pcf = decl.nf_id
        elif decl.kind is NfKind.NSSF:
            directory.nssf = decl.nf_id
        elif decl.kind is NfKind.RAN:
            directory.ran = decl.nf_id
        elif decl.kind is NfKind.DN:
            directory.dn = decl.nf_id
        elif decl.kind is NfKind.UDR:
            directory.udr = decl.nf_id
        elif decl.kind is NfKind.NWDAF:
            directory.nwdaf = decl.nf_id
    directory.amf_ids.sort()

    udm = world.nfs[directory.udm]
    pcf = world.nfs[directory.pcf]
    dn = world.nfs[directory.dn]
    ran = world.nfs[directory.ran]
    dn.state_store.auth.update(scenario.dn_auth)
    if directory.nwdaf:
        world.nfs[directory.nwdaf].state_store.metrics.update(
            scenario.nwdaf_metrics
        )
    for policy in scenario.policies:
        pcf.state_store.policies[(policy.snssai, policy.dn_name)] = (
            PolicyRecord(policy.qos_profile, policy.charging_profile)
        )

    for decl in scenario.ues:
        ue = UeContext(
            ue_id=decl.ue_id,
            service_type=decl.service_type,
            serving_amf=decl.serving_amf,
            nssai=NssaiView(
                configured=set(scenario.configured),
                subscribed=set(decl.subscribed),
                allowed=set(decl.allowed),
            ),
            slice_priorities=dict(decl.priorities),
        )
        world.add_ue(ue)
        world.add_nf(
            NfInstance(nf_id=decl.ue_id, kind=NfKind.UE)
        )
        world.nfs[decl.ue_id].state_store.ue_id = decl.ue_id
        # Subscription data lives at the UDM; SM records default to
        # permissive for every subscribed slice and declared DN.
        dns = {s.dn_name for s in decl.sessions} or {"internet"}
        dns |= set(scenario.dn_auth)
        record = SubscriptionRecord(
            ue_id=decl.ue_id, subscribed=set(decl.subscribed)
        )
        for sub in decl.subscribed:
            for dn_name in sorted(dns):
                record.sm_data[(sub.snssai, dn_name)] = SmRecord()
        udm.state_store.records[decl.ue_id] = record
        # Initial sessions are scenario setup: born Active and fully plumbed.
        for sess in decl.sessions:
            smf_id = directory.smf_for[sess.snssai]
            upf_ids = list(directory.upfs_for[sess.snssai])
            session = PduSession(
                session_id=sess.session_id,
                snssai=sess.snssai,
                dn_name=sess.dn_name,
                session_type=sess.session_type,
                state=PduSessionState.ACTIVE,
                ip_prefix=f"pfx-{sess.session_id}",
                smf=smf_id,
                upfs=upf_ids,
                policy_ref=f"pol-{sess.snssai.sd}-{sess.dn_name}",
            )
            ue.sessions[sess.session_id] = session
            smf = world.nfs[smf_id]
            for upf_id in upf_ids:
                n4 = N4Session.with_default_rules(
                    sess.session_id, smf_id, upf_id
                )
                smf.state_store.n4_sessions[(sess.session_id, upf_id)] = n4
                world.nfs[upf_id].state_store.n4_sessions[sess.session_id] = n4
            ran.state_store.resources.add(sess.session_id)

    rng = random.Random(seed)
    script = []
    for idx, spec in enumerate(scenario.triggers):
        if idx in scenario.random_fire_windows:
            lo, hi = scenario.random_fire_windows[idx]
            spec = replace(spec, fire_at=rng.randint(lo, hi))
        script.append(spec)
    script.sort(key=lambda s: s.fire_at)
    latency = LatencyModel(
        default=scenario.latency_default, overrides=scenario.latency_overrides
    )
    return world, script, latency
