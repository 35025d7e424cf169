"""Scenario loading, validation and world construction."""

import textwrap

import pytest

from sliceswitch.errors import ScenarioError
from sliceswitch.scenario import (
    build_world,
    load_scenario,
    scenario_from_dict,
    validate_scenario,
)
from sliceswitch.slices import SNssai

from conftest import SLICE_A, SLICE_B, make_scenario, network_trigger, ue_trigger

MINIMAL_YAML = textwrap.dedent(
    """
    name: minimal
    plmn:
      configured: ["eMBB:0a", "eMBB:0b"]
    nfs:
      - {id: amf1, kind: AMF, serving: ["eMBB:0a", "eMBB:0b"]}
      - {id: smf-a, kind: SMF, serving: ["eMBB:0a"]}
      - {id: upf-a, kind: UPF, serving: ["eMBB:0a"]}
      - {id: udm1, kind: UDM}
      - {id: pcf1, kind: PCF}
      - {id: nssf1, kind: NSSF}
      - {id: ran1, kind: RAN}
      - {id: dn1, kind: DN}
    ues:
      - ue_id: ue1
        service_type: eMBB
        serving_amf: amf1
        subscribed:
          - {snssai: "eMBB:0a", default: true}
        allowed: ["eMBB:0a"]
        sessions:
          - {session_id: s1, snssai: "eMBB:0a", dn: internet}
    policies:
      - {snssai: "eMBB:0a", dn: internet}
    """
)


class TestLoading:
    def test_minimal_file_loads_and_validates(self, tmp_path):
        path = tmp_path / "minimal.yaml"
        path.write_text(MINIMAL_YAML)
        scenario = load_scenario(path)
        assert scenario.name == "minimal"
        assert validate_scenario(scenario) == []

    def test_yaml_error_reports_line(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("name: x\nplmn: [unclosed\n  bad")
        with pytest.raises(ScenarioError, match="line"):
            load_scenario(path)

    def test_missing_key_reports_context(self):
        with pytest.raises(ScenarioError, match="missing required key"):
            scenario_from_dict({"plmn": {"configured": []}})

    def test_bad_snssai_reported(self):
        raw = {"plmn": {"configured": ["NOPE"]}, "nfs": [], "ues": []}
        with pytest.raises(ScenarioError, match="NOPE|malformed|unknown"):
            scenario_from_dict(raw)

    def test_unknown_trigger_name_reported(self, tmp_path):
        path = tmp_path / "trig.yaml"
        path.write_text(
            MINIMAL_YAML
            + "triggers:\n"
            + '  - {name: Nonsense, at: 0, ue: ue1, snssai: "eMBB:0a"}\n'
        )
        with pytest.raises(ScenarioError, match="unknown trigger name"):
            load_scenario(path)


class TestValidation:
    def test_nine_slice_allowed_names_max8(self):
        from sliceswitch.scenario import PolicyDecl
        from sliceswitch.slices import Subscription

        extra = [SNssai.parse(f"eMBB:e{i}") for i in range(8)]
        scenario = make_scenario(
            extra_slices=extra,
            subscribed_extra=[Subscription(s) for s in extra],
            extra_policies=[PolicyDecl(s, "internet") for s in extra],
        )
        scenario.ues[0].allowed = [SLICE_A] + extra  # nine slices
        problems = validate_scenario(scenario)
        assert any("maximum" in p for p in problems)

    def test_trigger_on_unknown_ue(self):
        trigger = network_trigger()
        trigger.ue_id = "ghost"
        scenario = make_scenario(triggers=[trigger])
        problems = validate_scenario(scenario)
        assert any("unknown UE" in p for p in problems)

    def test_unsubscribed_allowed_slice(self):
        scenario = make_scenario()
        scenario.ues[0].subscribed = [
            s for s in scenario.ues[0].subscribed if s.snssai != SLICE_A
        ]
        problems = validate_scenario(scenario)
        assert any("unsubscribed" in p for p in problems)

    def test_missing_core_nf(self):
        scenario = make_scenario()
        scenario.nfs = [d for d in scenario.nfs if d.nf_id != "nssf1"]
        problems = validate_scenario(scenario)
        assert any("no NSSF" in p for p in problems)

    def test_session_without_policy_record(self):
        scenario = make_scenario()
        scenario.policies = [p for p in scenario.policies
                             if p.snssai != SLICE_A]
        problems = validate_scenario(scenario)
        assert any("policy record" in p for p in problems)

    def test_two_smfs_on_one_slice(self):
        from sliceswitch.nf import NfKind
        from sliceswitch.scenario import NfDecl

        scenario = make_scenario()
        scenario.nfs.append(NfDecl("smf-x", NfKind.SMF, [SLICE_A]))
        problems = validate_scenario(scenario)
        assert any("multiple SMFs" in p for p in problems)

    def test_upf_on_two_slices(self):
        scenario = make_scenario()
        for decl in scenario.nfs:
            if decl.nf_id == "upf-a":
                decl.serving = [SLICE_A, SLICE_B]
        problems = validate_scenario(scenario)
        assert any("exactly one slice" in p for p in problems)

    def test_serving_amf_must_cover_allowed(self):
        scenario = make_scenario(target_in_allowed=True)
        for decl in scenario.nfs:
            if decl.nf_id == "amf1":
                decl.serving = [SLICE_A]
        problems = validate_scenario(scenario)
        assert any("cannot serve" in p for p in problems)

    def test_session_service_type_mismatch(self):
        scenario = make_scenario()
        scenario.ues[0].service_type = (
            __import__("sliceswitch.slices", fromlist=["ServiceType"])
            .ServiceType.URLLC
        )
        problems = validate_scenario(scenario)
        assert any("service type" in p.lower() for p in problems)

    def test_build_world_rejects_invalid(self):
        trigger = network_trigger()
        trigger.ue_id = "ghost"
        scenario = make_scenario(triggers=[trigger])
        with pytest.raises(ScenarioError):
            build_world(scenario)


class TestSeededRandomization:
    def test_jitter_resolved_by_seed(self):
        scenario = make_scenario(triggers=[ue_trigger(at=5)])
        scenario.random_fire_windows = {0: (3, 40)}
        _, script_a, _ = build_world(scenario, seed=1)
        _, script_b, _ = build_world(scenario, seed=1)
        _, script_c, _ = build_world(scenario, seed=2)
        assert script_a[0].fire_at == script_b[0].fire_at
        assert 3 <= script_a[0].fire_at <= 40
        assert 3 <= script_c[0].fire_at <= 40
        # The original scenario object is never mutated.
        assert scenario.triggers[0].fire_at == 5

    def test_seed_irrelevant_without_random_fields(self):
        scenario = make_scenario(triggers=[ue_trigger(at=5)])
        _, script_a, _ = build_world(scenario, seed=1)
        _, script_b, _ = build_world(scenario, seed=99)
        assert script_a[0].fire_at == script_b[0].fire_at == 5


class TestInitialWorld:
    def test_initial_sessions_fully_plumbed(self):
        world, _, _ = build_world(make_scenario())
        assert world.resources_for_session("sess-a") == {
            "n4": 2, "ran": 1, "prefixes": 1,
        }
        assert world.invariant_violations() == []

    def test_sm_records_synthesized_for_subscribed_slices(self):
        world, _, _ = build_world(make_scenario())
        record = world.nfs["udm1"].state_store.records["ue1"]
        assert (SLICE_A, "internet") in record.sm_data
        assert (SLICE_B, "internet") in record.sm_data

    def test_directory_routes(self):
        world, _, _ = build_world(make_scenario(relocation=True))
        directory = world.directory
        assert directory.amf_ids == ["amf1", "amf2"]
        assert directory.smf_for[SLICE_A] == "smf-a"
        assert directory.upfs_for[SLICE_B] == ["upf-b"]
        assert directory.udm == "udm1"
