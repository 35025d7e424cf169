#!/usr/bin/env python3
"""Generate the bundled one-switch scenario files (one per switching case).

Run from the repo root:  python3 tools/gen_bundled_scenarios.py
Outputs land in src/sliceswitch/scenarios/.
"""

from __future__ import annotations

from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "sliceswitch" / "scenarios"

SLICE_A = "eMBB:0a"
SLICE_B = "eMBB:0b"


def base_nfs(relocation: bool) -> list[str]:
    amf1_serving = [SLICE_A] if relocation else [SLICE_A, SLICE_B]
    lines = [
        f'  - {{id: amf1, kind: AMF, serving: ["{amf1_serving[0]}"'
        + (f', "{amf1_serving[1]}"' if len(amf1_serving) > 1 else "")
        + "]}",
    ]
    if relocation:
        lines.append(
            f'  - {{id: amf2, kind: AMF, serving: ["{SLICE_A}", "{SLICE_B}"]}}'
        )
    lines += [
        f'  - {{id: smf-a, kind: SMF, serving: ["{SLICE_A}"]}}',
        f'  - {{id: smf-b, kind: SMF, serving: ["{SLICE_B}"]}}',
        f'  - {{id: upf-a, kind: UPF, serving: ["{SLICE_A}"]}}',
        f'  - {{id: upf-b, kind: UPF, serving: ["{SLICE_B}"]}}',
        "  - {id: udm1, kind: UDM}",
        "  - {id: pcf1, kind: PCF}",
        "  - {id: nssf1, kind: NSSF}",
        "  - {id: ran1, kind: RAN}",
        "  - {id: dn1, kind: DN}",
    ]
    return lines


def scenario_yaml(
    name: str,
    *,
    target_in_allowed: bool,
    relocation: bool,
    trigger: str,
) -> str:
    allowed = f'["{SLICE_A}", "{SLICE_B}"]' if target_in_allowed \
        else f'["{SLICE_A}"]'
    lines = [
        f"name: {name}",
        "plmn:",
        f'  configured: ["{SLICE_A}", "{SLICE_B}"]',
        "nfs:",
        *base_nfs(relocation),
        "ues:",
        "  - ue_id: ue1",
        "    service_type: eMBB",
        "    serving_amf: amf1",
        "    subscribed:",
        f'      - {{snssai: "{SLICE_A}", default: true}}',
        f'      - {{snssai: "{SLICE_B}"}}',
        f"    allowed: {allowed}",
        f'    priorities: {{"{SLICE_B}": 1}}',
        "    sessions:",
        f'      - {{session_id: sess-a, snssai: "{SLICE_A}", '
        "dn: internet, type: IP}",
        "policies:",
        f'  - {{snssai: "{SLICE_A}", dn: internet}}',
        f'  - {{snssai: "{SLICE_B}", dn: internet}}',
        "triggers:",
        f"  - {trigger}",
        "",
    ]
    return "\n".join(lines)


NETWORK_UCU = (
    '{name: SliceStressLoad, initiation: NetworkTriggered, at: 0, ue: ue1, '
    f'snssai: "{SLICE_A}", mechanism: UcuCommand}}'
)
NETWORK_RELEASE = (
    '{name: SubscriptionPolicies, initiation: NetworkTriggered, at: 0, '
    f'ue: ue1, snssai: "{SLICE_A}", mechanism: NetworkRelease}}'
)
UE_DEFINITIVE = (
    '{name: MonetaryCosts, initiation: UeInitiated, at: 0, ue: ue1, '
    f'snssai: "{SLICE_A}"}}'
)
UE_TENTATIVE = (
    '{name: MonetaryCosts, initiation: UeInitiated, at: 0, ue: ue1, '
    f'snssai: "{SLICE_A}", tentative: true}}'
)

CASES = {
    "case_1a": dict(target_in_allowed=True, relocation=False,
                    trigger=NETWORK_UCU),
    "case_1b": dict(target_in_allowed=False, relocation=False,
                    trigger=NETWORK_UCU),
    "case_1c": dict(target_in_allowed=False, relocation=True,
                    trigger=NETWORK_UCU),
    "case_1d": dict(target_in_allowed=True, relocation=False,
                    trigger=NETWORK_RELEASE),
    "case_1e": dict(target_in_allowed=False, relocation=False,
                    trigger=NETWORK_RELEASE),
    "case_1f": dict(target_in_allowed=False, relocation=True,
                    trigger=NETWORK_RELEASE),
    "case_2a": dict(target_in_allowed=True, relocation=False,
                    trigger=UE_DEFINITIVE),
    "case_2b": dict(target_in_allowed=False, relocation=False,
                    trigger=UE_DEFINITIVE),
    "case_2c": dict(target_in_allowed=False, relocation=True,
                    trigger=UE_DEFINITIVE),
    "case_2bt": dict(target_in_allowed=False, relocation=False,
                     trigger=UE_TENTATIVE),
    "case_2ct": dict(target_in_allowed=False, relocation=True,
                     trigger=UE_TENTATIVE),
}


def all_cases_yaml() -> str:
    """One scenario driving all eleven cases with staggered triggers.

    Relocation UEs start on amf1 (serves slice A only) and relocate to amf2;
    the others start on amf2 (serves both slices).
    """
    triggers = {
        "1a": ("SliceStressLoad", "NetworkTriggered", "UcuCommand", False, True),
        "1b": ("SliceStressLoad", "NetworkTriggered", "UcuCommand", False, False),
        "1c": ("SliceStressLoad", "NetworkTriggered", "UcuCommand", True, False),
        "1d": ("SubscriptionPolicies", "NetworkTriggered", "NetworkRelease",
               False, True),
        "1e": ("SubscriptionPolicies", "NetworkTriggered", "NetworkRelease",
               False, False),
        "1f": ("SubscriptionPolicies", "NetworkTriggered", "NetworkRelease",
               True, False),
        "2a": ("MonetaryCosts", "UeInitiated", None, False, True),
        "2b": ("MonetaryCosts", "UeInitiated", None, False, False),
        "2c": ("MonetaryCosts", "UeInitiated", None, True, False),
        "2bt": ("MonetaryCosts", "UeInitiated", None, False, False),
        "2ct": ("MonetaryCosts", "UeInitiated", None, True, False),
    }
    lines = [
        "name: all-cases",
        "plmn:",
        f'  configured: ["{SLICE_A}", "{SLICE_B}"]',
        "nfs:",
        f'  - {{id: amf1, kind: AMF, serving: ["{SLICE_A}"]}}',
        f'  - {{id: amf2, kind: AMF, serving: ["{SLICE_A}", "{SLICE_B}"]}}',
        f'  - {{id: smf-a, kind: SMF, serving: ["{SLICE_A}"]}}',
        f'  - {{id: smf-b, kind: SMF, serving: ["{SLICE_B}"]}}',
        f'  - {{id: upf-a, kind: UPF, serving: ["{SLICE_A}"]}}',
        f'  - {{id: upf-b, kind: UPF, serving: ["{SLICE_B}"]}}',
        "  - {id: udm1, kind: UDM}",
        "  - {id: pcf1, kind: PCF}",
        "  - {id: nssf1, kind: NSSF}",
        "  - {id: ran1, kind: RAN}",
        "  - {id: dn1, kind: DN}",
        "ues:",
    ]
    for key, (_n, _i, _m, reloc, in_allowed) in triggers.items():
        amf = "amf1" if reloc else "amf2"
        allowed = f'["{SLICE_A}", "{SLICE_B}"]' if in_allowed \
            else f'["{SLICE_A}"]'
        lines += [
            f"  - ue_id: ue-{key}",
            "    service_type: eMBB",
            f"    serving_amf: {amf}",
            "    subscribed:",
            f'      - {{snssai: "{SLICE_A}", default: true}}',
            f'      - {{snssai: "{SLICE_B}"}}',
            f"    allowed: {allowed}",
            f'    priorities: {{"{SLICE_B}": 1}}',
            "    sessions:",
            f'      - {{session_id: sess-{key}, snssai: "{SLICE_A}", '
            "dn: internet, type: IP}",
        ]
    lines += [
        "policies:",
        f'  - {{snssai: "{SLICE_A}", dn: internet}}',
        f'  - {{snssai: "{SLICE_B}", dn: internet}}',
        "triggers:",
    ]
    for idx, (key, (name, initiation, mech, _r, _a)) in enumerate(
        triggers.items()
    ):
        at = idx * 100
        extra = f", mechanism: {mech}" if mech else ""
        if key.endswith("t"):
            extra += ", tentative: true"
        lines.append(
            f"  - {{name: {name}, initiation: {initiation}, at: {at}, "
            f'ue: ue-{key}, snssai: "{SLICE_A}"{extra}}}'
        )
    lines.append("")
    return "\n".join(lines)


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, params in CASES.items():
        path = OUT_DIR / f"{name}.yaml"
        path.write_text(scenario_yaml(name.replace("_", "-"), **params),
                        encoding="utf-8")
        print(f"wrote {path}")
    path = OUT_DIR / "all_cases.yaml"
    path.write_text(all_cases_yaml(), encoding="utf-8")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
