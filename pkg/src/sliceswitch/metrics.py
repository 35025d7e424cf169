"""Per-case signaling metrics: built from outcomes, recomputable from traces.

The emitted report derives from the orchestrator's outcomes and run
bookkeeping; `recompute_report_csv` rebuilds the same report purely from a
trace file. The two must agree byte-for-byte on any run, which pins the
trace as the single source of truth.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

from .trace import TraceLine

MESSAGE_DELIVERY = "MessageDelivery"
_PROC_ESTABLISHMENT = "PduSessionEstablishment"
_PROC_RELEASE = "PduSessionRelease"
_ROUTER_ADVERTISEMENT = "RouterAdvertisement"
_NO_CANDIDATE = "NoCandidateSlice"
_TENTATIVE_CASE_IDS = ("C2bT", "C2cT")

CSV_HEADER = ["section", "case_seq", "case_id", "ue", "key", "value"]


@dataclass
class CaseRow:
    case_seq: int
    case_id: str
    ue: str
    result: str
    interruption: Optional[int]
    msg_counts: dict[str, int] = field(default_factory=dict)
    proc_counts: dict[str, int] = field(default_factory=dict)


def options_echo(options) -> str:
    pairs = sorted(vars(options).items())
    return ";".join(f"{k}={v}" for k, v in pairs)


def rows_from_outcomes(outcomes) -> list[CaseRow]:
    rows = []
    for outcome in outcomes:
        case_id, seq = outcome.case_label.split("#")
        proc_counts: dict[str, int] = {}
        for run in outcome.procedure_runs:
            key = run.procedure.value
            proc_counts[key] = proc_counts.get(key, 0) + run.message_count
        rows.append(
            CaseRow(
                case_seq=int(seq),
                case_id=case_id,
                ue=outcome.ue_id,
                result=outcome.result.value,
                interruption=outcome.interruption,
                msg_counts=dict(outcome.signaling_count),
                proc_counts=proc_counts,
            )
        )
    return sorted(rows, key=lambda r: r.case_seq)


def rows_from_trace(trace: list[TraceLine]) -> list[CaseRow]:
    """Reconstruct the per-case metrics from nothing but the trace."""
    by_case: dict[str, list[TraceLine]] = {}
    for line in trace:
        if line.case != "-":
            by_case.setdefault(line.case, []).append(line)
    rows = []
    for label, lines in by_case.items():
        case_id, seq = label.split("#")
        deliveries = [l for l in lines if l.kind == MESSAGE_DELIVERY]
        msg_counts: dict[str, int] = {}
        proc_counts: dict[str, int] = {}
        for line in deliveries:
            msg_counts[line.name] = msg_counts.get(line.name, 0) + 1
            if line.proc != "-":
                proc_counts[line.proc] = proc_counts.get(line.proc, 0) + 1
        release_ats = [
            l.at for l in deliveries if l.proc == _PROC_RELEASE
        ]
        est_ats = [
            l.at for l in deliveries if l.proc == _PROC_ESTABLISHMENT
        ]
        switched = any(
            l.name == _ROUTER_ADVERTISEMENT and l.proc == _PROC_ESTABLISHMENT
            for l in deliveries
        )
        no_candidate = any(l.name == _NO_CANDIDATE for l in deliveries)
        if switched:
            result = "Switched"
            release_done = max(release_ats) if release_ats else max(est_ats)
            interruption: Optional[int] = max(0, max(est_ats) - release_done)
        elif no_candidate:
            result = "Aborted"
            interruption = None
        elif case_id in _TENTATIVE_CASE_IDS and not release_ats:
            result = "StayedOnCurrent"
            interruption = 0
        else:
            result = "Aborted"
            interruption = None
        ue = next((l.ue for l in lines if l.ue != "-"), "-")
        rows.append(
            CaseRow(
                case_seq=int(seq),
                case_id=case_id,
                ue=ue,
                result=result,
                interruption=interruption,
                msg_counts=msg_counts,
                proc_counts=proc_counts,
            )
        )
    return sorted(rows, key=lambda r: r.case_seq)


def render_csv(scenario_name: str, options, rows: list[CaseRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerow(["meta", "", "", "", "scenario", scenario_name])
    writer.writerow(["meta", "", "", "", "options", options_echo(options)])
    totals: dict[str, int] = {}
    for row in rows:
        prefix = [str(row.case_seq), row.case_id, row.ue]
        writer.writerow(["case", *prefix, "result", row.result])
        writer.writerow(
            ["case", *prefix, "interruption",
             "" if row.interruption is None else str(row.interruption)]
        )
        writer.writerow(
            ["case", *prefix, "messages_total",
             str(sum(row.msg_counts.values()))]
        )
        for name in sorted(row.msg_counts):
            writer.writerow(
                ["case", *prefix, f"msg:{name}", str(row.msg_counts[name])]
            )
            totals[name] = totals.get(name, 0) + row.msg_counts[name]
        for name in sorted(row.proc_counts):
            writer.writerow(
                ["case", *prefix, f"proc:{name}", str(row.proc_counts[name])]
            )
    writer.writerow(
        ["total", "", "", "", "messages_total", str(sum(totals.values()))]
    )
    for name in sorted(totals):
        writer.writerow(["total", "", "", "", f"msg:{name}", str(totals[name])])
    return buf.getvalue()


def build_report_csv(scenario_name: str, options, outcomes) -> str:
    return render_csv(scenario_name, options, rows_from_outcomes(outcomes))


def recompute_report_csv(
    scenario_name: str, options, trace: list[TraceLine]
) -> str:
    return render_csv(scenario_name, options, rows_from_trace(trace))
