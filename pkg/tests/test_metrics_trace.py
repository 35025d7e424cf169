"""Trace file format, golden diffing and metrics recomputation."""

import pytest

from sliceswitch.engine import run_scenario
from sliceswitch.errors import TraceFormatError
from sliceswitch.metrics import recompute_report_csv, rows_from_trace
from sliceswitch.trace import (
    TraceLine,
    diff_traces,
    load_trace,
    parse_line,
    write_trace,
)

from conftest import make_scenario, network_trigger, ue_trigger


def sample_line():
    return TraceLine(
        seq=7, at=12, kind="MessageDelivery", name="RegistrationRequest",
        src="ue1", dst="amf1", ue="ue1", case="C1b#1", proc="Registration",
    )


class TestTraceFormat:
    def test_roundtrip(self):
        line = sample_line()
        assert parse_line(line.format(), 1) == line

    def test_field_count_diagnostics(self):
        with pytest.raises(TraceFormatError, match="line 3"):
            parse_line("1|2|only|four|fields", 3)

    def test_non_integer_seq(self):
        with pytest.raises(TraceFormatError):
            parse_line("x|2|a|b|c|d|e|f|g", 1)

    def test_file_roundtrip(self, tmp_path):
        result = run_scenario(make_scenario(triggers=[ue_trigger()]))
        path = tmp_path / "run.trace"
        write_trace(path, result.trace)
        loaded = load_trace(path)
        assert [l.format() for l in loaded] == [
            l.format() for l in result.trace
        ]


class TestDiffTraces:
    def test_identical(self):
        result = run_scenario(make_scenario(triggers=[ue_trigger()]))
        assert diff_traces(result.trace, result.trace) is None

    def test_timestamps_ignored(self):
        fast = run_scenario(make_scenario(triggers=[ue_trigger()]))
        slow = run_scenario(
            make_scenario(triggers=[ue_trigger()], latency_default=3)
        )
        assert diff_traces(fast.trace, slow.trace) is None

    def test_swapped_lines_reported_with_line_number(self):
        result = run_scenario(make_scenario(triggers=[ue_trigger()]))
        swapped = list(result.trace)
        swapped[3], swapped[4] = swapped[4], swapped[3]
        divergence = diff_traces(swapped, result.trace)
        assert divergence is not None
        assert divergence[0] == 4

    def test_extra_lines_reported(self):
        result = run_scenario(make_scenario(triggers=[ue_trigger()]))
        divergence = diff_traces(result.trace, result.trace[:-1])
        assert divergence == (
            len(result.trace),
            f"extra line {result.trace[-1].format()!r}",
        )


class TestMetrics:
    def run(self, **kwargs):
        scenario = make_scenario(**kwargs)
        return scenario, run_scenario(scenario)

    def test_recompute_matches_emitted(self):
        scenario, result = self.run(triggers=[network_trigger()])
        recomputed = recompute_report_csv(
            scenario.name, result.sim.world.options, result.trace
        )
        assert recomputed == result.metrics_csv

    def test_recompute_matches_for_aborted(self):
        from conftest import SLICE_Z

        trigger = ue_trigger(target=SLICE_Z)
        scenario, result = self.run(triggers=[trigger])
        assert result.outcomes[0].result.value == "Aborted"
        recomputed = recompute_report_csv(
            scenario.name, result.sim.world.options, result.trace
        )
        assert recomputed == result.metrics_csv

    def test_counts_equal_delivery_events(self):
        _, result = self.run(triggers=[network_trigger()])
        rows = rows_from_trace(result.trace)
        deliveries = [
            l for l in result.trace
            if l.kind == "MessageDelivery" and l.case != "-"
        ]
        assert sum(sum(r.msg_counts.values()) for r in rows) == len(deliveries)

    def test_interruption_row_matches_outcome(self):
        _, result = self.run(triggers=[ue_trigger()])
        rows = rows_from_trace(result.trace)
        assert rows[0].interruption == result.outcomes[0].interruption

    def test_csv_shape(self):
        _, result = self.run(triggers=[ue_trigger()])
        lines = result.metrics_csv.splitlines()
        assert lines[0] == "section,case_seq,case_id,ue,key,value"
        assert lines[1].startswith("meta,,,,scenario,")
        assert any(l.startswith("case,1,C2b,ue1,result,") for l in lines)
        assert any(l.startswith("total,,,,messages_total,") for l in lines)
