"""Randomized scenario fuzzing at a small budget (the acceptance suite runs
the full ten-thousand-event campaign)."""

from fuzz_support import run_fuzz


def test_fuzz_short_campaign():
    stats = run_fuzz(min_events=2_000, seed=7)
    assert stats.events >= 2_000
    assert stats.scenarios > 5
    # The campaign must exercise both clean switches and failure outcomes.
    assert stats.outcomes.get("Switched", 0) > 0
    assert (
        stats.outcomes.get("Aborted", 0)
        + stats.outcomes.get("StayedOnCurrent", 0)
        > 0
    )


def test_fuzz_is_replayable():
    first = run_fuzz(min_events=800, seed=21)
    second = run_fuzz(min_events=800, seed=21)
    assert first.outcomes == second.outcomes
    assert first.events == second.events
