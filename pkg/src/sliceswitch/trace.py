"""Line-oriented trace files and golden-trace comparison.

One event per line, pipe-delimited, stable field order:

    seq|at|kind|name|src|dst|ue|case|proc

Golden comparison projects away seq and at, so latency changes that preserve
event ordering do not break sequence conformance.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import TraceFormatError

FIELD_COUNT = 9


@dataclass
class TraceLine:
    seq: int
    at: int
    kind: str
    name: str
    src: str
    dst: str
    ue: str
    case: str
    proc: str

    def format(self) -> str:
        return "|".join(
            str(v)
            for v in (
                self.seq, self.at, self.kind, self.name, self.src,
                self.dst, self.ue, self.case, self.proc,
            )
        )

    def projection(self) -> tuple:
        """The name-and-order view used for golden comparison."""
        return (self.kind, self.name, self.src, self.dst, self.ue,
                self.case, self.proc)


def parse_line(text: str, line_no: int) -> TraceLine:
    fields = text.rstrip("\n").split("|")
    if len(fields) != FIELD_COUNT:
        raise TraceFormatError(
            f"line {line_no}: expected {FIELD_COUNT} pipe-delimited fields, "
            f"got {len(fields)}"
        )
    try:
        seq, at = int(fields[0]), int(fields[1])
    except ValueError:
        raise TraceFormatError(
            f"line {line_no}: seq/at fields must be integers"
        ) from None
    return TraceLine(seq, at, *fields[2:])


def write_trace(path: str | Path, lines: list[TraceLine]) -> None:
    Path(path).write_text(
        "".join(line.format() + "\n" for line in lines), encoding="utf-8"
    )


def load_trace(path: str | Path) -> list[TraceLine]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, text in enumerate(fh, start=1):
            if not text.strip():
                continue
            out.append(parse_line(text, line_no))
    return out


def format_trace(lines: list[TraceLine]) -> str:
    return "".join(line.format() + "\n" for line in lines)


def diff_traces(
    actual: list[TraceLine], golden: list[TraceLine]
) -> Optional[tuple[int, str]]:
    """First divergence between two traces' projections, or None if equal.

    Returns (1-based line number, human-readable detail).
    """
    for idx, (a, g) in enumerate(zip(actual, golden), start=1):
        if a.projection() != g.projection():
            return idx, f"expected {g.format()!r}, got {a.format()!r}"
    if len(actual) != len(golden):
        idx = min(len(actual), len(golden)) + 1
        if len(actual) > len(golden):
            return idx, f"extra line {actual[idx - 1].format()!r}"
        return idx, f"missing line {golden[idx - 1].format()!r}"
    return None
