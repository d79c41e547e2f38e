"""Per-constraint result rows and run metadata shared by drivers and the CLI."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

COLUMNS = (
    "constraint_id", "part", "b", "lambda", "violation",
    "bound_sqrt_j", "bound_nlog", "bound_Lb", "bound_delta", "bound_min", "ratio",
)


@dataclass(frozen=True)
class ConstraintRow:
    constraint_id: int
    part: str
    b: float
    lam: float
    violation: float
    bound_sqrt_j: float
    bound_nlog: float
    bound_Lb: float
    bound_delta: float

    @property
    def bound_min(self) -> float:
        return min(self.bound_sqrt_j, self.bound_nlog, self.bound_Lb, self.bound_delta)

    @property
    def ratio(self) -> float:
        return self.violation / self.bound_min

    def values(self) -> tuple:
        return (self.constraint_id, self.part, self.b, self.lam, self.violation,
                self.bound_sqrt_j, self.bound_nlog, self.bound_Lb, self.bound_delta,
                self.bound_min, self.ratio)


@dataclass
class RoundingReport:
    """Rows in constraint order plus run metadata.

    ``meta`` holds only reproducible facts (seed, preset, counters);
    ``wall_time`` is kept apart so emitted reports stay byte-identical.
    """

    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    wall_time: float | None = None

    @property
    def max_ratio(self) -> float:
        return max((r.ratio for r in self.rows), default=0.0)

    @property
    def max_violation(self) -> float:
        return max((r.violation for r in self.rows), default=0.0)

    def check(self):
        for r in self.rows:
            if not math.isfinite(r.ratio) or r.violation < 0:
                raise ValueError(f"row {r.constraint_id} has an invalid ratio")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".6g")


def _meta_lines(meta: dict) -> list[str]:
    out = []
    for key in sorted(meta):
        val = meta[key]
        if isinstance(val, (list, dict)):
            continue
        out.append(f"# {key}: {_fmt(val) if isinstance(val, (int, float)) and not isinstance(val, bool) else val}")
    return out


def emit_csv(report: RoundingReport) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in report.rows:
        writer.writerow([_fmt(v) for v in row.values()])
    return buf.getvalue().encode("utf-8")


def emit_table(report: RoundingReport) -> bytes:
    cells = [list(COLUMNS)] + [[_fmt(v) for v in row.values()] for row in report.rows]
    widths = [max(len(r[c]) for r in cells) for c in range(len(COLUMNS))]
    lines = _meta_lines(report.meta)
    for r in cells:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(r, widths)).rstrip())
    if report.rows:
        lines.append(f"# max violation: {_fmt(report.max_violation)}  max ratio: {_fmt(report.max_ratio)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def emit_report(report: RoundingReport, fmt: str = "csv") -> bytes:
    """Serialize rows deterministically; wall time is never included."""
    if fmt == "csv":
        return emit_csv(report)
    if fmt in ("table", "table-text", "text"):
        return emit_table(report)
    raise ValueError(f"unknown report format {fmt!r}")
