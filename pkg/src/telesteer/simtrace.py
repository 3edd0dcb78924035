"""Run traces: one line per control tick, self-describing header.

The header carries the run metadata and the full scenario in canonical
JSON, so a trace file alone is enough to reproduce or re-plot the run.
Line-delimited text was chosen over a binary container for streaming
append and easy diffing.  The canonical byte form zeroes the wall-clock
solve-time column (the one field that legitimately differs between
otherwise identical runs) so reproducibility can be checked bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field, replace

import numpy as np

__all__ = ["TickRecord", "SimTrace", "TRACE_COLUMNS"]

FORMAT_NAME = "telesteer-trace"
FORMAT_VERSION = 1

TRACE_COLUMNS = (
    "t",
    "x",
    "y",
    "heading",
    "delta_fbl",
    "delta_ref",
    "delta_applied",
    "p_fl",
    "p_fr",
    "cost_ref",
    "cost_field",
    "cost_rate",
    "sqp_iters",
    "slack_used",
    "solve_time",
    "fault",
)

_INT_COLUMNS = {"sqp_iters"}
_FLAG_COLUMNS = {"slack_used", "fault"}


@dataclass(frozen=True)
class TickRecord:
    t: float
    x: float
    y: float
    heading: float
    delta_fbl: float
    delta_ref: float
    delta_applied: float
    p_fl: float
    p_fr: float
    cost_ref: float
    cost_field: float
    cost_rate: float
    sqp_iters: int
    slack_used: bool
    solve_time: float
    fault: bool

    def as_line(self) -> str:
        parts = []
        for name in TRACE_COLUMNS:
            v = getattr(self, name)
            if name in _FLAG_COLUMNS:
                parts.append("1" if v else "0")
            elif name in _INT_COLUMNS:
                parts.append(str(int(v)))
            else:
                parts.append(repr(float(v)))
        return " ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> "TickRecord":
        parts = line.split()
        if len(parts) != len(TRACE_COLUMNS):
            raise ValueError(
                f"trace line has {len(parts)} fields, expected {len(TRACE_COLUMNS)}"
            )
        kw = {}
        for name, tok in zip(TRACE_COLUMNS, parts):
            if name in _FLAG_COLUMNS:
                kw[name] = tok == "1"
            elif name in _INT_COLUMNS:
                kw[name] = int(tok)
            else:
                kw[name] = float(tok)
        return cls(**kw)


@dataclass
class SimTrace:
    scenario_name: str
    scenario_hash: str
    scenario_json: str
    assisted: bool
    seed: int
    t_s: float
    records: list[TickRecord] = dataclass_field(default_factory=list)

    def append(self, record: TickRecord) -> None:
        if self.records:
            expected = self.records[-1].t + self.t_s
            if abs(record.t - expected) > 1e-9:
                raise ValueError(
                    f"tick at t={record.t} breaks the {self.t_s}s spacing"
                )
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        if name not in TRACE_COLUMNS:
            raise ValueError(f"unknown trace column {name!r}")
        vals = [getattr(r, name) for r in self.records]
        if name in _INT_COLUMNS:
            return np.array(vals, dtype=int)
        if name in _FLAG_COLUMNS:
            return np.array(vals, dtype=bool)
        return np.array(vals, dtype=float)

    def max_potential(self) -> float:
        if not self.records:
            return 0.0
        return float(
            max(max(r.p_fl, r.p_fr) for r in self.records)
        )

    # -- serialization -------------------------------------------------

    def _header_lines(self) -> list[str]:
        return [
            f"# {FORMAT_NAME} {FORMAT_VERSION}",
            f"# scenario-name: {self.scenario_name}",
            f"# scenario-hash: {self.scenario_hash}",
            f"# assisted: {1 if self.assisted else 0}",
            f"# seed: {self.seed}",
            f"# tick: {self.t_s!r}",
            f"# scenario-json: {self.scenario_json}",
            f"# columns: {' '.join(TRACE_COLUMNS)}",
        ]

    def to_text(self) -> str:
        lines = self._header_lines()
        lines.extend(r.as_line() for r in self.records)
        return "\n".join(lines) + "\n"

    def canonical_bytes(self) -> bytes:
        """Byte-exact form with solve times zeroed, for reproducibility
        comparison."""
        lines = self._header_lines()
        lines.extend(
            replace(r, solve_time=0.0).as_line() for r in self.records
        )
        return ("\n".join(lines) + "\n").encode("utf-8")

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "SimTrace":
        meta: dict[str, str] = {}
        records: list[TickRecord] = []
        columns_seen = None
        version_seen = False
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith(FORMAT_NAME):
                    ver = body[len(FORMAT_NAME) :].strip()
                    if ver != str(FORMAT_VERSION):
                        raise ValueError(f"unsupported trace version {ver!r}")
                    version_seen = True
                elif ":" in body:
                    key, val = body.split(":", 1)
                    meta[key.strip()] = val.strip()
                continue
            if not version_seen:
                raise ValueError("not a trace file: missing format line")
            records.append(TickRecord.from_line(line))
        if not version_seen:
            raise ValueError("not a trace file: missing format line")
        columns_seen = meta.get("columns")
        if columns_seen != " ".join(TRACE_COLUMNS):
            raise ValueError("trace column layout does not match this reader")
        trace = cls(
            scenario_name=meta.get("scenario-name", ""),
            scenario_hash=meta.get("scenario-hash", ""),
            scenario_json=meta.get("scenario-json", ""),
            assisted=meta.get("assisted", "0") == "1",
            seed=int(meta.get("seed", "0")),
            t_s=float(meta.get("tick", "0.05")),
        )
        for r in records:
            trace.append(r)
        return trace

    @classmethod
    def load(cls, path: str) -> "SimTrace":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())
