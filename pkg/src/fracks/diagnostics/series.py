from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..io import write_csv, write_json


@dataclass
class DiagnosticsSeries:
    """Time-indexed records (t, metric, value, mc_error) of one run."""

    run_manifest: str = ""
    records: list[tuple[float, str, float, float]] = field(default_factory=list)
    blowup_time: float | None = None
    termination: str | None = None
    final: object | None = field(default=None, repr=False, compare=False)

    def add(self, t: float, name: str, value: float, mc_error: float = 0.0):
        if self.records and t < self.records[-1][0]:
            raise ValueError(f"time went backwards: {t} < {self.records[-1][0]}")
        if not mc_error >= 0.0:
            raise ValueError(f"mc_error must be nonnegative, got {mc_error}")
        self.records.append((float(t), str(name), float(value), float(mc_error)))

    def flag_blowup(self, t: float, reason: str):
        self.blowup_time = float(t)
        self.termination = reason

    @property
    def blew_up(self) -> bool:
        return self.blowup_time is not None

    def metrics(self) -> list[str]:
        return sorted({r[1] for r in self.records})

    def get(self, name: str):
        """Arrays (t, value, mc_error) for one metric."""
        rows = [r for r in self.records if r[1] == name]
        if not rows:
            return np.empty(0), np.empty(0), np.empty(0)
        t, _, v, e = zip(*rows)
        return np.array(t), np.array(v), np.array(e)

    def to_csv(self, path):
        return write_csv(path, ["t", "metric", "value", "mc_error"], self.records)

    def manifest(self) -> dict:
        return {
            "run_manifest": self.run_manifest,
            "metrics": self.metrics(),
            "n_records": len(self.records),
            "blowup": self.blew_up,
            "blowup_time": self.blowup_time,
            "termination": self.termination,
        }

    def to_json(self, path):
        return write_json(path, self.manifest())
