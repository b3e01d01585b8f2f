"""Tradeoff points/curves and their delimited-text form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class TradeoffPoint:
    D: float
    R: float
    E: float | None = None
    L: float | None = None
    case: str | None = None


class TradeoffCurve:
    """An ordered list of :class:`TradeoffPoint` with a fixed column set."""

    def __init__(self, points, columns=("D", "R", "E")):
        self.points = list(points)
        names = {f.name for f in fields(TradeoffPoint)}
        unknown = set(columns) - names
        if unknown:
            raise ValueError(f"unknown curve columns {sorted(unknown)}")
        self.columns = tuple(columns)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def column(self, name) -> np.ndarray:
        return np.array([getattr(p, name) for p in self.points], dtype=float)

    @property
    def D(self):
        return self.column("D")

    @property
    def R(self):
        return self.column("R")

    @property
    def E(self):
        return self.column("E")

    @property
    def L(self):
        return self.column("L")

    def to_csv(self, path=None, digits: int = 12) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for p in self.points:
            row = []
            for c in self.columns:
                v = getattr(p, c)
                row.append(v if isinstance(v, str) or v is None else f"{v:.{digits}g}")
            w.writerow(row)
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text
