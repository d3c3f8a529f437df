"""Catalog of the 16 device characterization metrics and their marginal families."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .marginals import Family

__all__ = ["MetricClass", "MetricId", "CATALOG", "N_METRICS", "metric_by_name", "default_families"]


class MetricClass(str, Enum):
    SPAM = "SPAM"
    CNOT = "CNOT"
    T2 = "T2"
    HGATE = "HGATE"


@dataclass(frozen=True)
class MetricId:
    index: int
    cls: MetricClass
    registers: tuple[int, ...]

    @property
    def name(self) -> str:
        return f"x{self.index}"

    @property
    def is_fidelity(self) -> bool:
        return self.cls is not MetricClass.T2

    def describe(self) -> str:
        if self.cls is MetricClass.CNOT:
            c, t = self.registers
            return f"CNOT fidelity, control {c}, target {t}"
        label = {
            MetricClass.SPAM: "SPAM fidelity",
            MetricClass.T2: "T2 time (us)",
            MetricClass.HGATE: "H fidelity",
        }[self.cls]
        return f"{label}, register {self.registers[0]}"


CATALOG: tuple[MetricId, ...] = (
    *(MetricId(i, MetricClass.SPAM, (i,)) for i in range(4)),
    MetricId(4, MetricClass.CNOT, (0, 1)),
    MetricId(5, MetricClass.CNOT, (2, 1)),
    *(MetricId(6 + r, MetricClass.T2, (r,)) for r in range(5)),
    *(MetricId(11 + r, MetricClass.HGATE, (r,)) for r in range(5)),
)
N_METRICS = len(CATALOG)


def metric_by_name(name: str) -> MetricId:
    """Look up ``"x7"``-style identifiers; raises ``KeyError`` for unknown ids."""
    for m in CATALOG:
        if m.name == name:
            return m
    raise KeyError(f"unknown metric id {name!r}; expected x0..x{N_METRICS - 1}")


def default_families() -> tuple[Family, ...]:
    return tuple(Family.BETA if m.is_fidelity else Family.GAMMA for m in CATALOG)
