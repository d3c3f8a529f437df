"""Characterization time series: CSV I/O, monthly slicing and per-epoch fitting.

CSV layout: header ``date,metric_id,value``, ISO-8601 dates, metric ids
``x0``..``x15``, one observation per row.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .copula import CopulaModel, GaussianCopula, sample
from .metrics import CATALOG, N_METRICS, metric_by_name

__all__ = [
    "IngestError",
    "ParseError",
    "DomainError",
    "MissingMetricError",
    "InsufficientDataError",
    "CharacterizationSeries",
    "EpochTable",
    "load_csv",
    "epoch_slice",
    "fit_epoch_model",
    "synth_generate",
    "HEADER",
]

HEADER = ("date", "metric_id", "value")
MIN_DAYS = 8


class IngestError(ValueError):
    pass


class ParseError(IngestError):
    pass


class DomainError(IngestError):
    pass


class MissingMetricError(IngestError):
    pass


class InsufficientDataError(IngestError):
    pass


@dataclass(frozen=True)
class CharacterizationSeries:
    """Per-metric ``(date, value)`` observations, dates strictly increasing."""

    observations: dict[str, tuple[tuple[dt.date, float], ...]]

    def counts(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.observations.items()}

    def months(self) -> list[str]:
        return sorted({d.strftime("%Y-%m") for obs in self.observations.values() for d, _ in obs})


@dataclass(frozen=True, eq=False)
class EpochTable:
    label: str
    dates: tuple[dt.date, ...]
    values: np.ndarray  # (n_days, 16), columns in metric order


def _in_domain(metric_name: str, value: float) -> bool:
    if not np.isfinite(value):
        return False
    if metric_by_name(metric_name).is_fidelity:
        return 0.0 <= value <= 1.0
    return value > 0.0


def load_csv(path) -> CharacterizationSeries:
    path = Path(path)
    rows: dict[str, list[tuple[dt.date, float]]] = {m.name: [] for m in CATALOG}
    problems = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise ParseError(f"{path}: expected header {','.join(HEADER)}, got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            raw_date, metric, raw_value = (c.strip() for c in row)
            try:
                day = dt.date.fromisoformat(raw_date)
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad date {raw_date!r}") from None
            if metric not in rows:
                raise ParseError(f"{path}:{lineno}: unknown metric id {metric!r}")
            try:
                # float() ignores the process locale
                value = float(raw_value)
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad value {raw_value!r}") from None
            if not _in_domain(metric, value):
                problems.append(f"row {lineno}: {metric}={raw_value} outside its physical range")
                continue
            rows[metric].append((day, value))
    if problems:
        raise DomainError(f"{path}: " + "; ".join(problems))
    missing = [k for k, v in rows.items() if not v]
    if missing:
        raise MissingMetricError(f"{path}: no observations for metric(s) {', '.join(missing)}")
    observations = {}
    for k, obs in rows.items():
        obs.sort(key=lambda t: t[0])
        dates = [d for d, _ in obs]
        if any(a >= b for a, b in zip(dates, dates[1:])):
            raise ParseError(f"{path}: duplicate dates for metric {k}")
        observations[k] = tuple(obs)
    return CharacterizationSeries(observations)


def epoch_slice(series: CharacterizationSeries, month: str) -> EpochTable:
    """Daily values for ``month`` (``YYYY-MM``), aligned on dates every metric shares."""
    per_metric = {}
    for m in CATALOG:
        vals = {d: v for d, v in series.observations[m.name] if d.strftime("%Y-%m") == month}
        if len(vals) < MIN_DAYS:
            raise InsufficientDataError(f"{m.name} has {len(vals)} day(s) in {month}; need {MIN_DAYS}")
        per_metric[m.name] = vals
    common = sorted(set.intersection(*(set(v) for v in per_metric.values())))
    if len(common) < MIN_DAYS:
        raise InsufficientDataError(f"only {len(common)} day(s) in {month} are shared by all metrics")
    values = np.array([[per_metric[m.name][d] for m in CATALOG] for d in common])
    return EpochTable(month, tuple(common), values)


def fit_epoch_model(table: EpochTable, families=None) -> CopulaModel:
    model = GaussianCopula(families=families, epoch_label=table.label).fit(table.values).model_
    return CopulaModel(model.marginals, model.sigma, table.label, tuple(m.name for m in CATALOG))


def synth_generate(ground_truth: CopulaModel, days: int, seed: int, path, start: dt.date = dt.date(2022, 1, 1)):
    """Write ``days`` daily draws from ``ground_truth`` as a CSV; returns the path."""
    if days < MIN_DAYS:
        raise ValueError(f"days must be at least {MIN_DAYS}")
    if ground_truth.dim != N_METRICS:
        raise ValueError(f"ground truth must cover {N_METRICS} metrics")
    draws = sample(ground_truth, days, seed)
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for i, row in enumerate(draws):
            day = (start + dt.timedelta(days=i)).isoformat()
            for m in CATALOG:
                writer.writerow((day, m.name, repr(float(row[m.index]))))
    return path
