import datetime as dt

import numpy as np
import pytest

from qstab.ingest import (
    DomainError,
    InsufficientDataError,
    MissingMetricError,
    ParseError,
    epoch_slice,
    fit_epoch_model,
    load_csv,
    synth_generate,
)
from qstab.metrics import CATALOG


def write_rows(path, rows, header="date,metric_id,value"):
    path.write_text(header + "\n" + "".join(f"{d},{m},{v}\n" for d, m, v in rows), encoding="utf-8")
    return path


def full_rows(days=10, override=None):
    rng = np.random.default_rng(0)
    rows = []
    for i in range(days):
        day = (dt.date(2022, 1, 1) + dt.timedelta(days=i)).isoformat()
        for m in CATALOG:
            v = rng.uniform(80, 120) if not m.is_fidelity else rng.uniform(0.95, 0.999)
            rows.append((day, m.name, repr(v)))
    if override:
        rows = [override(r) or r for r in rows]
    return rows


def test_synth_round_trip(tmp_path, washington):
    path = synth_generate(washington, 20, 3, tmp_path / "s.csv")
    raw = path.read_bytes()
    assert b"\r" not in raw
    series = load_csv(path)
    table = epoch_slice(series, "2022-01")
    from qstab.copula import sample

    np.testing.assert_allclose(table.values, sample(washington, 20, 3), rtol=1e-12, atol=0)
    assert table.dates[0] == dt.date(2022, 1, 1)


def test_out_of_range_fidelity_reports_row(tmp_path):
    rows = full_rows(override=lambda r: (r[0], r[1], "1.3") if r[0] == "2022-01-03" and r[1] == "x2" else None)
    with pytest.raises(DomainError, match=r"row \d+: x2=1.3"):
        load_csv(write_rows(tmp_path / "d.csv", rows))


def test_nonpositive_t2(tmp_path):
    rows = full_rows(override=lambda r: (r[0], r[1], "-4") if r[1] == "x7" and r[0] == "2022-01-02" else None)
    with pytest.raises(DomainError, match="x7"):
        load_csv(write_rows(tmp_path / "d.csv", rows))


def test_missing_metric(tmp_path):
    rows = [r for r in full_rows() if r[1] != "x9"]
    with pytest.raises(MissingMetricError, match="x9"):
        load_csv(write_rows(tmp_path / "d.csv", rows))


@pytest.mark.parametrize(
    "bad, pattern",
    [
        (("2022-13-01", "x0", "0.9"), "bad date"),
        (("2022-01-01", "x42", "0.9"), "unknown metric"),
        (("2022-01-01", "x0", "zero"), "bad value"),
    ],
)
def test_malformed_rows(tmp_path, bad, pattern):
    with pytest.raises(ParseError, match=pattern):
        load_csv(write_rows(tmp_path / "d.csv", [bad, *full_rows()]))


def test_bad_header_and_field_count(tmp_path):
    with pytest.raises(ParseError, match="header"):
        load_csv(write_rows(tmp_path / "h.csv", full_rows(), header="day,metric,value"))
    p = tmp_path / "f.csv"
    p.write_text("date,metric_id,value\n2022-01-01,x0\n", encoding="utf-8")
    with pytest.raises(ParseError, match="3 fields"):
        load_csv(p)


def test_duplicate_dates(tmp_path):
    rows = full_rows()
    with pytest.raises(ParseError, match="duplicate"):
        load_csv(write_rows(tmp_path / "d.csv", rows + rows[:1]))


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_csv(tmp_path / "nope.csv")


def test_epoch_slice_needs_enough_days(tmp_path):
    series = load_csv(write_rows(tmp_path / "d.csv", full_rows(days=7)))
    with pytest.raises(InsufficientDataError):
        epoch_slice(series, "2022-01")
    series = load_csv(write_rows(tmp_path / "e.csv", full_rows(days=10)))
    with pytest.raises(InsufficientDataError):
        epoch_slice(series, "2022-02")
    assert epoch_slice(series, "2022-01").values.shape == (10, 16)


def test_epoch_slice_aligns_on_common_days(tmp_path):
    rows = [r for r in full_rows(days=12) if not (r[1] == "x3" and r[0] == "2022-01-05")]
    table = epoch_slice(load_csv(write_rows(tmp_path / "d.csv", rows)), "2022-01")
    assert len(table.dates) == 11
    assert dt.date(2022, 1, 5) not in table.dates


def test_constant_column_rejected(tmp_path):
    rows = full_rows(override=lambda r: (r[0], r[1], "0.97") if r[1] == "x1" else None)
    table = epoch_slice(load_csv(write_rows(tmp_path / "d.csv", rows)), "2022-01")
    with pytest.raises(ValueError, match="variance"):
        fit_epoch_model(table)


def test_fit_recovers_ground_truth(tmp_path, washington):
    path = synth_generate(washington, 400, 11, tmp_path / "long.csv")
    series = load_csv(path)
    assert series.months()[0] == "2022-01"
    # pool every day into one table to test the fit itself
    values = np.array([[v for _, v in series.observations[m.name]] for m in CATALOG]).T
    from qstab.ingest import EpochTable

    model = fit_epoch_model(EpochTable("all", (), values))
    for fit, true in zip(model.marginals, washington.marginals):
        assert fit.mean() == pytest.approx(true.mean(), abs=4 * np.sqrt(true.var() / 400))
        assert np.sqrt(fit.var()) == pytest.approx(np.sqrt(true.var()), rel=0.2)
    assert np.max(np.abs(model.sigma - washington.sigma)) < 0.2
