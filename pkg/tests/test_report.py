"""Sweep orchestration, convergence checking, and the collector stage."""

import dataclasses
import json

import numpy as np
import pytest

from spherekink.report import (
    CSV_COLUMNS,
    SweepConfig,
    VERSION_STAMP,
    class_of_level,
    convergence_check,
    emit_plots,
    record_from_doc,
    record_to_doc,
    run_sweep,
    sweep_report_from_doc,
    sweep_report_to_doc,
    write_report,
    write_sweep_csv,
)

SMALL = dict(cutoff=16.0, grid_size=2001)


@pytest.fixture(scope="module")
def small_sweep():
    """A cheap two-level sweep used by the write/round-trip tests."""
    return run_sweep(SweepConfig(m=3, omega=3.0, max_zeros=2, **SMALL))


def test_class_of_level():
    assert class_of_level(1) == "odd"
    assert class_of_level(2) == "even"
    assert class_of_level(0) == "even"


def test_empty_sweep():
    report = run_sweep(SweepConfig(m=3, omega=3.0, max_zeros=0, **SMALL))
    assert report.records == ()
    assert report.failures == ()
    assert report.hypothesis is True
    check = convergence_check(report)
    assert check.status == "insufficient data"


def test_sweep_structure(sweep33):
    assert [r.sequence_key for r in sweep33.records] == [
        ("even", 2), ("even", 4), ("odd", 1), ("odd", 3)]
    assert sweep33.singular_energy == pytest.approx(3.0, abs=1e-12)
    assert sweep33.version == VERSION_STAMP
    assert len(sweep33.convergence_table) == 4
    for cls, zeros, gap, sup, hn in sweep33.convergence_table:
        assert gap > 0.0
        assert sup < np.pi / 2.0
        assert hn > 0.0


def test_sweep_records_have_expected_energies(sweep33):
    by_key = {r.sequence_key: r for r in sweep33.records}
    assert by_key[("odd", 1)].energy == pytest.approx(8.0 / 3.0, abs=1e-7)
    for rec in sweep33.records:
        assert rec.energy < 3.0
        assert rec.spectral.index == rec.sequence_key[1]
        assert rec.spectral.nullity_estimate == 0


def test_convergence_check_passes(sweep33):
    check = convergence_check(sweep33)
    assert check.status == "pass"
    assert check.failures == ()
    assert check.slack == 1e-6


def test_convergence_check_catches_corrupted_energy(sweep33):
    bad_rec = dataclasses.replace(sweep33.records[0],
                                  energy=sweep33.singular_energy + 0.1)
    report = dataclasses.replace(sweep33, records=(bad_rec,) + sweep33.records[1:])
    check = convergence_check(report)
    assert check.status == "fail"
    assert any("connecting-profile energy bound" in f for f in check.failures)


def test_convergence_check_catches_wrong_trend(sweep33):
    recs = list(sweep33.records)
    even2 = recs[0]
    bumped = dataclasses.replace(recs[1], H_norm=even2.H_norm + 1.0)
    report = dataclasses.replace(sweep33, records=(even2, bumped) + tuple(recs[2:]))
    check = convergence_check(report)
    assert check.status == "fail"
    assert any("H_norm fails to decrease" in f for f in check.failures)


def test_failures_are_collected_not_raised():
    # levels above the first do not exist at these parameters
    report = run_sweep(SweepConfig(m=15, omega=32.0, max_zeros=3,
                                   cutoff=12.0, grid_size=1201))
    assert [r.sequence_key for r in report.records] == [("even", 2), ("odd", 1)]
    assert report.hypothesis is False
    assert len(report.failures) == 1
    cls, zeros, message = report.failures[0]
    assert (cls, zeros) == ("odd", 3)
    assert "transition" in message or "bracket" in message.lower()


def test_record_doc_round_trip(sweep33):
    rec = sweep33.records[2]
    back = record_from_doc(record_to_doc(rec))
    assert back.sequence_key == rec.sequence_key
    assert back.energy == rec.energy
    assert back.H_norm == rec.H_norm
    assert back.spectral.index == rec.spectral.index
    assert back.spectral.leading_eigenvalues == rec.spectral.leading_eigenvalues
    assert np.array_equal(back.profile.h, rec.profile.h)


def test_sweep_report_doc_round_trip(small_sweep):
    doc = sweep_report_to_doc(small_sweep)
    back = sweep_report_from_doc(doc)
    assert back.singular_energy == small_sweep.singular_energy
    assert back.version == small_sweep.version
    assert len(back.records) == len(small_sweep.records)
    assert back.convergence_table == small_sweep.convergence_table
    from spherekink.serialize import dumps
    assert dumps(sweep_report_to_doc(back)) == dumps(doc)


def test_csv_layout(small_sweep, tmp_path):
    path = tmp_path / "sweep.csv"
    write_sweep_csv(small_sweep, path)
    lines = path.read_text(encoding="ascii").splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + len(small_sweep.records)
    row = dict(zip(CSV_COLUMNS, lines[2].split(",")))
    assert row["class"] == "odd"
    assert row["zeros"] == "1"
    assert float(row["energy"]) == pytest.approx(8.0 / 3.0, abs=1e-6)
    assert float(row["energy_gap"]) == pytest.approx(3.0 - float(row["energy"]),
                                                     abs=1e-12)
    assert row["index"] == "1"
    assert row["N"] == "2001"


def test_write_report_produces_expected_files(small_sweep, tmp_path):
    written = write_report(small_sweep, tmp_path)
    names = sorted(p.name for p in written)
    assert names == ["solution_even_2.json", "solution_odd_1.json",
                     "sweep.csv", "sweep.json"]
    doc = json.loads((tmp_path / "sweep.json").read_text())
    assert doc["version"] == VERSION_STAMP
    assert len(doc["records"]) == 2


def test_write_report_is_byte_deterministic(small_sweep, tmp_path):
    d1 = tmp_path / "one"
    d2 = tmp_path / "two"
    w1 = write_report(small_sweep, d1)
    # a freshly recomputed sweep must serialise to identical bytes
    again = run_sweep(SweepConfig(m=3, omega=3.0, max_zeros=2, **SMALL))
    w2 = write_report(again, d2)
    assert [p.name for p in w1] == [p.name for p in w2]
    for p1, p2 in zip(w1, w2):
        assert p1.read_bytes() == p2.read_bytes()


def test_out_dir_config_triggers_write(tmp_path):
    out = tmp_path / "auto"
    run_sweep(SweepConfig(m=3, omega=3.0, max_zeros=1, out_dir=str(out), **SMALL))
    assert (out / "sweep.csv").exists()
    assert (out / "sweep.json").exists()
    assert (out / "solution_odd_1.json").exists()


def test_emit_plots_files_and_warning(small_sweep, tmp_path):
    written = emit_plots(small_sweep, tmp_path)
    names = sorted(p.name for p in written)
    assert names == ["profile_even_2.svg", "profile_odd_1.svg", "summary.svg"]
    body = (tmp_path / "summary.svg").read_text(encoding="ascii")
    assert body.startswith("<svg")
    assert "energy" in body

    empty = run_sweep(SweepConfig(m=3, omega=3.0, max_zeros=0, **SMALL))
    with pytest.warns(UserWarning, match="no plots"):
        assert emit_plots(empty, tmp_path / "none") == []


def test_solution_json_round_trips_through_loader(small_sweep, tmp_path):
    from spherekink.serialize import load_profile
    write_report(small_sweep, tmp_path)
    prof = load_profile(tmp_path / "solution_odd_1.json")
    assert prof.zero_count == 1
    assert prof.symmetry_class == "odd"
    rec = small_sweep.records[1]
    assert np.array_equal(prof.h, rec.profile.h)
