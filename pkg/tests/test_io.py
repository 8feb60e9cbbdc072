"""Tests for patient files and the JSON artifact store."""

from types import SimpleNamespace

import numpy as np
import pandas as pd
import pytest

from clinproj.errors import PSVFormatError
from clinproj.io import JSONStore, create_store, psv_files, read_psv, write_corrected, write_psv
from clinproj.preprocess import PatientRecord
from clinproj.schemas import CorruptionMask, EvaluationReport, Gender, Metrics, RunManifest


def _record(registry, pid="p000001"):
    rng = np.random.default_rng(0)
    values = np.array([[rng.uniform(s.norm_lo, s.norm_hi) for _ in range(4)] for s in registry])
    values[0, 1] = np.nan
    return PatientRecord(pid, 63.5, Gender.M, tuple(registry.names), values, [0, 0, 1, 1])


class TestPSV:
    """Reading and writing patient files."""

    def test_write_then_read(self, tmp_path, registry):
        """A written record reads back with NaN preserved and the id from the file stem."""
        record = _record(registry)
        path = write_psv(record, tmp_path, registry)
        assert path.name == "p000001.psv"
        back = read_psv(path, registry)
        assert back.patient_id == "p000001"
        assert back.gender is Gender.M and back.age == 63.5
        assert np.allclose(back.values, record.values, equal_nan=True)
        assert back.labels.tolist() == [0, 0, 1, 1]

    def test_header_layout(self, tmp_path, registry):
        path = write_psv(_record(registry), tmp_path, registry)
        header = path.read_text().splitlines()[0].split("|")
        assert header[0] == "HR"
        assert header[-1] == "SepsisLabel"
        assert "NaN" in path.read_text()

    def test_unmodeled_columns_ignored_and_absent_ones_missing(self, tmp_path, registry):
        path = tmp_path / "p9.psv"
        path.write_text("HR|Unit1|Age|Gender|SepsisLabel\n80|1|50|0|0\n82|1|50|0|1\n")
        record = read_psv(path, registry)
        assert record.row("HeartRate").tolist() == [80.0, 82.0]
        assert np.isnan(record.row("Temp")).all()
        assert record.gender is Gender.F

    def test_missing_required_column(self, tmp_path, registry):
        path = tmp_path / "bad.psv"
        path.write_text("HR|Age|Gender\n80|50|0\n")
        with pytest.raises(PSVFormatError):
            read_psv(path, registry)

    def test_empty_file(self, tmp_path, registry):
        path = tmp_path / "empty.psv"
        path.write_text("")
        with pytest.raises(PSVFormatError):
            read_psv(path, registry)

    def test_bad_gender(self, tmp_path, registry):
        path = tmp_path / "g.psv"
        path.write_text("HR|Age|Gender|SepsisLabel\n80|50|7|0\n")
        with pytest.raises(PSVFormatError):
            read_psv(path, registry)

    def test_directory_listing(self, tmp_path, registry):
        for pid in ("p2", "p1"):
            write_psv(_record(registry, pid), tmp_path, registry)
        assert [p.stem for p in psv_files(tmp_path)] == ["p1", "p2"]
        with pytest.raises(FileNotFoundError):
            psv_files(tmp_path / "absent")

    def test_write_corrected(self, tmp_path, registry):
        """Corrected windows carry raw values plus trust and distance columns."""
        sub = SimpleNamespace(patient_id="p1", window_start=3, age=40.0, gender=Gender.F, label=1)
        corrected = np.full((len(registry), 6), 0.5)
        trust = np.linspace(0, 1, len(registry))
        path = write_corrected(tmp_path, registry, sub, corrected, np.zeros(len(registry)), trust)
        assert path.name == "p1_0003.psv"
        frame = pd.read_csv(path, sep="|")
        assert len(frame) == 6
        assert frame["Temp"].tolist() == pytest.approx([37.0] * 6)
        assert frame["Platelets_trust"].tolist() == pytest.approx([1.0] * 6)
        assert "HR_physdist" in frame.columns
        assert frame["SepsisLabel"].tolist() == [1] * 6


class TestJSONStore:
    """Artifact persistence."""

    def test_round_trip(self, tmp_path):
        store = create_store(str(tmp_path))
        assert isinstance(store, JSONStore)
        metrics = Metrics(tp=1, fp=0, tn=1, fn=0, sensitivity=1, specificity=1, precision=1, f_score=1)
        report = EvaluationReport(manifest=RunManifest(command="eval", config_hash="h", seed=1),
                                  rows={"model/test": metrics})
        store.save_report(report)
        assert store.load_report() == report
        assert store.path("report").read_text().endswith("}\n")

    def test_identical_content_identical_bytes(self, tmp_path):
        store = JSONStore(tmp_path)
        store.save_mask(CorruptionMask(), name="a")
        store.save_mask(CorruptionMask(), name="b")
        assert store.path("a").read_bytes() == store.path("b").read_bytes()

    def test_missing_artifact(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            JSONStore(tmp_path).load_model()

    def test_invalid_artifact(self, tmp_path):
        store = JSONStore(tmp_path)
        store.path("model").write_text('{"window": "six"}')
        with pytest.raises(PSVFormatError):
            store.load_model()

    def test_schema_version_mismatch(self, tmp_path):
        store = JSONStore(tmp_path)
        report = EvaluationReport(manifest=RunManifest(command="eval", config_hash="h", seed=1))
        store.save_report(report)
        text = store.path("report").read_text().replace('"schema_version": 1', '"schema_version": 99')
        store.path("report").write_text(text)
        with pytest.raises(PSVFormatError):
            store.load_report()
