import json

import numpy as np
import pytest

from proxsim.domain import DomainOfApplicability, VariableSpec
from proxsim.errors import KeyCollision, MissingColumn, MissingFile, UnmappableValue
from proxsim.ingest import LogSchema, ingest_logs, load_log_schema


def _domain():
    return DomainOfApplicability(
        inputs=(
            VariableSpec("demand", "continuous", 10.0, 100.0),
            VariableSpec("capacity", "continuous", 20.0, 60.0),
        ),
        outputs=(
            VariableSpec("avg_delay", "continuous", -10.0, 110.0),
            VariableSpec("throughput", "continuous", 10.0, 60.0),
        ),
    )


def _schema():
    return LogSchema.from_dict(
        {
            "files": [
                {
                    "path": "inputs.csv",
                    "role": "inputs",
                    "key": ["run_id"],
                    "columns": {"demand": "demand", "capacity": "capacity"},
                },
                {
                    "path": "outputs.csv",
                    "role": "outputs",
                    "key": ["run_id"],
                    "columns": {"avg_delay": "avg_delay", "throughput": "throughput"},
                },
            ]
        }
    )


def _write(tmp_path, name, text):
    (tmp_path / name).write_text(text)


class TestTwoFileJoin:
    def test_exact_join(self, tmp_path):
        _write(tmp_path, "inputs.csv", "run_id,demand,capacity\nr1,40,50\nr2,60,40\nr3,80,30\n")
        _write(
            tmp_path,
            "outputs.csv",
            "run_id,avg_delay,throughput\nr1,0.0,40\nr2,5.0,40\nr3,31.25,30\n",
        )
        ts, report = ingest_logs(_schema(), _domain(), base_dir=tmp_path)
        assert len(ts) == 3
        assert report.rows_joined == 3
        assert report.dropped == []
        # rows sorted by key
        np.testing.assert_allclose(ts.X, [[40, 50], [60, 40], [80, 30]])
        np.testing.assert_allclose(ts.Y[:, 0], [0.0, 5.0, 31.25])

    def test_unmatched_key_dropped_with_report(self, tmp_path):
        _write(tmp_path, "inputs.csv", "run_id,demand,capacity\nr1,40,50\nr2,60,40\nr3,80,30\n")
        _write(tmp_path, "outputs.csv", "run_id,avg_delay,throughput\nr1,0.0,40\nr3,31.25,30\n")
        ts, report = ingest_logs(_schema(), _domain(), base_dir=tmp_path)
        assert len(ts) == 2
        assert report.rows_joined == 2
        assert report.dropped == [{"key": ["r2"], "file": "inputs.csv", "reason": "unmatched_key"}]

    def test_row_and_file_order_invariance(self, tmp_path):
        _write(tmp_path, "inputs.csv", "run_id,demand,capacity\nr2,60,40\nr1,40,50\n")
        _write(tmp_path, "outputs.csv", "run_id,avg_delay,throughput\nr1,0.0,40\nr2,5.0,40\n")
        ts1, _ = ingest_logs(_schema(), _domain(), base_dir=tmp_path)
        flipped = LogSchema(files=tuple(reversed(_schema().files)), levels={})
        ts2, _ = ingest_logs(flipped, _domain(), base_dir=tmp_path)
        np.testing.assert_array_equal(ts1.X, ts2.X)
        np.testing.assert_array_equal(ts1.Y, ts2.Y)


class TestErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            ingest_logs(_schema(), _domain(), base_dir=tmp_path)

    def test_missing_column(self, tmp_path):
        _write(tmp_path, "inputs.csv", "run_id,demand\nr1,40\n")
        _write(tmp_path, "outputs.csv", "run_id,avg_delay,throughput\nr1,0.0,40\n")
        with pytest.raises(MissingColumn):
            ingest_logs(_schema(), _domain(), base_dir=tmp_path)

    def test_key_collision(self, tmp_path):
        _write(tmp_path, "inputs.csv", "run_id,demand,capacity\nr1,40,50\nr1,60,40\n")
        _write(tmp_path, "outputs.csv", "run_id,avg_delay,throughput\nr1,0.0,40\n")
        with pytest.raises(KeyCollision):
            ingest_logs(_schema(), _domain(), base_dir=tmp_path)

    def test_non_numeric_value(self, tmp_path):
        _write(tmp_path, "inputs.csv", "run_id,demand,capacity\nr1,many,50\n")
        _write(tmp_path, "outputs.csv", "run_id,avg_delay,throughput\nr1,0.0,40\n")
        with pytest.raises(UnmappableValue) as ei:
            ingest_logs(_schema(), _domain(), base_dir=tmp_path)
        assert ei.value.column == "demand"
        assert ei.value.row == ["r1"]


class TestCategoricalLevels:
    def test_level_map_applied_and_missing_value_named(self, tmp_path):
        domain = DomainOfApplicability(
            inputs=(
                VariableSpec("demand", "continuous", 10.0, 100.0),
                VariableSpec("mode", "categorical", levels=("low", "high")),
            ),
            outputs=(VariableSpec("avg_delay", "continuous", -10.0, 110.0),),
        )
        schema = LogSchema.from_dict(
            {
                "files": [
                    {
                        "path": "runs.csv",
                        "role": "mixed",
                        "key": ["run_id"],
                        "columns": {"demand": "demand", "m": "mode", "delay": "avg_delay"},
                    }
                ],
                "levels": {"mode": {"0": "low", "1": "high"}},
            }
        )
        _write(tmp_path, "runs.csv", "run_id,demand,m,delay\nr1,40,0,0.0\nr2,60,1,5.0\n")
        ts, report = ingest_logs(schema, domain, base_dir=tmp_path)
        assert len(ts) == 2
        np.testing.assert_array_equal(ts.X[:, 1:], [[1, 0], [0, 1]])

        _write(tmp_path, "runs.csv", "run_id,demand,m,delay\nr1,40,7,0.0\n")
        with pytest.raises(UnmappableValue) as ei:
            ingest_logs(schema, domain, base_dir=tmp_path)
        assert ei.value.column == "mode"


def test_schema_file_roundtrip(tmp_path):
    doc = {
        "files": [
            {
                "path": "inputs.csv",
                "role": "inputs",
                "key": ["run_id"],
                "columns": {"demand": "demand", "capacity": "capacity"},
            }
        ],
        "levels": {},
        "domain": _domain().to_dict(),
    }
    p = tmp_path / "schema.json"
    p.write_text(json.dumps(doc))
    schema, domain = load_log_schema(p)
    assert schema.files[0].key == ("run_id",)
    assert domain == _domain()
