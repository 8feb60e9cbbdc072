"""Tests for JSON log formatting."""

import io
import json
import logging
import sys

import numpy as np
import pytest

from clinproj.logging_config import JSONFormatter, setup_logging


def _record(**extra):
    record = logging.LogRecord("clinproj.projection", logging.WARNING, "engine.py", 12,
                               "Projected %d windows", (4,), None)
    for key, value in extra.items():
        setattr(record, key, value)
    return record


class TestJSONFormatter:
    def test_fields_and_extras(self):
        out = json.loads(JSONFormatter().format(_record(windows=4, status={"optimal": 4})))
        assert out["message"] == "Projected 4 windows"
        assert out["level"] == "WARNING"
        assert out["logger"] == "clinproj.projection"
        assert out["windows"] == 4
        assert out["status"] == {"optimal": 4}
        assert "args" not in out

    def test_numpy_extras(self):
        """Solver stats arrive as numpy values."""
        out = json.loads(JSONFormatter().format(_record(
            nodes=np.int64(17), objective=np.float64(0.32), dist=np.array([0.5, 0.0]),
        )))
        assert out["nodes"] == 17
        assert out["objective"] == pytest.approx(0.32)
        assert out["dist"] == [0.5, 0.0]

    def test_extras_do_not_override_fields(self):
        out = json.loads(JSONFormatter().format(_record(timestamp="later")))
        assert out["timestamp"] != "later"

    def test_exception_text(self):
        try:
            raise ValueError("bad window")
        except ValueError:
            record = logging.LogRecord("x", logging.ERROR, "f.py", 1, "failed", (), sys.exc_info())
        assert "bad window" in json.loads(JSONFormatter().format(record))["exception"]

    def test_unserialisable_extra_stringified(self):
        out = json.loads(JSONFormatter().format(_record(path=object())))
        assert out["path"].startswith("<object")


@pytest.fixture
def restore_root():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield root
    root.handlers[:] = handlers
    root.setLevel(level)


def test_setup_replaces_handlers(restore_root):
    restore_root.addHandler(logging.NullHandler())
    stream = io.StringIO()
    setup_logging("DEBUG", stream=stream)
    assert restore_root.level == logging.DEBUG
    assert len(restore_root.handlers) == 1

    logging.getLogger("clinproj.test").debug("hello", extra={"windows": 3})
    line = json.loads(stream.getvalue().strip())
    assert line["message"] == "hello"
    assert line["windows"] == 3
