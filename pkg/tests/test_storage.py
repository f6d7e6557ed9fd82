import io
import json
import threading
from fractions import Fraction

import numpy as np
import pytest

from storage.thread_safe_writer import (
    CrossPlatformFileLock,
    ThreadSafeWriter,
    format_number,
    to_jsonable,
)


class TestFormatting:
    def test_format_number(self):
        assert format_number(Fraction(2, 3)) == "2/3"
        assert format_number(Fraction(4, 2)) == "2"
        assert format_number(np.int64(7)) == 7 and isinstance(format_number(np.int64(7)), int)
        assert isinstance(format_number(np.float64(0.5)), float)
        assert format_number(None) is None

    def test_to_jsonable(self):
        document = {"support": np.array([1, 2]), "mass": (Fraction(1, 3), np.float64(0.25)), 3: None}
        assert to_jsonable(document) == {"support": [1, 2], "mass": ["1/3", 0.25], "3": None}


class TestThreadSafeWriter:
    def test_json_to_stream(self):
        stream = io.StringIO()
        ThreadSafeWriter(stream=stream).write_json({"estimate": 6.5})
        assert stream.getvalue() == '{"estimate": 6.5}\n'

    def test_json_rejects_nan(self):
        with pytest.raises(ValueError):
            ThreadSafeWriter(stream=io.StringIO()).write_json({"value": float("nan")})

    def test_csv_to_stream(self):
        stream = io.StringIO()
        ThreadSafeWriter(stream=stream).write_csv(("N", "n", "k", "lrmse"), [(100, 1, 1, np.float64(-5.25)), (100, 2, 1, None)])
        assert stream.getvalue() == "N,n,k,lrmse\n100,1,1,-5.25\n100,2,1,\n"

    def test_file_is_overwritten(self, tmp_path):
        path = tmp_path / "out" / "result.json"
        with ThreadSafeWriter(path) as writer:
            writer.write_json({"a": 1})
            writer.write_json({"a": 2})
            assert writer.get_stats()["written_count"] == 2
        assert json.loads(path.read_text(encoding="utf-8")) == {"a": 2}
        assert not (tmp_path / "out" / "result.json.lock").exists()

    def test_closed_writer(self):
        writer = ThreadSafeWriter(stream=io.StringIO())
        writer.close()
        with pytest.raises(RuntimeError):
            writer.write_text("x")

    def test_concurrent_writes(self, tmp_path):
        path = tmp_path / "shared.csv"
        writer = ThreadSafeWriter(path)
        threads = [threading.Thread(target=writer.write_csv, args=(("i",), [(i,)])) for i in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "i" and len(lines) == 2
        assert writer.get_stats()["written_count"] == 8


class TestFileLock:
    def test_lock_cycle(self, tmp_path):
        target = str(tmp_path / "data.txt")
        with CrossPlatformFileLock(target) as lock:
            assert lock._handle is not None
        assert lock._handle is None
