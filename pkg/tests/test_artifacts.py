import json
import os

import numpy as np
import polars as pl

from oddsym.artifacts import LocalStore, S3Store, open_store
from oddsym.weights import Verdict


class TestLocalStore:
    """Test writing run artifacts to a local directory."""

    def test_write_table(self, local_store, temp_out_dir):
        """Test CSV output with 17 significant digits and LF line endings."""
        frame = pl.DataFrame({"x": [-1.0, 0.1, 1.0 / 3.0], "flag": [True, False, True]})
        path = local_store.write_table("table.csv", frame)
        assert path == os.path.join(temp_out_dir, "table.csv")
        with open(path, "rb") as file:
            data = file.read()
        assert data.startswith(b"x,flag\n")
        assert b"\r\n" not in data
        assert pl.read_csv(path)["x"].to_list() == [-1.0, 0.1, 1.0 / 3.0]

    def test_write_json(self, local_store):
        """Test that numpy scalars, arrays and enums are written as plain JSON."""
        path = local_store.write_json(
            "report.json",
            {"value": np.float64(0.5), "count": np.int64(3), "grid": np.array([1.0, 2.0]), "verdict": Verdict.CERTIFIED},
        )
        with open(path, encoding="utf-8") as file:
            record = json.load(file)
        assert record == {"count": 3, "grid": [1.0, 2.0], "value": 0.5, "verdict": "certified"}

    def test_written_and_discard(self, local_store):
        """Test that discard removes every file written through the store."""
        first = local_store.write_text("a.txt", "a\n")
        second = local_store.write_table("b.csv", pl.DataFrame({"x": [1.0]}))
        assert local_store.written == [first, second]
        local_store.discard()
        assert not os.path.exists(first)
        assert not os.path.exists(second)
        assert local_store.written == []

    def test_discard_tolerates_missing_files(self, local_store):
        """Test that files removed by hand are skipped."""
        path = local_store.write_text("a.txt", "a\n")
        os.remove(path)
        local_store.discard()
        assert local_store.written == []


class TestOpenStore:
    """Test choosing a store from a location."""

    def test_local_directory_created(self, temp_out_dir):
        """Test that a missing local directory is created."""
        location = os.path.join(temp_out_dir, "nested", "run")
        store = open_store(location)
        assert isinstance(store, LocalStore)
        assert os.path.isdir(location)
        assert store.path("report.json") == f"{location}/report.json"

    def test_trailing_slash(self, temp_out_dir):
        """Test that a trailing slash does not double up in paths."""
        store = open_store(temp_out_dir + "/")
        assert store.path("x.csv") == f"{temp_out_dir}/x.csv"

    def test_s3_location(self):
        """Test that s3:// locations give an S3 store."""
        options = {
            "aws_access_key_id": "key",
            "aws_secret_access_key": "secret",
            "endpoint_url": "http://localhost:9000",
            "region": "auto",
        }
        store = open_store("s3://bucket/prefix", options)
        assert isinstance(store, S3Store)
        assert store.path("report.json") == "s3://bucket/prefix/report.json"


class TestLocalStoreLayout:
    """Test nested artifact names."""

    def test_nested_name(self, local_store, temp_out_dir):
        """Test that writing a nested name creates its directory."""
        path = local_store.write_text("sweep/points.csv", "L\n2.0\n")
        assert path == os.path.join(temp_out_dir, "sweep", "points.csv")
        assert os.path.isfile(path)

    def test_contains_and_delete(self, local_store, temp_out_dir):
        """Test that only stored files count as artifacts and delete removes one."""
        path = local_store.write_text("report.json", "{}\n")
        assert local_store.contains(path)
        assert not local_store.contains(temp_out_dir)
        local_store.delete(path)
        assert not local_store.contains(path)
        local_store.delete(path)

    def test_prepare_creates_root(self, temp_out_dir):
        """Test that prepare creates a missing run directory."""
        root = os.path.join(temp_out_dir, "a", "b")
        LocalStore(root).prepare()
        assert os.path.isdir(root)
