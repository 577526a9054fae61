import os
import shutil
import tempfile
import uuid
from pathlib import Path

import pytest
from dotenv import load_dotenv

from oddsym.artifacts import LocalStore, S3Store
from oddsym.weights import Constant, ExpQuadratic, Problem, Quartic

# Load environment variables from .env file in project root
project_root = Path(__file__).parent.parent
load_dotenv(project_root / ".env")


@pytest.fixture
def temp_out_dir():
    """Create a temporary output directory for run artifacts."""
    temp_dir = tempfile.mkdtemp(prefix="oddsym_test_")
    yield temp_dir
    # Cleanup after test
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def local_store(temp_out_dir):
    """Create a LocalStore rooted in the temporary directory."""
    return LocalStore(temp_out_dir)


def allen_cahn(L: float, m: float = 1.0) -> Problem:
    """a = b = 1 with the quartic double well (M = 1)."""
    return Problem(L, m, Constant(1.0), Constant(1.0), Quartic(1.0))


@pytest.fixture
def expquad_problem():
    """a = b = exp(x^2), G quartic, m = L = 1: the unique, odd regime."""
    return Problem(1.0, 1.0, ExpQuadratic(1.0), ExpQuadratic(1.0), Quartic(1.0))


@pytest.fixture
def allen_cahn_10():
    """Unweighted problem on (-10, 10) with m = M = 1."""
    return allen_cahn(10.0)


@pytest.fixture
def small_data_problem():
    """Unweighted problem on (-10, 10) with small boundary data m = 0.05."""
    return allen_cahn(10.0, 0.05)


@pytest.fixture
def config_file(temp_out_dir):
    """Write config text to a file in the temporary directory and return its path."""

    def write(text: str, name: str = "experiment.conf") -> str:
        path = os.path.join(temp_out_dir, name)
        with open(path, "w", encoding="utf-8") as file:
            file.write(text)
        return path

    return write


# S3 Test Fixtures
@pytest.fixture
def s3_storage_options():
    """Return S3 storage options from environment variables."""
    return {
        "aws_access_key_id": os.getenv("ACCESS_KEY_ID"),
        "aws_secret_access_key": os.getenv("SECRET_ACCESS_KEY"),
        "endpoint_url": os.getenv("ENDPOINT"),
        "region": os.getenv("REGION", "auto"),
    }


@pytest.fixture
def s3_test_bucket():
    """Return the S3 test bucket name from environment variables."""
    bucket = os.getenv("BUCKET")
    if not bucket:
        pytest.skip("BUCKET not set in environment variables")
    return bucket


@pytest.fixture
def s3_out_path(s3_test_bucket):
    """Create a unique S3 prefix for testing."""
    test_id = str(uuid.uuid4())[:8]
    return f"s3://{s3_test_bucket}/oddsym_test_{test_id}"


@pytest.fixture
def s3_store(s3_out_path, s3_storage_options):
    """Create an S3Store; the prefix is removed afterwards."""
    if not all(s3_storage_options.values()):
        pytest.skip("S3 credentials not available in environment variables")

    store = S3Store(s3_out_path, s3_storage_options)
    yield store

    try:
        path = s3_out_path.replace("s3://", "")
        if store.fs.exists(path):
            store.fs.rm(path, recursive=True)
    except Exception:
        pass  # Best effort cleanup
