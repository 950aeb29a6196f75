import time
import warnings
from pathlib import Path

import pytest

import fairsample as fs

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

# wall-clock seconds taken to build each preset audit, keyed by dataset id
AUDIT_SECONDS: dict[str, float] = {}


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def adult_table():
    return fs.parse_table("adult", data_dir=DATA_DIR)


@pytest.fixture(scope="session")
def german_table():
    return fs.parse_table("german", data_dir=DATA_DIR)


def _timed_audit(table, dataset_id):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        start = time.perf_counter()
        report = fs.run_audit(
            table, fs.builtin_schema(dataset_id), seed=7, dataset_id=dataset_id
        )
        AUDIT_SECONDS[dataset_id] = time.perf_counter() - start
    return report


@pytest.fixture(scope="session")
def adult_audit(adult_table):
    return _timed_audit(adult_table, "adult")


@pytest.fixture(scope="session")
def german_audit(german_table):
    return _timed_audit(german_table, "german")
