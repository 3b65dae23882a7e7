"""Shared fixtures: frozen reference data and the echo of acceptance results."""

import json
import pathlib
import resource

import numpy as np
import pytest

# pathological inputs should fail loudly, not freeze the box
resource.setrlimit(resource.RLIMIT_AS, (5_000_000_000, 5_000_000_000))

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def goldens():
    with open(DATA / "goldens.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def matrix_element_fixture():
    with open(DATA / "matrix_elements.json") as fh:
        return json.load(fh)


def random_params(rng, r_max=2.0, r_min=0.0):
    from lgsq.core import SqueezeParams

    return SqueezeParams(
        float(rng.uniform(r_min, r_max)), float(rng.uniform(-np.pi / 2, np.pi / 2))
    )


def pytest_runtest_logreport(report):
    # one visible verdict line per acceptance criterion, pass or fail
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\n[{verdict}] {name} ({report.duration:.1f}s)", flush=True)
