import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ddiblrm.model import DrugSpec, ModelSpec, Variant

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ALL_VARIANTS = (Variant.NO_INTERACTION, Variant.THALL, Variant.LINEAR, Variant.SATURATING)


def two_drugs(variant, ref=(200.0, 200.0)):
    return ModelSpec((DrugSpec("A", ref[0]), DrugSpec("B", ref[1])), variant)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# ---------------------------------------------------------------- shared scenario run

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def seed1_tree(tmp_path_factory):
    """Output tree of ``ddiblrm scenario --scenario all --seed 1`` with default sampler settings."""
    import time

    from ddiblrm import cli

    out = tmp_path_factory.mktemp("scenario_seed1_a")
    t = time.perf_counter()
    code = cli.main(["scenario", "--scenario", "all", "--seed", "1", "--out", str(out)])
    assert code == 0
    return out, time.perf_counter() - t


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
