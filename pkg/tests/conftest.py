import pytest
from hypothesis import HealthCheck, settings

from ppcert.scenarios import Options, run_scenario

settings.register_profile(
    "repo",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
    derandomize=True,
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def plane_result():
    return run_scenario("thm-2-2", Options())


@pytest.fixture(scope="session")
def space_result():
    return run_scenario("thm-3-5", Options())
