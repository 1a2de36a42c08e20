import pytest
from hypothesis import HealthCheck, settings

from mcsunflower import kernels

# the backend fixture patches module attributes once per test, which is
# exactly what every generated example should see
settings.register_profile("default", suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("default")

KERNEL_NAMES = ("find_sunflower", "best_completion", "good_pair_count",
                "pq_enumeration_total", "count_assignments")


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    mod = kernels.available_backends()[request.param]
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param
