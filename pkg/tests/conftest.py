import pytest

from mesview import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # JIT-compile (or load from disk cache) before any timed test runs,
    # mirroring what the server does at startup.
    kernels.warmup()
