import pytest

from urnwf import _kernels


@pytest.fixture(scope="session", autouse=True)
def compiled_kernels():
    """Compile every kernel once up front so timed tests never pay JIT cost."""
    _kernels.warmup()
