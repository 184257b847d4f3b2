import numpy as np
import pytest

from banachrig import _kernels_py, kernels

try:
    from banachrig import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

BACKENDS = ["python"] + (["cython"] if _kernels_c is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route every kernel call through one backend."""
    mod = _kernels_py if request.param == "python" else _kernels_c
    for name in ("conjugate", "lp_norm", "dual_preimage", "power_ascent"):
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return mod


@pytest.fixture
def rng():
    return np.random.default_rng(12345)



def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for text in mod.LINES:
            terminalreporter.write_line(text)
