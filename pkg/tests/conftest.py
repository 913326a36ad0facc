import numpy as np
import pytest

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("NSC_CACHE_DIR", str(tmp_path / "cache"))


@pytest.fixture
def ones4():
    return np.ones((4, 1))


@pytest.fixture
def h3():
    return np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])


def gaussian_h(n, m, seed):
    return np.random.default_rng(seed).standard_normal((n, m))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
