import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mfpotts import _backend  # noqa: E402

_LINES: dict[str, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    _LINES[f"{number:02d}"] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_LINES):
            terminalreporter.write_line(_LINES[key])


@pytest.fixture(params=_backend.available())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
