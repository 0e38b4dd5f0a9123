import stat
from pathlib import Path

import pytest

from ddkit.core import ElementList
from ddkit.oracle import planted_oracle
from ddkit.synthetic import planted_payload


def eight_elements() -> ElementList:
    return ElementList.from_payloads(planted_payload(i) for i in range(8))


def running_example_oracle():
    # everything but id 4 is needed
    return planted_oracle(set(range(8)) - {4})


def write_script(path: Path, body: str) -> Path:
    path.write_text("#!/bin/sh\n" + body + "\n")
    path.chmod(path.stat().st_mode | stat.S_IXUSR)
    return path


@pytest.fixture
def script(tmp_path):
    def make(body: str, name: str = "oracle.sh") -> Path:
        return write_script(tmp_path / name, body)

    return make


# one line per acceptance criterion, printed after the run
CRITERIA: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n])
