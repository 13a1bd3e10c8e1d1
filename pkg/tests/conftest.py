import contextlib
from dataclasses import dataclass, field

import pytest

_CRITERIA_LINES: list[str] = []


@dataclass
class CriterionCheck:
    """Collects sub-checks for one acceptance criterion."""

    number: int
    title: str
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def check(self, ok: bool, label: str, detail: str = "") -> None:
        text = f"{label}: {detail}" if detail else label
        (self.notes if ok else self.failures).append(text)


@pytest.fixture
def criterion():
    @contextlib.contextmanager
    def run(number: int, title: str):
        c = CriterionCheck(number, title)
        try:
            yield c
        except Exception as exc:
            c.failures.append(f"raised {type(exc).__name__}: {exc}")
        status = "PASS" if not c.failures else "FAIL"
        detail = "; ".join(c.failures) if c.failures else "; ".join(c.notes[-3:])
        line = f"[{status}] criterion {number:>2}: {title} ({detail})"
        _CRITERIA_LINES.append(line)
        print(line)
        assert not c.failures, line

    return run


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_CRITERIA_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
