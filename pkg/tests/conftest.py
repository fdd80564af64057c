import pytest

from vitalrl.mews import VitalKind

# Printed clinical table: (vital, low, high, score); None marks an open end.
PRINTED_MEWS_RANGES = [
    (VitalKind.RESPIRATORY_RATE, None, 4, 4),
    (VitalKind.RESPIRATORY_RATE, 5, 8, 3),
    (VitalKind.RESPIRATORY_RATE, 9, 20, 0),
    (VitalKind.RESPIRATORY_RATE, 21, 24, 1),
    (VitalKind.RESPIRATORY_RATE, 25, 30, 2),
    (VitalKind.RESPIRATORY_RATE, 31, 35, 3),
    (VitalKind.RESPIRATORY_RATE, 36, None, 4),
    (VitalKind.OXYGEN_SATURATION, None, 84, 4),
    (VitalKind.OXYGEN_SATURATION, 85, 89, 3),
    (VitalKind.OXYGEN_SATURATION, 90, 92, 2),
    (VitalKind.OXYGEN_SATURATION, 93, 94, 1),
    (VitalKind.OXYGEN_SATURATION, 95, None, 0),
    (VitalKind.TEMPERATURE, None, 34.0, 3),
    (VitalKind.TEMPERATURE, 34.1, 35.0, 2),
    (VitalKind.TEMPERATURE, 35.1, 36.0, 1),
    (VitalKind.TEMPERATURE, 36.1, 37.9, 0),
    (VitalKind.TEMPERATURE, 38.0, 38.5, 1),
    (VitalKind.TEMPERATURE, 38.6, None, 2),
    (VitalKind.HEART_RATE, None, 39, 4),
    (VitalKind.HEART_RATE, 40, 49, 1),
    (VitalKind.HEART_RATE, 50, 99, 0),
    (VitalKind.HEART_RATE, 100, 109, 1),
    (VitalKind.HEART_RATE, 110, 129, 2),
    (VitalKind.HEART_RATE, 130, 139, 3),
    (VitalKind.HEART_RATE, 140, None, 4),
]
PRINTED_SEDATION = {"Awake": 0, "Mild": 2, "Moderate": 3, "Severe": 4}

# Printed reward table: rows Action 0..4, columns MEWS 4, 3, 2, 1, 0.
PRINTED_REWARDS = [
    [-4, -3, -2, -1, 10],
    [-4, -3, -2, 10, -1],
    [-4, -3, 10, -1, -2],
    [-4, 10, -1, -2, -3],
    [10, -3, -2, -1, -4],
]


def printed_edge_cases():
    for vital, lo, hi, score in PRINTED_MEWS_RANGES:
        for edge in (lo, hi):
            if edge is not None:
                yield vital, edge, score


@pytest.fixture
def tmp_csv(tmp_path):
    def write(text, name="subject.csv"):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p
    return write


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion, printed in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number, title, passed, detail=""):
        lines.append((number, title, passed, detail))
        print(f"criterion {number} {'PASS' if passed else 'FAIL'}: {title} {detail}".rstrip())
        return passed
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(lines):
        terminalreporter.write_line(
            f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}" + (f"  ({detail})" if detail else ""))
