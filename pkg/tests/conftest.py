import sys
from pathlib import Path

import pytest

from catalogkg import AttributeSchema, Item, build_dictionary, build_graph

sys.path.insert(0, str(Path(__file__).parent))

SCHEMA = AttributeSchema(("product_type", "brand", "color"))

_ACCEPTANCE_LINES = []


def fixture_f_records():
    """The maroon-5 catalog: 10 dvds (8 by the band, 1 maroon, 1 bare), 5 shirts."""
    recs = []
    for i in range(8):
        recs.append((f"dvd{i}", {"product_type": ["dvd"], "brand": ["Maroon 5"]}))
    recs.append(("dvd8", {"product_type": ["dvd"], "color": ["maroon"]}))
    recs.append(("dvd9", {"product_type": ["dvd"]}))
    for i in range(5):
        recs.append((f"shirt{i}", {"product_type": ["shirt"],
                                   "color": ["maroon" if i < 3 else "blue"]}))
    return recs


@pytest.fixture
def schema():
    return SCHEMA


@pytest.fixture
def fixture_items():
    return [Item.from_raw(i, v, SCHEMA) for i, v in fixture_f_records()]


@pytest.fixture
def fixture_kg(fixture_items):
    return build_graph(fixture_items, SCHEMA)


@pytest.fixture
def fixture_dict(fixture_kg):
    return build_dictionary(fixture_kg, 1)


@pytest.fixture
def record_criterion():
    def record(number, passed, detail):
        _ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
