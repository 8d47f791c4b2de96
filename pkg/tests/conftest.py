import random

import pytest

from lsgp.problems import make_parity

# Reference even-3 truth table, x1 x2 x3 -> output.
EVEN3_TABLE = [
    (0, 0, 0, 1),
    (0, 0, 1, 0),
    (0, 1, 0, 0),
    (0, 1, 1, 1),
    (1, 0, 0, 0),
    (1, 0, 1, 1),
    (1, 1, 0, 1),
    (1, 1, 1, 0),
]


@pytest.fixture
def even3():
    return make_parity(3)


@pytest.fixture
def rng():
    return random.Random(12345)


class FixedRandom(random.Random):
    """Random whose randrange returns queued values first."""

    def __new__(cls, queue, seed=0):
        return super().__new__(cls, seed)

    def __init__(self, queue, seed=0):
        super().__init__(seed)
        self.queue = list(queue)

    def randrange(self, *args, **kwargs):
        if self.queue:
            return self.queue.pop(0)
        return super().randrange(*args, **kwargs)


# (criterion, passed, detail) lines filled in by test_acceptance.py
ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE, key=lambda r: int(r[0].lstrip("C").split()[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
