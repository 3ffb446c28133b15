import random
import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bixcert.crypto import PRODUCTION, TOY  # noqa: E402
from bixcert.protocol import build_honest_chain  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


class FixedRandom:
    """rng stub handing out a fixed sequence from randrange."""

    def __init__(self, values):
        self.values = list(values)

    def randrange(self, *args):
        if not self.values:
            raise LookupError("fixed sequence exhausted")
        return self.values.pop(0)


@lru_cache(maxsize=None)
def honest(length, scheme_name="production", seed=0):
    scheme = {"production": PRODUCTION, "toy": TOY}[scheme_name]
    return build_honest_chain(length, scheme, random.Random(seed))


@pytest.fixture
def prod6():
    return honest(6)[0]


@pytest.fixture
def prod6_parties():
    return honest(6)[1]


@pytest.fixture
def toy3():
    return honest(3, "toy")[0]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
