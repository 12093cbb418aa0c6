import os
import tempfile
from functools import lru_cache

import pytest

# one cache for the whole session, so pipeline decompositions are solved once
if "QCONG_CACHE" not in os.environ:
    os.environ["QCONG_CACHE"] = tempfile.mkdtemp(prefix="qcong-test-cache-")

from qcong import hecke, moments  # noqa: E402

PRIMES = (5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
CERT_PRIMES = (11, 17, 19, 29, 31, 37)

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE = []


@lru_cache(maxsize=None)
def spt_congruence(ell):
    return moments.spt_derive(ell)


@lru_cache(maxsize=None)
def discovery(ell):
    return hecke.discover_spt(ell, spt_cong=spt_congruence(ell))


@pytest.fixture(scope="session")
def spt_cong():
    return spt_congruence


@pytest.fixture(scope="session")
def discover():
    return discovery


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
