import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from tiercache.model import DeliveryRequirement, MmTierConfig, MuTierConfig  # noqa: E402
from tiercache.scdp_mm import MmCoverageContext  # noqa: E402
from tiercache.scdp_mu import MuCoverageContext  # noqa: E402


@pytest.fixture(scope="session")
def mu_ctx():
    return MuCoverageContext.from_requirement(MuTierConfig(), DeliveryRequirement())


@pytest.fixture(scope="session")
def mm_ctx():
    return MmCoverageContext.from_requirement(MmTierConfig(), DeliveryRequirement())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
