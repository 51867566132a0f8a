import os

import hypothesis
import pytest

hypothesis.settings.register_profile("fast", max_examples=20)
hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("dev", max_examples=100, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte-Carlo method comparisons")


def pytest_addoption(parser):
    parser.addoption("--skip-slow", action="store_true", default=False, help="Skip long Monte-Carlo method comparisons")


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--skip-slow"):
        return
    skip = pytest.mark.skip(reason="--skip-slow given")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
