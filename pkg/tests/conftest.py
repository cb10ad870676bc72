import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from helpers import FixtureServer  # noqa: E402


@pytest.fixture
def serve():
    """Start fixture servers for the duration of one test."""
    started = []

    def start(handler):
        srv = FixtureServer(handler).__enter__()
        started.append(srv)
        return srv

    yield start
    for srv in started:
        srv.__exit__(None, None, None)
