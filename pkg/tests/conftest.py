import os

import pytest
from hypothesis import HealthCheck, settings

from fitchain import mixing, oracle

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# every discrete-time curve built during the session, for the monotonicity criterion
CURVES = []
ACCEPTANCE = {}


def _recording(cls):
    original = cls.__init__

    def __init__(self, *args, **kwargs):
        original(self, *args, **kwargs)
        CURVES.append(self)

    cls.__init__ = __init__


def pytest_configure(config):
    _recording(mixing.MixingCurve)
    _recording(oracle.ExactCurve)


def pytest_collection_modifyitems(session, config, items):
    # the monotonicity criterion audits curves from the whole session, so it goes last
    last = [it for it in items if it.get_closest_marker("runs_last")]
    rest = [it for it in items if not it.get_closest_marker("runs_last")]
    items[:] = rest + last


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{status}] criterion {num:>2}: {title}  {detail}")
