import os
import tempfile

from hypothesis import HealthCheck, settings

# numba compilation makes the first example slow; deadlines are meaningless here
settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

os.environ.setdefault("TOPOMODE_CACHE_DIR", tempfile.mkdtemp(prefix="topomode-cache-"))


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
