from __future__ import annotations

import os

from hypothesis import settings

# property suites run with a fixed seed unless DWORKZETA_SEED overrides it
settings.register_profile("fixed", derandomize=True, deadline=None, max_examples=60)
settings.register_profile("random", deadline=None, max_examples=60)
settings.load_profile("random" if os.environ.get("DWORKZETA_SEED") else "fixed")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
