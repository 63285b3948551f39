import hypothesis
import pytest

from potlab.eol import pipeline, synthetic_line

hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("default")

LINES_2D = [[], ["+1"], ["+1", "+2"]]


@pytest.fixture(scope="session")
def line2():
    return synthetic_line(2, ["+1"])


@pytest.fixture(scope="session")
def line3():
    return pipeline(1, 0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
