import pytest

from qab.config import experiment_config, table_i_config

ACCEPTANCE_LINES = []


@pytest.fixture
def table_cfg():
    return table_i_config()


@pytest.fixture
def table_cfg_1mh():
    return table_i_config(l_mag=1e-3)


@pytest.fixture
def exp_cfg():
    return experiment_config()


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
