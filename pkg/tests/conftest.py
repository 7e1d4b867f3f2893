import functools
import math

import pytest

import corpus
import hombell
from hombell import _kernels, chsh, circuit

# every CHSH value of a state evaluated anywhere in the session, for the global Tsirelson check
SEEN = {"max_chsh": -math.inf, "count": 0}
VERDICTS: list[str] = []


def _note(value):
    if value == value:
        SEEN["max_chsh"] = max(SEEN["max_chsh"], float(value))
        SEEN["count"] += 1


def _watch_kernel(fn):
    @functools.wraps(fn)
    def wrapped(*args, **kwargs):
        out = fn(*args, **kwargs)
        if out[6] in (_kernels.STATUS_OK, _kernels.STATUS_IMPRECISE):
            _note(out[0])
        return out
    return wrapped


def _watch_score(fn):
    @functools.wraps(fn)
    def wrapped(*args, **kwargs):
        value = fn(*args, **kwargs)
        _note(value)
        return value
    return wrapped


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria")
    _kernels.evaluate_circuit = _watch_kernel(_kernels.evaluate_circuit)
    # state-level entry points only: raw correlator tuples fed to the combiner are not states
    chsh.chsh_score = hombell.chsh_score = _watch_score(chsh.chsh_score)
    circuit.chsh_from_correlators = _watch_score(circuit.chsh_from_correlators)
    corpus.SEEN = SEEN
    corpus.VERDICTS = VERDICTS


def pytest_collection_modifyitems(items):
    # acceptance runs last so the session-wide bound sees every other test's states
    items.sort(key=lambda item: item.get_closest_marker("acceptance") is not None)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in VERDICTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def reference_circuit():
    return corpus.REFERENCE.circuit()
