"""The numba kernels and their pure-numpy fallback must give the same numbers."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from corpus import ROWS
from hombell import _kernels, evaluate

SCRIPT = """
import json, sys
sys.path.insert(0, {tests!r})
from corpus import ROWS
from hombell import _kernels, evaluate
out = {{"numba": _kernels.USE_NUMBA}}
for row in ROWS:
    r = evaluate(row.circuit())
    out[row.name] = [r.chsh, r.herald_probability, *r.correlators]
print(json.dumps(out))
"""


def run_with(flag: str) -> dict:
    env = dict(os.environ, HPL_DISABLE_NUMBA=flag)
    tests = os.path.dirname(__file__)
    proc = subprocess.run([sys.executable, "-c", SCRIPT.format(tests=tests)], env=env,
                          capture_output=True, text=True, timeout=600, check=True)
    return json.loads(proc.stdout)


@pytest.fixture(scope="module")
def fallback():
    return run_with("1")


def test_fallback_really_disables_numba(fallback):
    assert fallback["numba"] is False


def test_fallback_matches_current_route(fallback):
    for row in ROWS:
        r = evaluate(row.circuit())
        here = np.array([r.chsh, r.herald_probability, *r.correlators])
        there = np.array(fallback[row.name])
        tol = 1e-9 if r.reliable else 1e-4
        assert np.allclose(here, there, rtol=1e-9, atol=tol), row.name


@pytest.mark.skipif(not _kernels.USE_NUMBA, reason="numba disabled in this session")
def test_python_source_of_a_compiled_kernel():
    sigma = np.eye(4) / 4
    mu = np.zeros(4)
    a, b = sigma.copy(), mu.copy()
    _kernels.apply_gate_inplace(a, b, _kernels.SQUEEZE2, 0, 1, 0.3)
    c, d = sigma.copy(), mu.copy()
    _kernels.apply_gate_inplace.py_func(c, d, _kernels.SQUEEZE2, 0, 1, 0.3)
    assert np.array_equal(a, c)
    args = (0.1, -0.2, 0.4, 0.5, 0.1, -1.0, 0.3, -np.inf, 0.2, 1e-12)
    assert _kernels.rect_integral(*args) == pytest.approx(_kernels.rect_integral.py_func(*args),
                                                          abs=1e-14)
