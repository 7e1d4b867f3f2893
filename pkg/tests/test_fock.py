import math

import numpy as np
import pytest

from corpus import tmsv_correlator
from hombell import Gate, apply_circuit, condition_click, vacuum_state
from hombell.fock import (CutoffTooSmall, FockState, fock_apply, fock_circuit, fock_herald,
                          fock_moments, fock_sign_correlator, hermite_functions, run_escalating,
                          sign_matrix)


def test_vacuum_moments():
    mean, cov = fock_moments(FockState.vacuum(2, 6))
    assert mean == pytest.approx(np.zeros(4), abs=1e-15)
    assert cov == pytest.approx(np.eye(4) / 4, abs=1e-15)


def test_hermite_functions_orthonormal():
    x = np.linspace(-10, 10, 20001)
    psi = hermite_functions(8, x)
    gram = (psi * (x[1] - x[0])) @ psi.T
    assert gram == pytest.approx(np.eye(9), abs=1e-9)


def test_sign_matrix_properties():
    s = sign_matrix(10)
    assert s == pytest.approx(s.T, abs=1e-14)
    assert np.diag(s) == pytest.approx(np.zeros(11), abs=1e-12)
    # <0|sgn|1> = sqrt(2/pi)
    assert s[0, 1] == pytest.approx(math.sqrt(2 / math.pi), rel=1e-12)


@pytest.mark.parametrize("gates", [
    [Gate("S2", (1, 2), 0.4)],
    [Gate("S1", (1,), 0.3), Gate("B", (1, 2), 0.7), Gate("R", (2,), 1.1)],
    [Gate("S2", (1, 2), 0.2), Gate("S1", (2,), -0.25), Gate("B", (1, 2), -0.4)],
])
def test_moments_match_gaussian(gates):
    state = run_escalating(lambda c: fock_circuit(2, gates, c, leak_tol=1e-12))
    mean, cov = fock_moments(state)
    g = apply_circuit(vacuum_state(2), gates)
    assert cov == pytest.approx(g.sigma, abs=1e-10)
    assert mean == pytest.approx(g.mu, abs=1e-12)


def test_tmsv_sign_correlator():
    state = fock_circuit(2, [Gate("S2", (1, 2), 0.5)], 20, leak_tol=1e-10)
    for th, ph in [(0.0, -math.pi / 4), (0.4, 0.9)]:
        assert fock_sign_correlator(state, th, ph) == pytest.approx(tmsv_correlator(0.5, th, ph),
                                                                     abs=1e-7)


def test_click_herald_matches_gaussian():
    gates = [Gate("S2", (1, 3), 0.5), Gate("B", (1, 2), 0.6), Gate("S1", (2,), 0.2)]
    f = run_escalating(lambda c: fock_circuit(3, gates, c, leak_tol=1e-12))
    cond, p = fock_herald(f, 3, "click", 0.7)
    g, gp = condition_click(apply_circuit(vacuum_state(3), gates), 3, 0.7)
    assert p == pytest.approx(gp, abs=1e-9)
    assert fock_moments(cond)[1] == pytest.approx(g.moments()[1], abs=1e-8)


def test_cutoff_too_small_raises_and_escalates():
    with pytest.raises(CutoffTooSmall):
        fock_circuit(1, [Gate("S1", (1,), 1.2)], 4)
    state = run_escalating(lambda c: fock_circuit(1, [Gate("S1", (1,), 0.6)], c, 1e-9))
    assert state.cutoff >= 16


def test_vacuum_click_impossible():
    with pytest.raises(ZeroDivisionError):
        fock_herald(FockState.vacuum(2, 4), 2, "click")


def test_passive_gates_conserve_norm():
    state = FockState.vacuum(2, 14)
    state = fock_apply(Gate("S1", (1,), 0.2), state, 1e-8)
    before = sum(float(np.vdot(a, a).real) for a in state.amps)
    after = fock_apply(Gate("B", (1, 2), 0.9), state, 1e-8)
    assert sum(float(np.vdot(a, a).real) for a in after.amps) == pytest.approx(before, abs=1e-12)


def test_tmsv_amplitudes():
    r = 0.4
    state = fock_circuit(2, [Gate("S2", (1, 2), r)], 20, leak_tol=1e-10)
    amp = state.amps[0]
    for n in range(6):
        assert amp[n, n] == pytest.approx((-math.tanh(r)) ** n / math.cosh(r), abs=1e-12)
    assert abs(amp[1, 2]) < 1e-14


def test_hong_ou_mandel_null():
    amp = np.zeros((4, 4), dtype=complex)
    amp[1, 1] = 1.0
    out = fock_apply(Gate("B", (1, 2), math.pi / 4), FockState.pure(amp), 1e-12)
    assert abs(out.amps[0][1, 1]) < 1e-14
    assert abs(out.amps[0][2, 0]) ** 2 == pytest.approx(0.5)


def test_phase_on_number_state():
    amp = np.zeros(6, dtype=complex)
    amp[3] = 1.0
    out = fock_apply(Gate("R", (1,), 0.3), FockState.pure(amp), 1e-12)
    assert out.amps[0][3] == pytest.approx(np.exp(-3j * 0.3), abs=1e-12)


def test_fock_herald_limits():
    r = 0.5
    state = fock_circuit(2, [Gate("S2", (1, 2), r)], 24, leak_tol=1e-10)
    _, p = fock_herald(state, 2, "no_click")
    assert p == pytest.approx(1 / math.cosh(r) ** 2, rel=1e-9)
    _, p0 = fock_herald(state, 2, "no_click", eta=0.0)
    assert p0 == pytest.approx(1.0, rel=1e-9)


def test_sign_correlator_vacuum_and_tmsv():
    from hombell import correlator
    assert fock_sign_correlator(FockState.vacuum(2, 6), 0.3, 0.2) == pytest.approx(0.0, abs=1e-12)
    state = fock_circuit(2, [Gate("S2", (1, 2), 0.3)], 12, leak_tol=1e-6)
    g = apply_circuit(vacuum_state(2), [Gate("S2", (1, 2), 0.3)])
    assert fock_sign_correlator(state, 0.0, 0.0) == pytest.approx(correlator(g, 0.0, 0.0), abs=1e-4)


def test_reference_circuit_correlators_at_cutoff_ten():
    from corpus import REFERENCE
    from hombell import evaluate
    c = REFERENCE.circuit()
    state = fock_circuit(4, c.gates, 10, leak_tol=1e-6)
    state, _ = fock_herald(state, 4, "click")
    state, _ = fock_herald(state, 3, "click")
    angles = [(0.0, -math.pi / 4), (0.0, math.pi / 4), (math.pi / 2, -math.pi / 4),
              (math.pi / 2, math.pi / 4)]
    fock_e = [fock_sign_correlator(state, a, b) for a, b in angles]
    assert fock_e == pytest.approx(list(evaluate(c).correlators), abs=1e-3)
