import math

import numpy as np
import pytest

from corpus import random_gates
from hombell import (Gate, HeraldImpossible, HeraldScheme, HeraldSpec, LcgState, apply_circuit,
                     apply_gate, apply_loss, condition_click, condition_no_click, herald_all,
                     herald_single_photon_projection, vacuum_state)
from hombell.fock import FockState, fock_moments, fock_single_photon
from hombell.herald import no_click_probabilities, weight_tolerance


def random_state(seed, n_modes=3, max_gates=6):
    """Random gates after squeezers that put light into every heralded mode."""
    rng = np.random.default_rng(seed)
    prefix = [Gate("S2", (1, m), 0.4) for m in range(3, n_modes + 1)]
    return apply_circuit(vacuum_state(n_modes), prefix + list(random_gates(rng, n_modes, max_gates)))


def test_vacuum_never_clicks():
    _, p = condition_no_click(vacuum_state(2), 2)
    assert p == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(HeraldImpossible):
        condition_click(vacuum_state(2), 2)


def test_tmsv_no_click_closed_form():
    r = 0.6
    s = apply_gate(vacuum_state(2), Gate("S2", (1, 2), r))
    cond, p = condition_no_click(s, 2)
    assert p == pytest.approx(1 / math.cosh(r) ** 2, rel=1e-12)
    # heralding vacuum on one arm of a TMSV leaves vacuum on the other
    assert cond.covs[0] == pytest.approx(np.eye(2) / 4, abs=1e-12)


@pytest.mark.parametrize("seed", range(25))
@pytest.mark.parametrize("eta", [1.0, 0.6, 0.05])
def test_click_and_no_click_sum_to_one(seed, eta):
    s = random_state(seed)
    p_none = no_click_probabilities(s, 3, eta)[0]
    # the click kernel returns 1 - p_none, so take the click through loss and an ideal detector
    try:
        _, p_click = condition_click(apply_loss(s, 3, eta), 3, 1.0)
    except HeraldImpossible:
        p_click = 0.0
    assert abs(p_none + p_click - 1.0) <= 1e-10


@pytest.mark.parametrize("seed", range(10))
def test_weights_stay_normalized(seed):
    s = random_state(seed, 4, 8)
    state, _ = condition_click(s, 4)
    state, _ = condition_click(state, 3)
    assert abs(math.fsum(state.weights) - 1.0) <= weight_tolerance(state.weights)
    assert state.n_components == 4
    assert state.is_valid()


@pytest.mark.parametrize("seed", range(10))
def test_herald_order_does_not_matter(seed):
    s = random_state(100 + seed, 4, 8)
    first4, p4 = condition_click(s, 4, 0.7)
    a, pa = condition_click(first4, 3, 0.7)
    first3, p3 = condition_click(s, 3, 0.7)
    # old mode 4 is now mode 3
    b, pb = condition_click(first3, 3, 0.7)
    assert pa * p4 == pytest.approx(pb * p3, rel=1e-9)
    assert np.allclose(a.moments()[1], b.moments()[1], atol=1e-9)


def test_loss_composes():
    s = random_state(7, 2, 5)
    once = apply_loss(s, 2, 0.3 * 0.5)
    twice = apply_loss(apply_loss(s, 2, 0.3), 2, 0.5)
    assert np.allclose(once.covs, twice.covs, atol=1e-14)
    full = apply_loss(s, 1, 0.0)
    assert full.covs[0][:2, :2] == pytest.approx(np.eye(2) / 4, abs=1e-15)
    with pytest.raises(ValueError):
        apply_loss(s, 1, 1.5)


def test_detector_efficiency_equals_loss_then_ideal_detector():
    s = random_state(11, 3, 6)
    a, pa = condition_click(s, 3, 0.4)
    b, pb = condition_click(apply_loss(s, 3, 0.4), 3, 1.0)
    assert pa == pytest.approx(pb, rel=1e-12)
    assert np.allclose(a.moments()[1], b.moments()[1], atol=1e-12)


def test_click_probability_grows_with_efficiency():
    s = apply_gate(vacuum_state(2), Gate("S2", (1, 2), 0.5))
    ps = [condition_click(s, 2, eta)[1] for eta in np.linspace(0.05, 1.0, 20)]
    assert np.all(np.diff(ps) > 0)


def test_single_photon_projection_on_fock_one():
    # |1> on the heralded mode: tap reflects it with probability sin^2(0.1)
    amp = np.zeros((3, 3), dtype=complex)
    amp[0, 1] = 1.0
    _, p = fock_single_photon(FockState.pure(amp), 2)
    assert p == pytest.approx(math.sin(0.1) ** 2, rel=1e-12)


def test_single_photon_projection_matches_oracle():
    s = apply_gate(vacuum_state(2), Gate("S2", (1, 2), 0.3))
    state, p = herald_single_photon_projection(s, 2, 0.8)
    amp = np.zeros((13, 13), dtype=complex)
    lam = math.tanh(0.3)
    for n in range(13):
        # TMSV amplitudes with the package's squeezer sign
        amp[n, n] = (-lam) ** n / math.cosh(0.3)
    f, fp = fock_single_photon(FockState.pure(amp), 2, 0.8)
    assert p == pytest.approx(fp, rel=1e-6)
    mean, cov = fock_moments(f)
    m, c = state.moments()
    assert np.allclose(c, cov[:2, :2], atol=1e-8)
    # a photon heralded on one arm leaves close to |1> on the other, <x^2> near 3/4
    assert c[0, 0] > 0.25


def test_herald_spec_validation():
    with pytest.raises(ValueError):
        HeraldSpec((3, 3), (HeraldScheme.CLICK,) * 2, (1.0, 1.0))
    with pytest.raises(ValueError):
        HeraldSpec((3,), (HeraldScheme.CLICK,), (1.5,))
    spec = HeraldSpec.uniform(5, "single_photon", 0.5)
    assert spec.modes == (3, 4, 5)
    with pytest.raises(ValueError):
        herald_all(vacuum_state(4), spec)
    assert HeraldScheme.parse("s.p.") is HeraldScheme.SINGLE_PHOTON
    with pytest.raises(ValueError):
        HeraldScheme.parse("pnr")


def test_lcg_rejects_unnormalized_weights():
    with pytest.raises(ValueError):
        LcgState(np.array([0.5, 0.4]), np.zeros((2, 2)), np.stack([np.eye(2) / 4] * 2))


def test_lcg_mixture_moments():
    covs = np.stack([np.eye(2) / 4, np.eye(2)])
    s = LcgState(np.array([2.0, -1.0]), np.zeros((2, 2)), covs)
    assert s.moments()[1] == pytest.approx(np.eye(2) * (0.5 - 1.0))


def test_zero_efficiency_is_a_partial_trace():
    s = apply_gate(vacuum_state(2), Gate("S2", (1, 2), 0.5))
    cond, p = condition_no_click(s, 2, 0.0)
    assert p == pytest.approx(1.0, abs=1e-15)
    assert cond.covs[0] == pytest.approx(s.sigma[:2, :2], abs=1e-15)


def test_tmsv_click_probability_and_components():
    r = 0.5
    s = apply_gate(vacuum_state(2), Gate("S2", (1, 2), r))
    cond, p = condition_click(s, 2)
    assert p == pytest.approx(1 - 1 / math.cosh(r) ** 2, rel=1e-12)
    assert cond.n_components == 2


def test_loss_limits_and_cross_covariance():
    r, tau = 0.5, 0.3
    s = apply_gate(vacuum_state(2), Gate("S2", (1, 2), r))
    assert np.allclose(apply_loss(s, 2, 1.0).covs[0], s.sigma, atol=1e-15)
    gone = apply_loss(s, 2, 0.0).covs[0]
    assert gone[2:, 2:] == pytest.approx(np.eye(2) / 4, abs=1e-15)
    assert gone[:2, 2:] == pytest.approx(np.zeros((2, 2)), abs=1e-15)
    lossy = apply_loss(s, 2, tau).covs[0]
    assert lossy[0, 2] == pytest.approx(-math.sqrt(tau) * math.sinh(2 * r) / 4, rel=1e-12)


def test_single_photon_projection_of_vacuum_is_impossible():
    with pytest.raises(HeraldImpossible):
        herald_single_photon_projection(vacuum_state(2), 2)


def test_single_photon_projection_fidelity():
    # exact |1><1| on one arm of a TMSV leaves |1> on the other
    r = 0.45
    amp = np.zeros((13, 13), dtype=complex)
    for n in range(13):
        amp[n, n] = (-math.tanh(r)) ** n / math.cosh(r)
    state, _ = fock_single_photon(FockState.pure(amp), 2)
    fidelity = sum(p * abs(a[1]) ** 2 for p, a in zip(state.probs, state.amps))
    assert fidelity >= 0.99


def test_herald_all_edge_cases():
    state, p = herald_all(vacuum_state(2), HeraldSpec())
    assert p == 1.0 and state.n_components == 1
    with pytest.raises(HeraldImpossible):
        herald_all(vacuum_state(4), HeraldSpec.uniform(4))
