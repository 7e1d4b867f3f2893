import math

import numpy as np
import pytest

from corpus import REFERENCE
from hombell import Circuit, Gate, evaluate
from hombell.optimize import (HeraldInfeasible, OptimizationInfeasible, OptimizeConfig,
                              SweepPoint, SweepResult, distance_grid, maximize_chsh,
                              maximize_herald_prob, nelder_mead, sweep_distance,
                              sweep_efficiency, transmissivity)


def test_nelder_mead_parabola():
    res = nelder_mead(lambda x: (x[0] - 3.0) ** 2, [0.0], OptimizeConfig(simplex_tolerance=1e-10))
    assert res.converged
    assert res.x[0] == pytest.approx(3.0, abs=1e-6)


def test_nelder_mead_rosenbrock():
    def rosen(x):
        return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2
    res = nelder_mead(rosen, [-1.2, 1.0], OptimizeConfig(max_iterations=5000,
                                                         simplex_tolerance=1e-10))
    assert res.x == pytest.approx([1.0, 1.0], abs=1e-4)


def test_nelder_mead_respects_box():
    res = nelder_mead(lambda x: -x[0], [0.0], OptimizeConfig(), lower=[-1.0], upper=[2.0])
    assert res.x[0] == pytest.approx(2.0, abs=1e-4)
    assert res.x[0] <= 2.0 + 1e-3


def test_nelder_mead_never_worse_than_start():
    res = nelder_mead(lambda x: float(np.sum(x ** 2)), [0.0, 0.0], OptimizeConfig(max_iterations=1))
    assert res.fun <= 0.0


def test_nelder_mead_rejects_nonfinite_start():
    with pytest.raises(ValueError):
        nelder_mead(lambda x: math.nan, [0.0])


def test_maximize_chsh_improves_reference():
    c = REFERENCE.circuit()
    start = evaluate(c).chsh
    best, chsh = maximize_chsh(c)
    assert chsh >= start - 1e-9
    assert chsh == pytest.approx(evaluate(best).chsh, abs=1e-12)
    cap = OptimizeConfig().squeeze_cap
    assert all(abs(g.param) <= cap + 1e-12 for g in best.gates if g.kind.active)


def test_maximize_chsh_honours_cap():
    c = Circuit(2, (Gate("S2", (1, 2), 0.1),))
    best, _ = maximize_chsh(c, config=OptimizeConfig(squeeze_cap_db=3.0))
    assert abs(best.gates[0].param) <= OptimizeConfig(squeeze_cap_db=3.0).squeeze_cap + 1e-12


def test_maximize_herald_prob_keeps_floor():
    c = REFERENCE.circuit()
    floor = evaluate(c).chsh - 0.002
    best, p = maximize_herald_prob(c, chsh_floor=floor)
    res = evaluate(best)
    assert res.chsh >= floor - 1e-3
    assert p >= evaluate(c).herald_probability * (1 - 1e-9)


def test_maximize_herald_prob_infeasible_floor():
    with pytest.raises(OptimizationInfeasible):
        maximize_herald_prob(REFERENCE.circuit(), chsh_floor=3.0)
    with pytest.raises(OptimizationInfeasible):
        maximize_herald_prob(REFERENCE.circuit(), chsh_floor=2.5)


def test_vacuum_herald_is_infeasible():
    c = Circuit.build(3, [Gate("B", (1, 3), 0.3)])
    with pytest.raises(HeraldInfeasible):
        maximize_chsh(c)


def test_transmissivity_and_grid():
    assert transmissivity(10.0) == pytest.approx(10 ** -0.2)
    assert list(distance_grid(1.0, 0.25)) == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ValueError):
        distance_grid(1.0, 0.0)


def test_distance_sweep_fixed_parameters_keep_probability():
    sweep = sweep_distance(REFERENCE.circuit(), km_max=4.0, km_step=1.0, reoptimize=False)
    p = sweep.column("herald_probability")
    assert np.ptp(p) <= 1e-9 * p[0]
    assert np.all(np.diff(sweep.column("chsh")) < 0)


def test_distance_sweep_reoptimizes():
    cfg = OptimizeConfig(simplex_tolerance=1e-5)
    sweep = sweep_distance(REFERENCE.circuit(), km_max=2.0, km_step=1.0, config=cfg)
    fixed = sweep_distance(REFERENCE.circuit(), km_max=2.0, km_step=1.0, reoptimize=False)
    assert np.all(sweep.column("chsh") >= fixed.column("chsh") - 1e-9)


def test_efficiency_sweep_shapes():
    sweep = sweep_efficiency(REFERENCE.circuit(), eta_grid=(1.0, 0.5, 0.1))
    assert list(sweep.column("x")) == [0.1, 0.5, 1.0]
    assert np.all(np.diff(sweep.column("herald_probability")) > 0)
    with pytest.raises(ValueError):
        sweep_efficiency(REFERENCE.circuit(), eta_grid=(0.0, 1.0))


def test_sweep_result_requires_increasing_axis():
    pts = (SweepPoint(1.0, 2.0, 1e-6, ()), SweepPoint(0.5, 2.0, 1e-6, ()))
    with pytest.raises(ValueError):
        SweepResult("eta", pts)


def test_nelder_mead_constant_objective_returns_start():
    res = nelder_mead(lambda x: 4.0, [0.3, -1.0])
    assert list(res.x) == [0.3, -1.0] and res.fun == 4.0


def test_nelder_mead_rosenbrock_value():
    def rosen(x):
        return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2
    res = nelder_mead(rosen, [-1.2, 1.0], OptimizeConfig(max_iterations=5000,
                                                         simplex_tolerance=1e-10))
    assert res.fun < 1e-6


@pytest.mark.parametrize("seed", range(3))
def test_perturbed_reference_reconverges(seed):
    c = REFERENCE.circuit()
    rng = np.random.default_rng(seed)
    perturbed = c.with_params(c.params * (1 + rng.choice([-0.05, 0.05], len(c.params))))
    _, chsh = maximize_chsh(perturbed)
    assert chsh >= 2.067


def test_phase_only_circuit_scores_zero():
    c = Circuit(2, (Gate("R", (1,), 0.3), Gate("R", (2,), -0.8)))
    best, chsh = maximize_chsh(c)
    assert chsh == pytest.approx(0.0, abs=1e-12)


def test_herald_floor_at_reference_value():
    _, p = maximize_herald_prob(REFERENCE.circuit(), chsh_floor=2.068)
    assert p >= 2e-6


def test_zero_floor_never_lowers_probability():
    c = REFERENCE.circuit()
    _, p = maximize_herald_prob(c, chsh_floor=0.0)
    assert p >= evaluate(c).herald_probability
