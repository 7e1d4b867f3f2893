"""Nelder-Mead, CHSH and heralding-probability maximization, and robustness sweeps."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .chsh import BellMeasurement
from .circuit import Circuit, CompiledCircuit
from .gaussian import GateKind, squeezing_from_db

log = logging.getLogger(__name__)

TSIRELSON = 2.0 * math.sqrt(2.0)
BOUND_PENALTY = 1e3
FLOOR_PENALTY = 1e6
FLOOR_SLACK = 1e-3
# objective value for circuits whose heralding fails in the probability stage
FAILED_LOG_PROB = 1e3


class OptimizationInfeasible(RuntimeError):
    pass


class HeraldInfeasible(OptimizationInfeasible):
    """Heralding fails at the start point and at every jittered restart."""


@dataclass(frozen=True)
class OptimizeConfig:
    max_iterations: int = 2000
    simplex_tolerance: float = 1e-6
    squeeze_cap_db: float = 10.0
    angle_step: float = 0.1
    squeeze_step: float = 0.05
    restarts: int = 20
    restart_jitter: float = 0.2
    polish: bool = True
    seed: int = 0
    # per-kind (low, high); None entries mean unbounded
    parameter_bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.squeeze_cap_db > 0:
            raise ValueError("squeeze_cap_db must be positive")
        if self.max_iterations < 1 or not self.simplex_tolerance > 0:
            raise ValueError("need max_iterations >= 1 and simplex_tolerance > 0")

    @property
    def squeeze_cap(self) -> float:
        return squeezing_from_db(self.squeeze_cap_db)

    def bounds_for(self, kind: GateKind) -> tuple[float, float]:
        kind = GateKind(kind)
        if kind in self.parameter_bounds:
            lo, hi = self.parameter_bounds[kind]
            return (-math.inf if lo is None else lo, math.inf if hi is None else hi)
        if kind.active:
            return (-self.squeeze_cap, self.squeeze_cap)
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class NelderMeadResult:
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int
    converged: bool


def nelder_mead(objective: Callable[[np.ndarray], float], x0, config: OptimizeConfig | None = None,
                steps=None, lower=None, upper=None) -> NelderMeadResult:
    """Minimize ``objective`` from ``x0``.

    Points outside [lower, upper] are clamped before evaluation and charged
    BOUND_PENALTY times the squared distance to the box. Stops when every
    vertex lies within ``simplex_tolerance`` of the best one, or after
    ``max_iterations`` iterations.
    """
    config = config or OptimizeConfig()
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    n = x0.size
    lower = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    steps = np.full(n, config.angle_step) if steps is None else np.asarray(steps, dtype=float)
    n_eval = 0

    def f(x):
        nonlocal n_eval
        n_eval += 1
        xc = np.clip(x, lower, upper)
        value = float(objective(xc))
        excess = float(np.sum((x - xc) ** 2))
        return value + BOUND_PENALTY * excess if excess > 0 else value

    f0 = f(x0)
    if not math.isfinite(f0):
        raise ValueError(f"objective is not finite at x0 ({f0})")
    if n == 0:
        return NelderMeadResult(x0, f0, 0, n_eval, True)

    simplex = np.empty((n + 1, n))
    simplex[0] = x0
    values = np.empty(n + 1)
    values[0] = f0
    for i in range(n):
        vertex = x0.copy()
        vertex[i] += steps[i]
        if vertex[i] > upper[i]:
            vertex[i] = x0[i] - steps[i]
        simplex[i + 1] = vertex
        values[i + 1] = f(vertex)

    iterations = 0
    converged = False
    while True:
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        if np.max(np.abs(simplex[1:] - simplex[0])) < config.simplex_tolerance:
            converged = True
            break
        if iterations >= config.max_iterations:
            break
        iterations += 1
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + (centroid - worst)
        fr = f(xr)
        if fr < values[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = centroid + 0.5 * (xr - centroid)
            fc = f(xc)
            accept = fc <= fr
        else:
            xc = centroid + 0.5 * (worst - centroid)
            fc = f(xc)
            accept = fc < values[-1]
        if accept:
            simplex[-1], values[-1] = xc, fc
            continue
        for i in range(1, n + 1):
            simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
            values[i] = f(simplex[i])

    best = int(np.argmin(values))
    x_best, f_best = simplex[best], values[best]
    # the returned point is never worse than the start
    if f_best > f0:
        x_best, f_best = x0, f0
    return NelderMeadResult(np.clip(x_best, lower, upper), float(f_best), iterations, n_eval,
                            converged)


def _box(circuit: Circuit, config: OptimizeConfig):
    bounds = [config.bounds_for(g.kind) for g in circuit.gates]
    lower = np.array([b[0] for b in bounds], dtype=float)
    upper = np.array([b[1] for b in bounds], dtype=float)
    steps = np.array([config.squeeze_step if g.kind.active else config.angle_step
                      for g in circuit.gates])
    return lower, upper, steps


def _feasible_start(compiled: CompiledCircuit, x0, lower, upper, config: OptimizeConfig):
    """x0 if it heralds, else the first of ``restarts`` jittered copies that does."""
    x0 = np.clip(x0, lower, upper)
    if compiled(x0).heralded:
        return x0
    rng = np.random.default_rng(config.seed)
    for _ in range(config.restarts):
        x = np.clip(x0 + rng.uniform(-config.restart_jitter, config.restart_jitter, x0.size),
                    lower, upper)
        if compiled(x).heralded:
            return x
    raise HeraldInfeasible(
        f"heralding fails at x0 and at {config.restarts} jittered restarts")


def maximize_chsh(circuit: Circuit, meas: BellMeasurement | None = None,
                  config: OptimizeConfig | None = None,
                  bob_transmissivity: float = 1.0) -> tuple[Circuit, float]:
    """Maximize CHSH over the gate parameters; measurement angles stay fixed."""
    config = config or OptimizeConfig()
    compiled = CompiledCircuit(circuit, meas, bob_transmissivity)
    if not circuit.gates:
        return circuit, compiled(circuit.params).chsh
    lower, upper, steps = _box(circuit, config)
    x = _feasible_start(compiled, circuit.params, lower, upper, config)

    def objective(p):
        return -compiled.score(p)

    result = nelder_mead(objective, x, config, steps, lower, upper)
    if config.polish:
        result = nelder_mead(objective, result.x, config, steps, lower, upper)
    best = circuit.with_params(result.x)
    return best, compiled(result.x).chsh


def maximize_herald_prob(circuit: Circuit, meas: BellMeasurement | None = None,
                         chsh_floor: float = 0.0, config: OptimizeConfig | None = None,
                         bob_transmissivity: float = 1.0) -> tuple[Circuit, float]:
    """Maximize log(probability) subject to CHSH >= chsh_floor (quadratic penalty)."""
    config = config or OptimizeConfig()
    if chsh_floor > TSIRELSON:
        raise OptimizationInfeasible(f"CHSH floor {chsh_floor} exceeds 2*sqrt(2)")
    compiled = CompiledCircuit(circuit, meas, bob_transmissivity)
    lower, upper, steps = _box(circuit, config)
    x0 = np.clip(circuit.params, lower, upper)
    start = compiled(x0)
    if not start.heralded or start.chsh < chsh_floor - FLOOR_SLACK:
        raise OptimizationInfeasible(
            f"start point has CHSH {start.chsh:.6f}, below the floor {chsh_floor}")

    def objective(p):
        out = compiled.raw(p)
        if out[6] != 0:
            return FAILED_LOG_PROB
        shortfall = max(0.0, chsh_floor - out[0])
        return -math.log(out[1]) + FLOOR_PENALTY * shortfall * shortfall

    result = nelder_mead(objective, x0, config, steps, lower, upper)
    if config.polish:
        result = nelder_mead(objective, result.x, config, steps, lower, upper)
    final = compiled(result.x)
    if not final.heralded or final.chsh < chsh_floor - FLOOR_SLACK:
        log.warning("penalty leaked below the CHSH floor; keeping the start point")
        return circuit.with_params(x0), start.herald_probability
    return circuit.with_params(result.x), final.herald_probability


@dataclass(frozen=True)
class SweepPoint:
    x: float
    chsh: float
    herald_probability: float
    params: tuple[float, ...]


@dataclass(frozen=True)
class SweepResult:
    variable: str
    points: tuple[SweepPoint, ...]

    def __post_init__(self):
        xs = [p.x for p in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("sweep variable must be strictly increasing")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(p, name) for p in self.points])


def transmissivity(km: float, db_per_km: float = 0.2) -> float:
    return 10.0 ** (-db_per_km * km / 10.0)


def distance_grid(km_max: float, km_step: float) -> np.ndarray:
    if not km_step > 0:
        raise ValueError("km_step must be positive")
    n = int(math.floor(km_max / km_step + 1e-9))
    return np.round(np.arange(n + 1) * km_step, 12)


def sweep_distance(circuit: Circuit, meas: BellMeasurement | None = None, km_max: float = 12.0,
                   km_step: float = 0.1, config: OptimizeConfig | None = None,
                   reoptimize: bool = True, optimize_angles: bool = False) -> SweepResult:
    """CHSH and heralding probability versus fibre length on Bob's mode.

    Gates are re-optimized at every distance, warm-started from the previous
    optimum. With ``optimize_angles`` the four homodyne angles are optimized
    jointly with the gates.
    """
    config = config or OptimizeConfig()
    meas = meas or BellMeasurement()
    points = []
    current, current_meas = circuit, meas
    for d in distance_grid(km_max, km_step):
        tau = transmissivity(d)
        if reoptimize:
            if optimize_angles:
                current, current_meas = _maximize_with_angles(current, current_meas, config, tau)
            else:
                current, _ = maximize_chsh(current, current_meas, config, tau)
        res = CompiledCircuit(current, current_meas, tau)(current.params)
        points.append(SweepPoint(float(d), res.chsh, res.herald_probability,
                                 tuple(current.params)))
    return SweepResult("distance_km", tuple(points))


def _maximize_with_angles(circuit: Circuit, meas: BellMeasurement, config: OptimizeConfig,
                          tau: float) -> tuple[Circuit, BellMeasurement]:
    lower, upper, steps = _box(circuit, config)
    n = len(circuit.gates)
    lower = np.concatenate([lower, np.full(4, -np.inf)])
    upper = np.concatenate([upper, np.full(4, np.inf)])
    steps = np.concatenate([steps, np.full(4, config.angle_step)])

    def split(x):
        th0, th1, ph0, ph1 = x[n:]
        return replace(meas, theta0=th0, theta1=th1, phi0=ph0, phi1=ph1)

    def objective(x):
        return -CompiledCircuit(circuit, split(x), tau).score(x[:n])

    x0 = np.concatenate([circuit.params, meas.angles])
    result = nelder_mead(objective, x0, config, steps, lower, upper)
    return circuit.with_params(result.x[:n]), split(result.x)


def sweep_efficiency(circuit: Circuit, meas: BellMeasurement | None = None,
                     eta_grid=(0.05, 0.1, 0.25, 0.5, 0.75, 1.0)) -> SweepResult:
    """Heralding probability and CHSH versus detector efficiency at fixed gate parameters."""
    etas = sorted(float(e) for e in eta_grid)
    if not etas or etas[0] <= 0.0 or etas[-1] > 1.0:
        raise ValueError("efficiencies must lie in (0, 1]")
    points = []
    for eta in etas:
        res = CompiledCircuit(circuit.with_eta(eta), meas)(circuit.params)
        points.append(SweepPoint(eta, res.chsh, res.herald_probability, tuple(circuit.params)))
    return SweepResult("eta", tuple(points))
