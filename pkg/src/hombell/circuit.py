"""Circuits (gate list + heralding) and their end-to-end evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .chsh import BellMeasurement, correlators, chsh_from_correlators
from .gaussian import Gate, GateKind, apply_circuit, db_from_squeezing, vacuum_state
from .herald import (HeraldImpossible, HeraldScheme, HeraldSpec, LcgState, apply_loss,
                     herald_all)

ALICE, BOB = 1, 2
ENV_FAILURE_THRESHOLD = 1e-10


@dataclass(frozen=True)
class Circuit:
    """N-mode circuit: gates applied in list order to the vacuum, then heralding."""

    n_modes: int
    gates: tuple[Gate, ...] = ()
    herald: HeraldSpec = field(default_factory=HeraldSpec)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_modes < 2:
            raise ValueError("a Bell circuit needs at least 2 modes")
        for gate in self.gates:
            gate.check_modes(self.n_modes)
        if self.herald.modes:
            self.herald.validate_for(self.n_modes)

    @classmethod
    def build(cls, n_modes, gates, scheme=HeraldScheme.CLICK, eta=1.0) -> "Circuit":
        return cls(n_modes, tuple(gates), HeraldSpec.uniform(n_modes, scheme, eta))

    @property
    def params(self) -> np.ndarray:
        return np.array([g.param for g in self.gates], dtype=float)

    def with_params(self, params) -> "Circuit":
        gates = tuple(g.with_param(p) for g, p in zip(self.gates, params, strict=True))
        return replace(self, gates=gates)

    def with_eta(self, eta: float) -> "Circuit":
        return replace(self, herald=self.herald.with_eta(eta))

    def append(self, gate: Gate) -> "Circuit":
        return replace(self, gates=self.gates + (gate,))

    def squeezing_db(self) -> list[float]:
        return [db_from_squeezing(abs(g.param)) for g in self.gates if g.kind.active]

    def structure(self) -> tuple:
        """Hashable gate layout without parameters."""
        return (self.n_modes, tuple((g.kind, g.modes) for g in self.gates), self.herald)

    def __str__(self):
        return " ".join(str(g) for g in self.gates) or "<empty>"


@dataclass(frozen=True)
class EvalResult:
    chsh: float
    herald_probability: float
    correlators: tuple[float, float, float, float]
    heralded: bool
    # False when the weights are so large that float cancellation makes the score unreliable
    reliable: bool = True


class CompiledCircuit:
    """Array form of a circuit for repeated kernel evaluation at varying parameters."""

    def __init__(self, circuit: Circuit, meas: BellMeasurement | None = None,
                 bob_transmissivity: float = 1.0, threshold: float = ENV_FAILURE_THRESHOLD,
                 tol: float = 1e-12):
        self.circuit = circuit
        self.meas = meas or BellMeasurement()
        n = circuit.n_modes
        self.kinds = np.array([g.kind.code for g in circuit.gates], dtype=np.int64)
        self.mode_a = np.array([g.modes[0] - 1 for g in circuit.gates], dtype=np.int64)
        self.mode_b = np.array([g.modes[-1] - 1 for g in circuit.gates], dtype=np.int64)
        self.schemes, self.etas = circuit.herald.arrays(n)
        self.angles = self.meas.angles
        self.rects, self.mirror = self.meas.rectangles()
        self.loss_mode = -1 if bob_transmissivity == 1.0 else BOB - 1
        self.loss_tau = float(bob_transmissivity)
        self.threshold = float(threshold)
        self.tol = float(tol)

    def raw(self, params) -> np.ndarray:
        return _kernels.evaluate_circuit(
            self.circuit.n_modes, self.kinds, self.mode_a, self.mode_b,
            np.asarray(params, dtype=float), self.schemes, self.etas,
            self.loss_mode, self.loss_tau, self.angles, self.rects, self.mirror,
            self.threshold, self.tol)

    def heralded(self, params):
        """Kernel-route heralded 2-mode state, or None if a stage falls below the threshold."""
        w, ms, cs, prob, status = _kernels.heralded_two_mode(
            self.circuit.n_modes, self.kinds, self.mode_a, self.mode_b,
            np.asarray(params, dtype=float), self.schemes, self.etas,
            self.loss_mode, self.loss_tau, self.threshold)
        if status == _kernels.STATUS_NUMERICAL:
            raise FloatingPointError("degenerate covariance while heralding")
        if status != _kernels.STATUS_OK:
            return None, float(prob)
        return LcgState(w, ms, cs), float(prob)

    def __call__(self, params) -> EvalResult:
        out = self.raw(params)
        status = int(out[6])
        if status == _kernels.STATUS_NUMERICAL:
            raise FloatingPointError("degenerate covariance while evaluating circuit")
        return EvalResult(float(out[0]), float(out[1]), tuple(float(x) for x in out[2:6]),
                          status in (_kernels.STATUS_OK, _kernels.STATUS_IMPRECISE),
                          status != _kernels.STATUS_IMPRECISE)

    def score(self, params) -> float:
        """CHSH for optimizers: 0 unless heralding succeeded with a reliable score."""
        out = self.raw(params)
        return float(out[0]) if out[6] == _kernels.STATUS_OK else 0.0


def evaluate(circuit: Circuit, meas: BellMeasurement | None = None,
             bob_transmissivity: float = 1.0,
             threshold: float = ENV_FAILURE_THRESHOLD) -> EvalResult:
    """Fast kernel evaluation. A stage probability below ``threshold`` scores 0."""
    return CompiledCircuit(circuit, meas, bob_transmissivity, threshold)(circuit.params)


def heralded_state(circuit: Circuit, bob_transmissivity: float = 1.0):
    """Reference route through the object API; raises HeraldImpossible."""
    state = apply_circuit(vacuum_state(circuit.n_modes), circuit.gates)
    if bob_transmissivity != 1.0:
        state = apply_loss(state, BOB, bob_transmissivity)
    if circuit.herald.modes:
        heralded, prob = herald_all(state, circuit.herald)
    else:
        heralded, prob = LcgState.from_gaussian(state), 1.0
    # modes beyond the first two that carry no herald are simply discarded
    keep = slice(0, 4)
    heralded = LcgState(heralded.weights, heralded.means[:, keep], heralded.covs[:, keep, keep])
    return heralded, prob


def evaluate_reference(circuit: Circuit, meas: BellMeasurement | None = None,
                       bob_transmissivity: float = 1.0) -> EvalResult:
    try:
        state, prob = heralded_state(circuit, bob_transmissivity)
    except HeraldImpossible:
        return EvalResult(0.0, 0.0, (0.0,) * 4, False)
    e = correlators(state, meas)
    reliable = float(np.abs(state.weights).sum()) <= _kernels.WEIGHT_CEILING
    return EvalResult(chsh_from_correlators(e), prob, tuple(float(x) for x in e), True, reliable)


def gates_from_spec(spec) -> tuple[Gate, ...]:
    """Build gates from tuples like ('B', 1.5, 1, 3)."""
    out = []
    for kind, param, *modes in spec:
        out.append(Gate(GateKind(kind), tuple(modes), param))
    return tuple(out)
