"""Gaussian states and the four Gaussian gates.

Quadratures are interleaved, ``(x1, p1, ..., xN, pN)``, with ``[x, p] = i/2``
so the vacuum covariance is ``I/4``. Mode indices in the public API are
1-based, as in the circuit notation ``B(theta)[i, j]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels

SYMMETRY_TOL = 1e-12
VALIDITY_TOL = -1e-9


class GateKind(str, Enum):
    """Gate kinds, declared in the canonical (R, S1, B, S2) order."""

    R = "R"
    S1 = "S1"
    B = "B"
    S2 = "S2"

    @property
    def n_modes(self) -> int:
        return 1 if self in (GateKind.R, GateKind.S1) else 2

    @property
    def code(self) -> int:
        return _KIND_CODES[self]

    @property
    def active(self) -> bool:
        return self in (GateKind.S1, GateKind.S2)


_KIND_CODES = {
    GateKind.R: _kernels.PHASE,
    GateKind.S1: _kernels.SQUEEZE1,
    GateKind.B: _kernels.BEAMSPLITTER,
    GateKind.S2: _kernels.SQUEEZE2,
}
KIND_ORDER = (GateKind.R, GateKind.S1, GateKind.B, GateKind.S2)


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    modes: tuple[int, ...]
    param: float

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        modes = tuple(int(m) for m in self.modes)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "param", float(self.param))
        if len(modes) != kind.n_modes:
            raise ValueError(f"{kind.value} acts on {kind.n_modes} mode(s), got {modes}")
        if any(m < 1 for m in modes):
            raise ValueError(f"mode indices are 1-based, got {modes}")
        if len(modes) == 2 and not modes[0] < modes[1]:
            raise ValueError(f"two-mode gate needs i < j, got {modes}")

    def check_modes(self, n_modes: int) -> None:
        if max(self.modes) > n_modes:
            raise ValueError(f"gate {self} does not fit in {n_modes} modes")

    def with_param(self, param: float) -> "Gate":
        return Gate(self.kind, self.modes, param)

    def __str__(self):
        modes = ",".join(str(m) for m in self.modes)
        return f"{self.kind.value}({self.param:.5g})[{modes}]"


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal Omega = (+)_i [[0, 1], [-1, 0]]."""
    omega = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n_modes), omega)


@dataclass(frozen=True, eq=False)
class GaussianState:
    mu: np.ndarray
    sigma: np.ndarray
    n_modes: int = field(init=False)

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).reshape(-1)
        sigma = np.array(self.sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise ValueError("sigma must be square")
        if sigma.shape[0] != mu.shape[0] or mu.shape[0] % 2 or mu.shape[0] == 0:
            raise ValueError("mu and sigma must describe 2N quadratures, N >= 1")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "n_modes", mu.shape[0] // 2)

    def is_symmetric(self) -> bool:
        return bool(np.max(np.abs(self.sigma - self.sigma.T), initial=0.0) <= SYMMETRY_TOL)

    def is_valid(self) -> bool:
        return self.is_symmetric() and check_valid(self.sigma)

    def allclose(self, other: "GaussianState", atol: float = 1e-12) -> bool:
        return (self.n_modes == other.n_modes
                and np.allclose(self.mu, other.mu, atol=atol, rtol=0)
                and np.allclose(self.sigma, other.sigma, atol=atol, rtol=0))


def vacuum_state(n_modes: int) -> GaussianState:
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes) / 4)


def symplectic_matrix(gate: Gate, n_modes: int) -> np.ndarray:
    """Full 2N x 2N symplectic matrix of ``gate``.

    The two-mode squeezer uses the off-diagonal block ``-sinh(r) sigma_z``,
    which is the symplectic action of exp(r(a_i a_j - a_i^dag a_j^dag)).
    """
    gate.check_modes(n_modes)
    block = _kernels.gate_block(gate.kind.code, gate.param)
    idx = _indices(gate.modes)
    m = np.eye(2 * n_modes)
    m[np.ix_(idx, idx)] = block
    return m


def _indices(modes) -> list[int]:
    out = []
    for mode in modes:
        out += [2 * (mode - 1), 2 * (mode - 1) + 1]
    return out


def apply_gate(state: GaussianState, gate: Gate) -> GaussianState:
    gate.check_modes(state.n_modes)
    sigma = np.array(state.sigma)
    mu = np.array(state.mu)
    i = gate.modes[0] - 1
    j = gate.modes[-1] - 1
    _kernels.apply_gate_inplace(sigma, mu, gate.kind.code, i, j, gate.param)
    return GaussianState(mu, sigma)


def apply_circuit(state: GaussianState, gates) -> GaussianState:
    for gate in gates:
        state = apply_gate(state, gate)
    return state


def partial_trace(state: GaussianState, mode: int) -> GaussianState:
    """Delete the quadrature rows/columns of ``mode`` (1-based)."""
    if state.n_modes < 2:
        raise ValueError("cannot trace out the last remaining mode")
    if not 1 <= mode <= state.n_modes:
        raise ValueError(f"mode {mode} out of range 1..{state.n_modes}")
    keep = [k for k in range(2 * state.n_modes) if k // 2 != mode - 1]
    return GaussianState(state.mu[keep], state.sigma[np.ix_(keep, keep)])


def check_valid(sigma, tol: float = VALIDITY_TOL) -> bool:
    """True iff sigma + i Omega / 4 is positive semidefinite (within ``tol``)."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
        raise ValueError("sigma must be a square 2N x 2N matrix")
    herm = sigma + 0.25j * symplectic_form(sigma.shape[0] // 2)
    return bool(np.linalg.eigvalsh(herm).min() >= tol)


def symplectic_eigenvalues(sigma) -> np.ndarray:
    """Williamson spectrum: moduli of the eigenvalues of i Omega sigma, each once."""
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ sigma))
    return np.sort(ev)[::2]


def purity(state: GaussianState) -> float:
    """1/sqrt(det(4 sigma)); equals 1 for pure states."""
    return float(1.0 / np.sqrt(np.linalg.det(4.0 * state.sigma)))


def db_from_squeezing(r: float) -> float:
    return 20.0 * r / np.log(10.0)


def squeezing_from_db(db: float) -> float:
    return db * np.log(10.0) / 20.0
