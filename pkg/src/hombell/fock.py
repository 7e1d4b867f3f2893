"""Brute-force truncated Fock-space simulator, used as an independent oracle.

States are mixtures of pure states, ``sum_k p_k |psi_k><psi_k|``, with each
amplitude tensor indexed by photon numbers (one axis per mode, 0-based modes
internally, 1-based in the public functions like the Gaussian API). Gates are
exponentials of ladder-operator generators computed in a padded space and
restricted to the cutoff, so truncation shows up as measurable norm leakage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .gaussian import Gate, GateKind

DEFAULT_CUTOFF = 12
LEAK_TOL = 1e-6
ESCALATION = (12, 16, 20, 24, 32)
PAD = 10
# half-width of the x-grid (in units where the vacuum variance is 1/4)
X_MAX = 12.0
TAIL_TOL = 1e-8


class CutoffTooSmall(RuntimeError):
    pass


class GridTooCoarse(RuntimeError):
    pass


@dataclass
class FockState:
    """Mixture of pure states on ``n_modes`` modes with photon numbers 0..cutoff."""

    probs: np.ndarray
    amps: list
    cutoff: int
    leakage: float = 0.0

    @property
    def n_modes(self) -> int:
        return self.amps[0].ndim

    @classmethod
    def vacuum(cls, n_modes: int, cutoff: int = DEFAULT_CUTOFF) -> "FockState":
        if cutoff < 2:
            raise ValueError("cutoff must be >= 2")
        amp = np.zeros((cutoff + 1,) * n_modes, dtype=complex)
        amp[(0,) * n_modes] = 1.0
        return cls(np.ones(1), [amp], cutoff)

    @classmethod
    def pure(cls, amp) -> "FockState":
        amp = np.asarray(amp, dtype=complex)
        return cls(np.ones(1), [amp / np.linalg.norm(amp)], amp.shape[0] - 1)

    def density_matrix(self) -> np.ndarray:
        dim = self.amps[0].size
        rho = np.zeros((dim, dim), dtype=complex)
        for p, a in zip(self.probs, self.amps):
            v = a.reshape(-1)
            rho += p * np.outer(v, v.conj())
        return rho

    def append_vacuum(self) -> "FockState":
        amps = []
        for a in self.amps:
            b = np.zeros(a.shape + (self.cutoff + 1,), dtype=complex)
            b[..., 0] = a
            amps.append(b)
        return FockState(self.probs.copy(), amps, self.cutoff, self.leakage)


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), k=1)


def _blockwise_expm(gen: np.ndarray) -> np.ndarray:
    """expm of a generator that conserves some photon-number quantity.

    The sparsity graph splits into small invariant blocks (fixed total photon
    number for B, fixed difference for S2), each exponentiated on its own.
    """
    n_blocks, labels = connected_components(csr_matrix(gen != 0), directed=False)
    u = np.zeros(gen.shape, dtype=complex)
    for b in range(n_blocks):
        idx = np.flatnonzero(labels == b)
        u[np.ix_(idx, idx)] = expm(gen[np.ix_(idx, idx)])
    return u


@lru_cache(maxsize=32)
def _local_unitary(kind: str, param: float, cutoff: int) -> np.ndarray:
    """Padded-space exponential of a one- or two-mode gate, restricted to the cutoff."""
    big = cutoff + 1 + PAD
    a = annihilation(big)
    ad = a.T
    eye = np.eye(big)
    if kind == "R":
        gen = -1j * param * (ad @ a)
        modes = 1
    elif kind == "S1":
        gen = 0.5 * param * (a @ a - ad @ ad)
        modes = 1
    else:
        ai, aj = np.kron(a, eye), np.kron(eye, a)
        if kind == "B":
            gen = param * (ai.T @ aj - ai @ aj.T)
        else:
            gen = param * (ai @ aj - ai.T @ aj.T)
        modes = 2
    u = _blockwise_expm(np.asarray(gen, dtype=complex))
    keep = np.arange(cutoff + 1)
    if modes == 2:
        keep = (keep[:, None] * big + keep[None, :]).reshape(-1)
    return u[np.ix_(keep, keep)]


def _apply_local(amp: np.ndarray, u: np.ndarray, modes: tuple[int, ...]) -> np.ndarray:
    axes = list(modes)
    moved = np.moveaxis(amp, axes, list(range(len(axes))))
    shape = moved.shape
    flat = moved.reshape(int(np.prod(shape[:len(axes)])), -1)
    out = (u @ flat).reshape(shape)
    return np.moveaxis(out, list(range(len(axes))), axes)


def fock_apply(gate: Gate, state: FockState, leak_tol: float = LEAK_TOL) -> FockState:
    """Apply ``gate``; raises CutoffTooSmall if more than ``leak_tol`` norm leaves the cutoff."""
    gate.check_modes(state.n_modes)
    u = _local_unitary(gate.kind.value, gate.param, state.cutoff)
    modes = tuple(m - 1 for m in gate.modes)
    amps = []
    leak = 0.0
    for p, a in zip(state.probs, state.amps):
        b = _apply_local(a, u, modes)
        kept = float(np.vdot(b, b).real)
        leak += p * max(0.0, float(np.vdot(a, a).real) - kept)
        amps.append(b)
    total = state.leakage + leak
    if total > leak_tol:
        raise CutoffTooSmall(f"leakage {total:.2e} at cutoff {state.cutoff} after {gate}")
    return FockState(state.probs.copy(), amps, state.cutoff, total)


def fock_circuit(n_modes: int, gates, cutoff: int = DEFAULT_CUTOFF,
                 leak_tol: float = LEAK_TOL) -> FockState:
    state = FockState.vacuum(n_modes, cutoff)
    for gate in gates:
        state = fock_apply(gate, state, leak_tol)
    return state


def run_escalating(fn, cutoffs=ESCALATION):
    """Call fn(cutoff) for increasing cutoffs until it stops raising CutoffTooSmall."""
    last = None
    for c in cutoffs:
        try:
            return fn(c)
        except CutoffTooSmall as exc:
            last = exc
    raise last


def fock_herald(state: FockState, mode: int, outcome: str, eta: float = 1.0
                ) -> tuple[FockState, float]:
    """Apply (1-eta)^n (no_click) or 1-(1-eta)^n (click) on ``mode`` and trace it out."""
    if outcome not in ("click", "no_click"):
        raise ValueError("outcome must be 'click' or 'no_click'")
    if state.n_modes < 2:
        raise ValueError("cannot herald the last remaining mode")
    n = np.arange(state.cutoff + 1)
    keep = (1.0 - eta) ** n
    if outcome == "click":
        keep = 1.0 - keep
    probs = []
    amps = []
    axis = mode - 1
    for p, a in zip(state.probs, state.amps):
        for k in range(state.cutoff + 1):
            if keep[k] == 0.0:
                continue
            branch = np.take(a, k, axis=axis)
            mass = float(np.vdot(branch, branch).real)
            if mass > 0.0:
                probs.append(p * keep[k] * mass)
                amps.append(branch / math.sqrt(mass))
    total = float(np.sum(probs)) if probs else 0.0
    if total < 1e-30:
        raise ZeroDivisionError(f"{outcome} probability {total:.3g} on mode {mode}")
    return FockState(np.array(probs) / total, amps, state.cutoff, state.leakage), total


def fock_single_photon(state: FockState, mode: int, eta: float = 1.0, tap: float = 0.1,
                       leak_tol: float = LEAK_TOL) -> tuple[FockState, float]:
    """Weak tap B(tap) into a fresh mode, click on the tap, no click on ``mode``."""
    ancilla = state.n_modes + 1
    tapped = fock_apply(Gate(GateKind.B, (mode, ancilla), tap), state.append_vacuum(), leak_tol)
    after, p1 = fock_herald(tapped, ancilla, "click", eta)
    final, p2 = fock_herald(after, mode, "no_click", eta)
    return final, p1 * p2


def quadrature_ops(n_modes: int, cutoff: int) -> list[np.ndarray]:
    """x1, p1, ..., xN, pN on the truncated tensor space, with [x, p] = i/2."""
    dim = cutoff + 1
    a = annihilation(dim)
    x = (a + a.T) / 2.0
    p = (a - a.T) / 2.0j
    ops = []
    for m in range(n_modes):
        for single in (x, p):
            op = np.ones((1, 1))
            for k in range(n_modes):
                op = np.kron(op, single if k == m else np.eye(dim))
            ops.append(op)
    return ops


def fock_moments(state: FockState) -> tuple[np.ndarray, np.ndarray]:
    """Means and symmetrised covariance of the quadratures.

    Truncated ladder operators misbehave only on the top Fock level, so each
    state is embedded one level higher before the products are formed.
    """
    n = state.n_modes
    cutoff = state.cutoff + 1
    padded = []
    for a in state.amps:
        b = np.zeros((cutoff + 1,) * n, dtype=complex)
        b[(slice(0, cutoff),) * n] = a
        padded.append(b.reshape(-1))
    ops = quadrature_ops(n, cutoff)
    mean = np.zeros(2 * n)
    second = np.zeros((2 * n, 2 * n))
    for p, v in zip(state.probs, padded):
        qv = [op @ v for op in ops]
        for i in range(2 * n):
            mean[i] += p * np.vdot(v, qv[i]).real
            for j in range(i, 2 * n):
                val = p * np.vdot(qv[i], qv[j]).real
                second[i, j] += val
                if j != i:
                    second[j, i] += val
    return mean, second - np.outer(mean, mean)


def hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """psi_n(x) = (2/pi)^(1/4) / sqrt(2^n n!) H_n(sqrt(2) x) exp(-x^2), rows n = 0..n_max."""
    u = math.sqrt(2.0) * np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + u.shape)
    out[0] = math.pi ** -0.25 * np.exp(-u * u / 2.0)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * u * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * u * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out * 2.0 ** 0.25


@lru_cache(maxsize=None)
def sign_matrix(cutoff: int) -> np.ndarray:
    """S_nm = integral of sgn(x) psi_n(x) psi_m(x) dx."""
    nodes, weights = np.polynomial.legendre.leggauss(600)
    x = 0.5 * X_MAX * (nodes + 1.0)
    w = 0.5 * X_MAX * weights
    psi = hermite_functions(cutoff, x)
    half = (psi * w) @ psi.T
    tail = 1.0 - 2.0 * np.diag(half)
    if np.max(np.abs(tail)) > TAIL_TOL:
        raise GridTooCoarse(f"tail mass {np.max(np.abs(tail)):.2e} beyond |x| = {X_MAX}")
    parity = (-1.0) ** np.add.outer(np.arange(cutoff + 1), np.arange(cutoff + 1))
    # the integral over x < 0 equals parity * the integral over x > 0
    return half - parity * half


def fock_sign_correlator(state: FockState, theta: float, phi: float) -> float:
    """<sgn(x_theta) sgn(x_phi)> on a 2-mode state."""
    if state.n_modes != 2:
        raise ValueError("expected a 2-mode state")
    rotated = fock_apply(Gate(GateKind.R, (1,), theta), state, leak_tol=math.inf)
    rotated = fock_apply(Gate(GateKind.R, (2,), phi), rotated, leak_tol=math.inf)
    s = sign_matrix(state.cutoff)
    value = 0.0
    for p, a in zip(rotated.probs, rotated.amps):
        value += p * np.vdot(a, s @ a @ s.T).real
    return float(value)
