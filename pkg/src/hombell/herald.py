"""Threshold-detector heralding on linear combinations of Gaussian states.

A heralded state is kept as ``sum_k w_k rho_k`` with real weights summing to
one; click events introduce negative weights. Mode arguments are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .gaussian import GaussianState, check_valid, vacuum_state

WEIGHT_TOL = 1e-9
# weights of rare heralds reach ~1/p; their float spacing bounds how exactly they can sum to 1
ROUNDING_SLACK = 64 * np.finfo(float).eps
IMPOSSIBLE_PROBABILITY = 1e-30
SP_TAP_ANGLE = _kernels.SP_TAP_ANGLE


class HeraldImpossible(RuntimeError):
    """The requested detection event has (numerically) zero probability."""


class HeraldScheme(str, Enum):
    CLICK = "click"
    SINGLE_PHOTON = "single_photon"

    @property
    def code(self) -> int:
        if self is HeraldScheme.CLICK:
            return _kernels.CLICK
        return _kernels.SINGLE_PHOTON

    @classmethod
    def parse(cls, text: str) -> "HeraldScheme":
        aliases = {"cl": cls.CLICK, "cl.": cls.CLICK, "click": cls.CLICK,
                   "sp": cls.SINGLE_PHOTON, "s.p.": cls.SINGLE_PHOTON,
                   "single_photon": cls.SINGLE_PHOTON}
        try:
            return aliases[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown heralding scheme {text!r}") from None


@dataclass(frozen=True, eq=False)
class LcgState:
    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    n_modes: int = field(init=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        means = np.array(self.means, dtype=float)
        covs = np.array(self.covs, dtype=float)
        if covs.ndim != 3 or means.ndim != 2 or len(w) != len(means) or len(w) != len(covs):
            raise ValueError("inconsistent component arrays")
        if len(w) == 0:
            raise ValueError("an LcgState needs at least one component")
        if abs(w.sum() - 1.0) > weight_tolerance(w):
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)
        object.__setattr__(self, "n_modes", covs.shape[1] // 2)

    @classmethod
    def from_gaussian(cls, state: GaussianState) -> "LcgState":
        return cls(np.ones(1), state.mu[None, :], state.sigma[None, :, :])

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def components(self) -> list[tuple[float, GaussianState]]:
        return [(float(w), GaussianState(m, s))
                for w, m, s in zip(self.weights, self.means, self.covs)]

    def is_valid(self) -> bool:
        return all(check_valid(s) for s in self.covs)

    def moments(self) -> tuple[np.ndarray, np.ndarray]:
        """First moments and symmetrised covariance of the whole (mixed) state."""
        mean = self.weights @ self.means
        second = np.einsum("k,kij->ij", self.weights, self.covs)
        second = second + np.einsum("k,ki,kj->ij", self.weights, self.means, self.means)
        return mean, second - np.outer(mean, mean)


def weight_tolerance(weights) -> float:
    """Allowed |sum(w) - 1|: WEIGHT_TOL plus the rounding floor of the weights' magnitude."""
    return WEIGHT_TOL + ROUNDING_SLACK * float(np.abs(weights).sum())


def _as_lcg(state) -> LcgState:
    if isinstance(state, GaussianState):
        return LcgState.from_gaussian(state)
    return state


def _check(state: LcgState, mode: int, eta: float) -> None:
    if not 1 <= mode <= state.n_modes:
        raise ValueError(f"mode {mode} out of range 1..{state.n_modes}")
    if state.n_modes < 2:
        raise ValueError("cannot herald the last remaining mode")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"detector efficiency must lie in [0, 1], got {eta}")


def no_click_probabilities(state, mode: int, eta: float) -> np.ndarray:
    """Per-component no-click probabilities."""
    state = _as_lcg(state)
    _check(state, mode, eta)
    out = np.empty(state.n_components)
    for k in range(state.n_components):
        _, _, p = _kernels.no_click_gaussian(state.covs[k], state.means[k], mode - 1, eta)
        if p < 0:
            raise np.linalg.LinAlgError("degenerate covariance in no-click conditioning")
        out[k] = p
    return out


def condition_no_click(state, mode: int, eta: float = 1.0) -> tuple[LcgState, float]:
    state = _as_lcg(state)
    _check(state, mode, eta)
    w, means, covs, p = _kernels.lcg_no_click(
        state.weights, state.means, state.covs, mode - 1, float(eta))
    if np.isnan(p):
        raise np.linalg.LinAlgError("degenerate covariance in no-click conditioning")
    if p < IMPOSSIBLE_PROBABILITY:
        raise HeraldImpossible(f"no-click probability {p:.3g} on mode {mode}")
    return LcgState(w, means, covs), float(p)


def condition_click(state, mode: int, eta: float = 1.0) -> tuple[LcgState, float]:
    """Click on ``mode``: every component k becomes (traced_k, -p_k * no-click_k)."""
    state = _as_lcg(state)
    _check(state, mode, eta)
    w, means, covs, p = _kernels.lcg_click(
        state.weights, state.means, state.covs, mode - 1, float(eta))
    if np.isnan(p):
        raise np.linalg.LinAlgError("degenerate covariance in click conditioning")
    if p < IMPOSSIBLE_PROBABILITY:
        raise HeraldImpossible(f"click probability {p:.3g} on mode {mode}")
    return LcgState(w, means, covs), float(p)


def append_vacuum(state) -> LcgState:
    state = _as_lcg(state)
    means, covs = _kernels.lcg_append_vacuum(state.means, state.covs)
    return LcgState(state.weights, means, covs)


def _beamsplit(state: LcgState, i: int, j: int, theta: float) -> LcgState:
    means = np.array(state.means)
    covs = np.array(state.covs)
    for k in range(state.n_components):
        _kernels.apply_gate_inplace(covs[k], means[k], _kernels.BEAMSPLITTER, i - 1, j - 1, theta)
    return LcgState(state.weights, means, covs)


def apply_loss(state, mode: int, transmissivity: float) -> LcgState:
    """Pure loss: mix ``mode`` with a vacuum ancilla on B(arccos sqrt(tau)), drop the ancilla."""
    state = _as_lcg(state)
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {transmissivity}")
    if not 1 <= mode <= state.n_modes:
        raise ValueError(f"mode {mode} out of range 1..{state.n_modes}")
    ancilla = state.n_modes + 1
    mixed = _beamsplit(append_vacuum(state), mode, ancilla,
                       float(np.arccos(np.sqrt(transmissivity))))
    keep = slice(0, 2 * state.n_modes)
    return LcgState(mixed.weights, mixed.means[:, keep], mixed.covs[:, keep, keep])


def herald_single_photon_projection(state, mode: int, eta: float = 1.0) -> tuple[LcgState, float]:
    """Approximate |1><1| on ``mode``: tap with B(0.1), click on the tap, no click on the mode."""
    state = _as_lcg(state)
    _check(state, mode, eta)
    ancilla = state.n_modes + 1
    tapped = _beamsplit(append_vacuum(state), mode, ancilla, SP_TAP_ANGLE)
    after_click, p_click = condition_click(tapped, ancilla, eta)
    after, p_none = condition_no_click(after_click, mode, eta)
    return after, p_click * p_none


@dataclass(frozen=True)
class HeraldSpec:
    """Heralding scheme and efficiency per heralded mode (1-based)."""

    modes: tuple[int, ...] = ()
    schemes: tuple[HeraldScheme, ...] = ()
    etas: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(m) for m in self.modes))
        object.__setattr__(self, "schemes", tuple(HeraldScheme(s) for s in self.schemes))
        object.__setattr__(self, "etas", tuple(float(e) for e in self.etas))
        if not len(self.modes) == len(self.schemes) == len(self.etas):
            raise ValueError("modes, schemes and etas must have equal length")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError("duplicate heralded mode")
        for eta in self.etas:
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"detector efficiency must lie in [0, 1], got {eta}")

    @classmethod
    def uniform(cls, n_modes: int, scheme=HeraldScheme.CLICK, eta: float = 1.0) -> "HeraldSpec":
        """Herald the last N-2 modes with one scheme and efficiency."""
        modes = tuple(range(3, n_modes + 1))
        return cls(modes, (HeraldScheme(scheme),) * len(modes), (eta,) * len(modes))

    def with_eta(self, eta: float) -> "HeraldSpec":
        return HeraldSpec(self.modes, self.schemes, (eta,) * len(self.modes))

    def validate_for(self, n_modes: int) -> None:
        if sorted(self.modes) != list(range(3, n_modes + 1)):
            raise ValueError(f"heralded modes must be 3..{n_modes}, got {self.modes}")

    def arrays(self, n_modes: int) -> tuple[np.ndarray, np.ndarray]:
        """Dense per-mode scheme codes and efficiencies (0-based index) for the kernels."""
        schemes = np.zeros(n_modes, dtype=np.int64)
        etas = np.ones(n_modes)
        for mode, scheme, eta in zip(self.modes, self.schemes, self.etas):
            schemes[mode - 1] = scheme.code
            etas[mode - 1] = eta
        return schemes, etas


def herald_all(state, spec: HeraldSpec) -> tuple[LcgState, float]:
    """Apply every heralding stage, highest mode first; returns the 2-mode state."""
    state = _as_lcg(state)
    spec.validate_for(state.n_modes)
    order = sorted(zip(spec.modes, spec.schemes, spec.etas), reverse=True)
    total = 1.0
    for mode, scheme, eta in order:
        if scheme is HeraldScheme.CLICK:
            state, p = condition_click(state, mode, eta)
        else:
            state, p = herald_single_photon_projection(state, mode, eta)
        total *= p
    return state, total


def vacuum_lcg(n_modes: int = 2) -> LcgState:
    return LcgState.from_gaussian(vacuum_state(n_modes))
