"""Homodyne marginals, binned correlators and the CHSH score."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .gaussian import GaussianState
from .herald import LcgState

log = logging.getLogger(__name__)

QUAD_TOL = 1e-12
DET_FLOOR = 1e-300
CORRELATOR_SLACK = 1e-6


class DegenerateCovariance(ValueError):
    """A 2x2 marginal covariance is singular; the joint density is undefined."""


@dataclass(frozen=True)
class Binning:
    """Step function R -> {-1, +1} given by sorted breakpoints.

    ``values[i]`` applies on the i-th interval between consecutive breakpoints
    (with -inf and +inf at the ends), so ``len(values) == len(breakpoints) + 1``.
    """

    breakpoints: tuple[float, ...] = (0.0,)
    values: tuple[int, ...] = (-1, 1)

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        if len(vals) != len(bps) + 1:
            raise ValueError("need exactly one value per interval")
        if any(v not in (-1, 1) for v in vals):
            raise ValueError("binning values must be +-1")
        if any(not math.isfinite(b) for b in bps) or list(bps) != sorted(set(bps)):
            raise ValueError("breakpoints must be finite, distinct and increasing")

    @classmethod
    def sign(cls) -> "Binning":
        return cls()

    def intervals(self) -> list[tuple[float, float, int]]:
        edges = (-math.inf,) + self.breakpoints + (math.inf,)
        return [(edges[i], edges[i + 1], v) for i, v in enumerate(self.values)]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(np.asarray(self.breakpoints), x, side="left")
        return np.asarray(self.values)[idx]


def agreement_rectangles(a: Binning, b: Binning) -> np.ndarray:
    """Disjoint rectangles [u1,v1]x[u2,v2] where a(x1) b(x2) = +1, as an (R, 4) array."""
    rects = [(u1, v1, u2, v2)
             for u1, v1, va in a.intervals()
             for u2, v2, vb in b.intervals()
             if va * vb == 1]
    return np.array(rects, dtype=float).reshape(-1, 4)


def mirror_index(rects: np.ndarray) -> np.ndarray:
    """mirror[r] = q < r if rectangle r is the point reflection of rectangle q, else -1."""
    out = np.full(len(rects), -1, dtype=np.int64)
    for r, (u1, v1, u2, v2) in enumerate(rects):
        for q in range(r):
            if np.array_equal(rects[q], [-v1, -u1, -v2, -u2]):
                out[r] = q
                break
    return out


@dataclass(frozen=True)
class BellMeasurement:
    theta0: float = 0.0
    theta1: float = math.pi / 2
    phi0: float = -math.pi / 4
    phi1: float = math.pi / 4
    binning_a: Binning = field(default_factory=Binning.sign)
    binning_b: Binning = field(default_factory=Binning.sign)

    @property
    def angles(self) -> np.ndarray:
        return np.array([self.theta0, self.theta1, self.phi0, self.phi1], dtype=float)

    def rectangles(self) -> tuple[np.ndarray, np.ndarray]:
        rects = agreement_rectangles(self.binning_a, self.binning_b)
        return rects, mirror_index(rects)

    @property
    def is_sign_binning(self) -> bool:
        return self.binning_a == Binning.sign() and self.binning_b == Binning.sign()


@dataclass(frozen=True, eq=False)
class Marginal2D:
    """Joint density of the two measured quadratures: sum_k w_k N(mu2_k, sigma2_k)."""

    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray

    @property
    def components(self):
        return list(zip(self.weights, self.means, self.covs))


def _two_mode(state) -> LcgState:
    if isinstance(state, GaussianState):
        state = LcgState.from_gaussian(state)
    if state.n_modes != 2:
        raise ValueError(f"expected a 2-mode state, got {state.n_modes} modes")
    return state


def homodyne_marginal(state, theta: float, phi: float) -> Marginal2D:
    state = _two_mode(state)
    means = np.empty((state.n_components, 2))
    covs = np.empty((state.n_components, 2, 2))
    for k in range(state.n_components):
        m1, m2, sa, sb, sc = _kernels.rotated_marginal(state.covs[k], state.means[k], theta, phi)
        means[k] = (m1, m2)
        covs[k] = ((sa, sc), (sc, sb))
    return Marginal2D(state.weights.copy(), means, covs)


def rectangle_integral(mu2, sigma2, u1, v1, u2, v2, tol: float = QUAD_TOL) -> float:
    """Gaussian mass of [u1, v1] x [u2, v2] by adaptive quadrature of the erf reduction."""
    sigma2 = np.asarray(sigma2, dtype=float)
    sa, sc, sb = sigma2[0, 0], sigma2[0, 1], sigma2[1, 1]
    if not sa * sb - sc * sc > DET_FLOOR:
        raise DegenerateCovariance(f"singular marginal covariance {sigma2.tolist()}")
    value = _kernels.rect_integral(float(mu2[0]), float(mu2[1]), sa, sb, sc,
                                   float(u1), float(v1), float(u2), float(v2), tol)
    return float(value)


def _checked(value: float, label: str) -> float:
    if math.isnan(value):
        raise DegenerateCovariance(f"singular marginal covariance in {label}")
    if abs(value) > 1.0 + CORRELATOR_SLACK:
        log.warning("%s = %.9f lies outside [-1, 1]; clamping", label, value)
    return min(1.0, max(-1.0, value))


def correlator(state, theta: float, phi: float, meas: BellMeasurement | None = None,
               tol: float = QUAD_TOL) -> float:
    """<A B> for quadratures at angles (theta, phi) with the binning of ``meas``."""
    state = _two_mode(state)
    meas = meas or BellMeasurement()
    rects, mirror = meas.rectangles()
    value = _kernels.correlator_kernel(state.weights, state.means, state.covs,
                                       float(theta), float(phi), rects, mirror, tol)
    return _checked(float(value), f"<A({theta:.4g}) B({phi:.4g})>")


def correlators(state, meas: BellMeasurement | None = None, tol: float = QUAD_TOL) -> np.ndarray:
    """The four correlators (E00, E01, E10, E11)."""
    meas = meas or BellMeasurement()
    return np.array([correlator(state, t, p, meas, tol)
                     for t in (meas.theta0, meas.theta1)
                     for p in (meas.phi0, meas.phi1)])


def chsh_from_correlators(e) -> float:
    e00, e01, e10, e11 = e
    return float(abs(e00 + e01 + e10 - e11))


def chsh_score(state, meas: BellMeasurement | None = None, tol: float = QUAD_TOL) -> float:
    return chsh_from_correlators(correlators(state, meas, tol))

