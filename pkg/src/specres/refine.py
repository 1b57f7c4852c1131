"""Fejer-preconditioned objective and grid refinement for unit-amplitude spikes.

Weighting the measurements by the Fourier coefficients ``c_j`` of ``K_l^r``
turns the Vandermonde system into an almost orthogonal one. For a candidate
location ``z`` the weighted misfit

    F(z) = sum_{|j| <= r l} c_j |v_j - exp(i 2 pi j z)|^2
         = T - 2 sum_k K_l^r(z - f_k)        (noiseless, u_k = 1)

is close to a quadratic bowl around every true location and flat far from
them. :func:`iterative_refinement` finds the ``k`` bowls on a coarse grid and
then shrinks a window around each one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (InsufficientMeasurements, NoiseBudgetExceeded, OracleRegimeViolation,
                     PreconditionViolation)
from .fejer import FejerCoefficients, fejer_power_coeffs, fejer_power_eval
from .signal import TWO_PI, MeasurementSet, Signal, measure, min_separation, wrap_distance


def default_power(delta: float, epsilon: float, ell: int) -> int:
    """Smallest ``r >= 1`` with ``pi^2 / (4 l^2 Delta^2)^r <= eps^2 / 8``."""
    base = 4.0 * (ell * delta) ** 2
    target = epsilon**2 / 8.0
    if base <= 1.0:
        raise PreconditionViolation(f"need 2 * ell * delta > 1, got ell={ell}, delta={delta}")
    r = max(1, math.ceil(math.log(math.pi**2 / target) / math.log(base)))
    while math.pi**2 / base**r > target:
        r += 1
    return r


@dataclass(frozen=True)
class RefineConfig:
    ell: int
    r: int
    epsilon: float
    k: int
    C: float = 12.0
    c: float = 1.0 / 3.0

    def __post_init__(self):
        if self.ell < 4:
            raise PreconditionViolation(f"ell must be >= 4, got {self.ell}")
        if self.r < 1:
            raise PreconditionViolation(f"r must be >= 1, got {self.r}")
        if not 0.0 < self.epsilon < 0.5:
            raise PreconditionViolation(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.k < 1:
            raise PreconditionViolation("k must be positive")

    @classmethod
    def for_separation(cls, delta: float, epsilon: float, k: int, r: Optional[int] = None) -> "RefineConfig":
        # the local bracket needs ell >= 4; a larger ell only sharpens the kernel
        ell = max(4, math.ceil(1.0 / delta))
        if r is None:
            r = default_power(delta, epsilon, ell)
        return cls(ell, r, epsilon, k)

    @property
    def cutoff(self) -> int:
        """Highest frequency the objective touches, ``m = r l``."""
        return self.r * self.ell

    @property
    def ratio(self) -> float:
        return self.C * self.r / self.c

    def spacing(self, j: int) -> float:
        return (1.0 / (4.0 * self.ell)) * (1.0 / self.ratio) ** j

    def accuracy(self, j: int) -> float:
        return math.sqrt(self.ratio) * self.spacing(j) + self.epsilon / 2.0

    @property
    def deletion_radius(self) -> float:
        return 1.0 / (2.0 * self.ell)

    @property
    def initial_grid_size(self) -> int:
        return math.ceil(1.0 / self.spacing(1) - 1e-9)

    def schedule(self) -> list:
        """Refinement rounds as ``(j, window radius, spacing, accuracy after)`` tuples."""
        rounds = []
        bound, j = self.accuracy(1), 2
        while bound > self.epsilon:
            rounds.append((j, bound, self.spacing(j), self.accuracy(j)))
            bound, j = self.accuracy(j), j + 1
        return rounds

    @staticmethod
    def window_size(radius: float, spacing: float) -> int:
        return 2 * int(math.floor(radius / spacing + 1e-9)) + 1

    def call_ceiling(self) -> int:
        """Hard ceiling on oracle evaluations implied by the schedule."""
        rounds = self.schedule()
        if not rounds:
            return 10 * self.initial_grid_size
        per_round = max(self.window_size(radius, h) for _, radius, h, _ in rounds)
        g1 = self.accuracy(1)
        n_rounds = max(len(rounds), math.ceil(math.log(g1 / self.epsilon) / math.log(self.ratio)))
        return 10 * (self.initial_grid_size + self.k * n_rounds * per_round)

    def as_dict(self) -> dict:
        return {"ell": self.ell, "r": self.r, "epsilon": self.epsilon, "k": self.k, "C": self.C, "c": self.c}


class CountingOracle:
    """Wraps a vectorized ``F(z)`` and counts every point it is asked about."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray]):
        self.fn = fn
        self.calls = 0

    def __call__(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        self.calls += z.size
        return np.asarray(self.fn(z), dtype=float)


# -- objective ---------------------------------------------------------------

def objective(meas: MeasurementSet, coeffs: FejerCoefficients, z):
    """``sum_j c_j |v_j - exp(i 2 pi j z)|^2`` over ``|j| <= r l``.

    Expanded as ``sum c_j (|v_j|^2 + 1) - 2 Re sum c_j conj(v_j) w^j`` with
    ``w = exp(i 2 pi z)``; the trigonometric sum is evaluated by Horner's
    rule, which costs ``O(r l)`` per point.
    """
    M = coeffs.support
    if meas.half_width < M:
        raise InsufficientMeasurements(f"objective needs |j| <= {M}, have half-width {meas.half_width}")
    z = np.asarray(z, dtype=float)
    v = meas.at(np.arange(-M, M + 1))
    c = coeffs.coeffs
    const = float(np.sum(c * (np.abs(v) ** 2 + 1.0)))
    w = np.exp(1j * TWO_PI * z)
    poly = np.polyval((c * np.conj(v))[::-1], w) * np.exp(-1j * TWO_PI * M * z)
    out = const - 2.0 * poly.real
    return float(out) if out.ndim == 0 else out


def kernel_sum(locations, ell: int, r: int, z):
    """``G(z) = sum_k K_l^r(z - f_k)``."""
    z = np.asarray(z, dtype=float)
    locs = np.asarray(locations, dtype=float)
    out = fejer_power_eval(ell, r, np.subtract.outer(z, locs)).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def analytic_objective(locations, ell: int, r: int) -> Callable:
    """Noiseless unit-amplitude objective ``T - 2 G(z)`` computed from the true locations."""
    locs = np.asarray(locations, dtype=float)
    T = float(fejer_power_eval(ell, r, np.subtract.outer(locs, locs)).sum()) + 1.0

    def F(z):
        return T - 2.0 * kernel_sum(locs, ell, r, z)

    F.offset = T - 2.0
    return F


def measurement_oracle(meas: MeasurementSet, config: RefineConfig) -> Callable:
    coeffs = fejer_power_coeffs(config.ell, config.r)
    if meas.half_width < coeffs.support:
        raise InsufficientMeasurements(
            f"refinement needs half-width >= r*ell = {coeffs.support}, have {meas.half_width}")
    return lambda z: objective(meas, coeffs, z)


# -- preconditioning checks --------------------------------------------------

def cross_term_bound(ell: int, r: int, delta: float) -> float:
    """Relative deviation allowed by the Salem-type inequality."""
    if r == 1:
        return math.pi**2 / (24.0 * ell**2 * delta**2)
    return math.pi**2 / (4.0**r * ell ** (2 * r) * delta ** (2 * r))


@dataclass(frozen=True)
class SalemReport:
    lhs: float
    target: float
    bound: float
    ok: bool


def salem_check(signal: Signal, ell: int, r: int) -> SalemReport:
    """Compare the kernel-weighted energy of noiseless measurements with ``sum |u_j|^2``."""
    delta = min_separation(signal)
    if delta <= 0:
        raise PreconditionViolation("signal must have positive separation")
    coeffs = fejer_power_coeffs(ell, r)
    v = measure(signal, coeffs.support).values
    lhs = float(np.sum(coeffs.coeffs * np.abs(v) ** 2))
    target = float(np.sum(np.abs(signal.amplitudes) ** 2))
    bound = target * cross_term_bound(ell, r, delta)
    return SalemReport(lhs, target, bound, abs(lhs - target) <= bound)


def structure_bounds(signal: Signal, config: RefineConfig, z):
    """Regime and bracket for ``G(z)``: ``("near", lo, hi)`` or ``("far", None, hi)``."""
    ell, r = config.ell, config.r
    delta = min_separation(signal)
    gamma = float(np.min(wrap_distance(z, signal.locations)))
    tail = math.pi**2 / (4.0**r * ell ** (2 * r) * delta ** (2 * r))
    if gamma < min(delta / 2.0, 1.0 / ell):
        return ("near", 1.0 - 12.0 * r * ell**2 * gamma**2 - tail, 1.0 - ell**2 * gamma**2 / 3.0 + tail)
    if gamma >= 1.0 / ell:
        return ("far", None, 0.25**r + tail)
    raise PreconditionViolation(f"distance {gamma} falls between delta/2 and 1/ell; no bracket applies")


def structure_check(signal: Signal, config: RefineConfig, z: float) -> bool:
    """Whether ``G(z)`` obeys the near-regime bracket or the far-regime ceiling."""
    regime, lo, hi = structure_bounds(signal, config, z)
    g = kernel_sum(signal.locations, config.ell, config.r, z)
    if regime == "near":
        return lo <= g <= hi
    return g <= hi


# -- search ------------------------------------------------------------------

@dataclass
class RefinementResult:
    locations: np.ndarray
    oracle_calls: int
    initial_locations: np.ndarray
    trace: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"locations": self.locations.tolist(), "oracle_calls": self.oracle_calls,
                "initial_locations": self.initial_locations.tolist(), "trace": self.trace}


def _argmin_smallest_z(z: np.ndarray, values: np.ndarray) -> float:
    order = np.argsort(z, kind="stable")
    return float(z[order][np.argmin(values[order])])


def iterative_refinement(oracle: Callable, config: RefineConfig) -> RefinementResult:
    """Locate ``k`` minimizers of ``oracle`` to within ``config.epsilon``.

    Initialization scans a grid of spacing ``delta_1`` over the circle and
    repeatedly takes the best remaining point, deleting its ``1/(2 l)``
    neighbourhood. Each refinement round ``j`` searches a window of radius
    equal to the previous accuracy bound at spacing ``delta_j`` around every
    estimate. Rounds continue until the accuracy bound ``gamma_j`` drops to
    ``epsilon``.
    """
    counter = oracle if isinstance(oracle, CountingOracle) else CountingOracle(oracle)
    start_calls = counter.calls
    k = config.k

    n_grid = config.initial_grid_size
    grid = np.arange(n_grid) / n_grid
    values = counter(grid)
    alive = np.ones(n_grid, dtype=bool)
    picks = []
    for _ in range(k):
        if not alive.any():
            raise OracleRegimeViolation(f"candidate grid exhausted after {len(picks)} of {k} picks")
        masked = np.where(alive, values, np.inf)
        z = float(grid[np.argmin(masked)])
        picks.append(z)
        alive &= wrap_distance(grid, z) > config.deletion_radius
    est = np.array(picks)
    initial = est.copy()
    trace = [{"round": 1, "spacing": 1.0 / n_grid, "radius": None, "points": n_grid,
              "gamma": config.accuracy(1)}]

    for j, radius, h, gamma in config.schedule():
        half = int(math.floor(radius / h + 1e-9))
        offsets = np.arange(-half, half + 1) * h
        windows = np.mod(est[:, None] + offsets[None, :], 1.0)
        vals = counter(windows.ravel()).reshape(windows.shape)
        est = np.array([_argmin_smallest_z(windows[i], vals[i]) for i in range(k)])
        trace.append({"round": j, "spacing": h, "radius": radius, "points": int(windows.size),
                      "gamma": gamma})

    return RefinementResult(est, counter.calls - start_calls, initial, trace)


def recover_refine(meas: MeasurementSet, config: RefineConfig,
                   noise_bound: Optional[float] = None) -> RefinementResult:
    """Unit-amplitude location recovery from measurements through the weighted misfit.

    ``noise_bound`` (or the measurement set's own recorded bound) is the
    declared per-entry ``|eta_l|``; it must not exceed ``eps^2 / (4k)``.
    """
    declared = noise_bound if noise_bound is not None else meas.noise_bound
    budget = config.epsilon**2 / (4.0 * config.k)
    if declared is not None and declared > budget:
        raise NoiseBudgetExceeded(f"declared noise {declared:g} exceeds eps^2/(4k) = {budget:g}")
    return iterative_refinement(CountingOracle(measurement_oracle(meas, config)), config)
