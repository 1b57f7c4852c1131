"""Modified matrix pencil method.

With nodes ``alpha_j = exp(+i 2 pi f_j)`` and ``V`` the ``p x k`` from-zero
Vandermonde matrix, the Toeplitz matrices

    A[i, j] = v_{i-j} = (V D_u V^H)[i, j]
    B[i, j] = v_{i-j+1} = (V D_u D_alpha V^H)[i, j]

form a pencil whose nonzero generalized eigenvalues (``B x = lambda A x``)
are exactly the ``alpha_j``. After projecting both onto the top-k left
singular subspace of ``A`` the pencil is ``k x k`` and regular, and
``eig(A_hat^{-1} B_hat) = alpha_j`` so ``f_j = arg(lambda_j) / 2 pi`` with no
sign flip. Amplitudes then come from least squares against every measured
``v_l``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .errors import (InsufficientMeasurements, PencilSingular, PreconditionViolation, RankDeficient,
                     RegimeViolation, Singular, ZeroEigenvalue)
from .signal import TWO_PI, MeasurementSet, Signal, measure, min_separation, signal_to_dict
from .vandermonde import VandermondeSpec, build

# relative size of sigma_min(A_hat) below which the projected pencil is singular
PENCIL_RTOL = 1e-13


@dataclass(frozen=True)
class PencilConfig:
    k: int
    pencil_order: Optional[int] = None

    def __post_init__(self):
        if self.k < 1:
            raise PreconditionViolation("k must be positive")
        if self.pencil_order is not None and self.pencil_order < self.k:
            raise PreconditionViolation(f"pencil order {self.pencil_order} < k={self.k}")

    def order_for(self, meas: MeasurementSet) -> int:
        return meas.half_width if self.pencil_order is None else self.pencil_order


@dataclass
class RecoveryResult:
    spikes: Signal
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = signal_to_dict(self.spikes)
        out["diagnostics"] = dict(self.diagnostics)
        return out


def build_pencil(meas: MeasurementSet, order: int):
    """Toeplitz pair ``(A, B)`` of size ``order``; needs ``half_width >= order``."""
    if order < 1:
        raise PreconditionViolation("pencil order must be positive")
    if meas.half_width < order:
        raise InsufficientMeasurements(
            f"pencil order {order} needs indices up to {order}, have half-width {meas.half_width}")
    i = np.arange(order)
    lag = i[:, None] - i[None, :]
    return meas.at(lag), meas.at(lag + 1)


def pencil_eigenvalues(a_tilde, b_tilde, k: int) -> np.ndarray:
    """Generalized eigenvalues of the pencil projected onto the top-k subspace of ``a_tilde``."""
    s, u, _ = linalg.svd(a_tilde)
    u_hat = u[:, :k]
    a_hat = linalg.adjoint(u_hat) @ a_tilde @ u_hat
    b_hat = linalg.adjoint(u_hat) @ b_tilde @ u_hat
    s_hat = linalg.singular_values(a_hat)
    if s[0] == 0 or s_hat[-1] <= PENCIL_RTOL * s[0]:
        raise PencilSingular("projected pencil is numerically singular; noise too large or k too big")
    try:
        return linalg.eig(linalg.solve(a_hat, b_hat))
    except Singular as exc:
        raise PencilSingular(str(exc)) from exc


def eigenvalues_to_locations(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex)
    mag = np.abs(lam)
    if np.any(mag == 0):
        warnings.warn("zero generalized eigenvalue mapped to location 0", ZeroEigenvalue, stacklevel=2)
    unit = np.where(mag == 0, 1.0 + 0j, lam / np.where(mag == 0, 1.0, mag))
    f = np.mod(np.angle(unit) / TWO_PI, 1.0)
    return np.where(f >= 1.0, 0.0, f)


def _vandermonde_stats(locations, rows: int):
    s = linalg.singular_values(build(VandermondeSpec(tuple(locations), rows)))
    return float(s[-1]), float(s[0] / s[-1]) if s[-1] > 0 else math.inf


def recover(meas: MeasurementSet, config: PencilConfig) -> RecoveryResult:
    p = config.order_for(meas)
    k = config.k
    if p < k:
        raise InsufficientMeasurements(f"pencil order {p} < k={k}; need half-width >= k")
    a_tilde, b_tilde = build_pencil(meas, p)
    f_hat = eigenvalues_to_locations(pencil_eigenvalues(a_tilde, b_tilde, k))

    v_hat = build(VandermondeSpec.centered(f_hat, meas.half_width)) if len(set(f_hat.tolist())) == k else None
    if v_hat is None:
        # colliding estimates are kept as-is; amplitudes split by minimum norm
        cols = np.exp(1j * TWO_PI * np.outer(meas.indices, f_hat))
        u_hat = linalg.min_norm_lstsq(cols, meas.values)
        smin, kappa = 0.0, math.inf
    else:
        try:
            u_hat = linalg.lstsq(v_hat, meas.values)
        except RankDeficient:
            u_hat = linalg.min_norm_lstsq(v_hat, meas.values)
        smin, kappa = _vandermonde_stats(f_hat, p)
    diagnostics = {"pencil_order": p, "sigma_min_est": smin, "kappa_est": kappa,
                   "gamma_bound": None, "zeta_bound": None}
    return RecoveryResult(Signal.estimate(u_hat, f_hat), diagnostics)


@dataclass(frozen=True)
class ErrorBounds:
    """Perturbation diagnostics for one measured instance with known truth.

    ``zeta`` instantiates a big-O with constant 1, so it is an
    order-of-magnitude figure rather than a guarantee.
    """

    gamma: float
    zeta: float
    sigma_min: float
    kappa: float
    perturbation: float
    noise_norm: float
    violations: tuple = ()

    @property
    def in_regime(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "zeta": self.zeta, "sigma_min": self.sigma_min,
                "kappa": self.kappa, "perturbation": self.perturbation,
                "noise_norm": self.noise_norm, "violations": list(self.violations)}


def error_bounds(meas: MeasurementSet, config: PencilConfig, ground_truth: Signal, noise_norm: float,
                 strict: bool = True) -> ErrorBounds:
    """Location bound ``gamma`` and amplitude figure ``zeta`` for the pencil estimate.

    ``sigma_min`` and ``kappa`` belong to the ``p x k`` Vandermonde matrix at
    the true nodes, ``p`` being the pencil order, which also plays the role
    of ``m``. The guarantee ``d_w(f_j, f_hat) <= 2 gamma`` needs

    * ``||E||_2 + ||F||_2 < sigma_min^2 u_min`` where ``E``, ``F`` are the
      Toeplitz noise matrices (computed against the noiseless truth),
    * ``gamma < Delta / 4``,
    * ``m > 1 / (Delta - 2 gamma) + 1``.

    With ``strict`` a failed condition raises :class:`RegimeViolation`
    (carrying the computed bounds as ``.bounds``).
    """
    if ground_truth.k != config.k:
        raise PreconditionViolation(f"truth has {ground_truth.k} spikes, config says k={config.k}")
    if noise_norm < 0:
        raise PreconditionViolation("noise norm must be nonnegative")
    p = config.order_for(meas)
    k = config.k
    amps = np.abs(ground_truth.amplitudes)
    u_min, u_max = float(amps.min()), float(amps.max())
    if u_min == 0:
        raise PreconditionViolation("zero amplitude in ground truth")
    delta = min_separation(ground_truth)
    s = linalg.singular_values(build(VandermondeSpec(tuple(ground_truth.locations), p)))
    smin = float(s[-1]) if p >= k else 0.0
    kappa = float(s[0] / smin) if smin > 0 else math.inf
    eta = float(noise_norm)

    if smin == 0:
        gamma = math.inf if eta > 0 else 0.0
    else:
        gamma = (k * eta / (smin**2 * u_min)
                 + 4.0 * kappa**2 * (k * eta / u_min + k**1.5 * eta**2 / u_min**2) * (u_max / u_min))
    denom = p - 1.0 - 1.0 / (delta - 2.0 * gamma) if delta > 2.0 * gamma else -math.inf
    numer = gamma * p**1.5 * k * u_max + eta
    zeta = numer / denom if denom > 0 else math.inf
    if numer == 0:
        zeta = 0.0

    a_tilde, b_tilde = build_pencil(meas, p)
    exact = measure(ground_truth, meas.half_width)
    a_exact, b_exact = build_pencil(exact, p)
    perturbation = linalg.two_norm(a_tilde - a_exact) + linalg.two_norm(b_tilde - b_exact)

    violations = []
    if not perturbation < smin**2 * u_min:
        violations.append("perturbation")
    if not gamma < delta / 4.0:
        violations.append("gamma")
    if not denom > 0:
        violations.append("rows")
    bounds = ErrorBounds(gamma, zeta, smin, kappa, perturbation, eta, tuple(violations))
    if violations and strict:
        err = RegimeViolation(f"outside the guaranteed regime: {', '.join(violations)}")
        err.bounds = bounds
        raise err
    return bounds
