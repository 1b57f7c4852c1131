"""Fejer kernel ``K_l(x) = (1/l^2) (sin(l pi x) / sin(pi x))^2`` and its powers.

The kernel is normalized so ``K_l(0) = 1`` and has period 1. Its Fourier
coefficients are the triangle ``(l - |j|) / l^2`` for ``|j| <= l``; the
coefficients of ``K_l^r`` are the r-fold self-convolution of that triangle,
supported on ``|j| <= r l``. Because they form a probability distribution they
double as row weights that nearly orthogonalize any well-separated Vandermonde
matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionViolation

# below this |sin(pi x)| the closed form is 0/0-ish; use the Fourier sum
SINGULAR_GUARD = 1e-9
# constants of the local quadratic bracket 1 - C r l^2 x^2 <= K^r <= 1 - c l^2 x^2
LOCAL_C_UPPER = 12.0
LOCAL_C_LOWER = 1.0 / 3.0


@dataclass(frozen=True)
class FejerCoefficients:
    ell: int
    power: int
    coeffs: np.ndarray

    @property
    def support(self) -> int:
        """Largest frequency index ``r * l``."""
        return self.ell * self.power

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.support, self.support + 1)

    def __getitem__(self, j: int) -> float:
        if abs(j) > self.support:
            return 0.0
        return float(self.coeffs[j + self.support])

    def as_dict(self) -> dict:
        return {"ell": self.ell, "power": self.power, "coeffs": self.coeffs.tolist()}


def _check_ell(ell: int) -> None:
    if int(ell) != ell or ell < 1:
        raise PreconditionViolation(f"kernel order must be a positive integer, got {ell}")


def _fourier_sum(ell: int, x: np.ndarray) -> np.ndarray:
    j = np.arange(1, ell)
    weights = (ell - j) / ell**2
    return 1.0 / ell + 2.0 * (np.cos(2.0 * math.pi * np.multiply.outer(x, j)) @ weights)


def fejer_eval(ell: int, x):
    _check_ell(ell)
    x = np.asarray(x, dtype=float)
    # exact reduction to [-1/2, 1/2] keeps sin(pi x) accurate near integers
    x = x - np.round(x)
    den = np.sin(math.pi * x)
    near = np.abs(den) < SINGULAR_GUARD
    safe = np.where(near, 1.0, den)
    out = (np.sin(ell * math.pi * x) / safe) ** 2 / ell**2
    if np.any(near):
        out = np.where(near, _fourier_sum(ell, np.where(near, x, 0.0)), out)
    return float(out) if out.ndim == 0 else out


def fejer_power_eval(ell: int, r: int, x):
    if int(r) != r or r < 1:
        raise PreconditionViolation(f"power must be a positive integer, got {r}")
    return fejer_eval(ell, x) ** r


def fejer_coeffs(ell: int) -> FejerCoefficients:
    _check_ell(ell)
    j = np.arange(-ell, ell + 1)
    return FejerCoefficients(ell, 1, (ell - np.abs(j)) / ell**2)


def fejer_power_coeffs(ell: int, r: int) -> FejerCoefficients:
    """Coefficients of ``K_l^r`` by repeated direct convolution, renormalized to sum 1."""
    if int(r) != r or r < 1:
        raise PreconditionViolation(f"power must be a positive integer, got {r}")
    base = fejer_coeffs(ell).coeffs
    c = base
    for _ in range(r - 1):
        c = np.convolve(c, base)
    c = c / c.sum()
    # exact symmetry; convolution rounding can break it in the last bit
    c = 0.5 * (c + c[::-1])
    return FejerCoefficients(int(ell), int(r), c)


def decay_bound(ell: int, r: int, x):
    """``1 / (4^r l^{2r} x^{2r})``, the tail bound for ``K_l^r`` on ``[-1/2, 1/2]``."""
    return 1.0 / (4.0 * ell**2 * np.asarray(x, dtype=float) ** 2) ** r


def check_decay_bound(ell: int, r: int, x, rtol: float = 1e-12):
    """Whether ``K_l^r(x)`` sits below the decay bound at ``0 < |x| <= 1/2``.

    ``rtol`` absorbs rounding at points where the bound is attained with
    equality (``x = 1/2`` and odd ``l``).
    """
    x = np.asarray(x, dtype=float)
    if np.any((np.abs(x) <= 0) | (np.abs(x) > 0.5)):
        raise PreconditionViolation("decay bound requires 0 < |x| <= 1/2")
    ok = fejer_power_eval(ell, r, x) <= decay_bound(ell, r, x) * (1.0 + rtol)
    return bool(ok) if ok.ndim == 0 else ok


def local_bounds(ell: int, r: int, x):
    """Lower and upper quadratic brackets ``1 - 12 r l^2 x^2`` and ``1 - l^2 x^2 / 3``."""
    x2 = ell**2 * np.asarray(x, dtype=float) ** 2
    return 1.0 - LOCAL_C_UPPER * r * x2, 1.0 - LOCAL_C_LOWER * x2


def check_local_bounds(ell: int, r: int, x, atol: float = 1e-12):
    x = np.asarray(x, dtype=float)
    if ell < 4:
        raise PreconditionViolation(f"local bounds need ell >= 4, got {ell}")
    if np.any(np.abs(x) > 1.0 / ell + 1e-15):
        raise PreconditionViolation("local bounds need |x| <= 1/ell")
    lo, hi = local_bounds(ell, r, x)
    val = fejer_power_eval(ell, r, x)
    ok = (lo <= val + atol) & (val <= hi + atol)
    return bool(ok) if ok.ndim == 0 else ok


def trig_eval(coeffs: FejerCoefficients, x):
    """Evaluate ``sum_j c_j cos(2 pi j x)`` from the coefficient table."""
    x = np.asarray(x, dtype=float)
    out = np.cos(2.0 * math.pi * np.multiply.outer(x, coeffs.frequencies)) @ coeffs.coeffs
    return float(out) if out.ndim == 0 else out
