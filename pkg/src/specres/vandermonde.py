"""Vandermonde matrices on the unit circle and their conditioning.

Columns are the nodes ``alpha_j = exp(i 2 pi f_j)`` raised to a run of
consecutive integer powers: ``0..m-1`` (``from_zero``) or ``-n..n`` with
``m = 2n+1`` (``centered``). The two differ by a diagonal unitary on the
right, so they share singular values.

Above the threshold ``m > 1/Delta + 1`` every Delta-separated instance obeys
``kappa^2 <= (m + 1/Delta - 1) / (m - 1/Delta - 1)``. Below ``(1 - eps)/Delta``
the Fejer-kernel witness from :func:`adversarial_instance` makes the smallest
singular value exponentially small in ``eps * k``.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath
import numpy as np

from . import linalg
from .errors import InfeasibleParameters, PreconditionViolation, RankDeficientWarning, SeparationInfeasible
from .fejer import fejer_power_coeffs, fejer_power_eval
from .signal import TWO_PI, min_separation, random_separated_locations

FROM_ZERO = "from_zero"
CENTERED = "centered"
RANK_TOL = 1e-14


@dataclass(frozen=True)
class VandermondeSpec:
    locations: tuple
    rows: int
    indexing: str = FROM_ZERO

    def __post_init__(self):
        locs = tuple(float(f) % 1.0 for f in np.atleast_1d(self.locations))
        if not locs:
            raise PreconditionViolation("need at least one node")
        if len(set(locs)) != len(locs):
            raise PreconditionViolation("node locations must be distinct")
        if int(self.rows) != self.rows or self.rows < 1:
            raise PreconditionViolation(f"rows must be a positive integer, got {self.rows}")
        if self.indexing not in (FROM_ZERO, CENTERED):
            raise PreconditionViolation(f"unknown indexing {self.indexing!r}")
        if self.indexing == CENTERED and self.rows % 2 == 0:
            raise PreconditionViolation("centered indexing needs an odd row count 2n+1")
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "rows", int(self.rows))

    @classmethod
    def centered(cls, locations, half_width: int) -> "VandermondeSpec":
        return cls(tuple(np.atleast_1d(locations)), 2 * int(half_width) + 1, CENTERED)

    @property
    def k(self) -> int:
        return len(self.locations)

    @property
    def powers(self) -> np.ndarray:
        if self.indexing == FROM_ZERO:
            return np.arange(self.rows)
        n = (self.rows - 1) // 2
        return np.arange(-n, n + 1)


def build(spec: VandermondeSpec) -> np.ndarray:
    return np.exp(1j * TWO_PI * np.outer(spec.powers, np.array(spec.locations)))


def build_extended(spec: VandermondeSpec):
    """``build(spec)`` as an ``mpmath.matrix`` at the current working precision.

    Locations are read as exact binary fractions, so the result is the
    Vandermonde matrix of the stored nodes without entry rounding.
    """
    out = mpmath.matrix(spec.rows, spec.k)
    for i, p in enumerate(spec.powers.tolist()):
        for j, f in enumerate(spec.locations):
            out[i, j] = mpmath.expjpi(2 * mpmath.mpf(f) * p)
    return out


def selberg_bound(rows: int, delta: float) -> Optional[float]:
    """Upper bound on kappa from the extremal-function argument, or None below threshold."""
    inv = 1.0 / delta
    if not rows > inv + 1.0:
        return None
    return math.sqrt((rows + inv - 1.0) / (rows - inv - 1.0))


def sandwich_bounds(rows: int, delta: float) -> tuple:
    """``(m - 1 - 1/Delta, m - 1 + 1/Delta)``: bracket on ``||V b||^2 / ||b||^2``."""
    return rows - 1.0 - 1.0 / delta, rows - 1.0 + 1.0 / delta


@dataclass(frozen=True)
class VandermondeReport:
    sigma_max: float
    sigma_min: float
    kappa: float
    selberg_bound: Optional[float]
    separation: float
    rows: int
    cols: int
    rank_deficient: bool = False

    @property
    def feasible(self) -> bool:
        return self.selberg_bound is not None

    @property
    def log2_kappa(self) -> float:
        return math.log2(self.kappa) if math.isfinite(self.kappa) else math.inf

    def as_dict(self) -> dict:
        return {
            "sigma_max": self.sigma_max,
            "sigma_min": self.sigma_min,
            "kappa": self.kappa,
            "selberg_bound": self.selberg_bound,
            "feasible": self.feasible,
            "separation": self.separation,
            "rows": self.rows,
            "cols": self.cols,
            "rank_deficient": self.rank_deficient,
        }


def condition_number(spec: VandermondeSpec, precision: str = "double", warn: bool = True) -> VandermondeReport:
    """Singular-value report for the matrix built from ``spec``.

    ``precision="extended"`` resolves condition numbers past ``1e16`` using
    multiprecision arithmetic. With fewer rows than columns the smallest
    singular value is zero and ``kappa`` is infinite.
    """
    delta = min_separation(spec.locations)
    bound = selberg_bound(spec.rows, delta)
    if precision == "extended":
        s = linalg.singular_values_extended(lambda: build_extended(spec))
    elif precision == "double":
        s = linalg.singular_values(build(spec))
    else:
        raise ValueError(f"unknown precision {precision!r}")
    smax = float(s[0])
    smin = float(s[-1]) if spec.rows >= spec.k else 0.0
    kappa = smax / smin if smin > 0 else math.inf
    deficient = smin < RANK_TOL * smax if precision == "double" else smin == 0.0
    if deficient and warn:
        warnings.warn(f"Vandermonde matrix is numerically rank deficient (kappa={kappa:.3g})",
                      RankDeficientWarning, stacklevel=2)
    return VandermondeReport(smax, smin, kappa, bound, delta, spec.rows, spec.k, bool(deficient))


@dataclass(frozen=True)
class AdversarialInstance:
    """Equally spaced nodes plus a unit vector ``u`` with tiny ``||V u||``.

    ``coefficients`` are the raw Fejer-power weights with alternating sign
    (l1 norm exactly 1, zero on padding columns); ``witness`` is that vector
    scaled to unit l2 norm.
    """

    spec: VandermondeSpec
    witness: np.ndarray
    coefficients: np.ndarray
    ell: int
    r: int
    grid: int
    measurements: int
    epsilon: float

    def __iter__(self):
        yield self.spec
        yield self.witness

    @property
    def sup_bound(self) -> float:
        """``max |H(p)|`` over the measured powers, via the kernel closed form."""
        p = self.spec.powers
        return float(np.max(fejer_power_eval(self.ell, self.r, p / self.grid + 0.5)))

    @property
    def decay_ceiling(self) -> float:
        """``4^{-2r}``, the analytic ceiling on ``sup_bound``."""
        return 4.0 ** (-2 * self.r)


def adversarial_instance(k: int, epsilon: float) -> AdversarialInstance:
    """Ill-conditioned instance with ``k`` nodes spaced ``1/m`` apart, ``m = 2k``.

    With ``l = ceil(4/eps)`` and ``r = floor((k-1)/(2l))`` the witness has
    entries ``(-1)^j c_j`` where ``c_j`` are the coefficients of ``K_l^r``, so
    ``(V u)_p = K_l^r(p/m + 1/2)``. The measured powers satisfy
    ``|p| <= (1-eps) m / 2`` which keeps ``p/m + 1/2`` at least ``eps/2`` from
    an integer, where the kernel is below ``4^{-2r}``. Spare columns (when
    ``2 r l + 1 < k``) are filled with neighbouring grid nodes carrying zero
    weight.
    """
    if not 0.0 < epsilon < 1.0:
        raise PreconditionViolation(f"epsilon must lie in (0, 1), got {epsilon}")
    ell = math.ceil(4.0 / epsilon)
    r = (k - 1) // (2 * ell)
    if r < 1:
        raise InfeasibleParameters(f"k={k} too small for epsilon={epsilon}: need k >= {2 * ell + 1}")
    support = r * ell
    m = 2 * k
    pad = k - (2 * support + 1)
    left = pad // 2
    idx = np.arange(-support - left, -support - left + k)
    c = fejer_power_coeffs(ell, r).coeffs
    coeffs = np.zeros(k)
    j = np.arange(-support, support + 1)
    coeffs[left:left + 2 * support + 1] = np.where(j % 2 == 0, 1.0, -1.0) * c
    n_meas = math.floor((1.0 - epsilon) * m)
    half = n_meas // 2
    spec = VandermondeSpec.centered(np.mod(idx / m, 1.0), half)
    witness = coeffs / np.linalg.norm(coeffs)
    return AdversarialInstance(spec, witness, coeffs, ell, r, m, n_meas, float(epsilon))


@dataclass(frozen=True)
class SweepRow:
    delta: float
    m: int
    trial: int
    report: VandermondeReport
    locations: tuple


def _trial_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def default_workers() -> int:
    env = os.environ.get("SPECRES_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def phase_sweep(delta_grid: Sequence[float], m_grid: Sequence[int], k: int, trials: int, seed: int,
                indexing: str = FROM_ZERO, workers: Optional[int] = None) -> list:
    """Condition-number reports for random separated nodes over a (Delta, m) grid.

    Each trial draws its nodes from a stream keyed by ``(seed, delta index,
    m index, trial)``, so results do not depend on scheduling. Rows come back
    sorted by ``(delta index, m index, trial)``.
    """
    if not delta_grid or not m_grid:
        raise PreconditionViolation("sweep grids must be nonempty")
    for d in delta_grid:
        if k >= 2 and k * d >= 1.0:
            raise SeparationInfeasible(f"cannot pack {k} points at separation {d}")

    def run(key):
        di, mi, t = key
        delta, m = float(delta_grid[di]), int(m_grid[mi])
        locs = random_separated_locations(k, delta, _trial_rng(seed, di, mi, t))
        if indexing == CENTERED and m % 2 == 0:
            raise PreconditionViolation("centered sweeps need odd m")
        rep = condition_number(VandermondeSpec(tuple(locs), m, indexing), warn=False)
        return SweepRow(delta, m, t, rep, tuple(float(f) for f in locs))

    keys = [(di, mi, t) for di in range(len(delta_grid)) for mi in range(len(m_grid)) for t in range(trials)]
    workers = default_workers() if workers is None else workers
    if workers <= 1:
        return [run(key) for key in keys]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, keys))
