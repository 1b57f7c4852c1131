"""Point-source signals, the circle metric, matching distances and measurements.

A signal is a finite superposition of spikes ``u_j * delta(t - f_j)`` with
locations on the unit circle ``[0, 1)``. Its low-frequency measurements are

    v_l = sum_j u_j exp(i 2 pi f_j l) + eta_l,    l = -n, ..., n.

Noise is drawn from numpy's PCG64 bit generator seeded with the caller's
64-bit seed: first ``2n+1`` standard normals for the real parts, then ``2n+1``
for the imaginary parts, both scaled by ``sigma``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import MismatchedCardinality, PreconditionViolation, SeparationInfeasible

TWO_PI = 2.0 * math.pi

# brute force over permutations up to this many spikes
BRUTE_FORCE_MAX_K = 8
MAX_REJECTION_TRIALS = 10**6


def _wrap01(x: float) -> float:
    y = float(x) % 1.0
    # tiny negative inputs round up to exactly 1.0
    return 0.0 if y >= 1.0 else y


def wrap_distance(a, b):
    """Wrap-around distance ``min(|a-b|, 1-|a-b|)`` on the unit circle.

    Works elementwise on arrays. Inputs are reduced mod 1 first so values
    just outside ``[0, 1)`` behave sensibly.
    """
    d = np.abs(np.mod(a, 1.0) - np.mod(b, 1.0))
    out = np.minimum(d, 1.0 - d)
    if np.ndim(out) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Spike:
    amplitude: complex
    location: float

    def __post_init__(self):
        amp = complex(self.amplitude)
        if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
            raise ValueError(f"spike amplitude must be finite, got {amp!r}")
        loc = float(self.location)
        if not math.isfinite(loc):
            raise ValueError(f"spike location must be finite, got {loc!r}")
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "location", _wrap01(loc))


@dataclass(frozen=True)
class Signal:
    """An ordered collection of ``k >= 1`` spikes at distinct locations."""

    spikes: tuple

    def __post_init__(self):
        spikes = tuple(s if isinstance(s, Spike) else Spike(*s) for s in self.spikes)
        if not spikes:
            raise ValueError("a signal needs at least one spike")
        locs = [s.location for s in spikes]
        if len(set(locs)) != len(locs):
            raise ValueError("spike locations must be distinct")
        object.__setattr__(self, "spikes", spikes)

    @classmethod
    def from_arrays(cls, amplitudes: Iterable[complex], locations: Iterable[float]) -> "Signal":
        amplitudes = list(amplitudes)
        locations = list(locations)
        if len(amplitudes) != len(locations):
            raise ValueError("amplitudes and locations differ in length")
        return cls(tuple(Spike(u, f) for u, f in zip(amplitudes, locations)))

    @classmethod
    def estimate(cls, amplitudes: Iterable[complex], locations: Iterable[float]) -> "Signal":
        """Like :meth:`from_arrays` but tolerates coinciding locations.

        Recovery algorithms may return two estimates at the same point; the
        result is still a valid input to :func:`matching_distance`.
        """
        spikes = tuple(Spike(u, f) for u, f in zip(amplitudes, locations))
        if not spikes:
            raise ValueError("a signal needs at least one spike")
        obj = object.__new__(cls)
        object.__setattr__(obj, "spikes", spikes)
        return obj

    @classmethod
    def unit(cls, locations: Iterable[float]) -> "Signal":
        locations = list(locations)
        return cls.from_arrays([1.0] * len(locations), locations)

    @property
    def k(self) -> int:
        return len(self.spikes)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([s.amplitude for s in self.spikes], dtype=complex)

    @property
    def locations(self) -> np.ndarray:
        return np.array([s.location for s in self.spikes], dtype=float)

    @property
    def separation(self) -> float:
        return min_separation(self)

    def __len__(self):
        return self.k


def min_separation(signal) -> float:
    """Smallest pairwise wrap-around distance; 1/2 for a single spike.

    Accepts a :class:`Signal` or a plain sequence of locations.
    """
    locs = signal.locations if isinstance(signal, Signal) else np.asarray(signal, dtype=float)
    if locs.size < 2:
        return 0.5
    s = np.sort(np.mod(locs, 1.0))
    gaps = np.diff(s)
    wrap_gap = 1.0 - (s[-1] - s[0])
    # adjacent gaps on the sorted circle are the only candidates
    return float(min(gaps.min(), wrap_gap, 0.5))


@dataclass
class MeasurementSet:
    """Values ``v_l`` for ``l = -n..n`` together with how the noise was made."""

    half_width: int
    values: np.ndarray
    noise_sigma: float = 0.0
    rng_seed: Optional[int] = None
    noise_bound: Optional[float] = None

    def __post_init__(self):
        self.half_width = int(self.half_width)
        if self.half_width < 0:
            raise ValueError("half_width must be nonnegative")
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (2 * self.half_width + 1,):
            raise ValueError(
                f"expected {2 * self.half_width + 1} values, got shape {self.values.shape}"
            )

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    def at(self, ell):
        """Value(s) at frequency index ``ell`` (scalar or integer array)."""
        ell = np.asarray(ell)
        if np.any(np.abs(ell) > self.half_width):
            raise IndexError(f"index outside -{self.half_width}..{self.half_width}")
        out = self.values[ell + self.half_width]
        return complex(out) if out.ndim == 0 else out


def exact_moments(signal: Signal, indices) -> np.ndarray:
    indices = np.asarray(indices)
    phases = np.exp(1j * TWO_PI * np.outer(indices, signal.locations))
    return phases @ signal.amplitudes


def measure(signal: Signal, half_width: int, noise_sigma: float = 0.0, seed: Optional[int] = None) -> MeasurementSet:
    if half_width < 0:
        raise PreconditionViolation("half_width must be nonnegative")
    if noise_sigma < 0:
        raise PreconditionViolation("noise_sigma must be nonnegative")
    idx = np.arange(-half_width, half_width + 1)
    values = exact_moments(signal, idx)
    if noise_sigma > 0:
        rng = np.random.Generator(np.random.PCG64(seed))
        re = rng.standard_normal(idx.size)
        im = rng.standard_normal(idx.size)
        values = values + noise_sigma * (re + 1j * im)
    return MeasurementSet(half_width, values, float(noise_sigma), seed)


def add_bounded_noise(meas: MeasurementSet, magnitude: float, seed: Optional[int] = None) -> MeasurementSet:
    """Perturb every value by exactly ``magnitude`` in a uniformly random direction.

    This is the worst-case-style noise model used by the refinement
    guarantee, where each ``|eta_l|`` is bounded rather than Gaussian.
    """
    if magnitude < 0:
        raise PreconditionViolation("magnitude must be nonnegative")
    rng = np.random.Generator(np.random.PCG64(seed))
    theta = rng.uniform(0.0, TWO_PI, size=meas.values.size)
    values = meas.values + magnitude * np.exp(1j * theta)
    return MeasurementSet(meas.half_width, values, meas.noise_sigma, seed, float(magnitude))


@lru_cache(maxsize=None)
def _permutations(k: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(k))), dtype=np.intp)


def _has_perfect_matching(allowed: np.ndarray) -> bool:
    rows, cols = linear_sum_assignment(~allowed)
    return bool(allowed[rows, cols].all())


def bottleneck_matching(cost: np.ndarray) -> float:
    """min over permutations pi of max_j cost[j, pi(j)] for a square cost matrix."""
    cost = np.asarray(cost, dtype=float)
    k = cost.shape[0]
    if cost.shape != (k, k):
        raise MismatchedCardinality(f"cost matrix must be square, got {cost.shape}")
    if k <= BRUTE_FORCE_MAX_K:
        perms = _permutations(k)
        return float(cost[np.arange(k), perms].max(axis=1).min())
    thresholds = np.unique(cost)
    lo, hi = 0, thresholds.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(cost <= thresholds[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(thresholds[lo])


def matching_distance(est: Signal, truth: Signal) -> float:
    if est.k != truth.k:
        raise MismatchedCardinality(f"estimate has {est.k} spikes, truth has {truth.k}")
    amp = np.abs(est.amplitudes[:, None] - truth.amplitudes[None, :])
    loc = wrap_distance(est.locations[:, None], truth.locations[None, :])
    return bottleneck_matching(np.maximum(amp, loc))


def location_matching_distance(est_locations: Sequence[float], truth_locations: Sequence[float]) -> float:
    est = np.atleast_1d(np.asarray(est_locations, dtype=float))
    truth = np.atleast_1d(np.asarray(truth_locations, dtype=float))
    if est.size != truth.size:
        raise MismatchedCardinality(f"{est.size} estimated locations vs {truth.size} true ones")
    return bottleneck_matching(wrap_distance(est[:, None], truth[None, :]))


def random_separated_locations(k: int, delta: float, rng: np.random.Generator,
                               max_trials: int = MAX_REJECTION_TRIALS) -> np.ndarray:
    """Rejection-sample ``k`` uniform points whose minimum separation exceeds ``delta``."""
    if k < 1:
        raise PreconditionViolation("k must be positive")
    if k >= 2 and k * delta >= 1.0:
        raise SeparationInfeasible(f"cannot place {k} points at separation {delta} on the circle")
    for _ in range(max_trials):
        f = rng.random(k)
        if k == 1 or min_separation(f) > delta:
            return f
    raise SeparationInfeasible(f"rejection sampling exceeded {max_trials} trials")


def random_signal(k: int, delta: float, rng: np.random.Generator, unit: bool = False) -> Signal:
    """Random Delta-separated signal; amplitudes are complex normal unless ``unit``."""
    f = random_separated_locations(k, delta, rng)
    if unit:
        return Signal.unit(f)
    u = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / math.sqrt(2.0)
    return Signal.from_arrays(u, f)


# -- JSON wire formats ------------------------------------------------------

def signal_to_dict(signal: Signal) -> dict:
    return {"spikes": [{"re": s.amplitude.real, "im": s.amplitude.imag, "f": s.location}
                       for s in signal.spikes]}


def signal_from_dict(data: dict) -> Signal:
    return Signal(tuple(Spike(complex(d["re"], d.get("im", 0.0)), d["f"]) for d in data["spikes"]))


def measurement_to_dict(meas: MeasurementSet) -> dict:
    out = {
        "n": meas.half_width,
        "sigma": meas.noise_sigma,
        "seed": meas.rng_seed,
        "values": [{"re": float(v.real), "im": float(v.imag)} for v in meas.values],
    }
    if meas.noise_bound is not None:
        out["bound"] = meas.noise_bound
    return out


def measurement_from_dict(data: dict) -> MeasurementSet:
    values = np.array([complex(v["re"], v["im"]) for v in data["values"]])
    return MeasurementSet(int(data["n"]), values, float(data.get("sigma", 0.0)),
                          data.get("seed"), data.get("bound"))
