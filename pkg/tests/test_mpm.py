import math

import numpy as np
import pytest

from specres.errors import InsufficientMeasurements, PencilSingular, PreconditionViolation, RegimeViolation
from specres.mpm import (PencilConfig, build_pencil, eigenvalues_to_locations, error_bounds, pencil_eigenvalues,
                         recover)
from specres.signal import MeasurementSet, Signal, matching_distance, measure, random_signal
from specres.vandermonde import VandermondeSpec, build


def test_build_pencil_constant():
    a, b = build_pencil(measure(Signal.unit([0.0]), 2), 2)
    np.testing.assert_allclose(a, np.ones((2, 2)))
    np.testing.assert_allclose(b, np.ones((2, 2)))


def test_build_pencil_alternating():
    a, b = build_pencil(measure(Signal.unit([0.5]), 2), 2)
    np.testing.assert_allclose(a, [[1, -1], [-1, 1]], atol=1e-15)
    np.testing.assert_allclose(b, [[-1, 1], [1, -1]], atol=1e-15)


def test_build_pencil_factorization(rng):
    sig = random_signal(2, 0.1, rng)
    p = 6
    a, b = build_pencil(measure(sig, p), p)
    v = build(VandermondeSpec(tuple(sig.locations), p))
    du = np.diag(sig.amplitudes)
    da = np.diag(np.exp(2j * np.pi * sig.locations))
    np.testing.assert_allclose(a, v @ du @ v.conj().T, atol=1e-12)
    np.testing.assert_allclose(b, v @ du @ da @ v.conj().T, atol=1e-12)


def test_build_pencil_needs_measurements():
    with pytest.raises(InsufficientMeasurements):
        build_pencil(measure(Signal.unit([0.1]), 3), 4)


def test_exact_pencil_eigenvalues_are_nodes(rng):
    for _ in range(20):
        sig = random_signal(4, 0.05, rng)
        a, b = build_pencil(measure(sig, 10), 10)
        lam = pencil_eigenvalues(a, b, 4)
        nodes = np.exp(2j * np.pi * sig.locations)
        for x in nodes:
            assert np.min(np.abs(lam - x)) <= 1e-8


def test_recover_single_spike():
    res = recover(measure(Signal.from_arrays([2.0], [0.3]), 4), PencilConfig(1))
    (s,) = res.spikes.spikes
    assert abs(s.amplitude - 2.0) <= 1e-9 and abs(s.location - 0.3) <= 1e-9


def test_recover_two_spikes():
    truth = Signal.unit([0.1, 0.6])
    res = recover(measure(truth, 8), PencilConfig(2))
    assert matching_distance(res.spikes, truth) <= 1e-8
    assert res.diagnostics["pencil_order"] == 8


def test_recover_noisy_decreases_with_sigma():
    truth = Signal.unit([0.1, 0.6])
    errs = []
    for sigma in (1e-4, 1e-6):
        d = [matching_distance(recover(measure(truth, 32, sigma, seed=s), PencilConfig(2)).spikes, truth)
             for s in range(5)]
        errs.append(np.median(d))
    assert errs[1] < 1e-3 and errs[1] < errs[0]


def test_recover_minimal_order_is_exact(rng):
    for _ in range(30):
        k = int(rng.integers(1, 7))
        truth = random_signal(k, 0.05, rng)
        res = recover(measure(truth, k), PencilConfig(k, pencil_order=k))
        assert matching_distance(res.spikes, truth) <= 1e-7


def test_recover_phase_invariance(rng):
    truth = random_signal(3, 0.1, rng)
    meas = measure(truth, 12, 1e-5, seed=2)
    c = np.exp(0.7j)
    a = recover(meas, PencilConfig(3)).spikes
    b = recover(MeasurementSet(12, c * meas.values), PencilConfig(3)).spikes
    order_a, order_b = np.argsort(a.locations), np.argsort(b.locations)
    np.testing.assert_allclose(a.locations[order_a], b.locations[order_b], atol=1e-9)
    np.testing.assert_allclose(c * a.amplitudes[order_a], b.amplitudes[order_b], atol=1e-9)


def test_recover_errors():
    with pytest.raises(PreconditionViolation):
        PencilConfig(3, pencil_order=2)
    with pytest.raises(InsufficientMeasurements):
        recover(measure(Signal.unit([0.1, 0.5]), 1), PencilConfig(2))
    with pytest.raises(PencilSingular):
        recover(measure(Signal.unit([0.1]), 4), PencilConfig(2))


def test_zero_eigenvalue_maps_to_zero():
    with pytest.warns(RuntimeWarning):
        f = eigenvalues_to_locations([0.0, 1j])
    np.testing.assert_allclose(f, [0.0, 0.25])


def test_error_bounds_zero_noise():
    truth = Signal.unit([0.0, 0.5])
    b = error_bounds(measure(truth, 11), PencilConfig(2, 11), truth, 0.0)
    assert b.gamma == 0.0 and b.zeta == 0.0 and b.in_regime


def test_error_bounds_closed_form_instance():
    # Gram matrix [[11, 1], [1, 11]]: sigma_min^2 = 10, kappa^2 = 1.2
    truth = Signal.unit([0.0, 0.5])
    b = error_bounds(measure(truth, 11), PencilConfig(2, 11), truth, 1e-8, strict=False)
    assert b.sigma_min ** 2 == pytest.approx(10.0, rel=1e-12)
    assert b.gamma == pytest.approx(9.800000135764502e-08, rel=1e-10)


def test_error_bounds_monotone_in_noise():
    truth = Signal.unit([0.0, 0.5])
    meas = measure(truth, 11)
    g = [error_bounds(meas, PencilConfig(2, 11), truth, eta, strict=False).gamma for eta in (1e-6, 2e-6)]
    assert g[1] > g[0]


def test_error_bounds_regime_violation():
    truth = Signal.unit([0.0, 0.5])
    meas = measure(truth, 11, 0.5, seed=1)
    eta = float(np.linalg.norm(meas.values - measure(truth, 11).values))
    with pytest.raises(RegimeViolation) as info:
        error_bounds(meas, PencilConfig(2, 11), truth, eta)
    assert info.value.bounds.violations


def test_error_bound_holds_in_regime():
    truth = Signal.from_arrays([1.0, 1.5j], [0.1, 0.6])
    cfg = PencilConfig(2)
    for seed in range(10):
        meas = measure(truth, 32, 1e-6, seed=seed)
        eta = float(np.linalg.norm(meas.values - measure(truth, 32).values))
        b = error_bounds(meas, cfg, truth, eta)
        est = recover(meas, cfg).spikes
        loc_err = max(min(abs(((f - g) + 0.5) % 1 - 0.5) for g in est.locations) for f in truth.locations)
        assert loc_err <= 2 * b.gamma
        assert math.isfinite(b.zeta)
