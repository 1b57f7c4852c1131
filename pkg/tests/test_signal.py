import itertools
import json
import math

import numpy as np
import pytest

from specres.errors import MismatchedCardinality, PreconditionViolation, SeparationInfeasible
from specres.signal import (MeasurementSet, Signal, Spike, add_bounded_noise, bottleneck_matching,
                            location_matching_distance, matching_distance, measure, measurement_from_dict,
                            measurement_to_dict, min_separation, random_separated_locations, random_signal,
                            signal_from_dict, signal_to_dict, wrap_distance)


@pytest.mark.parametrize("a,b,expected", [(0.9, 0.1, 0.2), (0.25, 0.75, 0.5), (0.3, 0.3, 0.0)])
def test_wrap_distance_examples(a, b, expected):
    assert wrap_distance(a, b) == pytest.approx(expected, abs=1e-15)


def test_wrap_distance_is_a_metric(rng):
    x, y, z = rng.random((3, 2000))
    dxy, dyz, dxz = wrap_distance(x, y), wrap_distance(y, z), wrap_distance(x, z)
    assert np.all(dxy >= 0) and np.all(dxy <= 0.5)
    np.testing.assert_array_equal(dxy, wrap_distance(y, x))
    assert np.all(dxz <= dxy + dyz + 1e-15)


@pytest.mark.parametrize("locs,expected", [([0.1, 0.3, 0.8], 0.2), ([0.0, 0.5], 0.5), ([0.95, 0.05], 0.1)])
def test_min_separation_examples(locs, expected):
    assert min_separation(Signal.unit(locs)) == pytest.approx(expected, abs=1e-15)


def test_min_separation_single_spike_is_half():
    assert min_separation(Signal.unit([0.3])) == 0.5


def test_min_separation_matches_pairwise_brute_force(rng):
    for _ in range(50):
        f = rng.random(7)
        brute = min(wrap_distance(a, b) for a, b in itertools.combinations(f, 2))
        assert min_separation(f) == pytest.approx(brute, abs=1e-15)


def test_spike_location_normalized():
    assert Spike(1, 1.25).location == pytest.approx(0.25)
    assert Spike(1, -0.25).location == pytest.approx(0.75)
    assert Spike(1, -1e-18).location == 0.0


def test_spike_rejects_nonfinite():
    with pytest.raises(ValueError):
        Spike(complex(math.nan, 0), 0.1)
    with pytest.raises(ValueError):
        Spike(1, math.inf)


def test_signal_rejects_duplicate_locations():
    with pytest.raises(ValueError):
        Signal.unit([0.25, 1.25])


def test_measure_single_spike_at_zero():
    m = measure(Signal.unit([0.0]), 3)
    assert m.values.shape == (7,)
    np.testing.assert_array_equal(m.values, np.ones(7))


def test_measure_antipodal_pair():
    m = measure(Signal.unit([0.0, 0.5]), 5)
    expected = 1 + (-1.0) ** m.indices
    np.testing.assert_allclose(m.values, expected, atol=1e-14)


def test_measure_direct_substitution():
    m = measure(Signal.from_arrays([2j], [0.25]), 1)
    assert m.at(1) == pytest.approx(-2.0, abs=1e-15)


def test_measure_matches_direct_summation(rng):
    sig = random_signal(5, 0.05, rng)
    m = measure(sig, 20)
    for ell in range(-20, 21):
        direct = sum(s.amplitude * complex(math.cos(2 * math.pi * s.location * ell),
                                           math.sin(2 * math.pi * s.location * ell)) for s in sig.spikes)
        assert abs(m.at(ell) - direct) <= 1e-12 * max(1.0, abs(direct))


def test_measure_is_deterministic_and_seed_sensitive():
    sig = Signal.unit([0.1, 0.4])
    a = measure(sig, 8, 1e-3, seed=5)
    b = measure(sig, 8, 1e-3, seed=5)
    c = measure(sig, 8, 1e-3, seed=6)
    assert a.values.tobytes() == b.values.tobytes()
    assert not np.array_equal(a.values, c.values)


def test_measure_noise_layout():
    # real parts come from the first 2n+1 normals, imaginary parts from the next 2n+1
    sig = Signal.unit([0.0])
    m = measure(sig, 2, 0.5, seed=11)
    z = np.random.Generator(np.random.PCG64(11)).standard_normal(10)
    np.testing.assert_allclose(m.values - 1.0, 0.5 * (z[:5] + 1j * z[5:]), atol=1e-15)


def test_measure_rejects_negative_inputs():
    with pytest.raises(PreconditionViolation):
        measure(Signal.unit([0.1]), -1)
    with pytest.raises(PreconditionViolation):
        measure(Signal.unit([0.1]), 2, -1.0)


def test_bounded_noise_has_exact_modulus():
    base = measure(Signal.unit([0.1, 0.6]), 6)
    noisy = add_bounded_noise(base, 1e-4, seed=3)
    np.testing.assert_allclose(np.abs(noisy.values - base.values), 1e-4, rtol=1e-9)
    assert noisy.noise_bound == 1e-4


def test_measurement_set_validates_length():
    with pytest.raises(ValueError):
        MeasurementSet(2, np.zeros(4))
    with pytest.raises(IndexError):
        MeasurementSet(1, np.zeros(3)).at(2)


def test_matching_distance_examples(rng):
    sig = random_signal(4, 0.1, rng)
    assert matching_distance(sig, sig) == 0.0
    rev = Signal(tuple(reversed(sig.spikes)))
    assert matching_distance(rev, sig) == 0.0
    assert matching_distance(Signal.unit([0.9]), Signal.unit([0.1])) == pytest.approx(0.2)


def test_matching_distance_uses_amplitude_error():
    a = Signal.from_arrays([1.0, 2.0], [0.1, 0.5])
    b = Signal.from_arrays([1.0, 2.0 + 0.3j], [0.1, 0.5])
    assert matching_distance(a, b) == pytest.approx(0.3)


def test_matching_distance_symmetric_and_cardinality(rng):
    a, b = random_signal(5, 0.05, rng), random_signal(5, 0.05, rng)
    assert matching_distance(a, b) == pytest.approx(matching_distance(b, a), abs=0)
    with pytest.raises(MismatchedCardinality):
        matching_distance(a, Signal.unit([0.1]))


@pytest.mark.parametrize("est,truth,expected", [
    ([0.2], [0.2], 0.0), ([0.1, 0.6], [0.6, 0.1], 0.0), ([0.0, 0.5], [0.05, 0.55], 0.05)])
def test_location_matching_examples(est, truth, expected):
    assert location_matching_distance(est, truth) == pytest.approx(expected, abs=1e-15)


def test_location_matching_cardinality():
    with pytest.raises(MismatchedCardinality):
        location_matching_distance([0.1], [0.1, 0.2])


def test_bottleneck_large_k_agrees_with_brute_force(rng):
    # the threshold search path (k > 8) on matrices small enough to brute-force by hand
    for _ in range(5):
        cost = rng.random((9, 9))
        brute = min(max(cost[i, p[i]] for i in range(9)) for p in itertools.permutations(range(9)))
        assert bottleneck_matching(cost) == brute


def test_bottleneck_large_signal_shift():
    truth = np.arange(20) / 20
    est = np.mod(truth[::-1] + 0.01, 1.0)
    assert location_matching_distance(est, truth) == pytest.approx(0.01)


def test_random_separated_locations(rng):
    f = random_separated_locations(3, 0.1, rng)
    assert f.shape == (3,) and min_separation(f) > 0.1
    with pytest.raises(SeparationInfeasible):
        random_separated_locations(10, 0.1, rng)


def test_signal_json_round_trip(rng):
    sig = random_signal(3, 0.1, rng)
    back = signal_from_dict(json.loads(json.dumps(signal_to_dict(sig))))
    assert back == sig


def test_measurement_json_round_trip():
    m = measure(Signal.unit([0.3, 0.7]), 4, 1e-3, seed=9)
    back = measurement_from_dict(json.loads(json.dumps(measurement_to_dict(m))))
    assert back.half_width == 4 and back.rng_seed == 9 and back.noise_sigma == 1e-3
    np.testing.assert_array_equal(back.values, m.values)
