import math

import numpy as np
import pytest

from specres.errors import PreconditionViolation
from specres.fejer import (check_decay_bound, check_local_bounds, decay_bound, fejer_coeffs, fejer_eval,
                           fejer_power_coeffs, fejer_power_eval, local_bounds, trig_eval)


@pytest.mark.parametrize("ell", [1, 2, 5, 17])
def test_kernel_is_one_at_integers(ell):
    assert fejer_eval(ell, 0.0) == 1.0
    assert fejer_eval(ell, 3.0) == pytest.approx(1.0, abs=1e-12)


def test_kernel_closed_form_values():
    assert fejer_eval(2, 0.25) == pytest.approx(0.5, abs=1e-15)
    assert fejer_eval(2, 0.5) == pytest.approx(0.0, abs=1e-15)


def test_kernel_near_singular_points_is_continuous():
    for ell in (3, 8):
        assert fejer_eval(ell, 1e-11) == pytest.approx(1.0, abs=1e-12)
        assert fejer_eval(ell, 1.0 - 1e-11) == pytest.approx(1.0, abs=1e-12)


def test_kernel_periodic_and_bounded(rng):
    x = rng.uniform(-2, 2, 500)
    for ell in (1, 4, 9):
        k = fejer_eval(ell, x)
        np.testing.assert_allclose(k, fejer_eval(ell, x + 1), atol=1e-12)
        assert np.all(k >= 0) and np.all(k <= 1 + 1e-15)


def test_power_eval_examples():
    assert fejer_power_eval(2, 3, 0.0) == 1.0
    assert fejer_power_eval(2, 2, 0.25) == pytest.approx(0.25, abs=1e-15)
    # value from a 50-digit evaluation
    assert fejer_power_eval(4, 2, 0.4) == pytest.approx(0.0039062499999999982, rel=1e-12)
    assert fejer_power_eval(4, 2, 0.4) <= 1 / (4**2 * 4**4 * 0.4**4)


def test_coeffs_examples():
    c = fejer_coeffs(2)
    assert c.support == 2
    assert [c[j] for j in range(-2, 3)] == [0.0, 0.25, 0.5, 0.25, 0.0]
    c1 = fejer_coeffs(1)
    assert c1[0] == 1.0 and c1[1] == 0.0


@pytest.mark.parametrize("ell", range(1, 30))
def test_coeffs_sum_to_one(ell):
    assert fejer_coeffs(ell).coeffs.sum() == pytest.approx(1.0, abs=1e-14)


def test_power_coeffs_examples():
    np.testing.assert_array_equal(fejer_power_coeffs(2, 1).coeffs, fejer_coeffs(2).coeffs)
    c = fejer_power_coeffs(2, 2)
    assert c.support == 4
    np.testing.assert_allclose([c[j] for j in range(-4, 5)],
                               [0, 0, 0.0625, 0.25, 0.375, 0.25, 0.0625, 0, 0], atol=1e-16)


def test_power_coeffs_peak_at_zero():
    for ell in range(1, 8):
        for r in range(1, 6):
            c = fejer_power_coeffs(ell, r)
            assert c[0] == c.coeffs.max()


def test_power_coeffs_distribution_invariants():
    for ell in (1, 2, 3, 7, 16, 33, 64):
        for r in (1, 2, 5, 9, 16):
            c = fejer_power_coeffs(ell, r).coeffs
            assert c.size == 2 * r * ell + 1
            assert np.all(c >= 0)
            assert abs(c.sum() - 1.0) <= 1e-12
            np.testing.assert_array_equal(c, c[::-1])


def test_power_coeffs_match_kernel_values(rng):
    x = rng.random(200)
    for ell, r in [(1, 1), (2, 3), (4, 2), (5, 4), (8, 3)]:
        np.testing.assert_allclose(trig_eval(fejer_power_coeffs(ell, r), x), fejer_power_eval(ell, r, x),
                                   atol=1e-10)


def test_decay_bound_examples():
    assert check_decay_bound(4, 1, 0.5)
    assert check_decay_bound(8, 2, 0.3)
    # both sides from a 50-digit evaluation
    assert fejer_power_eval(8, 2, 0.3) == pytest.approx(4.662671035767884e-04, rel=1e-10)
    assert decay_bound(8, 2, 0.3) == pytest.approx(1.8838011188271605e-03, rel=1e-12)
    assert decay_bound(4, 1, 0.01) > 1 and check_decay_bound(4, 1, 0.01)


def test_decay_bound_requires_valid_x():
    with pytest.raises(PreconditionViolation):
        check_decay_bound(4, 1, 0.0)
    with pytest.raises(PreconditionViolation):
        check_decay_bound(4, 1, 0.6)


def test_decay_bound_dense_grid():
    x = np.arange(1, 501) / 1000.0
    for ell in (1, 2, 3, 4, 7, 8, 16):
        for r in (1, 2, 3, 5):
            assert np.all(check_decay_bound(ell, r, x))
            assert np.all(check_decay_bound(ell, r, -x))


def test_local_bounds_examples():
    assert check_local_bounds(4, 1, 0.0)
    assert local_bounds(4, 1, 0.0) == (1.0, 1.0)
    assert check_local_bounds(8, 3, 0.05)
    assert fejer_power_eval(8, 3, 0.05) == pytest.approx(0.19262088911334175, rel=1e-12)
    assert check_local_bounds(16, 1, 1 / 16)


def test_local_bounds_preconditions():
    with pytest.raises(PreconditionViolation):
        check_local_bounds(3, 1, 0.1)
    with pytest.raises(PreconditionViolation):
        check_local_bounds(8, 1, 0.2)


def test_local_bounds_dense_grid():
    for ell in (4, 8, 16, 32):
        x = np.linspace(-1 / ell, 1 / ell, 801)
        for r in range(1, 9):
            assert np.all(check_local_bounds(ell, r, x))


def test_power_rejects_nonpositive():
    with pytest.raises(PreconditionViolation):
        fejer_power_eval(4, 0, 0.1)
    with pytest.raises(PreconditionViolation):
        fejer_coeffs(0)
    assert math.isclose(sum(fejer_coeffs(5).as_dict()["coeffs"]), 1.0)


def test_kernel_accurate_just_off_large_integers():
    x = 2.0000000596046448
    assert fejer_eval(3, x) == pytest.approx(trig_eval(fejer_coeffs(3), x), abs=1e-14)
    assert fejer_eval(3, x) == pytest.approx(fejer_eval(3, x - 2), abs=1e-15)
