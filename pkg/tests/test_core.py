"""Shared primitives: truncation, dither draws, and the RNG stream contract."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bitmean.core import (
    Interval,
    SeededRng,
    expected_dither_output,
    make_rng,
    truncate,
    uniform_dither,
    validate_bits,
    validate_samples,
)

FINITE = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


# --- RNG streams ------------------------------------------------------------


def test_make_rng_is_reproducible():
    a = make_rng(7, 1, 2).integers(0, 2**31, size=8)
    b = make_rng(7, 1, 2).integers(0, 2**31, size=8)
    np.testing.assert_array_equal(a, b)


def test_make_rng_distinct_paths_differ():
    a = make_rng(7, 1, 2).integers(0, 2**31, size=8)
    b = make_rng(7, 1, 3).integers(0, 2**31, size=8)
    c = make_rng(8, 1, 2).integers(0, 2**31, size=8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_make_rng_path_is_not_flattened_into_seed():
    # (seed, path) must not collide with a different split of the same ints
    a = make_rng(1, 2).standard_normal(4)
    b = make_rng(2, 1).standard_normal(4)
    assert not np.array_equal(a, b)


def test_seeded_rng_generator_reproducible():
    r = SeededRng(seed=5, stream=2)
    np.testing.assert_array_equal(r.generator().uniform(size=5), r.generator().uniform(size=5))


def test_seeded_rng_derive_children_differ():
    r = SeededRng(seed=5)
    c1, c2 = r.derive(0), r.derive(1)
    assert c1.seed == c2.seed == 5
    assert c1.stream != c2.stream
    assert c1 == r.derive(0)  # derivation is a pure function of the path


# --- truncate / Interval ----------------------------------------------------


def test_interval_rejects_inverted_and_nonfinite():
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)
    with pytest.raises(ValueError):
        Interval(float("nan"), 1.0)
    with pytest.raises(ValueError):
        Interval(0.0, float("inf"))


@pytest.mark.parametrize(
    "x,lo,hi,expected",
    [(2.0, -1.0, 1.0, 1.0), (0.5, -1.0, 1.0, 0.5), (-2.0, 0.0, 3.0, 0.0)],
)
def test_truncate_clamps(x, lo, hi, expected):
    assert truncate(x, Interval(lo, hi)) == expected


def test_truncate_scalar_in_scalar_out():
    out = truncate(0.25, Interval(0.0, 1.0))
    assert isinstance(out, float)


def test_truncate_rejects_nan():
    with pytest.raises(ValueError):
        truncate(float("nan"), Interval(0.0, 1.0))
    with pytest.raises(ValueError):
        truncate(np.array([0.0, float("nan")]), Interval(0.0, 1.0))


@given(x=FINITE, y=FINITE, lo=FINITE, hi=FINITE)
@settings(max_examples=200)
def test_truncate_monotone_and_lipschitz(x, y, lo, hi):
    if lo > hi:
        lo, hi = hi, lo
    iv = Interval(lo, hi)
    tx, ty = truncate(x, iv), truncate(y, iv)
    if x <= y:
        assert tx <= ty
    assert abs(tx - ty) <= abs(x - y) + 1e-12


@given(x=FINITE, lo=FINITE, hi=FINITE)
@settings(max_examples=100)
def test_truncate_idempotent_and_in_range(x, lo, hi):
    if lo > hi:
        lo, hi = hi, lo
    iv = Interval(lo, hi)
    t = truncate(x, iv)
    assert lo <= t <= hi
    assert truncate(t, iv) == t


# --- expected_dither_output -------------------------------------------------


@pytest.mark.parametrize("x,lam,expected", [(0.5, 1.0, 0.5), (5.0, 1.0, 1.0), (-5.0, 2.0, -2.0)])
def test_expected_dither_output_values(x, lam, expected):
    assert expected_dither_output(x, lam) == expected


def test_expected_dither_output_rejects_nonpositive_level():
    with pytest.raises(ValueError):
        expected_dither_output(0.5, 0.0)
    with pytest.raises(ValueError):
        expected_dither_output(0.5, -1.0)


@given(x=FINITE, lam=st.floats(min_value=1e-6, max_value=1e6))
@settings(max_examples=200)
def test_expected_dither_output_is_clamp(x, lam):
    out = expected_dither_output(x, lam)
    assert abs(out) <= lam
    if abs(x) <= lam:
        assert out == x


# --- uniform dither ---------------------------------------------------------


def test_uniform_dither_range_and_shape():
    draws = uniform_dither(make_rng(0), size=10_000)
    assert draws.shape == (10_000,)
    assert np.all(np.abs(draws) <= 1.0)


def test_uniform_dither_moments():
    # CLT bounds: 3 sigma/sqrt(N) on the mean with sigma = 1/sqrt(3)
    draws = uniform_dither(make_rng(42), size=1_000_000)
    assert abs(draws.mean()) <= 0.004
    assert abs(draws.var() - 1.0 / 3.0) <= 0.01


# --- validators -------------------------------------------------------------


def test_validate_samples_promotes_vectors():
    out = validate_samples([1.0, 2.0, 3.0])
    assert out.shape == (3, 1)
    assert out.dtype == np.float64


def test_validate_samples_rejects_bad_shapes_and_values():
    with pytest.raises(ValueError):
        validate_samples(np.empty((0, 2)))
    with pytest.raises(ValueError):
        validate_samples(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        validate_samples([1.0, float("inf")])


def test_validate_bits_requires_exact_units():
    out = validate_bits([[1.0, -1.0], [-1.0, 1.0]])
    assert out.shape == (2, 2)
    with pytest.raises(ValueError):
        validate_bits([[0.5, 1.0]])
    with pytest.raises(ValueError):
        validate_bits([[0.0, 1.0]])


# --- the dithering identity, Monte Carlo ------------------------------------


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_dither_identity_monte_carlo(lam):
    # mean of lam*sign(x + lam*tau) over N dithers vs the clamped closed form
    n = 200_000
    tol = 4.0 * lam / np.sqrt(n)
    rng = make_rng(123, int(lam * 2))
    for x in (-3.0 * lam, -lam / 2.0, 0.0, lam / 2.0, 3.0 * lam):
        tau = uniform_dither(rng, size=n)
        bits = np.where(x + lam * tau >= 0.0, 1.0, -1.0)
        assert abs(lam * bits.mean() - expected_dither_output(x, lam)) <= tol
