import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cohpurify.phase_space import (
    NoiseKind, NoiseModel, PreparationSpec, make_stream, noise_mean_photons,
    sample_displacement, sample_displacements,
)

DRAWS = 1_000_000


def test_zero_noise_draws_exact_zero():
    rng = make_stream(1)
    draws = sample_displacements(NoiseModel.isotropic(0.0), rng, 1000)
    assert np.all(draws == 0)
    assert sample_displacement(NoiseModel.isotropic(0.0), rng) == 0j


def test_isotropic_mean_photons():
    draws = sample_displacements(NoiseModel.isotropic(2.0), make_stream(7), DRAWS)
    y = np.abs(draws) ** 2
    se = y.std() / math.sqrt(DRAWS)
    assert abs(y.mean() - 2.0) < 3 * se


def test_phase_noise_has_no_real_part():
    draws = sample_displacements(NoiseModel.phase(1.0), make_stream(3), DRAWS)
    assert np.all(draws.real == 0.0)
    y = draws.imag ** 2
    assert abs(y.mean() - 1.0) < 3 * y.std() / math.sqrt(DRAWS)


@pytest.mark.parametrize("kind", list(NoiseKind))
@pytest.mark.parametrize("n", [0.1, 1.0, 5.0])
def test_moments(kind, n):
    draws = sample_displacements(NoiseModel(kind, n), make_stream(11, 2), DRAWS)
    var_re, var_im = (n / 2, n / 2) if kind is NoiseKind.ISOTROPIC else (0.0, n)
    for sample, expect in ((draws.real, 0.0), (draws.imag, 0.0),
                           (draws.real ** 2, var_re), (draws.imag ** 2, var_im)):
        se = sample.std() / math.sqrt(DRAWS)
        assert abs(sample.mean() - expect) <= 4 * se or (se == 0 and sample.mean() == expect)
    if kind is NoiseKind.ISOTROPIC:
        cross = draws.real * draws.imag
        assert abs(cross.mean()) < 4 * cross.std() / math.sqrt(DRAWS)


def test_accessor():
    assert noise_mean_photons(NoiseModel.isotropic(3)) == 3
    assert noise_mean_photons(NoiseModel.phase(0.5)) == 0.5
    assert noise_mean_photons(NoiseModel.isotropic(0)) == 0


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_negative_or_nonfinite_rejected(bad):
    with pytest.raises(ValueError):
        NoiseModel.isotropic(bad)


def test_mixed_kinds_rejected():
    with pytest.raises(ValueError, match="mixed"):
        PreparationSpec(0j, (NoiseModel.isotropic(1), NoiseModel.phase(1)))
    with pytest.raises(ValueError):
        PreparationSpec(0j, ())


def test_streams_are_reproducible_and_distinct():
    a = sample_displacements(NoiseModel.isotropic(1), make_stream(5, 3), 100)
    b = sample_displacements(NoiseModel.isotropic(1), make_stream(5, 3), 100)
    c = sample_displacements(NoiseModel.isotropic(1), make_stream(5, 4), 100)
    d = sample_displacements(NoiseModel.isotropic(1), make_stream(6, 3), 100)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


@given(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e6),
       st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e6))
def test_amplitude_field_operations_exact(a, b):
    s = a + b
    assert s.real == a.real + b.real and s.imag == a.imag + b.imag
    assert abs(a) ** 2 >= 0
