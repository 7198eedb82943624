import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadiclab.dyadic import GroupPoint, ResolutionError, SampledFunction, integrate
from dyadiclab.systems import (
    KACZMARZ,
    PALEY,
    Spectrum,
    SystemKind,
    evaluate,
    fourier_coeffs,
    fwht,
    ifwht,
    kaczmarz,
    kaczmarz_perm,
    order,
    perm_table,
    rademacher,
    sample,
    sample_kaczmarz_direct,
    sample_kaczmarz_product,
    to_paley,
    walsh_paley,
)


def brute_paley(n, coords):
    # product of Rademacher functions over the binary digits of n
    v = 1
    for k, c in enumerate(coords):
        if (n >> k) & 1 and c:
            v = -v
    return v


def test_order():
    assert [order(n) for n in (1, 2, 3, 4, 7, 8, 1023, 1024)] == [0, 1, 1, 2, 2, 3, 9, 10]
    with pytest.raises(ValueError):
        order(0)


def test_parse_system():
    assert SystemKind.parse("Kaczmarz") is KACZMARZ
    assert SystemKind.parse(PALEY) is PALEY
    with pytest.raises(ValueError):
        SystemKind.parse("haar")


def test_rademacher_is_walsh_power_of_two():
    for bits in range(32):
        x = GroupPoint(bits, 5)
        for k in range(5):
            assert rademacher(k, x) == walsh_paley(1 << k, x) == kaczmarz(1 << k, x)


def test_pointwise_paley_matches_digit_product():
    for n in range(64):
        for bits in range(64):
            x = GroupPoint(bits, 6)
            assert walsh_paley(n, x) == brute_paley(n, x.coords)


def test_kaczmarz_small_table():
    # kappa_6 = r_2 * r_0 (digits of 6 - 4 = 2 reversed in 2 bits -> 1)
    for bits in range(8):
        x = GroupPoint(bits, 3)
        assert kaczmarz(6, x) == rademacher(2, x) * rademacher(0, x)
        assert kaczmarz(5, x) == rademacher(2, x) * rademacher(1, x)


def test_index_out_of_resolution():
    with pytest.raises(ResolutionError):
        walsh_paley(8, GroupPoint(0, 3))
    with pytest.raises(ResolutionError):
        sample(8, 3)
    with pytest.raises(ResolutionError):
        sample_kaczmarz_product(8, 3)


def test_perm_known_values():
    assert [kaczmarz_perm(n) for n in range(8)] == [0, 1, 2, 3, 4, 6, 5, 7]
    assert kaczmarz_perm(0b10011) == 0b11100
    assert perm_table(3).tolist() == [0, 1, 2, 3, 4, 6, 5, 7]
    assert not perm_table(3).flags.writeable


@given(st.integers(0, 1 << 40))
def test_perm_involution_and_block(n):
    p = kaczmarz_perm(n)
    assert kaczmarz_perm(p) == n
    if n:
        assert order(p) == order(n)


@settings(max_examples=25)
@given(st.lists(st.integers(0, (1 << 40) - 1), min_size=1, max_size=20))
def test_perm_array_matches_scalar(ns):
    arr = kaczmarz_perm(np.array(ns))
    assert arr.tolist() == [kaczmarz_perm(n) for n in ns]


def test_sampled_matches_pointwise():
    m = 6
    for n in range(1 << m):
        for system in (PALEY, KACZMARZ):
            row = sample(n, m, system)
            assert row.tolist() == [evaluate(n, GroupPoint(b, m), system) for b in range(1 << m)]


def test_three_kaczmarz_samplers_agree():
    m = 8
    for n in range(1 << m):
        a = sample(n, m, KACZMARZ)
        assert np.array_equal(a, sample_kaczmarz_product(n, m))
        assert np.array_equal(a, sample_kaczmarz_direct(n, m))


@pytest.mark.parametrize("system", [PALEY, KACZMARZ])
def test_orthonormal_small(system):
    m = 7
    mat = np.array([sample(n, m, system) for n in range(1 << m)])
    assert np.array_equal(mat @ mat.T, (1 << m) * np.eye(1 << m))


def test_fwht_known_spectrum(backend):
    # f = 3 w_0 - 2 w_5 + 0.5 w_6 on rank 3
    f = 3 * sample(0, 3) - 2 * sample(5, 3) + 0.5 * sample(6, 3)
    c = fwht(f).coeffs
    expected = np.zeros(8)
    expected[[0, 5, 6]] = [3, -2, 0.5]
    assert np.array_equal(c, expected)
    k = fourier_coeffs(SampledFunction(f), KACZMARZ).coeffs
    # w_5 = kappa_6 and w_6 = kappa_5
    assert k[6] == -2 and k[5] == 0.5


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 12))
def test_parseval_and_roundtrip(seed, m):
    r = np.random.default_rng(seed)
    f = SampledFunction(r.standard_normal(1 << m))
    spec = fwht(f)
    assert math.isclose(np.sum(spec.coeffs**2), integrate(f * f), rel_tol=1e-12)
    assert np.max(np.abs(ifwht(spec).values - f.values)) <= 1e-12 * max(1.0, np.abs(f.values).max())
    k = fourier_coeffs(f, KACZMARZ)
    assert np.array_equal(to_paley(k).coeffs, spec.coeffs)
    assert np.max(np.abs(ifwht(k).values - f.values)) <= 1e-12 * max(1.0, np.abs(f.values).max())


def test_two_dimensional_transform_is_separable(rng):
    v = rng.standard_normal((8, 16))
    c = fwht(SampledFunction(v)).coeffs
    for n1 in (0, 3, 7):
        for n2 in (0, 9, 15):
            basis = np.multiply.outer(sample(n1, 3), sample(n2, 4))
            assert math.isclose(c[n1, n2], (v * basis).mean(), abs_tol=1e-14)


def test_kaczmarz_2d_coefficients(rng):
    v = rng.standard_normal((8, 8))
    c = fourier_coeffs(SampledFunction(v), KACZMARZ).coeffs
    basis = np.multiply.outer(sample(5, 3, KACZMARZ), sample(6, 3, KACZMARZ))
    assert math.isclose(c[5, 6], (v * basis).mean(), abs_tol=1e-14)


def test_spectrum_validation():
    with pytest.raises(ResolutionError):
        Spectrum(PALEY, np.zeros(3))
    s = Spectrum(PALEY, np.zeros(4))
    assert s.ranks == (2,)
    with pytest.raises(ValueError):
        s.coeffs[0] = 1
