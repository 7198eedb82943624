import math

import numpy as np
import pytest

from dyadiclab.cesaro import cesaro_number
from dyadiclab.cones import ConeSpec
from dyadiclab.dyadic import GroupPoint, ResolutionError, SampledFunction
from dyadiclab.experiments import (
    CounterexampleSpec,
    build_counterexample,
    counterexample_full,
    counterexample_hardy_reduced,
    counterexample_profile,
    convergence_experiment,
    lower_bound_integrals,
    kernel_contrast_probe,
    kernel_survey_experiment,
    kernel_value,
    make_test_function,
    polynomial_coefficients,
    polynomial_deficiency,
    ratio_experiment,
    exceedance_probe,
    systems_check,
)
from dyadiclab.summation import MeanParams, cesaro_mean
from dyadiclab.systems import KACZMARZ, PALEY, kaczmarz

IDENTITY = ConeSpec.uniform("identity")


def test_systems_check_small():
    recs = {r.experiment: r.value for r in systems_check(6, 10, 20, 1)}
    assert recs["block_equality"] == 1.0
    assert recs["factorization_max_err"] == 0.0
    assert recs["kaczmarz_unit_spectrum_max_err"] == 0.0
    assert recs["roundtrip_max_err"] < 1e-13
    with pytest.raises(ResolutionError):
        systems_check(13, 10, 1)


def test_lower_bound_n1_closed_form():
    # only N = 1: K_1 = 1/A_1, so A_0 K_1 = 1/(1+a) and A_1 K_1 = 1
    for a in (0.3, 0.5, 1.0):
        inner, outer = lower_bound_integrals(1, a)
        assert math.isclose(inner, (1 / (1 + a)) ** (1 / (1 + a)), rel_tol=1e-14)
        assert math.isclose(outer, 1.0, rel_tol=1e-14)


def test_lower_bound_n2_rational_oracle():
    # pointwise maxima on the rank-2 grid, computed with fractions:
    # A_{N-1}|K_N| -> 9/2, 3/2, 3, 2/3 and A_N|K_N| -> 6, 2, 4, 1
    inner, outer = lower_bound_integrals(2, 1.0)
    expected = (math.sqrt(4.5) + math.sqrt(1.5) + math.sqrt(3) + math.sqrt(2 / 3)) / 4
    assert math.isclose(inner, expected, rel_tol=1e-14)
    assert math.isclose(inner, 1.4736531508619586, rel_tol=1e-14)
    assert math.isclose(outer, (13 / 4) ** 2, rel_tol=1e-14)


def test_lower_bound_guard():
    with pytest.raises(ResolutionError):
        lower_bound_integrals(0, 0.5)


def test_contrast_rational_values():
    # K_{2^j}^{1}(e_0): Kaczmarz 2/3, 22/17, 86/33; Paley 2^j / (2 (2^j + 1))
    x = GroupPoint.unit(0, 5)
    assert math.isclose(kernel_value(8, 1.0, KACZMARZ, x), 2 / 3, rel_tol=1e-14)
    assert math.isclose(kernel_value(16, 1.0, KACZMARZ, x), 22 / 17, rel_tol=1e-14)
    assert math.isclose(kernel_value(32, 1.0, KACZMARZ, x), 86 / 33, rel_tol=1e-14)
    for j in (3, 4, 5):
        assert math.isclose(kernel_value(1 << j, 1.0, PALEY, x), 2**j / (2 * (2**j + 1)), rel_tol=1e-14)
    recs = kernel_contrast_probe(x, [3, 4, 5])
    summary = recs[-1]
    assert summary.experiment == "contrast_summary"
    assert summary.derived["kaczmarz_increasing"]
    assert not summary.derived["paley_decreasing"]


def test_exceedance_matches_pointwise_dirichlet():
    n, m = 15, 6
    pts = [GroupPoint(b, m) for b in range(1 << m)]
    d = np.array([sum(kaczmarz(k, x) for k in range(n)) for x in pts], dtype=float)
    for c in (0.1, 0.5):
        rec = exceedance_probe([n], m, [c])[0]
        assert rec.value == np.mean(d / math.log(n) >= c)
    assert rec.derived["at_zero"] == n / math.log(n)


def test_counterexample_function_shape():
    spec = CounterexampleSpec(3, IDENTITY, (0.5, 0.5))
    assert spec.nbar == (3, 3)
    assert math.isclose(spec.p0, 2 / 3)
    f = build_counterexample(spec)
    assert f.ranks == (4, 4)
    # first factor is w_{2^n1} D_{2^n1}: nonzero only on I_n1, magnitude 2^n1
    col = f.values[:, 0]
    assert set(np.abs(col).tolist()) == {0.0, 8.0}
    with pytest.raises(ValueError):
        CounterexampleSpec(3, IDENTITY, (0.6, 0.5))
    with pytest.raises(ValueError):
        CounterexampleSpec(3, IDENTITY, (0.5,))


@pytest.mark.parametrize("cone,alpha", [
    (IDENTITY, (0.5, 0.5)),
    (IDENTITY, (0.3, 0.7)),
    (ConeSpec.uniform("power:2", 2, 2.0), (0.5, 0.5)),
    (ConeSpec.uniform("identity", 3, 1.0), (0.5, 0.5, 0.5)),
])
def test_reduction_matches_full_path(cone, alpha):
    n1 = 3 if cone.d == 3 else 4
    spec = CounterexampleSpec(n1, cone, alpha)
    f, field, h_full = counterexample_full(spec)
    reduced = counterexample_profile(spec, f.ranks[0]).reshape((-1,) + (1,) * (f.dims - 1))
    assert np.max(np.abs(field.values.values - reduced)) <= 1e-12
    assert math.isclose(h_full, counterexample_hardy_reduced(spec), rel_tol=1e-12)


def test_hardy_norm_closed_form():
    for n1 in (2, 5, 9):
        spec = CounterexampleSpec(n1, IDENTITY, (0.5, 0.5))
        assert math.isclose(counterexample_hardy_reduced(spec), 2 ** ((1 - 1 / spec.p0) * n1), rel_tol=1e-12)


def test_ratio_experiment_records():
    recs = ratio_experiment([4, 5], IDENTITY, (0.5, 0.5))
    assert [r.experiment for r in recs] == ["counterexample", "counterexample", "counterexample_fit"]
    assert recs[0].derived["oracle_max_diff"] <= 1e-12
    assert "oracle_max_diff" not in recs[1].derived
    assert recs[1].value > recs[0].value > 1
    with pytest.raises(ResolutionError):
        ratio_experiment([15], IDENTITY, (0.5, 0.5))


def test_survey_records():
    recs = kernel_survey_experiment(KACZMARZ, 1.0, 16)
    norms = [r for r in recs if r.experiment == "kernel_norm"]
    blocks = [r for r in recs if r.experiment == "kernel_block_max"]
    assert len(norms) == 16 and len(blocks) == 5
    # rational oracle: ||K_10|| = 1, block 4 holds only N = 16
    assert math.isclose(norms[9].value, 1.0, rel_tol=1e-14)
    assert math.isclose(blocks[-1].value, 18 / 17, rel_tol=1e-14)


def test_polynomial_deficiency_closed_form():
    ranks = (4, 4)
    f = make_test_function("polynomial", ranks)
    coeffs = polynomial_coefficients(2)
    assert coeffs[(5, 3)] == 0.75 * 0.25
    for n in [(4, 6), (8, 8), (2, 7)]:
        p = MeanParams(n, (1.0, 0.5), KACZMARZ)
        got = cesaro_mean(f, p).values - f.values
        assert np.max(np.abs(got - polynomial_deficiency(coeffs, p, ranks))) <= 1e-13


def test_test_functions():
    ind = make_test_function("indicator", (4, 4))
    assert ind.values.sum() == 16
    assert make_test_function("constant", (1, 2)).values.tolist() == [[1.0] * 4] * 2
    with pytest.raises(ValueError):
        make_test_function("gauss", (2, 2))


def test_convergence_records_and_envelope():
    f = make_test_function("indicator", (6, 6))
    recs = convergence_experiment(f, IDENTITY, (1.0, 1.0), [2, 4, 6], label="indicator")
    errs = [r.value for r in recs]
    assert errs[0] > errs[1] > errs[2]
    for r in recs:
        assert r.derived["sigma_inf"] <= r.derived["envelope"] * (1 + 1e-12)
    # constant input: sigma_n 1 = prod A_{n_i - 1}/A_{n_i}, not renormalized
    c = convergence_experiment(make_test_function("constant", (4, 4)), IDENTITY, (0.5, 0.5), [3])[0]
    k = cesaro_number(7, 0.5) / cesaro_number(8, 0.5)
    assert math.isclose(c.derived["e_inf"], 1 - k * k, rel_tol=1e-12)
    with pytest.raises(ResolutionError):
        convergence_experiment(f, IDENTITY, (1.0, 1.0), [7])
