import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyadiclab.cones import (
    ConeError,
    ConeSpec,
    CRFSpec,
    catalog,
    cone_contains,
    cone_from_config,
    crf_validate,
    ln_index,
    nbar_of,
    nbar_sequence,
    resolve_cone,
    table,
)


@pytest.mark.parametrize("name", ["identity", "power:2", "power:1.5", "xlog"])
def test_catalog_entries_validate(name):
    c = catalog(name)
    assert c(1.0) == 1.0
    assert crf_validate(c, 1e6, 400)


def test_catalog_errors():
    with pytest.raises(ConeError):
        catalog("sqrt")
    with pytest.raises(ConeError):
        catalog("power:0.5")


def test_validate_rejects_bad_constants():
    c = catalog("power:2")
    check = crf_validate(CRFSpec(c.gamma, 2.0, 4.0, 3.9), 100.0, 50)
    assert not check and "c_hi" in check.reason
    check = crf_validate(CRFSpec(c.gamma, 2.0, 4.1, 5.0), 100.0, 50)
    assert not check and "c_lo" in check.reason
    assert not crf_validate(CRFSpec(lambda x: 2 * x, 2.0, 2.0, 2.0), 10.0, 10)
    assert not crf_validate(CRFSpec(lambda x: 1.0, 2.0, 2.0, 2.0), 10.0, 10)
    assert not crf_validate(CRFSpec(c.gamma, 1.0, 4.0, 4.0), 10.0, 10)


def test_xlog_constants_are_tight():
    c = catalog("xlog")
    # gamma(2x)/gamma(x) = 2 (1 + log 2 + log x)/(1 + log x): 2(1+log 2) at x = 1
    assert math.isclose(c(2.0) / c(1.0), c.c_hi)
    assert crf_validate(c, 1e9, 1000)


def test_table_crf():
    g = table([1, 10, 100], [1, 100, 1000])
    assert math.isclose(g(10.0), 100.0)
    assert math.isclose(g(1000.0), 10000.0)
    assert math.isclose(g(math.sqrt(10)), 10.0)
    with pytest.raises(ConeError):
        table([2, 3], [1, 2])
    with pytest.raises(ConeError):
        table([1, 1], [1, 2])


def test_cone_membership():
    cone = ConeSpec.uniform("identity", 3, 2.0)
    assert cone.d == 3
    assert cone_contains(cone, (10, 5, 20))
    assert not cone_contains(cone, (10, 4, 10))
    with pytest.raises(ValueError):
        cone_contains(cone, (10, 5))
    with pytest.raises(ConeError):
        ConeSpec.uniform("identity", 2, 0.5)


def test_nbar():
    assert nbar_of(ConeSpec.uniform("identity"), 7) == (7, 7)
    assert nbar_of(ConeSpec.uniform("power:2"), 5) == (5, 10)
    # xlog(2^3) = 8 (1 + 3 log 2) = 24.6..., dyadic order 4
    assert nbar_of(ConeSpec.uniform("xlog"), 3) == (3, 4)
    assert nbar_sequence(ConeSpec.uniform("identity"), 2) == [(0, 0), (1, 1), (2, 2)]


@given(st.integers(1, 14), st.data(), st.sampled_from(["identity", "power:2", "power:1.5", "xlog"]))
def test_ln_index_in_cone(n1, data, name):
    n = data.draw(st.integers(1, (1 << n1) - 1))
    cone = ConeSpec.uniform(name, 2, 2.0)
    idx = ln_index(cone, n1, n)
    assert idx[0] == (1 << n1) + n
    assert cone_contains(cone, idx)


def test_ln_index_tight_beta():
    assert ln_index(ConeSpec.uniform("identity"), 4, 3) == (19, 19)
    with pytest.raises(ConeError):
        ln_index(ConeSpec.uniform("power:1.5", 2, 1.0), 4, 3)
    with pytest.raises(ValueError):
        ln_index(ConeSpec.uniform("identity"), 4, 16)


def test_config_forms(tmp_path):
    cone = cone_from_config({"function": "power:2", "d": 3, "beta": 1.5})
    assert cone.d == 3 and cone.beta == (1.5, 1.5)
    cfg = {"crf": ["identity", {"table": [[1, 1], [2, 3]], "c_lo": 3, "c_hi": 3}], "beta": [1, 2]}
    cone = cone_from_config(cfg)
    assert cone.d == 3
    assert math.isclose(cone.crf[1](4.0), 9.0)
    with pytest.raises(ConeError):
        cone_from_config({"crf": [{"table": [[1, 1], [2, 3]]}]})
    path = tmp_path / "cone.json"
    path.write_text(json.dumps(cfg))
    assert resolve_cone(str(path)).describe() == "identity@1;table@2"
    assert resolve_cone("xlog", 2, 3.0).describe() == "xlog@3"
