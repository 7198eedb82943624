import os
import subprocess
import sys

import numpy as np
import pytest

from dyadiclab import _kernels
from dyadiclab.systems import perm_table

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not importable")


@needs_numba
@pytest.mark.parametrize("m", [0, 1, 2, 3, 7, 12])
def test_fwht_bit_identical(m, rng):
    a = rng.standard_normal((5, 1 << m))
    b = a.copy()
    _kernels._fwht_rows_numba(a)
    _kernels._fwht_rows_numpy(b)
    assert np.array_equal(a, b)


@needs_numba
@pytest.mark.parametrize("use_perm", [False, True])
def test_kernel_rows_bit_identical(use_perm):
    m = 9
    ns = np.arange(1, 1 << m)
    w = np.cumprod(np.r_[1.0, (0.3 + np.arange(1, 1 << m)) / np.arange(1, 1 << m)])
    perm = perm_table(m) if use_perm else None
    a = _kernels._kernel_rows_numba(ns, w, perm, m)
    b = _kernels._kernel_rows_numpy(ns, w, perm, m)
    assert np.array_equal(a, b)


def test_set_backend_validation():
    with pytest.raises(ValueError):
        _kernels.set_backend("cuda")
    assert _kernels.set_threads(0) == 1


def _backend_in_subprocess(value):
    env = dict(os.environ, DYADICLAB_BACKEND=value)
    return subprocess.run(
        [sys.executable, "-c", "from dyadiclab import _kernels; print(_kernels.get_backend())"],
        env=env, capture_output=True, text=True,
    )


def test_env_flag_selects_backend():
    assert _backend_in_subprocess("numpy").stdout.strip() == "numpy"
    expected = "numba" if _kernels.HAVE_NUMBA else "numpy"
    assert _backend_in_subprocess("auto").stdout.strip() == expected
    bad = _backend_in_subprocess("fortran")
    assert bad.returncode != 0 and "DYADICLAB_BACKEND" in bad.stderr
