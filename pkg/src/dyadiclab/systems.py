"""Rademacher, Walsh-Paley and Walsh-Kaczmarz functions and their spectra."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .dyadic import GroupPoint, ResolutionError, SampledFunction, reverse_bits, tau_bits


class SystemKind(enum.Enum):
    PALEY = "paley"
    KACZMARZ = "kaczmarz"

    @classmethod
    def parse(cls, value) -> SystemKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown system {value!r}; use 'paley' or 'kaczmarz'") from None


PALEY = SystemKind.PALEY
KACZMARZ = SystemKind.KACZMARZ


def order(n: int) -> int:
    """``|n|``: position of the leading binary digit, so ``2**|n| <= n < 2**(|n|+1)``."""
    if n < 1:
        raise ValueError(f"order(n) needs n >= 1, got {n}")
    return n.bit_length() - 1


def rademacher(k: int, x: GroupPoint) -> int:
    return 1 - 2 * x[k]


def _check_index(n, x):
    if n < 0 or n >> x.resolution:
        raise ResolutionError(f"index {n} needs resolution > {n.bit_length() - 1}")


def walsh_paley(n: int, x: GroupPoint) -> int:
    _check_index(n, x)
    return -1 if (n & x.bits).bit_count() & 1 else 1


def kaczmarz(n: int, x: GroupPoint) -> int:
    """Evaluate ``kappa_n`` straight from its defining product."""
    _check_index(n, x)
    if n == 0:
        return 1
    top = order(n)
    e = x[top]
    for k in range(top):
        if (n >> k) & 1:
            e += x[top - 1 - k]
    return -1 if e & 1 else 1


def evaluate(n: int, x: GroupPoint, system: SystemKind) -> int:
    return walsh_paley(n, x) if system is PALEY else kaczmarz(n, x)


def kaczmarz_perm(n):
    """Index ``pi(n)`` with ``kappa_n = w_pi(n)``; works on ints and int arrays.

    The digits below the leading one are reversed; ``pi`` is an involution
    that maps every block ``[2**k, 2**(k+1))`` onto itself.
    """
    if isinstance(n, np.ndarray):
        n = n.astype(np.int64)
        if (n < 0).any():
            raise ValueError("kaczmarz_perm needs nonnegative indices")
        out = n.copy()
        pos = n > 0
        top = np.zeros_like(n)
        for k in range(1, 63):
            top[(n >> k) > 0] = k
        for k in np.unique(top[pos]):
            sel = pos & (top == k)
            lead = np.int64(1) << k
            out[sel] = lead | reverse_bits(n[sel] - lead, int(k))
        return out
    if n < 0:
        raise ValueError("kaczmarz_perm needs a nonnegative index")
    if n == 0:
        return 0
    k = order(n)
    return (1 << k) | reverse_bits(n - (1 << k), k)


@lru_cache(maxsize=64)
def _perm_table(m):
    t = kaczmarz_perm(np.arange(1 << m, dtype=np.int64))
    t.setflags(write=False)
    return t


def perm_table(m: int) -> np.ndarray:
    """``pi`` on ``0..2**m-1`` (read-only, cached)."""
    return _perm_table(m)


def _parity_grid(mask, m):
    j = np.arange(1 << m, dtype=np.uint64)
    return 1.0 - 2.0 * (np.bitwise_count(j & np.uint64(mask)) & 1)


def sample(n: int, m: int, system: SystemKind = PALEY) -> np.ndarray:
    """Values of ``psi_n`` on the rank-``m`` grid as a ±1 float array."""
    if n < 0 or n >> m:
        raise ResolutionError(f"psi_{n} is not constant on rank-{m} cosets")
    if system is KACZMARZ:
        n = kaczmarz_perm(n)
    # w_n(x) = (-1)^{sum_k n_k x_k}
    return _parity_grid(n, m)


def sample_kaczmarz_product(n: int, m: int) -> np.ndarray:
    """``kappa_n`` on the grid from ``r_|n| * prod_k r_{|n|-1-k}^{n_k}``."""
    if n == 0:
        return np.ones(1 << m)
    top = order(n)
    if top >= m:
        raise ResolutionError(f"kappa_{n} is not constant on rank-{m} cosets")
    # collect the coordinates entering the product, then take the parity
    mask = 1 << top
    for k in range(top):
        if (n >> k) & 1:
            mask ^= 1 << (top - 1 - k)
    return _parity_grid(mask, m)


def sample_kaczmarz_direct(n: int, m: int) -> np.ndarray:
    """``kappa_n`` on the grid via ``r_|n|(x) w_{n-2^|n|}(tau_|n|(x))``."""
    if n == 0:
        return np.ones(1 << m)
    k = order(n)
    if k >= m:
        raise ResolutionError(f"kappa_{n} is not constant on rank-{m} cosets")
    j = np.arange(1 << m, dtype=np.int64)
    t = tau_bits(j, k)
    r = 1.0 - 2.0 * ((j >> k) & 1)
    return r * sample(n - (1 << k), m)[t]


def sampled_function(n: int, m: int, system: SystemKind = PALEY) -> SampledFunction:
    return SampledFunction(sample(n, m, system))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients ``coeffs[n] = int f psi_n`` in the system's own indexing."""

    system: SystemKind
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64, order="C", copy=True)
        for n in c.shape:
            if n < 1 or n & (n - 1):
                raise ResolutionError(f"spectrum shape {c.shape} is not a power of two")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(n.bit_length() - 1 for n in self.coeffs.shape)

    @classmethod
    def _owned(cls, system, coeffs):
        # skip the defensive copy for arrays built here and never shared
        obj = object.__new__(cls)
        coeffs.setflags(write=False)
        object.__setattr__(obj, "system", system)
        object.__setattr__(obj, "coeffs", coeffs)
        return obj


def _transform_axes(values):
    out = np.array(values, dtype=np.float64, order="C", copy=True)
    for axis in range(out.ndim):
        n = out.shape[axis]
        if n & (n - 1):
            raise ResolutionError(f"axis length {n} is not a power of two")
        if n == 1:
            continue
        moved = np.ascontiguousarray(np.moveaxis(out, axis, -1))
        flat = moved.reshape(-1, n)
        _kernels.fwht_rows(flat)
        out = np.ascontiguousarray(np.moveaxis(flat.reshape(moved.shape), -1, axis))
    return out


def fwht(f) -> Spectrum:
    """Paley spectrum, with the Haar measure factor in the forward direction."""
    values = f.values if isinstance(f, SampledFunction) else np.asarray(f, dtype=np.float64)
    out = _transform_axes(values)
    out *= 1.0 / out.size
    return Spectrum._owned(PALEY, out)


def ifwht(spec) -> SampledFunction:
    """Inverse of :func:`fwht`: ``f = sum_n coeffs[n] w_n``."""
    if isinstance(spec, Spectrum):
        spec = to_paley(spec)
        coeffs = spec.coeffs
    else:
        coeffs = np.asarray(spec, dtype=np.float64)
    return SampledFunction._owned(_transform_axes(coeffs))


def _reindex(coeffs):
    out = coeffs
    for axis, n in enumerate(coeffs.shape):
        # fancy indexing is several times faster than np.take(axis=...) here
        out = out[(slice(None),) * axis + (perm_table(n.bit_length() - 1),)]
    return np.ascontiguousarray(out)


def to_paley(spec: Spectrum) -> Spectrum:
    if spec.system is PALEY:
        return spec
    return Spectrum._owned(PALEY, _reindex(spec.coeffs))


def fourier_coeffs(f: SampledFunction, system: SystemKind = PALEY) -> Spectrum:
    """Walsh-Paley or Walsh-Kaczmarz coefficients of ``f``.

    Kaczmarz coefficients are the Paley ones read at ``pi(n)``.
    """
    paley = fwht(f)
    if system is PALEY:
        return paley
    return Spectrum._owned(KACZMARZ, _reindex(paley.coeffs))
