"""Cesàro numbers and the Dirichlet and (C, alpha) kernels of both systems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import _kernels
from .dyadic import ResolutionError, SampledFunction
from .systems import KACZMARZ, PALEY, Spectrum, SystemKind, ifwht, perm_table, sample, sample_kaczmarz_product

SURVEY_BATCH = 256


@dataclass(frozen=True)
class CesaroOrder:
    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not 0.0 < a <= 1.0:
            raise ValueError(f"Cesàro order must satisfy 0 < alpha <= 1, got {a}")
        object.__setattr__(self, "alpha", a)

    def __float__(self):
        return self.alpha


def as_order(alpha) -> float:
    """Validate and unwrap an alpha given as float or :class:`CesaroOrder`."""
    return CesaroOrder(float(alpha)).alpha


def _check_general_alpha(alpha):
    if not alpha > -1.0:
        raise ValueError(f"A_j^alpha needs alpha > -1, got {alpha}")


def cesaro_number(j: int, alpha: float) -> float:
    """``A_j^alpha = (alpha+1)...(alpha+j)/j!`` by the forward recurrence."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    alpha = float(alpha)
    _check_general_alpha(alpha)
    a = 1.0
    for i in range(1, j + 1):
        a = a * (alpha + i) / i
    return a


def cesaro_numbers(n: int, alpha: float) -> np.ndarray:
    """``A_0^alpha .. A_n^alpha``; same recurrence as :func:`cesaro_number`."""
    alpha = float(alpha)
    _check_general_alpha(alpha)
    out = np.ones(n + 1)
    a = 1.0
    for i in range(1, n + 1):
        a = a * (alpha + i) / i
        out[i] = a
    return out


RECURRENCE_LIMIT = 1 << 20


def cesaro_ratio(num, den, alpha: float) -> np.ndarray:
    """``A_num^alpha / A_den^alpha`` elementwise.

    Uses the recurrence table up to ``RECURRENCE_LIMIT`` and the Pochhammer
    form ``A_j^alpha = (j+1)_alpha / Gamma(alpha+1)`` beyond it.
    """
    num = np.asarray(num, dtype=np.int64)
    den = np.asarray(den, dtype=np.int64)
    top = int(max(num.max(initial=0), den.max(initial=0)))
    if top <= RECURRENCE_LIMIT:
        a = cesaro_numbers(top, alpha)
        return a[num] / a[den]
    return special.poch(num + 1.0, alpha) / special.poch(den + 1.0, alpha)


def cesaro_growth_limit(alpha: float) -> float:
    """``lim A_j^alpha / j^alpha = 1/Gamma(alpha+1)``."""
    return 1.0 / math.gamma(alpha + 1.0)


def _check_exact(n, m):
    if n < 0:
        raise ValueError("kernel index must be nonnegative")
    if n > 1 << m:
        raise ResolutionError(f"kernel of index {n} is not constant on rank-{m} cosets")


def exact_rank(n: int) -> int:
    """Smallest ``m`` with ``n <= 2**m``."""
    return max(0, (n - 1).bit_length()) if n > 0 else 0


def dirichlet_kernel(n: int, system: SystemKind = PALEY, m: int | None = None) -> SampledFunction:
    """``D_n = psi_0 + ... + psi_{n-1}`` sampled on the rank-``m`` grid."""
    m = exact_rank(n) if m is None else m
    _check_exact(n, m)
    perm = perm_table(m) if system is KACZMARZ else None
    row = _kernels.kernel_rows(np.array([n]), np.ones(n + 1), perm, m)[0]
    return SampledFunction(row)


def kernel_coefficients(n: int, alpha: float) -> np.ndarray:
    """``K^alpha_n`` in its own system's indexing: ``A_{n-1-j}/A_n`` for ``j < n``."""
    a = cesaro_numbers(n, alpha)
    if n == 0:
        return np.zeros(1)
    return a[n - 1 :: -1] / a[n]


def kernel_spectrum(n: int, alpha, system: SystemKind = PALEY, m: int | None = None) -> Spectrum:
    alpha = as_order(alpha)
    m = exact_rank(n) if m is None else m
    _check_exact(n, m)
    coeffs = np.zeros(1 << m)
    coeffs[:n] = kernel_coefficients(n, alpha)[:n]
    return Spectrum(system, coeffs)


def cesaro_kernel_spectral(n: int, alpha, system: SystemKind = PALEY, m: int | None = None) -> SampledFunction:
    """Fast path: inverse transform of the closed-form spectrum, ``O(m 2**m)``."""
    return ifwht(kernel_spectrum(n, alpha, system, m))


def cesaro_kernel_definitional(n: int, alpha, system: SystemKind = PALEY, m: int | None = None) -> SampledFunction:
    """Slow path: ``(1/A_n) sum_k A_{n-k}^{alpha-1} D_k`` with each ``psi_k`` evaluated directly."""
    alpha = as_order(alpha)
    m = exact_rank(n) if m is None else m
    _check_exact(n, m)
    a_n = cesaro_number(n, alpha)
    weights = cesaro_numbers(n, alpha - 1.0)
    d = np.zeros(1 << m)
    total = np.zeros(1 << m)
    for k in range(1, n + 1):
        psi = sample(k - 1, m) if system is PALEY else sample_kaczmarz_product(k - 1, m)
        d = d + psi
        total = total + weights[n - k] * d
    return SampledFunction(total / a_n)


def kernel_batch(ns, alpha, system: SystemKind, m: int) -> np.ndarray:
    """Rows of ``K^alpha_N`` on the rank-``m`` grid for every ``N`` in ``ns``."""
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size and ns.max() > 1 << m:
        raise ResolutionError(f"kernel index {ns.max()} exceeds rank-{m} grid")
    weights = cesaro_numbers(int(ns.max()) if ns.size else 0, as_order(alpha))
    perm = perm_table(m) if system is KACZMARZ else None
    return _kernels.kernel_rows(ns, weights, perm, m)


@dataclass(frozen=True, eq=False)
class KernelTable:
    system: SystemKind
    alpha: float
    max_n: int
    rank: int | None
    norms: np.ndarray = field(repr=False)

    def norm(self, n: int) -> float:
        return float(self.norms[n - 1])

    @property
    def block_maxima(self) -> dict[int, float]:
        """``max ||K_N||_1`` over ``2**j <= N < 2**(j+1)`` (clipped to ``max_n``)."""
        out = {}
        for j in range(self.max_n.bit_length()):
            lo, hi = 1 << j, min(2 << j, self.max_n + 1)
            out[j] = float(self.norms[lo - 1 : hi - 1].max())
        return out


def kernel_norm_survey(system: SystemKind, alpha, max_n: int, m: int | None = None) -> KernelTable:
    """``||K^{psi,alpha}_N||_1`` for ``N = 1..max_n``.

    With ``m=None`` each dyadic block is sampled at its own exact rank;
    otherwise every kernel is sampled on the rank-``m`` grid.
    """
    alpha = as_order(alpha)
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    if m is not None:
        _check_exact(max_n, m)
    norms = np.empty(max_n)
    for j in range(max_n.bit_length()):
        lo, hi = 1 << j, min(2 << j, max_n + 1)
        rank = m if m is not None else j + 1
        for start in range(lo, hi, SURVEY_BATCH):
            ns = np.arange(start, min(start + SURVEY_BATCH, hi))
            rows = kernel_batch(ns, alpha, system, rank)
            norms[ns - 1] = np.add.reduce(np.abs(rows), axis=1) / rows.shape[1]
    norms.setflags(write=False)
    return KernelTable(system, alpha, max_n, m, norms)
