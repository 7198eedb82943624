"""Partial sums, d-dimensional (C, alpha) means and maximal functions.

Every mean is a dyadic convolution with a product kernel, evaluated by
multiplying Paley spectra. Kaczmarz kernels enter through their Paley
re-indexing, so the same path serves both systems.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cesaro import as_order, cesaro_numbers, kernel_spectrum
from .dyadic import DyadicInterval, ResolutionError, SampledFunction, integrate, lp_norm
from .systems import KACZMARZ, PALEY, SystemKind, fwht, ifwht, perm_table, to_paley


@dataclass(frozen=True)
class MeanParams:
    n: tuple[int, ...]
    alpha: tuple[float, ...]
    system: SystemKind = KACZMARZ

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        alpha = tuple(as_order(a) for a in self.alpha)
        if len(n) != len(alpha):
            raise ValueError(f"{len(n)} indices but {len(alpha)} orders")
        if any(v < 0 for v in n):
            raise ValueError(f"negative index in {n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "system", SystemKind.parse(self.system))

    def check_grid(self, ranks):
        if len(ranks) != len(self.n):
            raise ValueError(f"{len(self.n)}-dimensional mean on a {len(ranks)}-dimensional grid")
        for n, m in zip(self.n, ranks):
            if n > 1 << m:
                raise ResolutionError(f"index {n} exceeds the rank-{m} grid")


@dataclass(frozen=True, eq=False)
class MaximalField:
    values: SampledFunction
    family_size: int


def _outer(vectors):
    out = np.ones(())
    for v in vectors:
        out = np.multiply.outer(out, v)
    return out


def _system_index(m, system):
    return perm_table(m) if system is KACZMARZ else np.arange(1 << m)


def partial_sum(f: SampledFunction, k: Sequence[int], system: SystemKind = PALEY) -> SampledFunction:
    """Rectangular partial sum over the indices ``j < k`` (componentwise)."""
    k = tuple(int(v) for v in k)
    if len(k) != f.dims:
        raise ValueError("index vector length does not match dimension")
    for kk, m in zip(k, f.ranks):
        if not 0 <= kk <= 1 << m:
            raise ResolutionError(f"partial-sum index {kk} outside [0, 2**{m}]")
    masks = [(_system_index(m, system) < kk).astype(np.float64) for kk, m in zip(k, f.ranks)]
    return ifwht(fwht(f).coeffs * _outer(masks))


def _mean_multiplier(params, ranks):
    vecs = []
    for n, a, m in zip(params.n, params.alpha, ranks):
        vecs.append(to_paley(kernel_spectrum(n, a, params.system, m)).coeffs)
    return _outer(vecs)


def cesaro_mean(f: SampledFunction, params: MeanParams) -> SampledFunction:
    """``sigma_n f = f * (K_{n_1} x ... x K_{n_d})`` via the Paley spectrum."""
    params.check_grid(f.ranks)
    return ifwht(fwht(f).coeffs * _mean_multiplier(params, f.ranks))


def cesaro_mean_definitional(f: SampledFunction, params: MeanParams) -> SampledFunction:
    """Weighted average of partial sums, summed term by term (slow oracle)."""
    params.check_grid(f.ranks)
    weights = [cesaro_numbers(n, a - 1.0) for n, a in zip(params.n, params.alpha)]
    norm = float(np.prod([cesaro_numbers(n, a)[n] for n, a in zip(params.n, params.alpha)]))
    total = np.zeros(f.values.shape)
    for k in itertools.product(*(range(n + 1) for n in params.n)):
        if 0 in k:
            continue  # S_k = 0 when any k_i = 0
        w = 1.0
        for ki, n, wt in zip(k, params.n, weights):
            w *= wt[n - ki]
        total += w * partial_sum(f, k, params.system).values
    return SampledFunction(total / norm)


def maximal_over(f: SampledFunction, family: Sequence[MeanParams]) -> MaximalField:
    """Pointwise ``max |sigma_n f|`` over a finite family of indices."""
    if not family:
        raise ValueError("maximal_over needs a nonempty family")
    spec = fwht(f).coeffs
    best = None
    for params in family:
        params.check_grid(f.ranks)
        v = np.abs(ifwht(spec * _mean_multiplier(params, f.ranks)).values)
        best = v if best is None else np.maximum(best, v)
    return MaximalField(SampledFunction(best), len(family))


def dyadic_expectation(f: SampledFunction, exps: Sequence[int]) -> SampledFunction:
    """``S_{2^a_1,...,2^a_d} f``: the average of ``f`` over each rank-``a`` rectangle.

    Exponents above the grid rank are clamped; ``f`` is already measurable there.
    """
    if len(exps) != f.dims:
        raise ValueError("exponent vector length does not match dimension")
    v = f.values
    for axis, (a, m) in enumerate(zip(exps, f.ranks)):
        if a < 0:
            raise ValueError("exponents must be nonnegative")
        a = min(a, m)
        if a == m:
            continue
        shape = v.shape[:axis] + (1 << (m - a), 1 << a) + v.shape[axis + 1 :]
        # cell j lies in the rank-a coset j mod 2**a: average over the high bits
        mean = v.reshape(shape).mean(axis=axis, keepdims=True)
        v = np.broadcast_to(mean, shape).reshape(f.values.shape[:axis] + (1 << m,) + v.shape[axis + 1 :])
    return SampledFunction(v)


def martingale_maximal(f: SampledFunction, nbar_seq: Sequence[Sequence[int]]) -> SampledFunction:
    """``f* = sup |S_{2^nbar} f|`` along the given exponent sequence."""
    best = None
    for exps in nbar_seq:
        v = np.abs(dyadic_expectation(f, exps).values)
        best = v if best is None else np.maximum(best, v)
    if best is None:
        raise ValueError("martingale_maximal needs a nonempty sequence")
    return SampledFunction(best)


def hardy_norm(f: SampledFunction, p: float, nbar_seq: Sequence[Sequence[int]]) -> float:
    return lp_norm(martingale_maximal(f, nbar_seq), p)


ATOM_MEAN_TOL = 1e-12


def atom_validate(a: SampledFunction, rect: Sequence[DyadicInterval], p: float) -> bool:
    """True iff ``a`` is a ``p``-atom supported on the dyadic rectangle ``rect``."""
    if len(rect) != a.dims:
        raise ValueError("rectangle dimension does not match the function")
    inside = np.ones(())
    measure = 1.0
    for iv, m in zip(rect, a.ranks):
        inside = np.multiply.outer(inside, iv.mask(m))
        measure *= iv.measure
    inside = inside.astype(bool)
    if np.any(a.values[~inside] != 0.0):
        return False
    bound = measure ** (-1.0 / p)
    if np.abs(a.values).max() > bound * (1.0 + 1e-12):
        return False
    # int_I a = int a once the support is inside I
    return abs(integrate(a)) <= ATOM_MEAN_TOL
