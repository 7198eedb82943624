"""Batch experiments on Cesàro summability of Walsh-Kaczmarz series.

Each experiment returns a list of :class:`ExperimentRecord` in parameter
order. Nothing here writes output; that is the CLI's job.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .cesaro import (
    SURVEY_BATCH,
    as_order,
    cesaro_kernel_spectral,
    cesaro_numbers,
    cesaro_ratio,
    dirichlet_kernel,
    exact_rank,
    kernel_batch,
    kernel_norm_survey,
)
from .cones import ConeSpec, cone_contains, ln_index, nbar_of
from .dyadic import DyadicInterval, GroupPoint, ResolutionError, SampledFunction, integrate, lp_norm, tau_bits
from .records import ExperimentRecord
from .summation import MeanParams, cesaro_mean, dyadic_expectation, hardy_norm, maximal_over
from .systems import (
    KACZMARZ,
    PALEY,
    SystemKind,
    fourier_coeffs,
    fwht,
    ifwht,
    perm_table,
    sample,
    sample_kaczmarz_direct,
    sample_kaczmarz_product,
)

# desk-scale caps
MAX_RANK_1D = 20
MAX_RANK_2D = 11
MAX_RANK_SETS = 12
MAX_RATIO_N1 = 14
FULL_PATH_MAX_CELLS = 1 << 22


def _fit_slope(x, y):
    """Least-squares slope of ``log y`` on ``log x`` over the larger half of the points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.argsort(x)
    keep = order[len(order) // 2 :] if len(order) >= 4 else order
    if keep.size < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(slope)


# --------------------------------------------------------------------------
# system sanity


def systems_check(m_sets: int = 10, m_transform: int = 20, samples: int = 500, seed: int = 0) -> list[ExperimentRecord]:
    """Block equality, factorization and orthonormality on the rank-``m_sets``
    grid; transform round trip, Parseval and Kaczmarz unit spectra on the
    rank-``m_transform`` grid. Values are errors (or 1.0/0.0 for equality)."""
    if not 1 <= m_sets <= MAX_RANK_SETS:
        raise ResolutionError(f"m_sets must lie in [1, {MAX_RANK_SETS}]")
    if not 1 <= m_transform <= MAX_RANK_1D:
        raise ResolutionError(f"m_transform must lie in [1, {MAX_RANK_1D}]")
    recs = []
    m = m_sets
    size = 1 << m
    t0 = time.perf_counter()
    w = np.array([sample(n, m) for n in range(size)])
    k = np.array([sample_kaczmarz_product(n, m) for n in range(size)])
    block_ok = True
    for b in range(m):
        lo, hi = 1 << b, 2 << b
        wk = {r.tobytes() for r in w[lo:hi]}
        kk = {r.tobytes() for r in k[lo:hi]}
        block_ok &= wk == kk
    recs.append(ExperimentRecord("block_equality", {"m": m}, float(block_ok), wall_time=time.perf_counter() - t0))
    t0 = time.perf_counter()
    direct = np.array([sample_kaczmarz_direct(n, m) for n in range(size)])
    recs.append(
        ExperimentRecord("factorization_max_err", {"m": m}, float(np.abs(direct - k).max()), wall_time=time.perf_counter() - t0)
    )
    for name, mat in (("paley", w), ("kaczmarz", k)):
        t0 = time.perf_counter()
        gram = mat @ mat.T / size
        err = float(np.abs(gram - np.eye(size)).max())
        recs.append(
            ExperimentRecord("orthonormality_max_err", {"m": m, "system": name}, err, wall_time=time.perf_counter() - t0)
        )
    del w, k, direct

    m = m_transform
    size = 1 << m
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    f = SampledFunction(rng.standard_normal(size))
    spec = fwht(f)
    back = ifwht(spec)
    recs.append(
        ExperimentRecord("roundtrip_max_err", {"m": m}, float(np.abs(back.values - f.values).max()), wall_time=time.perf_counter() - t0)
    )
    l2 = integrate(f * f)
    parseval = abs(float(np.add.reduce(spec.coeffs**2)) - l2) / l2
    recs.append(ExperimentRecord("parseval_rel_err", {"m": m}, parseval))
    t0 = time.perf_counter()
    worst = 0.0
    for n in rng.integers(0, size, samples).tolist():
        c = fourier_coeffs(SampledFunction._owned(sample_kaczmarz_product(n, m)), KACZMARZ).coeffs
        # distance to the unit vector at n
        a = np.abs(c)
        a[n] = abs(c[n] - 1.0)
        worst = max(worst, float(a.max()))
    recs.append(
        ExperimentRecord(
            "kaczmarz_unit_spectrum_max_err",
            {"m": m, "samples": samples, "seed": seed},
            worst,
            wall_time=time.perf_counter() - t0,
        )
    )
    return recs


# --------------------------------------------------------------------------
# endpoint counterexample martingale


@dataclass(frozen=True)
class CounterexampleSpec:
    n1: int
    cone: ConeSpec
    alpha: tuple[float, ...]

    def __post_init__(self):
        alpha = tuple(as_order(a) for a in self.alpha)
        if len(alpha) != self.cone.d:
            raise ValueError(f"{len(alpha)} orders for a {self.cone.d}-dimensional cone")
        if any(b < a for a, b in zip(alpha, alpha[1:])):
            raise ValueError(f"orders must be nondecreasing, got {alpha}")
        if self.n1 < 1:
            raise ValueError("n1 must be >= 1")
        object.__setattr__(self, "alpha", alpha)

    @property
    def p0(self) -> float:
        return max(1.0 / (1.0 + a) for a in self.alpha)

    @property
    def nbar(self) -> tuple[int, ...]:
        return nbar_of(self.cone, self.n1)

    def family(self) -> list[tuple[int, ...]]:
        return [ln_index(self.cone, self.n1, n) for n in range(1, 1 << self.n1)]


def _first_factor(n1, rank):
    """``D_{2^(n1+1)} - D_{2^n1}`` on the rank grid."""
    return dirichlet_kernel(2 << n1, PALEY, rank).values - dirichlet_kernel(1 << n1, PALEY, rank).values


def build_counterexample(spec: CounterexampleSpec, ranks: Sequence[int] | None = None) -> SampledFunction:
    """``(D_{2^(n1+1)} - D_{2^n1})(x^1) * prod_j w_{2^n_j - 1}(x^j)``."""
    nbar = spec.nbar
    if ranks is None:
        ranks = tuple(n + 1 for n in nbar)
    ranks = tuple(ranks)
    if len(ranks) != len(nbar):
        raise ValueError("need one rank per dimension")
    if ranks[0] < nbar[0] + 1 or any(r < n for r, n in zip(ranks[1:], nbar[1:])):
        raise ResolutionError(f"ranks {ranks} too coarse for nbar {nbar}")
    out = _first_factor(spec.n1, ranks[0])
    for n, r in zip(nbar[1:], ranks[1:]):
        out = np.multiply.outer(out, sample((1 << n) - 1, r))
    return SampledFunction(out)


def counterexample_weights(spec: CounterexampleSpec) -> np.ndarray:
    """Factor ``c_N`` with ``|sigma_{L^N} f(x)| = c_N |K^w_N(tau_n1 x^1)|``, for ``N = 1..2^n1-1``.

    ``c_N = (A_N/A_{L_1}) prod_{j>=2} A_{L_j - 2^n_j}/A_{L_j}`` with orders ``alpha_j``.
    """
    nbar = spec.nbar
    fam = np.array(spec.family(), dtype=np.int64)
    ns = np.arange(1, 1 << spec.n1)
    c = cesaro_ratio(ns, fam[:, 0], spec.alpha[0])
    for j in range(1, spec.cone.d):
        c = c * cesaro_ratio(fam[:, j] - (1 << nbar[j]), fam[:, j], spec.alpha[j])
    return c


def counterexample_profile(spec: CounterexampleSpec, rank: int | None = None) -> np.ndarray:
    """``max_N |sigma_{L^N} f|`` as a function of ``x^1`` alone (1-D reduction)."""
    n1 = spec.n1
    rank = n1 if rank is None else rank
    if rank < n1:
        raise ResolutionError("profile rank must be >= n1")
    c = counterexample_weights(spec)
    best = np.zeros(1 << n1)
    for start in range(1, 1 << n1, SURVEY_BATCH):
        ns = np.arange(start, min(start + SURVEY_BATCH, 1 << n1))
        rows = kernel_batch(ns, spec.alpha[0], PALEY, n1)
        np.maximum(best, (c[ns - 1, None] * np.abs(rows)).max(axis=0), out=best)
    profile = best[tau_bits(np.arange(1 << n1), n1)]
    return np.tile(profile, 1 << (rank - n1))


def counterexample_hardy_reduced(spec: CounterexampleSpec) -> float:
    """``||f||_{H_p0}`` from the ``x^1`` factor: only sequence terms with ``m_j >= n_j`` survive."""
    nbar = spec.nbar
    g = SampledFunction(_first_factor(spec.n1, spec.n1 + 1))
    best = np.zeros(g.values.shape)
    for k in range(spec.n1 + 2):
        mbar = nbar_of(spec.cone, k)
        if all(m >= n for m, n in zip(mbar[1:], nbar[1:])):
            best = np.maximum(best, np.abs(dyadic_expectation(g, (k,)).values))
    return lp_norm(SampledFunction(best), spec.p0)


def counterexample_full(spec: CounterexampleSpec):
    """Full d-dimensional computation: returns ``(f, maximal field, hardy norm)``."""
    nbar = spec.nbar
    fam = spec.family()
    ranks = [spec.n1 + 1]
    for j in range(1, spec.cone.d):
        ranks.append(max(nbar[j] + 1, exact_rank(max(L[j] for L in fam))))
    if math.prod(1 << r for r in ranks) > FULL_PATH_MAX_CELLS:
        raise ResolutionError(f"full path grid {ranks} exceeds the memory cap")
    f = build_counterexample(spec, ranks)
    seq = [nbar_of(spec.cone, k) for k in range(max(ranks) + 1)]
    h = hardy_norm(f, spec.p0, seq)
    field = maximal_over(f, [MeanParams(L, spec.alpha, KACZMARZ) for L in fam])
    return f, field, h


def ratio_experiment(
    n1_values: Sequence[int],
    cone: ConeSpec,
    alpha: Sequence[float],
    oracle: bool = True,
) -> list[ExperimentRecord]:
    """``R(n1) = ||max_N |sigma_{L^N} f|||_p0 / ||f||_{H_p0}`` along ``n1_values``.

    With ``oracle`` the smallest ``n1`` is also run through the full
    d-dimensional path and the largest pointwise deviation is recorded.
    """
    n1_values = sorted(set(int(n) for n in n1_values))
    if n1_values and n1_values[-1] > MAX_RATIO_N1:
        raise ResolutionError(f"n1 above {MAX_RATIO_N1} exceeds the desk-scale cap")
    records = []
    xs, rs = [], []
    for i, n1 in enumerate(n1_values):
        t0 = time.perf_counter()
        spec = CounterexampleSpec(n1, cone, tuple(alpha))
        profile = counterexample_profile(spec)
        num = lp_norm(SampledFunction(profile), spec.p0)
        hardy = counterexample_hardy_reduced(spec)
        r = num / hardy
        derived = {
            "p0": spec.p0,
            "hardy_norm": hardy,
            "hardy_closed_form": 2.0 ** ((1.0 - 1.0 / spec.p0) * n1),
            "maximal_norm": num,
        }
        if oracle and i == 0:
            try:
                f, field, h_full = counterexample_full(spec)
            except ResolutionError:
                pass
            else:
                full = field.values.values
                reduced = counterexample_profile(spec, f.ranks[0])
                reduced = reduced.reshape((-1,) + (1,) * (f.dims - 1))
                derived["oracle_max_diff"] = float(np.abs(full - reduced).max())
                derived["oracle_hardy"] = h_full
        records.append(
            ExperimentRecord(
                "counterexample",
                {"n1": n1, "nbar": spec.nbar, "alpha": spec.alpha, "cone": cone.describe(), "system": "kaczmarz"},
                r,
                derived,
                time.perf_counter() - t0,
            )
        )
        if n1 >= 2:
            xs.append(n1 / math.log(n1))
            rs.append(r)
    if len(xs) >= 2:
        records.append(
            ExperimentRecord(
                "counterexample_fit",
                {"n1": tuple(n1_values), "alpha": tuple(as_order(a) for a in alpha), "cone": cone.describe()},
                _fit_slope(xs, rs),
                {"slope_all": float(np.polyfit(np.log(xs), np.log(rs), 1)[0])},
            )
        )
    return records


# --------------------------------------------------------------------------
# lower-bound integral


def lower_bound_integrals(n: int, alpha) -> tuple[float, float]:
    """Both forms of the lower-bound integral on the rank-``n`` grid.

    inner: ``int max_{1<=N<2^n} (A_{N-1}|K_N|)^(1/(1+a))``
    outer: ``(int max_{1<=N<2^n} A_N |K_N|)^(1+a)``
    """
    alpha = as_order(alpha)
    if not 1 <= n <= MAX_RANK_1D:
        raise ResolutionError(f"n must lie in [1, {MAX_RANK_1D}]")
    a = cesaro_numbers(1 << n, alpha)
    q = 1.0 / (1.0 + alpha)
    inner = np.zeros(1 << n)
    outer = np.zeros(1 << n)
    for start in range(1, 1 << n, SURVEY_BATCH):
        ns = np.arange(start, min(start + SURVEY_BATCH, 1 << n))
        rows = np.abs(kernel_batch(ns, alpha, PALEY, n))
        np.maximum(inner, (a[ns - 1, None] * rows).max(axis=0), out=inner)
        np.maximum(outer, (a[ns, None] * rows).max(axis=0), out=outer)
    # max commutes with the monotone power
    i_inner = integrate(SampledFunction(inner**q))
    i_outer = integrate(SampledFunction(outer)) ** (1.0 + alpha)
    return i_inner, i_outer


def lower_bound_integral(n: int, alpha, variant: str = "inner") -> float:
    inner, outer = lower_bound_integrals(n, alpha)
    if variant == "inner":
        return inner
    if variant == "outer":
        return outer
    raise ValueError(f"variant must be 'inner' or 'outer', got {variant!r}")


def lower_bound_experiment(n_values: Sequence[int], alpha, variant: str = "both") -> list[ExperimentRecord]:
    if variant not in ("inner", "outer", "both"):
        raise ValueError(f"unknown variant {variant!r}")
    alpha = as_order(alpha)
    records = []
    for n in n_values:
        t0 = time.perf_counter()
        inner, outer = lower_bound_integrals(n, alpha)
        dt = time.perf_counter() - t0
        scale = math.log(n + 2) / n
        for name, val in (("inner", inner), ("outer", outer)):
            if variant in (name, "both"):
                records.append(
                    ExperimentRecord(
                        "lower_bound",
                        {"n": n, "alpha": alpha, "variant": name},
                        val,
                        {"normalized": val * scale},
                        dt,
                    )
                )
    return records


# --------------------------------------------------------------------------
# kernel norms


def kernel_survey_experiment(system: SystemKind, alpha, max_n: int, m: int | None = None) -> list[ExperimentRecord]:
    alpha = as_order(alpha)
    t0 = time.perf_counter()
    table = kernel_norm_survey(system, alpha, max_n, m)
    dt = time.perf_counter() - t0
    base = {"system": system.value, "alpha": alpha, "rank": m}
    records = [
        ExperimentRecord("kernel_norm", {**base, "n": n}, table.norm(n)) for n in range(1, max_n + 1)
    ]
    for j, v in table.block_maxima.items():
        records.append(ExperimentRecord("kernel_block_max", {**base, "block": j}, v, wall_time=dt))
    return records


# --------------------------------------------------------------------------
# pointwise kernel behaviour


def kernel_value(n: int, alpha, system: SystemKind, x: GroupPoint) -> float:
    """``K_n^{psi,alpha}(x)`` read off the kernel sampled at its exact rank."""
    m = exact_rank(n)
    if x.resolution < m:
        raise ResolutionError(f"point resolution {x.resolution} < kernel rank {m}")
    row = kernel_batch(np.array([n]), alpha, system, m)[0]
    return float(row[x.bits & ((1 << m) - 1)])


def kernel_contrast_probe(x: GroupPoint, j_values: Sequence[int], alpha: float = 1.0) -> list[ExperimentRecord]:
    """``K_{2^j}(x)`` for both systems at a dyadic rational ``x``."""
    j_values = list(j_values)
    if max(j_values) > MAX_RANK_1D:
        raise ResolutionError(f"j above {MAX_RANK_1D}")
    records = []
    seqs = {PALEY: [], KACZMARZ: []}
    for j in j_values:
        for system in (KACZMARZ, PALEY):
            t0 = time.perf_counter()
            v = kernel_value(1 << j, alpha, system, x)
            seqs[system].append(v)
            records.append(
                ExperimentRecord(
                    "contrast",
                    {"system": system.value, "x": x.bits, "j": j, "n": 1 << j, "alpha": as_order(alpha)},
                    v,
                    wall_time=time.perf_counter() - t0,
                )
            )
    kz = seqs[KACZMARZ]
    pw = [abs(v) for v in seqs[PALEY]]
    records.append(
        ExperimentRecord(
            "contrast_summary",
            {"x": x.bits, "alpha": as_order(alpha)},
            kz[-1],
            {
                "kaczmarz_increasing": all(b > a for a, b in zip(kz, kz[1:])),
                "paley_final_abs": pw[-1],
                "paley_decreasing": all(b < a for a, b in zip(pw, pw[1:])),
            },
        )
    )
    return records


def exceedance_probe(n_values: Sequence[int], m: int, c_values: Sequence[float]) -> list[ExperimentRecord]:
    """Exceedance measures ``mu{D_n^kappa / log n >= C}``, plain and block-maximal."""
    if m > MAX_RANK_1D:
        raise ResolutionError(f"rank above {MAX_RANK_1D}")
    records = []
    for n in n_values:
        if not 2 <= n < 1 << m:
            raise ResolutionError(f"n must satisfy 2 <= n < 2**{m}")
        t0 = time.perf_counter()
        ratio = dirichlet_kernel(n, KACZMARZ, m).values / math.log(n)
        lo = max(2, 1 << (n.bit_length() - 1))
        block = np.full(1 << m, -np.inf)
        for start in range(lo, n + 1, SURVEY_BATCH):
            ns = np.arange(start, min(start + SURVEY_BATCH, n + 1))
            rows = _dirichlet_rows(ns, m)
            np.maximum(block, (rows / np.log(ns)[:, None]).max(axis=0), out=block)
        dt = time.perf_counter() - t0
        for c in c_values:
            records.append(
                ExperimentRecord(
                    "exceedance",
                    {"n": n, "rank": m, "C": float(c)},
                    float(np.mean(ratio >= c)),
                    {"block_max_measure": float(np.mean(block >= c)), "at_zero": n / math.log(n)},
                    dt,
                )
            )
    return records


def _dirichlet_rows(ns, m):
    return _kernels.kernel_rows(ns, np.ones(int(ns.max()) + 1), perm_table(m), m)


# --------------------------------------------------------------------------
# cone-restricted convergence


def make_test_function(name: str, ranks: Sequence[int]) -> SampledFunction:
    """Named inputs for convergence runs.

    ``indicator``: the rectangle ``I_2 x ... x I_2``; ``constant``: ``w_0``;
    ``polynomial``: a fixed Kaczmarz polynomial of degree < 8 per axis.
    """
    ranks = tuple(ranks)
    if name == "indicator":
        ivs = [DyadicInterval(GroupPoint.zero(m), 2) for m in ranks]
        return SampledFunction.indicator(ivs, ranks)
    if name == "constant":
        return SampledFunction.constant(ranks)
    if name == "polynomial":
        spec = polynomial_coefficients(len(ranks))
        out = np.zeros(tuple(1 << m for m in ranks))
        for idx, c in spec.items():
            term = np.ones(())
            for k, m in zip(idx, ranks):
                term = np.multiply.outer(term, sample(k, m, KACZMARZ))
            out += c * term
        return SampledFunction(out)
    raise ValueError(f"unknown test function {name!r}")


def polynomial_coefficients(d: int) -> dict[tuple[int, ...], float]:
    """Kaczmarz coefficients of the ``polynomial`` test function."""
    base = {0: 1.0, 1: -0.5, 3: 0.25, 5: 0.75, 6: -0.125}
    out = {}
    for idx in np.ndindex(*(8,) * d):
        c = 1.0
        for k in idx:
            c *= base.get(k, 0.0)
        if c:
            out[tuple(int(k) for k in idx)] = c
    return out


def polynomial_deficiency(coeffs: dict[tuple[int, ...], float], params: MeanParams, ranks: Sequence[int]) -> np.ndarray:
    """Closed form of ``sigma_n f - f`` for a polynomial ``f`` in the mean's own system."""
    weights = [cesaro_numbers(n, a) for n, a in zip(params.n, params.alpha)]
    out = np.zeros(tuple(1 << m for m in ranks))
    for idx, c in coeffs.items():
        w = 1.0
        for k, n, a in zip(idx, params.n, weights):
            w *= a[n - 1 - k] / a[n] if k < n else 0.0
        term = np.ones(())
        for k, m in zip(idx, ranks):
            term = np.multiply.outer(term, sample(k, m, params.system))
        out += c * (w - 1.0) * term
    return out


def cone_index(cone: ConeSpec, n1: int) -> tuple[int, ...]:
    """``(2^n1, [gamma_j(2^n1)], ...)``: a cone index on the dyadic scale ``n1``."""
    first = 1 << n1
    out = (first,) + tuple(int(math.floor(float(c.gamma(float(first))))) for c in cone.crf)
    if not cone_contains(cone, out):
        raise ResolutionError(f"index {out} is outside the cone")
    return out


def convergence_experiment(
    f: SampledFunction,
    cone: ConeSpec,
    alpha: Sequence[float],
    n1_values: Sequence[int],
    system: SystemKind = KACZMARZ,
    label: str = "",
) -> list[ExperimentRecord]:
    """``||sigma_n f - f||_1`` and ``||.||_inf`` along cone indices ``n(n1)``."""
    if f.dims != cone.d:
        raise ValueError("function and cone dimensions differ")
    records = []
    f_inf = lp_norm(f, math.inf)
    for n1 in n1_values:
        t0 = time.perf_counter()
        n = cone_index(cone, n1)
        params = MeanParams(n, tuple(alpha), system)
        params.check_grid(f.ranks)
        sigma = cesaro_mean(f, params)
        err = sigma - f
        envelope = f_inf
        for nn, a in zip(n, params.alpha):
            envelope *= lp_norm(cesaro_kernel_spectral(nn, a, system), 1.0) if nn else 0.0
        s_inf = lp_norm(sigma, math.inf)
        if s_inf > envelope * (1.0 + 1e-12) + 1e-300:
            raise RuntimeError(f"convolution bound violated at n={n}: {s_inf} > {envelope}")
        records.append(
            ExperimentRecord(
                "converge",
                {"function": label, "n1": n1, "n": n, "alpha": params.alpha, "system": system.value, "cone": cone.describe()},
                lp_norm(err, 1.0),
                {"e_inf": lp_norm(err, math.inf), "sigma_inf": s_inf, "envelope": envelope},
                time.perf_counter() - t0,
            )
        )
    return records
