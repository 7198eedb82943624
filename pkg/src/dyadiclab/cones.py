"""Cone-like restriction functions (CRF) and the index sets they cut out.

CRF validity is checked on a geometric sample of ``[1, x_max]``; a pass is
evidence, not a proof, since the defining inequality quantifies over all
``x >= 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np


class ConeError(ValueError):
    pass


# --------------------------------------------------------------------------
# catalog


def identity(x):
    return x


def power(p: float) -> Callable[[float], float]:
    if p < 1:
        raise ConeError(f"power CRF needs p >= 1, got {p}")

    def gamma(x):
        return x**p

    gamma.__name__ = f"power_{p:g}"
    return gamma


def xlog(x):
    """``x (1 + log x)``."""
    return x * (1.0 + np.log(x))


def table(xs: Sequence[float], ys: Sequence[float]) -> Callable[[float], float]:
    """Piecewise-geometric interpolation through ``(xs, ys)``.

    Linear in log-log coordinates; the end segments are extended.
    """
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    if lx.size < 2 or np.any(np.diff(lx) <= 0):
        raise ConeError("table CRF needs at least two strictly increasing abscissae")
    if lx[0] != 0.0 or ly[0] != 0.0:
        raise ConeError("table CRF must start at (1, 1)")
    slopes = np.diff(ly) / np.diff(lx)

    def gamma(x):
        t = np.log(np.asarray(x, dtype=float))
        i = np.clip(np.searchsorted(lx, t, side="right") - 1, 0, slopes.size - 1)
        out = np.exp(ly[i] + slopes[i] * (t - lx[i]))
        return float(out) if out.ndim == 0 else out

    gamma.__name__ = "table"
    return gamma


@dataclass(frozen=True)
class CRFSpec:
    gamma: Callable[[float], float]
    zeta: float
    c_lo: float
    c_hi: float
    name: str = ""

    def __call__(self, x):
        return self.gamma(x)


def catalog(name: str) -> CRFSpec:
    """Built-in CRFs: ``identity``, ``power:<p>`` (``p >= 1``), ``xlog``."""
    kind, _, arg = name.partition(":")
    if kind == "identity":
        return CRFSpec(identity, 2.0, 2.0, 2.0, "identity")
    if kind == "power":
        p = float(arg)
        return CRFSpec(power(p), 2.0, 2.0**p, 2.0**p, f"power:{p:g}")
    if kind == "xlog":
        return CRFSpec(xlog, 2.0, 2.0, 2.0 * (1.0 + math.log(2.0)), "xlog")
    raise ConeError(f"unknown CRF {name!r}")


@dataclass(frozen=True)
class CRFCheck:
    """Result of :func:`crf_validate`; falsy when a constraint failed."""

    ok: bool
    reason: str = ""
    x: float | None = None

    def __bool__(self):
        return self.ok


def crf_validate(c: CRFSpec, x_max: float, samples: int) -> CRFCheck:
    """Check ``gamma(1) = 1``, monotonicity and the two-sided CRF bound on a geometric grid."""
    if x_max < 1 or samples < 2:
        raise ValueError("need x_max >= 1 and samples >= 2")
    for label, v in (("zeta", c.zeta), ("c_lo", c.c_lo), ("c_hi", c.c_hi)):
        if not v > 1:
            return CRFCheck(False, f"{label} = {v} must exceed 1")
    if not math.isclose(float(c.gamma(1.0)), 1.0, rel_tol=0, abs_tol=1e-12):
        return CRFCheck(False, "gamma(1) != 1", 1.0)
    xs = np.geomspace(1.0, x_max, samples)
    prev = -math.inf
    for x in xs:
        g = float(c.gamma(x))
        if not g > prev:
            return CRFCheck(False, "gamma not strictly increasing", float(x))
        prev = g
        gz = float(c.gamma(c.zeta * x))
        tol = 1e-12 * gz
        if gz < c.c_lo * g - tol:
            return CRFCheck(False, "gamma(zeta x) < c_lo gamma(x)", float(x))
        if gz > c.c_hi * g + tol:
            return CRFCheck(False, "gamma(zeta x) > c_hi gamma(x)", float(x))
    return CRFCheck(True)


@dataclass(frozen=True)
class ConeSpec:
    crf: tuple[CRFSpec, ...]
    beta: tuple[float, ...]

    def __post_init__(self):
        crf = tuple(self.crf)
        beta = tuple(float(b) for b in self.beta)
        if len(crf) != len(beta):
            raise ConeError("need one beta per CRF")
        if any(b < 1 for b in beta):
            raise ConeError(f"beta must be >= 1, got {beta}")
        object.__setattr__(self, "crf", crf)
        object.__setattr__(self, "beta", beta)

    @property
    def d(self) -> int:
        return len(self.crf) + 1

    @classmethod
    def uniform(cls, name: str, d: int = 2, beta: float = 1.0) -> ConeSpec:
        c = catalog(name)
        return cls((c,) * (d - 1), (beta,) * (d - 1))

    def describe(self) -> str:
        return ";".join(f"{c.name or 'custom'}@{b:g}" for c, b in zip(self.crf, self.beta))


def cone_contains(spec: ConeSpec, n: Sequence[int]) -> bool:
    if len(n) != spec.d:
        raise ValueError(f"index of length {len(n)} for a {spec.d}-dimensional cone")
    if n[0] < 1:
        raise ValueError("cone membership needs n_1 >= 1")
    for nj, c, b in zip(n[1:], spec.crf, spec.beta):
        g = float(c.gamma(float(n[0])))
        if not g / b <= nj <= b * g:
            return False
    return True


def _dyadic_order(v: float) -> int:
    if not v >= 1:
        raise ConeError(f"gamma value {v} below 1")
    return math.frexp(v)[1] - 1


def nbar_of(spec: ConeSpec, n1: int) -> tuple[int, ...]:
    """``(n_1, |gamma_2(2^n_1)|, ...)`` where ``|y|`` is the dyadic order of ``y``."""
    if n1 < 0:
        raise ValueError("n1 must be nonnegative")
    x = float(2**n1)
    return (n1,) + tuple(_dyadic_order(float(c.gamma(x))) for c in spec.crf)


def nbar_sequence(spec: ConeSpec, n1_max: int) -> list[tuple[int, ...]]:
    return [nbar_of(spec, k) for k in range(n1_max + 1)]


def ln_index(spec: ConeSpec, n1: int, n: int) -> tuple[int, ...]:
    """``L^N = (2^n_1 + N, [gamma_2(2^n_1 + N)], ...)``, checked to lie in the cone."""
    if not 0 < n < 1 << n1:
        raise ValueError(f"N must satisfy 0 < N < 2**{n1}, got {n}")
    first = (1 << n1) + n
    out = (first,) + tuple(int(math.floor(float(c.gamma(float(first))))) for c in spec.crf)
    if not cone_contains(spec, out):
        raise ConeError(f"L^N = {out} falls outside the cone (beta {spec.beta} too tight for the floor)")
    return out


# --------------------------------------------------------------------------
# config


def crf_from_config(entry) -> CRFSpec:
    """Build a CRF from a config entry.

    ``entry`` is a catalog name or a mapping with ``function`` (catalog
    name) or ``table`` (``[[x, y], ...]``) plus optional ``zeta``, ``c_lo``
    and ``c_hi`` overriding the catalog constants.
    """
    if isinstance(entry, str):
        return catalog(entry)
    if "table" in entry:
        xs, ys = zip(*entry["table"])
        base = CRFSpec(table(xs, ys), 2.0, 0.0, 0.0, "table")
        missing = [k for k in ("c_lo", "c_hi") if k not in entry]
        if missing:
            raise ConeError(f"table CRF needs explicit {missing}")
    else:
        base = catalog(entry["function"])
    return CRFSpec(
        base.gamma,
        float(entry.get("zeta", base.zeta)),
        float(entry.get("c_lo", base.c_lo)),
        float(entry.get("c_hi", base.c_hi)),
        base.name,
    )


def cone_from_config(cfg) -> ConeSpec:
    """``cfg``: ``{"crf": [entry, ...], "beta": [b, ...]}`` or ``{"function": name, "d": 2, "beta": b}``."""
    if "crf" in cfg:
        crfs = tuple(crf_from_config(e) for e in cfg["crf"])
        beta = cfg.get("beta", [1.0] * len(crfs))
        if not isinstance(beta, (list, tuple)):
            beta = [beta] * len(crfs)
        return ConeSpec(crfs, tuple(beta))
    d = int(cfg.get("d", 2))
    c = crf_from_config(cfg)
    return ConeSpec((c,) * (d - 1), (float(cfg.get("beta", 1.0)),) * (d - 1))


def load_cone(path) -> ConeSpec:
    """Read a cone from a JSON file."""
    return cone_from_config(json.loads(Path(path).read_text(encoding="utf-8")))


def resolve_cone(ref: str, d: int = 2, beta: float = 1.0) -> ConeSpec:
    """A catalog name, or a path to a JSON cone file."""
    p = Path(ref)
    if p.suffix == ".json" or p.exists():
        return load_cone(p)
    return ConeSpec.uniform(ref, d, beta)
