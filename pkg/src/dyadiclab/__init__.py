"""Dyadic harmonic analysis at finite resolution.

Walsh-Paley and Walsh-Kaczmarz systems, (C, alpha) kernels and means,
cone-restricted maximal operators and the experiments built on them.
"""

__version__ = "0.1.0"

from .cesaro import (
    CesaroOrder,
    KernelTable,
    cesaro_kernel_definitional,
    cesaro_kernel_spectral,
    cesaro_number,
    cesaro_numbers,
    dirichlet_kernel,
    kernel_norm_survey,
)
from .cones import CRFSpec, ConeSpec, catalog, cone_contains, crf_validate, ln_index, nbar_of
from .dyadic import DyadicInterval, GroupPoint, SampledFunction, integrate, lp_norm, tau, xor_add
from .summation import (
    MaximalField,
    MeanParams,
    atom_validate,
    cesaro_mean,
    hardy_norm,
    martingale_maximal,
    maximal_over,
    partial_sum,
)
from .systems import (
    KACZMARZ,
    PALEY,
    Spectrum,
    SystemKind,
    fourier_coeffs,
    fwht,
    ifwht,
    kaczmarz,
    kaczmarz_perm,
    order,
    rademacher,
    walsh_paley,
)
