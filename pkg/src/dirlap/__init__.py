"""dirlap: directional Laplacian modelling on the half-unit hypersphere.

Density evaluation, sampling, maximum-likelihood fitting, EM-trained
mixtures with directional K-means initialization, and an underdetermined
instantaneous audio source-separation pipeline built on MDCT masking.
"""

__version__ = "0.1.0"

from .backends import backend_name
from .dld import (
    AngularDataset,
    DldParams,
    FitConfig,
    FitResult,
    dld_log_likelihood,
    dld_log_pdf,
    dld_pdf,
    fit_dld,
)
from .metrics import SeparationScores, bss_scores, fit_vmf, pearson_chi_square
from .mixture import (
    DldMixture,
    MixtureFitResult,
    directional_kmeans,
    e_step,
    fit_mixture,
    m_step,
    mixture_pdf,
)
from .sampling import sample_dld, sample_dld_1d, spherical_to_unit, unit_to_spherical
from .special import (
    KLookupTable,
    RatioClampWarning,
    bessel_like_integral,
    build_k_lookup,
    default_k_lookup,
    gamma_function,
    invert_ratio,
    normalization_constant,
)

__all__ = [
    "__version__",
    "backend_name",
    "AngularDataset",
    "DldParams",
    "FitConfig",
    "FitResult",
    "dld_log_likelihood",
    "dld_log_pdf",
    "dld_pdf",
    "fit_dld",
    "SeparationScores",
    "bss_scores",
    "fit_vmf",
    "pearson_chi_square",
    "DldMixture",
    "MixtureFitResult",
    "directional_kmeans",
    "e_step",
    "fit_mixture",
    "m_step",
    "mixture_pdf",
    "sample_dld",
    "sample_dld_1d",
    "spherical_to_unit",
    "unit_to_spherical",
    "KLookupTable",
    "RatioClampWarning",
    "bessel_like_integral",
    "build_k_lookup",
    "default_k_lookup",
    "gamma_function",
    "invert_ratio",
    "normalization_constant",
]
