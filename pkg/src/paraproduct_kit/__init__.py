"""Wavelet renormalization of pointwise products on dyadic grids.

The package splits a product of two expansions into four bilinear
components (carrying the split into a non-cancellative diagonal part and a
mean-zero remainder), provides the sequence-space norms used to classify
the pieces, and runs the vector-field experiment coupling gradient-type
and divergence-free factors.
"""

from .atoms import Atom, atom_verify, finite_atomic_decompose
from .backend import BACKEND
from .divcurl import (AlmostDiagonalEntry, VectorField,
                      almost_diagonal_weight, curl_free_field,
                      div_curl_experiment, div_free_field, helmholtz_project,
                      riesz_apply)
from .fields import CoeffField, DyadicCube, GridFunction, TensorIndex
from .norms import (Exponents, Weight, bmo_alpha_norm, carleson_norm,
                    grand_maximal_function, grand_maximal_norm,
                    lipschitz_norm, lipschitz_plus_norm, lp_norm,
                    norm_report, sequence_hardy_norm, square_function)
from .paraproducts import (KernelProbe, ParaproductResult, kernel_probe,
                           molecule_check, paraproduct_component,
                           pi2_split_check, renormalize, separation_probes)
from .randfields import FieldSpec, Lcg64, random_field
from .transform import (analyze, base_realization, project_scales,
                        scaling_sample, synthesize, tensor_sample)
from .wavelets import (FilterBank, WaveletSystem, cascade_sample,
                       daubechies_system, haar_system, moment_integral)

__version__ = "0.1.0"

__all__ = [
    "Atom", "atom_verify", "finite_atomic_decompose",
    "BACKEND",
    "AlmostDiagonalEntry", "VectorField", "almost_diagonal_weight",
    "curl_free_field", "div_curl_experiment", "div_free_field",
    "helmholtz_project", "riesz_apply",
    "CoeffField", "DyadicCube", "GridFunction", "TensorIndex",
    "Exponents", "Weight", "bmo_alpha_norm", "carleson_norm",
    "grand_maximal_function", "grand_maximal_norm", "lipschitz_norm",
    "lipschitz_plus_norm", "lp_norm", "norm_report", "sequence_hardy_norm",
    "square_function",
    "KernelProbe", "ParaproductResult", "kernel_probe", "molecule_check",
    "paraproduct_component", "pi2_split_check", "renormalize",
    "separation_probes",
    "FieldSpec", "Lcg64", "random_field",
    "analyze", "base_realization", "project_scales", "scaling_sample",
    "synthesize", "tensor_sample",
    "FilterBank", "WaveletSystem", "cascade_sample", "daubechies_system",
    "haar_system", "moment_integral",
    "__version__",
]
