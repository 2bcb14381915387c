"""Moment-functional engine for cylindrical distributions and complex Gaussians."""

from .errors import CylfiError
from .gaussian import (
    GaussianDistribution,
    GaussianSpec,
    ImaginaryGaussian,
    ImaginaryGaussianSpec,
    factor_projection,
    gaussian_project,
    generating_functional,
    green_function,
    imaginary_limit,
    imaginary_project,
    partition_function,
    sqrt_det_branch,
)
from .kernels import LatticeSpec, klein_gordon_euclidean, klein_gordon_minkowski, real_gaussian_measure
from .model import (
    BilinearForm,
    LinearMap,
    ModelSpace,
    Projection,
    TestFunction,
    apply_projection_dual,
    restrict_form,
)
from .moments import (
    CylDistribution,
    MomentFunctional,
    check_compatibility,
    check_convergence,
    evaluate,
    pair_green,
    project,
    pushforward,
)
from .oracle import QuadratureConfig, extrapolate_eps, integrate_moment
from .polytensor import (
    Polynomial,
    SymTensor,
    compose_linear,
    contract,
    fourier_poly,
    poly_from_tensors,
    wick_pairings,
)

__version__ = "0.1.0"
