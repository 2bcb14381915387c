"""Concrete bilinear forms: free lattice scalar fields and real Gaussian measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .gaussian import DEFAULT_SCHEDULE, GaussianDistribution, ImaginaryGaussianSpec
from .model import BilinearForm, ModelSpace


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic 1-D lattice of ``sites`` points with spacing ``spacing``."""

    sites: int
    spacing: float = 1.0
    mass: float = 1.0
    boundary: str = "periodic"

    def __post_init__(self):
        if self.sites < 2:
            raise DomainError(f"lattice needs at least 2 sites, got {self.sites}")
        if self.spacing <= 0:
            raise DomainError("lattice spacing must be positive")
        if self.mass < 0:
            raise DomainError("mass must be nonnegative")
        if self.boundary != "periodic":
            raise DomainError(f"unsupported boundary {self.boundary!r}")

    @property
    def space(self):
        return ModelSpace(self.sites, tuple(f"x{j}" for j in range(self.sites)))


def lattice_laplacian(spec):
    """``-Delta_h``: ``(2 delta_jk - delta_{j,k+1} - delta_{j,k-1}) / h^2`` with periodic wrap."""
    n = spec.sites
    shift = np.roll(np.eye(n), 1, axis=1)
    return (2 * np.eye(n) - shift - shift.T) / spec.spacing**2


def propagator(spec):
    """``(-Delta_h + m^2)^{-1}``; raises on the massless zero mode."""
    op = lattice_laplacian(spec) + spec.mass**2 * np.eye(spec.sites)
    lam = np.linalg.eigvalsh(op)
    if lam[0] <= 1e-12 * lam[-1]:
        raise SingularityError("-Delta + m^2 is singular (massless constant mode)")
    c = np.linalg.inv(op)
    return (c + c.T) / 2


def klein_gordon_euclidean(spec):
    """Form ``B = i C`` whose Gaussian is the Euclidean free field with covariance ``C``."""
    return BilinearForm(spec.space, 1j * propagator(spec))


def klein_gordon_minkowski(spec, schedule=DEFAULT_SCHEDULE, order=1, max_degree=8):
    """Real form ``(-Delta_h + m^2)^{-1}`` for the pure imaginary Gaussian."""
    form = BilinearForm(spec.space, propagator(spec).astype(complex))
    return ImaginaryGaussianSpec(form, tuple(schedule), order, max_degree=max_degree)


class MeasureBackedGaussian(GaussianDistribution):
    """Centered real Gaussian measure with covariance ``C``, embedded as ``B = i C``."""

    kind = "measure_backed"

    def __init__(self, covariance, space=None, max_degree=None):
        c = np.asarray(covariance)
        if np.iscomplexobj(c):
            if np.any(c.imag != 0):
                raise DomainError("covariance must be real")
            c = c.real
        c = np.atleast_2d(c.astype(float))
        if c.shape[0] != c.shape[1]:
            raise DomainError(f"covariance must be square, got {c.shape}")
        if np.max(np.abs(c - c.T), initial=0.0) > 1e-12 * max(np.abs(c).max(), 1.0):
            raise DomainError("covariance must be symmetric")
        if np.linalg.eigvalsh(c)[0] <= 0:
            raise DomainError("covariance must be positive definite")
        self.covariance = (c + c.T) / 2
        space = space or ModelSpace(c.shape[0])
        super().__init__(BilinearForm(space, 1j * self.covariance), max_degree)


def real_gaussian_measure(covariance, space=None, max_degree=None):
    return MeasureBackedGaussian(covariance, space, max_degree)
