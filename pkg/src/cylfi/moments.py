"""Moment functionals on polynomial spaces and the axioms of a distribution.

A :class:`MomentFunctional` is a linear functional on polynomials of degree
at most ``max_degree`` in ``nvars`` variables, stored as its moment tensors
``M_k[i1..ik] = <s_i1 ... s_ik>``. A :class:`CylDistribution` assigns one such
functional to every projection of the model space.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, ShapeError, TruncationError
from .model import LinearMap, Projection
from .polytensor import SymTensor, fourier_poly, inner, push_dense

DEFAULT_MAX_DEGREE = 8


def default_max_degree():
    return int(os.environ.get("CYLFI_MAX_DEGREE", DEFAULT_MAX_DEGREE))


class MomentFunctional:
    """Truncated formal series ``M_0, ..., M_D`` of symmetric moment tensors."""

    __slots__ = ("nvars", "max_degree", "tensors")

    def __init__(self, nvars, tensors):
        tensors = list(tensors)
        if not tensors:
            raise ShapeError("a moment functional needs at least M_0")
        for k, t in enumerate(tensors):
            if t.rank != k or t.nvars != nvars:
                raise ShapeError(f"tensor {k} has rank {t.rank} over {t.nvars} coordinates")
        self.nvars = nvars
        self.max_degree = len(tensors) - 1
        self.tensors = tensors

    def __getitem__(self, k):
        if k > self.max_degree:
            raise TruncationError(f"moment of degree {k} beyond truncation {self.max_degree}")
        return self.tensors[k]

    def __repr__(self):
        return f"MomentFunctional(nvars={self.nvars}, max_degree={self.max_degree})"

    @property
    def mass(self):
        return complex(self.tensors[0][()])

    def dense(self, k):
        return self[k].to_dense()


def evaluate(functional, poly):
    """Value of the functional on a polynomial, ``sum_k <M_k, T_k>``."""
    if poly.nvars != functional.nvars:
        raise ShapeError(f"polynomial in {poly.nvars} variables, functional on R^{functional.nvars}")
    if poly.degree > functional.max_degree:
        raise TruncationError(
            f"polynomial of degree {poly.degree} exceeds truncation {functional.max_degree}"
        )
    return complex(sum(inner(m, t) for m, t in zip(functional.tensors, fourier_poly(poly))))


def pushforward(lam, functional):
    """Image of a functional under a linear map: ``M'_k = lam^{(x)k} M_k``."""
    mat = lam.matrix if isinstance(lam, LinearMap) else np.asarray(lam, dtype=float)
    if mat.shape[1] != functional.nvars:
        raise ShapeError(f"map {mat.shape} cannot act on R^{functional.nvars}")
    m = mat.shape[0]
    tensors = [SymTensor.scalar(m, functional.tensors[0][()])]
    for t in functional.tensors[1:]:
        if not t.entries:
            tensors.append(SymTensor.zeros(m, t.rank))
            continue
        tensors.append(SymTensor.from_dense(push_dense(t.to_dense(), mat)))
    return MomentFunctional(m, tensors)


class CylDistribution:
    """A family of moment functionals, one per projection of ``space``.

    Subclasses implement :meth:`_project`; :func:`project` is the public entry.
    """

    kind = "abstract"

    def __init__(self, space, max_degree=None):
        self.space = space
        self.max_degree = default_max_degree() if max_degree is None else int(max_degree)

    def _project(self, proj):
        raise NotImplementedError


def project(dist, proj):
    if proj.space != dist.space:
        raise ShapeError("projection and distribution live on different model spaces")
    return dist._project(proj)


def max_entry_gap(a, b):
    """Entrywise max ``|a_k - b_k|`` over all degrees present in both."""
    if a.nvars != b.nvars:
        raise ShapeError("functionals over different coordinate spaces")
    gap = 0.0
    for ta, tb in zip(a.tensors, b.tensors):
        va, vb = ta.values(), tb.values()
        if va.size:
            gap = max(gap, float(np.max(np.abs(va - vb))))
    return gap


def check_compatibility(dist, proj, lam, base=None):
    """Residual of ``mu_{lam∘pi} = lam_* mu_pi``; ``base`` may replace ``mu_pi``."""
    lam = lam if isinstance(lam, LinearMap) else LinearMap(lam)
    direct = project(dist, proj.then(lam))
    mu = project(dist, proj) if base is None else base
    return max_entry_gap(direct, pushforward(lam, mu))


def full_moments(dist, k):
    """``M_k`` of the distribution on the canonical full-basis projection."""
    if k > dist.max_degree:
        raise TruncationError(f"degree {k} exceeds truncation {dist.max_degree}")
    return project(dist, Projection.identity(dist.space))[k]


def pair_green(dist, k, g):
    """Value ``i^k <M_k, g>`` of the k-th Green function on a symmetric test tensor."""
    if g.rank != k or g.nvars != dist.space.dim:
        raise ShapeError(f"test tensor of rank {g.rank} over {g.nvars} coordinates")
    return complex(1j**k * inner(full_moments(dist, k), g))


@dataclass
class ConvergenceReport:
    converged: bool
    tol: float
    deltas: list = field(default_factory=list)  # deltas[k][r] = |M_k^(r+1) - M_k^(r)|_max

    @property
    def final(self):
        return [d[-1] if d else 0.0 for d in self.deltas]

    def to_dict(self):
        return {"converged": self.converged, "tol": self.tol, "deltas": self.deltas, "final": self.final}


def check_convergence(family, tol, relative=False):
    """Moment-wise Cauchy check of a sequence of functionals at one projection.

    With ``relative`` each delta is divided by ``max(1, max|M_k|)`` of the last member.
    """
    family = list(family)
    if len(family) < 3:
        raise InsufficientDataError(f"need at least 3 functionals, got {len(family)}")
    nvars, degree = family[0].nvars, family[0].max_degree
    for f in family:
        if (f.nvars, f.max_degree) != (nvars, degree):
            raise ShapeError("family members differ in nvars or truncation degree")
    deltas = []
    for k in range(degree + 1):
        vals = [f.tensors[k].values() for f in family]
        scale = max(1.0, float(np.max(np.abs(vals[-1]), initial=0.0))) if relative else 1.0
        deltas.append(
            [float(np.max(np.abs(b - a), initial=0.0)) / scale for a, b in zip(vals, vals[1:])]
        )
    converged = all(d[-1] < tol for d in deltas)
    return ConvergenceReport(converged, tol, deltas)
