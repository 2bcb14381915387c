"""Complex Gaussian distributions and their pure-imaginary limit.

For a projection with rows ``phi_1..phi_n`` the rows are factored as
``P = rho @ Psi`` with ``Psi`` a basis of their span. On the span the form
restricts to a Gram matrix ``G`` with positive definite imaginary part, and
the normalized density ``exp(-(i/2) s^T G^{-1} s)`` on R^k has covariance
``-i G``. Moments follow from Wick's theorem with that pair value and are
pushed forward along ``rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, NumericalDegeneracyError, ShapeError, TruncationError
from .model import BilinearForm, Projection, TestFunction, restrict_form
from .moments import (
    CylDistribution,
    MomentFunctional,
    check_convergence,
    full_moments,
    project,
    pushforward,
)
from .polytensor import SymTensor, contract, sorted_indices, wick_pairings

RANK_RTOL = 1e-10
DEFAULT_SCHEDULE = (0.2, 0.1, 0.05, 0.025)


@dataclass(frozen=True, eq=False)
class FactoredProjection:
    """``P = rho @ Psi`` with ``rho`` (n x k) injective and ``Psi`` (k x N) of full row rank."""

    rho: np.ndarray
    psi: np.ndarray
    space: object = None

    @property
    def rank(self):
        return self.psi.shape[0]

    @property
    def basis(self):
        return [TestFunction(self.space, r) for r in self.psi]


def factor_projection(proj, rtol=RANK_RTOL):
    """Rank-revealing factorization of the projection rows via the SVD.

    The basis rows are orthonormal, so the Gram matrix of any form on them is
    as well conditioned as the form itself.
    """
    p = proj.matrix
    u, s, vt = np.linalg.svd(p, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        k = 0
    else:
        k = int(np.sum(s > rtol * s[0]))
    rho = u[:, :k] * s[:k]
    psi = vt[:k]
    scale = np.max(np.linalg.norm(p, axis=1))
    if k and np.max(np.abs(rho @ psi - p)) > max(RANK_RTOL * scale, 1e-300) * 10:
        raise NumericalDegeneracyError("projection factorization failed to reconstruct its rows")
    return FactoredProjection(rho, psi, proj.space)


def sqrt_det_branch(m):
    """Square root of ``det m`` continuous on matrices with positive definite Hermitian part.

    Such matrices have their spectrum in the open right half-plane (the
    numerical range lies there), where the principal square root is
    continuous, so the product of principal roots of the eigenvalues is
    continuous too and equals 1 at the identity.
    """
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        return 1 + 0j
    herm = (m + m.conj().T) / 2
    if np.linalg.eigvalsh(herm)[0] <= 0:
        raise DomainError("Hermitian part is not positive definite")
    return complex(np.prod(np.sqrt(np.linalg.eigvals(m))))


def wick_tensor(pair, rank):
    """Rank-``rank`` moment tensor of a centered Gaussian with pair matrix ``pair``."""
    pair = np.asarray(pair, dtype=complex)
    k = pair.shape[0]
    if rank % 2:
        return SymTensor.zeros(k, rank)
    if rank == 0:
        return SymTensor.scalar(k, 1 + 0j)
    idx = np.array(sorted_indices(k, rank), dtype=np.intp)
    total = np.zeros(len(idx), dtype=complex)
    for matching in wick_pairings(rank).pairings:
        term = np.ones(len(idx), dtype=complex)
        for a, b in matching:
            term *= pair[idx[:, a], idx[:, b]]
        total += term
    return SymTensor(k, rank, {tuple(i): v for i, v in zip(idx.tolist(), total)})


def wick_functional(pair, degree):
    k = np.asarray(pair).shape[0]
    return MomentFunctional(k, [wick_tensor(pair, r) for r in range(degree + 1)])


def _trivial_functional(n, degree):
    return MomentFunctional(n, [SymTensor.scalar(n, 1 + 0j)] + [SymTensor.zeros(n, r) for r in range(1, degree + 1)])


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    form: BilinearForm
    max_degree: int = 8

    def __post_init__(self):
        if not self.form.strictly_positive:
            raise DomainError("complex Gaussian needs a positive definite imaginary part")


def gaussian_project(spec, proj):
    """Moment functional of the complex Gaussian on one projection."""
    fact = factor_projection(proj)
    if fact.rank == 0:
        return _trivial_functional(proj.n, spec.max_degree)
    gram = restrict_form(spec.form, fact.psi)
    if np.linalg.eigvalsh(gram.imag)[0] <= 0:
        raise NumericalDegeneracyError("restricted Gram matrix lost its positive imaginary part")
    base = wick_functional(-1j * gram, spec.max_degree)
    return pushforward(fact.rho, base)


def direct_project(spec, proj):
    """Wick moments straight from ``-i P B P^T``, bypassing the factorization."""
    pair = -1j * (proj.matrix @ spec.form.matrix @ proj.matrix.T)
    return wick_functional(pair, spec.max_degree)


def partition_function(gram, cfg=None):
    """``sqrt_det(i G^{-1} / 2 pi)`` times the quadrature of the unnormalized weight.

    Equals 1 exactly when the branch of the square root is right; exposed to
    test that branch against brute-force integration.
    """
    from .oracle import integrate_weight

    gram = np.atleast_2d(np.asarray(gram, dtype=complex))
    expo = 1j * np.linalg.inv(gram)
    return sqrt_det_branch(expo / (2 * np.pi)) * integrate_weight(gram, cfg)


class GaussianDistribution(CylDistribution):
    kind = "gaussian"

    def __init__(self, form, max_degree=None):
        super().__init__(form.space, max_degree)
        self.spec = GaussianSpec(form, self.max_degree)

    @property
    def form(self):
        return self.spec.form

    def _project(self, proj):
        return gaussian_project(self.spec, proj)


def green_function(dist, k):
    """``F_k = i^k M_k`` over the model basis; odd orders of a centered Gaussian are exactly zero."""
    return full_moments(dist, k).scale(1j**k)


@dataclass
class GeneratingSeries:
    value: complex
    terms: list  # (degree, coefficient) pairs

    def to_pairs(self):
        return [(k, [c.real, c.imag]) for k, c in self.terms]


def generating_functional(dist, phi, degree):
    """Degree-``degree`` Taylor value of ``Z(phi) = sum_k (i^k / k!) <M_k, phi^k>``."""
    coeffs = np.asarray(getattr(phi, "coeffs", phi))
    if np.iscomplexobj(coeffs):
        raise DomainError("generating functional takes a real test function")
    if coeffs.shape != (dist.space.dim,):
        raise ShapeError(f"test function of shape {coeffs.shape} for dimension {dist.space.dim}")
    if degree > dist.max_degree:
        raise TruncationError(f"degree {degree} exceeds truncation {dist.max_degree}")
    mu = project(dist, Projection.identity(dist.space))
    terms = []
    for k in range(degree + 1):
        m_phi = contract(mu[k], [coeffs] * k)
        terms.append((k, complex(1j**k * m_phi / math.factorial(k))))
    return GeneratingSeries(sum(c for _, c in terms), terms)


def gaussian_closed_form(form, phi):
    """``exp((i/2) B(phi, phi))``, the untruncated generating functional."""
    coeffs = np.asarray(getattr(phi, "coeffs", phi))
    return complex(np.exp(0.5j * form(coeffs, coeffs)))


@dataclass(frozen=True, eq=False)
class ImaginaryGaussianSpec:
    """Real form plus an epsilon schedule for the ``B + i eps E`` regularization."""

    form: BilinearForm
    schedule: tuple = DEFAULT_SCHEDULE
    order: int = 1
    regulator: np.ndarray = None
    max_degree: int = 8
    conv_tol: float = 0.5

    def __post_init__(self):
        if np.any(self.form.matrix.imag != 0):
            raise DomainError("pure imaginary Gaussian takes a real form")
        sched = tuple(float(e) for e in self.schedule)
        if not sched or any(e <= 0 for e in sched):
            raise DomainError("epsilon schedule must be positive")
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise DomainError("epsilon schedule must be strictly decreasing")
        if len(sched) != 1 and len(sched) < max(3, self.order + 2):
            raise DomainError(f"schedule of length {len(sched)} is too short for order {self.order}")
        object.__setattr__(self, "schedule", sched)
        reg = np.eye(self.form.space.dim) if self.regulator is None else np.asarray(self.regulator, dtype=float)
        if reg.shape != (self.form.space.dim,) * 2 or np.any(np.abs(reg - reg.T) > 1e-12):
            raise DomainError("regulator must be a real symmetric matrix on the model space")
        if np.linalg.eigvalsh(reg)[0] <= 0:
            raise DomainError("regulator must be positive definite")
        object.__setattr__(self, "regulator", reg)

    def regularized(self, eps):
        b = self.form.matrix.real + 1j * eps * self.regulator
        return GaussianSpec(BilinearForm(self.form.space, b), self.max_degree)


@dataclass
class LimitResult:
    functional: MomentFunctional
    per_eps: list  # (eps, MomentFunctional)
    report: object = None  # ConvergenceReport, None for a single-eps schedule
    residuals: list = field(default_factory=list)  # extrapolation residual per degree
    prefactors: list = field(default_factory=list)  # |sqrt_det(i G^{-1} / 2 pi)| per eps

    def diagnostics(self):
        out = {
            "eps": [e for e, _ in self.per_eps],
            "residuals": self.residuals,
            "prefactor_abs": self.prefactors,
        }
        if self.report is not None:
            out["convergence"] = self.report.to_dict()
        return out


def imaginary_limit(spec, proj):
    """Extrapolate the regularized Gaussian moments to ``eps = 0``.

    Raises :class:`ConvergenceError` when the real form is degenerate on the
    span of the projection: the finite-dimensional density then has no limit
    (its normalization blows up like ``eps^{-1/2}`` per null direction).
    """
    from .oracle import extrapolate_eps

    fact = factor_projection(proj)
    per_eps, prefactors = [], []
    for eps in spec.schedule:
        gspec = spec.regularized(eps)
        per_eps.append((eps, gaussian_project(gspec, proj)))
        if fact.rank:
            gram = restrict_form(gspec.form, fact.psi)
            prefactors.append(abs(sqrt_det_branch(1j * np.linalg.inv(gram) / (2 * np.pi))))
    if len(spec.schedule) == 1:
        return LimitResult(per_eps[0][1], per_eps, prefactors=prefactors)

    report = check_convergence([f for _, f in per_eps], spec.conv_tol, relative=True)
    n = proj.n
    tensors, residuals = [], []
    for k in range(spec.max_degree + 1):
        samples = [(eps, f.tensors[k].values()) for eps, f in per_eps]
        ext = extrapolate_eps(samples, spec.order)
        residuals.append(float(np.max(np.abs(ext.residual), initial=0.0)))
        vals = np.atleast_1d(ext.value)
        if k % 2:
            tensors.append(SymTensor.zeros(n, k))
        else:
            tensors.append(SymTensor(n, k, dict(zip(sorted_indices(n, k), (complex(v) for v in vals)))))
    tensors[0] = SymTensor.scalar(n, 1 + 0j)
    result = LimitResult(MomentFunctional(n, tensors), per_eps, report, residuals, prefactors)

    if fact.rank:
        g0 = restrict_form(spec.form, fact.psi)
        sv = np.linalg.svd(g0, compute_uv=False)
        if sv[-1] <= RANK_RTOL * max(sv[0], 1e-300):
            diag = result.diagnostics()
            diag["gram_singular_values"] = sv.tolist()
            raise ConvergenceError("real form is degenerate on the projected subspace", diag)
    if not report.converged:
        raise ConvergenceError("regularized moments do not settle", result.diagnostics())
    return result


def imaginary_project(spec, proj):
    return imaginary_limit(spec, proj).functional


class ImaginaryGaussian(CylDistribution):
    """The ``eps -> 0`` limit family of complex Gaussians."""

    kind = "limit_family"

    def __init__(self, spec):
        super().__init__(spec.form.space, spec.max_degree)
        self.spec = spec

    def _project(self, proj):
        return imaginary_project(self.spec, proj)
