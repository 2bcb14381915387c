"""Brute-force quadrature of complex Gaussian integrals and epsilon extrapolation.

The weight ``exp(-(i/2) s^T G^{-1} s) = exp(-(1/2) s^T A s)`` with
``A = i G^{-1}``. If ``Im G`` is positive definite then so is ``Re A``
(``-G^{-1}`` has positive definite imaginary part too), hence the weight
decays like a real Gaussian with precision ``Re A`` and the tensor-product
trapezoid rule converges super-algebraically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ExtrapolationError, InsufficientDataError, QuadratureError
from .gaussian import sqrt_det_branch

MAX_DIM = 3
GRID_BUDGET = 1 << 22
BOUNDARY_RTOL = 1e-10


@dataclass(frozen=True)
class QuadratureConfig:
    """``points_per_axis=None`` picks 2001 in 1-D and the largest odd count within the grid budget otherwise."""

    points_per_axis: int = None
    box_halfwidth_sigmas: float = 12.0

    def __post_init__(self):
        p = self.points_per_axis
        if p is not None and (p < 3 or p % 2 == 0):
            raise DomainError(f"points_per_axis must be odd and >= 3, got {p}")
        if self.box_halfwidth_sigmas <= 0:
            raise DomainError("box half-width must be positive")

    def points(self, dim):
        if self.points_per_axis is not None:
            return self.points_per_axis
        p = min(2001, int(round(GRID_BUDGET ** (1.0 / dim))))
        return p if p % 2 else p - 1


class _Grid:
    def __init__(self, gram, cfg):
        gram = np.atleast_2d(np.asarray(gram, dtype=complex))
        k = gram.shape[0]
        if gram.shape != (k, k):
            raise DomainError(f"Gram matrix must be square, got {gram.shape}")
        if not 1 <= k <= MAX_DIM:
            raise DomainError(f"grid quadrature supports 1..{MAX_DIM} dimensions, got {k}")
        if np.linalg.eigvalsh((gram.imag + gram.imag.T) / 2)[0] <= 0:
            raise DomainError("Gram matrix needs a positive definite imaginary part")
        expo = 1j * np.linalg.inv(gram)
        expo = (expo + expo.T) / 2
        decay = np.linalg.eigvalsh(expo.real)
        if decay[0] <= 0:
            raise QuadratureError("integrand does not decay: Re(i G^-1) is not positive definite")
        cfg = cfg or QuadratureConfig()
        p = cfg.points(k)
        half = cfg.box_halfwidth_sigmas / math.sqrt(decay[0])
        self.axis = np.linspace(-half, half, p)
        h = self.axis[1] - self.axis[0]
        trap = np.full(p, h)
        trap[[0, -1]] = h / 2
        self.k, self.expo = k, expo

        q = np.zeros((p,) * k, dtype=complex)
        for a in range(k):
            for b in range(k):
                shape_a = [1] * k
                shape_b = [1] * k
                shape_a[a] = p
                shape_b[b] = p
                q = q + expo[a, b] * self.axis.reshape(shape_a) * self.axis.reshape(shape_b)
        self.weight = np.exp(-0.5 * q)
        tw = np.ones((p,) * k)
        for a in range(k):
            shape = [1] * k
            shape[a] = p
            tw = tw * trap.reshape(shape)
        self.quad = self.weight * tw
        self.prefactor = sqrt_det_branch(expo / (2 * np.pi))

        self._table = None

    def moment_table(self, top):
        """``T[a1..ak] = sum quad * s1^a1 ... sk^ak`` for all exponents up to ``top``."""
        if self._table is None or self._table.shape[0] <= top:
            powers = self.axis[:, None] ** np.arange(top + 1)
            out = self.quad
            for _ in range(self.k):
                out = np.tensordot(out, powers, axes=(0, 0))
            self._table = out
        return self._table

    def moment(self, alpha):
        return complex(self.moment_table(max(alpha))[tuple(alpha)])

    def _abs_integrand(self, poly, axes, weight):
        grids = np.meshgrid(*axes, indexing="ij", sparse=True)
        vals = np.zeros(weight.shape, dtype=complex)
        for alpha, c in poly.terms.items():
            term = complex(c)
            for g, a in zip(grids, alpha):
                term = term * g**a
            vals = vals + term
        return np.abs(vals * weight)

    def boundary_ratio(self, poly):
        """Largest ``|P w|`` on the box faces relative to its peak (peak from a subsample)."""
        p = self.axis.size
        stride = max(1, p // 64)
        centre = p // 2
        sub = np.unique(np.r_[np.arange(centre % stride, p, stride), centre])
        peak = self._abs_integrand(poly, [self.axis[sub]] * self.k, self.weight[np.ix_(*[sub] * self.k)]).max()
        edge = 0.0
        for a in range(self.k):
            for end in (0, -1):
                axes = [self.axis] * self.k
                axes[a] = self.axis[[end]]
                face = np.take(self.weight, [end], axis=a)
                edge = max(edge, self._abs_integrand(poly, axes, face).max())
        if peak == 0:
            return 0.0 if edge == 0 else np.inf
        return edge / peak


def integrate_weight(gram, cfg=None):
    """Trapezoid value of ``int exp(-(i/2) G^{-1}(s, s)) ds`` without normalization."""
    grid = _Grid(gram, cfg)
    return grid.moment((0,) * grid.k)


def integrate_moment(gram, poly, cfg=None):
    """Normalized ``sqrt_det(i G^{-1}/2pi) * int P(s) exp(-(i/2) G^{-1}(s,s)) ds``."""
    return integrate_moments(gram, [poly], cfg)[0]


def integrate_moments(gram, polys, cfg=None):
    grid = _Grid(gram, cfg)
    out = []
    for poly in polys:
        if poly.nvars != grid.k:
            raise DomainError(f"polynomial in {poly.nvars} variables for a {grid.k}-dimensional Gram")
        ratio = grid.boundary_ratio(poly)
        if ratio > BOUNDARY_RTOL:
            raise QuadratureError(f"integrand at the box boundary is {ratio:.2e} of its peak; enlarge the box")
        if poly.terms:
            grid.moment_table(max(max(a) for a in poly.terms))
        total = sum(complex(c) * grid.moment(alpha) for alpha, c in poly.terms.items())
        out.append(grid.prefactor * total)
    return out


def integrate_monomials(gram, exponents, cfg=None):
    """Normalized moments for a batch of exponent tuples, sharing one grid."""
    from .polytensor import Polynomial

    grid = _Grid(gram, cfg)
    exponents = [tuple(a) for a in exponents]
    if exponents:
        grid.moment_table(max(max(a) for a in exponents))
    out = []
    for alpha in exponents:
        ratio = grid.boundary_ratio(Polynomial(grid.k, {tuple(alpha): 1}))
        if ratio > BOUNDARY_RTOL:
            raise QuadratureError(f"integrand at the box boundary is {ratio:.2e} of its peak; enlarge the box")
        out.append(grid.prefactor * grid.moment(alpha))
    return out


@dataclass
class Extrapolation:
    value: object
    residual: object
    condition: float


def _neville_at_zero(xs, ys):
    ys = [np.asarray(y, dtype=complex) for y in ys]
    p = list(ys)
    n = len(xs)
    for level in range(1, n):
        for i in range(n - level):
            j = i + level
            p[i] = (xs[j] * p[i] - xs[i] * p[i + 1]) / (xs[j] - xs[i])
    return p[0]


def extrapolate_eps(values, order=1, max_condition=1e12):
    """Richardson extrapolation of samples ``(eps, value)`` to ``eps = 0``.

    The degree-``order`` interpolant through the ``order + 1`` smallest
    ``eps`` gives the value; the same fit on the next window (shifted by one
    sample) gives the residual estimate. Values may be arrays.
    """
    values = sorted(((float(e), v) for e, v in values), key=lambda t: t[0])
    if order < 0:
        raise DomainError("extrapolation order must be nonnegative")
    if len(values) < order + 2:
        raise InsufficientDataError(f"order {order} needs {order + 2} samples, got {len(values)}")
    xs = [e for e, _ in values]
    if len(set(xs)) != len(xs):
        raise ExtrapolationError("epsilon samples must be distinct")
    window = np.array(xs[: order + 1])
    vander = np.vander(window / window.max(), order + 1, increasing=True)
    cond = float(np.linalg.cond(vander))
    if not np.isfinite(cond) or cond > max_condition:
        raise ExtrapolationError(f"ill-conditioned extrapolation (condition {cond:.3g})", cond)
    head = _neville_at_zero(xs[: order + 1], [v for _, v in values[: order + 1]])
    shifted = _neville_at_zero(xs[1 : order + 2], [v for _, v in values[1 : order + 2]])
    value = head if head.ndim else complex(head)
    return Extrapolation(value, np.abs(head - shifted), cond)
