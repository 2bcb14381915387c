"""Finite-dimensional truncation of the test-function space and its dual.

A :class:`ModelSpace` of dimension ``N`` stands in for the Schwartz space.
Test functions are coefficient vectors in a fixed basis and the pairing
between a test function and an element of the dual is the Euclidean dot
product of coefficient vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeError

TOL_SYM = 1e-12
TOL_PSD = 1e-10


def _frozen(a, dtype):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelSpace:
    dim: int
    basis_labels: tuple = ()

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.dim!r}")
        labels = tuple(self.basis_labels) or tuple(f"e{j}" for j in range(self.dim))
        if len(labels) != self.dim:
            raise ShapeError(f"{len(labels)} basis labels for dimension {self.dim}")
        object.__setattr__(self, "basis_labels", labels)


@dataclass(frozen=True, eq=False)
class TestFunction:
    space: ModelSpace
    coeffs: np.ndarray

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        dtype = complex if np.iscomplexobj(c) else float
        c = _frozen(c, dtype)
        if c.shape != (self.space.dim,):
            raise ShapeError(f"coefficient vector of shape {c.shape}, expected ({self.space.dim},)")
        object.__setattr__(self, "coeffs", c)

    @property
    def is_real(self):
        return not np.iscomplexobj(self.coeffs)


def basis_function(space, j):
    c = np.zeros(space.dim)
    c[j] = 1.0
    return TestFunction(space, c)


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Real linear map R^n -> R^m stored as an m x n matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix))
        if np.iscomplexobj(m):
            if np.any(m.imag != 0):
                raise DomainError("linear maps between coordinate spaces are real")
            m = m.real
        if m.ndim != 2:
            raise ShapeError("linear map must be a matrix")
        object.__setattr__(self, "matrix", _frozen(m, float))

    @property
    def shape(self):
        return self.matrix.shape

    def compose(self, other):
        """``self ∘ other``: apply ``other`` first."""
        if self.shape[1] != other.shape[0]:
            raise ShapeError(f"cannot compose {self.shape} with {other.shape}")
        return LinearMap(self.matrix @ other.matrix)

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))


@dataclass(frozen=True, eq=False)
class Projection:
    """An ordered tuple of real test functions, i.e. a map S' -> R^n.

    Rows may be linearly dependent and ``n`` may exceed the model dimension.
    """

    space: ModelSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.matrix))
        if np.iscomplexobj(p):
            raise DomainError("projection rows must be real test functions")
        if p.ndim != 2 or p.shape[1] != self.space.dim:
            raise ShapeError(f"projection matrix of shape {p.shape} for dimension {self.space.dim}")
        if p.shape[0] < 1:
            raise ShapeError("projection needs at least one row")
        object.__setattr__(self, "matrix", _frozen(p, float))

    @classmethod
    def from_rows(cls, rows):
        rows = list(rows)
        if not rows:
            raise ShapeError("projection needs at least one row")
        space = rows[0].space
        for r in rows:
            if r.space != space:
                raise ShapeError("projection rows live in different model spaces")
            if not r.is_real:
                raise DomainError("projection rows must be real test functions")
        return cls(space, np.vstack([r.coeffs for r in rows]))

    @classmethod
    def identity(cls, space):
        return cls(space, np.eye(space.dim))

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def rows(self):
        return [TestFunction(self.space, r) for r in self.matrix]

    def then(self, lam):
        """The projection ``lam ∘ self``, with rows ``lam @ P``."""
        if lam.shape[1] != self.n:
            raise ShapeError(f"linear map {lam.shape} does not accept R^{self.n}")
        return Projection(self.space, lam.matrix @ self.matrix)


@dataclass(frozen=True, eq=False)
class BilinearForm:
    """Complex symmetric (not Hermitian) form on the model space.

    ``Im B`` must be positive semidefinite; ``strictly_positive`` records
    whether it is positive definite.
    """

    space: ModelSpace
    matrix: np.ndarray = field(repr=False)
    strictly_positive: bool = field(init=False, default=False)

    def __post_init__(self):
        b = np.asarray(self.matrix, dtype=complex)
        n = self.space.dim
        if b.shape != (n, n):
            raise ShapeError(f"form matrix of shape {b.shape} for dimension {n}")
        scale = max(np.linalg.norm(b), 1.0)
        if np.max(np.abs(b - b.T)) > TOL_SYM * scale:
            raise DomainError("bilinear form must be symmetric (B = B^T)")
        b = (b + b.T) / 2
        im = b.imag
        lam = np.linalg.eigvalsh(im)
        tol = TOL_PSD * max(np.linalg.norm(im, 2), 1e-300)
        if lam[0] < -tol:
            raise DomainError(f"imaginary part is not positive semidefinite (min eigenvalue {lam[0]:.3g})")
        object.__setattr__(self, "matrix", _frozen(b, complex))
        object.__setattr__(self, "strictly_positive", bool(lam[0] > tol))

    def __call__(self, phi, psi):
        return complex(_coeffs(phi) @ self.matrix @ _coeffs(psi))


def _coeffs(f):
    return f.coeffs if isinstance(f, TestFunction) else np.asarray(f)


def apply_projection_dual(proj, covector):
    """Image of a covector on R^n under the dual map, ``sum_i c_i * phi_i``."""
    c = np.asarray(covector, dtype=float)
    if c.shape != (proj.n,):
        raise ShapeError(f"covector of shape {c.shape}, projection has {proj.n} rows")
    return TestFunction(proj.space, c @ proj.matrix)


def restrict_form(form, funcs):
    """Gram matrix ``G_ab = B(psi_a, psi_b)`` of the form on the given functions."""
    funcs = list(funcs)
    for f in funcs:
        if isinstance(f, TestFunction) and f.space != form.space:
            raise ShapeError("test function from a different model space")
    if not funcs:
        return np.zeros((0, 0), dtype=complex)
    v = np.vstack([_coeffs(f) for f in funcs])
    if v.shape[1] != form.space.dim:
        raise ShapeError(f"vectors of length {v.shape[1]} for dimension {form.space.dim}")
    g = v @ form.matrix @ v.T
    return (g + g.T) / 2
