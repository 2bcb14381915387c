"""Sparse polynomials, symmetric tensors and pairing combinatorics.

Indices are 0-based throughout. A :class:`SymTensor` stores one value per
sorted index tuple; the value at an unsorted tuple is the value at its
sorted rearrangement. The coefficient isomorphism carries no powers of
``i``: ``P(s) = sum_k <T_k, s^{(x)k}>`` with the bracket summing over all
unsorted index tuples.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, ResourceError, ShapeError

MAX_WICK_ORDER = 12
MAX_DENSE_ENTRIES = 1 << 24


def _is_exact(c):
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


def _div(c, m):
    if _is_exact(c):
        return Fraction(c) / m
    return c / m


def multiplicity(idx):
    """Number of distinct rearrangements of an index tuple."""
    counts = Counter(idx)
    out = math.factorial(len(idx))
    for c in counts.values():
        out //= math.factorial(c)
    return out


def exponents_to_index(alpha):
    return tuple(j for j, a in enumerate(alpha) for _ in range(a))


def index_to_exponents(idx, nvars):
    alpha = [0] * nvars
    for j in idx:
        alpha[j] += 1
    return tuple(alpha)


class Polynomial:
    """Complex polynomial in ``nvars`` variables as a map exponent -> coefficient."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=None):
        if int(nvars) != nvars or nvars < 1:
            raise DomainError(f"nvars must be a positive integer, got {nvars!r}")
        self.nvars = int(nvars)
        clean = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.nvars:
                raise ShapeError(f"exponent {alpha} has length {len(alpha)}, expected {self.nvars}")
            if any(a < 0 for a in alpha):
                raise DomainError(f"negative exponent in {alpha}")
            if c != 0:
                clean[alpha] = clean.get(alpha, 0) + c
        self.terms = {a: c for a, c in clean.items() if c != 0}

    @classmethod
    def constant(cls, nvars, c=1):
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars, j):
        alpha = [0] * nvars
        alpha[j] = 1
        return cls(nvars, {tuple(alpha): 1})

    @property
    def degree(self):
        return max((sum(a) for a in self.terms), default=0)

    def is_zero(self):
        return not self.terms

    def __call__(self, s):
        s = np.asarray(s)
        if s.shape != (self.nvars,):
            raise ShapeError(f"point of shape {s.shape} for {self.nvars} variables")
        return sum(complex(c) * np.prod(s ** np.array(a)) for a, c in self.terms.items())

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __add__(self, other):
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, 0) + c
        return Polynomial(self.nvars, terms)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial(self.nvars, {a: c * other for a, c in self.terms.items()})
        if other.nvars != self.nvars:
            raise ShapeError("cannot multiply polynomials in different numbers of variables")
        terms = {}
        for a, c in self.terms.items():
            for b, d in other.terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                terms[key] = terms.get(key, 0) + c * d
        return Polynomial(self.nvars, terms)

    __rmul__ = __mul__

    def __repr__(self):
        if not self.terms:
            return f"Polynomial({self.nvars}, 0)"
        parts = []
        for a, c in sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0])):
            mono = "*".join(f"s{j + 1}" + (f"^{e}" if e > 1 else "") for j, e in enumerate(a) if e)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return f"Polynomial({self.nvars}, {' + '.join(parts)})"


@lru_cache(maxsize=64)
def sorted_indices(nvars, rank):
    return tuple(itertools.combinations_with_replacement(range(nvars), rank))


@lru_cache(maxsize=32)
def _dense_lookup(nvars, rank):
    """For every dense position, the position of its sorted tuple in ``sorted_indices``."""
    if nvars**rank > MAX_DENSE_ENTRIES:
        raise ResourceError(f"dense tensor {nvars}^{rank} exceeds {MAX_DENSE_ENTRIES} entries")
    if rank == 0:
        return np.zeros(1, dtype=np.intp)
    grid = np.indices((nvars,) * rank).reshape(rank, -1).T
    weights = nvars ** np.arange(rank)[::-1]
    codes = np.sort(grid, axis=1) @ weights
    canon = np.array(sorted_indices(nvars, rank), dtype=np.intp).reshape(-1, rank) @ weights
    # combinations_with_replacement emits codes in increasing order
    out = np.searchsorted(canon, codes)
    out.setflags(write=False)
    return out


class SymTensor:
    """Fully symmetric rank-``rank`` tensor over ``nvars`` coordinates."""

    __slots__ = ("nvars", "rank", "entries")

    def __init__(self, nvars, rank, entries=None):
        if nvars < 1 or rank < 0:
            raise DomainError(f"invalid tensor shape nvars={nvars}, rank={rank}")
        self.nvars = int(nvars)
        self.rank = int(rank)
        self.entries = {}
        for idx, v in (entries or {}).items():
            idx = tuple(sorted(int(i) for i in idx))
            if len(idx) != self.rank:
                raise ShapeError(f"index {idx} for a rank-{self.rank} tensor")
            if idx and (idx[0] < 0 or idx[-1] >= self.nvars):
                raise ShapeError(f"index {idx} out of range for {self.nvars} coordinates")
            if idx in self.entries:
                raise DomainError(f"duplicate entries for sorted index {idx}")
            self.entries[idx] = v

    def __getitem__(self, idx):
        return self.entries.get(tuple(sorted(idx)), 0)

    def __repr__(self):
        return f"SymTensor(nvars={self.nvars}, rank={self.rank}, entries={self.entries!r})"

    @classmethod
    def scalar(cls, nvars, value):
        return cls(nvars, 0, {(): value})

    @classmethod
    def zeros(cls, nvars, rank):
        return cls(nvars, rank)

    @classmethod
    def from_dense(cls, array, nvars=None, drop_below=0.0):
        """Read the sorted-index entries of a (symmetric) dense array."""
        a = np.asarray(array)
        rank = a.ndim
        if rank:
            nvars = a.shape[0]
        elif nvars is None:
            raise ShapeError("nvars is required for a rank-0 array")
        if any(d != nvars for d in a.shape):
            raise ShapeError(f"dense array of shape {a.shape} is not hypercubic")
        idx = sorted_indices(nvars, rank)
        if rank == 0:
            vals = [a.item()]
        else:
            vals = a[tuple(np.array(idx).T)]
        entries = {i: complex(v) for i, v in zip(idx, vals) if abs(v) > drop_below}
        return cls(nvars, rank, entries)

    def values(self):
        """Vector of values aligned with ``sorted_indices(nvars, rank)``."""
        return np.array([complex(self.entries.get(i, 0)) for i in sorted_indices(self.nvars, self.rank)])

    def to_dense(self):
        shape = (self.nvars,) * self.rank
        return self.values()[_dense_lookup(self.nvars, self.rank)].reshape(shape)

    def scale(self, factor):
        return SymTensor(self.nvars, self.rank, {i: v * factor for i, v in self.entries.items()})

    def is_symmetric_dense(self, tol=0.0):
        d = self.to_dense()
        return all(
            np.max(np.abs(d - np.transpose(d, p)), initial=0.0) <= tol
            for p in itertools.permutations(range(self.rank))
        )


def inner(a, b):
    """Full pairing ``sum over unsorted tuples a_J * b_J`` of two symmetric tensors."""
    if (a.nvars, a.rank) != (b.nvars, b.rank):
        raise ShapeError(f"cannot pair tensors ({a.nvars},{a.rank}) and ({b.nvars},{b.rank})")
    small, large = (a, b) if len(a.entries) <= len(b.entries) else (b, a)
    total = 0
    for idx, v in small.entries.items():
        w = large.entries.get(idx)
        if w is not None:
            total += multiplicity(idx) * v * w
    return total


def fourier_poly(poly):
    """Symmetric coefficient tensors ``T_0 .. T_D`` of a polynomial."""
    tensors = [SymTensor(poly.nvars, k) for k in range(poly.degree + 1)]
    for alpha, c in poly.terms.items():
        idx = exponents_to_index(alpha)
        tensors[len(idx)].entries[idx] = _div(c, multiplicity(idx))
    return tensors


def poly_from_tensors(tensors, nvars=None):
    """Inverse of :func:`fourier_poly`; an empty list is the zero polynomial."""
    tensors = list(tensors)
    if not tensors:
        return Polynomial(nvars or 1)
    nvars = tensors[0].nvars
    terms = {}
    for t in tensors:
        if t.nvars != nvars:
            raise ShapeError("tensors over different numbers of variables")
        for idx, v in t.entries.items():
            alpha = index_to_exponents(idx, nvars)
            terms[alpha] = terms.get(alpha, 0) + v * multiplicity(idx)
    return Polynomial(nvars, terms)


def compose_linear(poly, lam):
    """``Q(s) = P(lam @ s)`` for ``P`` on R^m and ``lam`` an m x n map."""
    mat = np.asarray(getattr(lam, "matrix", lam))
    m, n = mat.shape
    if poly.nvars != m:
        raise ShapeError(f"polynomial in {poly.nvars} variables composed with a {m}x{n} map")
    forms = []
    for row in mat:
        terms = {}
        for i, x in enumerate(row):
            if x != 0:
                alpha = [0] * n
                alpha[i] = 1
                terms[tuple(alpha)] = float(x)
        forms.append(Polynomial(n, terms))
    powers = [[Polynomial.constant(n)] for _ in range(m)]
    result = Polynomial(n)
    for alpha, c in poly.terms.items():
        term = Polynomial.constant(n, c)
        for j, e in enumerate(alpha):
            while len(powers[j]) <= e:
                powers[j].append(powers[j][-1] * forms[j])
            term = term * powers[j][e]
        result = result + term
    return result


@dataclass(frozen=True)
class PairingSet:
    order: int
    pairings: tuple

    def __len__(self):
        return len(self.pairings)


def _matchings(items):
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for i, other in enumerate(rest):
        for tail in _matchings(rest[:i] + rest[i + 1 :]):
            yield ((first, other),) + tail


@lru_cache(maxsize=None)
def _pairings_cached(k):
    return tuple(_matchings(tuple(range(k))))


def wick_pairings(k, max_order=MAX_WICK_ORDER):
    """All ``(k-1)!!`` perfect matchings of ``0..k-1``, first element paired first."""
    if k < 0 or k % 2:
        raise DomainError(f"perfect matchings need an even order, got {k}")
    if k > max_order:
        raise ResourceError(f"order {k} exceeds the pairing cap {max_order}")
    return PairingSet(k, _pairings_cached(k))


def double_factorial(n):
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def wick_moment(pair_matrix, idx):
    """Gaussian moment ``E[s_i1 ... s_ik]`` as a sum over matchings of pair values."""
    k = len(idx)
    if k % 2:
        return 0j
    total = 0j
    for matching in wick_pairings(k).pairings:
        term = 1 + 0j
        for a, b in matching:
            term *= pair_matrix[idx[a], idx[b]]
        total += term
    return total


def contract(tensor, vectors):
    """Full contraction of a symmetric tensor with ``rank`` vectors."""
    vectors = [np.asarray(v) for v in vectors]
    if len(vectors) != tensor.rank:
        raise ShapeError(f"{len(vectors)} vectors for a rank-{tensor.rank} tensor")
    for v in vectors:
        if v.shape != (tensor.nvars,):
            raise ShapeError(f"vector of shape {v.shape} for {tensor.nvars} coordinates")
    out = tensor.to_dense()
    for v in vectors:
        out = np.tensordot(v, out, axes=(0, 0))
    return complex(out)


def push_dense(array, mat):
    """Apply ``mat`` to every slot of a dense tensor."""
    out = np.asarray(array, dtype=complex)
    for _ in range(out.ndim):
        # tensordot moves the contracted slot to the end; after rank steps order is restored
        out = np.tensordot(out, mat, axes=(0, 1))
    return out
