"""Randomized self-check suites: compatibility, functoriality, Wick versus quadrature."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gaussian import GaussianDistribution, gaussian_project, wick_functional
from .model import BilinearForm, LinearMap, ModelSpace, Projection, restrict_form
from .moments import check_compatibility, max_entry_gap, pushforward
from .oracle import integrate_monomials
from .polytensor import index_to_exponents, sorted_indices

COMPAT_TOL = 1e-10
FUNCTOR_TOL = 1e-12
ORACLE_RTOL = 1e-6
ORACLE_ATOL = 1e-8


def random_form(rng, dim, im_floor=0.5, re_scale=1.0):
    """Complex symmetric form with ``Im B >= im_floor * I``."""
    x = rng.uniform(-re_scale, re_scale, (dim, dim)) / np.sqrt(dim)
    w = rng.normal(size=(dim, dim)) * 0.5
    im = im_floor * np.eye(dim) + w @ w.T / dim
    return BilinearForm(ModelSpace(dim), (x + x.T) / 2 + 1j * im)


def random_projection(rng, space, rows, deficient=False):
    """Random unit-norm rows; ``deficient`` builds them from fewer independent directions.

    Unit rows keep moment magnitudes O(1) so absolute residuals stay meaningful.
    """
    if deficient:
        rank = int(rng.integers(0, min(rows, space.dim)))
        mat = rng.normal(size=(rows, rank)) @ rng.normal(size=(rank, space.dim))
        mat = np.zeros((rows, space.dim)) if rank == 0 else mat
    else:
        mat = rng.normal(size=(rows, space.dim))
    return Projection(space, unit_rows(mat))


def unit_norm_form(form):
    """Rescale to spectral norm 1; with unit-norm rows every pair value is then at most 1."""
    return BilinearForm(form.space, form.matrix / np.linalg.norm(form.matrix, 2))


def unit_rows(mat):
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    return np.divide(mat, norms, out=np.zeros_like(mat), where=norms > 0)


def random_gram(rng, k, im_floor=0.5, re_scale=1.0):
    return random_form(rng, k, im_floor, re_scale).matrix


def close(a, b, rtol=ORACLE_RTOL, atol=ORACLE_ATOL):
    err = abs(a - b)
    return err <= atol or err <= rtol * abs(b)


@dataclass
class SuiteResult:
    name: str
    trials: int
    worst: float = 0.0
    tol: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return {
            "name": self.name,
            "trials": self.trials,
            "worst": self.worst,
            "tol": self.tol,
            "passed": self.passed,
            "failures": self.failures,
        }


def compatibility_suite(trials, rng, max_dim=6, max_rows=4, max_degree=6, sabotage=False):
    out = SuiteResult("compatibility", trials, tol=COMPAT_TOL)
    for t in range(trials):
        dim = int(rng.integers(1, max_dim + 1))
        n = int(rng.integers(1, max_rows + 1))
        m = int(rng.integers(1, max_rows + 1))
        degree = int(rng.integers(0, max_degree + 1))
        form = random_form(rng, dim)
        proj = random_projection(rng, form.space, n, deficient=bool(rng.integers(0, 2)))
        lam = LinearMap(unit_rows(rng.normal(size=(m, n))))
        dist = GaussianDistribution(form, degree)
        base = None
        if sabotage:
            base = gaussian_project(dist.spec, proj)
            if base.max_degree >= 2:
                base.tensors[2] = base.tensors[2].scale(-1)
            else:
                base.tensors[0] = base.tensors[0].scale(-1)
        res = check_compatibility(dist, proj, lam, base=base)
        out.worst = max(out.worst, res)
        if not res < COMPAT_TOL:
            out.failures.append(
                {
                    "trial": t,
                    "residual": res,
                    "form": [[[z.real, z.imag] for z in row] for row in form.matrix],
                    "projection": proj.matrix.tolist(),
                    "map": lam.matrix.tolist(),
                    "max_degree": degree,
                }
            )
    return out


def functoriality_suite(trials, rng, max_rows=4, max_degree=6):
    out = SuiteResult("functoriality", trials, tol=FUNCTOR_TOL)
    for t in range(trials):
        p, n, m = (int(x) for x in rng.integers(1, max_rows + 1, size=3))
        degree = int(rng.integers(0, max_degree + 1))
        mu = wick_functional(random_gram(rng, p) * -1j, degree)
        kappa = LinearMap(unit_rows(rng.normal(size=(n, p))))
        lam = LinearMap(unit_rows(rng.normal(size=(m, n))))
        gap = max_entry_gap(pushforward(lam.compose(kappa), mu), pushforward(lam, pushforward(kappa, mu)))
        out.worst = max(out.worst, gap)
        if not gap < FUNCTOR_TOL:
            out.failures.append({"trial": t, "gap": gap, "kappa": kappa.matrix.tolist(), "map": lam.matrix.tolist()})
    return out


def oracle_suite(trials, rng, max_k=3, max_degree=6, cfg=None):
    """Projected Wick moments against quadrature of the projected density."""
    out = SuiteResult("wick_vs_oracle", trials, tol=ORACLE_RTOL)
    for t in range(trials):
        k = int(rng.integers(1, max_k + 1))
        dim = k + int(rng.integers(0, 3))
        form = random_form(rng, dim)
        q, _ = np.linalg.qr(rng.normal(size=(dim, k)))
        proj = Projection(form.space, q.T)
        gram = restrict_form(form, proj.matrix)
        dist = GaussianDistribution(form, max_degree)
        mu = gaussian_project(dist.spec, proj)
        idx = [i for r in range(0, max_degree + 1, 2) for i in sorted_indices(k, r)]
        quad = integrate_monomials(gram, [index_to_exponents(i, k) for i in idx], cfg)
        worst = 0.0
        for i, ref in zip(idx, quad):
            got = complex(mu.tensors[len(i)][i])
            err = abs(got - ref)
            worst = max(worst, err / max(abs(ref), ORACLE_ATOL / ORACLE_RTOL))
            if not close(got, ref):
                out.failures.append(
                    {
                        "trial": t,
                        "index": list(i),
                        "wick": [got.real, got.imag],
                        "oracle": [ref.real, ref.imag],
                        "gram": [[[z.real, z.imag] for z in row] for row in gram],
                    }
                )
        out.worst = max(out.worst, worst)
    return out
