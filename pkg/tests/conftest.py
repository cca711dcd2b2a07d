"""Shared helpers: independent numerical oracles used to check the library.

These deliberately avoid the library's own code paths: finite differences
for gradients, explicit pseudoinverses, exhaustive assignment for column
matching, and plain eigendecompositions.
"""

import itertools

import numpy as np
import pytest

from pegica import (
    GroundTruthModel,
    finite_kurtosis_panel,
    noise_cov,
    random_mixing,
    source_spec,
    stream,
)


def fd_gradient(func, u, h=1e-4):
    """Central finite differences of a scalar function of a real or
    complex vector, differentiating with respect to the real coordinates
    only (matches the gradient convention used for complex signals)."""
    u = np.asarray(u)
    g = np.zeros(u.shape, dtype=complex)
    for i in range(u.shape[0]):
        e = np.zeros(u.shape, dtype=u.dtype)
        e[i] = 1.0
        g[i] = (func(u + h * e) - func(u - h * e)) / (2.0 * h)
    return g if np.iscomplexobj(u) else g.real


def fd_jacobian(vec_func, u, h=1e-6):
    """Central-difference Jacobian of a vector function of a real vector."""
    u = np.asarray(u, dtype=float)
    cols = []
    for i in range(u.shape[0]):
        e = np.zeros_like(u)
        e[i] = 1.0
        cols.append((vec_func(u + h * e) - vec_func(u - h * e)) / (2.0 * h))
    return np.column_stack(cols)


def brute_force_assignment(score):
    """Permutation maximizing the summed score, by full enumeration."""
    m = score.shape[0]
    rows = np.arange(m)
    best, best_perm = -np.inf, None
    for p in itertools.permutations(range(m)):
        total = score[rows, list(p)].sum()
        if total > best:
            best, best_perm = total, np.array(p, dtype=int)
    return best_perm


def moderate_panel(m):
    """Finite-kurtosis sources with |kappa4| <= 6, mixed sign.  Keeps the
    Monte-Carlo error of fourth-moment statistics small enough for tight
    absolute tolerances (bernoulli(0.05)'s kurtosis of ~15 comes with
    eighth moments in the thousands)."""
    families = ("laplace", "uniform", "exponential", "bernoulli(0.5)", "student_t(5)")
    reps = -(-m // len(families))
    return tuple(source_spec(t) for t in (families * reps)[:m])


def make_test_model(n=6, m=None, cond=3.0, noise_power=0.1, seed=0,
                    complex_phases=False, moderate=False):
    """Benchmark-style model restricted to finite-kurtosis sources, so the
    analytic oracle always applies."""
    m = n if m is None else m
    A = random_mixing(n, m, cond, stream(seed, "mixing"))
    if complex_phases:
        phases = np.exp(2j * np.pi * stream(seed, "phases").random(m))
        A = A.astype(complex) * phases
    sources = moderate_panel(m) if moderate else tuple(finite_kurtosis_panel(m))
    return GroundTruthModel(
        A=A,
        sources=sources,
        Sigma=noise_cov(A, noise_power),
        noise_power=noise_power,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
