"""SINR-optimal demixing and evaluation against a known ground truth.

Demixing with the pseudoinverse of the mixing matrix is suboptimal for
source recovery in noise.  The optimal demixer in the
signal-to-interference-plus-noise sense is ``B = A^H cov(X)^+``, and —
remarkably — it only needs the *directions* of the mixing columns and the
observation covariance, both of which survive the scale, permutation and
signal/noise-split ambiguities of the noisy model.  Rescaling columns of
the estimate merely rescales rows of ``B``, and SINR is scale invariant,
so any column-direction estimate (e.g. from :mod:`pegica.recovery`)
yields the same per-source SINR as the oracle built from the true matrix.
In the noise-free case the formula collapses to the pseudoinverse.

Evaluation helpers compute per-source SINR analytically from ``(A,
Sigma)`` with unit-variance sources:

``SINR_k(b) = |b A_k|^2 / (||b A||^2 - |b A_k|^2 + b Sigma b^H)``

plus Monte-Carlo mean-squared error and correlation diagnostics, and a
column matcher that resolves the permutation/phase ambiguity before
scoring.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .cumulants import SampleSet
from .errors import DimensionMismatchError
from .linalg import hermitian_pinv, to_db, vector_angle_deg

__all__ = [
    "DemixMatrix",
    "SinrReport",
    "sample_cov",
    "analytic_cov",
    "sinr_optimal_demix",
    "pinv_demix",
    "optimal_sinr",
    "sinr_k",
    "mse_k",
    "correlation_k",
    "match_columns",
    "sinr_loss",
]


@dataclass(frozen=True)
class DemixMatrix:
    """An m-by-n demixing matrix tagged with how it was constructed."""

    B: np.ndarray
    provenance: str  # "sinr_opt" | "a_pinv" | "custom"

    def apply(self, X):
        """Recover sources from N-by-n samples: returns ``X @ B^T``."""
        return np.asarray(X) @ self.B.T


@dataclass(frozen=True)
class SinrReport:
    """Per-source SINR of a demixer, against the model optimum.

    Indices follow the *true* source order; ``permutation[j]`` is the true
    source matched to estimate row j, and ``phases[j]`` the unit factor
    aligning the j-th recovered column with that source's column.
    """

    per_source_sinr: np.ndarray
    per_source_sinr_db: np.ndarray
    sinr_loss_db: np.ndarray
    permutation: np.ndarray
    phases: np.ndarray
    mean_sinr_db: float
    mean_sinr_loss_db: float


def sample_cov(samples: SampleSet):
    """Sample covariance ``E[x x^H]`` of centered samples (1/N convention)."""
    if not isinstance(samples, SampleSet):
        raise DimensionMismatchError("sample_cov expects a SampleSet")
    if not samples.is_centered:
        raise ValueError("sample_cov requires centered samples")
    X = samples.data
    cov = (X.T @ X.conj()) / samples.n_samples
    return 0.5 * (cov + cov.conj().T)


def analytic_cov(model):
    """Observation covariance ``A A^H + Sigma`` of a ground-truth model."""
    cov = model.A @ model.A.conj().T + model.Sigma
    return 0.5 * (cov + cov.conj().T)


def sinr_optimal_demix(A_hat, cov_X) -> DemixMatrix:
    """SINR-optimal demixer ``A_hat^H cov_X^+`` from column directions only.

    ``cov_X`` must be Hermitian (asymmetry beyond 1e-8 relative is
    rejected); rank deficiency is fine since the pseudoinverse is used.
    """
    A_hat = np.atleast_2d(np.asarray(A_hat))
    cov_X = np.asarray(cov_X)
    if cov_X.shape != (A_hat.shape[0],) * 2:
        raise DimensionMismatchError("covariance shape does not match A_hat")
    scale = np.linalg.norm(cov_X)
    if scale > 0 and np.linalg.norm(cov_X - cov_X.conj().T) > 1e-8 * scale:
        raise ValueError("covariance must be Hermitian")
    cov_pinv, _, _ = hermitian_pinv(cov_X)
    return DemixMatrix(B=A_hat.conj().T @ cov_pinv, provenance="sinr_opt")


def pinv_demix(A_hat) -> DemixMatrix:
    """Plain pseudoinverse demixer (the noise-free optimum)."""
    return DemixMatrix(B=np.linalg.pinv(np.atleast_2d(np.asarray(A_hat))), provenance="a_pinv")


def sinr_k(b, model, k):
    """Analytic SINR of row ``b`` for source ``k`` under the model.

    Unit-variance sources are assumed.  Returns ``inf`` for perfect
    isolation with zero noise, and 0.0 when the row carries no target
    signal at all.  Exactly scale invariant in ``b``.
    """
    b = np.asarray(b).ravel()
    if not 0 <= k < model.m:
        raise IndexError(f"source index {k} out of range for m={model.m}")
    if b.shape[0] != model.n:
        raise DimensionMismatchError("row length does not match model dimension")
    bA = b @ model.A
    target = float(np.abs(bA[k]) ** 2)
    interference = float(np.sum(np.abs(bA) ** 2) - target)
    noise = float(np.real(b @ model.Sigma @ np.conj(b)))
    denom = interference + noise
    if target == 0.0:
        return 0.0
    if denom <= 0.0:
        return float("inf")
    return target / denom


def optimal_sinr(model):
    """Per-source SINR of the oracle demixer ``A^H cov(X)^+``."""
    B_opt = sinr_optimal_demix(model.A, analytic_cov(model)).B
    return np.array([sinr_k(B_opt[k], model, k) for k in range(model.m)])


def mse_k(b, S, X, k):
    """Monte-Carlo mean squared error ``mean |S_k - b x|^2`` on paired draws."""
    b = np.asarray(b).ravel()
    S = np.atleast_2d(np.asarray(S))
    X = np.atleast_2d(np.asarray(X))
    if S.shape[0] != X.shape[0]:
        raise DimensionMismatchError("latent and observed batches differ in length")
    s_hat = X @ b
    return float(np.mean(np.abs(S[:, k] - s_hat) ** 2))


def correlation_k(b, S, X, k):
    """Sample correlation between source k and the recovered signal ``b x``.

    ``E[S_k conj(s_hat)] / (std(S_k) std(s_hat))``; zero by convention
    when the recovered signal has no variance.
    """
    b = np.asarray(b).ravel()
    S = np.atleast_2d(np.asarray(S))
    X = np.atleast_2d(np.asarray(X))
    if S.shape[0] != X.shape[0]:
        raise DimensionMismatchError("latent and observed batches differ in length")
    s = S[:, k]
    s_hat = X @ b
    sigma_s = np.sqrt(np.mean(np.abs(s) ** 2))
    sigma_hat = np.sqrt(np.mean(np.abs(s_hat) ** 2))
    if sigma_hat == 0.0 or sigma_s == 0.0:
        return 0.0
    value = np.mean(s * np.conj(s_hat)) / (sigma_s * sigma_hat)
    return complex(value) if np.iscomplexobj(s_hat) or np.iscomplexobj(s) else float(value)


def _abs_cosines(A_hat, A_true):
    num = np.abs(A_hat.conj().T @ A_true)
    norms_hat = np.linalg.norm(A_hat, axis=0)
    norms_true = np.linalg.norm(A_true, axis=0)
    return num / np.outer(norms_hat, norms_true)


def _greedy_assignment(cos):
    m = cos.shape[0]
    perm = np.full(m, -1, dtype=int)
    used_rows = np.zeros(m, dtype=bool)
    used_cols = np.zeros(m, dtype=bool)
    work = cos.copy()
    for _ in range(m):
        i, j = np.unravel_index(np.argmax(np.where(
            np.outer(~used_rows, ~used_cols), work, -1.0)), work.shape)
        perm[i] = j
        used_rows[i] = True
        used_cols[j] = True
    return perm


def _exhaustive_assignment(cos):
    m = cos.shape[0]
    best, best_perm = -np.inf, None
    rows = np.arange(m)
    for p in itertools.permutations(range(m)):
        total = cos[rows, list(p)].sum()
        if total > best:
            best, best_perm = total, np.array(p, dtype=int)
    return best_perm


def match_columns(A_hat, A_true):
    """Match estimated columns to true ones, modulo permutation and phase.

    Greedy maximum-|cosine| matching, falling back to exhaustive
    assignment (m <= 8) whenever any greedy match dips below |cos| 0.9.

    Returns
    -------
    permutation : ndarray of int
        ``permutation[j]`` is the true column matched to ``A_hat[:, j]``.
    phases : ndarray
        Unit factors making ``phases[j] * <A_hat_j, A_true_pj>`` real
        positive (signs in the real case).
    angles_deg : ndarray
        Angle between each matched pair, in degrees.
    """
    A_hat = np.atleast_2d(np.asarray(A_hat))
    A_true = np.atleast_2d(np.asarray(A_true))
    if A_hat.shape != A_true.shape:
        raise DimensionMismatchError("column sets must have identical shapes")
    m = A_hat.shape[1]
    if np.linalg.matrix_rank(A_hat) < m or np.linalg.matrix_rank(A_true) < m:
        raise ValueError("column matching requires full column rank")
    cos = _abs_cosines(A_hat, A_true)
    perm = _greedy_assignment(cos)
    if m <= 8 and np.any(cos[np.arange(m), perm] < 0.9):
        perm = _exhaustive_assignment(cos)
    phases = np.empty(m, dtype=complex)
    angles = np.empty(m)
    for j in range(m):
        a_hat = A_hat[:, j]
        a = A_true[:, perm[j]]
        inner = np.sum(a_hat * np.conj(a))
        phases[j] = np.conj(inner) / abs(inner) if inner != 0 else 1.0
        angles[j] = vector_angle_deg(a_hat, a)
    if not (np.iscomplexobj(A_hat) or np.iscomplexobj(A_true)):
        phases = phases.real
    return perm, phases, angles


def sinr_loss(achieved_sinr, model, permutation=None, phases=None) -> SinrReport:
    """Score per-source SINR against the model optimum.

    ``achieved_sinr`` is indexed by true source; losses are in dB
    (optimal minus achieved, elementwise), nonnegative up to float noise
    because the optimum is a per-source maximizer.
    """
    achieved = np.asarray(achieved_sinr, dtype=float)
    opt = optimal_sinr(model)
    if achieved.shape != opt.shape:
        raise DimensionMismatchError("one achieved SINR per source required")
    ach_db = np.array([to_db(x) for x in achieved])
    opt_db = np.array([to_db(x) for x in opt])
    loss_db = opt_db - ach_db
    m = achieved.shape[0]
    if permutation is None:
        permutation = np.arange(m)
    if phases is None:
        phases = np.ones(m)
    return SinrReport(
        per_source_sinr=achieved,
        per_source_sinr_db=ach_db,
        sinr_loss_db=loss_db,
        permutation=np.asarray(permutation, dtype=int),
        phases=np.asarray(phases),
        mean_sinr_db=float(ach_db.mean()),
        mean_sinr_loss_db=float(loss_db.mean()),
    )
