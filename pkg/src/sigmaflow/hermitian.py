"""Small fixed-size complex Hermitian matrix algebra.

Eigenvalues (plain and relative to a positive background), principal
minors, and mixed discriminants realizing wedge-product ratios of
constant-coefficient forms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .symfun import MAX_DIM, esp_batched

HERMITICITY_TOL = 1e-14


class DomainError(ValueError):
    """Raised when a positivity or shape precondition fails."""


@dataclass(frozen=True)
class HermitianMatrix:
    entries: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        A = np.asarray(self.entries, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("entries must form a square matrix")
        n = A.shape[0]
        if not 1 <= n <= MAX_DIM:
            raise ValueError(f"dimension must be in [1, {MAX_DIM}]")
        scale = max(1.0, float(np.max(np.abs(A))))
        if np.max(np.abs(A - A.conj().T)) > HERMITICITY_TOL * scale:
            raise ValueError("matrix is not Hermitian")
        A = 0.5 * (A + A.conj().T)
        A.flags.writeable = False
        object.__setattr__(self, "entries", A)
        object.__setattr__(self, "n", n)

    def require_positive(self) -> "HermitianMatrix":
        if eigvals(self)[-1] <= 0.0:
            raise DomainError("matrix is not positive definite")
        return self


def as_hermitian(A) -> HermitianMatrix:
    if isinstance(A, HermitianMatrix):
        return A
    return HermitianMatrix(np.asarray(A))


def eigvals_batched(A: np.ndarray) -> np.ndarray:
    """Real eigenvalues, descending, of Hermitian matrices (..., n, n).

    n <= 2 uses the closed form; larger n goes through batched eigvalsh.
    """
    A = np.asarray(A)
    n = A.shape[-1]
    if n == 1:
        return A[..., 0, 0].real[..., None].astype(float)
    if n == 2:
        a = A[..., 0, 0].real
        d = A[..., 1, 1].real
        half = 0.5 * (a + d)
        rad = np.sqrt(np.maximum(0.25 * (a - d) ** 2 + np.abs(A[..., 0, 1]) ** 2, 0.0))
        return np.stack([half + rad, half - rad], axis=-1)
    return np.linalg.eigvalsh(A)[..., ::-1]


def eigvals(A) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, sorted descending."""
    A = as_hermitian(A)
    return eigvals_batched(A.entries)


def eigvals_metric(A, G) -> np.ndarray:
    """Eigenvalues of the pencil (A, G) with G positive definite."""
    A = as_hermitian(A)
    G = as_hermitian(G)
    if A.n != G.n:
        raise DomainError("dimension mismatch")
    Linv = metric_whitener(G)
    B = Linv @ A.entries @ Linv.conj().T
    return eigvals_batched(0.5 * (B + B.conj().T))


def metric_whitener(G) -> np.ndarray:
    """L^{-1} for the Cholesky factor G = L L*; fails if G is not positive."""
    G = as_hermitian(G)
    try:
        L = np.linalg.cholesky(G.entries)
    except np.linalg.LinAlgError as exc:
        raise DomainError("background metric is not positive definite") from exc
    return np.linalg.inv(L)


def minor_dets(A, I):
    """(det A, det A_I, det A_complement); Fischer: det A <= det A_I det A_Ibar."""
    A = as_hermitian(A).require_positive()
    I = sorted(set(I))
    if not I or len(I) >= A.n:
        raise ValueError("index set must be a proper nonempty subset")
    for i in I:
        if not 0 <= i < A.n:
            raise ValueError(f"index {i} out of range")
    comp = [i for i in range(A.n) if i not in I]
    M = A.entries
    d = float(np.linalg.det(M).real)
    dI = float(np.linalg.det(M[np.ix_(I, I)]).real)
    dC = float(np.linalg.det(M[np.ix_(comp, comp)]).real)
    return d, dI, dC


def diag_sigma_gap(A, k: int) -> float:
    """sigma_k(A^{-1}) - sigma_k(diag(A)^{-1}); nonnegative for positive A."""
    A = as_hermitian(A).require_positive()
    n = A.n
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}]")
    lam = eigvals(A)
    sig = esp_batched(lam)
    full = sig[n - k] / sig[n]
    diag = float(esp_batched(1.0 / np.diag(A.entries).real)[k])
    return float(full - diag)


def _expand_factors(factors):
    mats = []
    for A, mult in factors:
        A = as_hermitian(A)
        if mult < 0:
            raise ValueError("multiplicities must be nonnegative")
        mats.extend([A.entries] * int(mult))
    return mats


def mixed_discriminant(factors) -> float:
    """D(A^{(1)}, ..., A^{(n)}) = (1/n!) sum_pi det(column i from A^{(pi(i))}),
    normalized so D(A, ..., A) = det A."""
    mats = _expand_factors(factors)
    n = mats[0].shape[0] if mats else 0
    if len(mats) != n:
        raise ValueError("total multiplicity must equal the dimension")
    total = 0.0
    for perm in itertools.permutations(range(n)):
        M = np.empty((n, n), dtype=complex)
        for col in range(n):
            M[:, col] = mats[perm[col]][:, col]
        total += np.linalg.det(M).real
    return float(total / math.factorial(n))


def wedge_ratio(factors, G=None) -> float:
    """(A_1^{m_1} ^ ... ^ A_r^{m_r}) / omega^n for constant forms,
    with omega the form of the positive matrix G (identity by default)."""
    mats = _expand_factors(factors)
    n = mats[0].shape[0] if mats else 0
    if G is None:
        detG = 1.0
    else:
        G = as_hermitian(G).require_positive()
        if G.n != n:
            raise DomainError("dimension mismatch")
        detG = float(np.linalg.det(G.entries).real)
    return mixed_discriminant([(m, 1) for m in mats]) / detG


def mixed_discriminant_batched(mats) -> np.ndarray:
    """Mixed discriminant of a list of n stacked matrices (..., n, n)."""
    n = mats[0].shape[-1]
    if len(mats) != n:
        raise ValueError("need exactly n factors")
    total = None
    for perm in itertools.permutations(range(n)):
        M = np.stack([mats[perm[col]][..., :, col] for col in range(n)], axis=-1)
        d = np.linalg.det(M).real
        total = d if total is None else total + d
    return total / math.factorial(n)
