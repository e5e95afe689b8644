"""Elementary-symmetric-polynomial calculus on positive eigenvalue lists.

All operations are pure functions of small (n <= 4) eigenvalue tuples.
Sigma values are computed by the coefficient recurrence of prod(1 + x_i t),
which is stable for positive entries; subset enumeration lives only in the
test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_DIM = 4

# Fixed tolerances for the whole suite (double precision, n <= 4).
TOL_REL = 1e-10
TOL_ABS_SCALE = 1e-10


@dataclass(frozen=True)
class EigenList:
    """Ordered positive n-tuple, sorted descending on construction."""

    values: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("eigenvalue list must be one-dimensional")
        if not 1 <= vals.size <= MAX_DIM:
            raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {vals.size}")
        if not np.all(vals > 0.0):
            raise ValueError("all eigenvalues must be strictly positive")
        vals = np.sort(vals)[::-1].copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "n", vals.size)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]


def as_eigenlist(lam) -> EigenList:
    if isinstance(lam, EigenList):
        return lam
    return EigenList(np.asarray(lam, dtype=float))


def esp_batched(vals: np.ndarray) -> np.ndarray:
    """All elementary symmetric polynomials along the last axis.

    vals: (..., m) -> (..., m+1) with out[..., j] = sigma_j.
    """
    vals = np.asarray(vals, dtype=float)
    m = vals.shape[-1]
    out = np.zeros(vals.shape[:-1] + (m + 1,), dtype=float)
    out[..., 0] = 1.0
    for i in range(m):
        x = vals[..., i]
        for j in range(min(i + 1, m), 0, -1):
            out[..., j] += x * out[..., j - 1]
    return out


def sigma_all(lam) -> np.ndarray:
    """[sigma_0, ..., sigma_n] of the eigenvalue list."""
    lam = as_eigenlist(lam)
    return esp_batched(lam.values)


def _sigma_of(vals: np.ndarray, k: int) -> float:
    # sigma_{-1} := 0 and sigma_k := 0 for k beyond the list length.
    if k < 0 or k > vals.size:
        return 0.0
    return float(esp_batched(vals)[k])


def sigma_excl(k: int, lam, excl) -> float:
    """sigma_k of the list with up to two indices excluded."""
    lam = as_eigenlist(lam)
    excl = tuple(excl)
    if len(set(excl)) != len(excl):
        raise ValueError("excluded indices must be distinct")
    if len(excl) > 2:
        raise ValueError("at most two indices may be excluded")
    for i in excl:
        if not 0 <= i < lam.n:
            raise ValueError(f"index {i} out of range for n={lam.n}")
    keep = [i for i in range(lam.n) if i not in excl]
    return _sigma_of(lam.values[keep], k)


def operator_F(lam, k: int) -> float:
    """F = -sigma_k(lam^{-1})^{1/k}, the negative sigma_k-quotient operator."""
    lam = as_eigenlist(lam)
    _check_k(k, lam.n)
    recip = 1.0 / lam.values
    return -_sigma_of(recip, k) ** (1.0 / k)


def F_gradient(lam, k: int) -> np.ndarray:
    """Diagonal first derivatives of F at a diagonal matrix, all positive."""
    lam = as_eigenlist(lam)
    _check_k(k, lam.n)
    recip = 1.0 / lam.values
    sk = _sigma_of(recip, k)
    grad = np.empty(lam.n)
    for i in range(lam.n):
        rest = np.delete(recip, i)
        grad[i] = (1.0 / k) * sk ** (1.0 / k - 1.0) * _sigma_of(rest, k - 1) / lam.values[i] ** 2
    return grad


def F_hessian_pair(lam, k: int, i: int, j: int) -> float:
    """Off-diagonal second derivative F^{ij,ji}; strictly negative."""
    lam = as_eigenlist(lam)
    n = lam.n
    _check_k(k, n)
    if i == j:
        raise ValueError("indices must be distinct")
    for idx in (i, j):
        if not 0 <= idx < n:
            raise ValueError(f"index {idx} out of range for n={n}")
    chi = lam.values
    s_n = _sigma_of(chi, n)
    s_nk = _sigma_of(chi, n - k)
    rest = np.delete(chi, [i, j])
    ratio = s_nk / s_n
    return (
        (1.0 / k)
        * ratio ** (1.0 / k - 1.0)
        * (s_n * _sigma_of(rest, n - k - 2) - s_nk * _sigma_of(rest, n - 2))
        / s_n**2
    )


def garding_gap(mu, tau, k: int) -> float:
    """Slack in Garding's inequality; nonnegative on the positive cone."""
    mu = as_eigenlist(mu)
    tau = as_eigenlist(tau)
    if mu.n != tau.n:
        raise ValueError("mu and tau must have the same dimension")
    _check_k(k, mu.n)
    lhs = 0.0
    for jx in range(mu.n):
        lhs += tau.values[jx] * _sigma_of(np.delete(mu.values, jx), k - 1)
    lhs /= k
    rhs = _sigma_of(tau.values, k) ** (1.0 / k) * _sigma_of(mu.values, k) ** (1.0 - 1.0 / k)
    return lhs - rhs


def _g_derivatives(lam: np.ndarray, k: int):
    """First and second derivatives of g = sigma_k^{1/k} at lam."""
    n = lam.size
    sk = _sigma_of(lam, k)
    gi = np.empty(n)
    for i in range(n):
        gi[i] = (1.0 / k) * sk ** (1.0 / k - 1.0) * _sigma_of(np.delete(lam, i), k - 1)
    gij = np.empty((n, n))
    for i in range(n):
        si = _sigma_of(np.delete(lam, i), k - 1)
        for j in range(n):
            sj = _sigma_of(np.delete(lam, j), k - 1)
            term = (1.0 / k) * (1.0 / k - 1.0) * sk ** (1.0 / k - 2.0) * si * sj
            if i != j:
                term += (
                    (1.0 / k)
                    * sk ** (1.0 / k - 1.0)
                    * _sigma_of(np.delete(lam, [i, j]), k - 2)
                )
            gij[i, j] = term
    return gi, gij


def concavity_matrix(lam, k: int) -> np.ndarray:
    """M_ij = g_ij + (g_i/lam_j) delta_ij for g = sigma_k^{1/k}; PSD."""
    lam = as_eigenlist(lam)
    _check_k(k, lam.n)
    gi, gij = _g_derivatives(lam.values, k)
    return gij + np.diag(gi / lam.values)


def f_correction_matrix(chi, k: int) -> np.ndarray:
    """M_ij = f_{chi_i chi_j} + (f_{chi_i}/chi_j) delta_ij for
    f = -(sigma_{n-k}/sigma_n)^{1/k}; negative semidefinite.

    With lam = 1/chi and g = sigma_k^{1/k}(lam) this equals
    -diag(lam^2) (g_ij + g_i/lam_i delta_ij) diag(lam^2) entrywise, which
    we evaluate from the closed-form g derivatives.
    """
    chi = as_eigenlist(chi)
    _check_k(k, chi.n)
    lam = 1.0 / chi.values
    gi, gij = _g_derivatives(lam, k)
    n = chi.n
    M = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            # f_i = g_i lam_i^2 ; f_ij = -g_ij lam_i^2 lam_j^2 - 2 g_i lam_i^3 delta_ij
            val = -gij[i, j] * lam[i] ** 2 * lam[j] ** 2
            if i == j:
                val += -2.0 * gi[i] * lam[i] ** 3 + gi[i] * lam[i] ** 2 * lam[j]
            M[i, j] = val
    return M


def rank_one_split_matrix(lam, k: int):
    """Matrix A_ii = sigma_{k;i}, A_ij = sigma_{k;i,j} and its rank-one
    reconstruction sum over k-subsets; returns (A, reconstruction, max |diff|)."""
    lam = as_eigenlist(lam)
    n = lam.n
    _check_k(k, n)
    chi = lam.values
    A = np.empty((n, n))
    for i in range(n):
        A[i, i] = chi[i] * _sigma_of(np.delete(chi, i), k - 1)
        for j in range(n):
            if j != i:
                A[i, j] = chi[i] * chi[j] * _sigma_of(np.delete(chi, [i, j]), k - 2)
    recon = np.zeros((n, n))
    import itertools

    for subset in itertools.combinations(range(n), k):
        weight = float(np.prod(chi[list(subset)]))
        E = np.zeros((n, n))
        for i in subset:
            for j in subset:
                E[i, j] = 1.0
        recon += weight * E
    return A, recon, float(np.max(np.abs(A - recon)))


def y_group_gap(chi, k: int, j: int):
    """The displayed identity controlling F^{ii} by F^{i1,1i}.

    Returns (L, R) with
      L = chi_1 [s_n s_{n-k-2}(chi|1,j) - s_{n-k} s_{n-2}(chi|1,j)]
          + s_{n-k} s_{n-1}(chi|j) - s_{n-k-1}(chi|j) s_n,
      R = -s_n s_{n-k-1}(chi|1,j);
    L == R and R <= 0. Index 0 plays the role of the largest direction.
    """
    chi = as_eigenlist(chi)
    n = chi.n
    if not 1 <= k < n:
        raise ValueError("requires 1 <= k < n")
    if j == 0 or not 0 < j < n:
        raise ValueError("j must be a nonzero index in range")
    vals = chi.values
    s_n = _sigma_of(vals, n)
    s_nk = _sigma_of(vals, n - k)
    no_j = np.delete(vals, j)
    no_1j = np.delete(vals, [0, j])
    L = (
        vals[0]
        * (s_n * _sigma_of(no_1j, n - k - 2) - s_nk * _sigma_of(no_1j, n - 2))
        + s_nk * _sigma_of(no_j, n - 1)
        - _sigma_of(no_j, n - k - 1) * s_n
    )
    R = -s_n * _sigma_of(no_1j, n - k - 1)
    return L, R


def binom(n: int, k: int) -> float:
    return float(math.comb(n, k))


def _check_k(k: int, n: int):
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
