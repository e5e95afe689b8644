"""Randomized, seeded property tests for the algebraic inequalities that the
flow integrator relies on, runnable as a single command.

Each check draws eigenvalue lists or Hermitian matrices log-uniformly in
[1e-2, 1e2] over n in {2,3,4} and every admissible k, evaluates a normalized
slack (nonnegative means the inequality holds), and counts draws whose slack
falls below -1e-10.  All checks are theorems, so failures = 0 on a healthy
build.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .cone import constants_from_bounds
from .hermitian import eigvals_batched
from .symfun import esp_batched

TOL = 1e-10
_TINY = 1e-300


@dataclass(frozen=True)
class CheckResult:
    name: str
    statement: str
    trials: int
    failures: int
    worst_violation: float
    seed: int


@dataclass(frozen=True)
class SuiteReport:
    seed: int
    trials: int
    checks: tuple

    @property
    def failures(self) -> int:
        return sum(c.failures for c in self.checks)

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "trials": self.trials,
                "failures": self.failures,
                "checks": [asdict(c) for c in self.checks],
            },
            indent=2,
        )


# -- random draws -------------------------------------------------------------

def _loguniform(rng, shape, lo=1e-2, hi=1e2):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=shape))


def _random_hermitian(rng, T, n):
    R = rng.standard_normal((T, n, n))
    Q = rng.standard_normal((T, n, n))
    return 0.5 * (R + np.swapaxes(R, -1, -2)) + 0.5j * (Q - np.swapaxes(Q, -1, -2))


def _random_positive_hermitian(rng, T, n):
    """diag(d) + eps*S with eps sized to keep the matrix positive while
    leaving substantial off-diagonal mass (diagonal cases are trivial)."""
    d = _loguniform(rng, (T, n))
    S = _random_hermitian(rng, T, n)
    fro = np.sqrt(np.sum(np.abs(S) ** 2, axis=(-2, -1)))
    eps = 0.45 * d.min(axis=-1) / np.maximum(fro, _TINY)
    A = np.zeros((T, n, n), dtype=complex)
    idx = np.arange(n)
    A[:, idx, idx] = d
    return A + eps[:, None, None] * S


def _permute_conjugate(rng, A):
    """P A P^T with a random permutation per batch entry."""
    T, n = A.shape[0], A.shape[-1]
    perm = np.argsort(rng.random((T, n)), axis=1)
    rows = np.arange(T)[:, None, None]
    return A[rows, perm[:, :, None], perm[:, None, :]]


# -- batched sigma helpers ----------------------------------------------------

def _sig_excl1(vals, k):
    """sigma_k with one index removed, per index: (..., m) -> (..., m)."""
    m = vals.shape[-1]
    out = np.zeros(vals.shape)
    if not 0 <= k <= m - 1:
        return out
    for j in range(m):
        out[..., j] = esp_batched(np.delete(vals, j, axis=-1))[..., k]
    return out


def _sig_excl2(vals, k, i, j):
    """sigma_k with two fixed indices removed: (..., m) -> (...)."""
    m = vals.shape[-1]
    if not 0 <= k <= m - 2:
        return np.zeros(vals.shape[:-1])
    rest = np.delete(vals, [i, j], axis=-1)
    return esp_batched(rest)[..., k]


def _g_derivatives_batched(lam, k):
    """First/second derivatives of g = sigma_k^{1/k} at lam: (T,n) arrays."""
    T, n = lam.shape
    sk = esp_batched(lam)[..., k]
    si = _sig_excl1(lam, k - 1)
    gi = (1.0 / k) * sk[:, None] ** (1.0 / k - 1.0) * si
    gij = (
        (1.0 / k)
        * (1.0 / k - 1.0)
        * sk[:, None, None] ** (1.0 / k - 2.0)
        * si[:, :, None]
        * si[:, None, :]
    )
    for i in range(n):
        for j in range(i + 1, n):
            cross = (1.0 / k) * sk ** (1.0 / k - 1.0) * _sig_excl2(lam, k - 2, i, j)
            gij[:, i, j] += cross
            gij[:, j, i] += cross
    return sk, gi, gij


def _psd_slack(M, floor=None):
    """min eig / spectral norm; >= 0 iff positive semidefinite.

    floor: per-draw scale of the construction, so that an identically zero
    matrix (a legitimate equality case) is not normalized by its own
    roundoff."""
    eigs = eigvals_batched(M.astype(complex))
    norm = np.maximum(np.abs(eigs).max(axis=-1), _TINY)
    if floor is not None:
        norm = np.maximum(norm, floor)
    return eigs[..., -1] / norm


# -- check kernels (return normalized slack arrays; pass iff slack >= -TOL) ---

def _chk_minor_split(rng, T, n, k):
    # det A <= det A_I * det A_{I^c} for positive Hermitian A
    A = _permute_conjugate(rng, _random_positive_hermitian(rng, T, n))
    s = 1 + (k - 1) % (n - 1) if n > 1 else 1
    d = np.linalg.det(A).real
    dI = np.linalg.det(A[:, :s, :s]).real
    dC = np.linalg.det(A[:, s:, s:]).real
    return 1.0 - d / (dI * dC)


def _chk_hadamard(rng, T, n, k):
    # det A <= prod of diagonal entries
    A = _permute_conjugate(rng, _random_positive_hermitian(rng, T, n))
    d = np.linalg.det(A).real
    prod = np.prod(np.diagonal(A, axis1=-2, axis2=-1).real, axis=-1)
    return 1.0 - d / prod


def _chk_diag_drop(rng, T, n, k):
    # sigma_k(A^{-1}) >= sigma_k(diag(A)^{-1})
    A = _random_positive_hermitian(rng, T, n)
    lam = eigvals_batched(A)
    sig = esp_batched(lam)
    full = sig[..., n - k] / sig[..., n]
    diag = esp_batched(1.0 / np.diagonal(A, axis1=-2, axis2=-1).real)[..., k]
    return (full - diag) / full


def _chk_garding(rng, T, n, k):
    # (1/k) sum_j tau_j sigma_{k-1}(mu|j) >= sigma_k^{1/k}(tau) sigma_k^{1-1/k}(mu)
    mu = _loguniform(rng, (T, n))
    tau = _loguniform(rng, (T, n))
    lhs = (tau * _sig_excl1(mu, k - 1)).sum(axis=-1) / k
    rhs = esp_batched(tau)[..., k] ** (1.0 / k) * esp_batched(mu)[..., k] ** (1.0 - 1.0 / k)
    return (lhs - rhs) / rhs


def _chk_log_concavity(rng, T, n, k):
    # (h_ij + (h_i/lam_i) delta_ij) PSD for h = log sigma_k
    lam = _loguniform(rng, (T, n))
    sk = esp_batched(lam)[..., k]
    hi = _sig_excl1(lam, k - 1) / sk[:, None]
    Q = -hi[:, :, None] * hi[:, None, :]
    for i in range(n):
        for j in range(i + 1, n):
            cross = _sig_excl2(lam, k - 2, i, j) / sk
            Q[:, i, j] += cross
            Q[:, j, i] += cross
    idx = np.arange(n)
    Q[:, idx, idx] += hi / lam
    return _psd_slack(Q, floor=(hi / lam).max(axis=-1))


def _chk_power_concavity(rng, T, n, k):
    # (g_ij + (g_i/lam_i) delta_ij) PSD for g = sigma_k^{1/k}
    lam = _loguniform(rng, (T, n))
    _, gi, gij = _g_derivatives_batched(lam, k)
    idx = np.arange(n)
    Q = gij.copy()
    Q[:, idx, idx] += gi / lam
    return _psd_slack(Q, floor=(gi / lam).max(axis=-1))


def _chk_quotient_correction(rng, T, n, k):
    # (f_ij + (f_i/chi_i) delta_ij) NSD for f = -(sigma_{n-k}/sigma_n)^{1/k}
    chi = _loguniform(rng, (T, n))
    lam = 1.0 / chi
    _, gi, gij = _g_derivatives_batched(lam, k)
    M = -gij * lam[:, :, None] ** 2 * lam[:, None, :] ** 2
    idx = np.arange(n)
    M[:, idx, idx] += -gi * lam**3
    return _psd_slack(-M, floor=(gi * lam**3).max(axis=-1))  # nonnegative iff M is NSD


def _chk_offdiag_hessian(rng, T, n, k):
    # sigma_n sigma_{n-k-2}(chi|i,j) - sigma_{n-k} sigma_{n-2}(chi|i,j) <= 0
    chi = _loguniform(rng, (T, n))
    sig = esp_batched(chi)
    t1 = sig[..., n] * _sig_excl2(chi, n - k - 2, 0, 1)
    t2 = sig[..., n - k] * _sig_excl2(chi, n - 2, 0, 1)
    return (t2 - t1) / np.maximum(np.abs(t1) + np.abs(t2), _TINY)


def _chk_slot_exchange(rng, T, n, k):
    # the exchange identity bounding F^{ii} by F^{i1,1i}:
    #   chi_1 [s_n s_{n-k-2}(chi|1,j) - s_{n-k} s_{n-2}(chi|1,j)]
    #   + s_{n-k} s_{n-1}(chi|j) - s_{n-k-1}(chi|j) s_n
    #   = -s_n s_{n-k-1}(chi|1,j)  <= 0
    chi = -np.sort(-_loguniform(rng, (T, n)), axis=-1)
    sig = esp_batched(chi)
    s_n = sig[..., n]
    s_nk = sig[..., n - k]
    jpick = rng.integers(1, n, size=T)
    slack = np.empty(T)
    for j in range(1, n):
        mask = jpick == j
        if not mask.any():
            continue
        rows = chi[mask]
        no_j = np.delete(rows, j, axis=-1)
        L = (
            rows[:, 0]
            * (
                s_n[mask] * _sig_excl2(rows, n - k - 2, 0, j)
                - s_nk[mask] * _sig_excl2(rows, n - 2, 0, j)
            )
            + s_nk[mask] * esp_batched(no_j)[..., n - 1]
            - esp_batched(no_j)[..., n - k - 1] * s_n[mask]
        )
        R = -s_n[mask] * _sig_excl2(rows, n - k - 1, 0, j)
        scale = np.maximum(np.maximum(np.abs(L), np.abs(R)), 1.0)
        slack[mask] = np.minimum(-np.abs(L - R) / scale, -R / scale)
    return slack


def _chk_rank_one_split(rng, T, n, k):
    # A_ii = chi_i s_{k-1}(chi|i), A_ij = chi_i chi_j s_{k-2}(chi|i,j)
    # equals the sum over k-subsets of chi_I E_I; in particular A is PSD.
    import itertools

    chi = _loguniform(rng, (T, n))
    A = np.zeros((T, n, n))
    idx = np.arange(n)
    A[:, idx, idx] = chi * _sig_excl1(chi, k - 1)
    for i in range(n):
        for j in range(i + 1, n):
            off = chi[:, i] * chi[:, j] * _sig_excl2(chi, k - 2, i, j)
            A[:, i, j] = off
            A[:, j, i] = off
    recon = np.zeros_like(A)
    for subset in itertools.combinations(range(n), k):
        w = np.prod(chi[:, list(subset)], axis=-1)
        for i in subset:
            for j in subset:
                recon[:, i, j] += w
    scale = np.maximum(np.abs(A).max(axis=(-2, -1)), _TINY)
    ident = -np.abs(A - recon).max(axis=(-2, -1)) / scale
    return np.minimum(ident, _psd_slack(A))


def _chk_inverse_convexity(rng, T, n, k):
    # A -> sigma_k(A^{-1}) is midpoint convex on positive Hermitian matrices
    def quotient(M):
        lam = eigvals_batched(M)
        sig = esp_batched(lam)
        return sig[..., n - k] / sig[..., n]

    A = _random_positive_hermitian(rng, T, n)
    B = _random_positive_hermitian(rng, T, n)
    rhs = 0.5 * (quotient(A) + quotient(B))
    lhs = quotient(0.5 * (A + B))
    return (rhs - lhs) / rhs


def _chk_ratio_chain(rng, T, n, k):
    # w_j = sigma_{n-j}(chi)/C(n,j): the ratios w_j/w_{j-1} are nonincreasing
    chi = _loguniform(rng, (T, n))
    sig = esp_batched(chi)
    w = np.stack([sig[..., n - j] / math.comb(n, j) for j in range(n + 1)], axis=-1)
    r = w[..., 1:] / w[..., :-1]
    return ((r[..., :-1] - r[..., 1:]) / r[..., :-1]).min(axis=-1)


def _chk_mass_holder(rng, T, n, k):
    # integral((s_{n-k}/s_n)^{1/k} s_{n-k}) >= (int s_{n-k}/int s_n)^{1/k} int s_{n-k}
    # over any finite measure; here a 16-point uniform measure per draw
    chi = _loguniform(rng, (T, 16, n))
    sig = esp_batched(chi)
    w = sig[..., n - k]
    s = sig[..., n]
    lhs = ((w / s) ** (1.0 / k) * w).mean(axis=-1)
    rhs = (w.mean(axis=-1) / s.mean(axis=-1)) ** (1.0 / k) * w.mean(axis=-1)
    return (lhs - rhs) / rhs


def _chk_pinch_gap(rng, T, n, k, theta=0.1):
    # with the pinching constants (lambda, delta, eta, N, eps), every chi with
    # chi_1/chi_n >= N and C1 <= sigma_k(chi^{-1}) <= C2 satisfies
    # (1-eps) sum_i F^{ii} chi'_ii >= c^{-1/k} sigma_k^{2/k}(chi^{-1})
    c = float(math.comb(n, k))
    chi_p = 1.0 + rng.uniform(0.0, 2.0, size=(T, n))
    lam = chi_p.min(axis=-1)
    eta = c - _sig_excl1(1.0 / chi_p, k).max(axis=-1)
    C1 = _loguniform(rng, T, 0.05, 5.0)
    C2 = C1 * _loguniform(rng, T, 1.0, 20.0)
    eps = theta / (1.0 + theta)
    denom = 1.0 - (1.0 + theta) ** (0.5 * k) * np.sqrt((c - eta) / c)
    delta = np.minimum(
        lam * (C1 * c) ** (1.0 / k),
        (1.0 - eps) * lam * (c / C2) ** (1.0 / k) / n,
    )
    Npinch = math.comb(n - 1, k - 1) / (C1 * delta**k * denom)
    ratio = Npinch * (1.0 + rng.exponential(0.25, size=T))
    chi = np.empty((T, n))
    chi[:, 0] = ratio
    chi[:, -1] = 1.0
    if n > 2:
        chi[:, 1:-1] = np.exp(rng.uniform(0.0, 1.0, size=(T, n - 2)) * np.log(ratio)[:, None])
    target = C1 + rng.uniform(0.0, 1.0, size=T) * (C2 - C1)
    cur = esp_batched(1.0 / chi)[..., k]
    chi = chi * ((cur / target) ** (1.0 / k))[:, None]
    recip = 1.0 / chi
    sk = esp_batched(recip)[..., k]
    grad = (1.0 / k) * sk[:, None] ** (1.0 / k - 1.0) * _sig_excl1(recip, k - 1) / chi**2
    rhs = c ** (-1.0 / k) * sk ** (2.0 / k)
    gap = (1.0 - eps) * (grad * chi_p).sum(axis=-1) - rhs
    return gap / rhs


def _chk_hodge_gap(rng, T, n, k):
    # (int w^{n-1}^a)^2 - (int w^n)(int w^{n-2}^a^2) >= 0 for Hermitian a
    a = _random_hermitian(rng, T, n) * _loguniform(rng, (T, 1, 1), 1e-1, 1e1)
    lam = eigvals_batched(a)
    sig = esp_batched(lam)
    fac2 = float(math.factorial(n)) ** 2
    gap = fac2 * ((sig[..., 1] / n) ** 2 - sig[..., 2] / math.comb(n, 2))
    scale = fac2 * ((sig[..., 1] / n) ** 2 + np.abs(sig[..., 2]) / math.comb(n, 2))
    return gap / np.maximum(scale, _TINY)


def _chk_hodge_quadratic(rng, T, n, k):
    # the same gap recovered from class integrals of chi = omega + eps*a:
    # (c1^2 - c2)(eps)/eps^2 matches the gap and its sign, drift <= 5%
    a = _random_hermitian(rng, T, n)
    lam = eigvals_batched(a)
    sig = esp_batched(lam)
    gap = (sig[..., 1] / n) ** 2 - sig[..., 2] / math.comb(n, 2)
    floor = np.maximum(np.abs(sig[..., 1] / n) ** 2 + np.abs(sig[..., 2]), 1.0) * 1e-8
    worst = np.zeros(T)
    for eps in (1e-3, -1e-3, 1e-2, -1e-2):
        chi = esp_batched(1.0 + eps * lam)
        q = (chi[..., 1] / n) ** 2 - (chi[..., 2] / math.comb(n, 2)) * chi[..., 0]
        worst = np.maximum(worst, np.abs(q / eps**2 - gap))
    return 0.05 - worst / np.maximum(np.abs(gap), floor)


@dataclass(frozen=True)
class CheckDef:
    name: str
    statement: str
    kernel: object
    ns: tuple = (2, 3, 4)
    k_below_n: bool = False
    k_from: int = 1

    def ks(self, n):
        hi = n if self.k_below_n else n + 1
        return range(self.k_from, hi)


CHECKS = (
    CheckDef("minor_split",
             "det A <= det A_I det A_comp for positive Hermitian A",
             _chk_minor_split),
    CheckDef("hadamard",
             "det A <= product of diagonal entries for positive Hermitian A",
             _chk_hadamard),
    CheckDef("diagonal_drop",
             "sigma_k(A^{-1}) >= sigma_k(diag(A)^{-1}) for positive Hermitian A",
             _chk_diag_drop),
    CheckDef("garding",
             "(1/k) sum tau_j sigma_{k-1}(mu|j) >= sigma_k^{1/k}(tau) sigma_k^{1-1/k}(mu)",
             _chk_garding),
    CheckDef("log_concavity",
             "h_ij + (h_i/lam_i) delta_ij is PSD for h = log sigma_k on the positive cone",
             _chk_log_concavity),
    CheckDef("power_concavity",
             "g_ij + (g_i/lam_i) delta_ij is PSD for g = sigma_k^{1/k}",
             _chk_power_concavity),
    CheckDef("quotient_correction",
             "f_ij + (f_i/chi_i) delta_ij is NSD for f = -(sigma_{n-k}/sigma_n)^{1/k}",
             _chk_quotient_correction),
    CheckDef("offdiag_hessian",
             "s_n s_{n-k-2}(chi|i,j) - s_{n-k} s_{n-2}(chi|i,j) <= 0 on the positive cone",
             _chk_offdiag_hessian),
    CheckDef("slot_exchange",
             "the exchange identity reduces the F^{ii} control term to "
             "-s_n s_{n-k-1}(chi|1,j), which is nonpositive",
             _chk_slot_exchange, k_below_n=True),
    CheckDef("rank_one_split",
             "the sigma_k curvature matrix equals sum over k-subsets of chi_I E_I and is PSD",
             _chk_rank_one_split),
    CheckDef("inverse_convexity",
             "A -> sigma_k(A^{-1}) is midpoint convex on positive Hermitian matrices",
             _chk_inverse_convexity),
    CheckDef("ratio_chain",
             "w_j = sigma_{n-j}(chi)/C(n,j) has nonincreasing consecutive ratios",
             _chk_ratio_chain),
    CheckDef("mass_holder",
             "int (s_{n-k}/s_n)^{1/k} s_{n-k} >= (int s_{n-k}/int s_n)^{1/k} int s_{n-k}",
             _chk_mass_holder),
    CheckDef("pinch_gap",
             "(1-eps) sum F^{ii} chi'_ii >= c^{-1/k} sigma_k^{2/k}(chi^{-1}) whenever "
             "chi_1/chi_n >= N and C1 <= sigma_k(chi^{-1}) <= C2, theta = 0.1",
             _chk_pinch_gap, k_below_n=True),
    CheckDef("hodge_gap",
             "(int w^{n-1}^a)^2 >= (int w^n)(int w^{n-2}^a^2) for Hermitian a",
             _chk_hodge_gap, ns=(3, 4)),
    CheckDef("hodge_quadratic",
             "(c1^2 - c2)(eps)/eps^2 from class integrals of omega + eps*a matches "
             "the bilinear gap within 5% for eps in {1e-3, 1e-2}",
             _chk_hodge_quadratic, ns=(3, 4)),
)


def run_property_suite(seed: int, trials: int) -> SuiteReport:
    """Run every check with `trials` draws split over (n, k); deterministic."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    results = []
    for ci, chk in enumerate(CHECKS):
        groups = [(n, k) for n in chk.ns for k in chk.ks(n)]
        base, rem = divmod(trials, len(groups))
        failures = 0
        worst = math.inf
        done = 0
        for gi, (n, k) in enumerate(groups):
            T = base + (1 if gi < rem else 0)
            if T == 0:
                continue
            rng = np.random.default_rng([seed, ci, n, k])
            slack = np.asarray(chk.kernel(rng, T, n, k))
            failures += int(np.sum(slack < -TOL))
            worst = min(worst, float(slack.min()))
            done += T
        results.append(CheckResult(chk.name, chk.statement, done, failures,
                                   worst if done else 0.0, seed))
    return SuiteReport(seed=seed, trials=trials, checks=tuple(results))


# -- standalone oracles -------------------------------------------------------

def newton_chain_gaps(chi) -> np.ndarray:
    """Differences of consecutive ratios of w_j = sigma_{n-j}(chi)/C(n,j);
    all nonnegative, zero exactly when the entries are equal."""
    from .symfun import as_eigenlist

    chi = as_eigenlist(chi)
    n = chi.n
    if n < 2:
        raise ValueError("requires n >= 2")
    sig = esp_batched(chi.values)
    w = np.array([sig[n - j] / math.comb(n, j) for j in range(n + 1)])
    r = w[1:] / w[:-1]
    return r[:-1] - r[1:]


def hodge_expansion_gap(a, n: int = None) -> float:
    """(int omega^{n-1} ^ a)^2 - (int omega^n)(int omega^{n-2} ^ a^2) on the
    unit torus with omega the identity form; nonnegative, zero iff a is a
    multiple of the identity."""
    from .hermitian import as_hermitian, mixed_discriminant

    a = as_hermitian(a)
    if n is None:
        n = a.n
    if n != a.n:
        raise ValueError("dimension mismatch")
    if n < 3:
        raise ValueError("requires n >= 3")
    eye = np.eye(n)
    fac = float(math.factorial(n))
    B = fac * mixed_discriminant([(a, 1), (eye, n - 1)])
    C = fac * mixed_discriminant([(a, 2), (eye, n - 2)])
    return B * B - fac * C


def hodge_quadratic(a, eps: float) -> float:
    """The same combination from class integrals of chi = omega + eps*a:
    (int chi ^ omega^{n-1})^2 - (int omega^n)(int chi^2 ^ omega^{n-2});
    identically eps^2 times the expansion gap."""
    from .hermitian import as_hermitian, mixed_discriminant

    a = as_hermitian(a)
    n = a.n
    if n < 3:
        raise ValueError("requires n >= 3")
    eye = np.eye(n)
    chi = eye + eps * a.entries
    fac = float(math.factorial(n))
    A1 = fac * mixed_discriminant([(chi, 1), (eye, n - 1)])
    A2 = fac * mixed_discriminant([(chi, 2), (eye, n - 2)])
    return A1 * A1 - fac * A2
