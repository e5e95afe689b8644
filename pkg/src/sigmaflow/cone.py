"""Pointwise cone-condition checks and the partial-C2 theorem constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .geometry import BackgroundData, HermitianField, relative_eigen_field
from .hermitian import DomainError
from .symfun import EigenList, F_gradient, as_eigenlist, esp_batched


@dataclass(frozen=True)
class ConeReport:
    in_cone: bool
    margin: float
    worst_point: tuple
    worst_j: int

    def to_dict(self):
        d = asdict(self)
        d["worst_point"] = list(self.worst_point)
        return d


def _exclusion_sigmas(recip: np.ndarray, k: int) -> np.ndarray:
    """sigma_k of the reciprocal list with one index removed, per index.

    recip: (..., m) -> (..., m) with out[..., j] = sigma_k(recip | j).
    """
    m = recip.shape[-1]
    out = np.empty(recip.shape)
    for j in range(m):
        rest = np.delete(recip, j, axis=-1)
        out[..., j] = esp_batched(rest)[..., k] if k <= m - 1 else 0.0
    return out


def _scan(values: np.ndarray, grid_shape):
    """Max over grid and index j, with its location."""
    flat = values.reshape(-1, values.shape[-1])
    idx = int(np.argmax(flat))
    point = np.unravel_index(idx // values.shape[-1], grid_shape)
    return float(flat.flat[idx]), tuple(int(p) for p in point), int(idx % values.shape[-1])


def cone_margin(chi_prime: HermitianField, bg: BackgroundData, k: int, c_prime: float) -> ConeReport:
    """Pointwise criterion sigma_k(chi'^{-1} | j) < c'_k; for k = n the cone
    is all of H+ and the margin is +inf."""
    n = bg.grid.n
    if k == n:
        return ConeReport(True, math.inf, (0,) * 2 * n, 0)
    if not 1 <= k < n:
        raise ValueError("k must be in [1, n]")
    eigs = relative_eigen_field(chi_prime, bg.G)
    if eigs[..., -1].min() <= 0.0:
        raise DomainError("chi' is not positive relative to omega")
    excl = _exclusion_sigmas(1.0 / eigs, k)
    worst, point, j = _scan(excl, bg.grid.shape)
    margin = float(c_prime - worst)
    return ConeReport(margin > 0.0, margin, point, j)


def cone_margin_augmented(chi_prime: HermitianField, bg: BackgroundData, k: int, c: float) -> ConeReport:
    """Augmented criterion: append the fixed eigenvalues b and test
    sigma_k(chi~'^{-1} | i) < c over the base-manifold indices only."""
    if not bg.augment:
        raise ValueError("augmented mode requires a nonempty augmentation list")
    n = bg.grid.n
    eigs = relative_eigen_field(chi_prime, bg.G)
    if eigs[..., -1].min() <= 0.0:
        raise DomainError("chi' is not positive relative to omega")
    b = np.broadcast_to(np.asarray(bg.augment), eigs.shape[:-1] + (len(bg.augment),))
    recip = 1.0 / np.concatenate([eigs, b], axis=-1)
    m = recip.shape[-1]
    # exclusions range over the first n (base) indices only
    excl = np.empty(eigs.shape)
    for i in range(n):
        rest = np.delete(recip, i, axis=-1)
        excl[..., i] = esp_batched(rest)[..., k] if k <= m - 1 else 0.0
    worst, point, j = _scan(excl, bg.grid.shape)
    margin = float(c - worst)
    return ConeReport(margin > 0.0, margin, point, j)


def constants_from_bounds(lam: float, eta: float, c_prime: float, n: int, k: int,
                          C1: float, C2: float, theta: float):
    """(lambda, delta, eta, N, eps) of the partial-C2 pinching argument.

    eps = theta/(1+theta) so that (1-eps)(1+theta) = 1 converts the
    intermediate bound c^{1/k} sigma_k^{1/k}(B) >= (1+theta) sigma_k^{2/k}
    into the target form.  The closing constant needs
        sigma_k(chi^{-1}|1) >= (1+theta)^{k/2} ((c-eta)/c)^{1/2} sigma_k(chi^{-1}),
    and the small-eigenvalue branch needs
        chi_n <= (1-eps) lam (c/C2)^{1/k} / n,
    so delta is the smaller of the two thresholds and N is sized against it.
    """
    if not 0 < C1 <= C2:
        raise ValueError("require 0 < C1 <= C2")
    if theta <= 0:
        raise ValueError("theta must be positive")
    if eta <= 0:
        raise ValueError("chi' does not satisfy the cone condition")
    eps = theta / (1.0 + theta)
    denom = 1.0 - (1.0 + theta) ** (0.5 * k) * math.sqrt((c_prime - eta) / c_prime)
    if denom <= 0:
        raise ValueError(
            f"theta too large: need (1+theta)^k (c-eta)/c < 1, got slack {denom:.3e}"
        )
    delta = min(
        lam * (C1 * c_prime) ** (1.0 / k),
        (1.0 - eps) * lam * (c_prime / C2) ** (1.0 / k) / n,
    )
    N = math.comb(n - 1, k - 1) / (C1 * delta**k) / denom
    return lam, delta, eta, N, eps


def theorem_constants(chi_prime: HermitianField, bg: BackgroundData, k: int,
                      C1: float, C2: float, theta: float, c_prime: float):
    """Pinching constants computed from a cone representative field."""
    eigs = relative_eigen_field(chi_prime, bg.G)
    lam = float(eigs[..., -1].min())
    excl = _exclusion_sigmas(1.0 / eigs, k)
    eta = float(c_prime - excl.max())
    return constants_from_bounds(lam, eta, c_prime, bg.grid.n, k, C1, C2, theta)


def theorem_gap(chi: EigenList, chi_prime_diag, k: int, eps: float, c_prime: float) -> float:
    """(1-eps) sum_i F^{ii}(chi) chi'_{ii} - c'^{-1/k} sigma_k^{2/k}(chi^{-1}),
    with chi' expressed in the frame diagonalizing chi."""
    chi = as_eigenlist(chi)
    diag = np.asarray(chi_prime_diag, dtype=float)
    grad = F_gradient(chi, k)
    sk = float(esp_batched(1.0 / chi.values)[k])
    return float((1.0 - eps) * np.dot(grad, diag) - c_prime ** (-1.0 / k) * sk ** (2.0 / k))
