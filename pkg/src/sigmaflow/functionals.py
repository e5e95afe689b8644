"""Energy functionals F_j, F~_{j,n}, their alpha-combination, the flow
measure mass, normalization, and variational self-checks.

Form integrals are evaluated pointwise through mixed discriminants of the
constant background G and the metric fields: for constant-coefficient
coordinates, A_1 ^ ... ^ A_n = n! D(A_1, ..., A_n) dVol, so
    integral(w * A_1 ^ ... ^ A_n) = n! * mean(w * D)
on the unit torus.  The affine-path beta weights collapse to 1/(j+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import BackgroundData, HermitianField, PotentialField, chi0_field, chi_field
from .hermitian import mixed_discriminant_batched


@dataclass(frozen=True)
class FunctionalValue:
    j: int
    value: float
    decomposition: tuple  # per-l wedge integrals of the affine-path expansion


def _const_field(bg: BackgroundData, M: np.ndarray) -> np.ndarray:
    n = bg.grid.n
    return np.broadcast_to(M, bg.grid.shape + (n, n))


def wedge_density(factors) -> np.ndarray:
    """Pointwise (A_1 ^ ... ^ A_n)/dVol divided by n!: the mixed discriminant."""
    mats = []
    for arr, mult in factors:
        mats.extend([arr] * int(mult))
    return mixed_discriminant_batched(mats)


def wedge_integral(bg: BackgroundData, factors, weight=None) -> float:
    """integral of weight * (A_1^{m_1} ^ ...) over M, n-form factors."""
    dens = wedge_density(factors)
    if weight is not None:
        dens = dens * weight
    return float(math.factorial(bg.grid.n) * dens.mean())


def F_j(phi: PotentialField, j: int, bg: BackgroundData, chi: HermitianField = None) -> FunctionalValue:
    """Closed form along the affine path s -> s*phi:
    F_j = 1/(j+1) sum_l integral(phi * chi_phi^l ^ chi_0^{j-l} ^ omega^{n-j})."""
    n = bg.grid.n
    if not 0 <= j <= n:
        raise ValueError("j must be in [0, n]")
    if chi is None:
        chi = chi_field(bg, phi)
    chi0 = chi0_field(bg)
    G = _const_field(bg, bg.G.entries)
    terms = []
    for l in range(j + 1):
        terms.append(
            wedge_integral(
                bg,
                [(chi.values, l), (chi0.values, j - l), (G, n - j)],
                weight=phi.values,
            )
        )
    return FunctionalValue(j, sum(terms) / (j + 1), tuple(terms))


def F_j_quadrature(phi: PotentialField, j: int, bg: BackgroundData, g, gp, order: int = 16) -> float:
    """F_j along the path s -> g(s)*phi by Gauss-Legendre quadrature;
    gp is dg/ds.  Used as the path-independence oracle."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    n = bg.grid.n
    chi0 = chi0_field(bg)
    G = _const_field(bg, bg.G.entries)
    hess = chi_field(bg, phi).values - chi0.values  # Hess(phi) without re-FFT
    total = 0.0
    for si, wi in zip(s, w):
        chi_s = chi0.values + g(si) * hess
        dens = wedge_density([(chi_s, j), (G, n - j)])
        total += wi * gp(si) * float(math.factorial(n) * (phi.values * dens).mean())
    return total


def F_tilde(phi: PotentialField, j: int, bg: BackgroundData, chi: HermitianField = None) -> float:
    """F_j(phi) - c_{n-j} F_n(phi)."""
    from .geometry import class_constants

    c, _ = class_constants(bg)
    if chi is None:
        chi = chi_field(bg, phi)
    return F_j(phi, j, bg, chi).value - c[bg.grid.n - j] * F_j(phi, bg.grid.n, bg, chi).value


def F_tilde_alpha(phi: PotentialField, k: int, alpha: float, bg: BackgroundData) -> float:
    """F~_{n-k,n} + alpha F~_{n-k+1,n}."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    n = bg.grid.n
    chi = chi_field(bg, phi)
    return F_tilde(phi, n - k, bg, chi) + alpha * F_tilde(phi, n - k + 1, bg, chi)


def mu_mass(phi: PotentialField, k: int, bg: BackgroundData, chi: HermitianField = None) -> float:
    """Total mass of the measure with F_{n-k}(phi) = integral(phi dmu);
    cohomological, hence constant along the flow."""
    n = bg.grid.n
    if chi is None:
        chi = chi_field(bg, phi)
    chi0 = chi0_field(bg)
    G = _const_field(bg, bg.G.entries)
    total = 0.0
    for l in range(n - k + 1):
        total += wedge_integral(bg, [(chi.values, l), (chi0.values, n - k - l), (G, k)])
    return total / (n - k + 1)


def normalize(phi: PotentialField, k: int, bg: BackgroundData) -> PotentialField:
    """Shift phi so that F_{n-k} of the result vanishes."""
    chi = chi_field(bg, phi)
    shift = F_j(phi, bg.grid.n - k, bg, chi).value / mu_mass(phi, k, bg, chi)
    return PotentialField(phi.grid, phi.values - shift)


def first_variation(phi: PotentialField, dphi: PotentialField, j: int, bg: BackgroundData) -> float:
    """Analytic dF_j = integral(dphi * chi_phi^j ^ omega^{n-j})."""
    n = bg.grid.n
    chi = chi_field(bg, phi)
    G = _const_field(bg, bg.G.entries)
    return wedge_integral(bg, [(chi.values, j), (G, n - j)], weight=dphi.values)


def variation_gap(phi: PotentialField, dphi: PotentialField, j: int, bg: BackgroundData, h: float) -> float:
    """|central difference of F_j - analytic first variation|; O(h^2)."""
    if not 1e-7 <= h <= 1e-3:
        raise ValueError("h must lie in [1e-7, 1e-3]")
    plus = PotentialField(phi.grid, phi.values + h * dphi.values)
    minus = PotentialField(phi.grid, phi.values - h * dphi.values)
    fd = (F_j(plus, j, bg).value - F_j(minus, j, bg).value) / (2.0 * h)
    return abs(fd - first_variation(phi, dphi, j, bg))
