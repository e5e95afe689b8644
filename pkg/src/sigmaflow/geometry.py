"""Flat-torus discretization: periodic grids, spectral complex Hessians,
metric fields, integration, and cohomological class constants.

The manifold is C^n / (Z^n + i Z^n) with coordinates z_j = x_j + i y_j,
x_j, y_j in [0, 1). Real axes are ordered (x_1, y_1, ..., x_n, y_n).
Fields are stored on the full 2n-dimensional grid; axes declared inactive
carry a single sample (fields constant along them), which keeps the n = 3
cases affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hermitian import (
    DomainError,
    HermitianMatrix,
    as_hermitian,
    eigvals_batched,
    metric_whitener,
)
from .symfun import esp_batched

EPS_POS = 1e-10
ALIAS_WARN_FRACTION = 1e-6


class MetricDegenerateError(DomainError):
    pass


@dataclass(frozen=True)
class TorusGrid:
    n: int
    N: int
    active: tuple = None  # indices of active real axes; None = all

    def __post_init__(self):
        if self.N < 8 or (self.N & (self.N - 1)) != 0:
            raise ValueError("N must be a power of two, at least 8")
        if not 1 <= self.n <= 4:
            raise ValueError("complex dimension must be in [1, 4]")
        if self.active is None:
            object.__setattr__(self, "active", tuple(range(2 * self.n)))
        else:
            act = tuple(sorted(set(self.active)))
            if any(not 0 <= a < 2 * self.n for a in act):
                raise ValueError("active axis index out of range")
            object.__setattr__(self, "active", act)

    @property
    def shape(self):
        return tuple(self.N if a in self.active else 1 for a in range(2 * self.n))

    @property
    def num_points(self):
        return int(np.prod(self.shape))

    def axis_coordinate(self, axis: int) -> np.ndarray:
        """Coordinate of one real axis, broadcast to the grid shape."""
        size = self.shape[axis]
        coord = np.arange(size) / size if size > 1 else np.zeros(1)
        view = [1] * (2 * self.n)
        view[axis] = size
        return np.broadcast_to(coord.reshape(view), self.shape)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


@dataclass(frozen=True)
class PotentialField:
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"field shape {vals.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class HermitianField:
    grid: TorusGrid
    values: np.ndarray  # shape grid.shape + (n, n), complex

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        expect = self.grid.shape + (self.grid.n, self.grid.n)
        if vals.shape != expect:
            raise ValueError(f"field shape {vals.shape} != {expect}")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class BackgroundData:
    grid: TorusGrid
    G: HermitianMatrix
    H: HermitianMatrix
    k: int
    psi0: PotentialField = None
    augment: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "G", as_hermitian(self.G).require_positive())
        object.__setattr__(self, "H", as_hermitian(self.H))
        if self.G.n != self.grid.n or self.H.n != self.grid.n:
            raise ValueError("matrix dimension does not match the grid")
        if not 1 <= self.k <= self.grid.n + len(self.augment):
            raise ValueError("k out of range")
        if any(b <= 0 for b in self.augment):
            raise ValueError("augmentation eigenvalues must be positive")
        object.__setattr__(self, "augment", tuple(float(b) for b in self.augment))


def _derivative_factors(grid: TorusGrid):
    """Per-axis spectral factors 2*pi*i*k, Nyquist mode zeroed."""
    factors = []
    for a in range(2 * grid.n):
        size = grid.shape[a]
        k = np.fft.fftfreq(size, d=1.0 / size)
        if size % 2 == 0 and size > 1:
            k[size // 2] = 0.0
        view = [1] * (2 * grid.n)
        view[a] = size
        factors.append((2j * np.pi * k).reshape(view))
    return factors


def complex_hessian(phi: PotentialField) -> HermitianField:
    """phi_{i jbar} = (phi_{x_i x_j} + phi_{y_i y_j})/4
    + i (phi_{x_i y_j} - phi_{y_i x_j})/4, by spectral differentiation."""
    grid = phi.grid
    n = grid.n
    spec = np.fft.fftn(phi.values)
    fac = _derivative_factors(grid)

    def second(a, b):
        return np.fft.ifftn(spec * fac[a] * fac[b]).real

    # cache distinct second derivatives
    cache = {}

    def d2(a, b):
        key = (min(a, b), max(a, b))
        if key not in cache:
            cache[key] = second(*key)
        return cache[key]

    out = np.empty(grid.shape + (n, n), dtype=complex)
    for i in range(n):
        xi, yi = 2 * i, 2 * i + 1
        for j in range(i, n):
            xj, yj = 2 * j, 2 * j + 1
            entry = 0.25 * (d2(xi, xj) + d2(yi, yj)) + 0.25j * (d2(xi, yj) - d2(yi, xj))
            out[..., i, j] = entry
            out[..., j, i] = np.conj(entry)
    return HermitianField(grid, out)


def alias_energy_fraction(phi: PotentialField) -> float:
    """Fraction of spectral energy in the top third of wavenumbers."""
    spec = np.fft.fftn(phi.values)
    power = np.abs(spec) ** 2
    power.flat[0] = 0.0  # ignore the mean
    total = power.sum()
    if total == 0.0:
        return 0.0
    mask = np.zeros(phi.grid.shape, dtype=bool)
    for a in range(2 * phi.grid.n):
        size = phi.grid.shape[a]
        if size == 1:
            continue
        k = np.abs(np.fft.fftfreq(size, d=1.0 / size))
        view = [1] * (2 * phi.grid.n)
        view[a] = size
        mask |= (k > size / 3.0).reshape(view)
    return float(power[mask].sum() / total)


def relative_eigen_field(field: HermitianField, G) -> np.ndarray:
    """Eigenvalues (descending) of the field relative to G, per grid point."""
    Linv = metric_whitener(G)
    B = np.einsum("ab,...bc,dc->...ad", Linv, field.values, Linv.conj())
    B = 0.5 * (B + np.conj(np.swapaxes(B, -1, -2)))
    return eigvals_batched(B)


def chi0_field(bg: BackgroundData) -> HermitianField:
    base = np.broadcast_to(bg.H.entries, bg.grid.shape + (bg.grid.n, bg.grid.n)).copy()
    if bg.psi0 is not None:
        base = base + complex_hessian(bg.psi0).values
    out = HermitianField(bg.grid, base)
    mins = relative_eigen_field(out, bg.G)[..., -1]
    if mins.min() <= EPS_POS:
        raise MetricDegenerateError(
            f"background form degenerate at grid point {np.unravel_index(mins.argmin(), mins.shape)}"
        )
    return out


def chi_field(bg: BackgroundData, phi: PotentialField) -> HermitianField:
    """chi_phi = chi_0 + Hess(phi); raises if the metric degenerates."""
    if phi.grid is not bg.grid and phi.grid != bg.grid:
        raise ValueError("grid mismatch")
    vals = chi0_field(bg).values + complex_hessian(phi).values
    out = HermitianField(bg.grid, vals)
    mins = relative_eigen_field(out, bg.G)[..., -1]
    worst = float(mins.min())
    if worst <= EPS_POS:
        point = np.unravel_index(int(mins.argmin()), mins.shape)
        raise MetricDegenerateError(
            f"metric degenerate (min eigenvalue {worst:.3e}) at grid point {point}"
        )
    return out


def volume(bg_or_G) -> float:
    """Vol(M) = integral of omega^n / n! = det G on the unit torus."""
    G = bg_or_G.G if isinstance(bg_or_G, BackgroundData) else as_hermitian(bg_or_G)
    return float(np.linalg.det(G.entries).real)


def integrate(values: np.ndarray, grid: TorusGrid, G=None) -> float:
    """Integral against dv = omega^n/n!; grid mean times Vol(M)."""
    vol = 1.0 if G is None else volume(G if isinstance(G, BackgroundData) else G)
    return float(np.mean(values) * vol)


def sigma_of_eigs(eigs: np.ndarray) -> np.ndarray:
    """All sigma_j along the last axis of an eigenvalue field."""
    return esp_batched(eigs)


def class_constants(bg: BackgroundData):
    """(c_k, c'_k) for k = 0..n from the class integrals of chi_0."""
    n = bg.grid.n
    eigs = relative_eigen_field(chi0_field(bg), bg.G)
    sig = esp_batched(eigs)  # (..., n+1)
    means = sig.reshape(-1, n + 1).mean(axis=0)
    c = np.empty(n + 1)
    cp = np.empty(n + 1)
    for k in range(n + 1):
        cp[k] = means[n - k] / means[n]
        c[k] = cp[k] / math.comb(n, k)
    return c, cp


def oscillation(phi: PotentialField) -> float:
    return float(phi.values.max() - phi.values.min())


# ---------------------------------------------------------------------------
# field snapshot format: header "n N active_axes", then one value per line
# in row-major axis order (x1, y1, ..., x_n, y_n).

def save_snapshot(path, phi: PotentialField):
    grid = phi.grid
    with open(path, "w") as fh:
        fh.write(f"{grid.n} {grid.N} {','.join(map(str, grid.active))}\n")
        for v in phi.values.ravel():
            fh.write(f"{v:.17g}\n")


def load_snapshot(path) -> PotentialField:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError("malformed snapshot header")
        n, N = int(header[0]), int(header[1])
        active = tuple(int(a) for a in header[2].split(","))
        grid = TorusGrid(n=n, N=N, active=active)
        vals = np.loadtxt(fh).reshape(grid.shape)
    return PotentialField(grid, vals)


# ---------------------------------------------------------------------------
# trigonometric mode builder shared by tests and the CLI config parser

def build_field(grid: TorusGrid, terms) -> PotentialField:
    """Sum of products of sin/cos modes.

    terms: iterable of (amplitude, [(trig, axis, wavenumber), ...]) with
    trig in {"sin", "cos"}; axis indexes the real axes (x1, y1, ...).
    """
    vals = grid.zeros()
    for amp, factors in terms:
        term = np.full(grid.shape, float(amp))
        for trig, axis, wav in factors:
            coord = grid.axis_coordinate(axis)
            fn = np.sin if trig == "sin" else np.cos
            if trig not in ("sin", "cos"):
                raise ValueError(f"unknown trig factor {trig!r}")
            term = term * fn(2.0 * np.pi * wav * coord)
        vals = vals + term
    return PotentialField(grid, vals)
