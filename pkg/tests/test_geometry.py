import math

import numpy as np
import pytest

from sigmaflow import geometry
from sigmaflow.geometry import (
    BackgroundData,
    MetricDegenerateError,
    PotentialField,
    TorusGrid,
    build_field,
    chi0_field,
    chi_field,
    class_constants,
    complex_hessian,
    integrate,
    load_snapshot,
    oscillation,
    relative_eigen_field,
    save_snapshot,
)


def make_bg(n=2, N=16, H=None, psi0=None, active=None, k=1, augment=()):
    grid = TorusGrid(n=n, N=N, active=active)
    H = np.eye(n) if H is None else H
    return BackgroundData(grid=grid, G=np.eye(n), H=H, k=k, psi0=psi0, augment=augment)


class TestTorusGrid:
    def test_rejects_bad_N(self):
        with pytest.raises(ValueError):
            TorusGrid(n=1, N=12)
        with pytest.raises(ValueError):
            TorusGrid(n=1, N=4)

    def test_reduced_shape(self):
        grid = TorusGrid(n=2, N=16, active=(0, 3))
        assert grid.shape == (16, 1, 1, 16)
        assert grid.num_points == 256

    def test_axis_coordinate_broadcast(self):
        grid = TorusGrid(n=1, N=8)
        x = grid.axis_coordinate(0)
        assert x.shape == (8, 8)
        assert x[:, 0] == pytest.approx(np.arange(8) / 8)
        assert x[0, :] == pytest.approx(np.zeros(8))


class TestComplexHessian:
    def test_constant_gives_zero(self):
        grid = TorusGrid(n=2, N=8)
        phi = PotentialField(grid, np.full(grid.shape, 3.7))
        assert np.abs(complex_hessian(phi).values).max() < 1e-14

    def test_single_mode_analytic(self):
        # n=1, phi = cos(2 pi x): phi_{11} = -pi^2 cos(2 pi x)
        grid = TorusGrid(n=1, N=64)
        phi = build_field(grid, [(1.0, [("cos", 0, 1)])])
        hess = complex_hessian(phi).values[..., 0, 0].real
        want = -np.pi**2 * np.cos(2 * np.pi * grid.axis_coordinate(0))
        assert np.abs(hess - want).max() < 1e-10 * np.pi**2

    def test_cross_mode_analytic(self):
        # n=2, phi = sin(2 pi x1) sin(2 pi y2): the only coupling is through
        # phi_{x1 y2}, so the off-diagonal entry is (i/4) * d^2 phi/dx1 dy2
        grid = TorusGrid(n=2, N=16)
        phi = build_field(grid, [(1.0, [("sin", 0, 1), ("sin", 3, 1)])])
        hess = complex_hessian(phi).values
        x1 = grid.axis_coordinate(0)
        y2 = grid.axis_coordinate(3)
        want_offdiag = 0.25j * (2 * np.pi) ** 2 * np.cos(2 * np.pi * x1) * np.cos(2 * np.pi * y2)
        assert np.abs(hess[..., 0, 1] - want_offdiag).max() < 1e-10 * np.pi**2
        assert np.abs(hess[..., 1, 0] - np.conj(want_offdiag)).max() < 1e-10 * np.pi**2
        # diagonal entries: (1/4) d^2/dx1^2 and (1/4) d^2/dy2^2 respectively
        s = np.sin(2 * np.pi * x1) * np.sin(2 * np.pi * y2)
        assert np.abs(hess[..., 0, 0] - (-np.pi**2 * s)).max() < 1e-10 * np.pi**2
        assert np.abs(hess[..., 1, 1] - (-np.pi**2 * s)).max() < 1e-10 * np.pi**2

    def test_zero_mean_per_entry(self):
        grid = TorusGrid(n=2, N=16)
        phi = build_field(grid, [(0.3, [("sin", 0, 2), ("cos", 3, 1)]),
                                 (0.1, [("cos", 1, 3)])])
        hess = complex_hessian(phi).values
        means = hess.reshape(-1, 2, 2).mean(axis=0)
        assert np.abs(means).max() < 1e-12

    def test_hermitian_output(self):
        grid = TorusGrid(n=2, N=16)
        phi = build_field(grid, [(0.2, [("sin", 0, 1), ("cos", 2, 2)])])
        hess = complex_hessian(phi).values
        assert np.abs(hess - np.conj(np.swapaxes(hess, -1, -2))).max() < 1e-12


class TestChiField:
    def test_zero_potential_is_background(self):
        bg = make_bg(H=np.diag([2.0, 1.0]))
        phi = PotentialField(bg.grid, bg.grid.zeros())
        chi = chi_field(bg, phi)
        assert np.abs(chi.values - np.diag([2.0, 1.0])).max() < 1e-14

    def test_perturbation_eigenvalue(self):
        # phi = eps cos(2 pi x1), H = I: min eigenvalue 1 - pi^2 eps
        eps = 0.01
        bg = make_bg(n=2, N=16)
        phi = build_field(bg.grid, [(eps, [("cos", 0, 1)])])
        eigs = relative_eigen_field(chi_field(bg, phi), bg.G)
        assert eigs[..., -1].min() == pytest.approx(1 - np.pi**2 * eps, rel=1e-10)

    def test_degenerate_error_names_point(self):
        bg = make_bg(n=2, N=16)
        phi = build_field(bg.grid, [(0.5, [("cos", 0, 1)])])
        with pytest.raises(MetricDegenerateError, match="grid point"):
            chi_field(bg, phi)


class TestIntegrate:
    def test_examples(self):
        grid = TorusGrid(n=1, N=64)
        one = np.ones(grid.shape)
        assert integrate(one, grid) == pytest.approx(1.0)
        x = grid.axis_coordinate(0)
        assert integrate(np.cos(2 * np.pi * x), grid) == pytest.approx(0.0, abs=1e-14)
        assert integrate(np.cos(2 * np.pi * x) ** 2, grid) == pytest.approx(0.5, rel=1e-12)

    def test_volume_scales_with_detG(self):
        grid = TorusGrid(n=2, N=8)
        bg = BackgroundData(grid=grid, G=np.diag([2.0, 3.0]), H=np.diag([2.0, 3.0]), k=1)
        assert geometry.volume(bg) == pytest.approx(6.0)
        assert integrate(np.ones(grid.shape), grid, bg) == pytest.approx(6.0)


class TestClassConstants:
    def test_identity_background(self):
        for n in (1, 2, 3):
            bg = make_bg(n=n, N=8)
            c, cp = class_constants(bg)
            assert c == pytest.approx(np.ones(n + 1), rel=1e-12)
            assert cp == pytest.approx([math.comb(n, k) for k in range(n + 1)], rel=1e-12)

    def test_diag_example(self):
        bg = make_bg(H=np.diag([2.0, 1.0]))
        c, cp = class_constants(bg)
        assert c[1] == pytest.approx(0.75, rel=1e-12)
        assert cp[1] == pytest.approx(1.5, rel=1e-12)

    def test_cohomology_invariance(self):
        grid = TorusGrid(n=2, N=16)
        psi0 = build_field(grid, [(0.05, [("sin", 0, 1)])])
        bg0 = make_bg(H=np.diag([2.0, 1.0]))
        bg1 = BackgroundData(grid=grid, G=np.eye(2), H=np.diag([2.0, 1.0]), k=1, psi0=psi0)
        c0, _ = class_constants(bg0)
        c1, _ = class_constants(bg1)
        assert c1 == pytest.approx(c0, rel=1e-10)


class TestHelpers:
    def test_oscillation(self):
        grid = TorusGrid(n=1, N=64)
        assert oscillation(PotentialField(grid, np.full(grid.shape, 2.0))) == 0.0
        phi = build_field(grid, [(1.0, [("cos", 0, 1)])])
        assert oscillation(phi) == pytest.approx(2.0, rel=1e-12)
        phi2 = build_field(grid, [(0.3, [("cos", 0, 1)]), (0.1, [])])
        assert oscillation(phi2) == pytest.approx(0.6, rel=1e-12)

    def test_alias_energy_fraction(self):
        grid = TorusGrid(n=1, N=64)
        low = build_field(grid, [(1.0, [("cos", 0, 1)])])
        assert geometry.alias_energy_fraction(low) < 1e-28
        high = build_field(grid, [(1.0, [("cos", 0, 30)])])
        assert geometry.alias_energy_fraction(high) == pytest.approx(1.0)

    def test_snapshot_roundtrip(self, tmp_path):
        grid = TorusGrid(n=2, N=16, active=(0, 3))
        phi = build_field(grid, [(0.25, [("sin", 0, 2), ("cos", 3, 1)])])
        path = tmp_path / "phi.txt"
        save_snapshot(path, phi)
        back = load_snapshot(path)
        assert back.grid == grid
        assert np.array_equal(back.values, phi.values)

    def test_build_field_rejects_unknown_trig(self):
        grid = TorusGrid(n=1, N=8)
        with pytest.raises(ValueError):
            build_field(grid, [(1.0, [("tan", 0, 1)])])

    def test_background_degenerate_raises(self):
        grid = TorusGrid(n=2, N=16)
        psi0 = build_field(grid, [(0.5, [("cos", 0, 1)])])
        bg = BackgroundData(grid=grid, G=np.eye(2), H=np.eye(2), k=1, psi0=psi0)
        with pytest.raises(MetricDegenerateError):
            chi0_field(bg)
