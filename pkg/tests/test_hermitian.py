import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sigmaflow import hermitian
from sigmaflow.symfun import esp_batched


def random_positive(rng, n):
    d = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), n))
    R = rng.standard_normal((n, n))
    Q = rng.standard_normal((n, n))
    S = 0.5 * (R + R.T) + 0.5j * (Q - Q.T)
    eps = 0.45 * d.min() / max(np.linalg.norm(S), 1e-300)
    return np.diag(d).astype(complex) + eps * S


class TestHermitianMatrix:
    def test_symmetrizes_and_freezes(self):
        A = hermitian.as_hermitian([[2, 1], [1, 2]])
        assert A.n == 2
        with pytest.raises(ValueError):
            A.entries[0, 0] = 5.0

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            hermitian.as_hermitian([[0, 1], [0, 0]])

    def test_rejects_large_dimension(self):
        with pytest.raises(ValueError):
            hermitian.as_hermitian(np.eye(5))

    def test_require_positive(self):
        with pytest.raises(hermitian.DomainError):
            hermitian.as_hermitian(np.diag([1.0, -1.0])).require_positive()


class TestEigvals:
    def test_examples(self):
        assert hermitian.eigvals(np.eye(3)) == pytest.approx([1, 1, 1])
        assert hermitian.eigvals([[2, 1], [1, 2]]) == pytest.approx([3, 1])
        assert hermitian.eigvals(np.diag([5.0, -1.0])) == pytest.approx([5, -1])

    def test_descending_and_matches_numpy(self):
        rng = np.random.default_rng(7)
        for n in (1, 2, 3, 4):
            for _ in range(20):
                A = random_positive(rng, n)
                got = hermitian.eigvals(A)
                want = np.linalg.eigvalsh(A)[::-1]
                assert got == pytest.approx(want, rel=1e-12, abs=1e-12)
                assert np.all(np.diff(got) <= 1e-12)

    def test_complex_two_by_two(self):
        A = np.array([[2.0, 1.0 + 1.0j], [1.0 - 1.0j, 2.0]])
        want = np.linalg.eigvalsh(A)[::-1]
        assert hermitian.eigvals(A) == pytest.approx(want, rel=1e-14)


class TestEigvalsMetric:
    def test_examples(self):
        A = [[2, 1], [1, 2]]
        assert hermitian.eigvals_metric(A, np.eye(2)) == pytest.approx(
            hermitian.eigvals(A))
        G = [[3, 0.5], [0.5, 1]]
        assert hermitian.eigvals_metric(2 * np.array(G, dtype=float), G) == pytest.approx([2, 2])
        assert hermitian.eigvals_metric(np.diag([2.0, 1.0]), np.diag([2.0, 1.0])) == pytest.approx([1, 1])

    def test_congruence_invariance(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            A = random_positive(rng, 3)
            G = random_positive(rng, 3)
            S = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            base = hermitian.eigvals_metric(A, G)
            moved = hermitian.eigvals_metric(S @ A @ S.conj().T, S @ G @ S.conj().T)
            assert moved == pytest.approx(base, rel=1e-10, abs=1e-10)

    def test_rejects_indefinite_background(self):
        with pytest.raises(hermitian.DomainError):
            hermitian.eigvals_metric(np.eye(2), np.diag([1.0, -1.0]))


class TestMinorDets:
    def test_example(self):
        d, dI, dC = hermitian.minor_dets([[2, 1], [1, 2]], [0])
        assert (d, dI, dC) == pytest.approx((3.0, 2.0, 2.0))
        assert d <= dI * dC

    def test_diagonal_equality(self):
        d, dI, dC = hermitian.minor_dets(np.diag([3.0, 2.0, 1.0]), [0, 2])
        assert d == pytest.approx(dI * dC, rel=1e-12)

    def test_fischer_random(self):
        rng = np.random.default_rng(3)
        for n in (2, 3, 4):
            for _ in range(50):
                A = random_positive(rng, n)
                for r in range(1, n):
                    I = list(rng.choice(n, size=r, replace=False))
                    d, dI, dC = hermitian.minor_dets(A, I)
                    assert d <= dI * dC * (1 + 1e-12)

    def test_rejects_bad_subset(self):
        with pytest.raises(ValueError):
            hermitian.minor_dets(np.eye(2), [])
        with pytest.raises(ValueError):
            hermitian.minor_dets(np.eye(2), [0, 1])


class TestDiagSigmaGap:
    def test_example(self):
        assert hermitian.diag_sigma_gap([[2, 1], [1, 2]], 1) == pytest.approx(4 / 3 - 1)

    def test_diagonal_zero(self):
        assert hermitian.diag_sigma_gap(np.diag([2.0, 3.0]), 1) == pytest.approx(0.0, abs=1e-14)

    def test_hadamard_special_case(self):
        rng = np.random.default_rng(5)
        for n in (2, 3, 4):
            for _ in range(50):
                A = random_positive(rng, n)
                gap = hermitian.diag_sigma_gap(A, n)
                det = np.linalg.det(A).real
                prod = np.prod(np.diag(A).real)
                # both terms can be ~1e8 for small entries; compare absolutely
                assert gap == pytest.approx(1 / det - 1 / prod,
                                            abs=1e-12 * (1 / det + 1 / prod))
                assert gap >= -1e-12 / det


class TestMixedDiscriminant:
    def test_all_equal_is_det(self):
        rng = np.random.default_rng(9)
        for n in (2, 3, 4):
            A = random_positive(rng, n)
            assert hermitian.mixed_discriminant([(A, n)]) == pytest.approx(
                np.linalg.det(A).real, rel=1e-12)

    def test_wedge_examples(self):
        assert hermitian.wedge_ratio([(np.diag([2.0, 3.0]), 1), (np.eye(2), 1)]) == pytest.approx(2.5)
        a = np.diag([1.0, 1.0, -1.0])
        assert hermitian.wedge_ratio([(a, 2), (np.eye(3), 1)]) == pytest.approx(-1 / 3)

    def test_multilinear_and_symmetric(self):
        rng = np.random.default_rng(13)
        A, B, C = (random_positive(rng, 3) for _ in range(3))
        d1 = hermitian.mixed_discriminant([(A, 1), (B, 1), (C, 1)])
        d2 = hermitian.mixed_discriminant([(C, 1), (A, 1), (B, 1)])
        assert d1 == pytest.approx(d2, rel=1e-12)
        d3 = hermitian.mixed_discriminant([(2.0 * A, 1), (B, 1), (C, 1)])
        assert d3 == pytest.approx(2 * d1, rel=1e-12)

    def test_loewner_monotone_spot(self):
        rng = np.random.default_rng(17)
        A = random_positive(rng, 3)
        B = random_positive(rng, 3)
        bumped = hermitian.mixed_discriminant([(A + np.eye(3), 1), (B, 2)])
        assert bumped > hermitian.mixed_discriminant([(A, 1), (B, 2)])

    def test_sigma_wedge_bridge(self):
        # sigma_j(A rel G)/C(n,j) = wedge_ratio(A^j, G^{n-j}) / det G
        rng = np.random.default_rng(21)
        for n in (2, 3, 4):
            A = random_positive(rng, n)
            G = random_positive(rng, n)
            eigs = hermitian.eigvals_metric(A, G)
            sig = esp_batched(eigs)
            for j in range(n + 1):
                want = sig[j] / math.comb(n, j)
                got = hermitian.wedge_ratio([(A, j), (G, n - j)], G=G)
                assert got == pytest.approx(want, rel=1e-12)

    def test_rejects_wrong_multiplicity(self):
        with pytest.raises(ValueError):
            hermitian.mixed_discriminant([(np.eye(3), 2)])

    def test_batched_matches_scalar(self):
        rng = np.random.default_rng(23)
        mats = [np.stack([random_positive(rng, 3) for _ in range(4)]) for _ in range(3)]
        got = hermitian.mixed_discriminant_batched(mats)
        for b in range(4):
            want = hermitian.mixed_discriminant([(mats[i][b], 1) for i in range(3)])
            assert got[b] == pytest.approx(want, rel=1e-12)
