import itertools

import numpy as np
import pytest

from latticeqe.lattice import Wavefunction, cube
from latticeqe.spectra import (
    adjacency_matrix,
    apply_adjacency,
    bloch_basis,
    default_deg_tol,
    degeneracy_classes,
    dirichlet_eigenpair,
    dirichlet_eigenvalue,
    lemma_c1_count,
    lemma_c1_counts,
    periodic_eigenpair,
    sine_basis,
    sine_matrix,
)


class TestDirichletEigenpairs:
    def test_two_site_eigenvalue(self):
        lam, _ = dirichlet_eigenpair(2, 1, (1,))
        assert lam == pytest.approx(2 * np.cos(np.pi / 3))
        assert lam == pytest.approx(1.0)

    def test_cancelling_frequencies(self):
        lam, _ = dirichlet_eigenpair(2, 2, (1, 2))
        assert lam == pytest.approx(0.0, abs=1e-15)

    def test_three_site_vector(self):
        _, vec = dirichlet_eigenpair(3, 1, (1,))
        assert np.allclose(vec.values, [0.5, np.sqrt(2) / 2, 0.5])

    def test_frequency_out_of_range(self):
        with pytest.raises(IndexError):
            dirichlet_eigenpair(3, 1, (4,))
        with pytest.raises(IndexError):
            dirichlet_eigenvalue(3, 2, (1, 0))


class TestPeriodicEigenpairs:
    def test_constant_mode(self):
        lam, vec = periodic_eigenpair(4, 1, (0,))
        assert lam == pytest.approx(2.0)
        assert np.allclose(np.abs(vec.values), 0.5)

    def test_quarter_mode(self):
        lam, _ = periodic_eigenpair(4, 1, (1,))
        assert lam == pytest.approx(0.0, abs=1e-15)

    def test_bloch_gram_identity(self):
        vecs = np.column_stack([periodic_eigenpair(4, 1, (k,))[1].values for k in range(4)])
        gram = vecs.conj().T @ vecs
        assert np.max(np.abs(gram - np.eye(4))) < 1e-12


class TestApplyAdjacency:
    def test_delta_dirichlet(self):
        psi = Wavefunction(cube(3, 1), [1.0, 0.0, 0.0])
        assert np.allclose(apply_adjacency(psi, "dirichlet").values, [0, 1, 0])

    def test_delta_periodic(self):
        psi = Wavefunction(cube(3, 1), [1.0, 0.0, 0.0])
        assert np.allclose(apply_adjacency(psi, "periodic").values, [0, 1, 1])

    def test_sine_eigenrelation_2d(self):
        N = 5
        for k in itertools.product(range(1, N + 1), repeat=2):
            lam, vec = dirichlet_eigenpair(N, 2, k)
            err = apply_adjacency(vec, "dirichlet").values - lam * vec.values
            assert np.max(np.abs(err)) < 1e-12

    def test_bloch_eigenrelation(self):
        N = 5
        for k in range(N):
            lam, vec = periodic_eigenpair(N, 1, (k,))
            err = apply_adjacency(vec, "periodic").values - lam * vec.values
            assert np.max(np.abs(err)) < 1e-12

    def test_matches_dense_matrix(self):
        rng = np.random.default_rng(2)
        box = cube(4, 2)
        psi = Wavefunction(box, rng.normal(size=box.volume))
        for mode in ("dirichlet", "periodic"):
            A = adjacency_matrix(box, mode)
            assert np.allclose(A @ psi.values, apply_adjacency(psi, mode).values)

    def test_periodic_small_sides(self):
        # side 2 wraps onto the single neighbor twice, side 1 onto itself
        A2 = adjacency_matrix(cube(2, 1), "periodic")
        assert np.array_equal(A2, [[0, 2], [2, 0]])
        A1 = adjacency_matrix(cube(1, 1), "periodic")
        assert np.array_equal(A1, [[2]])


class TestBases:
    @pytest.mark.parametrize("d,nmax", [(1, 12), (2, 12)])
    def test_sine_gram_identity(self, d, nmax):
        for N in (2, 5, nmax):
            basis = sine_basis(N, d)
            gram = basis.vectors.T @ basis.vectors
            assert np.max(np.abs(gram - np.eye(basis.n))) < 1e-10

    def test_bloch_gram_identity_2d(self):
        basis = bloch_basis(5, 2)
        gram = basis.vectors.conj().T @ basis.vectors
        assert np.max(np.abs(gram - np.eye(basis.n))) < 1e-10

    @pytest.mark.parametrize("d,N", [(1, 8), (2, 6), (3, 8)])
    def test_eigen_residuals(self, d, N):
        basis = sine_basis(N, d)
        for j in range(basis.n):
            psi = Wavefunction(basis.box, basis.vectors[:, j])
            err = apply_adjacency(psi, "dirichlet").values - basis.eigenvalues[j] * psi.values
            assert np.max(np.abs(err)) <= 1e-12 * 2 * d

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_spectral_radius(self, d):
        basis = sine_basis(4, d)
        assert np.all(np.abs(basis.eigenvalues) <= 2 * d + 1e-12)
        per = bloch_basis(4, d)
        assert np.all(np.abs(per.eigenvalues) <= 2 * d + 1e-12)

    def test_eigenvalues_ascending(self):
        basis = sine_basis(7, 2)
        assert np.all(np.diff(basis.eigenvalues) >= 0)


class TestDegeneracyClasses:
    def test_2d_two_site_spectrum(self):
        basis = sine_basis(2, 2)
        sizes = [len(c) for c in basis.classes]
        assert sizes == [1, 2, 1]

    @pytest.mark.parametrize("N", [3, 7, 20, 51])
    def test_1d_simple(self, N):
        basis = sine_basis(N, 1)
        assert all(len(c) == 1 for c in basis.classes)

    def test_permutations_share_class(self):
        for N in (3, 5, 8):
            basis = sine_basis(N, 2)
            cls_of = {}
            for ci, cls in enumerate(basis.classes):
                for j in cls:
                    cls_of[basis.freqs[j]] = ci
            for freq, ci in cls_of.items():
                assert cls_of[freq[::-1]] == ci

    def test_tolerance_grouping(self):
        classes = degeneracy_classes([0.0, 1e-12, 0.5, 0.5 + 1e-12, 2.0], 1e-9)
        assert classes == [[0, 1], [2, 3], [4]]

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            degeneracy_classes([1.0, 0.0], 1e-9)

    def test_genuine_gaps_resolve_at_desk_scale(self):
        # distinct analytic eigenvalues stay far above the class tolerance
        for N in range(2, 13):
            vals = np.sort(sine_matrix(N, 2)[2])
            gaps = np.diff(vals)
            gaps = gaps[gaps > default_deg_tol(2)]
            assert gaps.min() > 1e-3


def brute_force_pair_count(N, d, t, eps, epp, tol):
    table = 2.0 * np.cos(np.arange(1, N + 1) * np.pi / (N + 1))
    count = 0
    for k in itertools.product(range(1, N + 1), repeat=d):
        for m in itertools.product(range(1, N + 1), repeat=d):
            if any(k[l] * eps[l] + m[l] * epp[l] != t[l] for l in range(d)):
                continue
            lam_k = sum(table[c - 1] for c in k)
            lam_m = sum(table[c - 1] for c in m)
            if abs(lam_k - lam_m) <= tol:
                count += 1
    return count


class TestLemmaC1:
    def test_example_single_pair(self):
        assert lemma_c1_count(5, 1, (2 / 6,), (1,), (1,)) == 1
        assert brute_force_pair_count(5, 1, (2,), (1,), (1,), 4e-9) == 1

    def test_matches_brute_force(self):
        rng = np.random.default_rng(3)
        for d, N in [(1, 6), (2, 4), (2, 5)]:
            for _ in range(25):
                t = tuple(int(rng.integers(-2 * N, 2 * N + 1)) for _ in range(d))
                if all(c == 0 for c in t):
                    continue
                eps = tuple(int(c) for c in rng.choice([1, -1], size=d))
                epp = tuple(int(c) for c in rng.choice([1, -1], size=d))
                theta = tuple(c / (N + 1) for c in t)
                assert lemma_c1_count(N, d, theta, eps, epp) == brute_force_pair_count(
                    N, d, t, eps, epp, default_deg_tol(d)
                )

    def test_1d_bound(self):
        N = 9
        for t in range(-2 * N, 2 * N + 1):
            if t == 0:
                continue
            for eps in ((1,), (-1,)):
                for epp in ((1,), (-1,)):
                    assert lemma_c1_count(N, 1, (t / (N + 1),), eps, epp) <= 2

    def test_counts_match_single_queries(self):
        N, d = 6, 2
        counts = lemma_c1_counts(N, d)
        rng = np.random.default_rng(4)
        keys = sorted(counts)
        for key in [keys[int(i)] for i in rng.integers(0, len(keys), size=10)]:
            t, eps, epp = key
            theta = tuple(c / (N + 1) for c in t)
            assert lemma_c1_count(N, d, theta, eps, epp) == counts[key]
        # a key absent from the exhaustive map must count zero
        assert lemma_c1_count(N, d, (1 / (N + 1), 2 / (N + 1)), (1, 1), (1, 1)) == counts.get(
            ((1, 2), (1, 1), (1, 1)), 0
        )

    def test_exhaustive_bound_2d(self):
        for N in range(2, 9):
            counts = lemma_c1_counts(N, 2)
            assert max(counts.values()) <= 2 * N

    def test_zero_theta_rejected(self):
        with pytest.raises(ValueError, match="theta = 0"):
            lemma_c1_count(5, 1, (0.0,), (1,), (1,))

    def test_malformed_theta_rejected(self):
        with pytest.raises(ValueError):
            lemma_c1_count(5, 1, (0.3,), (1,), (1,))
        with pytest.raises(ValueError):
            lemma_c1_count(5, 1, ((2 * 5 + 1) / 6,), (1,), (1,))
