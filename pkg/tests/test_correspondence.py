import numpy as np
import pytest

from latticeqe.correspondence import (
    complete_to_periodic_basis,
    embed,
    embed_block,
    embed_by_reflections,
    extend_observable,
    reflect,
    verify_correspondence,
    verify_correspondence_family,
)
from latticeqe.lattice import LatticeBox, Observable, UnsupportedPeriodError, Wavefunction, cube
from latticeqe.spectra import (
    apply_adjacency,
    dirichlet_eigenvalues,
    periodic_eigenvalues,
    sine_basis,
)
from latticeqe.time_average import expectations


class TestReflect:
    def test_side_four(self):
        assert reflect((1,), 1, cube(4, 1)) == (3,)

    def test_involution_side_six(self):
        box = cube(6, 1)
        for x in box.sites():
            assert reflect(reflect(x, 1, box), 1, box) == x

    def test_second_coordinate(self):
        assert reflect((2, 5), 2, LatticeBox((6, 6))) == (2, 1)

    def test_fixed_points(self):
        box = cube(6, 1)
        assert reflect((3,), 1, box) == (3,)
        assert reflect((6,), 1, box) == (6,)

    def test_odd_side_rejected(self):
        with pytest.raises(ValueError, match="even side"):
            reflect((1,), 1, cube(5, 1))


class TestEmbed:
    def test_single_site(self):
        psi = Wavefunction(cube(1, 1), [1.0])
        out = embed(psi)
        assert out.box.sides == (4,)
        assert np.allclose(out.values, np.array([1.0, 0.0, -1.0, 0.0]) / np.sqrt(2))

    def test_two_site_ground_state(self):
        s1 = Wavefunction(cube(2, 1), [1 / np.sqrt(2), 1 / np.sqrt(2)])
        out = embed(s1)
        assert np.allclose(out.values, [0.5, 0.5, 0.0, -0.5, -0.5, 0.0])

    def test_norm_preserved(self):
        rng = np.random.default_rng(20)
        box = cube(3, 2)
        for _ in range(50):
            vals = rng.normal(size=box.volume)
            vals /= np.linalg.norm(vals)
            assert embed(Wavefunction(box, vals)).norm() == pytest.approx(1.0, abs=1e-12)

    def test_constructions_agree_exactly(self):
        rng = np.random.default_rng(21)
        for sides in [(3,), (4,), (2, 3), (2, 2, 3)]:
            box = LatticeBox(sides)
            psi = Wavefunction(box, rng.normal(size=box.volume))
            assert np.array_equal(embed(psi).values, embed_by_reflections(psi).values)

    def test_defining_conditions(self):
        rng = np.random.default_rng(22)
        box = cube(3, 2)
        psi = Wavefunction(box, rng.normal(size=box.volume))
        image = embed(psi)
        target = image.box
        grid = image.grid()
        n = 3
        # restriction to the source block
        assert np.allclose(grid[:n, :n], psi.grid() / 2.0)
        # zero on divisible hyperplanes
        for x in target.sites():
            if any(xl % (n + 1) == 0 for xl in x):
                assert grid[tuple(c - 1 for c in x)] == 0.0
        # antisymmetry under each reflection
        for l in (1, 2):
            for x in target.sites():
                rx = reflect(x, l, target)
                assert grid[tuple(c - 1 for c in rx)] == -grid[tuple(c - 1 for c in x)]

    def test_injective_restriction(self):
        rng = np.random.default_rng(23)
        box = cube(4, 1)
        psi = Wavefunction(box, rng.normal(size=box.volume))
        image = embed(psi)
        recovered = 2 ** (box.d / 2) * image.grid()[: box.sides[0]]
        assert np.allclose(recovered, psi.values)

    def test_complex_input(self):
        psi = Wavefunction(cube(2, 1), [1j / np.sqrt(2), 1 / np.sqrt(2)])
        out = embed(psi)
        assert out.norm() == pytest.approx(1.0, abs=1e-12)


class TestEmbedBlock:
    def test_mixed_periods(self):
        box = LatticeBox((2, 4))  # q = (1, 2), N = 2
        psi = Wavefunction(box, np.ones(box.volume) / np.sqrt(box.volume))
        out = embed_block(psi, (1, 2), 2)
        assert out.box.sides == (6, 10)
        assert out.norm() == pytest.approx(1.0, abs=1e-12)

    def test_long_periods_refused(self):
        box = LatticeBox((6,))
        psi = Wavefunction(box, np.ones(6) / np.sqrt(6))
        with pytest.raises(UnsupportedPeriodError):
            embed_block(psi, (3,), 2)

    def test_side_mismatch(self):
        psi = Wavefunction(LatticeBox((4,)), np.ones(4) / 2)
        with pytest.raises(ValueError, match="q\\*N"):
            embed_block(psi, (2,), 3)


class TestCorrespondence:
    def test_two_site_ground_state_residual(self):
        lam = 2 * np.cos(np.pi / 3)
        s1 = Wavefunction(cube(2, 1), [1 / np.sqrt(2), 1 / np.sqrt(2)])
        assert verify_correspondence(s1, lam) <= 1e-12

    def test_full_basis_2d(self):
        basis = sine_basis(4, 2)
        max_residual, gram_error = verify_correspondence_family(basis)
        assert max_residual <= 1e-10
        assert gram_error <= 1e-12

    def test_gram_identity_1d(self):
        basis = sine_basis(5, 1)
        _, gram_error = verify_correspondence_family(basis)
        assert gram_error <= 1e-12

    def test_rejects_unnormalized(self):
        psi = Wavefunction(cube(2, 1), [1.0, 1.0])
        with pytest.raises(ValueError, match="not normalized"):
            verify_correspondence(psi, 1.0)

    @pytest.mark.parametrize("d,N", [(1, 5), (2, 4), (2, 6)])
    def test_spectral_inclusion(self, d, N):
        dir_eigs = dirichlet_eigenvalues(N, d)
        per_eigs = periodic_eigenvalues(2 * N + 2, d)
        for lam in dir_eigs:
            assert np.min(np.abs(per_eigs - lam)) <= 1e-10


class TestExtendObservable:
    def test_uniform_average_rescales(self):
        a = Observable.diagonal(cube(3, 1), np.ones(3))
        ext = extend_observable(a)
        assert ext.box.sides == (8,)
        assert ext.diag().mean() == pytest.approx(3 / 8)
        assert (8 / 3) * ext.diag().mean() == pytest.approx(a.diag().mean())

    def test_zero_extends_to_zero(self):
        a = Observable.diagonal(cube(3, 1), np.zeros(3))
        assert np.all(extend_observable(a).diag() == 0)

    def test_quadratic_form_identity(self):
        rng = np.random.default_rng(24)
        box = cube(3, 2)
        for _ in range(20):
            vals = rng.normal(size=box.volume)
            vals /= np.linalg.norm(vals)
            psi = Wavefunction(box, vals)
            a = Observable.diagonal(box, rng.uniform(-1, 1, box.volume))
            image = embed(psi)
            ext = extend_observable(a)
            lhs = np.sum(a.diag() * np.abs(psi.values) ** 2)
            rhs = 4 * np.sum(ext.diag() * np.abs(image.values) ** 2)
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_kernel_quadratic_form_identity(self):
        rng = np.random.default_rng(25)
        box = cube(4, 1)
        vals = rng.normal(size=4)
        vals /= np.linalg.norm(vals)
        psi = Wavefunction(box, vals)
        offsets = {}
        for z in (-1, 0, 1):
            entry = rng.uniform(-1, 1, 4)
            lo, hi = max(0, -z), min(4, 4 - z)
            masked = np.zeros(4)
            masked[lo:hi] = entry[lo:hi]
            offsets[(z,)] = masked
        K = Observable.kernel(box, offsets)
        ext = extend_observable(K)
        image = embed(psi)
        lhs = psi.values @ K.to_matrix() @ psi.values
        rhs = 2 * (image.values @ ext.to_matrix() @ image.values)
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestBasisCompletion:
    @pytest.mark.parametrize("d,N", [(1, 3), (2, 2)])
    def test_completion_is_eigenbasis(self, d, N):
        basis = sine_basis(N, d)
        embedded = np.column_stack(
            [embed(Wavefunction(basis.box, basis.vectors[:, j])).values for j in range(basis.n)]
        )
        full = complete_to_periodic_basis(embedded, basis.eigenvalues, N, d)
        side = 2 * N + 2
        assert full.n == side**d
        gram = full.vectors.conj().T @ full.vectors
        assert np.max(np.abs(gram - np.eye(full.n))) < 1e-10
        for j in range(full.n):
            psi = Wavefunction(full.box, full.vectors[:, j])
            err = apply_adjacency(psi, "periodic").values - full.eigenvalues[j] * psi.values
            assert np.max(np.abs(err)) < 1e-9

    def test_contains_embedded_family(self):
        N, d = 3, 1
        basis = sine_basis(N, d)
        embedded = np.column_stack(
            [embed(Wavefunction(basis.box, basis.vectors[:, j])).values for j in range(basis.n)]
        )
        full = complete_to_periodic_basis(embedded, basis.eigenvalues, N, d)
        overlap = np.abs(full.vectors.conj().T @ embedded)
        # each embedded vector appears verbatim among the completed columns
        assert np.allclose(np.max(overlap, axis=0), 1.0, atol=1e-12)

    def test_periodic_correlator_blind_to_kernel_averaging(self):
        # zero-extended kernels and their offset-averaged versions give the
        # same wraparound correlator: only per-offset sums enter
        from latticeqe.correlators import averaged_kernel, correlator
        from latticeqe.lattice import shift_set

        rng = np.random.default_rng(27)
        box = cube(4, 1)
        offsets = {}
        for z in ((-1,), (0,), (1,), (2,)):
            vals = rng.uniform(-1, 1, 4)
            vals[~shift_set(box, z).mask] = 0.0
            offsets[z] = vals
        K = Observable.kernel(box, offsets)
        ext = extend_observable(K)
        ext_avg = extend_observable(averaged_kernel(K))
        raw = rng.normal(size=ext.box.volume)
        psi = Wavefunction(ext.box, raw / np.linalg.norm(raw))
        lhs = correlator(ext, psi, "periodic")
        rhs = correlator(ext_avg, psi, "periodic")
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_periodic_expectations_transfer(self):
        # embedded observables reproduce source expectations inside the big basis
        N, d = 3, 1
        basis = sine_basis(N, d)
        rng = np.random.default_rng(26)
        a = Observable.diagonal(basis.box, rng.uniform(-1, 1, basis.n))
        embedded = np.column_stack(
            [embed(Wavefunction(basis.box, basis.vectors[:, j])).values for j in range(basis.n)]
        )
        full = complete_to_periodic_basis(embedded, basis.eigenvalues, N, d)
        ext = extend_observable(a)
        big = expectations(full, ext)
        small = expectations(basis, a)
        for j in range(basis.n):
            matches = np.isclose(2**d * big, small[j], atol=1e-10)
            assert matches.any()
