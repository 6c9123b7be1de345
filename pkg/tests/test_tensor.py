import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantumfed.tensor import (
    DimensionError,
    NonHermitianError,
    commutator,
    embed_on_qubits,
    haar_state,
    haar_unitary,
    matexp_hermitian,
    partial_trace,
    pauli_basis,
    tensor,
)

from conftest import I2, X, Y, Z, random_density, random_hermitian


class TestTensor:
    def test_identity(self):
        np.testing.assert_array_equal(tensor(I2, I2), np.eye(4))

    def test_z_with_zero_projector(self):
        p0 = np.diag([1, 0]).astype(complex)
        # by hand: only (0,0) -> 1*1 and (2,2) -> -1*1 survive
        expected = np.zeros((4, 4), dtype=complex)
        expected[0, 0] = 1
        expected[2, 2] = -1
        np.testing.assert_array_equal(tensor(Z, p0), expected)

    def test_trace_multiplicative(self, rng):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        assert np.trace(tensor(a, b)) == pytest.approx(np.trace(a) * np.trace(b), abs=1e-12)

    def test_guard(self):
        with pytest.raises(DimensionError):
            tensor(np.eye(2**6), np.eye(2**5))


class TestPartialTrace:
    def test_product_state(self, rng):
        rho, sigma = random_density(2, rng), random_density(1, rng)
        out = partial_trace(tensor(rho, sigma), ["a", "b", "c"], {"c"})
        np.testing.assert_allclose(out, rho, atol=1e-12)

    def test_full_trace(self, rng):
        m = random_density(3, rng)
        out = partial_trace(m, [0, 1, 2], {0, 1, 2})
        assert out.shape == (1, 1)
        assert out[0, 0] == pytest.approx(np.trace(m), abs=1e-12)

    @pytest.mark.parametrize("traced", [{0}, {1}])
    def test_bell_state(self, traced):
        phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        out = partial_trace(np.outer(phi, phi.conj()), [0, 1], traced)
        np.testing.assert_allclose(out, I2 / 2, atol=1e-15)

    def test_keeps_layout_order(self, rng):
        a, b, c = random_density(1, rng), random_density(1, rng), random_density(1, rng)
        out = partial_trace(tensor(tensor(a, b), c), ["x", "y", "z"], {"y"})
        np.testing.assert_allclose(out, tensor(a, c), atol=1e-12)

    def test_unknown_qubit(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(4), [0, 1], {2})

    def test_batched(self, rng):
        ms = np.stack([random_density(2, rng) for _ in range(3)])
        out = partial_trace(ms, [0, 1], {1})
        for m, o in zip(ms, out):
            np.testing.assert_allclose(o, partial_trace(m, [0, 1], {1}), atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(
        n_keep=st.integers(1, 2),
        n_traced=st.integers(1, 2),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_factorization_property(self, n_keep, n_traced, seed):
        r = np.random.default_rng(seed)
        rho = random_density(n_keep, r)
        sigma = random_hermitian(2**n_traced, r)
        layout = list(range(n_keep + n_traced))
        out = partial_trace(tensor(rho, sigma), layout, set(layout[n_keep:]))
        np.testing.assert_allclose(out, rho * np.trace(sigma), atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), mask=st.integers(0, 15))
    def test_trace_preserved(self, seed, mask):
        r = np.random.default_rng(seed)
        m = r.standard_normal((16, 16)) + 1j * r.standard_normal((16, 16))
        traced = {i for i in range(4) if mask >> i & 1}
        out = partial_trace(m, [0, 1, 2, 3], traced)
        assert np.trace(out) == pytest.approx(np.trace(m), abs=1e-12)


class TestMatexp:
    def test_zero(self):
        np.testing.assert_allclose(matexp_hermitian(np.zeros((4, 4)), 0.3), np.eye(4), atol=1e-15)

    def test_pauli_z_pi(self):
        np.testing.assert_allclose(matexp_hermitian(Z, np.pi), -np.eye(2), atol=1e-15)

    def test_unitary_and_inverse(self, rng):
        for _ in range(20):
            h = random_hermitian(8, rng)
            u = matexp_hermitian(h, 0.7)
            assert np.linalg.norm(u.conj().T @ u - np.eye(8)) < 1e-10
            assert np.linalg.norm(u @ matexp_hermitian(h, -0.7) - np.eye(8)) < 1e-10

    def test_matches_taylor_series(self, rng):
        h = random_hermitian(4, rng, scale=0.3)
        term, total = np.eye(4, dtype=complex), np.eye(4, dtype=complex)
        for k in range(1, 30):
            term = term @ (1j * h) / k
            total = total + term
        np.testing.assert_allclose(matexp_hermitian(h, 1.0), total, atol=1e-13)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianError):
            matexp_hermitian(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


class TestHaar:
    def test_unitary(self, rng):
        for q in (1, 2, 3):
            u = haar_unitary(q, rng)
            assert np.linalg.norm(u.conj().T @ u - np.eye(2**q)) < 1e-10

    def test_deterministic(self):
        a = haar_unitary(3, np.random.default_rng(7))
        b = haar_unitary(3, np.random.default_rng(7))
        assert a.tobytes() == b.tobytes()

    def test_first_moment(self):
        r = np.random.default_rng(0)
        vals = [abs(haar_unitary(1, r)[0, 0]) ** 2 for _ in range(10_000)]
        assert np.mean(vals) == pytest.approx(0.5, abs=0.02)

    def test_second_moment(self):
        # E|U_00|^4 = 2 / (d (d + 1)) for Haar on U(d); d = 2 -> 1/3
        r = np.random.default_rng(1)
        vals = [abs(haar_unitary(1, r)[0, 0]) ** 4 for _ in range(10_000)]
        assert np.mean(vals) == pytest.approx(1 / 3, abs=0.02)

    def test_state(self):
        r = np.random.default_rng(3)
        psi = haar_state(3, r)
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_array_equal(psi, haar_state(3, np.random.default_rng(3)))
        vals = [abs(haar_state(1, r)[0]) ** 2 for _ in range(10_000)]
        assert np.mean(vals) == pytest.approx(0.5, abs=0.02)


class TestEmbed:
    def test_identity(self):
        np.testing.assert_array_equal(embed_on_qubits(np.eye(4), ["b", "c"], ["a", "b", "c"]), np.eye(8))

    def test_bitflip(self):
        full = embed_on_qubits(X, [1], [0, 1])
        ket00 = np.array([1, 0, 0, 0])
        np.testing.assert_array_equal(full @ ket00, [0, 1, 0, 0])

    def test_leading_targets_match_tensor(self, rng):
        op = haar_unitary(2, rng)
        np.testing.assert_allclose(embed_on_qubits(op, [0, 1], [0, 1, 2]), tensor(op, I2), atol=1e-15)

    def test_target_order(self, rng):
        a, b = haar_unitary(1, rng), haar_unitary(1, rng)
        full = embed_on_qubits(tensor(a, b), [2, 0], [0, 1, 2])
        np.testing.assert_allclose(full, tensor(tensor(b, I2), a), atol=1e-14)

    def test_composition(self, rng):
        a, b = haar_unitary(2, rng), haar_unitary(2, rng)
        layout, targets = [0, 1, 2, 3], [3, 1]
        np.testing.assert_allclose(
            embed_on_qubits(a @ b, targets, layout),
            embed_on_qubits(a, targets, layout) @ embed_on_qubits(b, targets, layout),
            atol=1e-13,
        )

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            embed_on_qubits(np.eye(4), [0], [0, 1])


class TestCommutator:
    def test_self(self, rng):
        a = random_hermitian(4, rng)
        np.testing.assert_array_equal(commutator(a, a), np.zeros((4, 4)))

    def test_pauli(self):
        np.testing.assert_array_equal(commutator(X, Y), 2j * Z)

    def test_anti_hermitian(self, rng):
        c = commutator(random_hermitian(4, rng), random_hermitian(4, rng))
        np.testing.assert_allclose(c.conj().T, -c, atol=1e-14)

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            commutator(np.eye(2), np.eye(4))


class TestPauliBasis:
    def test_single_qubit(self):
        basis = pauli_basis(1)
        for got, want in zip(basis, (I2, X, Y, Z)):
            np.testing.assert_array_equal(got, want)

    @pytest.mark.parametrize("q", [1, 2, 3])
    def test_orthogonal_and_hermitian(self, q):
        basis = pauli_basis(q)
        assert len(basis) == 4**q
        gram = np.array([[np.trace(a @ b) for b in basis] for a in basis])
        np.testing.assert_allclose(gram, 2**q * np.eye(4**q), atol=1e-12)
        for p in basis:
            np.testing.assert_array_equal(p, p.conj().T)

    def test_completeness(self, rng):
        q = 3
        x = random_hermitian(2**q, rng)
        recon = sum(np.trace(x @ p) * p for p in pauli_basis(q))
        np.testing.assert_allclose(recon / 2**q, x, atol=1e-10)

    def test_guard(self):
        with pytest.raises(DimensionError):
            pauli_basis(6)
