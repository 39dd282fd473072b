import math

import numpy as np
import pytest

from densecode import channels as ch
from densecode import qmath
from densecode.errors import DimensionMismatchError, InvariantError


def test_tensor_basis_product():
    zero = qmath.basis_state(2, 0).to_density()
    prod = qmath.tensor(zero, zero)
    expected = np.zeros((4, 4))
    expected[0, 0] = 1.0
    assert prod.dims == (2, 2)
    assert np.allclose(prod.entries, expected)


def test_tensor_maximally_mixed():
    half = qmath.maximally_mixed((2,))
    quarter = qmath.tensor(half, half)
    assert quarter.dims == (2, 2)
    assert np.allclose(quarter.entries, np.eye(4) / 4)


def test_tensor_pure_product_of_singlets():
    rho = qmath.singlet().to_density()
    prod = qmath.tensor(rho, rho)
    assert prod.dims == (2, 2, 2, 2)
    eigs = np.linalg.eigvalsh(prod.entries)
    assert eigs[-1] == pytest.approx(1.0, abs=1e-12)
    assert np.sum(eigs > 1e-12) == 1


class TestPartialTrace:
    def test_singlet_marginal(self):
        rho = qmath.singlet().to_density()
        marginal = qmath.partial_trace(rho, {1})
        assert np.allclose(marginal.entries, np.eye(2) / 2)

    def test_product_marginal(self):
        rho = qmath.tensor_pure(qmath.basis_state(2, 0), qmath.basis_state(2, 0)).to_density()
        kept = qmath.partial_trace(rho, {0})
        assert np.allclose(kept.entries, qmath.basis_state(2, 0).to_density().entries)

    def test_recovers_tensor_factor_exactly(self):
        rho = ch.random_state((2, 3), 2, seed=1)
        sigma = ch.random_state((2,), 2, seed=2)
        joint = qmath.tensor(rho, sigma)
        back = qmath.partial_trace(joint, {0, 1})
        assert np.max(np.abs(back.entries - rho.entries)) < 1e-14

    def test_bad_index(self):
        rho = qmath.maximally_mixed((2, 2))
        with pytest.raises(DimensionMismatchError):
            qmath.partial_trace(rho, {5})


class TestEntropy:
    def test_uniform_qubit(self):
        assert qmath.von_neumann_entropy(qmath.maximally_mixed((2,))) == pytest.approx(1.0)

    def test_pure_state(self):
        rho = ch.random_pure((4,), seed=3).to_density()
        assert abs(qmath.von_neumann_entropy(rho)) < 1e-10

    def test_two_level_spectrum(self):
        # Oracle: direct evaluation of -0.9 log2 0.9 - 0.1 log2 0.1.
        expected = -(0.9 * math.log2(0.9) + 0.1 * math.log2(0.1))
        assert expected == pytest.approx(0.4690, abs=1e-4)
        rho = qmath.DensityMatrix((2,), np.diag([0.9, 0.1]).astype(complex))
        assert qmath.von_neumann_entropy(rho) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_unitary_invariance(self, seed):
        rho = ch.random_state((4,), 3, seed=seed)
        u = ch.random_unitary(4, seed + 100)
        rotated = qmath.DensityMatrix((4,), u @ rho.entries @ u.conj().T)
        assert abs(
            qmath.von_neumann_entropy(rotated) - qmath.von_neumann_entropy(rho)
        ) < 1e-10

    @pytest.mark.parametrize("seed", range(5))
    def test_subadditivity(self, seed):
        rho = ch.random_state((2, 3), 4, seed=seed)
        h = qmath.von_neumann_entropy(rho)
        h_a = qmath.von_neumann_entropy(qmath.partial_trace(rho, {0}))
        h_b = qmath.von_neumann_entropy(qmath.partial_trace(rho, {1}))
        assert h <= h_a + h_b + 1e-9

    @pytest.mark.parametrize("seed", range(5))
    def test_entropy_gain_bounded_by_traced_dimension(self, seed):
        rho = ch.random_state((2, 4), 3, seed=seed)
        h = qmath.von_neumann_entropy(rho)
        h_b = qmath.von_neumann_entropy(qmath.partial_trace(rho, {1}))
        assert h >= h_b - math.log2(2) - 1e-9


class TestRelativeEntropy:
    def test_identity_case(self):
        rho = ch.random_state((2, 2), 2, seed=5)
        assert qmath.relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-10)

    def test_singlet_vs_maximally_mixed(self):
        # Oracle: -H(psi) - Tr rho log2(I/4) = 0 + log2 4.
        rho = qmath.singlet().to_density()
        assert qmath.relative_entropy(rho, qmath.maximally_mixed((2, 2))) == pytest.approx(
            2.0, abs=1e-10
        )

    def test_disjoint_support(self):
        a = qmath.basis_state(2, 0).to_density()
        b = qmath.basis_state(2, 1).to_density()
        assert qmath.relative_entropy(a, b) == math.inf

    @pytest.mark.parametrize("seed", range(5))
    def test_nonnegative_and_faithful(self, seed):
        rho = ch.random_state((4,), 4, seed=seed)
        sigma = ch.random_state((4,), 4, seed=seed + 50)
        d = qmath.relative_entropy(rho, sigma)
        assert d >= -1e-10
        if qmath.trace_distance(rho, sigma) < 1e-12:
            assert d < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            qmath.relative_entropy(
                qmath.maximally_mixed((2,)), qmath.maximally_mixed((3,))
            )


class TestTraceDistance:
    def test_zero_on_equal(self):
        rho = ch.random_state((2, 2), 3, seed=7)
        assert qmath.trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_pure_states(self):
        a = qmath.basis_state(2, 0).to_density()
        b = qmath.basis_state(2, 1).to_density()
        assert qmath.trace_distance(a, b) == pytest.approx(2.0)

    def test_mixed_vs_pure(self):
        # Oracle: singular values of diag(1/2, -1/2) sum to 1.
        assert qmath.trace_distance(
            qmath.maximally_mixed((2,)), qmath.basis_state(2, 0).to_density()
        ) == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_monotone_under_partial_trace(self, seed):
        a = ch.random_state((2, 3), 2, seed=seed)
        b = ch.random_state((2, 3), 3, seed=seed + 30)
        full = qmath.trace_distance(a, b)
        reduced = qmath.trace_distance(
            qmath.partial_trace(a, {0}), qmath.partial_trace(b, {0})
        )
        assert reduced <= full + 1e-10

    @pytest.mark.parametrize("seed", range(5))
    def test_monotone_under_channels(self, seed):
        a = ch.random_state((4,), 2, seed=seed)
        b = ch.random_state((4,), 3, seed=seed + 60)
        chan = ch.random_channel(4, 3, 2, seed=seed + 90)
        assert qmath.trace_distance(ch.apply(chan, a), ch.apply(chan, b)) <= (
            qmath.trace_distance(a, b) + 1e-10
        )


class TestPartialTranspose:
    def test_singlet_is_npt(self):
        rho = qmath.singlet().to_density()
        verdict = qmath.is_ppt(rho, {0})
        assert not verdict.ppt
        assert verdict.min_eigenvalue == pytest.approx(-0.5, abs=1e-10)

    def test_maximally_mixed_is_ppt(self):
        verdict = qmath.is_ppt(qmath.maximally_mixed((2, 2)), {0})
        assert verdict.ppt
        assert verdict.min_eigenvalue == pytest.approx(0.25, abs=1e-10)

    def test_product_pure_is_ppt(self):
        rho = qmath.tensor_pure(qmath.basis_state(2, 0), qmath.basis_state(2, 0)).to_density()
        assert qmath.is_ppt(rho, {1}).ppt

    def test_transpose_is_hermitian(self):
        rho = ch.random_state((2, 2), 4, seed=11)
        pt = qmath.partial_transpose(rho, 1)
        assert np.max(np.abs(pt - pt.conj().T)) < 1e-12


class TestSchmidt:
    def test_singlet(self):
        dec = qmath.schmidt(qmath.singlet(), {0})
        assert np.allclose(dec.coefficients, [1 / math.sqrt(2)] * 2)

    def test_product(self):
        psi = qmath.tensor_pure(qmath.basis_state(2, 0), qmath.basis_state(2, 0))
        dec = qmath.schmidt(psi, {0})
        assert dec.coefficients[0] == pytest.approx(1.0)
        assert dec.coefficients[1] == pytest.approx(0.0, abs=1e-12)

    def test_already_schmidt_form(self):
        theta = math.pi / 6
        amps = np.zeros(4, dtype=complex)
        amps[0], amps[3] = math.cos(theta), math.sin(theta)
        dec = qmath.schmidt(qmath.PureState((2, 2), amps), {0})
        assert np.allclose(dec.coefficients, [math.cos(theta), math.sin(theta)])

    @pytest.mark.parametrize("seed", range(4))
    def test_reconstruction(self, seed):
        psi = ch.random_pure((2, 3, 2), seed=seed)
        cut = {0, 2}
        dec = qmath.schmidt(psi, cut)
        assert np.sum(dec.coefficients**2) == pytest.approx(1.0, abs=1e-12)
        rebuilt = sum(
            c * np.kron(dec.left[:, i], dec.right[:, i])
            for i, c in enumerate(dec.coefficients)
        )
        reordered = qmath.permute_factors_pure(psi, (0, 2, 1))
        assert np.max(np.abs(rebuilt - reordered.amplitudes)) < 1e-10


class TestValidation:
    def test_rejects_non_hermitian(self):
        mat = np.array([[0.5, 0.5], [0.0, 0.5]], dtype=complex)
        with pytest.raises(InvariantError):
            qmath.DensityMatrix((2,), mat)

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(InvariantError):
            qmath.DensityMatrix((2,), np.diag([1.5, -0.5]).astype(complex))

    def test_rejects_bad_trace(self):
        with pytest.raises(InvariantError):
            qmath.DensityMatrix((2,), np.diag([0.7, 0.7]).astype(complex))

    def test_rejects_dims_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            qmath.DensityMatrix((2, 2), np.eye(2) / 2)

    def test_rejects_unnormalized_vector(self):
        with pytest.raises(InvariantError):
            qmath.PureState((2,), np.array([1.0, 1.0]))
