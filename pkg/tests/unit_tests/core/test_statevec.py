import numpy as np
import pytest

from prscope.core import statevec as sv
from prscope.core.ensembles import sample_haar_state
from prscope.core.errors import DimensionError, DomainError, ResourceError

BELL = sv.StateVector(2, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_state_vector_validation():
    with pytest.raises(DimensionError):
        sv.StateVector(2, np.ones(3) / np.sqrt(3))
    with pytest.raises(DomainError):
        sv.StateVector(1, np.array([1.0, 1.0]))
    with pytest.raises(DimensionError):
        sv.StateVector.from_amplitudes(np.ones(6))
    with pytest.raises(ResourceError):
        sv.check_dense(sv.DENSE_CAP_QUBITS + 1)
    psi = sv.StateVector.from_amplitudes([1, 1j, 0, 0], normalize=True)
    assert psi.num_qubits == 2
    assert not psi.amps.flags.writeable


def test_basis_order_puts_qubit_zero_first():
    psi = sv.StateVector.basis("100")
    assert np.argmax(np.abs(psi.amps)) == 4
    assert sv.measure_all(psi, np.random.default_rng(0)).tolist() == [1, 0, 0]


def test_density_matrix_validation():
    with pytest.raises(DomainError):
        sv.DensityMatrix(1, np.diag([0.5, 0.6]))
    with pytest.raises(DomainError):
        sv.DensityMatrix(1, np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(DomainError):
        sv.DensityMatrix(1, np.diag([1.5, -0.5]))
    assert sv.purity(sv.DensityMatrix.maximally_mixed(3)) == pytest.approx(1 / 8)


def test_subsystem_mask():
    mask = sv.SubsystemMask((2, 0))
    assert mask.keep == (0, 2)
    assert mask.complement(4).keep == (1, 3)
    with pytest.raises(DomainError):
        sv.SubsystemMask((1, 1))
    with pytest.raises(DomainError):
        mask.check(2)


def test_tensor_power_of_basis_state():
    psi = sv.tensor_power(sv.StateVector.basis("10"), 3)
    assert psi.num_qubits == 6
    assert np.argmax(np.abs(psi.amps)) == 0b101010
    assert sv.tensor_power(psi, 0).num_qubits == 0


def test_partial_trace_of_bell_state():
    reduced = sv.partial_trace(BELL, sv.SubsystemMask((1,)))
    assert np.allclose(reduced.mat, np.eye(2) / 2)
    # density and state vector paths agree
    via_density = sv.partial_trace(BELL.density(), sv.SubsystemMask((1,)))
    assert np.allclose(via_density.mat, reduced.mat)
    assert sv.partial_trace(BELL, sv.SubsystemMask(())).mat.shape == (1, 1)


def test_partial_trace_paths_agree_on_random_state(rng):
    psi = sample_haar_state(4, rng)
    mask = sv.SubsystemMask((0, 3))
    assert np.allclose(sv.partial_trace(psi, mask).mat, sv.partial_trace(psi.density(), mask).mat)


def test_distances_and_norms():
    zero = sv.StateVector.basis("0").density()
    one = sv.StateVector.basis("1").density()
    assert sv.trace_distance(zero, one) == pytest.approx(1.0)
    assert sv.trace_distance(zero, zero) == pytest.approx(0.0)
    diff = zero.mat - one.mat
    assert sv.schatten_norm(diff, 1) == pytest.approx(2.0)
    assert sv.schatten_norm(diff, 2) == pytest.approx(np.sqrt(2))
    assert sv.schatten_norm(diff, np.inf) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        sv.schatten_norm(diff, 3)
    with pytest.raises(DomainError):
        sv.trace_distance(zero, BELL.density())


def test_entropies():
    assert sv.entanglement_entropy(BELL, sv.SubsystemMask((0,))) == pytest.approx(1.0)
    assert sv.entanglement_entropy(sv.StateVector.basis("01"), sv.SubsystemMask((0,))) == pytest.approx(0.0)
    assert sv.vn_entropy(sv.DensityMatrix.maximally_mixed(2)) == pytest.approx(2.0)
    assert sv.schmidt_rank(BELL, sv.SubsystemMask((0,))) == 2
    assert sv.schmidt_rank(sv.StateVector.basis("01"), sv.SubsystemMask((1,))) == 1


def test_collision_probability():
    assert sv.collision_probability(sv.StateVector.basis("000")) == pytest.approx(1.0)
    uniform = sv.StateVector(3, np.ones(8) / np.sqrt(8))
    assert sv.collision_probability(uniform) == pytest.approx(1 / 8)


def test_schmidt_decomposition_reconstructs(rng):
    psi = sample_haar_state(5, rng)
    decomposition = sv.schmidt(psi, sv.SubsystemMask((1, 3)))
    assert decomposition.rank == 4
    assert np.allclose(decomposition.reconstruct().amps, psi.amps)
    assert np.sum(decomposition.coeffs**2) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        sv.schmidt(psi, sv.SubsystemMask(()))


def test_recursive_schmidt_of_random_state(rng):
    psi = sample_haar_state(6, rng)
    tree = sv.recursive_schmidt(psi, 2, 3)
    assert np.allclose(tree.reconstruct().amps, psi.amps)
    assert tree.r == 4
    assert tree.branching <= tree.r
    assert len(tree.leaves()) <= tree.r**2
    assert tree.max_sibling_overlap() < 1e-9
    assert tree.max_prefix_defect() < 1e-9


def test_recursive_schmidt_of_product_state():
    psi = sv.tensor_power(sv.StateVector.basis("01"), 3)
    tree = sv.recursive_schmidt(psi, 2, 3)
    assert tree.r == 1
    assert tree.leaves() == [(0, 0, 0)]
    assert np.allclose(tree.reconstruct().amps, psi.amps)


def test_recursive_schmidt_leaves_of_a_bell_pair():
    tree = sv.recursive_schmidt(BELL, 1, 2)
    assert sorted(tree.leaves()) == [(0, 0), (1, 1)]
    assert [tree.alphas[leaf] for leaf in sorted(tree.leaves())] == pytest.approx([2**-0.5, 2**-0.5])
    assert np.allclose(tree.reconstruct().amps, BELL.amps)


def test_recursive_schmidt_block_mismatch():
    with pytest.raises(DomainError):
        sv.recursive_schmidt(BELL, 3, 1)


def test_sample_outcomes_follow_probabilities(rng):
    outcomes = sv.sample_outcomes(BELL, 4000, rng)
    assert set(np.unique(outcomes).tolist()) == {0, 3}
    assert 0.45 < np.mean(outcomes == 0) < 0.55


def test_fidelity():
    plus = sv.StateVector(1, np.ones(2) / np.sqrt(2))
    assert sv.fidelity(plus, sv.StateVector.basis("0")) == pytest.approx(0.5)
    with pytest.raises(DimensionError):
        sv.fidelity(plus, BELL)
