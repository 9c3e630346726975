"""
Dense state vectors and density matrices on qubit registers.

Qubit 0 is the most significant bit of an amplitude index, so reshaping an
amplitude vector to ``[2] * n`` puts qubit ``q`` on axis ``q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Self

import numpy as np
import numpy.typing as npt
from scipy import stats

from prscope.core import gf2
from prscope.core.errors import DimensionError, DomainError, ResourceError

DENSE_CAP_QUBITS = 26
PSD_CHECK_QUBITS = 10  # eigenvalue check on construction only up to this size
TOLERANCE = 1e-10
SCHMIDT_CUTOFF = 1e-9


def check_dense(num_qubits: int) -> None:
    if num_qubits > DENSE_CAP_QUBITS:
        msg = f"{num_qubits} qubits exceed the dense cap of 2^{DENSE_CAP_QUBITS} amplitudes"
        raise ResourceError(msg)


def _frozen(array: npt.ArrayLike, dtype: type = np.complex128) -> npt.NDArray:
    out = np.array(array, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Normalized pure state of ``num_qubits`` qubits.

    >>> StateVector.basis("10").amps.real
    array([0., 0., 1., 0.])
    """

    num_qubits: int
    amps: npt.NDArray[np.complex128] = field(repr=False)

    def __post_init__(self):
        check_dense(self.num_qubits)
        amps = _frozen(np.ravel(self.amps))
        if amps.shape != (2**self.num_qubits,):
            msg = f"{self.num_qubits} qubits need {2**self.num_qubits} amplitudes, got {amps.size}"
            raise DimensionError(msg)
        if abs(np.linalg.norm(amps) - 1.0) > TOLERANCE:
            msg = f"state is not normalized (norm {np.linalg.norm(amps)!r})"
            raise DomainError(msg)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, amps: npt.ArrayLike, *, normalize: bool = False) -> Self:
        """Infer the qubit count from the amplitude count, optionally normalizing first."""
        amps = np.ravel(np.asarray(amps, dtype=np.complex128))
        num_qubits = int(round(math.log2(amps.size))) if amps.size else -1
        if num_qubits < 0 or 2**num_qubits != amps.size:
            msg = f"amplitude count {amps.size} is not a power of two"
            raise DimensionError(msg)
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(num_qubits, amps)

    @classmethod
    def basis(cls, label: str) -> Self:
        """Computational basis state for a bit string, qubit 0 first."""
        index = gf2.to_int(gf2.bits(label))
        amps = np.zeros(2 ** len(label), dtype=np.complex128)
        amps[index] = 1.0
        return cls(len(label), amps)

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.num_qubits, np.outer(self.amps, self.amps.conj()))

    def probabilities(self) -> npt.NDArray[np.float64]:
        probs = np.abs(self.amps) ** 2
        return probs / probs.sum()

    def overlap(self, other: StateVector) -> complex:
        """<self|other>"""
        if other.num_qubits != self.num_qubits:
            msg = f"overlap of a {self.num_qubits}-qubit and a {other.num_qubits}-qubit state"
            raise DimensionError(msg)
        return complex(np.vdot(self.amps, other.amps))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Hermitian unit trace matrix on ``num_qubits`` qubits.

    Positivity is verified on construction up to ``PSD_CHECK_QUBITS`` qubits;
    larger instances can be checked with :meth:`min_eigenvalue`.
    """

    num_qubits: int
    mat: npt.NDArray[np.complex128] = field(repr=False)

    def __post_init__(self):
        check_dense(2 * self.num_qubits)
        mat = _frozen(self.mat)
        dim = 2**self.num_qubits
        if mat.shape != (dim, dim):
            msg = f"{self.num_qubits} qubits need a {dim}x{dim} matrix, got shape {mat.shape}"
            raise DimensionError(msg)
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > TOLERANCE:
            msg = "density matrix is not Hermitian"
            raise DomainError(msg)
        if abs(np.trace(mat) - 1.0) > TOLERANCE:
            msg = f"density matrix trace is {np.trace(mat).real!r}, expected 1"
            raise DomainError(msg)
        object.__setattr__(self, "mat", mat)
        if self.num_qubits <= PSD_CHECK_QUBITS and self.min_eigenvalue() < -TOLERANCE:
            msg = f"density matrix has a negative eigenvalue {self.min_eigenvalue()!r}"
            raise DomainError(msg)

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> Self:
        dim = 2**num_qubits
        return cls(num_qubits, np.eye(dim, dtype=np.complex128) / dim)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.mat)[0])


@dataclass(frozen=True)
class SubsystemMask:
    """
    Sorted set of qubits to keep.

    >>> SubsystemMask((3, 0)).keep
    (0, 3)
    >>> SubsystemMask((3, 0)).complement(5).keep
    (1, 2, 4)
    """

    keep: tuple[int, ...]

    def __post_init__(self):
        keep = tuple(sorted(int(q) for q in self.keep))
        if len(set(keep)) != len(keep) or (keep and keep[0] < 0):
            msg = f"subsystem indices must be distinct and non negative, got {self.keep}"
            raise DomainError(msg)
        object.__setattr__(self, "keep", keep)

    @classmethod
    def first(cls, k: int) -> Self:
        return cls(tuple(range(k)))

    def check(self, num_qubits: int) -> tuple[int, ...]:
        if self.keep and self.keep[-1] >= num_qubits:
            msg = f"subsystem {self.keep} out of range for {num_qubits} qubits"
            raise DomainError(msg)
        return self.keep

    def complement(self, num_qubits: int) -> SubsystemMask:
        keep = set(self.check(num_qubits))
        return SubsystemMask(tuple(q for q in range(num_qubits) if q not in keep))


def _bipartition(psi: StateVector, keep: tuple[int, ...]) -> npt.NDArray[np.complex128]:
    """Amplitudes as a (2^|keep|, 2^rest) matrix."""
    n = psi.num_qubits
    rest = [q for q in range(n) if q not in keep]
    return psi.amps.reshape([2] * n).transpose(list(keep) + rest).reshape(2 ** len(keep), -1)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """
    Kronecker product with the qubits of ``a`` first.

    >>> tensor(StateVector.basis("0"), StateVector.basis("1")).num_qubits
    2
    """
    check_dense(a.num_qubits + b.num_qubits)
    return StateVector(a.num_qubits + b.num_qubits, np.kron(a.amps, b.amps))


def tensor_power(psi: StateVector, t: int) -> StateVector:
    out = StateVector(0, np.ones(1))
    for _ in range(t):
        out = tensor(out, psi)
    return out


def partial_trace(rho: DensityMatrix | StateVector, mask: SubsystemMask) -> DensityMatrix:
    """Reduced state on ``mask.keep``; tracing everything out gives the 1x1 matrix [1]."""
    n = rho.num_qubits
    keep = mask.check(n)
    if isinstance(rho, StateVector):
        amps = _bipartition(rho, keep)
        return DensityMatrix(len(keep), amps @ amps.conj().T)
    traced = [q for q in range(n) if q not in keep]
    k = len(keep)
    perm = list(keep) + traced + [n + q for q in keep] + [n + q for q in traced]
    blocks = rho.mat.reshape([2] * (2 * n)).transpose(perm).reshape(2**k, 2 ** (n - k), 2**k, 2 ** (n - k))
    return DensityMatrix(k, np.einsum("ajbj->ab", blocks))


def purity(rho: DensityMatrix) -> float:
    """
    >>> purity(DensityMatrix(1, np.diag([0.75, 0.25])))
    0.625
    """
    return float(np.vdot(rho.mat, rho.mat).real)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of the difference."""
    if a.mat.shape != b.mat.shape:
        msg = f"trace distance between shapes {a.mat.shape} and {b.mat.shape}"
        raise DomainError(msg)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a.mat - b.mat))))


def schatten_norm(mat: npt.ArrayLike, p: float) -> float:
    """
    Raw Schatten p-norm for p in {1, 2, inf}.

    >>> schatten_norm(np.diag([3.0, -4.0]), np.inf)
    4.0
    """
    mat = np.asarray(mat)
    if p == 2:  # noqa: PLR2004
        return float(np.linalg.norm(mat))
    if p not in (1, np.inf):
        msg = f"Schatten norm only implemented for p in {{1, 2, inf}}, got {p}"
        raise DomainError(msg)
    singular_values = np.linalg.svd(mat, compute_uv=False)
    if p == 1:
        return float(np.sum(singular_values))
    return float(np.max(singular_values, initial=0.0))


def vn_entropy(rho: DensityMatrix) -> float:
    """
    Von Neumann entropy in bits.

    >>> round(vn_entropy(DensityMatrix(1, np.diag([0.25, 0.75]))), 5)
    0.81128
    """
    eigenvalues = np.clip(np.linalg.eigvalsh(rho.mat), 0.0, None)
    return float(stats.entropy(eigenvalues, base=2))


def entanglement_entropy(psi: StateVector, mask: SubsystemMask) -> float:
    """Entropy of the reduced state on ``mask``, from the Schmidt coefficients."""
    singular_values = np.linalg.svd(_bipartition(psi, mask.check(psi.num_qubits)), compute_uv=False)
    return float(stats.entropy(singular_values**2, base=2))


def schmidt_rank(psi: StateVector, mask: SubsystemMask) -> int:
    singular_values = np.linalg.svd(_bipartition(psi, mask.check(psi.num_qubits)), compute_uv=False)
    return max(1, int(np.sum(singular_values > SCHMIDT_CUTOFF)))


def collision_probability(psi: StateVector) -> float:
    """Probability that two computational basis measurements agree."""
    return float(np.sum(psi.probabilities() ** 2))


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """psi = sum_i coeffs[i] left_basis[i] (x) right_basis[i], rows being states on the cut and its complement."""

    num_qubits: int
    cut: SubsystemMask
    coeffs: npt.NDArray[np.float64]
    left_basis: npt.NDArray[np.complex128] = field(repr=False)
    right_basis: npt.NDArray[np.complex128] = field(repr=False)

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    def reconstruct(self) -> StateVector:
        keep = self.cut.keep
        rest = [q for q in range(self.num_qubits) if q not in keep]
        matrix = (self.left_basis.T * self.coeffs) @ self.right_basis
        tensor_ = matrix.reshape([2] * self.num_qubits).transpose(np.argsort(list(keep) + rest))
        return StateVector(self.num_qubits, tensor_.reshape(-1))


def schmidt(psi: StateVector, cut: SubsystemMask) -> SchmidtDecomposition:
    """
    Schmidt decomposition across ``cut`` and its complement.

    >>> bell = StateVector(2, np.array([1, 0, 0, 1]) / np.sqrt(2))
    >>> schmidt(bell, SubsystemMask((0,))).rank
    2
    """
    keep = cut.check(psi.num_qubits)
    if not keep or len(keep) == psi.num_qubits:
        msg = f"Schmidt decomposition needs a proper nonempty cut, got {keep}"
        raise DomainError(msg)
    u, s, vh = np.linalg.svd(_bipartition(psi, keep), full_matrices=False)
    rank_ = max(1, int(np.sum(s > SCHMIDT_CUTOFF)))
    return SchmidtDecomposition(
        num_qubits=psi.num_qubits,
        cut=cut,
        coeffs=s[:rank_],
        left_basis=u[:, :rank_].T,
        right_basis=vh[:rank_],
    )


Prefix = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class RecursiveSchmidtTree:
    """
    Tree form of a state on ``blocks`` consecutive blocks of ``block_size`` qubits.

    A path ``(i1, ..., it)`` carries the coefficient ``alphas[path]`` and
    block states ``states[path[:tau]]`` for tau = 1..t, so that the state is
    the sum over leaves of alpha times the tensor product of its block
    states. ``remainders[prefix]`` is the normalized state of the blocks
    after ``prefix`` that was split to produce the children of ``prefix``.
    The last block is not split again, so a leaf repeats the index of the
    last split: ``it = i(t-1)``, and for a Bell pair alpha is delta_ij / sqrt(2).
    """

    block_size: int
    blocks: int
    r: int
    alphas: dict[Prefix, float] = field(repr=False)
    states: dict[Prefix, npt.NDArray[np.complex128]] = field(repr=False)
    remainders: dict[Prefix, npt.NDArray[np.complex128]] = field(repr=False)

    def leaves(self) -> list[Prefix]:
        return [prefix for prefix in self.alphas if len(prefix) == self.blocks]

    def children(self, prefix: Prefix) -> list[Prefix]:
        return [p for p in self.alphas if len(p) == len(prefix) + 1 and p[:-1] == prefix]

    @property
    def branching(self) -> int:
        return max(len(self.children(p)) for p in self.alphas if len(p) < self.blocks)

    def reconstruct(self) -> StateVector:
        amps = np.zeros(2 ** (self.block_size * self.blocks), dtype=np.complex128)
        for leaf in self.leaves():
            term = np.ones(1, dtype=np.complex128)
            for tau in range(1, self.blocks + 1):
                term = np.kron(term, self.states[leaf[:tau]])
            amps += self.alphas[leaf] * term
        return StateVector(self.block_size * self.blocks, amps)

    def max_sibling_overlap(self) -> float:
        worst = 0.0
        for prefix in self.alphas:
            siblings = self.children(prefix)
            if len(siblings) < 2:  # noqa: PLR2004
                continue
            vectors = np.array([self.states[s] for s in siblings])
            gram = vectors.conj() @ vectors.T
            worst = max(worst, float(np.max(np.abs(gram - np.diag(np.diag(gram))))))
        return worst

    def max_prefix_defect(self) -> float:
        """Largest violation of |alpha_p|^2 = sum over children |alpha_c|^2."""
        return max(
            (
                abs(self.alphas[p] ** 2 - sum(self.alphas[c] ** 2 for c in self.children(p)))
                for p in self.alphas
                if len(p) < self.blocks
            ),
            default=0.0,
        )


def recursive_schmidt(psi: StateVector, block_size: int, blocks: int) -> RecursiveSchmidtTree:
    """
    Split ``psi`` block by block with one SVD per tree node.

    >>> bell = StateVector(2, np.array([1, 0, 0, 1]) / np.sqrt(2))
    >>> tree = recursive_schmidt(bell, 1, 2)
    >>> tree.r, sorted(tree.leaves())
    (2, [(0, 0), (1, 1)])
    """
    n, t = block_size, blocks
    if n < 1 or t < 1 or psi.num_qubits != n * t:
        msg = f"a {psi.num_qubits}-qubit state does not split into {t} blocks of {n} qubits"
        raise DomainError(msg)
    alphas: dict[Prefix, float] = {(): 1.0}
    states: dict[Prefix, npt.NDArray[np.complex128]] = {}
    remainders: dict[Prefix, npt.NDArray[np.complex128]] = {(): psi.amps}
    frontier: list[Prefix] = [()]
    for _ in range(1, t):
        next_frontier = []
        for prefix in frontier:
            u, s, vh = np.linalg.svd(remainders[prefix].reshape(2**n, -1), full_matrices=False)
            for i in range(max(1, int(np.sum(s > SCHMIDT_CUTOFF)))):
                child = (*prefix, i)
                alphas[child] = alphas[prefix] * float(s[i])
                states[child] = u[:, i]
                remainders[child] = vh[i]
                next_frontier.append(child)
        frontier = next_frontier
    for prefix in frontier:
        leaf = (*prefix, prefix[-1] if prefix else 0)
        alphas[leaf] = alphas[prefix]
        states[leaf] = remainders[prefix]
    ranks = [schmidt_rank(psi, SubsystemMask.first(tau * n)) for tau in range(1, t)]
    return RecursiveSchmidtTree(
        block_size=n,
        blocks=t,
        r=max(ranks, default=1),
        alphas=alphas,
        states=states,
        remainders={p: w for p, w in remainders.items() if p},
    )


def sample_outcomes(psi: StateVector, shots: int, rng: np.random.Generator) -> npt.NDArray[np.int64]:
    """Integer outcomes of ``shots`` independent computational basis measurements."""
    return rng.choice(psi.amps.size, size=shots, p=psi.probabilities())


def measure_all(psi: StateVector, rng: np.random.Generator) -> gf2.BitVector:
    return gf2.from_int(int(sample_outcomes(psi, 1, rng)[0]), psi.num_qubits)


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(a.overlap(b)) ** 2
