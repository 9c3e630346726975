"""
State and unitary ensembles: Haar, exact 2-designs and phased subspace states.

Ensembles are built from their parsed specs with ``from_config`` and draw
members from an explicit ``numpy.random.Generator``. Ensembles small enough
to be listed exhaustively also expose their members through
``exact_states`` / ``exact_unitaries`` so that moments can be averaged
exactly.
"""

from __future__ import annotations

import functools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, ClassVar, Self

import numpy as np
import numpy.typing as npt
from qiskit.quantum_info import Statevector, random_clifford
from scipy import stats

from prscope.core import gf2
from prscope.core.errors import DimensionError, DomainError, ResourceError
from prscope.core.statevec import TOLERANCE, StateVector, check_dense
from prscope.parsing._yaml_data_models import (
    ConfigCliffordUnitariesSpecs,
    ConfigFixedStatesSpecs,
    ConfigFixedUnitariesSpecs,
    ConfigHaarStatesSpecs,
    ConfigHaarUnitariesSpecs,
    ConfigPhasedSubspaceStatesSpecs,
    ConfigStabilizerStatesSpecs,
    PhaseDomain,
    PhaseMode,
)

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from prscope.parsing._yaml_data_models import ConfigStateEnsemble, ConfigUnitaryEnsemble

logger = logging.getLogger(__name__)

STABILIZER_ENUMERATION_CAP = 3  # 1080 states at n=3
PHASE_KEY_DECIMALS = 8

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
_S = np.diag([1, 1j]).astype(np.complex128)


@dataclass(frozen=True, eq=False)
class Unitary:
    """
    Dense unitary on ``num_qubits`` qubits, qubit 0 being the most significant index bit.

    >>> Unitary(1, np.array([[0, 1], [1, 0]])).apply(StateVector.basis("0")).amps.real
    array([0., 1.])
    """

    num_qubits: int
    mat: npt.NDArray[np.complex128] = field(repr=False)

    def __post_init__(self):
        check_dense(2 * self.num_qubits)
        mat = np.array(self.mat, dtype=np.complex128)
        dim = 2**self.num_qubits
        if mat.shape != (dim, dim):
            msg = f"{self.num_qubits} qubits need a {dim}x{dim} unitary, got shape {mat.shape}"
            raise DimensionError(msg)
        # Frobenius norm bounds the operator norm from above
        if np.linalg.norm(mat.conj().T @ mat - np.eye(dim)) > TOLERANCE:
            msg = "matrix is not unitary to 1e-10"
            raise DomainError(msg)
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    def apply(self, psi: StateVector) -> StateVector:
        if psi.num_qubits != self.num_qubits:
            msg = f"cannot apply a {self.num_qubits}-qubit unitary to a {psi.num_qubits}-qubit state"
            raise DimensionError(msg)
        return StateVector(self.num_qubits, self.mat @ psi.amps)


def _reverse_qubits(amps: npt.NDArray, num_qubits: int) -> npt.NDArray:
    """Switch between qiskit's little endian ordering and qubit 0 first."""
    axes = list(range(num_qubits))[::-1]
    if amps.ndim == 1:
        return amps.reshape([2] * num_qubits).transpose(axes).reshape(-1)
    dim = amps.shape[0]
    return amps.reshape([2] * (2 * num_qubits)).transpose(axes + [num_qubits + a for a in axes]).reshape(dim, dim)


def sample_haar_state(n: int, rng: np.random.Generator) -> StateVector:
    """Normalized complex Gaussian vector."""
    check_dense(n)
    dim = 2**n
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector(n, amps / np.linalg.norm(amps))


def sample_haar_unitary(n: int, rng: np.random.Generator) -> Unitary:
    return Unitary(n, stats.unitary_group.rvs(2**n, random_state=rng))


def haar_frame(dim: int, columns: int, rng: np.random.Generator) -> npt.NDArray[np.complex128]:
    """
    First ``columns`` columns of a Haar random ``dim`` x ``dim`` unitary.

    This is also the law of ``U @ V`` for any fixed isometry ``V`` and Haar
    ``U``, at the cost of a thin QR instead of a full one.
    """
    gaussian = rng.standard_normal((dim, columns)) + 1j * rng.standard_normal((dim, columns))
    q, r = np.linalg.qr(gaussian)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def sample_clifford(n: int, rng: np.random.Generator) -> Unitary:
    """Uniformly random n-qubit Clifford as a dense matrix."""
    cliff = random_clifford(n, seed=rng)
    return Unitary(n, _reverse_qubits(cliff.to_matrix(), n))


def sample_stabilizer_state(n: int, rng: np.random.Generator) -> StateVector:
    """Uniformly random n-qubit stabilizer state, a random Clifford applied to |0...0>."""
    cliff = random_clifford(n, seed=rng)
    amps = Statevector.from_label("0" * n).evolve(cliff.to_circuit()).data
    return StateVector(n, _reverse_qubits(amps, n))


def _phase_key(vector: npt.NDArray[np.complex128]) -> bytes:
    pivot = vector[np.argmax(np.abs(vector) > TOLERANCE)]
    rounded = np.round(vector * (np.conj(pivot) / abs(pivot)), PHASE_KEY_DECIMALS) + (0.0 + 0.0j)
    return rounded.tobytes()


def _closure(
    start: npt.NDArray[np.complex128], generators: Sequence[npt.NDArray[np.complex128]]
) -> list[npt.NDArray[np.complex128]]:
    """Orbit of ``start`` under left multiplication by ``generators``, up to global phase."""
    seen = {_phase_key(start.ravel()): start}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for gen in generators:
            image = gen @ current
            if (key := _phase_key(image.ravel())) not in seen:
                seen[key] = image
                queue.append(image)
    return list(seen.values())


def _embed(gate: npt.NDArray[np.complex128], qubits: Sequence[int], n: int) -> npt.NDArray[np.complex128]:
    """Full 2^n matrix of a gate acting on ``qubits``."""
    k = len(qubits)
    rest = [q for q in range(n) if q not in qubits]
    full = np.kron(gate, np.eye(2 ** (n - k))).reshape([2] * (2 * n))
    order = list(qubits) + rest
    inverse = np.argsort(order)
    return full.transpose(list(inverse) + [n + i for i in inverse]).reshape(2**n, 2**n)


def _clifford_generators(n: int) -> list[npt.NDArray[np.complex128]]:
    cnot = np.eye(4, dtype=np.complex128)[[0, 1, 3, 2]]
    gens = [_embed(g, (q,), n) for q in range(n) for g in (_H, _S)]
    gens += [_embed(cnot, (a, b), n) for a in range(n) for b in range(n) if a != b]
    return gens


@functools.cache
def _stabilizer_amplitudes(n: int) -> tuple[npt.NDArray[np.complex128], ...]:
    start = np.zeros(2**n, dtype=np.complex128)
    start[0] = 1.0
    states = _closure(start, _clifford_generators(n))
    logger.debug("enumerated %d stabilizer states on %d qubits", len(states), n)
    return tuple(states)


def stabilizer_states(n: int) -> list[StateVector]:
    """
    Every n-qubit stabilizer state, one representative per global phase.

    >>> len(stabilizer_states(1)), len(stabilizer_states(2))
    (6, 60)
    """
    if not 1 <= n <= STABILIZER_ENUMERATION_CAP:
        msg = f"stabilizer states are only enumerated for 1 <= n <= {STABILIZER_ENUMERATION_CAP}, got n={n}"
        raise ResourceError(msg)
    return [StateVector(n, amps) for amps in _stabilizer_amplitudes(n)]


def clifford_group(n: int) -> list[Unitary]:
    """
    The n-qubit Clifford group modulo global phase (n = 1 only).

    >>> len(clifford_group(1))
    24
    """
    if n != 1:
        msg = f"the Clifford group is only enumerated for n=1, got n={n}"
        raise ResourceError(msg)
    return [Unitary(1, mat) for mat in _closure(np.eye(2, dtype=np.complex128), [_H, _S])]


def same_up_to_phase(a: npt.ArrayLike, b: npt.ArrayLike) -> bool:
    return _phase_key(np.ravel(a)) == _phase_key(np.ravel(b))


def phased_subspace_state(
    s: gf2.Subspace, phase: Callable[[gf2.BitVector], int] | npt.ArrayLike
) -> StateVector:
    """
    2^{-d/2} sum over x in S of (-1)^f(x) |x>.

    ``phase`` is either a function of the element or an array of 2^d bits
    indexed by the coordinates of the element in the basis of ``s``.

    >>> s = gf2.Subspace(2, [gf2.bits("11")])
    >>> phased_subspace_state(s, [0, 1]).amps.real * np.sqrt(2)
    array([ 1.,  0.,  0., -1.])
    """
    check_dense(s.ambient_dim)
    elements = s.enumerate()
    if callable(phase):
        signs = np.array([phase(x) for x in elements], dtype=np.int64)
    else:
        signs = np.asarray(phase, dtype=np.int64)
        if signs.shape != (2**s.dim,):
            msg = f"a {s.dim}-dimensional subspace needs {2**s.dim} phase bits, got {signs.size}"
            raise DimensionError(msg)
    amps = np.zeros(2**s.ambient_dim, dtype=np.complex128)
    amps[gf2.bits_to_ints(elements)] = (1 - 2 * (signs & 1)) / np.sqrt(2**s.dim)
    return StateVector(s.ambient_dim, amps)


# State ensembles


@dataclass
class StateEnsemble:
    """Base class of the state ensembles, keyed by the variant of their config."""

    variant_classes: ClassVar[dict[str, type[StateEnsemble]]] = {}
    variant: ClassVar[str]

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.variant in StateEnsemble.variant_classes:
            msg = f"State ensemble for variant {cls.variant} already set"
            raise ValueError(msg)
        StateEnsemble.variant_classes[cls.variant] = cls

    @classmethod
    def from_config(cls, config: ConfigStateEnsemble) -> StateEnsemble:
        if (variant_cls := StateEnsemble.variant_classes.get(config.variant, None)) is None:
            msg = f"State ensemble {config.variant!r} is not supported."
            raise ValueError(msg)
        return variant_cls(**dict(config))

    @property
    def num_qubits(self) -> int:
        return self.n

    def sample(self, rng: np.random.Generator) -> StateVector:
        raise NotImplementedError

    def exact_states(self) -> list[StateVector] | None:
        """All members with equal weight, or None if the ensemble is only sampled."""
        return None


@dataclass
class HaarStates(ConfigHaarStatesSpecs, StateEnsemble):
    def sample(self, rng: np.random.Generator) -> StateVector:
        return sample_haar_state(self.n, rng)


@dataclass
class StabilizerStates(ConfigStabilizerStatesSpecs, StateEnsemble):
    def sample(self, rng: np.random.Generator) -> StateVector:
        return sample_stabilizer_state(self.n, rng)

    def exact_states(self) -> list[StateVector] | None:
        return stabilizer_states(self.n) if self.n <= STABILIZER_ENUMERATION_CAP else None


@dataclass
class PhasedSubspaceStates(ConfigPhasedSubspaceStatesSpecs, StateEnsemble):
    """
    Random subspace of dimension d with random or k-wise independent signs.

    In k-wise mode every state gets a fresh seed; the family reads either the
    d-bit coordinates of an element (``coordinates``) or its n bits
    (``ambient``).
    """

    def __post_init__(self):
        self.phase_mode = PhaseMode(self.phase_mode)
        self.phase_domain = PhaseDomain(self.phase_domain)
        if not 0 <= self.d <= self.n:
            msg = f"subspace dimension must satisfy 0 <= d <= n, got d={self.d}, n={self.n}"
            raise DomainError(msg)

    def phase_bits(self, s: gf2.Subspace, rng: np.random.Generator) -> npt.NDArray[np.uint8]:
        if self.phase_mode is PhaseMode.TRUE_RANDOM:
            return rng.integers(0, 2, size=2**s.dim, dtype=np.uint8)
        if self.phase_domain is PhaseDomain.COORDINATES:
            family = gf2.KWiseFamily.sample(max(s.dim, 1), self.k, rng)
            return family.evaluate_ints(np.arange(2**s.dim))
        family = gf2.KWiseFamily.sample(s.ambient_dim, self.k, rng)
        return family.evaluate_ints(gf2.bits_to_ints(s.enumerate()))

    def sample_with_subspace(self, rng: np.random.Generator) -> tuple[gf2.Subspace, StateVector]:
        s = gf2.sample_subspace(self.n, self.d, rng)
        return s, phased_subspace_state(s, self.phase_bits(s, rng))

    def sample(self, rng: np.random.Generator) -> StateVector:
        return self.sample_with_subspace(rng)[1]


@dataclass
class FixedStates(ConfigFixedStatesSpecs, StateEnsemble):
    def __post_init__(self):
        self.members = [StateVector.from_amplitudes(amps) for amps in self.states]
        if len({psi.num_qubits for psi in self.members}) != 1:
            msg = "fixed states must all live on the same number of qubits"
            raise DimensionError(msg)

    @property
    def num_qubits(self) -> int:
        return self.members[0].num_qubits

    def sample(self, rng: np.random.Generator) -> StateVector:
        return self.members[int(rng.integers(len(self.members)))]

    def exact_states(self) -> list[StateVector] | None:
        return list(self.members)

    @classmethod
    def of(cls, states: Sequence[StateVector]) -> Self:
        return cls(states=[psi.amps for psi in states])


# Unitary ensembles


@dataclass
class UnitaryEnsemble:
    """Base class of the unitary ensembles, keyed by the variant of their config."""

    variant_classes: ClassVar[dict[str, type[UnitaryEnsemble]]] = {}
    variant: ClassVar[str]

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.variant in UnitaryEnsemble.variant_classes:
            msg = f"Unitary ensemble for variant {cls.variant} already set"
            raise ValueError(msg)
        UnitaryEnsemble.variant_classes[cls.variant] = cls

    @classmethod
    def from_config(cls, config: ConfigUnitaryEnsemble) -> UnitaryEnsemble:
        if (variant_cls := UnitaryEnsemble.variant_classes.get(config.variant, None)) is None:
            msg = f"Unitary ensemble {config.variant!r} is not supported."
            raise ValueError(msg)
        return variant_cls(**dict(config))

    @property
    def num_qubits(self) -> int:
        return self.n

    def sample(self, rng: np.random.Generator) -> Unitary:
        raise NotImplementedError

    def images(self, vectors: npt.NDArray[np.complex128], rng: np.random.Generator) -> npt.NDArray[np.complex128]:
        """``U @ vectors`` for one freshly drawn ``U``."""
        return self.sample(rng).mat @ vectors

    def exact_unitaries(self) -> list[Unitary] | None:
        return None


@dataclass
class HaarUnitaries(ConfigHaarUnitariesSpecs, UnitaryEnsemble):
    def sample(self, rng: np.random.Generator) -> Unitary:
        return sample_haar_unitary(self.n, rng)

    def images(self, vectors: npt.NDArray[np.complex128], rng: np.random.Generator) -> npt.NDArray[np.complex128]:
        vectors = np.asarray(vectors, dtype=np.complex128)
        if vectors.ndim == 2 and np.allclose(vectors.conj().T @ vectors, np.eye(vectors.shape[1]), atol=TOLERANCE):
            return haar_frame(2**self.n, vectors.shape[1], rng)
        return super().images(vectors, rng)


@dataclass
class CliffordUnitaries(ConfigCliffordUnitariesSpecs, UnitaryEnsemble):
    def sample(self, rng: np.random.Generator) -> Unitary:
        return sample_clifford(self.n, rng)

    def exact_unitaries(self) -> list[Unitary] | None:
        return clifford_group(1) if self.n == 1 else None


@dataclass
class FixedUnitaries(ConfigFixedUnitariesSpecs, UnitaryEnsemble):
    def __post_init__(self):
        self.members = [Unitary(int(np.log2(mat.shape[0])), mat) for mat in self.unitaries]

    @property
    def num_qubits(self) -> int:
        return self.members[0].num_qubits

    def sample(self, rng: np.random.Generator) -> Unitary:
        return self.members[int(rng.integers(len(self.members)))]

    def exact_unitaries(self) -> list[Unitary] | None:
        return list(self.members)
