"""
Layered circuits of one and two qubit gates.

Wires ``0 .. n-1`` carry the system input and wires ``n .. n+a-1`` the
ancillae, so on a line the ancillae continue the chain after the system
qubits. Lightcones only look at gate supports, never at gate matrices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Self

import numpy as np
import numpy.typing as npt

from prscope.core.ensembles import sample_haar_unitary
from prscope.core.errors import DimensionError, DomainError, StructuralError
from prscope.core.statevec import TOLERANCE, StateVector, SubsystemMask, check_dense, schmidt_rank
from prscope.parsing._yaml_data_models import Geometry

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from prscope.parsing._yaml_data_models import ConfigCircuit

logger = logging.getLogger(__name__)

MAX_FAN_IN = 2

_SQRT_HALF = 1 / np.sqrt(2)
GATES: dict[str, npt.NDArray[np.complex128]] = {
    "i": np.eye(2, dtype=np.complex128),
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.diag([1, -1]).astype(np.complex128),
    "h": np.array([[1, 1], [1, -1]], dtype=np.complex128) * _SQRT_HALF,
    "s": np.diag([1, 1j]).astype(np.complex128),
    "sdg": np.diag([1, -1j]).astype(np.complex128),
    "t": np.diag([1, np.exp(1j * np.pi / 4)]).astype(np.complex128),
    # first qubit controls
    "cnot": np.eye(4, dtype=np.complex128)[[0, 1, 3, 2]],
    "cz": np.diag([1, 1, 1, -1]).astype(np.complex128),
    "swap": np.eye(4, dtype=np.complex128)[[0, 2, 1, 3]],
}


@dataclass(frozen=True, eq=False)
class Gate:
    """
    >>> Gate(0, (0, 1), GATES["cnot"]).qubits
    (0, 1)
    """

    layer: int
    qubits: tuple[int, ...]
    mat: npt.NDArray[np.complex128] = field(repr=False)

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        if not 1 <= len(qubits) <= MAX_FAN_IN or len(set(qubits)) != len(qubits) or min(qubits) < 0:
            msg = f"gates act on one or two distinct wires, got {self.qubits}"
            raise StructuralError(msg)
        mat = np.array(self.mat, dtype=np.complex128)
        dim = 2 ** len(qubits)
        if mat.shape != (dim, dim):
            msg = f"a gate on {len(qubits)} wire(s) needs a {dim}x{dim} matrix, got {mat.shape}"
            raise DimensionError(msg)
        if np.linalg.norm(mat.conj().T @ mat - np.eye(dim)) > TOLERANCE:
            msg = f"gate on {qubits} in layer {self.layer} is not unitary"
            raise DomainError(msg)
        mat.setflags(write=False)
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "mat", mat)

    @property
    def is_adjacent(self) -> bool:
        return len(self.qubits) == 1 or abs(self.qubits[0] - self.qubits[1]) == 1


@dataclass(frozen=True, eq=False)
class LayeredCircuit:
    """
    Gates by layer on ``num_system_qubits`` system wires followed by ``num_ancillae`` ancilla wires.

    ``ancilla_init`` holds one single-qubit state per ancilla, |0> when left empty.
    """

    num_system_qubits: int
    num_ancillae: int = 0
    layers: tuple[tuple[Gate, ...], ...] = ()
    geometry: Geometry = Geometry.NONE
    ancilla_init: tuple[npt.NDArray[np.complex128], ...] = field(default=(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))
        object.__setattr__(self, "geometry", Geometry(self.geometry))
        init = tuple(np.asarray(state, dtype=np.complex128) for state in self.ancilla_init)
        if not init:
            init = tuple(np.array([1.0, 0.0], dtype=np.complex128) for _ in range(self.num_ancillae))
        if len(init) != self.num_ancillae or any(state.shape != (2,) for state in init):
            msg = f"need one single-qubit state per ancilla ({self.num_ancillae}), got {len(init)}"
            raise DimensionError(msg)
        for state in init:
            if abs(np.linalg.norm(state) - 1.0) > TOLERANCE:
                msg = "ancilla initial states must be normalized"
                raise DomainError(msg)
        object.__setattr__(self, "ancilla_init", init)

    @property
    def num_wires(self) -> int:
        return self.num_system_qubits + self.num_ancillae

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def ancilla_wires(self) -> set[int]:
        return set(range(self.num_system_qubits, self.num_wires))

    def gates(self) -> Iterable[Gate]:
        return (gate for layer in self.layers for gate in layer)

    @classmethod
    def from_layers(
        cls,
        num_system_qubits: int,
        layers: Sequence[Sequence[tuple[Sequence[int], str | npt.ArrayLike]]],
        **kwargs: Any,
    ) -> Self:
        """
        Build from ``(wires, gate)`` pairs per layer, gates given by name or matrix.

        >>> bell = LayeredCircuit.from_layers(2, [[((0,), "h")], [((0, 1), "cnot")]])
        >>> bell.depth
        2
        """
        return cls(
            num_system_qubits,
            layers=tuple(
                tuple(Gate(depth, tuple(q), GATES[g] if isinstance(g, str) else g) for q, g in layer)
                for depth, layer in enumerate(layers)
            ),
            **kwargs,
        )

    @classmethod
    def from_config(cls, config: ConfigCircuit) -> Self:
        return cls.from_layers(
            config.n,
            [[(gate.q, gate.gate if gate.gate is not None else gate.mat) for gate in layer] for layer in config.layers],
            num_ancillae=config.ancillae,
            geometry=config.geometry,
            ancilla_init=tuple(config.ancilla_init),
        )


@dataclass(frozen=True)
class CircuitValidation:
    depth: int
    max_fan_in: int
    geometry_ok: bool


def validate(c: LayeredCircuit) -> CircuitValidation:
    """
    Check wire ranges and disjoint supports, and report depth, fan-in and line locality.

    >>> validate(LayeredCircuit(3)).depth
    0
    >>> line = LayeredCircuit.from_layers(3, [[((0, 2), "cnot")]], geometry="line")
    >>> validate(line).geometry_ok
    False
    """
    for depth, layer in enumerate(c.layers):
        used: set[int] = set()
        for gate in layer:
            if max(gate.qubits) >= c.num_wires:
                msg = f"gate on {gate.qubits} in layer {depth} exceeds the {c.num_wires} wires"
                raise StructuralError(msg)
            if used & set(gate.qubits):
                msg = f"gates overlap on wires {sorted(used & set(gate.qubits))} in layer {depth}"
                raise StructuralError(msg)
            used |= set(gate.qubits)
    gates = list(c.gates())
    return CircuitValidation(
        depth=c.depth,
        max_fan_in=max((len(gate.qubits) for gate in gates), default=0),
        geometry_ok=c.geometry is Geometry.NONE or all(gate.is_adjacent for gate in gates),
    )


def _check_wires(c: LayeredCircuit, wires: Iterable[int]) -> set[int]:
    wires = {int(q) for q in wires}
    if any(not 0 <= q < c.num_wires for q in wires):
        msg = f"wires {sorted(wires)} out of range for {c.num_wires} wires"
        raise DomainError(msg)
    return wires


def backward_lightcone(c: LayeredCircuit, outputs: Iterable[int]) -> set[int]:
    """
    Input wires whose initial state can influence ``outputs``.

    >>> cnot = LayeredCircuit.from_layers(2, [[((0, 1), "cnot")]])
    >>> sorted(backward_lightcone(cnot, {0}))
    [0, 1]
    """
    validate(c)
    cone = _check_wires(c, outputs)
    for layer in reversed(c.layers):
        for gate in layer:
            if cone.intersection(gate.qubits):
                cone.update(gate.qubits)
    return cone


def forward_lightcone(c: LayeredCircuit, inputs: Iterable[int]) -> set[int]:
    """Output wires reachable from ``inputs``."""
    validate(c)
    cone = _check_wires(c, inputs)
    for layer in c.layers:
        for gate in layer:
            if cone.intersection(gate.qubits):
                cone.update(gate.qubits)
    return cone


def apply_gate(amps: npt.NDArray[np.complex128], gate: Gate, num_wires: int) -> npt.NDArray[np.complex128]:
    """Apply ``gate`` to an amplitude tensor of shape ``[2] * num_wires``."""
    k = len(gate.qubits)
    tensor = gate.mat.reshape([2] * (2 * k))
    moved = np.tensordot(tensor, amps.reshape([2] * num_wires), axes=(list(range(k, 2 * k)), list(gate.qubits)))
    return np.moveaxis(moved, list(range(k)), list(gate.qubits))


def initial_state(c: LayeredCircuit, system_input: StateVector) -> StateVector:
    if system_input.num_qubits != c.num_system_qubits:
        msg = f"circuit takes {c.num_system_qubits} system qubits, got a {system_input.num_qubits}-qubit state"
        raise DimensionError(msg)
    check_dense(c.num_wires)
    amps = system_input.amps
    for state in c.ancilla_init:
        amps = np.kron(amps, state)
    return StateVector(c.num_wires, amps)


def apply(c: LayeredCircuit, system_input: StateVector) -> StateVector:
    """
    Run the circuit on ``system_input`` tensored with the ancilla states.

    >>> bell = LayeredCircuit.from_layers(2, [[((0,), "h")], [((0, 1), "cnot")]])
    >>> np.round(apply(bell, StateVector.basis("00")).amps.real, 4)
    array([0.7071, 0.    , 0.    , 0.7071])
    """
    validate(c)
    amps = initial_state(c, system_input).amps.reshape([2] * c.num_wires)
    for gate in c.gates():
        amps = apply_gate(amps, gate, c.num_wires)
    return StateVector(c.num_wires, amps.reshape(-1))


def random_brickwork(
    n: int,
    depth: int,
    geometry: Geometry | str,
    rng: np.random.Generator,
    *,
    num_ancillae: int = 0,
) -> LayeredCircuit:
    """
    Brickwork of Haar random two-qubit gates on a line.

    Even layers pair (0,1)(2,3)..., odd layers pair (1,2)(3,4)...; the
    pairing runs over all wires, ancillae included.
    """
    if Geometry(geometry) is not Geometry.LINE:
        msg = f"brickwork circuits are built on a line, got geometry {geometry!r}"
        raise DomainError(msg)
    wires = n + num_ancillae
    layers = [
        [((j, j + 1), sample_haar_unitary(2, rng).mat) for j in range(layer % 2, wires - 1, 2)]
        for layer in range(depth)
    ]
    return LayeredCircuit.from_layers(n, layers, num_ancillae=num_ancillae, geometry=Geometry.LINE)


@dataclass(frozen=True)
class SchmidtAudit:
    depth: int
    ranks: list[int]
    max_rank: int
    bound: int

    @property
    def passed(self) -> bool:
        return self.max_rank <= self.bound

    def as_json_dict(self) -> dict[str, Any]:
        return {
            "depth": self.depth,
            "ranks": self.ranks,
            "max_rank": self.max_rank,
            "bound": self.bound,
            "pass": self.passed,
        }


def schmidt_rank_audit(c: LayeredCircuit) -> SchmidtAudit:
    """Schmidt rank of C|0...0> at every contiguous cut, against 4^depth."""
    if c.geometry is not Geometry.LINE or c.num_ancillae or not validate(c).geometry_ok:
        msg = "the Schmidt rank audit needs a line-local circuit without ancillae"
        raise DomainError(msg)
    n = c.num_system_qubits
    psi = apply(c, StateVector.basis("0" * n))
    ranks = [schmidt_rank(psi, SubsystemMask.first(cut)) for cut in range(1, n)]
    return SchmidtAudit(depth=c.depth, ranks=ranks, max_rank=max(ranks, default=1), bound=4**c.depth)


@dataclass(frozen=True)
class LightconeReport:
    """
    Backward cone of every watched output and forward cone ``corrupted`` of the ancillae.

    ``max_cone`` and ``corrupted_size`` are compared against 2^depth and
    2^depth times the ancilla count.
    """

    depth: int
    cones: dict[int, list[int]]
    corrupted: list[int]
    max_cone: int
    corrupted_size: int
    num_ancillae: int

    @property
    def cone_bound(self) -> int:
        return 2**self.depth

    @property
    def passed(self) -> bool:
        return self.max_cone <= self.cone_bound and self.corrupted_size <= self.cone_bound * self.num_ancillae

    def as_json_dict(self) -> dict[str, Any]:
        return {
            "depth": self.depth,
            "cones": {str(q): cone for q, cone in self.cones.items()},
            "corrupted": self.corrupted,
            "k": self.max_cone,
            "r": self.corrupted_size,
            "cone_bound": self.cone_bound,
            "corrupted_bound": self.cone_bound * self.num_ancillae,
            "pass": self.passed,
        }


def lightcone_report(c: LayeredCircuit, outputs: Iterable[int] | None = None) -> LightconeReport:
    """
    >>> cnot = LayeredCircuit.from_layers(1, [[((0, 1), "cnot")]], num_ancillae=1)
    >>> lightcone_report(cnot).corrupted
    [0, 1]
    """
    validate(c)
    watched = sorted(_check_wires(c, range(c.num_wires) if outputs is None else outputs))
    cones = {q: sorted(backward_lightcone(c, {q})) for q in watched}
    corrupted = sorted(forward_lightcone(c, c.ancilla_wires))
    logger.debug("lightcones of %d outputs at depth %d, %d corrupted wires", len(watched), c.depth, len(corrupted))
    return LightconeReport(
        depth=c.depth,
        cones=cones,
        corrupted=corrupted,
        max_cone=max((len(cone) for cone in cones.values()), default=0),
        corrupted_size=len(corrupted),
        num_ancillae=c.num_ancillae,
    )
