from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Any, ClassVar, Literal

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Discriminator,
    Field,
    Tag,
    field_validator,
    model_validator,
)

from prscope.parsing._utils import ComplexArray

MAX_SEED = 2**64


class PhaseMode(enum.StrEnum):
    TRUE_RANDOM = enum.auto()
    KWISE = enum.auto()


class PhaseDomain(enum.StrEnum):
    """Which bits the k-wise phase function reads: basis coordinates of x or x itself."""

    COORDINATES = enum.auto()
    AMBIENT = enum.auto()


class Geometry(enum.StrEnum):
    NONE = enum.auto()
    LINE = enum.auto()


class _VariantBaseModel(BaseModel):
    """
    Base model for ensemble specs discriminated by a ``variant`` key.

    The variant is a class constant, so it is accepted on input (and
    ignored) and added back by :meth:`to_json_dict`.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)
    variant: ClassVar[str]

    def to_json_dict(self) -> dict[str, Any]:
        return {"variant": self.variant} | self.model_dump(mode="json")


# State ensembles


@dataclass
class ConfigHaarStatesSpecs:
    variant: ClassVar[Literal["haar"]] = "haar"
    n: int = 1


class ConfigHaarStates(_VariantBaseModel, ConfigHaarStatesSpecs):
    """
    >>> import pydantic_yaml
    >>> pydantic_yaml.parse_yaml_raw_as(ConfigHaarStates, "{variant: haar, n: 3}").n
    3
    """

    n: int = Field(ge=1)


@dataclass
class ConfigStabilizerStatesSpecs:
    variant: ClassVar[Literal["stabilizer"]] = "stabilizer"
    n: int = 1


class ConfigStabilizerStates(_VariantBaseModel, ConfigStabilizerStatesSpecs):
    n: int = Field(ge=1)


@dataclass
class ConfigPhasedSubspaceStatesSpecs:
    variant: ClassVar[Literal["phased_subspace"]] = "phased_subspace"
    n: int = 1
    d: int = 0
    phase_mode: PhaseMode = PhaseMode.KWISE
    k: int = 4
    phase_domain: PhaseDomain = PhaseDomain.COORDINATES


class ConfigPhasedSubspaceStates(_VariantBaseModel, ConfigPhasedSubspaceStatesSpecs):
    """
    >>> ConfigPhasedSubspaceStates(n=10, d=3).to_json_dict()
    {'variant': 'phased_subspace', 'n': 10, 'd': 3, 'phase_mode': 'kwise', 'k': 4, 'phase_domain': 'coordinates'}
    """

    n: int = Field(ge=1)
    d: int = Field(ge=0)
    phase_mode: PhaseMode = PhaseMode.KWISE
    k: int = 4
    phase_domain: PhaseDomain = PhaseDomain.COORDINATES

    @model_validator(mode="after")
    def check_dimensions(self) -> ConfigPhasedSubspaceStates:
        if self.d > self.n:
            msg = f"subspace dimension d={self.d} exceeds n={self.n}"
            raise ValueError(msg)
        if self.k < 2 or self.k % 2:  # noqa: PLR2004
            msg = f"phase independence order must be even and at least 2, got k={self.k}"
            raise ValueError(msg)
        return self


@dataclass
class ConfigFixedStatesSpecs:
    variant: ClassVar[Literal["fixed_list"]] = "fixed_list"
    states: list[np.ndarray] = field(default_factory=list)


class ConfigFixedStates(_VariantBaseModel, ConfigFixedStatesSpecs):
    states: list[ComplexArray] = Field(min_length=1)

    @field_validator("states")
    @classmethod
    def check_normalized(cls, states: list[np.ndarray]) -> list[np.ndarray]:
        size = states[0].size
        if any(state.shape != (size,) for state in states) or size < 1 or size & (size - 1):
            msg = "fixed states must all have the same power of two length"
            raise ValueError(msg)
        for state in states:
            if abs(np.linalg.norm(state) - 1.0) > 1e-10:  # noqa: PLR2004
                msg = f"fixed state is not normalized (norm {np.linalg.norm(state)!r})"
                raise ValueError(msg)
        return states


def get_variant(data: Any) -> str | None:
    if isinstance(data, _VariantBaseModel):
        return data.variant
    if isinstance(data, dict):
        return data.get("variant")
    return None


ConfigStateEnsemble = Annotated[
    Annotated[ConfigHaarStates, Tag(ConfigHaarStates.variant)]
    | Annotated[ConfigStabilizerStates, Tag(ConfigStabilizerStates.variant)]
    | Annotated[ConfigPhasedSubspaceStates, Tag(ConfigPhasedSubspaceStates.variant)]
    | Annotated[ConfigFixedStates, Tag(ConfigFixedStates.variant)],
    Discriminator(get_variant),
]


# Unitary ensembles


@dataclass
class ConfigHaarUnitariesSpecs:
    variant: ClassVar[Literal["haar"]] = "haar"
    n: int = 1


class ConfigHaarUnitaries(_VariantBaseModel, ConfigHaarUnitariesSpecs):
    n: int = Field(ge=1)


@dataclass
class ConfigCliffordUnitariesSpecs:
    variant: ClassVar[Literal["clifford"]] = "clifford"
    n: int = 1


class ConfigCliffordUnitaries(_VariantBaseModel, ConfigCliffordUnitariesSpecs):
    n: int = Field(ge=1)


@dataclass
class ConfigFixedUnitariesSpecs:
    variant: ClassVar[Literal["fixed_list"]] = "fixed_list"
    unitaries: list[np.ndarray] = field(default_factory=list)


class ConfigFixedUnitaries(_VariantBaseModel, ConfigFixedUnitariesSpecs):
    unitaries: list[ComplexArray] = Field(min_length=1)

    @field_validator("unitaries")
    @classmethod
    def check_unitary(cls, unitaries: list[np.ndarray]) -> list[np.ndarray]:
        for mat in unitaries:
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape != unitaries[0].shape:  # noqa: PLR2004
                msg = f"fixed unitaries must be square and of equal shape, got {mat.shape}"
                raise ValueError(msg)
            if np.linalg.norm(mat.conj().T @ mat - np.eye(mat.shape[0])) > 1e-10:  # noqa: PLR2004
                msg = "fixed unitary is not unitary to 1e-10"
                raise ValueError(msg)
        return unitaries


ConfigUnitaryEnsemble = Annotated[
    Annotated[ConfigHaarUnitaries, Tag(ConfigHaarUnitaries.variant)]
    | Annotated[ConfigCliffordUnitaries, Tag(ConfigCliffordUnitaries.variant)]
    | Annotated[ConfigFixedUnitaries, Tag(ConfigFixedUnitaries.variant)],
    Discriminator(get_variant),
]


def expand_state_shorthand(name: str, n: int | None, d: int | None) -> dict[str, Any]:
    """
    Turn a command line ensemble name into a config mapping.

    >>> expand_state_shorthand("subspace-random", 6, 2)
    {'variant': 'phased_subspace', 'n': 6, 'd': 2, 'phase_mode': 'true_random'}
    """
    if name.lstrip().startswith("{"):
        return json.loads(name)
    match name:
        case "haar" | "stabilizer":
            return {"variant": name, "n": n}
        case "subspace-kwise":
            return {"variant": "phased_subspace", "n": n, "d": d, "phase_mode": "kwise"}
        case "subspace-random":
            return {"variant": "phased_subspace", "n": n, "d": d, "phase_mode": "true_random"}
        case "subspace-ambient":
            return {"variant": "phased_subspace", "n": n, "d": d, "phase_mode": "kwise", "phase_domain": "ambient"}
        case _:
            msg = f"unknown state ensemble {name!r}"
            raise ValueError(msg)


def expand_unitary_shorthand(name: str, n: int | None) -> dict[str, Any]:
    if name.lstrip().startswith("{"):
        return json.loads(name)
    if name not in ("haar", "clifford"):
        msg = f"unknown unitary ensemble {name!r}"
        raise ValueError(msg)
    return {"variant": name, "n": n}


# Circuits

# arity of the gates that may be referenced by name in circuit files
GATE_ARITY: dict[str, int] = {
    "i": 1,
    "x": 1,
    "y": 1,
    "z": 1,
    "h": 1,
    "s": 1,
    "sdg": 1,
    "t": 1,
    "cnot": 2,
    "cz": 2,
    "swap": 2,
}


class ConfigGate(BaseModel):
    """
    One gate of a circuit file, either named or given by its matrix.

    >>> ConfigGate(q=[0, 1], gate="cnot").q
    [0, 1]
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    q: list[int] = Field(min_length=1, max_length=2)
    mat: ComplexArray | None = None
    gate: str | None = None

    @model_validator(mode="after")
    def check_gate_or_matrix(self) -> ConfigGate:
        if (self.mat is None) == (self.gate is None):
            msg = "a gate needs exactly one of 'gate' or 'mat'"
            raise ValueError(msg)
        if len(set(self.q)) != len(self.q) or min(self.q) < 0:
            msg = f"gate qubits must be distinct and non negative, got {self.q}"
            raise ValueError(msg)
        if self.gate is not None:
            if GATE_ARITY.get(self.gate) != len(self.q):
                msg = f"gate {self.gate!r} is unknown or does not act on {len(self.q)} qubit(s)"
                raise ValueError(msg)
        else:
            dim = 2 ** len(self.q)
            if self.mat.size != dim * dim:
                msg = f"a {len(self.q)}-qubit gate needs {dim * dim} matrix entries, got {self.mat.size}"
                raise ValueError(msg)
            self.mat = self.mat.reshape(dim, dim)
        return self


class ConfigCircuit(BaseModel):
    """
    Layered circuit file.

    Examples:

        >>> import textwrap
        >>> import pydantic_yaml
        >>> snippet = textwrap.dedent(
        ...     '''
        ...     n: 2
        ...     geometry: line
        ...     layers:
        ...       - [{q: [0], gate: h}]
        ...       - [{q: [0, 1], gate: cnot}]
        ...     '''
        ... )
        >>> circuit = pydantic_yaml.parse_yaml_raw_as(ConfigCircuit, snippet)
        >>> circuit.geometry, len(circuit.layers)
        (<Geometry.LINE: 'line'>, 2)
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int = Field(ge=0)
    ancillae: int = Field(default=0, ge=0)
    geometry: Geometry = Geometry.NONE
    ancilla_init: list[ComplexArray] = Field(default_factory=list)
    layers: list[list[ConfigGate]] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_wires(self) -> ConfigCircuit:
        if self.ancilla_init and len(self.ancilla_init) != self.ancillae:
            msg = f"ancilla_init lists {len(self.ancilla_init)} states for {self.ancillae} ancillae"
            raise ValueError(msg)
        for state in self.ancilla_init:
            if state.shape != (2,):
                msg = f"ancilla states are single-qubit states, got shape {state.shape}"
                raise ValueError(msg)
        wires = self.n + self.ancillae
        for depth, layer in enumerate(self.layers):
            for gate in layer:
                if max(gate.q) >= wires:
                    msg = f"gate on {gate.q} in layer {depth} exceeds the {wires} wires"
                    raise ValueError(msg)
        return self


def load_circuit(circuit_file: str | Path) -> ConfigCircuit:
    """Read a circuit file (JSON or YAML)."""
    from pydantic_yaml import parse_yaml_raw_as

    return parse_yaml_raw_as(ConfigCircuit, Path(circuit_file).read_text())


# Runs


class ConfigRun(BaseModel):
    """
    Parameters of one command line run.

    Ensemble shorthands such as ``haar`` or ``subspace-kwise`` are expanded
    with the run's ``n`` and ``d``.

    Examples:

        >>> run = ConfigRun(subcommand="lindep", n=10, d=3, ensemble="subspace-kwise")
        >>> run.ensemble.variant, run.ensemble.d, run.ensemble.phase_mode
        ('phased_subspace', 3, <PhaseMode.KWISE: 'kwise'>)
    """

    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    subcommand: str | None = None
    n: int | None = Field(default=None, ge=1)
    d: int | None = Field(default=None, ge=0)
    d_values: list[int] | None = None
    t: int | None = Field(default=None, ge=1)
    k: int | None = Field(default=None, ge=0)
    depth: int | None = Field(default=None, ge=0)
    samples: int | None = Field(default=None, ge=1)
    trials: int | None = Field(default=None, ge=1)
    pairs: int | None = Field(default=None, ge=1)
    subsets: int | None = Field(default=None, ge=1)
    copies: int | None = Field(default=None, ge=1)
    circuits: int | None = Field(default=None, ge=1)
    delta: float | None = Field(default=None, gt=0)
    m: int | None = Field(default=None, ge=1)
    outputs: list[int] | None = None
    postprocess: Literal["none", "lindep"] = "none"
    expect: Literal["indistinguishable", "distinguishable"] = "indistinguishable"
    within_block: bool = False
    seed: int = 0
    ensemble: ConfigStateEnsemble | None = None
    ensemble_b: ConfigStateEnsemble | None = None
    unitary: ConfigUnitaryEnsemble | None = None
    circuit: Path | None = None
    out: Path | None = None
    csv: Path | None = None
    dump: Path | None = None
    threads: int | None = Field(default=None, ge=1)
    shards: int = Field(default=1, ge=1)

    @model_validator(mode="before")
    @classmethod
    def expand_shorthands(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        for key in ("ensemble", "ensemble_b"):
            if isinstance(data.get(key), str):
                data[key] = expand_state_shorthand(data[key], data.get("n"), data.get("d"))
        if isinstance(data.get("unitary"), str):
            data["unitary"] = expand_unitary_shorthand(data["unitary"], data.get("n"))
        return data

    @field_validator("seed")
    @classmethod
    def check_seed_range(cls, value: int) -> int:
        if not 0 <= value < MAX_SEED:
            msg = f"seed must be a non negative 64-bit integer, got {value}"
            raise ValueError(msg)
        return value

    def params(self) -> dict[str, Any]:
        """Explicitly set parameters in JSON form, for reports."""
        params = self.model_dump(mode="json", exclude_unset=True, exclude={"out", "csv", "dump", "threads"})
        for key in ("ensemble", "ensemble_b", "unitary"):
            if (ensemble := getattr(self, key)) is not None:
                params[key] = ensemble.to_json_dict()
        return params


def read_run_values(run_config: str | Path) -> dict[str, Any]:
    """
    Raw mapping of a run configuration file, ensemble shorthands left unexpanded.

    A relative circuit path is resolved against the directory of the config file.
    """
    from pydantic_yaml import parse_yaml_raw_as

    config_path = Path(run_config)
    values = parse_yaml_raw_as(dict[str, Any], config_path.read_text())
    if values.get("circuit") is not None and not Path(values["circuit"]).is_absolute():
        values["circuit"] = str(config_path.resolve().parent / values["circuit"])
    return values


def load_run_config(run_config: str | Path) -> ConfigRun:
    """
    Loads a run configuration from YAML.

    :param run_config: path to the yaml file
    """
    return ConfigRun.model_validate(read_run_values(run_config))
