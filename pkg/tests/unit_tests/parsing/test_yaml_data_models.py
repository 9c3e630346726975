import textwrap

import numpy as np
import pydantic
import pytest

from prscope.parsing import _yaml_data_models as models
from prscope.parsing._utils import ComplexUtils, SeedUtils


@pytest.mark.parametrize(
    ("shorthand", "variant"),
    [("haar", "haar"), ("stabilizer", "stabilizer"), ("subspace-kwise", "phased_subspace")],
)
def test_state_shorthands(shorthand, variant):
    testee = models.ConfigRun(n=4, d=2, ensemble=shorthand)
    assert testee.ensemble.variant == variant
    assert testee.ensemble.n == 4


def test_ambient_phase_shorthand():
    testee = models.ConfigRun(n=5, d=3, ensemble="subspace-ambient")
    assert testee.ensemble.phase_domain is models.PhaseDomain.AMBIENT
    assert testee.ensemble.phase_mode is models.PhaseMode.KWISE


def test_json_ensemble_overrides_shorthand_parameters():
    testee = models.ConfigRun(n=4, ensemble='{"variant": "phased_subspace", "n": 6, "d": 1, "k": 6}')
    assert (testee.ensemble.n, testee.ensemble.d, testee.ensemble.k) == (6, 1, 6)


@pytest.mark.parametrize(
    "ensemble",
    [
        "unknown",
        '{"variant": "phased_subspace", "n": 3, "d": 4}',
        '{"variant": "phased_subspace", "n": 3, "d": 1, "k": 3}',
        '{"variant": "fixed_list", "states": [[[1, 0], [1, 0]]]}',
        '{"variant": "fixed_list", "states": [[[1, 0], [0, 0], [0, 0]]]}',
    ],
)
def test_invalid_state_ensembles(ensemble):
    with pytest.raises(pydantic.ValidationError):
        models.ConfigRun(n=3, d=1, ensemble=ensemble)


def test_subspace_shorthand_needs_dimension():
    with pytest.raises(pydantic.ValidationError):
        models.ConfigRun(n=3, ensemble="subspace-kwise")


def test_unitary_shorthands():
    assert models.ConfigRun(n=2, unitary="clifford").unitary.variant == "clifford"
    with pytest.raises(pydantic.ValidationError):
        models.ConfigRun(n=2, unitary="stabilizer")
    with pytest.raises(pydantic.ValidationError):
        models.ConfigRun(unitary='{"variant": "fixed_list", "unitaries": [[[[1, 0], [1, 0]], [[0, 0], [1, 0]]]]}')


@pytest.mark.parametrize("field", [{"seed": -1}, {"seed": 2**64}, {"n": 0}, {"shards": 0}, {"unknown": 1}])
def test_invalid_run_fields(field):
    with pytest.raises(pydantic.ValidationError):
        models.ConfigRun(**field)


def test_params_lists_explicit_values_only():
    testee = models.ConfigRun(subcommand="lindep", n=6, d=2, ensemble="subspace-kwise", out="x.json", threads=4)
    params = testee.params()
    assert params["n"] == 6
    assert params["ensemble"]["variant"] == "phased_subspace"
    assert "out" not in params
    assert "threads" not in params
    assert "trials" not in params


def test_gate_needs_name_or_matrix():
    with pytest.raises(pydantic.ValidationError):
        models.ConfigGate(q=[0])
    with pytest.raises(pydantic.ValidationError):
        models.ConfigGate(q=[0], gate="cnot")
    with pytest.raises(pydantic.ValidationError):
        models.ConfigGate(q=[0, 0], gate="cz")
    with pytest.raises(pydantic.ValidationError):
        models.ConfigGate(q=[0], mat=[[1, 0], [0, 0], [0, 0]])
    gate = models.ConfigGate(q=[1], mat=[[0, 0], [1, 0], [1, 0], [0, 0]])
    assert gate.mat.shape == (2, 2)


def test_circuit_wires_are_checked():
    with pytest.raises(pydantic.ValidationError):
        models.ConfigCircuit(n=2, layers=[[{"q": [1, 2], "gate": "cnot"}]])
    with pytest.raises(pydantic.ValidationError):
        models.ConfigCircuit(n=2, ancillae=1, ancilla_init=[[[1, 0], [0, 0]], [[1, 0], [0, 0]]])
    circuit = models.ConfigCircuit(n=2, ancillae=1, layers=[[{"q": [1, 2], "gate": "cnot"}]])
    assert circuit.geometry is models.Geometry.NONE


def test_load_circuit(tmp_path):
    circuit_file = tmp_path / "bell.yml"
    circuit_file.write_text(
        textwrap.dedent(
            """
            n: 2
            geometry: line
            layers:
              - [{q: [0], gate: h}]
              - [{q: [0, 1], gate: cnot}]
            """
        )
    )
    testee = models.load_circuit(circuit_file)
    assert testee.n == 2
    assert [len(layer) for layer in testee.layers] == [1, 1]


def test_load_run_config(tmp_path):
    (tmp_path / "circuits").mkdir()
    config_file = tmp_path / "run.yml"
    config_file.write_text(
        textwrap.dedent(
            """
            subcommand: advantage
            n: 3
            t: 1
            ensemble: stabilizer
            circuit: circuits/shallow.json
            seed: 7
            """
        )
    )
    values = models.read_run_values(config_file)
    assert values["ensemble"] == "stabilizer"
    testee = models.load_run_config(config_file)
    assert testee.seed == 7
    assert testee.ensemble.variant == "stabilizer"
    assert testee.circuit == tmp_path.resolve() / "circuits" / "shallow.json"


def test_complex_pairs():
    assert np.allclose(ComplexUtils.from_pairs([[[1, 0], [0, 1]]]), [[1, 1j]])
    with pytest.raises(ValueError, match="pairs"):
        ComplexUtils.from_pairs([1, 2, 3])


def test_seed_derivation_separates_subcommands():
    a = SeedUtils.derive_rng(0, "lindep").integers(2**32)
    b = SeedUtils.derive_rng(0, "lindep").integers(2**32)
    c = SeedUtils.derive_rng(0, "purity-check").integers(2**32)
    assert a == b
    assert a != c
