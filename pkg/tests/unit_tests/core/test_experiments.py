import dataclasses
import math

import numpy as np
import pytest

from prscope.core import experiments
from prscope.core.circuits import LayeredCircuit, random_brickwork
from prscope.core.ensembles import FixedStates, HaarStates, HaarUnitaries, PhasedSubspaceStates
from prscope.core.errors import DomainError
from prscope.core.statevec import StateVector


def test_tv_distance():
    assert experiments.tv_distance([1, 0], [1, 0]) == 0.0
    assert experiments.tv_distance([1, 0, 0], [0, 0.5, 0.5]) == 1.0


def test_lindep_bound():
    assert experiments.lindep_bound(10, 3) == pytest.approx(2**-6 + 12 / 1024)


def test_lindep_accepts_every_subspace_state(rng):
    result = experiments.lindep_distinguisher(6, 2, PhasedSubspaceStates(n=6, d=2), 200, rng)
    assert result.accept_prob_ensemble == 1.0
    assert result.accept_prob_haar < 0.5
    assert result.details["copies"] == 3
    assert result.passed
    assert set(result.per_trial) == {"ensemble.accept", "haar.accept"}
    assert result.as_json_dict()["pass"] is True


def test_lindep_requires_full_acceptance_on_small_subspaces(rng):
    # one nonzero outcome is independent, the zero outcome is not
    never = FixedStates.of([StateVector.basis("1000")])
    subspace = PhasedSubspaceStates(n=4, d=0)
    assert experiments.lindep_distinguisher(4, 0, never, 50, rng).accept_prob_ensemble == 0.0
    assert experiments.lindep_distinguisher(4, 0, subspace, 50, rng).accept_prob_ensemble == 1.0


def test_lindep_accept_probability_grows_with_copies(rng):
    ensemble = PhasedSubspaceStates(n=5, d=2)
    fewer, more = (
        experiments.lindep_distinguisher(5, 2, ensemble, 2000, stream, copies=copies)
        for copies, stream in zip((3, 4), rng.spawn(2), strict=True)
    )
    assert fewer.accept_prob_ensemble == more.accept_prob_ensemble == 1.0
    combined = np.hypot(fewer.stderr_haar, more.stderr_haar)
    assert more.accept_prob_haar >= fewer.accept_prob_haar - 3 * combined
    assert more.accept_prob_haar > fewer.accept_prob_haar


def test_lindep_domain(rng):
    with pytest.raises(DomainError):
        experiments.lindep_distinguisher(4, 4, HaarStates(n=4), 10, rng)
    with pytest.raises(DomainError):
        experiments.lindep_distinguisher(4, 1, HaarStates(n=3), 10, rng)


def test_circuit_advantage_separates_orthogonal_inputs(rng):
    zeros = FixedStates.of([StateVector.basis("00")])
    ones = FixedStates.of([StateVector.basis("11")])
    result = experiments.circuit_advantage(
        LayeredCircuit(2), [0, 1], zeros, ones, 1, 200, rng, expect="distinguishable"
    )
    assert result.advantage == 1.0
    assert result.accept_prob_ensemble == 0.0
    assert result.accept_prob_haar == 1.0
    assert result.ci_low == 1.0
    assert result.passed
    assert result.details["mode"] == "copywise"


def test_circuit_advantage_of_identical_inputs(rng):
    zeros = FixedStates.of([StateVector.basis("01")])
    result = experiments.circuit_advantage(LayeredCircuit(2), [0, 1], zeros, zeros, 2, 100, rng)
    assert result.advantage == 0.0
    assert result.passed
    assert result.details["outcome_bits"] == 4


def test_circuit_advantage_lindep_postprocessing(rng):
    subspace = PhasedSubspaceStates(n=4, d=1)
    result = experiments.circuit_advantage(
        LayeredCircuit(4),
        range(4),
        subspace,
        HaarStates(n=4),
        3,
        300,
        rng,
        postprocess="lindep",
        expect="distinguishable",
    )
    assert result.accept_prob_ensemble == 1.0
    assert result.details["outcome_bits"] == 1
    assert result.passed


def test_circuit_advantage_joint_mode(rng):
    zeros = FixedStates.of([StateVector.basis("0")])
    bell = LayeredCircuit.from_layers(2, [[((0,), "h")], [((0, 1), "cnot")]])
    result = experiments.circuit_advantage(bell, [0, 1], zeros, zeros, 2, 100, rng)
    assert result.details["mode"] == "joint"
    assert set(np.unique(result.per_trial["a.outcome"]).tolist()) <= {0.0, 3.0}


def test_circuit_advantage_domain(rng):
    haar = HaarStates(n=2)
    with pytest.raises(DomainError):
        experiments.circuit_advantage(LayeredCircuit(3), [0], haar, haar, 1, 10, rng)
    with pytest.raises(DomainError):
        experiments.circuit_advantage(LayeredCircuit(2), [2], haar, haar, 1, 10, rng)
    with pytest.raises(DomainError):
        experiments.circuit_advantage(LayeredCircuit(2), [0], haar, HaarStates(n=3), 1, 10, rng)
    wide = HaarStates(n=7)
    with pytest.raises(DomainError):
        experiments.circuit_advantage(LayeredCircuit(7), range(7), wide, wide, 2, 10, rng)
    with pytest.raises(DomainError):
        experiments.circuit_advantage(LayeredCircuit(4), [0, 1, 2], haar, haar, 2, 10, rng, postprocess="lindep")


def test_kwise_marginals_of_a_fixed_state_fail(rng):
    zeros = FixedStates.of([StateVector.basis("000")])
    report = experiments.kwise_marginal_check(LayeredCircuit(3), zeros, 1, 1, 20, 300, rng)
    assert report.max_tv == pytest.approx(0.5)
    assert report.reference == "uniform"
    assert report.subsets_inspected == 3
    assert not report.passed


def test_kwise_marginals_of_haar_states(rng):
    report = experiments.kwise_marginal_check(LayeredCircuit(3), HaarStates(n=3), 1, 2, 2, 1000, rng)
    assert report.subsets_inspected == 2
    assert report.max_tv < 0.1
    assert report.reference_trials == 0
    assert report.ci_low <= report.ci_high


def test_kwise_marginals_with_corrupting_ancilla(rng):
    c = LayeredCircuit.from_layers(1, [[((0, 1), "cnot")]], num_ancillae=1, geometry="line")
    report = experiments.kwise_marginal_check(c, HaarStates(n=1), 1, 2, 5, 1000, rng, reference_trials=3000)
    assert report.corrupted == [0, 1]
    assert report.reference == "uniform*corrupted"
    assert report.reference_trials == 3000
    assert report.max_tv < 0.1


def test_kwise_marginals_domain(rng):
    haar = HaarStates(n=2)
    with pytest.raises(DomainError):
        experiments.kwise_marginal_check(LayeredCircuit(3), haar, 1, 1, 5, 10, rng)
    with pytest.raises(DomainError):
        experiments.kwise_marginal_check(LayeredCircuit(2), haar, 1, 3, 5, 10, rng)


def test_pru_game_on_product_input(rng):
    pre = random_brickwork(6, 0, "line", rng)
    report = experiments.pru_parallel_game(3, 2, pre, HaarUnitaries(n=3), 1, 300, rng, within_block=True)
    assert report.details["r"] == 1
    assert report.bound == pytest.approx(2 * 2 ** (1 - 1.5))
    assert report.details["purity_target"] == pytest.approx(2 / 3)
    assert report.passed
    assert set(report.per_trial) == {"worst_trace_norm", "mean_trace_norm", "second_moment", "purity"}


def test_pru_game_on_entangled_input(rng):
    pre = random_brickwork(6, 2, "line", rng)
    report = experiments.pru_parallel_game(
        3, 2, pre, HaarUnitaries(n=3), 2, 100, rng, subsets=[[0, 1], [2, 5]]
    )
    assert 1 <= report.details["r"] <= report.details["rank_bound"] == 16
    assert report.details["subsets"] == [[0, 1], [2, 5]]
    assert "purity_target" not in report.details


def test_pru_game_domain(rng):
    haar = HaarUnitaries(n=2)
    with pytest.raises(DomainError):
        experiments.pru_parallel_game(2, 2, LayeredCircuit(4), haar, 1, 10, rng)
    line = random_brickwork(4, 1, "line", rng)
    with pytest.raises(DomainError):
        experiments.pru_parallel_game(2, 2, line, haar, 3, 10, rng, within_block=True)
    with pytest.raises(DomainError):
        experiments.pru_parallel_game(2, 2, line, haar, 2, 10, rng, subsets=[[0, 0]])
    with pytest.raises(DomainError):
        experiments.pru_parallel_game(3, 2, line, HaarUnitaries(n=3), 1, 10, rng)


def test_pseudoentanglement_stays_below_subspace_dimension(rng):
    report = experiments.pseudoentanglement_report(6, 2, 50, rng)
    assert report.cuts == [1, 2, 3, 4, 5]
    assert report.violations == 0
    assert report.passed
    assert report.subspace_max <= 2.0 + 1e-9
    assert report.haar_mean[2] > 2.0
    assert report.per_trial["haar.middle_entropy"].shape == (50,)


def test_pseudoentanglement_with_explicit_ensemble(rng):
    ensemble = PhasedSubspaceStates(n=4, d=4, phase_mode="true_random")
    report = experiments.pseudoentanglement_report(4, 4, 20, rng, ensemble=ensemble)
    assert report.d == 4
    assert report.ceiling == 4.0
    assert report.passed
    with pytest.raises(DomainError):
        experiments.pseudoentanglement_report(1, 0, 10, rng)


def test_design_scaling(rng):
    report = experiments.design_scaling(6, [4, 3, 3], 2, 2000, rng)
    assert [p.d for p in report.points] == [3, 4]
    assert len(report.ratios) == len(report.ratio_stderrs) == 1
    assert report.points[0].bound == pytest.approx(1.6875)
    assert report.passed
    assert report.as_json_dict()["points"][0]["d"] == 3


def _scaling_report(distances, ratios, ratio_stderrs):
    points = [
        experiments.ScalingPoint(
            d=d,
            frame_potential=0.0,
            frame_potential_stderr=0.0,
            frobenius_distance=dist,
            frobenius_stderr=0.0,
            bound=1.0,
        )
        for d, dist in distances
    ]
    return experiments.ScalingReport(n=6, t=2, pairs=1000, points=points, ratios=ratios, ratio_stderrs=ratio_stderrs)


@pytest.mark.parametrize(
    ("ratio", "stderr", "passed"),
    [(2.0, 0.0, True), (1.1, 0.01, False), (3.5, 0.01, False), (1.45, 0.02, True), (math.inf, math.inf, False)],
)
def test_design_scaling_requires_shrinking_distances(ratio, stderr, passed):
    report = _scaling_report([(3, 0.2), (4, 0.1)], [ratio], [stderr])
    assert report.passed is passed
    assert report.as_json_dict()["ratio_stderrs"] == [stderr]


def test_design_scaling_fails_above_the_bound():
    assert not _scaling_report([(3, 2.0), (4, 1.0)], [2.0], [0.0]).passed


def test_pseudoentanglement_checks_the_haar_arm(rng):
    report = experiments.pseudoentanglement_report(6, 2, 50, rng)
    assert report.haar_target == pytest.approx(2.2918, abs=1e-3)
    assert report.as_json_dict()["middle_cut"] == 3
    off = dataclasses.replace(report, haar_mean=[0.0] * len(report.cuts))
    assert off.violations == 0
    assert not off.passed


def test_pru_game_reports_one_fixed_worst_subset(rng):
    pre = random_brickwork(6, 0, "line", rng)
    report = experiments.pru_parallel_game(3, 2, pre, HaarUnitaries(n=3), 1, 200, rng, subsets=[[0], [1], [4]])
    worst = report.details["worst_subset"]
    assert worst in [[0], [1], [4]]
    per_trial = report.per_trial
    assert per_trial["worst_trace_norm"].shape == (200,)
    # a fixed subset falls below the per-trial average in some trials
    assert np.mean(per_trial["worst_trace_norm"]) == pytest.approx(report.details["worst_trace_norm_mean"])
    assert np.mean(per_trial["worst_trace_norm"]) >= report.measured - 1e-12
    assert np.any(per_trial["worst_trace_norm"] < per_trial["mean_trace_norm"])
