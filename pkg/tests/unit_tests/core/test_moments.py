import itertools

import numpy as np
import pytest

from prscope.core import gf2, moments
from prscope.core.ensembles import (
    FixedStates,
    HaarStates,
    HaarUnitaries,
    StabilizerStates,
    phased_subspace_state,
    sample_haar_state,
)
from prscope.core.errors import DomainError, ResourceError
from prscope.core.statevec import StateVector, tensor_power


def test_haar_moment_is_normalized_symmetric_projector():
    haar = moments.haar_moment(1, 2)
    assert np.trace(haar.mat).real == pytest.approx(1.0)
    assert np.allclose(haar.mat, moments.symmetric_projector(2, 2) / 3)
    # the symmetric projector is a projector
    proj = moments.symmetric_projector(2, 3)
    assert np.allclose(proj @ proj, proj)
    assert np.trace(proj) == pytest.approx(4.0)


def test_moment_size_limits():
    with pytest.raises(DomainError):
        moments.haar_moment(1, 4)
    with pytest.raises(ResourceError):
        moments.haar_moment(5, 3)


def test_moment_operator_validation():
    with pytest.raises(DomainError):
        moments.MomentOperator(1, 1, np.eye(2, dtype=complex))
    with pytest.raises(DomainError):
        moments.MomentOperator(1, 2, np.eye(2, dtype=complex) / 2)


@pytest.mark.parametrize(("n", "t"), [(1, 2), (1, 3), (2, 2), (2, 3)])
def test_stabilizer_states_form_exact_designs(n, t, rng):
    moment = moments.empirical_moment(StabilizerStates(n=n), t, 10, rng)
    assert moment.sample_count == 0
    assert moments.moment_distance(moment, moments.haar_moment(n, t), 1) < 1e-9


def test_stabilizer_states_are_not_four_designs():
    estimate = moments.frame_potential(StabilizerStates(n=2), 4, 10, np.random.default_rng(0))
    assert estimate.stderr == 0.0
    assert estimate.excess > 1e-3


def test_sampled_haar_moment(rng):
    moment = moments.empirical_moment(HaarStates(n=1), 1, 400, rng)
    assert moment.sample_count == 400
    assert moments.moment_distance(moment, moments.haar_moment(1, 1), 2) < 0.2


def test_moment_distance_domain():
    with pytest.raises(DomainError):
        moments.moment_distance(moments.haar_moment(1, 1), moments.haar_moment(1, 2))
    with pytest.raises(DomainError):
        moments.moment_distance(moments.haar_moment(1, 1), moments.haar_moment(1, 1), 3)


def test_moment_distance_check_exact(rng):
    report = moments.moment_distance_check(StabilizerStates(n=2), 2, 10, rng)
    assert report.passed
    assert report.details["exact"] is True
    assert report.measured < 1e-9

    fixed = FixedStates.of([StateVector.basis("00")])
    report = moments.moment_distance_check(fixed, 2, 10, rng)
    assert not report.passed
    assert report.measured > 1.0


def test_moment_distance_check_sampled(rng):
    report = moments.moment_distance_check(HaarStates(n=1), 2, 300, rng)
    assert report.details["exact"] is False
    assert report.bound == pytest.approx(3 * report.details["haar_noise_floor"])


def test_frame_potential_exact_and_sampled(rng):
    exact = moments.frame_potential(StabilizerStates(n=2), 2, 10, rng)
    assert exact.mean == pytest.approx(moments.haar_frame_potential(2, 2))
    assert exact.pairs == 3600
    assert exact.passed

    sampled = moments.frame_potential(HaarStates(n=2), 2, 2000, rng)
    assert moments.within_sigmas(sampled.mean, moments.haar_frame_potential(2, 2), sampled.stderr)
    assert set(sampled.as_json_dict()) == {"t", "mean", "stderr", "pairs", "haar", "frobenius_distance", "pass"}

    with pytest.raises(DomainError):
        moments.frame_potential(HaarStates(n=2), 2, 10, rng)


def test_frame_potential_of_a_single_state():
    estimate = moments.frame_potential(FixedStates.of([StateVector.basis("0")]), 2, 1, np.random.default_rng(0))
    assert estimate.mean == 1.0
    assert estimate.frobenius_distance == pytest.approx(np.sqrt(1 - moments.haar_frame_potential(1, 2)))


def test_purity_expectation_check(rng):
    report = moments.purity_expectation_check(4, 1, HaarStates(n=4), 2000, rng)
    assert report.target == pytest.approx(10 / 17)
    assert report.passed
    assert report.per_trial["purity"].shape == (2000,)
    with pytest.raises(DomainError):
        moments.purity_expectation_check(4, 5, HaarStates(n=4), 10, rng)


def test_purity_of_product_states_fails(rng):
    report = moments.purity_expectation_check(4, 2, FixedStates.of([StateVector.basis("0101")]), 100, rng)
    assert report.measured == pytest.approx(1.0)
    assert not report.passed


def test_offdiag_check(rng):
    report = moments.offdiag_check(3, 1, HaarUnitaries(n=3), 2000, rng)
    assert report.target == pytest.approx(1 / 7)
    assert report.bound == pytest.approx(0.25)
    assert report.passed


def test_offdiag_check_rejects_non_orthonormal_pairs(rng):
    v = np.zeros(4)
    v[0] = 1.0
    with pytest.raises(DomainError):
        moments.offdiag_check(2, 1, HaarUnitaries(n=2), 10, rng, v=v, w=v)


def test_closed_forms():
    assert moments.page_purity(4, 0) == pytest.approx(1.0)
    assert moments.page_entropy(2, 1) == pytest.approx(1 / (3 * np.log(2)))
    assert moments.page_entropy(5, 3) == pytest.approx(moments.page_entropy(5, 2))
    assert moments.offdiag_value(3, 3) == pytest.approx(1.0)
    assert moments.distinct_fraction(1, 3) == 0.0
    assert moments.haar_distinct_weight(2, 2) == pytest.approx(0.6)
    assert moments.dependence_probability_bound(4, 1) == pytest.approx(1 / 16)
    with pytest.raises(DomainError):
        moments.subspace_design_bound(4, 2, 2)


def test_copy_marginal_of_basis_state():
    psi = StateVector.basis("01")
    out = moments.copy_marginal(psi, 2, (1, 2))
    assert out.shape == (4, 4)
    assert out[2, 2] == pytest.approx(1.0)
    with pytest.raises(DomainError):
        moments.copy_marginal(psi, 2, (0, 4))


def test_phase_averaged_moment_matches_sign_enumeration():
    s = gf2.Subspace(2, [gf2.bits("10"), gf2.bits("01")])
    t = 2
    total = np.zeros((16, 16), dtype=complex)
    patterns = list(itertools.product((0, 1), repeat=4))
    for signs in patterns:
        vec = tensor_power(phased_subspace_state(s, signs), t).amps
        total += np.outer(vec, vec.conj())
    expected = total / len(patterns)
    assert np.allclose(moments.phase_averaged_moment(s, t).mat, expected)


def test_distinct_symmetric_moment():
    elements = gf2.ints_to_bits(np.arange(4), 2)
    moment = moments.distinct_symmetric_moment(elements, 2)
    assert np.trace(moment.mat).real == pytest.approx(1.0)
    with pytest.raises(DomainError):
        moments.distinct_symmetric_moment([[0], [0]], 2)


def test_mixedness_probability_haar(rng):
    report = moments.mixedness_probability(HaarStates(n=6), 1, 1, 0.25, 200, rng)
    assert report.details["bound_vacuous"]
    assert report.passed
    assert moments.within_sigmas(
        report.details["second_moment_mean"],
        report.details["second_moment_haar"],
        report.details["second_moment_stderr"],
    )
    assert report.per_trial["second_moment"].shape == (200,)


def test_mixedness_probability_domain(rng):
    with pytest.raises(DomainError):
        moments.mixedness_probability(HaarStates(n=2), 1, 3, 0.1, 10, rng)


def test_within_sigmas():
    assert moments.within_sigmas(1.0, 1.0, 0.0)
    assert not moments.within_sigmas(1.0, 1.1, 0.0)
    assert moments.within_sigmas(1.0, 1.4, 0.1)


@pytest.mark.parametrize("t", [2, 3])
def test_frobenius_distance_equals_frame_potential_excess(t, rng):
    members = FixedStates.of([sample_haar_state(2, rng) for _ in range(5)])
    moment = moments.empirical_moment(members, t, 10, rng)
    estimate = moments.frame_potential(members, t, 10, rng)
    distance = moments.moment_distance(moment, moments.haar_moment(2, t), 2)
    assert distance**2 == pytest.approx(estimate.excess, abs=1e-12)
    assert distance == pytest.approx(estimate.frobenius_distance, abs=1e-9)


def test_empirical_moment_error_shrinks_as_inverse_root_of_samples(rng):
    haar = moments.haar_moment(3, 2)
    small, large = (
        moments.moment_distance(moments.empirical_moment(HaarStates(n=3), 2, samples, stream), haar, 2)
        for samples, stream in zip((1000, 4000), rng.spawn(2), strict=True)
    )
    assert 1.6 <= small / large <= 2.5


def test_stabilizer_and_haar_marginals_share_second_moments(rng):
    reports = [
        moments.mixedness_probability(ensemble, 1, 1, 0.1, 1000, stream)
        for ensemble, stream in zip((StabilizerStates(n=10), HaarStates(n=10)), rng.spawn(2), strict=True)
    ]
    means = [report.details["second_moment_mean"] for report in reports]
    stderrs = [report.details["second_moment_stderr"] for report in reports]
    assert moments.within_sigmas(means[0], means[1], float(np.hypot(*stderrs)), sigmas=3)
    assert reports[1].details["second_moment_haar"] == pytest.approx(moments.page_purity(10, 1) - 0.5)
