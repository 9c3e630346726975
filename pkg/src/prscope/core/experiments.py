"""
Distinguishing games and structural experiments on the ensembles.

Every experiment draws its trials through :func:`prscope.core._sampling.monte_carlo`,
so results only depend on the generator state and the shard count. Total
variation distances are plug-in estimates over empirical outcome counts,
with bootstrap resampling for their uncertainty.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Literal

import numpy as np
import numpy.typing as npt

from prscope.core import gf2
from prscope.core._sampling import mean_stderr, monte_carlo
from prscope.core.circuits import (
    LayeredCircuit,
    apply,
    forward_lightcone,
    validate,
)
from prscope.core.ensembles import HaarStates, PhasedSubspaceStates, StateEnsemble
from prscope.core.errors import DomainError
from prscope.core.moments import (
    PASS_SIGMAS,
    BoundReport,
    copy_marginal,
    frame_potential,
    page_entropy,
    page_purity,
    subspace_design_bound,
    within_sigmas,
)
from prscope.core.statevec import (
    SCHMIDT_CUTOFF,
    StateVector,
    SubsystemMask,
    entanglement_entropy,
    recursive_schmidt,
    sample_outcomes,
    tensor_power,
)
from prscope.parsing._yaml_data_models import Geometry

if TYPE_CHECKING:
    from collections.abc import Sequence

    from prscope.core.ensembles import UnitaryEnsemble

logger = logging.getLogger(__name__)

BOOTSTRAP_RESAMPLES = 1000
MAX_OUTPUT_BITS = 12
NULL_SIGMAS = 3.0
REFERENCE_FACTOR = 9  # reference trials per sampled trial
DEFAULT_SUBSETS = 20
SHRINK_RANGE = (1.5, 3.0)  # accepted per-unit-of-d distance shrink

Postprocess = Literal["none", "lindep"]
Expectation = Literal["indistinguishable", "distinguishable"]


def tv_distance(p: npt.ArrayLike, q: npt.ArrayLike) -> float:
    """
    >>> tv_distance([0.5, 0.5], [1.0, 0.0])
    0.5
    """
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


def _frequencies(counts: npt.NDArray) -> npt.NDArray[np.float64]:
    return counts / np.maximum(counts.sum(axis=-1, keepdims=True), 1)


@dataclass(frozen=True)
class DistinguisherResult:
    """
    Acceptance probabilities of one test on two arms, with their advantage.

    ``ci_low``/``ci_high`` is a 95% bootstrap interval of the advantage and
    ``null_mean``/``null_std`` describe the plug-in advantage of two arms
    drawn from the same (pooled) distribution.
    """

    statistic: str
    accept_prob_ensemble: float
    stderr_ensemble: float
    accept_prob_haar: float
    stderr_haar: float
    advantage: float
    trials: int
    passed: bool
    ci_low: float | None = None
    ci_high: float | None = None
    null_mean: float | None = None
    null_std: float | None = None
    analytic_bound: float | None = None
    bound_vacuous: bool = False
    details: dict[str, Any] = field(default_factory=dict)
    per_trial: dict[str, npt.NDArray[np.float64]] = field(default_factory=dict, repr=False)

    def as_json_dict(self) -> dict[str, Any]:
        return {
            "statistic": self.statistic,
            "accept_prob_ensemble": self.accept_prob_ensemble,
            "stderr_ensemble": self.stderr_ensemble,
            "accept_prob_haar": self.accept_prob_haar,
            "stderr_haar": self.stderr_haar,
            "advantage": self.advantage,
            "ci": [self.ci_low, self.ci_high],
            "null_mean": self.null_mean,
            "null_std": self.null_std,
            "analytic_bound": self.analytic_bound,
            "bound_vacuous": self.bound_vacuous,
            "trials": self.trials,
            "pass": self.passed,
            "details": self.details,
        }


def lindep_bound(n: int, d: int) -> float:
    """
    Bound on the probability that d+1 measurements of a Haar state are dependent.

    >>> round(lindep_bound(10, 3), 4)
    0.0273
    """
    return 2.0 ** -(n - d - 1) + d * (d + 1) / 2**n


def lindep_distinguisher(
    n: int,
    d: int,
    ensemble: StateEnsemble,
    trials: int,
    rng: np.random.Generator,
    *,
    copies: int | None = None,
    shards: int = 1,
    threads: int | None = None,
) -> DistinguisherResult:
    """
    Measure ``copies`` fresh preparations of one sampled state and accept when the outcomes are dependent over F2.

    ``copies`` defaults to d+1. The same test runs on Haar states.
    """
    if not 0 <= d < n or ensemble.num_qubits != n:
        msg = f"need 0 <= d < n and an ensemble on n={n} qubits, got d={d} on {ensemble.num_qubits}"
        raise DomainError(msg)
    copies = d + 1 if copies is None else copies

    def arm(source: StateEnsemble):
        def draw(count: int, stream: np.random.Generator) -> npt.NDArray[np.float64]:
            return np.array(
                [
                    gf2.is_dependent(gf2.ints_to_bits(sample_outcomes(source.sample(stream), copies, stream), n))
                    for _ in range(count)
                ],
                dtype=np.float64,
            )

        return draw

    stream_ens, stream_haar = rng.spawn(2)
    accepts_ens = monte_carlo(arm(ensemble), trials, stream_ens, shards=shards, threads=threads)
    accepts_haar = monte_carlo(arm(HaarStates(n=n)), trials, stream_haar, shards=shards, threads=threads)
    p_ens, se_ens = mean_stderr(accepts_ens)
    p_haar, se_haar = mean_stderr(accepts_haar)
    bound = lindep_bound(n, d)
    passed = bound >= 1.0 or p_haar <= bound + PASS_SIGMAS * se_haar
    if isinstance(ensemble, PhasedSubspaceStates) and ensemble.d <= d and copies > ensemble.d:
        # outcomes lie in a subspace of dimension below the number of copies
        passed = passed and p_ens == 1.0
    logger.info("lindep n=%d d=%d: accept %.4f on the ensemble, %.4f on Haar", n, d, p_ens, p_haar)
    return DistinguisherResult(
        statistic="lindep",
        accept_prob_ensemble=p_ens,
        stderr_ensemble=se_ens,
        accept_prob_haar=p_haar,
        stderr_haar=se_haar,
        advantage=abs(p_ens - p_haar),
        trials=trials,
        passed=passed,
        analytic_bound=bound,
        bound_vacuous=bound >= 1.0,
        details={"n": n, "d": d, "copies": copies, "advantage_stderr": math.hypot(se_ens, se_haar)},
        per_trial={"ensemble.accept": accepts_ens, "haar.accept": accepts_haar},
    )


def _run_copies(
    c: LayeredCircuit,
    psi: StateVector,
    t: int,
    mode: Literal["joint", "copywise"],
    stream: np.random.Generator,
) -> npt.NDArray[np.int64]:
    """Measured bit rows of t fresh copies, shape (t, wires) copywise or (1, wires) jointly."""
    if mode == "joint":
        out = apply(c, tensor_power(psi, t))
        return gf2.ints_to_bits(sample_outcomes(out, 1, stream), c.num_wires)
    out = apply(c, psi)
    return gf2.ints_to_bits(sample_outcomes(out, t, stream), c.num_wires)


def _null_tv(
    counts_a: npt.NDArray, counts_b: npt.NDArray, resamples: int, rng: np.random.Generator
) -> npt.NDArray[np.float64]:
    """Plug-in TV of two samples of the observed sizes drawn from the pooled distribution."""
    pooled = (counts_a + counts_b) / (counts_a.sum() + counts_b.sum())
    draws_a = rng.multinomial(int(counts_a.sum()), pooled, size=resamples)
    draws_b = rng.multinomial(int(counts_b.sum()), pooled, size=resamples)
    return 0.5 * np.sum(np.abs(_frequencies(draws_a) - _frequencies(draws_b)), axis=-1)


def circuit_advantage(
    c: LayeredCircuit,
    output_bits: Sequence[int],
    ensemble_a: StateEnsemble,
    ensemble_b: StateEnsemble,
    t: int,
    trials: int,
    rng: np.random.Generator,
    *,
    postprocess: Postprocess = "none",
    mode: Literal["joint", "copywise"] | None = None,
    expect: Expectation = "indistinguishable",
    shards: int = 1,
    threads: int | None = None,
) -> DistinguisherResult:
    """
    Total variation between the outcome distributions of a measured circuit fed with t copies from two ensembles.

    ``joint`` runs the circuit once on all t copies (t*n system wires),
    ``copywise`` runs it on each n-qubit copy separately; the default picks
    whichever matches the circuit width. With ``postprocess="lindep"`` the
    outcome is the single bit telling whether the measured copies are
    linearly dependent over F2. The accept event is a nonzero outcome.
    """
    n = ensemble_a.num_qubits
    if ensemble_b.num_qubits != n:
        msg = f"both arms need the same qubit count, got {n} and {ensemble_b.num_qubits}"
        raise DomainError(msg)
    if mode is None:
        mode = "joint" if c.num_system_qubits == t * n and t > 1 else "copywise"
    width = t * n if mode == "joint" else n
    if c.num_system_qubits != width:
        msg = f"{mode} mode needs a circuit on {width} system qubits, got {c.num_system_qubits}"
        raise DomainError(msg)
    validate(c)
    watched = sorted(set(output_bits))
    if not watched or watched[0] < 0 or watched[-1] >= c.num_wires:
        msg = f"output wires {list(output_bits)} out of range for {c.num_wires} wires"
        raise DomainError(msg)
    rows_per_trial = 1 if mode == "joint" else t
    if postprocess == "lindep" and mode == "joint" and len(watched) % t:
        msg = f"joint lindep post-processing splits the outputs into {t} equal copies, got {len(watched)} wires"
        raise DomainError(msg)
    bits = 1 if postprocess == "lindep" else rows_per_trial * len(watched)
    if bits > MAX_OUTPUT_BITS:
        msg = f"total variation over {bits} outcome bits exceeds the cap of {MAX_OUTPUT_BITS}"
        raise DomainError(msg)

    def arm(source: StateEnsemble):
        def draw(count: int, stream: np.random.Generator) -> npt.NDArray[np.int64]:
            outcomes = np.empty(count, dtype=np.int64)
            for i in range(count):
                measured = _run_copies(c, source.sample(stream), t, mode, stream)[:, watched]
                if postprocess == "lindep":
                    copy_rows = measured.reshape(t, -1)
                    outcomes[i] = int(gf2.is_dependent(copy_rows))
                else:
                    outcomes[i] = gf2.to_int(measured.reshape(-1))
            return outcomes

        return draw

    stream_a, stream_b, stream_boot = rng.spawn(3)
    outcomes_a = monte_carlo(arm(ensemble_a), trials, stream_a, shards=shards, threads=threads)
    outcomes_b = monte_carlo(arm(ensemble_b), trials, stream_b, shards=shards, threads=threads)
    counts_a = np.bincount(outcomes_a, minlength=2**bits)
    counts_b = np.bincount(outcomes_b, minlength=2**bits)
    advantage = tv_distance(counts_a / trials, counts_b / trials)

    boot_a = _frequencies(stream_boot.multinomial(trials, counts_a / trials, size=BOOTSTRAP_RESAMPLES))
    boot_b = _frequencies(stream_boot.multinomial(trials, counts_b / trials, size=BOOTSTRAP_RESAMPLES))
    boot_tv = 0.5 * np.sum(np.abs(boot_a - boot_b), axis=-1)
    ci_low, ci_high = (float(x) for x in np.percentile(boot_tv, [2.5, 97.5]))
    null = _null_tv(counts_a, counts_b, BOOTSTRAP_RESAMPLES, stream_boot)
    null_mean, null_std = float(np.mean(null)), float(np.std(null))
    threshold = null_mean + NULL_SIGMAS * null_std
    passed = advantage <= threshold if expect == "indistinguishable" else ci_low > threshold

    accept_a = (outcomes_a != 0).astype(np.float64)
    accept_b = (outcomes_b != 0).astype(np.float64)
    p_a, se_a = mean_stderr(accept_a)
    p_b, se_b = mean_stderr(accept_b)
    return DistinguisherResult(
        statistic=f"circuit_tv[{postprocess}]",
        accept_prob_ensemble=p_a,
        stderr_ensemble=se_a,
        accept_prob_haar=p_b,
        stderr_haar=se_b,
        advantage=advantage,
        trials=trials,
        passed=passed,
        ci_low=ci_low,
        ci_high=ci_high,
        null_mean=null_mean,
        null_std=null_std,
        details={"mode": mode, "t": t, "outputs": watched, "outcome_bits": bits, "expect": expect},
        per_trial={"a.outcome": outcomes_a.astype(np.float64), "b.outcome": outcomes_b.astype(np.float64)},
    )


@dataclass(frozen=True)
class MarginalReport:
    """
    Largest total variation between the circuit's k-bit output marginals and the reference.

    The reference is uniform on uncorrupted wires times the sampled
    distribution of the corrupted wires under maximally mixed inputs.
    """

    k: int
    subsets_inspected: int
    max_tv: float
    ci_low: float
    ci_high: float
    null_mean: float
    null_std: float
    reference: str
    corrupted: list[int]
    worst_subset: list[int]
    trials: int
    reference_trials: int
    passed: bool

    def as_json_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "subsets_inspected": self.subsets_inspected,
            "max_tv": self.max_tv,
            "ci": [self.ci_low, self.ci_high],
            "null_mean": self.null_mean,
            "null_std": self.null_std,
            "reference": self.reference,
            "corrupted": self.corrupted,
            "worst_subset": self.worst_subset,
            "trials": self.trials,
            "reference_trials": self.reference_trials,
            "pass": self.passed,
        }


def _subset_counts(rows: npt.NDArray[np.uint8], subset: Sequence[int], weights: npt.NDArray | None = None):
    return np.bincount(gf2.bits_to_ints(rows[:, list(subset)]), weights=weights, minlength=2 ** len(subset))


def _reference_marginal(
    subset: Sequence[int], corrupted: set[int], reference_rows: npt.NDArray[np.uint8]
) -> npt.NDArray[np.float64]:
    """Uniform on the uncorrupted wires of ``subset`` times the sampled law of its corrupted wires."""
    k = len(subset)
    inside = [i for i, q in enumerate(subset) if q in corrupted]
    if not inside:
        return np.full(2**k, 2.0**-k)
    corrupted_law = _frequencies(_subset_counts(reference_rows, [subset[i] for i in inside]))
    patterns = gf2.ints_to_bits(np.arange(2**k), k)
    return corrupted_law[gf2.bits_to_ints(patterns[:, inside])] * 2.0 ** -(k - len(inside))


def kwise_marginal_check(
    c: LayeredCircuit,
    ensemble: StateEnsemble,
    t: int,
    k: int,
    subsets: int,
    trials: int,
    rng: np.random.Generator,
    *,
    outputs: Sequence[int] | None = None,
    reference_trials: int | None = None,
    shards: int = 1,
    threads: int | None = None,
) -> MarginalReport:
    """
    Compare k-bit output marginals under ``ensemble`` inputs with the uniform-times-corrupted reference.

    The circuit runs on t copies jointly; ``subsets`` k-subsets of the output
    wires are inspected. The corrupted set is the forward lightcone of the
    ancillae and its law is sampled with maximally mixed system inputs.
    """
    n = ensemble.num_qubits
    if c.num_system_qubits != t * n:
        msg = f"the circuit must act on t*n = {t * n} system qubits, got {c.num_system_qubits}"
        raise DomainError(msg)
    validate(c)
    wires = sorted(range(c.num_wires) if outputs is None else set(outputs))
    if not 1 <= k <= min(MAX_OUTPUT_BITS, len(wires)):
        msg = f"need 1 <= k <= {min(MAX_OUTPUT_BITS, len(wires))}, got k={k}"
        raise DomainError(msg)
    corrupted = forward_lightcone(c, c.ancilla_wires)
    reference_trials = REFERENCE_FACTOR * trials if reference_trials is None else reference_trials
    stream_subsets, stream_ensemble, stream_ref, stream_boot = rng.spawn(4)

    all_subsets = math.comb(len(wires), k)
    if all_subsets <= subsets:
        chosen = [list(s) for s in itertools.combinations(wires, k)]
    else:
        chosen = [sorted(stream_subsets.choice(wires, size=k, replace=False).tolist()) for _ in range(subsets)]

    def ensemble_draw(count: int, stream: np.random.Generator) -> npt.NDArray[np.uint8]:
        rows = []
        for _ in range(count):
            psi = ensemble.sample(stream)
            rows.append(gf2.ints_to_bits(sample_outcomes(apply(c, tensor_power(psi, t)), 1, stream), c.num_wires)[0])
        return np.array(rows, dtype=np.uint8).reshape(-1, c.num_wires)

    def mixed_draw(count: int, stream: np.random.Generator) -> npt.NDArray[np.uint8]:
        rows = []
        for _ in range(count):
            basis = np.zeros(2**c.num_system_qubits, dtype=np.complex128)
            basis[stream.integers(basis.size)] = 1.0
            out = apply(c, StateVector(c.num_system_qubits, basis))
            rows.append(gf2.ints_to_bits(sample_outcomes(out, 1, stream), c.num_wires)[0])
        return np.array(rows, dtype=np.uint8).reshape(-1, c.num_wires)

    sampled_rows = monte_carlo(ensemble_draw, trials, stream_ensemble, shards=shards, threads=threads)
    if corrupted:
        reference_rows = monte_carlo(mixed_draw, reference_trials, stream_ref, shards=shards, threads=threads)
    else:
        reference_rows, reference_trials = np.zeros((0, c.num_wires), dtype=np.uint8), 0
    references = [_reference_marginal(s, corrupted, reference_rows) for s in chosen]

    inspected = list(zip(chosen, references, strict=True))
    tvs = [tv_distance(_subset_counts(sampled_rows, s) / trials, ref) for s, ref in inspected]
    worst = int(np.argmax(tvs))

    # nonparametric bootstrap of the maximum over the inspected subsets
    weights = stream_boot.multinomial(trials, np.full(trials, 1.0 / trials), size=BOOTSTRAP_RESAMPLES)
    boot_max = np.array(
        [
            max(tv_distance(_subset_counts(sampled_rows, s, w) / trials, ref) for s, ref in inspected)
            for w in weights
        ]
    )
    ci_low, ci_high = (float(x) for x in np.percentile(boot_max, [2.5, 97.5]))

    # spread of the maximum when the outcomes follow the reference exactly
    effective = trials if not corrupted else trials * reference_trials // (trials + reference_trials)
    null_max = np.max(
        [
            0.5 * np.sum(
                np.abs(_frequencies(stream_boot.multinomial(effective, ref, size=BOOTSTRAP_RESAMPLES)) - ref), axis=-1
            )
            for ref in references
        ],
        axis=0,
    )
    null_mean, null_std = float(np.mean(null_max)), float(np.std(null_max))
    logger.info("k-wise marginals: max TV %.4f over %d subsets (null %.4f)", tvs[worst], len(chosen), null_mean)
    return MarginalReport(
        k=k,
        subsets_inspected=len(chosen),
        max_tv=tvs[worst],
        ci_low=ci_low,
        ci_high=ci_high,
        null_mean=null_mean,
        null_std=null_std,
        reference="uniform" if not corrupted else "uniform*corrupted",
        corrupted=sorted(corrupted),
        worst_subset=chosen[worst],
        trials=trials,
        reference_trials=reference_trials,
        passed=tvs[worst] <= null_mean + NULL_SIGMAS * null_std,
    )


def _apply_blockwise(amps: npt.NDArray[np.complex128], mat: npt.NDArray[np.complex128], t: int) -> npt.NDArray:
    """(U x ... x U) amps for t blocks."""
    dim = mat.shape[0]
    tensor = amps.reshape([dim] * t)
    for axis in range(t):
        tensor = np.moveaxis(np.tensordot(mat, tensor, axes=([1], [axis])), 0, axis)
    return tensor.reshape(-1)


def pru_parallel_game(
    n: int,
    t: int,
    pre: LayeredCircuit,
    unitaries: UnitaryEnsemble,
    k: int,
    trials: int,
    rng: np.random.Generator,
    *,
    subsets: int | Sequence[Sequence[int]] = DEFAULT_SUBSETS,
    within_block: bool = False,
    delta: float = 0.1,
    shards: int = 1,
    threads: int | None = None,
) -> BoundReport:
    """
    Apply a line circuit to |0...0> on t blocks of n qubits, then one sampled U to every block.

    Reports the raw trace distance of k-qubit marginals from I/2^k against
    (r+1) 2^(k-n/2), r being the recursive Schmidt rank of the pre-circuit
    state, plus the mean of ||rho_A - I/2^k||_2^2 and of the marginal purity.
    With ``within_block`` every inspected subset lies inside one block, where
    both are second moments of U. The worst subset is fixed once, as the one
    with the largest mean trace distance over all trials.
    """
    if unitaries.num_qubits != n or pre.num_system_qubits != t * n or pre.num_ancillae:
        msg = f"need a pre-circuit on t*n = {t * n} qubits without ancillae and unitaries on n={n} qubits"
        raise DomainError(msg)
    if pre.geometry is not Geometry.LINE or not validate(pre).geometry_ok:
        msg = "the pre-circuit must be line-local"
        raise DomainError(msg)
    if not 1 <= k <= (n if within_block else t * n):
        msg = f"subset size k={k} out of range"
        raise DomainError(msg)
    stream_subsets, stream_trials = rng.spawn(2)
    if isinstance(subsets, int):
        if within_block:
            chosen = []
            for _ in range(subsets):
                block = int(stream_subsets.integers(t))
                chosen.append(sorted((block * n + stream_subsets.choice(n, size=k, replace=False)).tolist()))
        else:
            chosen = [sorted(stream_subsets.choice(t * n, size=k, replace=False).tolist()) for _ in range(subsets)]
    else:
        chosen = [sorted(int(q) for q in s) for s in subsets]
        if any(len(s) != k or len(set(s)) != k or s[0] < 0 or s[-1] >= t * n for s in chosen):
            msg = f"every subset must hold {k} distinct qubits in [0, {t * n})"
            raise DomainError(msg)
    prepared = apply(pre, StateVector.basis("0" * (t * n)))
    tree = recursive_schmidt(prepared, n, t)
    mixed = np.eye(2**k) / 2**k
    m = len(chosen)

    def draw(count: int, stream: np.random.Generator) -> npt.NDArray[np.float64]:
        # per subset: trace norm, squared Hilbert-Schmidt distance, purity
        rows = np.empty((count, 3 * m))
        for i in range(count):
            state = StateVector(t * n, _apply_blockwise(prepared.amps, unitaries.sample(stream).mat, t))
            marginals = [copy_marginal(state, 1, tuple(s)) for s in chosen]
            rows[i, :m] = [np.sum(np.abs(np.linalg.eigvalsh(rho - mixed))) for rho in marginals]
            rows[i, m : 2 * m] = [np.linalg.norm(rho - mixed) ** 2 for rho in marginals]
            rows[i, 2 * m :] = [np.vdot(rho, rho).real for rho in marginals]
        return rows

    values = monte_carlo(draw, trials, stream_trials, shards=shards, threads=threads)
    norms, second, purities = values[:, :m], values[:, m : 2 * m].mean(axis=1), values[:, 2 * m :].mean(axis=1)
    worst = int(np.argmax(norms.mean(axis=0)))
    worst_mean, worst_stderr = mean_stderr(norms[:, worst])
    avg_mean, avg_stderr = mean_stderr(norms.mean(axis=1))
    second_mean, second_stderr = mean_stderr(second)
    purity_mean, purity_stderr = mean_stderr(purities)
    expectation_bound = (tree.r + 1) * 2.0 ** (k - n / 2)
    rank_bound = 4**pre.depth
    passed = tree.r <= rank_bound and avg_mean <= expectation_bound + PASS_SIGMAS * avg_stderr
    details: dict[str, Any] = {
        "r": tree.r,
        "rank_bound": rank_bound,
        "worst_subset": chosen[worst],
        "worst_trace_norm_mean": worst_mean,
        "worst_trace_norm_stderr": worst_stderr,
        "worst_trace_norm_quantiles": np.quantile(norms[:, worst], [0.5, 0.9, 0.99]).tolist(),
        "markov_bound": expectation_bound / delta,
        "delta": delta,
        "second_moment_mean": second_mean,
        "second_moment_stderr": second_stderr,
        "purity_mean": purity_mean,
        "purity_stderr": purity_stderr,
        "subsets": chosen,
        "within_block": within_block,
    }
    if all(s[0] // n == s[-1] // n for s in chosen):
        target = page_purity(n, k)
        details["purity_target"] = target
        if pre.depth == 0:
            passed = passed and within_sigmas(purity_mean, target, purity_stderr)
    return BoundReport(
        statistic="pru_trace_norm",
        measured=avg_mean,
        stderr=avg_stderr,
        passed=passed,
        bound=expectation_bound,
        details=details,
        per_trial={
            "worst_trace_norm": norms[:, worst],
            "mean_trace_norm": norms.mean(axis=1),
            "second_moment": second,
            "purity": purities,
        },
    )


@dataclass(frozen=True)
class EntanglementReport:
    """
    Mean entropy at every contiguous cut for phased subspace states and Haar states.

    A violation is a sampled subspace state whose entropy at some cut exceeds
    ``min(d, cut, n - cut)``. The Haar arm must also match the exact average
    entropy at the middle cut.
    """

    n: int
    d: int
    cuts: list[int]
    subspace_mean: list[float]
    subspace_stderr: list[float]
    haar_mean: list[float]
    haar_stderr: list[float]
    subspace_max: float
    violations: int
    samples: int
    per_trial: dict[str, npt.NDArray[np.float64]] = field(default_factory=dict, repr=False)

    @property
    def ceiling(self) -> float:
        return float(self.d)

    @property
    def middle(self) -> int:
        return len(self.cuts) // 2

    @property
    def haar_target(self) -> float:
        return page_entropy(self.n, self.cuts[self.middle])

    @property
    def haar_ok(self) -> bool:
        return within_sigmas(self.haar_mean[self.middle], self.haar_target, self.haar_stderr[self.middle])

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.haar_ok

    def as_json_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "d": self.d,
            "ceiling": self.ceiling,
            "cuts": self.cuts,
            "subspace_mean": self.subspace_mean,
            "subspace_stderr": self.subspace_stderr,
            "haar_mean": self.haar_mean,
            "haar_stderr": self.haar_stderr,
            "middle_cut": self.cuts[self.middle],
            "haar_target": self.haar_target,
            "subspace_max": self.subspace_max,
            "violations": self.violations,
            "samples": self.samples,
            "pass": self.passed,
        }


def pseudoentanglement_report(
    n: int,
    d: int,
    samples: int,
    rng: np.random.Generator,
    *,
    ensemble: PhasedSubspaceStates | None = None,
    shards: int = 1,
    threads: int | None = None,
) -> EntanglementReport:
    """Entropy at cuts 1..n-1 of k-wise phased subspace states (or ``ensemble``) next to Haar states."""
    if not 0 <= d <= n or n < 2:  # noqa: PLR2004
        msg = f"need n >= 2 and 0 <= d <= n, got n={n}, d={d}"
        raise DomainError(msg)
    ensemble = PhasedSubspaceStates(n=n, d=d) if ensemble is None else ensemble
    cuts = list(range(1, n))
    masks = [SubsystemMask.first(cut) for cut in cuts]

    def arm(source: StateEnsemble):
        def draw(count: int, stream: np.random.Generator) -> npt.NDArray[np.float64]:
            rows = []
            for _ in range(count):
                psi = source.sample(stream)
                rows.append([entanglement_entropy(psi, mask) for mask in masks])
            return np.array(rows, dtype=np.float64).reshape(-1, len(cuts))

        return draw

    stream_sub, stream_haar = rng.spawn(2)
    sub = monte_carlo(arm(ensemble), samples, stream_sub, shards=shards, threads=threads)
    haar = monte_carlo(arm(HaarStates(n=n)), samples, stream_haar, shards=shards, threads=threads)
    ceilings = np.array([min(ensemble.d, cut, n - cut) for cut in cuts], dtype=np.float64)
    violations = int(np.sum(np.any(sub > ceilings + SCHMIDT_CUTOFF, axis=1)))
    sub_stats = [mean_stderr(sub[:, i]) for i in range(len(cuts))]
    haar_stats = [mean_stderr(haar[:, i]) for i in range(len(cuts))]
    return EntanglementReport(
        n=n,
        d=ensemble.d,
        cuts=cuts,
        subspace_mean=[m for m, _ in sub_stats],
        subspace_stderr=[s for _, s in sub_stats],
        haar_mean=[m for m, _ in haar_stats],
        haar_stderr=[s for _, s in haar_stats],
        subspace_max=float(np.max(sub, initial=0.0)),
        violations=violations,
        samples=samples,
        per_trial={
            "subspace.max_entropy": np.max(sub, axis=1, initial=0.0),
            "haar.middle_entropy": haar[:, len(cuts) // 2],
        },
    )


@dataclass(frozen=True)
class ScalingPoint:
    d: int
    frame_potential: float
    frame_potential_stderr: float
    frobenius_distance: float
    frobenius_stderr: float
    bound: float


@dataclass(frozen=True)
class ScalingReport:
    """
    Frobenius distance between the t-th moments of phased subspace states and Haar states for several d.

    ``ratios[i]`` is the per-unit-of-d shrink factor between points i and i+1.
    A report passes when every distance is below its bound and every ratio is
    within PASS_SIGMAS standard errors of ``SHRINK_RANGE``.
    """

    n: int
    t: int
    pairs: int
    points: list[ScalingPoint]
    ratios: list[float]
    ratio_stderrs: list[float]

    def ratio_ok(self, i: int) -> bool:
        ratio, stderr = self.ratios[i], self.ratio_stderrs[i]
        if not (math.isfinite(ratio) and math.isfinite(stderr)):
            return False
        low, high = SHRINK_RANGE
        return ratio + PASS_SIGMAS * stderr >= low and ratio - PASS_SIGMAS * stderr <= high

    @property
    def passed(self) -> bool:
        distances_ok = all(p.frobenius_distance <= p.bound for p in self.points)
        return distances_ok and all(self.ratio_ok(i) for i in range(len(self.ratios)))

    def as_json_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "t": self.t,
            "pairs": self.pairs,
            "points": [vars(p) for p in self.points],
            "ratios": self.ratios,
            "ratio_stderrs": self.ratio_stderrs,
            "pass": self.passed,
        }


def design_scaling(
    n: int,
    d_values: Sequence[int],
    t: int,
    pairs: int,
    rng: np.random.Generator,
    *,
    ensemble_factory: type[PhasedSubspaceStates] = PhasedSubspaceStates,
    shards: int = 1,
    threads: int | None = None,
) -> ScalingReport:
    """Frame potential based moment distance per d, each against its explicit bound."""
    d_values = sorted(set(d_values))
    points = []
    for d, stream in zip(d_values, rng.spawn(len(d_values)), strict=True):
        bound = subspace_design_bound(n, d, t)
        estimate = frame_potential(ensemble_factory(n=n, d=d), t, pairs, stream, shards=shards, threads=threads)
        distance = estimate.frobenius_distance
        # delta method on sqrt(F - F_haar)
        distance_stderr = estimate.stderr / (2 * distance) if distance > 0 else math.inf
        points.append(
            ScalingPoint(
                d=d,
                frame_potential=estimate.mean,
                frame_potential_stderr=estimate.stderr,
                frobenius_distance=distance,
                frobenius_stderr=distance_stderr,
                bound=bound,
            )
        )
        logger.info("design scaling n=%d d=%d: distance %.3e, bound %.3e", n, d, distance, bound)
    ratios, ratio_stderrs = [], []
    for a, b in itertools.pairwise(points):
        if b.frobenius_distance <= 0 or a.frobenius_distance <= 0:
            ratios.append(math.inf)
            ratio_stderrs.append(math.inf)
            continue
        ratio = (a.frobenius_distance / b.frobenius_distance) ** (1 / (b.d - a.d))
        # delta method on the log of the ratio
        relative = math.hypot(a.frobenius_stderr / a.frobenius_distance, b.frobenius_stderr / b.frobenius_distance)
        ratios.append(ratio)
        ratio_stderrs.append(ratio * relative / (b.d - a.d))
    return ScalingReport(n=n, t=t, pairs=pairs, points=points, ratios=ratios, ratio_stderrs=ratio_stderrs)
