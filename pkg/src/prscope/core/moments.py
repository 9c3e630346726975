"""
Moment operators, frame potentials and the closed-form expectations they are checked against.

All Monte Carlo checks report a plug-in standard error and pass when the
measured mean lies within ``PASS_SIGMAS`` standard errors of its target.
"""

from __future__ import annotations

import functools
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
import numpy.typing as npt
from scipy import special

from prscope.core import gf2
from prscope.core._sampling import mean_stderr, monte_carlo
from prscope.core.errors import DomainError, ResourceError
from prscope.core.statevec import (
    SubsystemMask,
    partial_trace,
    purity,
    schatten_norm,
    tensor_power,
)

if TYPE_CHECKING:
    from prscope.core.ensembles import StateEnsemble, UnitaryEnsemble
    from prscope.core.statevec import StateVector

logger = logging.getLogger(__name__)

MOMENT_CAP_QUBITS = 12  # t * n for dense moment operators
MAX_MOMENT_ORDER = 3
MIN_PAIRS = 1000
PASS_SIGMAS = 5.0
EXACT_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class MomentOperator:
    """
    t-th moment E[|psi><psi|^(x)t] on t copies of n qubits; ``sample_count`` 0 marks an exact average.
    """

    n: int
    t: int
    mat: npt.NDArray[np.complex128] = field(repr=False)
    sample_count: int = 0

    def __post_init__(self):
        dim = 2 ** (self.n * self.t)
        if self.mat.shape != (dim, dim):
            msg = f"moment of order {self.t} on {self.n} qubits needs shape {(dim, dim)}, got {self.mat.shape}"
            raise DomainError(msg)
        if abs(np.trace(self.mat) - 1.0) > EXACT_TOLERANCE:
            msg = f"moment operator trace is {np.trace(self.mat).real!r}, expected 1"
            raise DomainError(msg)
        if np.max(np.abs(self.mat - self.mat.conj().T), initial=0.0) > EXACT_TOLERANCE:
            msg = "moment operator is not Hermitian"
            raise DomainError(msg)


@dataclass(frozen=True)
class FramePotentialEstimate:
    """Mean of |<psi|psi'>|^(2t) over pairs; ``stderr`` is 0 for exact averages."""

    n: int
    t: int
    mean: float
    stderr: float
    pairs: int

    @property
    def excess(self) -> float:
        """F_t - F_t(Haar), which equals the squared Frobenius distance to the Haar moment."""
        return self.mean - haar_frame_potential(self.n, self.t)

    @property
    def frobenius_distance(self) -> float:
        return math.sqrt(max(self.excess, 0.0))

    @property
    def passed(self) -> bool:
        """Frame potentials are minimized by Haar states."""
        return self.excess >= -3 * self.stderr - EXACT_TOLERANCE

    def as_json_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "mean": self.mean,
            "stderr": self.stderr,
            "pairs": self.pairs,
            "haar": haar_frame_potential(self.n, self.t),
            "frobenius_distance": self.frobenius_distance,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class BoundReport:
    """Measured quantity next to its analytic target and bound."""

    statistic: str
    measured: float
    stderr: float
    passed: bool
    target: float | None = None
    bound: float | None = None
    details: dict[str, Any] = field(default_factory=dict)
    # per-trial values keyed "statistic" or "arm.statistic", for CSV output only
    per_trial: dict[str, npt.NDArray[np.float64]] = field(default_factory=dict, repr=False)

    def as_json_dict(self) -> dict[str, Any]:
        return {
            "statistic": self.statistic,
            "target": self.target,
            "measured": self.measured,
            "stderr": self.stderr,
            "bound": self.bound,
            "pass": self.passed,
            "details": self.details,
        }


def within_sigmas(measured: float, target: float, stderr: float, sigmas: float = PASS_SIGMAS) -> bool:
    return abs(measured - target) <= max(sigmas * stderr, EXACT_TOLERANCE)


def _check_moment_size(n: int, t: int) -> None:
    if not 1 <= t <= MAX_MOMENT_ORDER:
        msg = f"dense moments are implemented for 1 <= t <= {MAX_MOMENT_ORDER}, got t={t}"
        raise DomainError(msg)
    if n * t > MOMENT_CAP_QUBITS:
        msg = f"a moment on t*n = {n * t} qubits exceeds the cap of {MOMENT_CAP_QUBITS}"
        raise ResourceError(msg)


def _copy_permutation(dim: int, perm: tuple[int, ...]) -> npt.NDArray[np.float64]:
    """Operator permuting t tensor factors of dimension ``dim``."""
    t = len(perm)
    eye = np.eye(dim**t).reshape([dim] * t + [dim**t])
    return eye.transpose([*perm, t]).reshape(dim**t, dim**t)


def symmetric_projector(dim: int, t: int) -> npt.NDArray[np.float64]:
    """
    Projector onto the symmetric subspace of (C^dim)^(x)t, averaged over the t! copy permutations.

    >>> round(float(np.trace(symmetric_projector(2, 2))), 9)
    3.0
    """
    perms = list(itertools.permutations(range(t)))
    return sum(_copy_permutation(dim, perm) for perm in perms) / len(perms)


def haar_moment(n: int, t: int) -> MomentOperator:
    """
    Exact Haar moment, the normalized symmetric projector.

    >>> np.allclose(haar_moment(1, 1).mat, np.eye(2) / 2)
    True
    """
    _check_moment_size(n, t)
    dim = 2**n
    proj = symmetric_projector(dim, t)
    return MomentOperator(n, t, (proj / math.comb(dim + t - 1, t)).astype(np.complex128))


def _outer_power(psi: StateVector, t: int) -> npt.NDArray[np.complex128]:
    vec = tensor_power(psi, t).amps
    return np.outer(vec, vec.conj())


def empirical_moment(
    ensemble: StateEnsemble,
    t: int,
    samples: int,
    rng: np.random.Generator,
    *,
    shards: int = 1,
    threads: int | None = None,
) -> MomentOperator:
    """
    Average of |psi><psi|^(x)t, exact over the members of enumerable ensembles.
    """
    n = ensemble.num_qubits
    _check_moment_size(n, t)
    if (members := ensemble.exact_states()) is not None:
        logger.info("averaging the order %d moment exactly over %d states", t, len(members))
        return MomentOperator(n, t, sum(_outer_power(psi, t) for psi in members) / len(members))

    def draw(count: int, stream: np.random.Generator) -> npt.NDArray[np.complex128]:
        acc = np.zeros((2 ** (n * t),) * 2, dtype=np.complex128)
        for _ in range(count):
            acc += _outer_power(ensemble.sample(stream), t)
        return acc[np.newaxis]

    total = monte_carlo(draw, samples, rng, shards=shards, threads=threads).sum(axis=0)
    return MomentOperator(n, t, total / samples, sample_count=samples)


def moment_distance(a: MomentOperator, b: MomentOperator, p: float = 1) -> float:
    """
    Raw Schatten p distance between two moments.

    >>> zero = MomentOperator(1, 1, np.diag([1.0, 0.0]).astype(complex))
    >>> moment_distance(zero, haar_moment(1, 1), 1)
    1.0
    """
    if (a.n, a.t) != (b.n, b.t):
        msg = f"moments of shape (n={a.n}, t={a.t}) and (n={b.n}, t={b.t}) are not comparable"
        raise DomainError(msg)
    if p not in (1, 2):
        msg = f"moment distance is defined for p in {{1, 2}}, got {p}"
        raise DomainError(msg)
    return schatten_norm(a.mat - b.mat, p)


def moment_distance_check(
    ensemble: StateEnsemble,
    t: int,
    samples: int,
    rng: np.random.Generator,
    *,
    shards: int = 1,
    threads: int | None = None,
) -> BoundReport:
    """
    Raw trace distance between the t-th moment of ``ensemble`` and the Haar moment.

    Exact averages must vanish up to ``EXACT_TOLERANCE``. Sampled moments are
    compared with the distance reached by the same number of Haar samples,
    and pass within three times that noise floor.
    """
    from prscope.core.ensembles import HaarStates

    n = ensemble.num_qubits
    stream_ensemble, stream_haar = rng.spawn(2)
    moment = empirical_moment(ensemble, t, samples, stream_ensemble, shards=shards, threads=threads)
    haar = haar_moment(n, t)
    distance = moment_distance(moment, haar, 1)
    details: dict[str, Any] = {
        "n": n,
        "t": t,
        "exact": moment.sample_count == 0,
        "samples": moment.sample_count,
        "frobenius": moment_distance(moment, haar, 2),
    }
    if moment.sample_count == 0:
        bound = EXACT_TOLERANCE
    else:
        noise = empirical_moment(HaarStates(n=n), t, samples, stream_haar, shards=shards, threads=threads)
        details["haar_noise_floor"] = moment_distance(noise, haar, 1)
        bound = 3 * details["haar_noise_floor"]
    return BoundReport(
        statistic="moment_trace_distance",
        measured=distance,
        stderr=0.0,
        passed=distance <= bound,
        target=0.0,
        bound=bound,
        details=details,
    )


def haar_frame_potential(n: int, t: int) -> float:
    """
    >>> haar_frame_potential(2, 2)
    0.1
    """
    return 1.0 / math.comb(2**n + t - 1, t)


def frame_potential(
    ensemble: StateEnsemble,
    t: int,
    pairs: int,
    rng: np.random.Generator,
    *,
    shards: int = 1,
    threads: int | None = None,
) -> FramePotentialEstimate:
    """
    E |<psi|psi'>|^(2t) over independent pairs.

    Enumerable ensembles are averaged over all ordered pairs of members.
    """
    n = ensemble.num_qubits
    if (members := ensemble.exact_states()) is not None:
        vectors = np.array([psi.amps for psi in members])
        overlaps = np.abs(vectors.conj() @ vectors.T) ** (2 * t)
        return FramePotentialEstimate(n, t, float(np.mean(overlaps)), 0.0, len(members) ** 2)
    if pairs < MIN_PAIRS:
        msg = f"frame potential estimates need at least {MIN_PAIRS} pairs, got {pairs}"
        raise DomainError(msg)

    def draw(count: int, stream: np.random.Generator) -> npt.NDArray[np.float64]:
        return np.array(
            [abs(ensemble.sample(stream).overlap(ensemble.sample(stream))) ** (2 * t) for _ in range(count)]
        )

    values = monte_carlo(draw, pairs, rng, shards=shards, threads=threads)
    mean, stderr = mean_stderr(values)
    return FramePotentialEstimate(n, t, mean, stderr, pairs)


def page_purity(n: int, k: int) -> float:
    """
    Haar average purity of a k-qubit marginal.

    >>> page_purity(2, 1)
    0.8
    """
    return (2**k + 2 ** (n - k)) / (2**n + 1)


def page_entropy(n: int, k: int) -> float:
    """
    Haar average entanglement entropy in bits across a cut of k and n - k qubits.

    >>> round(page_entropy(10, 5), 2)
    4.28
    >>> page_entropy(4, 0)
    0.0
    """
    small, large = sorted((2**k, 2 ** (n - k)))
    nats = special.digamma(small * large + 1) - special.digamma(large + 1) - (small - 1) / (2 * large)
    return float(nats) / math.log(2)


def purity_expectation_check(
    n: int,
    k: int,
    ensemble: StateEnsemble,
    samples: int,
    rng: np.random.Generator,
    *,
    shards: int = 1,
    threads: int | None = None,
) -> BoundReport:
    """Mean purity of the marginal on the first k qubits against the Haar value."""
    if not 0 <= k <= n or ensemble.num_qubits != n:
        msg = f"need 0 <= k <= n and an ensemble on n={n} qubits, got k={k} on {ensemble.num_qubits}"
        raise DomainError(msg)
    mask = SubsystemMask.first(k)

    def draw(count: int, stream: np.random.Generator) -> npt.NDArray[np.float64]:
        return np.array([purity(partial_trace(ensemble.sample(stream), mask)) for _ in range(count)])

    values = monte_carlo(draw, samples, rng, shards=shards, threads=threads)
    mean, stderr = mean_stderr(values)
    target = page_purity(n, k)
    return BoundReport(
        statistic="purity",
        measured=mean,
        stderr=stderr,
        passed=within_sigmas(mean, target, stderr),
        target=target,
        details={"n": n, "k": k, "samples": samples},
        per_trial={"purity": values},
    )


def _offdiag_norm(vectors: npt.NDArray[np.complex128], k: int) -> float:
    """||Tr_B(|a><b|)||_2^2 for the two columns a, b, B being all but the first k qubits."""
    a = vectors[:, 0].reshape(2**k, -1)
    b = vectors[:, 1].reshape(2**k, -1)
    return float(np.linalg.norm(a @ b.conj().T) ** 2)


def offdiag_value(n: int, k: int) -> float:
    """
    >>> offdiag_value(4, 2)
    0.2
    """
    return (2**k - 1) / (2**n - 1)


def offdiag_check(
    n: int,
    k: int,
    unitary_ensemble: UnitaryEnsemble,
    samples: int,
    rng: np.random.Generator,
    *,
    v: npt.ArrayLike | None = None,
    w: npt.ArrayLike | None = None,
    shards: int = 1,
    threads: int | None = None,
) -> BoundReport:
    """
    E ||Tr_B(U|v><w|U^dagger)||_2^2 for orthonormal v, w; defaults |0...0> and |0...01>.
    """
    if not 0 <= k <= n or unitary_ensemble.num_qubits != n:
        msg = f"need 0 <= k <= n and an ensemble on n={n} qubits, got k={k} on {unitary_ensemble.num_qubits}"
        raise DomainError(msg)
    dim = 2**n
    pair = np.zeros((dim, 2), dtype=np.complex128)
    if v is None and w is None:
        pair[0, 0] = pair[1, 1] = 1.0
    else:
        pair[:, 0], pair[:, 1] = np.asarray(v), np.asarray(w)
    if not np.allclose(pair.conj().T @ pair, np.eye(2), atol=1e-10):
        msg = "v and w must be orthonormal"
        raise DomainError(msg)

    def draw(count: int, stream: np.random.Generator) -> npt.NDArray[np.float64]:
        return np.array([_offdiag_norm(unitary_ensemble.images(pair, stream), k) for _ in range(count)])

    values = monte_carlo(draw, samples, rng, shards=shards, threads=threads)
    mean, stderr = mean_stderr(values)
    target = offdiag_value(n, k)
    bound = 2.0 ** (k - n)
    return BoundReport(
        statistic="offdiag_frobenius_sq",
        measured=mean,
        stderr=stderr,
        passed=within_sigmas(mean, target, stderr) and mean < bound,
        target=target,
        bound=bound,
        details={"n": n, "k": k, "samples": samples},
        per_trial={"offdiag_frobenius_sq": values},
    )


def subspace_design_bound(n: int, d: int, t: int) -> float:
    """
    Explicit distance bound between the t-th moments of phased subspace states and Haar states.

    >>> round(subspace_design_bound(10, 5, 2), 5)
    0.38672
    """
    if not t < d < n:
        msg = f"the design bound needs t < d < n, got t={t}, d={d}, n={n}"
        raise DomainError(msg)
    return 2 * t**2 * 2.0**-d + 2.0 ** (t - d) + 2.0 ** (t - n) + 2 * t**2 * 2.0**-n


def expected_mixedness_bound(n: int, k: int) -> float:
    """
    Upper bound on E ||rho_A - I/2^k||_1 for a Haar state, via Cauchy-Schwarz on the exact second moment.

    >>> expected_mixedness_bound(10, 1) <= 2.0 ** (1 - 5)
    True
    """
    return 2 ** (k / 2) * math.sqrt((2**k - 2.0**-k) / (2**n + 1))


def _marginal(psi: StateVector, local: tuple[int, ...], cache: dict) -> npt.NDArray[np.complex128]:
    if local not in cache:
        cache[local] = partial_trace(psi, SubsystemMask(local)).mat
    return cache[local]


def copy_marginal(
    psi: StateVector, t: int, subset: tuple[int, ...], cache: dict | None = None
) -> npt.NDArray[np.complex128]:
    """
    Marginal of psi^(x)t on ``subset``, a product of single copy marginals.

    ``cache`` may be shared across subsets of the same ``psi``.
    """
    n = psi.num_qubits
    cache = {} if cache is None else cache
    out = np.ones((1, 1), dtype=np.complex128)
    for copy, group in itertools.groupby(sorted(subset), key=lambda q: q // n):
        if copy >= t:
            msg = f"qubit {copy * n} is outside {t} copies of {n} qubits"
            raise DomainError(msg)
        out = np.kron(out, _marginal(psi, tuple(q - copy * n for q in group), cache))
    return out


def mixedness_probability(
    ensemble: StateEnsemble,
    t: int,
    k: int,
    delta: float,
    samples: int,
    rng: np.random.Generator,
    *,
    shards: int = 1,
    threads: int | None = None,
) -> BoundReport:
    """
    Probability that every k-qubit marginal of psi^(x)t is delta-close to I/2^k in raw trace norm.

    Alongside the probability the report carries the mean of
    ||rho_A - I/2^k||_2^2 over all subsets, which exact 2-designs reproduce,
    and the Markov plus union failure bound.
    """
    n = ensemble.num_qubits
    total = t * n
    if not 1 <= k <= total:
        msg = f"need 1 <= k <= t*n = {total}, got k={k}"
        raise DomainError(msg)
    subsets = list(itertools.combinations(range(total), k))
    mixed = np.eye(2**k) / 2**k

    def draw(count: int, stream: np.random.Generator) -> npt.NDArray[np.float64]:
        rows = []
        for _ in range(count):
            psi, cache = ensemble.sample(stream), {}
            worst, second = 0.0, 0.0
            for subset in subsets:
                diff = copy_marginal(psi, t, subset, cache) - mixed
                worst = max(worst, float(np.sum(np.abs(np.linalg.eigvalsh(diff)))))
                second += float(np.linalg.norm(diff) ** 2)
            rows.append((worst <= delta, second / len(subsets)))
        return np.array(rows, dtype=np.float64).reshape(-1, 2)

    values = monte_carlo(draw, samples, rng, shards=shards, threads=threads)
    probability, prob_stderr = mean_stderr(values[:, 0])
    second_mean, second_stderr = mean_stderr(values[:, 1])
    failure_bound = len(subsets) * expected_mixedness_bound(n, k) / delta if k <= n else math.inf
    details: dict[str, Any] = {
        "subsets": len(subsets),
        "expected_mixedness_bound": expected_mixedness_bound(n, k) if k <= n else None,
        "failure_bound": min(failure_bound, 1.0),
        "bound_vacuous": failure_bound >= 1.0,
        "second_moment_mean": second_mean,
        "second_moment_stderr": second_stderr,
    }
    if t == 1:
        details["second_moment_haar"] = page_purity(n, k) - 2.0**-k
    return BoundReport(
        statistic="mixedness_probability",
        measured=probability,
        stderr=prob_stderr,
        passed=1.0 - probability <= min(failure_bound, 1.0) + PASS_SIGMAS * prob_stderr,
        bound=min(failure_bound, 1.0),
        details=details,
        per_trial={"mixed_within_delta": values[:, 0], "second_moment": values[:, 1]},
    )


def phase_averaged_moment(s: gf2.Subspace, t: int) -> MomentOperator:
    """
    Exact t-th moment of phased states on a fixed subspace with uniformly random signs.

    An entry is 2^(-dt) when every element of its row and column index tuples
    occurs an even number of times in total, and 0 otherwise. The same
    operator describes any 2t-wise independent signs.
    """
    _check_moment_size(s.ambient_dim, t)
    elements = [int(x) for x in gf2.bits_to_ints(s.enumerate())]
    tuples = list(itertools.product(elements, repeat=t))
    dim = 2**s.ambient_dim
    mat = np.zeros((dim**t, dim**t), dtype=np.complex128)
    weight = 2.0 ** (-s.dim * t)
    index = {tup: functools.reduce(lambda acc, x: acc * dim + x, tup, 0) for tup in tuples}
    for row, col in itertools.product(tuples, repeat=2):
        if all(count % 2 == 0 for count in Counter(row + col).values()):
            mat[index[row], index[col]] = weight
    return MomentOperator(s.ambient_dim, t, mat)


def distinct_symmetric_moment(elements: npt.ArrayLike, t: int) -> MomentOperator:
    """
    Uniform average of |Sym_X><Sym_X| over t-subsets X of the given bit strings.

    >>> m = distinct_symmetric_moment([[0], [1]], 2)
    >>> m.mat.real[1:3, 1:3]
    array([[0.5, 0.5],
           [0.5, 0.5]])
    """
    rows = np.atleast_2d(np.asarray(elements, dtype=np.uint8))
    n = rows.shape[1]
    _check_moment_size(n, t)
    ints = [int(x) for x in gf2.bits_to_ints(rows)]
    if len(set(ints)) != len(ints) or len(ints) < t:
        msg = f"need at least t={t} distinct strings, got {len(ints)} ({len(set(ints))} distinct)"
        raise DomainError(msg)
    dim = 2**n
    mat = np.zeros((dim**t, dim**t), dtype=np.complex128)
    for subset in itertools.combinations(ints, t):
        sym = np.zeros(dim**t)
        for perm in itertools.permutations(subset):
            sym[functools.reduce(lambda acc, x: acc * dim + x, perm, 0)] = 1.0
        sym /= np.linalg.norm(sym)
        mat += np.outer(sym, sym)
    return MomentOperator(n, t, mat / math.comb(len(ints), t))


def distinct_fraction(d: int, t: int) -> float:
    """
    Probability that t uniform draws from 2^d elements are pairwise distinct.

    >>> distinct_fraction(2, 2)
    0.75
    """
    return math.factorial(t) * math.comb(2**d, t) / 2 ** (d * t)


def haar_distinct_weight(n: int, t: int) -> float:
    """
    Weight of the distinct index part of the Haar moment.

    >>> round(haar_distinct_weight(1, 2), 9)
    0.333333333
    """
    return math.comb(2**n, t) / math.comb(2**n + t - 1, t)


def dependence_probability_bound(d: int, t: int) -> float:
    """
    Union bound on the probability that t uniform elements of F2^d are linearly dependent.

    >>> dependence_probability_bound(3, 2)
    0.375
    """
    return sum(2.0 ** -(d - i) for i in range(t))
