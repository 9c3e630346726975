"""
Linear algebra over F2 and GF(2^m), random subspaces and k-wise independent bit families.

Bit vectors are plain ``numpy.uint8`` arrays of zeros and ones. Whenever a bit
vector is read as an integer, bit 0 is the most significant one, which is the
same convention the state vectors use for qubit 0.
"""

from __future__ import annotations

import functools
import itertools
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Self, TypeAlias

import galois
import numpy as np
import numpy.typing as npt

from prscope.core.errors import DimensionError, DomainError, ResourceError

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

logger = logging.getLogger(__name__)

BitVector: TypeAlias = npt.NDArray[np.uint8]

ENUMERATION_CAP = 20  # largest subspace dimension we are willing to list
EXHAUSTIVE_AMBIENT_CAP = 5  # largest ambient dimension for all_subspaces
SEED_ENUMERATION_CAP = 20  # log2 of the largest seed space kwise_verify enumerates


def bits(text: str) -> BitVector:
    """
    Build a bit vector from a string of zeros and ones.

    >>> bits("0110")
    array([0, 1, 1, 0], dtype=uint8)
    """
    if set(text) - {"0", "1"}:
        msg = f"expected a string of 0 and 1, got {text!r}"
        raise DomainError(msg)
    return np.fromiter((int(char) for char in text), dtype=np.uint8, count=len(text))


def to_int(vector: Sequence[int] | BitVector) -> int:
    """
    Read a bit vector as an integer, bit 0 being the most significant.

    >>> to_int(bits("110"))
    6
    """
    return int("".join(str(int(bit)) for bit in vector) or "0", 2)


def from_int(value: int, n: int) -> BitVector:
    """
    >>> from_int(6, 4)
    array([0, 1, 1, 0], dtype=uint8)
    """
    if not 0 <= value < 2**n:
        msg = f"{value} does not fit into {n} bits"
        raise DomainError(msg)
    return ints_to_bits(np.array([value]), n)[0]


def ints_to_bits(values: npt.ArrayLike, n: int) -> npt.NDArray[np.uint8]:
    """Vectorized :func:`from_int`, one row per value."""
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((np.asarray(values, dtype=np.int64)[:, np.newaxis] >> shifts) & 1).astype(np.uint8)


def bits_to_ints(rows: npt.ArrayLike) -> npt.NDArray[np.int64]:
    """Vectorized :func:`to_int` over the rows of a bit matrix."""
    matrix = np.asarray(rows, dtype=np.int64)
    weights = np.int64(1) << np.arange(matrix.shape[-1] - 1, -1, -1, dtype=np.int64)
    return matrix @ weights


def _as_matrix(rows: Iterable[Sequence[int]] | npt.ArrayLike) -> npt.NDArray[np.uint8]:
    if isinstance(rows, np.ndarray) and rows.ndim == 2:  # noqa: PLR2004
        matrix = rows
    else:
        rows = [np.asarray(row) for row in rows]
        if len({row.shape for row in rows}) > 1:
            lengths = sorted({len(row) for row in rows})
            msg = f"all rows must share one ambient length, got lengths {lengths}"
            raise DimensionError(msg)
        matrix = np.array(rows).reshape(len(rows), -1) if rows else np.zeros((0, 0))
    if matrix.size and (matrix.min() < 0 or matrix.max() > 1):
        msg = "bit matrices may only contain 0 and 1"
        raise DomainError(msg)
    return matrix.astype(np.uint8)


def _row_reduce(matrix: npt.NDArray[np.uint8]) -> npt.NDArray[np.uint8]:
    """Reduced row echelon form with the zero rows removed."""
    if matrix.shape[0] == 0:
        return matrix.astype(np.uint8)
    reduced = galois.GF2(matrix).row_reduce().view(np.ndarray).astype(np.uint8)
    return reduced[reduced.any(axis=1)]


def rank(rows: Iterable[Sequence[int]] | npt.ArrayLike) -> int:
    """
    F2 rank of a list of bit vectors.

    >>> rank([bits("110"), bits("011"), bits("101")])
    2
    >>> rank([])
    0
    """
    matrix = _as_matrix(rows)
    if matrix.size == 0:
        return 0
    return int(np.linalg.matrix_rank(galois.GF2(matrix)))


def is_dependent(vectors: Iterable[Sequence[int]] | npt.ArrayLike) -> bool:
    """
    True iff the vectors are linearly dependent over F2.

    >>> is_dependent([bits("100"), bits("010"), bits("001")])
    False
    >>> is_dependent([bits("100"), bits("000")])
    True
    """
    matrix = _as_matrix(vectors)
    if matrix.shape[0] == 0:
        msg = "dependence of an empty list is undefined"
        raise DomainError(msg)
    return rank(matrix) < matrix.shape[0]


@dataclass(frozen=True, eq=False)
class Subspace:
    """
    An F2-linear subspace of {0,1}^n held by its reduced row echelon basis.

    The basis handed to the constructor is row reduced on the way in, so two
    instances compare equal iff they describe the same subspace.

    >>> Subspace(3, [bits("011"), bits("110")]).basis
    array([[1, 0, 1],
           [0, 1, 1]], dtype=uint8)
    >>> Subspace(3, [bits("011"), bits("110")]) == Subspace(3, [bits("101"), bits("011")])
    True
    """

    ambient_dim: int
    basis: npt.NDArray[np.uint8]

    def __post_init__(self):
        if self.ambient_dim < 0:
            msg = f"ambient dimension must be non negative, got {self.ambient_dim}"
            raise DomainError(msg)
        matrix = _as_matrix(self.basis)
        if matrix.shape[0] == 0:
            matrix = np.zeros((0, self.ambient_dim), dtype=np.uint8)
        if matrix.shape[1] != self.ambient_dim:
            msg = f"basis rows have length {matrix.shape[1]}, expected {self.ambient_dim}"
            raise DimensionError(msg)
        reduced = _row_reduce(matrix)
        if reduced.shape[0] != matrix.shape[0]:
            msg = "basis rows are linearly dependent"
            raise DomainError(msg)
        reduced.setflags(write=False)
        object.__setattr__(self, "basis", reduced)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and np.array_equal(self.basis, other.basis)

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.basis.shape, self.basis.tobytes()))

    def enumerate(self) -> npt.NDArray[np.uint8]:
        """
        All 2^dim elements, one per row.

        Row ``c`` is the combination of basis rows selected by the bits of
        ``c`` (most significant bit for basis row 0), so the row index is
        also the coordinate of the element in this basis.

        >>> Subspace(3, [bits("110"), bits("011")]).enumerate()
        array([[0, 0, 0],
               [0, 1, 1],
               [1, 0, 1],
               [1, 1, 0]], dtype=uint8)
        """
        if self.dim > ENUMERATION_CAP:
            msg = f"refusing to enumerate 2^{self.dim} elements (cap is 2^{ENUMERATION_CAP})"
            raise ResourceError(msg)
        coordinates = ints_to_bits(np.arange(2**self.dim), self.dim)
        return ((coordinates.astype(np.int64) @ self.basis.astype(np.int64)) % 2).astype(np.uint8)

    def contains(self, vector: Sequence[int] | BitVector) -> bool:
        vector = np.asarray(vector, dtype=np.uint8)
        if vector.shape != (self.ambient_dim,):
            msg = f"vector of length {vector.shape[-1]} in a subspace of {{0,1}}^{self.ambient_dim}"
            raise DimensionError(msg)
        return rank(np.vstack([self.basis, vector])) == self.dim

    def to_hex(self) -> list[str]:
        """
        Basis rows as zero padded hex strings.

        >>> Subspace(6, [bits("100001")]).to_hex()
        ['21']
        """
        width = max(1, math.ceil(self.ambient_dim / 4))
        return [format(to_int(row), f"0{width}x") for row in self.basis]

    @classmethod
    def from_hex(cls, rows: Iterable[str], ambient_dim: int) -> Self:
        return cls(ambient_dim, [from_int(int(row, 16), ambient_dim) for row in rows])


def sample_subspace(n: int, d: int, rng: np.random.Generator) -> Subspace:
    """Uniformly random d-dimensional subspace of F2^n by rejection of rank deficient matrices."""
    if not 0 <= d <= n:
        msg = f"subspace dimension must satisfy 0 <= d <= n, got d={d}, n={n}"
        raise DomainError(msg)
    if d == 0:
        return Subspace(n, np.zeros((0, n), dtype=np.uint8))
    attempts = 1
    while rank(candidate := rng.integers(0, 2, size=(d, n), dtype=np.uint8)) < d:
        attempts += 1
    if attempts > 1:
        logger.debug("sampled a %d-dimensional subspace of F2^%d after %d draws", d, n, attempts)
    return Subspace(n, candidate)


def all_subspaces(n: int, d: int) -> list[Subspace]:
    """
    Every d-dimensional subspace of F2^n, in a fixed order.

    >>> len(all_subspaces(3, 2)), len(all_subspaces(4, 2))
    (7, 35)
    """
    if not 0 <= d <= n:
        msg = f"subspace dimension must satisfy 0 <= d <= n, got d={d}, n={n}"
        raise DomainError(msg)
    if n > EXHAUSTIVE_AMBIENT_CAP:
        msg = f"exhaustive subspace listing is capped at n={EXHAUSTIVE_AMBIENT_CAP}, got n={n}"
        raise ResourceError(msg)
    found: dict[Subspace, None] = {}
    nonzero = ints_to_bits(np.arange(1, 2**n), n)
    for rows in itertools.combinations(nonzero, d):
        matrix = np.array(rows, dtype=np.uint8).reshape(d, n)
        if rank(matrix) == d:
            found.setdefault(Subspace(n, matrix))
    return list(found)


@functools.cache
def gf(m: int) -> type[galois.FieldArray]:
    """GF(2^m) with the lexicographically first irreducible modulus."""
    if m < 1:
        msg = f"field degree must be at least 1, got {m}"
        raise DomainError(msg)
    if m == 1:
        return galois.GF2
    return galois.GF(2**m, irreducible_poly=galois.irreducible_poly(2, m, method="min"))


@dataclass(frozen=True)
class FieldElement:
    """
    Element of GF(2^m); ``value`` packs the polynomial coefficients, bit i holding the x^i coefficient.

    >>> FieldElement(2, 0b10).coeffs
    (0, 1)
    """

    m: int
    value: int

    def __post_init__(self):
        if self.m < 1 or not 0 <= self.value < 2**self.m:
            msg = f"{self.value} is not an element of GF(2^{self.m})"
            raise DomainError(msg)

    @property
    def coeffs(self) -> tuple[int, ...]:
        return tuple((self.value >> i) & 1 for i in range(self.m))

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[int]) -> Self:
        return cls(len(coeffs), sum(int(c) << i for i, c in enumerate(coeffs)))


def field_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    """
    Product in GF(2^m).

    >>> field_mul(FieldElement(2, 0b10), FieldElement(2, 0b10))
    FieldElement(m=2, value=3)
    """
    if a.m != b.m:
        msg = f"cannot multiply elements of GF(2^{a.m}) and GF(2^{b.m})"
        raise DomainError(msg)
    field = gf(a.m)
    return FieldElement(a.m, int(field(a.value) * field(b.value)))


def _horner_bits(seeds: npt.ArrayLike, inputs: npt.ArrayLike, m: int) -> npt.NDArray[np.uint8]:
    """Least significant coefficient of every seed polynomial at every input, shape (seeds, inputs)."""
    field = gf(m)
    coeffs = field(np.atleast_2d(np.asarray(seeds, dtype=np.int64)))
    points = field(np.asarray(inputs, dtype=np.int64))[np.newaxis, :]
    acc = field.Zeros((coeffs.shape[0], points.shape[1]))
    for j in range(coeffs.shape[1]):
        acc = acc * points + coeffs[:, j : j + 1]
    return (acc.view(np.ndarray) & 1).astype(np.uint8)


@dataclass(frozen=True)
class KWiseFamily:
    """
    Polynomial hash x -> lsb(P(x)) with P of degree < k over GF(2^m).

    ``seed`` lists the k coefficients from the highest degree down to the
    constant term.
    """

    m: int
    k: int
    seed: tuple[int, ...]

    def __post_init__(self):
        if self.k < 2:  # noqa: PLR2004
            msg = f"independence order must be at least 2, got {self.k}"
            raise DomainError(msg)
        if len(self.seed) != self.k:
            msg = f"a {self.k}-wise family needs {self.k} seed coefficients, got {len(self.seed)}"
            raise DomainError(msg)
        for coeff in self.seed:
            FieldElement(self.m, coeff)

    @classmethod
    def sample(cls, m: int, k: int, rng: np.random.Generator) -> Self:
        return cls(m=m, k=k, seed=tuple(int(c) for c in rng.integers(0, 2**m, size=k)))

    def evaluate_ints(self, inputs: npt.ArrayLike) -> npt.NDArray[np.uint8]:
        """Output bits for inputs given as integers in [0, 2^m)."""
        return _horner_bits([self.seed], inputs, self.m)[0]


def kwise_eval(fam: KWiseFamily, x: Sequence[int] | BitVector) -> int:
    """
    >>> kwise_eval(KWiseFamily(2, 4, (3, 0, 0, 0)), bits("10"))
    1
    """
    if len(x) != fam.m:
        msg = f"family takes {fam.m}-bit inputs, got {len(x)} bits"
        raise DomainError(msg)
    return int(fam.evaluate_ints([to_int(x)])[0])


def kwise_independence_counts(m: int, k: int, inputs: Sequence[int]) -> npt.NDArray[np.int64]:
    """
    Joint output pattern counts at the given inputs over all (2^m)^k seeds.

    Pattern index j counts seeds whose outputs, read in input order with the
    first input as most significant bit, spell j.

    >>> kwise_independence_counts(2, 4, [0, 1, 2, 3]).tolist() == [16] * 16
    True
    """
    if len(set(inputs)) != len(inputs):
        msg = f"inputs must be distinct, got {list(inputs)}"
        raise DomainError(msg)
    if any(not 0 <= x < 2**m for x in inputs):
        msg = f"inputs must lie in [0, 2^{m})"
        raise DomainError(msg)
    seeds = np.array(list(itertools.product(range(2**m), repeat=k)), dtype=np.int64)
    patterns = bits_to_ints(_horner_bits(seeds, inputs, m))
    return np.bincount(patterns, minlength=2 ** len(inputs))


@dataclass(frozen=True)
class IndependenceReport:
    """Seed-enumerated pattern counts at several input k-subsets; exact k-wise independence makes them all equal."""

    m: int
    k: int
    subsets: list[list[int]]
    expected: int
    min_count: int
    max_count: int

    @property
    def passed(self) -> bool:
        return self.min_count == self.max_count == self.expected

    def as_json_dict(self) -> dict[str, int | bool | list[list[int]]]:
        return {
            "m": self.m,
            "k": self.k,
            "subsets": self.subsets,
            "expected": self.expected,
            "min_count": self.min_count,
            "max_count": self.max_count,
            "pass": self.passed,
        }


def kwise_verify(m: int, k: int, subsets: int, rng: np.random.Generator) -> IndependenceReport:
    """
    Enumerate every seed of the m-bit, k-wise family at ``subsets`` random input k-subsets.

    All k-subsets are used when there are no more than ``subsets`` of them.

    >>> kwise_verify(2, 4, 50, np.random.default_rng(0)).passed
    True
    """
    if not 1 <= k <= 2**m:
        msg = f"need 1 <= k <= 2^m, got k={k} for m={m}"
        raise DomainError(msg)
    if m * k > SEED_ENUMERATION_CAP:
        msg = f"enumerating (2^{m})^{k} seeds exceeds the cap of 2^{SEED_ENUMERATION_CAP}"
        raise ResourceError(msg)
    if math.comb(2**m, k) <= subsets:
        chosen = [list(s) for s in itertools.combinations(range(2**m), k)]
    else:
        chosen = [sorted(rng.choice(2**m, size=k, replace=False).tolist()) for _ in range(subsets)]
    counts = np.array([kwise_independence_counts(m, k, s) for s in chosen])
    logger.info("enumerated %d seeds at %d input subsets", 2 ** (m * k), len(chosen))
    return IndependenceReport(
        m=m,
        k=k,
        subsets=chosen,
        expected=2 ** ((m - 1) * k),
        min_count=int(counts.min()),
        max_count=int(counts.max()),
    )
