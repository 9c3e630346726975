import numpy as np
import pytest

from prscope.core import gf2
from prscope.core.errors import DimensionError, DomainError, ResourceError


def test_bit_conversions():
    assert gf2.to_int(gf2.bits("1011")) == 11
    assert gf2.from_int(11, 4).tolist() == [1, 0, 1, 1]
    assert gf2.bits_to_ints(gf2.ints_to_bits(np.arange(8), 3)).tolist() == list(range(8))
    with pytest.raises(DomainError):
        gf2.bits("012")
    with pytest.raises(DomainError):
        gf2.from_int(16, 4)


def test_rank_and_dependence():
    assert gf2.rank([gf2.bits("110"), gf2.bits("011"), gf2.bits("101")]) == 2
    assert gf2.is_dependent([gf2.bits("110"), gf2.bits("011"), gf2.bits("101")])
    assert not gf2.is_dependent([gf2.bits("100"), gf2.bits("010")])
    # more vectors than the ambient dimension are always dependent
    assert gf2.is_dependent([gf2.bits("10"), gf2.bits("01"), gf2.bits("11")])
    with pytest.raises(DomainError):
        gf2.is_dependent([])


def test_subspace_canonical_form():
    a = gf2.Subspace(4, [gf2.bits("1100"), gf2.bits("0110")])
    b = gf2.Subspace(4, [gf2.bits("1010"), gf2.bits("0110")])
    assert a == b
    assert hash(a) == hash(b)
    assert a.dim == 2
    assert a.contains(gf2.bits("1010"))
    assert not a.contains(gf2.bits("0001"))
    assert gf2.Subspace.from_hex(a.to_hex(), 4) == a


def test_subspace_rejects_bad_bases():
    with pytest.raises(DomainError):
        gf2.Subspace(3, [gf2.bits("110"), gf2.bits("110")])
    with pytest.raises(DimensionError):
        gf2.Subspace(3, [gf2.bits("11")])
    with pytest.raises(DimensionError):
        gf2.Subspace(3, [gf2.bits("110")]).contains(gf2.bits("11"))


def test_enumerate_is_closed_under_addition():
    s = gf2.Subspace(5, [gf2.bits("10011"), gf2.bits("01010"), gf2.bits("00111")])
    elements = s.enumerate()
    assert elements.shape == (8, 5)
    assert len({gf2.to_int(x) for x in elements}) == 8
    ints = set(gf2.bits_to_ints(elements).tolist())
    assert {x ^ y for x in ints for y in ints} == ints


def test_trivial_subspace():
    s = gf2.Subspace(3, np.zeros((0, 3), dtype=np.uint8))
    assert s.dim == 0
    assert s.enumerate().tolist() == [[0, 0, 0]]


@pytest.mark.parametrize(("n", "d"), [(4, 0), (4, 2), (6, 6), (10, 3)])
def test_sample_subspace_dimension(n, d, rng):
    s = gf2.sample_subspace(n, d, rng)
    assert s.ambient_dim == n
    assert s.dim == d


def test_sample_subspace_domain(rng):
    with pytest.raises(DomainError):
        gf2.sample_subspace(3, 4, rng)


def test_sample_subspace_is_uniform(rng):
    # F2^3 has 7 one-dimensional subspaces
    samples = 100_000
    counts: dict[gf2.Subspace, int] = {}
    for _ in range(samples):
        s = gf2.sample_subspace(3, 1, rng)
        counts[s] = counts.get(s, 0) + 1
    assert len(counts) == 7
    freqs = np.array(list(counts.values())) / samples
    assert np.all(np.abs(freqs - 1 / 7) <= 5 * np.sqrt(1 / 7 * 6 / 7 / samples))


def test_all_subspaces_gaussian_binomial():
    assert len(gf2.all_subspaces(4, 1)) == 15
    assert len(gf2.all_subspaces(4, 2)) == 35
    assert len(gf2.all_subspaces(5, 0)) == 1
    with pytest.raises(ResourceError):
        gf2.all_subspaces(6, 2)


def test_field_arithmetic():
    # x^2 + x + 1 is the modulus of GF(4): x * x = x + 1
    assert gf2.field_mul(gf2.FieldElement(2, 2), gf2.FieldElement(2, 2)).value == 3
    assert gf2.field_mul(gf2.FieldElement(3, 1), gf2.FieldElement(3, 5)).value == 5
    with pytest.raises(DomainError):
        gf2.field_mul(gf2.FieldElement(2, 1), gf2.FieldElement(3, 1))
    with pytest.raises(DomainError):
        gf2.FieldElement(2, 4)


def test_kwise_family_constant_polynomial():
    fam = gf2.KWiseFamily(3, 2, (0, 1))
    assert fam.evaluate_ints(np.arange(8)).tolist() == [1] * 8
    assert gf2.kwise_eval(fam, gf2.bits("101")) == 1
    with pytest.raises(DomainError):
        gf2.kwise_eval(fam, gf2.bits("10"))


def test_kwise_family_validation(rng):
    with pytest.raises(DomainError):
        gf2.KWiseFamily(3, 1, (0,))
    with pytest.raises(DomainError):
        gf2.KWiseFamily(3, 2, (0, 1, 2))
    fam = gf2.KWiseFamily.sample(4, 4, rng)
    assert len(fam.seed) == 4
    assert all(0 <= c < 16 for c in fam.seed)


@pytest.mark.parametrize(
    ("m", "k", "inputs"), [(2, 2, [1, 3]), (3, 2, [0, 7]), (3, 3, [1, 2, 6]), (3, 4, [0, 1, 5, 7])]
)
def test_kwise_independence_counts_are_uniform(m, k, inputs):
    counts = gf2.kwise_independence_counts(m, k, inputs)
    assert counts.sum() == 2 ** (m * k)
    assert set(counts.tolist()) == {2 ** (m * k - len(inputs))}


def test_kwise_independence_counts_inputs():
    with pytest.raises(DomainError):
        gf2.kwise_independence_counts(2, 2, [1, 1])
    with pytest.raises(DomainError):
        gf2.kwise_independence_counts(2, 2, [0, 4])


def test_kwise_verify_exhaustive_subsets(rng):
    report = gf2.kwise_verify(2, 4, 50, rng)
    assert report.subsets == [[0, 1, 2, 3]]
    assert report.expected == report.min_count == report.max_count == 16
    assert report.passed
    assert report.as_json_dict()["pass"] is True


def test_kwise_verify_sampled_subsets(rng):
    report = gf2.kwise_verify(4, 4, 10, rng)
    assert len(report.subsets) == 10
    assert all(len(set(s)) == 4 for s in report.subsets)
    assert report.passed


def test_kwise_verify_limits(rng):
    with pytest.raises(DomainError):
        gf2.kwise_verify(2, 5, 10, rng)
    with pytest.raises(ResourceError):
        gf2.kwise_verify(6, 4, 10, rng)
