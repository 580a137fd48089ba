"""Stream derivation and draw primitives.

The generator is SplitMix64, so the first test pins our output to the
published reference vectors; everything else would be portable across any
correct implementation of the documented contract.
"""

import pytest

from adaptaug import Stream, derive_sample_stream, derive_stream_seed
from adaptaug.rng import absorb, mix64

# First five outputs of the reference SplitMix64 for seed 0.
SEED0_VECTORS = [
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
    0xF88BB8A8724C81EC,
    0x1B39896A51A8749B,
]


class TestGenerator:
    def test_reference_vectors_seed_zero(self):
        s = Stream(0)
        assert [s.next_u64() for _ in range(5)] == SEED0_VECTORS

    def test_determinism(self):
        a = Stream(123456789)
        b = Stream(123456789)
        assert [a.next_u64() for _ in range(50)] == [b.next_u64() for _ in range(50)]

    def test_distinct_seeds_diverge(self):
        assert Stream(1).next_u64() != Stream(2).next_u64()

    def test_next_float_unit_interval(self):
        s = Stream(77)
        vals = [s.next_float() for _ in range(5000)]
        assert all(0.0 <= v < 1.0 for v in vals)
        # 53-bit mantissa: every value is a multiple of 2**-53
        assert all((v * 2.0**53) == int(v * 2.0**53) for v in vals[:200])
        mean = sum(vals) / len(vals)
        assert abs(mean - 0.5) < 0.02

    def test_next_float_matches_top_bits(self):
        a, b = Stream(99), Stream(99)
        for _ in range(100):
            assert a.next_float() == (b.next_u64() >> 11) * 2.0**-53

    def test_randint_below_bounds_and_coverage(self):
        s = Stream(5)
        seen = set()
        for _ in range(2000):
            v = s.randint_below(7)
            assert 0 <= v < 7
            seen.add(v)
        assert seen == set(range(7))

    def test_randint_below_one_always_zero_but_consumes(self):
        a, b = Stream(42), Stream(42)
        assert a.randint_below(1) == 0
        b.next_u64()
        # both streams advanced by exactly one word
        assert a.next_u64() == b.next_u64()

    def test_randint_below_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Stream(0).randint_below(0)


class TestDerivation:
    def test_same_tuple_same_stream(self):
        a = derive_sample_stream(9, 3, 1, 4)
        b = derive_sample_stream(9, 3, 1, 4)
        assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]

    def test_adjacent_tuples_never_collide(self):
        """Final-word injectivity: 1e5 adjacent sample indices, 0 collisions."""
        seen = set()
        for i in range(100_000):
            seen.add(derive_stream_seed(0, 1, 2, i))
        assert len(seen) == 100_000

    def test_each_coordinate_matters(self):
        base = derive_stream_seed(10, 5, 6, 7)
        assert derive_stream_seed(11, 5, 6, 7) != base
        assert derive_stream_seed(10, 4, 6, 7) != base
        assert derive_stream_seed(10, 5, 7, 7) != base
        assert derive_stream_seed(10, 5, 6, 8) != base

    def test_negative_words_rejected(self):
        with pytest.raises(ValueError):
            absorb(0, -1)
        with pytest.raises(ValueError):
            derive_sample_stream(0, -1, 0, 0)

    def test_mix64_is_bijection_sample(self):
        outs = {mix64(i) for i in range(4096)}
        assert len(outs) == 4096

    def test_split_does_not_advance_parent(self):
        a, b = Stream(31), Stream(31)
        child = a.split(1)
        assert isinstance(child, Stream)
        assert a.next_u64() == b.next_u64()
        assert child.next_u64() != b.next_u64()
