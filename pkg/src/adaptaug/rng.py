"""Deterministic random streams with keyed substream derivation.

Python's built-in ``hash`` is salted per process and ``random.Random`` state
is interpreter-specific, so every stochastic choice in this package goes
through the SplitMix64 generator below.  The full wire-level contract
(constants, derivation chain, draw encodings) is written down in
``docs/FORMATS.md``; any implementation that follows it reproduces our
streams bit for bit.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX_MUL1 = 0xBF58476D1CE4E5B9
_MIX_MUL2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijection with strong avalanche."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_MUL1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_MUL2) & _MASK64
    return z ^ (z >> 31)


def absorb(h: int, word: int) -> int:
    """Fold one non-negative integer into a running 64-bit key.

    Injective in ``word`` for a fixed ``h`` (and vice versa), so two keys
    that differ in a single absorbed word can never collide.
    """
    if word < 0:
        raise ValueError("absorbed words must be non-negative")
    return mix64((h + _GAMMA + word) & _MASK64)


def derive_stream_seed(master_seed: int, *words: int) -> int:
    """Chain-absorb ``words`` into ``master_seed``, yielding a stream seed."""
    h = master_seed & _MASK64
    for w in words:
        h = absorb(h, w)
    return h


class Stream:
    """SplitMix64 sequence generator.

    One instance is one substream; instances never share state.  All draw
    methods consume exactly one 64-bit word so that stream positions stay
    aligned across implementations.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return mix64(self._state)

    def next_float(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits of one word."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randint_below(self, n: int) -> int:
        """Uniform integer in [0, n) via floor(u * n / 2^64); n >= 1.

        Always consumes one word, even for n == 1.  The multiply-shift
        reduction is exactly portable (no rejection loop) and its bias is
        at most n / 2^64, irrelevant at the range sizes used here.
        """
        if n < 1:
            raise ValueError(f"randint_below needs n >= 1, got {n}")
        return (self.next_u64() * n) >> 64

    def split(self, tag: int) -> "Stream":
        """Child stream keyed by ``tag``, independent of draw position.

        Splitting derives from the current state but does not consume a
        word from this stream.
        """
        return Stream(absorb(self._state, tag))


def derive_sample_stream(master_seed: int, epoch: int, batch_index: int,
                         sample_index: int) -> Stream:
    """The per-sample stream used by the augmentation engine.

    Seed = absorb chain of (epoch, batch_index, sample_index) into
    master_seed.  Distinct tuples give statistically independent streams;
    tuples differing in the last absorbed word provably never collide.
    """
    if epoch < 0 or batch_index < 0 or sample_index < 0:
        raise ValueError("stream derivation indices must be non-negative")
    return Stream(derive_stream_seed(master_seed, epoch, batch_index, sample_index))
