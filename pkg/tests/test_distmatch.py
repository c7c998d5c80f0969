"""Distribution matcher unit tests.

Exhaustive checks run at n=10 where the whole code image fits in memory;
longer blocks are covered by randomized round-trips.  Reference values come
from independent enumeration oracles computed inline where cheap.
"""

import itertools
import math

import numpy as np
import pytest

from pasfiber.distmatch import (
    AmplitudeAlphabet,
    CodewordError,
    Composition,
    ccdm_decode,
    ccdm_encode,
    draw_emulated,
    input_length,
    quantize_composition,
    rate_loss,
    run_length_stats,
)

ALPHABET_64 = AmplitudeAlphabet(levels=(1, 3, 5, 7), probs=(0.4, 0.3, 0.2, 0.1))
ALPHABET_16 = AmplitudeAlphabet(levels=(1, 3), probs=(0.7, 0.3))


def _exhaustive_quantize(probs, n):
    """Brute-force divergence minimizer with lexicographic tie-break."""

    def divergence(counts):
        d = 0.0
        for c, q in zip(counts, probs):
            if c and q == 0:
                return math.inf
            if c:
                d += (c / n) * math.log2((c / n) / q)
        return d

    cands = [c for c in itertools.product(range(n + 1), repeat=len(probs)) if sum(c) == n]
    # Round so that permutation-symmetric candidates tie exactly despite
    # float summation order, then break ties lexicographically.
    return min(cands, key=lambda c: (round(divergence(c), 12), c))


def _lex_codewords(counts):
    """All arrangements of the multiset, lexicographically sorted."""
    pool = [level for level, c in enumerate(counts) for _ in range(c)]
    return sorted(set(itertools.permutations(pool)))


class TestAlphabet:
    def test_entropy_values(self):
        assert ALPHABET_64.entropy == pytest.approx(1.84644, abs=5e-6)
        assert ALPHABET_16.entropy == pytest.approx(0.88129, abs=5e-6)

    def test_validation(self):
        with pytest.raises(ValueError):
            AmplitudeAlphabet(levels=(3, 1), probs=(0.5, 0.5))
        with pytest.raises(ValueError):
            AmplitudeAlphabet(levels=(-1, 3), probs=(0.5, 0.5))
        with pytest.raises(ValueError):
            AmplitudeAlphabet(levels=(1, 3), probs=(0.6, 0.3))


class TestQuantize:
    def test_known_example(self):
        assert quantize_composition([0.7, 0.3], 5).counts == (3, 2)

    def test_exact_multiples(self):
        assert quantize_composition([0.4, 0.3, 0.2, 0.1], 10).counts == (4, 3, 2, 1)
        assert quantize_composition([0.7, 0.3], 10).counts == (7, 3)
        assert quantize_composition([0.4, 0.3, 0.2, 0.1], 500).counts == (200, 150, 100, 50)

    def test_matches_exhaustive_oracle(self):
        cases = [
            ([0.7, 0.3], 5),
            ([0.4, 0.3, 0.2, 0.1], 5),
            ([0.4, 0.3, 0.2, 0.1], 7),
            ([0.25, 0.25, 0.25, 0.25], 5),
            ([0.5, 0.25, 0.25], 4),
            ([0.61, 0.29, 0.1], 6),
            ([0.9, 0.1], 3),
        ]
        for probs, n in cases:
            got = quantize_composition(probs, n).counts
            want = _exhaustive_quantize(probs, n)
            assert got == want, f"probs={probs} n={n}: {got} != {want}"

    def test_zero_prob_levels_stay_empty(self):
        comp = quantize_composition([0.5, 0.0, 0.5], 8)
        assert comp.counts[1] == 0
        assert comp.n == 8

    def test_errors(self):
        with pytest.raises(ValueError):
            quantize_composition([0.4, 0.3, 0.2, 0.1], 3)  # fewer symbols than levels
        with pytest.raises(ValueError):
            quantize_composition([0.7, 0.4], 10)
        with pytest.raises(ValueError):
            quantize_composition([0.7, 0.3], 0)


class TestInputLength:
    def test_paper_compositions(self):
        # 10!/(4!3!2!1!) = 12600 arrangements -> 13 bits
        assert input_length(Composition((4, 3, 2, 1))) == 13
        # C(10,3) = 120 arrangements -> 6 bits
        assert input_length(Composition((7, 3))) == 6

    def test_degenerate_composition(self):
        assert input_length(Composition((5,))) == 0


class TestCodec:
    def test_lexicographic_order_against_enumeration(self):
        for counts in [(2, 1), (1, 2), (2, 2), (3, 2, 1), (1, 1, 1), (4, 2), (2, 2, 2)]:
            comp = Composition(counts)
            k = input_length(comp)
            codewords = _lex_codewords(counts)
            for index in range(1 << k):
                bits = np.array(
                    [(index >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8
                )
                word = ccdm_encode(bits, comp)
                assert tuple(word.tolist()) == codewords[index]

    def test_exhaustive_roundtrip_n10_64qam(self):
        comp = Composition((4, 3, 2, 1))
        k = input_length(comp)
        seen = set()
        for index in range(1 << k):
            bits = np.array([(index >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8)
            word = ccdm_encode(bits, comp)
            hist = np.bincount(word, minlength=4)
            assert tuple(hist.tolist()) == comp.counts
            seen.add(tuple(word.tolist()))
            assert np.array_equal(ccdm_decode(word, comp), bits)
        assert len(seen) == 1 << k  # injective

    def test_exhaustive_roundtrip_n10_16qam(self):
        comp = Composition((7, 3))
        k = input_length(comp)
        for index in range(1 << k):
            bits = np.array([(index >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8)
            assert np.array_equal(ccdm_decode(ccdm_encode(bits, comp), comp), bits)

    @pytest.mark.parametrize("n", [100, 1000, 5000])
    def test_random_roundtrip_long_blocks(self, n):
        comp = quantize_composition(ALPHABET_64.probs, n)
        k = input_length(comp)
        rng = np.random.default_rng(1234 + n)
        for _ in range(3):
            bits = rng.integers(0, 2, size=k).astype(np.uint8)
            word = ccdm_encode(bits, comp)
            assert np.bincount(word, minlength=4).tolist() == list(comp.counts)
            assert np.array_equal(ccdm_decode(word, comp), bits)

    def test_payload_length_errors(self):
        comp = Composition((4, 3, 2, 1))
        with pytest.raises(ValueError):
            ccdm_encode(np.zeros(12, dtype=np.uint8), comp)
        with pytest.raises(ValueError):
            ccdm_encode(np.full(13, 2, dtype=np.uint8), comp)

    def test_zero_payload_composition(self):
        comp = Composition((5,))
        word = ccdm_encode(np.zeros(0, dtype=np.uint8), comp)
        assert np.array_equal(word, np.zeros(5, dtype=np.int8))
        assert ccdm_decode(word, comp).size == 0

    def test_decode_rejects_wrong_histogram(self):
        comp = Composition((4, 3, 2, 1))
        with pytest.raises(CodewordError):
            ccdm_decode(np.zeros(10, dtype=np.int8), comp)
        with pytest.raises(CodewordError):
            ccdm_decode(np.zeros(9, dtype=np.int8), comp)

    def test_decode_rejects_rank_outside_image(self):
        # Lexicographically largest arrangement has rank 12599 >= 2**13.
        comp = Composition((4, 3, 2, 1))
        word = np.array([3, 2, 2, 1, 1, 1, 0, 0, 0, 0], dtype=np.int8)
        with pytest.raises(CodewordError):
            ccdm_decode(word, comp)


class TestRateLoss:
    def test_value_at_n10(self):
        assert rate_loss(ALPHABET_64, 10) == pytest.approx(0.54644, abs=5e-6)
        assert rate_loss(ALPHABET_16, 10) == pytest.approx(0.28129, abs=5e-6)

    def test_strictly_decreasing_over_sweep(self):
        sweep = [10, 20, 50, 100, 200, 500, 1000, 2000, 5000]
        for alphabet in (ALPHABET_64, ALPHABET_16):
            losses = [rate_loss(alphabet, n) for n in sweep]
            assert all(b < a for a, b in zip(losses, losses[1:])), losses
            assert all(v > 0 for v in losses)

    def test_long_block_value(self):
        # 648000 arrangements of (2000,1500,1000,500)... frozen from the
        # exact multinomial: k = floor(log2) gives 0.00364 b/amp at n=5000.
        assert rate_loss(ALPHABET_64, 5000) == pytest.approx(0.00364, abs=5e-6)


class TestEmulation:
    def test_deterministic(self):
        a = draw_emulated(ALPHABET_64, 1000, seed=7)
        b = draw_emulated(ALPHABET_64, 1000, seed=7)
        assert np.array_equal(a, b)
        c = draw_emulated(ALPHABET_64, 1000, seed=8)
        assert not np.array_equal(a, c)

    def test_frequencies_within_multinomial_bounds(self):
        count = 1_000_000
        draws = draw_emulated(ALPHABET_64, count, seed=99)
        hist = np.bincount(draws, minlength=4)
        for level, p in enumerate(ALPHABET_64.probs):
            sigma = math.sqrt(count * p * (1 - p))
            assert abs(hist[level] - count * p) < 3 * sigma


class TestRunLengths:
    def test_hand_built_sequence(self):
        seq = np.array([0, 0, 0, 1, 1, 0, 2, 2, 2, 2])
        stats = run_length_stats(seq, num_levels=3, window=5)
        assert stats.max_run.tolist() == [3, 2, 4]
        assert stats.window_counts.tolist() == [[3, 2, 0], [1, 0, 4]]

    def test_window_must_divide(self):
        with pytest.raises(ValueError):
            run_length_stats(np.zeros(10, dtype=int), 2, window=3)

    def test_concatenated_blocks_bound_runs(self):
        # A run of one level can span at most a block suffix plus the next
        # block's prefix, so it never exceeds twice that level's count.
        comp = Composition((4, 3, 2, 1))
        k = input_length(comp)
        rng = np.random.default_rng(2024)
        blocks = [
            ccdm_encode(rng.integers(0, 2, size=k).astype(np.uint8), comp)
            for _ in range(1000)
        ]
        seq = np.concatenate(blocks)
        stats = run_length_stats(seq, num_levels=4, window=10)
        for level, c in enumerate(comp.counts):
            assert stats.max_run[level] <= 2 * c
        # Aligned windows reproduce the composition exactly.
        assert np.all(stats.window_counts == np.array(comp.counts))
