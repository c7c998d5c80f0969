"""Binary-reflected Gray labeling for square QAM, one ASK rail per dimension.

The per-dimension label has the sign bit in the MSB position; the remaining
bits address the magnitude and are identical for +a and -a, which is what
lets a distribution matcher set magnitudes while sign bits stay uniform.
"""

from __future__ import annotations

import math

import numpy as np


def _gray(i: int) -> int:
    return i ^ (i >> 1)


class GrayLabeling:
    """Precomputed bit tables for one square QAM order.

    Attributes
    ----------
    bits_per_symbol : int
        Bits per 2D symbol (4 for 16QAM, 6 for 64QAM).
    amp_bit_width : int
        Magnitude bits per real dimension.
    num_amplitudes : int
        Positive levels per dimension (2 for 16QAM, 4 for 64QAM).
    ask_levels : ndarray
        All 2L signed levels in ascending order, odd integers.
    ask_bits : ndarray, shape (2L, 1 + amp_bit_width)
        Per-level label, MSB (sign) first; 1 means positive.
    amp_bits : ndarray, shape (L, amp_bit_width)
        Magnitude label for amplitude index j (level 2j + 1).
    """

    def __init__(self, qam_order: int):
        m = math.log2(qam_order)
        if qam_order < 16 or m != int(m) or int(m) % 2:
            raise ValueError("qam_order must be a square power of two, at least 16")
        self.qam_order = qam_order
        self.bits_per_symbol = int(m)
        self.amp_bit_width = (self.bits_per_symbol - 2) // 2
        self.num_amplitudes = 1 << self.amp_bit_width

        width = self.amp_bit_width + 1
        num_ask = 2 * self.num_amplitudes
        self.ask_levels = np.arange(-(num_ask - 1), num_ask, 2, dtype=np.int64)
        self.ask_bits = np.array(
            [[(_gray(i) >> (width - 1 - b)) & 1 for b in range(width)] for i in range(num_ask)],
            dtype=np.uint8,
        )
        # Positive half of the rail, sign bit stripped.
        self.amp_bits = self.ask_bits[self.num_amplitudes :, 1:].copy()
        weights = 1 << np.arange(self.amp_bit_width - 1, -1, -1)
        self.amp_index_from_bits = np.empty(self.num_amplitudes, dtype=np.int64)
        for j in range(self.num_amplitudes):
            self.amp_index_from_bits[int(self.amp_bits[j] @ weights)] = j
        self._weights = weights

    def pack_amp_bits(self, bits: np.ndarray) -> np.ndarray:
        """Magnitude bit groups (..., amp_bit_width) -> amplitude indices."""
        return self.amp_index_from_bits[bits @ self._weights]

    def ask_index(self, sign_bits: np.ndarray, amp_indices: np.ndarray) -> np.ndarray:
        """Compose rail indices from sign bits (1 = positive) and magnitudes."""
        L = self.num_amplitudes
        return np.where(sign_bits == 1, L + amp_indices, L - 1 - amp_indices)

    def split_ask_index(self, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Rail indices -> (sign bits, amplitude indices)."""
        L = self.num_amplitudes
        positive = indices >= L
        amp = np.where(positive, indices - L, L - 1 - indices)
        return positive.astype(np.uint8), amp
