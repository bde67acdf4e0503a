"""
Frame plan: the symbols of every block of one frame and where the pilots sit.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np


def traversal_flag(block: int) -> int:
    """Blocks alternate direction, starting upward in each frame."""
    return 1 if block % 2 == 0 else -1


def traversal_events(blocks: int, carriers: int) -> List[Tuple[int, int]]:
    """(block, carrier) detection events in zigzag order; anchors excluded."""
    events = []
    for block in range(blocks):
        if traversal_flag(block) == 1:
            events.extend((block, k) for k in range(1, carriers))
        else:
            events.extend((block, k) for k in range(carriers - 2, -1, -1))
    return events


@dataclass(frozen=True, eq=False)
class FramePlan:
    """Original symbols b, encoded symbols d and pilot layout of one frame.

    `data_indices[n]` holds the K-1 constellation indices of block n and
    `encoded[n]` the K differentially encoded symbols with d_0 = a_0.
    """
    data_indices: np.ndarray
    symbols: np.ndarray
    encoded: np.ndarray
    pilot_count: int
    pilot_positions: Tuple[Tuple[int, int], ...]

    @property
    def blocks_per_frame(self) -> int:
        return int(self.encoded.shape[0])

    @property
    def carriers(self) -> int:
        return int(self.encoded.shape[1])

    def reference_symbols(self, block: int) -> np.ndarray:
        """What a perfect detector outputs at each carrier of `block`.

        Upward traversal detects d_k/d_{k-1} = b_k; downward detects
        d_k/d_{k+1} = conj(b_{k+1}). The anchor carrier holds NaN.
        """
        d = self.encoded[block]
        reference = np.full(self.carriers, np.nan + 0j, dtype=np.complex128)
        if traversal_flag(block) == 1:
            reference[1:] = d[1:] * np.conj(d[:-1])
        else:
            reference[:-1] = d[:-1] * np.conj(d[1:])
        return reference

    def pilot_mask(self, block: int) -> np.ndarray:
        mask = np.zeros(self.carriers, dtype=bool)
        for pilot_block, k in self.pilot_positions:
            if pilot_block == block:
                mask[k] = True
        return mask
