"""Counter-based random streams keyed by ``(seed, label, sample_index)``.

Sample ``i`` of a stream always reads the same Philox counter blocks, so the
values do not depend on how samples are chunked or which worker draws them.
"""
from __future__ import annotations

import numpy as np

_BLOCK = 4  # doubles per Philox counter increment


def stream_key(seed: int, *labels: int) -> np.ndarray:
    return np.random.SeedSequence([int(seed), *map(int, labels)]).generate_state(2, np.uint64)


def uniform_rows(seed: int, labels: tuple[int, ...], start: int, count: int, width: int) -> np.ndarray:
    """Rows ``start .. start+count-1`` of a ``(*, width)`` uniform ``[0, 1)`` stream."""
    blocks = max(1, -(-width // _BLOCK))
    bitgen = np.random.Philox(key=stream_key(seed, *labels), counter=start * blocks)
    rows = np.random.Generator(bitgen).random((count, blocks * _BLOCK))
    return rows[:, :width]
