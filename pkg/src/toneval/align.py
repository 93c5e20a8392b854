"""Dynamic time warping between cepstral sequences.

Local distance is Euclidean over coefficients 1..K-1 (c0 carries energy and
is excluded). Steps are (+1,0), (0,+1), (+1,+1) from (0,0) to the final
frame pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import MfccMatrix

__all__ = ["AlignmentPath", "dtw_align", "local_distances", "path_cost"]


@dataclass(frozen=True)
class AlignmentPath:
    pairs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)


def local_distances(ref: MfccMatrix, syn: MfccMatrix) -> np.ndarray:
    """Pairwise Euclidean distances over c1..cK-1, shape (T_ref, T_syn)."""
    a = ref.frames[:, 1:]
    b = syn.frames[:, 1:]
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"coefficient count mismatch: {ref.frames.shape[1]} vs {syn.frames.shape[1]}"
        )
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.sum(diff**2, axis=2))


def dtw_align(ref: MfccMatrix, syn: MfccMatrix) -> AlignmentPath:
    """Minimum-cost monotone alignment of the two frame sequences."""
    if ref.frames.shape[0] == 0 or syn.frames.shape[0] == 0:
        raise ValueError("cannot align an empty sequence")
    d = local_distances(ref, syn)
    m, n = d.shape
    acc = np.full((m, n), np.inf)
    acc[0, 0] = d[0, 0]
    # Sweep anti-diagonals; slot r+1 of each work array holds the value at
    # row r so that row -1 reads the inf sentinel at slot 0.
    prev2 = np.full(m + 1, np.inf)
    prev1 = np.full(m + 1, np.inf)
    prev1[1] = acc[0, 0]
    for k in range(1, m + n - 1):
        lo, hi = max(0, k - n + 1), min(m - 1, k)
        rows = np.arange(lo, hi + 1)
        cols = k - rows
        best = np.minimum(prev2[rows], np.minimum(prev1[rows], prev1[rows + 1]))
        cur = np.full(m + 1, np.inf)
        cur[rows + 1] = d[rows, cols] + best
        acc[rows, cols] = cur[rows + 1]
        prev2, prev1 = prev1, cur

    pairs = [(m - 1, n - 1)]
    i, j = m - 1, n - 1
    while (i, j) != (0, 0):
        candidates = []
        if i > 0 and j > 0:
            candidates.append((acc[i - 1, j - 1], (i - 1, j - 1)))
        if i > 0:
            candidates.append((acc[i - 1, j], (i - 1, j)))
        if j > 0:
            candidates.append((acc[i, j - 1], (i, j - 1)))
        _, (i, j) = min(candidates, key=lambda c: c[0])
        pairs.append((i, j))
    pairs.reverse()
    return AlignmentPath(pairs=tuple(pairs))


def path_cost(ref: MfccMatrix, syn: MfccMatrix, path: AlignmentPath) -> float:
    """Sum of local distances along the path, accumulated in path order."""
    d = local_distances(ref, syn)
    total = 0.0
    for i, j in path.pairs:
        total += d[i, j]
    return total
