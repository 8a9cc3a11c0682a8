"""pa_multigraph.sampler

Degree-proportional node sampling over a Fenwick tree (binary indexed tree)
of node degrees.  Point updates and weighted lookups are O(log n); batched
lookups and updates run the tree walk once per level across the whole batch.
Memory is O(n), independent of the number of edges.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import EmptyGraphError, InfeasibleError, OutOfRangeError

__all__ = ["DegreeSampler"]


def _fenwick_transform(values: np.ndarray) -> np.ndarray:
    """Fenwick tree (index 0 unused) of values[1..]; linear in len(values)."""
    cs = np.cumsum(values)
    j = np.arange(len(values), dtype=np.int64)
    out = cs - cs[j - (j & -j)]
    out[0] = 0
    return out


class DegreeSampler:
    """Cumulative degree table over node ids 1..max_index.

    ``find(v)`` returns the smallest index whose cumulative degree is >= v,
    so drawing v uniformly from 1..total selects node u with probability
    d_u / total.
    """

    def __init__(self, max_index: int) -> None:
        if max_index < 1:
            raise ValueError("max_index must be positive")
        self._max_index = max_index
        self._tree = np.zeros(max_index + 1, dtype=np.int64)
        self._total = 0
        # largest power of two <= max_index
        self._log_max_index = 1 << (max_index.bit_length() - 1)

    @classmethod
    def from_degrees(cls, degrees: Sequence[int], max_index: int) -> "DegreeSampler":
        """Build from d_1..d_n (position i is node i+1) with room for max_index nodes."""
        degrees = np.asarray(degrees, dtype=np.int64)
        if degrees.size > max_index:
            raise OutOfRangeError(f"{degrees.size} degrees exceed capacity {max_index}")
        s = cls(max_index)
        values = np.zeros(max_index + 1, dtype=np.int64)
        values[1 : degrees.size + 1] = degrees
        s._tree = _fenwick_transform(values)
        s._total = int(degrees.sum())
        return s

    @property
    def total(self) -> int:
        return self._total

    @property
    def max_index(self) -> int:
        return self._max_index

    def increment(self, index: int, v: int) -> None:
        if not 0 < index <= self._max_index:
            raise OutOfRangeError(f"index {index} outside 1..{self._max_index}")
        j = index
        while j <= self._max_index:
            self._tree[j] += v
            j += j & -j
        self._total += v

    def increment_many(self, indices: np.ndarray, values: np.ndarray) -> None:
        """Vectorised ``increment`` over a batch; repeated indices accumulate.

        Large batches are applied as one dense update of the whole tree.
        """
        idx = np.asarray(indices, dtype=np.int64)
        val = np.asarray(values, dtype=np.int64)
        if idx.size == 0:
            return
        if idx.min() < 1 or idx.max() > self._max_index:
            raise OutOfRangeError(f"index outside 1..{self._max_index}")
        self._total += int(val.sum())
        if idx.size * self._log_max_index.bit_length() > self._max_index:
            delta = np.zeros(self._max_index + 1, dtype=np.int64)
            np.add.at(delta, idx, val)
            self._tree += _fenwick_transform(delta)
            return
        while idx.size:
            np.add.at(self._tree, idx, val)
            idx = idx + (idx & -idx)
            keep = idx <= self._max_index
            idx, val = idx[keep], val[keep]

    def cumulative_many(self, indices: np.ndarray) -> np.ndarray:
        """Vectorised ``cumulative``; index 0 gives 0."""
        j = np.asarray(indices, dtype=np.int64).copy()
        if j.size and (j.min() < 0 or j.max() > self._max_index):
            raise OutOfRangeError(f"index outside 0..{self._max_index}")
        s = np.zeros_like(j)
        while np.any(j > 0):
            s += self._tree[j]
            j -= j & -j
        return s

    def weights(self, n: int) -> np.ndarray:
        """d_1..d_n read back from the tree."""
        return np.diff(self.cumulative_many(np.arange(n + 1, dtype=np.int64)))

    def cumulative(self, index: int) -> int:
        if not 0 < index <= self._max_index:
            raise OutOfRangeError(f"index {index} outside 1..{self._max_index}")
        j, s = index, 0
        while j > 0:
            s += int(self._tree[j])
            j -= j & -j
        return s

    def frequency(self, index: int) -> int:
        if not 0 < index <= self._max_index:
            raise OutOfRangeError(f"index {index} outside 1..{self._max_index}")
        j = index
        v = int(self._tree[j])
        p = j & (j - 1)
        j -= 1
        while p != j:
            v -= int(self._tree[j])
            j = j & (j - 1)
        return v

    def find_many(self, targets: np.ndarray) -> np.ndarray:
        """Smallest index with cumulative sum >= each target (targets in 1..total)."""
        s = np.asarray(targets, dtype=np.int64).copy()
        j = np.zeros_like(s)
        half = self._log_max_index
        tree = self._tree
        while half > 0:
            k = j + half
            inside = k <= self._max_index
            tk = tree[np.where(inside, k, 0)]
            move = inside & (s > tk)
            j = np.where(move, k, j)
            s = np.where(move, s - tk, s)
            half >>= 1
        return j + 1

    def find(self, v: int) -> int:
        return int(self.find_many(np.array([v]))[0])

    # ---- sampling --------------------------------------------------------
    def sample_with_replacement(self, k: int, rng: np.random.Generator) -> np.ndarray:
        """k independent draws, node u with probability d_u / total."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        if self._total <= 0:
            raise EmptyGraphError("cannot sample endpoints: total degree is zero")
        if k == 0:
            return np.zeros(0, dtype=np.int64)
        return self.find_many(rng.integers(1, self._total + 1, size=k))

    def sample_without_replacement(
        self, k: int, n_nodes: int, rng: np.random.Generator, weights: Optional[np.ndarray] = None
    ) -> np.ndarray:
        """k distinct nodes among 1..n_nodes, by successive degree-weighted draws.

        Uses exponential keys log(r_u)/d_u and keeps the k largest, which has
        the same law as drawing one node at a time and removing it.  ``weights``
        (d_1..d_n) skips reading the degrees back out of the tree.  The sampler
        is not modified.
        """
        if k < 0:
            raise ValueError("k must be nonnegative")
        if not 0 <= n_nodes <= self._max_index:
            raise OutOfRangeError(f"n_nodes {n_nodes} outside 0..{self._max_index}")
        if k > n_nodes:
            raise InfeasibleError(f"cannot choose {k} distinct endpoints among {n_nodes} nodes")
        if k == 0:
            return np.zeros(0, dtype=np.int64)
        if self._total <= 0:
            raise EmptyGraphError("cannot sample endpoints: total degree is zero")
        w = self.weights(n_nodes) if weights is None else np.asarray(weights, dtype=np.int64)[:n_nodes]
        positive = w > 0
        n_positive = int(np.count_nonzero(positive))
        if n_positive < k:
            raise InfeasibleError(f"only {n_positive} nodes of positive degree; {k} distinct endpoints requested")
        if k == n_positive:
            return np.flatnonzero(positive).astype(np.int64) + 1
        # 1 - random() lies in (0, 1], so every positive-weight key is finite
        keys = np.full(n_nodes, -np.inf)
        keys[positive] = np.log1p(-rng.random(n_positive)) / w[positive]
        top = np.argpartition(-keys, k - 1)[:k]
        return top[np.argsort(-keys[top], kind="stable")].astype(np.int64) + 1
