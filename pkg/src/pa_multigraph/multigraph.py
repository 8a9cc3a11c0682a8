"""pa_multigraph.multigraph

Finite loopless undirected multigraph keyed by node ids 1..n, storing edge
multiplicities (never per-edge objects), a degree vector and a total-edge
counter.  Edge direction is dropped at ingestion.

Text format (interchange between CLI subcommands)::

    nodes 3
    1 2 2
    2 3 1

one ``u v k`` line per adjacent pair, ``u < v``, ``k >= 1``, sorted.
"""
from __future__ import annotations

from collections import Counter
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .errors import LoopError, OutOfRangeError, ParseError, SeedInvalidError, UnsupportedModeError

__all__ = [
    "StorageMode",
    "Multigraph",
    "WitnessRequest",
    "read_multigraph",
    "write_multigraph",
]


class StorageMode(str, Enum):
    FULL = "full"
    DEGREES_ONLY = "degrees_only"


class WitnessRequest(BaseModel):
    """Demand for a node joined to each u_i by exactly m_i edges."""

    pairs: List[Tuple[int, int]] = Field(..., min_length=1, description="(node u_i, multiplicity m_i)")

    @model_validator(mode="before")
    @classmethod
    def _from_list(cls, data):
        if isinstance(data, (list, tuple)):
            return {"pairs": [tuple(p) for p in data]}
        return data

    @model_validator(mode="after")
    def _check(self):
        nodes = [u for u, _ in self.pairs]
        if len(set(nodes)) != len(nodes):
            raise ValueError("witness request nodes must be pairwise distinct")
        if any(u < 1 for u in nodes):
            raise ValueError("node ids start at 1")
        if any(m < 0 for _, m in self.pairs):
            raise ValueError("multiplicities must be nonnegative")
        return self

    @property
    def nodes(self) -> List[int]:
        return [u for u, _ in self.pairs]

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.pairs)

    @property
    def label(self) -> str:
        return ",".join(f"{u}:{m}" for u, m in self.pairs)


class Multigraph:
    """Loopless multigraph over nodes 1..n.

    In ``FULL`` mode adjacency is kept as one neighbour->multiplicity dict
    per node (both directions stored); ``DEGREES_ONLY`` keeps the degree
    vector alone.
    """

    def __init__(
        self,
        n: int = 0,
        storage_mode: StorageMode = StorageMode.FULL,
        capacity: Optional[int] = None,
    ) -> None:
        if n < 0:
            raise ValueError("node count must be nonnegative")
        self.storage_mode = StorageMode(storage_mode)
        cap = max(n, capacity or 0, 4)
        self._deg = np.zeros(cap + 1, dtype=np.int64)
        self._n = n
        self._total_edges = 0
        self._adj: Optional[List[Dict[int, int]]] = (
            [{} for _ in range(n + 1)] if self.storage_mode is StorageMode.FULL else None
        )

    # ---- construction ----------------------------------------------------
    @classmethod
    def new_seed(
        cls,
        edges: Iterable[Sequence[int]],
        v_prime: int,
        storage_mode: StorageMode = StorageMode.FULL,
        capacity: Optional[int] = None,
    ) -> "Multigraph":
        """Seed graph over 1..v' from a multiset of unordered pairs; no isolated nodes."""
        g = cls(v_prime, storage_mode, capacity)
        for pair in edges:
            u, v = int(pair[0]), int(pair[1])
            if u == v:
                raise LoopError(f"loop edge ({u}, {u}) in seed")
            for w in (u, v):
                if not 1 <= w <= v_prime:
                    raise SeedInvalidError(f"seed edge ({u}, {v}) mentions node outside 1..{v_prime}")
            g._add_edge(u, v, 1)
        isolated = [u for u in range(1, v_prime + 1) if g._deg[u] == 0]
        if isolated:
            raise SeedInvalidError(f"seed has isolated node(s) {isolated}")
        return g

    @classmethod
    def from_edge_arrays(
        cls,
        n: int,
        u: Sequence[int],
        v: Sequence[int],
        k: Sequence[int],
        storage_mode: StorageMode = StorageMode.FULL,
    ) -> "Multigraph":
        """Graph on 1..n with multiplicity k[i] between u[i] and v[i]; pairs must be distinct."""
        u_arr = np.asarray(u, dtype=np.int64)
        v_arr = np.asarray(v, dtype=np.int64)
        k_arr = np.asarray(k, dtype=np.int64)
        if not u_arr.shape == v_arr.shape == k_arr.shape:
            raise ValueError("u, v and k must have equal length")
        if np.any(u_arr == v_arr):
            raise LoopError("loop edge in edge arrays")
        if u_arr.size and (min(u_arr.min(), v_arr.min()) < 1 or max(u_arr.max(), v_arr.max()) > n):
            raise OutOfRangeError(f"edge endpoint outside 1..{n}")
        g = cls(n, storage_mode)
        keep = k_arr > 0
        u_arr, v_arr, k_arr = u_arr[keep], v_arr[keep], k_arr[keep]
        np.add.at(g._deg, u_arr, k_arr)
        np.add.at(g._deg, v_arr, k_arr)
        g._total_edges = int(k_arr.sum())
        if g._adj is not None:
            adj = g._adj
            for a, b, m in zip(u_arr.tolist(), v_arr.tolist(), k_arr.tolist()):
                adj[a][b] = m
                adj[b][a] = m
        return g

    def _grow_to(self, n: int) -> None:
        if n >= len(self._deg):
            new = np.zeros(max(n + 1, 2 * len(self._deg)), dtype=np.int64)
            new[: len(self._deg)] = self._deg
            self._deg = new

    def _add_edge(self, u: int, v: int, k: int) -> None:
        self._deg[u] += k
        self._deg[v] += k
        self._total_edges += k
        if self._adj is not None:
            self._adj[u][v] = self._adj[u].get(v, 0) + k
            self._adj[v][u] = self._adj[v].get(u, 0) + k

    def _check_node(self, u: int) -> None:
        if not 1 <= u <= self._n:
            raise OutOfRangeError(f"node {u} outside 1..{self._n}")

    def add_node_with_endpoints(self, endpoints: Sequence[int]) -> int:
        """Append node n+1 with one edge to each listed endpoint (repeats allowed)."""
        counts = Counter(int(u) for u in endpoints)
        nodes = sorted(counts)
        return self.add_node_with_counts(nodes, [counts[u] for u in nodes])

    def add_node_with_counts(self, nodes: Sequence[int], counts: Sequence[int]) -> int:
        """Append node n+1 joined to ``nodes[i]`` by ``counts[i]`` parallel edges."""
        nodes_arr = np.asarray(nodes, dtype=np.int64)
        counts_arr = np.asarray(counts, dtype=np.int64)
        if nodes_arr.size and (nodes_arr.min() < 1 or nodes_arr.max() > self._n):
            raise OutOfRangeError(f"endpoint outside 1..{self._n}")
        new = self._n + 1
        self._grow_to(new)
        added = int(counts_arr.sum())
        np.add.at(self._deg, nodes_arr, counts_arr)
        self._deg[new] = added
        self._total_edges += added
        self._n = new
        if self._adj is not None:
            row: Dict[int, int] = {}
            for u, k in zip(nodes_arr.tolist(), counts_arr.tolist()):
                if k:
                    row[u] = row.get(u, 0) + k
                    self._adj[u][new] = row[u]
            self._adj.append(row)
        return new

    # ---- queries ---------------------------------------------------------
    @property
    def n(self) -> int:
        return self._n

    @property
    def total_edges(self) -> int:
        return self._total_edges

    @property
    def degrees(self) -> np.ndarray:
        """Copy of d_1..d_n (position i holds node i+1)."""
        return self._deg[1 : self._n + 1].copy()

    def degrees_of(self, nodes: np.ndarray) -> np.ndarray:
        """Degrees of the given node ids, in order."""
        return self._deg[np.asarray(nodes, dtype=np.int64)]

    def degree(self, u: int) -> int:
        self._check_node(u)
        return int(self._deg[u])

    def _require_full(self) -> List[Dict[int, int]]:
        if self._adj is None:
            raise UnsupportedModeError("operation needs FULL storage mode; graph stores degrees only")
        return self._adj

    def multiplicity(self, u: int, v: int) -> int:
        adj = self._require_full()
        if u == v:
            raise LoopError(f"multiplicity queried for loop ({u}, {u})")
        self._check_node(u)
        self._check_node(v)
        return adj[u].get(v, 0)

    def neighbours(self, u: int) -> Mapping[int, int]:
        adj = self._require_full()
        self._check_node(u)
        return MappingProxyType(adj[u])

    def edges(self) -> Iterator[Tuple[int, int, int]]:
        """(u, v, k) with u < v in ascending order."""
        adj = self._require_full()
        for u in range(1, self._n + 1):
            for v in sorted(w for w in adj[u] if w > u):
                yield u, v, adj[u][v]

    def max_multiplicity(self) -> int:
        adj = self._require_full()
        return max((k for row in adj[1:] for k in row.values()), default=0)

    def degree_sum_consistent(self) -> bool:
        """Stored degrees agree with the adjacency rows and with 2 * total_edges."""
        if int(self._deg[1 : self._n + 1].sum()) != 2 * self._total_edges:
            return False
        if self._adj is None:
            return True
        return all(sum(self._adj[u].values()) == self._deg[u] for u in range(1, self._n + 1))

    def copy(self, storage_mode: Optional[StorageMode] = None) -> "Multigraph":
        mode = StorageMode(storage_mode) if storage_mode is not None else self.storage_mode
        if mode is StorageMode.FULL and self._adj is None:
            raise UnsupportedModeError("cannot rebuild adjacency from a degrees-only graph")
        g = Multigraph(0, mode, capacity=len(self._deg) - 1)
        g._n = self._n
        g._deg = self._deg.copy()
        g._total_edges = self._total_edges
        if mode is StorageMode.FULL:
            g._adj = [dict(row) for row in self._adj]
        return g

    # ---- witnesses -------------------------------------------------------
    def _witness_candidates(self, request: WitnessRequest) -> Iterator[int]:
        adj = self._require_full()
        for u in request.nodes:
            self._check_node(u)
        excluded = set(request.nodes)
        positive = [(u, m) for u, m in request.pairs if m > 0]
        if positive:
            u0, m0 = min(positive, key=lambda p: len(adj[p[0]]))
            pool: Iterable[int] = sorted(v for v, k in adj[u0].items() if k == m0)
        else:
            pool = range(1, self._n + 1)
        for v in pool:
            if v in excluded:
                continue
            if all(adj[u].get(v, 0) == m for u, m in request.pairs):
                yield v

    def witness_satisfied(self, request: WitnessRequest) -> Optional[int]:
        """Smallest node joined to every u_i by exactly m_i edges, or None."""
        return next(self._witness_candidates(request), None)

    def witnesses_all(self, request: WitnessRequest) -> List[int]:
        return list(self._witness_candidates(request))

    # ---- text codec ------------------------------------------------------
    def serialize(self) -> bytes:
        lines = [f"nodes {self._n}"]
        lines.extend(f"{u} {v} {k}" for u, v, k in self.edges())
        return ("\n".join(lines) + "\n").encode("ascii")

    @classmethod
    def deserialize(cls, data: Union[bytes, str]) -> "Multigraph":
        text = data.decode("ascii") if isinstance(data, bytes) else data
        declared: Optional[int] = None
        triples: List[Tuple[int, int, int]] = []
        seen = set()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            parts = raw.split()
            if not parts:
                continue
            if parts[0] == "nodes":
                if declared is not None or triples or len(parts) != 2 or not parts[1].isdigit():
                    raise ParseError(f"bad header {raw!r}", lineno)
                declared = int(parts[1])
                continue
            if len(parts) != 3 or not all(p.isdigit() for p in parts):
                raise ParseError(f"expected 'u v k', got {raw!r}", lineno)
            u, v, k = (int(p) for p in parts)
            if u == v:
                raise LoopError(f"line {lineno}: loop ({u}, {u})")
            if u > v:
                raise ParseError(f"pair must be written with u < v, got {u} {v}", lineno)
            if u < 1 or k < 1:
                raise ParseError(f"node ids and multiplicities start at 1, got {raw!r}", lineno)
            if (u, v) in seen:
                raise ParseError(f"duplicate pair {u} {v}", lineno)
            if declared is not None and v > declared:
                raise ParseError(f"node {v} exceeds declared count {declared}", lineno)
            seen.add((u, v))
            triples.append((u, v, k))
        n = declared if declared is not None else max((v for _, v, _ in triples), default=0)
        g = cls(n)
        for u, v, k in triples:
            g._add_edge(u, v, k)
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Multigraph):
            return NotImplemented
        if self._n != other._n or self._total_edges != other._total_edges:
            return False
        if not np.array_equal(self.degrees, other.degrees):
            return False
        if self._adj is None or other._adj is None:
            return self._adj is None and other._adj is None
        return self._adj[1:] == other._adj[1 : other._n + 1]

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Multigraph(n={self._n}, total_edges={self._total_edges}, mode={self.storage_mode.value})"


def read_multigraph(path: Union[str, Path]) -> Multigraph:
    return Multigraph.deserialize(Path(path).read_bytes())


def write_multigraph(g: Multigraph, path: Union[str, Path]) -> None:
    Path(path).write_bytes(g.serialize())
