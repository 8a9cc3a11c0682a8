"""pa_multigraph.rado

Rado-multigraph side: structural axiom checks and witness coverage on finite
multigraphs, the Erdős–Rényi style multigraph generator, back-and-forth
extension of partial isomorphisms and small-pattern embedding.

Multiplicity k between u and v encodes the relations E_1..E_k, so the
monotonicity axiom holds by construction and is only asserted.
"""
from __future__ import annotations

import json
import logging
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

from .errors import CapReachedError, DomainError, InvariantViolation, LoopError, UnsupportedModeError
from .growth import Rational
from .multigraph import Multigraph, StorageMode, WitnessRequest

__all__ = [
    "DEFAULT_MULTIPLICITY_CAP",
    "ERConfig",
    "PartialIso",
    "FailurePoint",
    "CoverageClass",
    "AxiomReport",
    "check_basic_axioms",
    "witness_coverage",
    "er_generate",
    "verify_partial_iso",
    "back_and_forth_extend",
    "embed_multigraph",
    "MAX_PATTERN_NODES",
]

logger = logging.getLogger(__name__)

DEFAULT_MULTIPLICITY_CAP = 64
DEFAULT_ATTEMPT_BUDGET = 10_000
MAX_PATTERN_NODES = 8


def _dump_json(model: BaseModel) -> str:
    return json.dumps(model.model_dump(mode="json"), indent=2, sort_keys=True)


# ---- GENERATOR -----------------------------------------------------------
class ERConfig(BaseModel):
    """Pair multiplicities drawn level by level: P(mult > k | mult >= k) = p_k."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    node_count: int = Field(..., ge=1)
    p_sequence: Union[Rational, List[Rational]] = Field(
        ..., description="constant p or (p_0, p_1, ...); the last value repeats"
    )
    multiplicity_cap: int = Field(DEFAULT_MULTIPLICITY_CAP, ge=1)

    @field_validator("p_sequence")
    @classmethod
    def _open_unit_interval(cls, value):
        values = value if isinstance(value, list) else [value]
        if not values:
            raise ValueError("p_sequence must not be empty")
        for p in values:
            if not 0 < p < 1:
                raise ValueError(f"p must lie strictly between 0 and 1, got {p}")
        return value

    def p_at(self, k: int) -> float:
        if isinstance(self.p_sequence, list):
            return float(self.p_sequence[min(k, len(self.p_sequence) - 1)])
        return float(self.p_sequence)

    def survival(self, k: int) -> float:
        """P(mult >= k) = prod_{j<k} p_j."""
        return float(np.prod([self.p_at(j) for j in range(k)]))


def er_generate(config: ERConfig, rng: np.random.Generator) -> Multigraph:
    """Sample every unordered pair independently; pairs are visited in (u, v) lexicographic order."""
    n = config.node_count
    iu, iv = np.triu_indices(n, k=1)
    mult = np.zeros(iu.size, dtype=np.int64)
    alive = np.arange(iu.size)
    for level in range(config.multiplicity_cap):
        if not alive.size:
            break
        alive = alive[rng.random(alive.size) < config.p_at(level)]
        mult[alive] += 1
    if alive.size:
        raise CapReachedError(
            f"{alive.size} pair(s) reached multiplicity cap {config.multiplicity_cap}; raise the cap or lower p"
        )
    logger.info("generated ER multigraph: %d nodes, %d edges", n, int(mult.sum()))
    return Multigraph.from_edge_arrays(n, iu + 1, iv + 1, mult)


# ---- AXIOMS --------------------------------------------------------------
class CoverageClass(BaseModel):
    size: int = Field(..., description="number of nodes u_i in the request")
    total_multiplicity: int = Field(..., description="sum of m_i")
    requests: int
    satisfied: int

    @computed_field
    @property
    def fraction(self) -> float:
        return self.satisfied / self.requests if self.requests else 0.0


class AxiomReport(BaseModel):
    node_count: int
    a1_ok: bool = Field(..., description="no loops and symmetric storage")
    a2_ok: bool = Field(..., description="stored multiplicities are positive integers")
    a3_ok: bool = Field(True, description="finite graphs always have a maximum multiplicity")
    max_multiplicity: int
    degree_sum_ok: bool
    a4_coverage: List[CoverageClass] = Field(default_factory=list)

    def coverage_by_class(self) -> Dict[Tuple[int, int], float]:
        return {(c.size, c.total_multiplicity): c.fraction for c in self.a4_coverage}

    def to_json(self) -> str:
        return _dump_json(self)


def _require_full(g: Multigraph) -> None:
    if g.storage_mode is not StorageMode.FULL:
        raise UnsupportedModeError("axiom checks need FULL storage mode")


def check_basic_axioms(g: Multigraph) -> AxiomReport:
    """Loops, symmetry and multiplicity bookkeeping; failures are report fields."""
    _require_full(g)
    loops = symmetric = True
    positive = True
    max_mult = 0
    for u in range(1, g.n + 1):
        row = g.neighbours(u)
        if u in row:
            loops = False
        for v, k in row.items():
            if not 1 <= v <= g.n or g.neighbours(v).get(u) != k:
                symmetric = False
            if not isinstance(k, int) or k < 1:
                positive = False
            max_mult = max(max_mult, k)
    report = AxiomReport(
        node_count=g.n,
        a1_ok=loops and symmetric,
        a2_ok=positive,
        max_multiplicity=max_mult,
        degree_sum_ok=g.degree_sum_consistent(),
    )
    if not report.a1_ok:
        logger.warning("axiom check failed: loops=%s symmetric=%s", not loops, symmetric)
    return report


def witness_coverage(
    g: Multigraph,
    n_max: int,
    m_max: int,
    sample_count: int,
    rng: np.random.Generator,
) -> AxiomReport:
    """Sample witness requests of up to n_max nodes and multiplicities <= m_max.

    Satisfied fractions are reported per (size, total multiplicity) class.
    """
    _require_full(g)
    if n_max < 1 or m_max < 0 or sample_count < 0:
        raise DomainError("need n_max >= 1, m_max >= 0 and sample_count >= 0")
    if n_max > g.n:
        raise DomainError(f"n_max = {n_max} exceeds node count {g.n}")
    tally: Dict[Tuple[int, int], List[int]] = {}
    for _ in range(sample_count):
        size = int(rng.integers(1, n_max + 1))
        nodes = rng.choice(g.n, size=size, replace=False) + 1
        mults = rng.integers(0, m_max + 1, size=size)
        request = WitnessRequest(pairs=list(zip(nodes.tolist(), mults.tolist())))
        entry = tally.setdefault((size, request.total_multiplicity), [0, 0])
        entry[0] += 1
        entry[1] += bool(g.witnesses_all(request))
    coverage = [
        CoverageClass(size=s, total_multiplicity=m, requests=r, satisfied=k) for (s, m), (r, k) in sorted(tally.items())
    ]
    return check_basic_axioms(g).model_copy(update={"a4_coverage": coverage})


# ---- BACK AND FORTH ------------------------------------------------------
class PartialIso(BaseModel):
    """Finite injective map a_i -> b_i preserving every pairwise multiplicity."""

    pairs: List[Tuple[int, int]] = Field(default_factory=list)
    source: Optional[str] = None
    target: Optional[str] = None

    @model_validator(mode="after")
    def _injective(self):
        if len(set(self.domain)) != len(self.pairs) or len(set(self.image)) != len(self.pairs):
            raise ValueError("partial isomorphism must be injective")
        return self

    @property
    def domain(self) -> List[int]:
        return [a for a, _ in self.pairs]

    @property
    def image(self) -> List[int]:
        return [b for _, b in self.pairs]

    @property
    def mapping(self) -> Dict[int, int]:
        return dict(self.pairs)

    def extended(self, a: int, b: int) -> "PartialIso":
        return PartialIso(pairs=self.pairs + [(a, b)], source=self.source, target=self.target)

    def inverse(self) -> "PartialIso":
        return PartialIso(pairs=[(b, a) for a, b in self.pairs], source=self.target, target=self.source)

    def to_json(self) -> str:
        return _dump_json(self)


class FailurePoint(BaseModel):
    step: int
    direction: Literal["forth", "back"]
    node: int = Field(..., description="unmapped node that found no match")
    vector: List[int] = Field(..., description="its multiplicities against the mapped tuple")
    iso: PartialIso = Field(..., description="map reached before the failing step")

    def to_json(self) -> str:
        return _dump_json(self)


def verify_partial_iso(g1: Multigraph, g2: Multigraph, iso: PartialIso) -> bool:
    """Injective, in range, and mult_g1(a_i, a_j) == mult_g2(b_i, b_j) for all i < j."""
    pairs = iso.pairs
    if len({a for a, _ in pairs}) != len(pairs) or len({b for _, b in pairs}) != len(pairs):
        return False
    if any(not 1 <= a <= g1.n or not 1 <= b <= g2.n for a, b in pairs):
        return False
    for i, (a, b) in enumerate(pairs):
        row_a, row_b = g1.neighbours(a), g2.neighbours(b)
        for a2, b2 in pairs[i + 1 :]:
            if row_a.get(a2, 0) != row_b.get(b2, 0):
                return False
    return True


def _matches(
    g: Multigraph, anchors: Sequence[int], vector: Sequence[int], rng: Optional[np.random.Generator], tie_break: str
) -> Optional[int]:
    """Unmapped node of ``g`` whose multiplicities against ``anchors`` equal ``vector``."""
    taken = set(anchors)
    if not anchors:
        free = [v for v in range(1, g.n + 1) if v not in taken]
    else:
        request = WitnessRequest(pairs=list(zip(anchors, vector)))
        if tie_break == "smallest":
            return g.witness_satisfied(request)
        free = g.witnesses_all(request)
    if not free:
        return None
    if tie_break == "random":
        return int(free[rng.integers(len(free))])
    return free[0]


def back_and_forth_extend(
    g1: Multigraph,
    g2: Multigraph,
    iso: Optional[PartialIso] = None,
    steps: int = 1,
    rng: Optional[np.random.Generator] = None,
    tie_break: Literal["smallest", "random"] = "smallest",
) -> Union[PartialIso, FailurePoint]:
    """Alternate forth (even steps) and back (odd steps) extensions.

    Each step takes the least unmapped node on its side, computes its
    multiplicity vector against the mapped tuple and looks for a node on the
    other side with the same vector against the image tuple. A step with no
    unmapped node left on its side is skipped.
    """
    if steps < 0:
        raise DomainError(f"steps must be nonnegative, got {steps}")
    if tie_break not in ("smallest", "random"):
        raise DomainError(f"unknown tie_break {tie_break!r}")
    if tie_break == "random" and rng is None:
        raise DomainError("tie_break='random' needs an rng")
    _require_full(g1)
    _require_full(g2)
    iso = iso if iso is not None else PartialIso()
    if not verify_partial_iso(g1, g2, iso):
        raise DomainError("starting map is not a partial isomorphism")

    for i in range(steps):
        forth = i % 2 == 0
        src, dst = (g1, g2) if forth else (g2, g1)
        src_tuple, dst_tuple = (iso.domain, iso.image) if forth else (iso.image, iso.domain)
        mapped = set(src_tuple)
        node = next((u for u in range(1, src.n + 1) if u not in mapped), None)
        if node is None:
            continue
        row = src.neighbours(node)
        vector = [row.get(a, 0) for a in src_tuple]
        match = _matches(dst, dst_tuple, vector, rng, tie_break)
        if match is None:
            logger.debug("back-and-forth failed at step %d (%s) for node %d", i, "forth" if forth else "back", node)
            return FailurePoint(step=i, direction="forth" if forth else "back", node=node, vector=vector, iso=iso)
        iso = iso.extended(node, match) if forth else iso.extended(match, node)
    return iso


# ---- EMBEDDING -----------------------------------------------------------
def _placement_order(pattern: Multigraph) -> List[int]:
    """Highest degree first, then the node most tied to those already placed."""
    remaining = set(range(1, pattern.n + 1))
    order: List[int] = []
    while remaining:
        placed = set(order)

        def weight(p: int) -> Tuple[int, int, int]:
            tied = sum(k for q, k in pattern.neighbours(p).items() if q in placed)
            return (tied, pattern.degree(p), -p)

        nxt = max(remaining, key=weight)
        order.append(nxt)
        remaining.discard(nxt)
    return order


def embed_multigraph(
    host: Multigraph,
    pattern: Multigraph,
    rng: np.random.Generator,
    attempt_budget: int = DEFAULT_ATTEMPT_BUDGET,
) -> Optional[Dict[int, int]]:
    """Injection pattern -> host preserving every pairwise multiplicity (induced).

    Randomised depth-first extension with backtracking; ``attempt_budget``
    bounds the number of tentative placements. ``None`` means nothing was
    found within the budget, not that no embedding exists.
    """
    _require_full(host)
    _require_full(pattern)
    if pattern.n > MAX_PATTERN_NODES:
        raise DomainError(f"pattern has {pattern.n} nodes; at most {MAX_PATTERN_NODES} supported")
    for p in range(1, pattern.n + 1):
        if p in pattern.neighbours(p):
            raise LoopError(f"pattern has a loop at node {p}")
    if attempt_budget < 1:
        raise DomainError("attempt_budget must be positive")
    if pattern.n == 0:
        return {}
    if pattern.n > host.n:
        return None

    order = _placement_order(pattern)
    budget = [attempt_budget]

    def candidates(p: int, mapping: Dict[int, int]) -> List[int]:
        if not mapping:
            return (rng.permutation(host.n) + 1).tolist()
        row = pattern.neighbours(p)
        request = WitnessRequest(pairs=[(h, row.get(q, 0)) for q, h in mapping.items()])
        found = host.witnesses_all(request)
        return [found[i] for i in rng.permutation(len(found))]

    def extend(depth: int, mapping: Dict[int, int]) -> Optional[Dict[int, int]]:
        if depth == len(order):
            return dict(mapping)
        p = order[depth]
        for h in candidates(p, mapping):
            if budget[0] <= 0:
                return None
            budget[0] -= 1
            mapping[p] = h
            found = extend(depth + 1, mapping)
            if found is not None:
                return found
            del mapping[p]
        return None

    result = extend(0, {})
    if result is None:
        logger.warning("no embedding found within %d placements", attempt_budget - budget[0])
        return None
    if not verify_partial_iso(pattern, host, PartialIso(pairs=sorted(result.items()))):
        raise InvariantViolation("embedding does not preserve multiplicities")
    return result
