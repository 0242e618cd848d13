"""
Isomorph-free generation of abstract almost-equidistant graphs by vertex extension.

Starting from a single vertex, every representative on n vertices is extended by
one new vertex in all admissible ways. Two rules keep the search small:

* the new vertex has at least n-d-1 neighbours: its non-neighbours must be
  pairwise adjacent (the complement is triangle-free), so they form a clique of
  the parent of size at most d+1, and the candidates are generated directly as
  those cliques;
* the new vertex has minimum degree in the extended graph (ties are kept).

Children are deduplicated by canonical label at every order.
"""
import logging
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel, Field
from tqdm import tqdm

from src.aeq_search.errors import NotAbstractAlmostEquidistantError, SearchBudgetExceeded
from src.aeq_search.graphcore import (
    MAX_VERTICES,
    CanonicalLabel,
    ForbiddenProfile,
    Graph,
    canonical_rows,
    clique_in_rows,
    is_abstract_aeq,
    iter_bits,
    label_from_rows,
    multipartite_in_rows,
)

logger = logging.getLogger(__name__)

COUNT_COLUMNS = ["n", "d", "mode", "count", "complete"]

# parents handed to a worker in one task
CHUNK_SIZE = 64


class SearchMode(str, Enum):
    ALL = "all"
    MINIMAL = "minimal"


class SearchConfig(BaseModel):
    d: int = Field(..., ge=2, description="Dimension of the forbidden-subgraph profile")
    n_max: int = Field(..., ge=1, le=MAX_VERTICES, description="Largest order to enumerate")
    mode: SearchMode = Field(SearchMode.ALL, description="Which count the caller is interested in")
    parallel_depth: int = Field(0, ge=0, description="Parent order from which extensions are farmed out")
    time_budget: Optional[float] = Field(None, gt=0, description="Wall-clock cap in seconds")
    jobs: int = Field(1, ge=1, description="Worker processes")
    progress: bool = Field(False, description="Show a progress bar per order")


class CountTable:
    """Counts of non-isomorphic graphs keyed by (n, d, mode)."""

    def __init__(self, rows: Optional[Iterable[dict]] = None):
        self._rows: Dict[Tuple[int, int, str], dict] = {}
        for row in rows or []:
            self.add(row["n"], row["d"], row["mode"], row["count"], row.get("complete", True))

    def add(self, n: int, d: int, mode, count: int, complete: bool = True) -> None:
        mode = SearchMode(mode).value
        if count < 0:
            raise ValueError(f"Counts are non-negative, got {count} for n={n}")
        n, d = int(n), int(d)
        self._rows[(n, d, mode)] = {"n": n, "d": d, "mode": mode, "count": int(count), "complete": bool(complete)}

    def count(self, n: int, d: int, mode=SearchMode.ALL) -> int:
        return self._rows[(n, d, SearchMode(mode).value)]["count"]

    def is_complete(self, n: int, d: int, mode=SearchMode.ALL) -> bool:
        return self._rows[(n, d, SearchMode(mode).value)]["complete"]

    def __contains__(self, key) -> bool:
        n, d, mode = key
        return (n, d, SearchMode(mode).value) in self._rows

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def complete(self) -> bool:
        return all(row["complete"] for row in self._rows.values())

    def validate(self) -> None:
        """
        Raises:
            ValueError: If some order has more minimal graphs than graphs
        """
        for (n, d, mode), row in self._rows.items():
            if mode != SearchMode.MINIMAL.value:
                continue
            total = self._rows.get((n, d, SearchMode.ALL.value))
            if total is not None and row["count"] > total["count"]:
                raise ValueError(f"n={n}, d={d}: {row['count']} minimal graphs exceed {total['count']} graphs")

    def to_frame(self, mode: Optional[SearchMode] = None) -> pd.DataFrame:
        rows = sorted(self._rows.values(), key=lambda r: (r["d"], r["mode"], r["n"]))
        if mode is not None:
            rows = [r for r in rows if r["mode"] == SearchMode(mode).value]
        return pd.DataFrame(rows, columns=COUNT_COLUMNS)

    def to_csv(self, path=None, mode: Optional[SearchMode] = None) -> Optional[str]:
        return self.to_frame(mode).to_csv(path, index=False)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "CountTable":
        return cls(frame.to_dict(orient="records"))


@dataclass
class Level:
    """All representatives of one order, sorted by canonical label."""

    n: int
    graphs: List[Graph]
    minimal: List[bool]
    complete: bool = True

    @property
    def count(self) -> int:
        return len(self.graphs)

    @property
    def minimal_count(self) -> int:
        return sum(self.minimal)

    def representatives(self, mode=SearchMode.ALL) -> List[Graph]:
        if SearchMode(mode) is SearchMode.ALL:
            return list(self.graphs)
        return [g for g, is_min in zip(self.graphs, self.minimal) if is_min]


@dataclass
class EnumerationResult:
    config: SearchConfig
    table: CountTable = field(default_factory=CountTable)
    levels: Dict[int, Level] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return self.table.complete and max(self.levels, default=0) == self.config.n_max

    def representatives(self, mode=SearchMode.ALL) -> Iterator[Graph]:
        for n in sorted(self.levels):
            yield from self.levels[n].representatives(mode)


def _cliques_up_to(adj: Sequence[int], candidates: int, limit: int) -> Iterator[int]:
    """Yield every clique (as a bit mask, the empty one included) of size at most limit."""
    yield 0

    def grow(clique: int, candidates: int, size: int) -> Iterator[int]:
        while candidates:
            low = candidates & -candidates
            candidates ^= low
            extended = clique | low
            yield extended
            if size + 1 < limit:
                yield from grow(extended, candidates & adj[low.bit_length() - 1], size + 1)

    yield from grow(0, candidates, 0)


def extend_graph(n: int, adj: Sequence[int], d: int) -> Dict[CanonicalLabel, Tuple[int, ...]]:
    """
    All abstract almost-equidistant one-vertex extensions of the graph (n, adj).

    The parent must itself be abstract almost-equidistant in R^d, so only
    forbidden subgraphs through the new vertex need checking.

    Returns:
        Canonical label -> canonical adjacency rows of each distinct child
    """
    profile = ForbiddenProfile.for_dimension(d)
    full = (1 << n) - 1
    new_bit = 1 << n
    degrees = [row.bit_count() for row in adj]
    min_degree = min(degrees)
    children: Dict[CanonicalLabel, Tuple[int, ...]] = {}

    for non_neighbours in _cliques_up_to(adj, full, d + 1):
        new_degree = n - non_neighbours.bit_count()
        if new_degree > min_degree:
            # the new vertex must not exceed any degree of the extended graph
            if any(degrees[u] + (0 if non_neighbours >> u & 1 else 1) < new_degree for u in range(n)):
                continue
        neighbours = full & ~non_neighbours
        rows = [row | new_bit if neighbours >> i & 1 else row for i, row in enumerate(adj)]
        rows.append(neighbours)

        if clique_in_rows(rows, neighbours, d + 1) is not None:
            continue
        if multipartite_in_rows(n + 1, rows, profile.multipartite_classes, required=n) is not None:
            continue

        canonical = canonical_rows(n + 1, rows)
        label = label_from_rows(n + 1, canonical)
        if label not in children:
            children[label] = canonical
    return children


def _extend_chunk(parents: List[Tuple[int, ...]], n: int, d: int) -> Dict[CanonicalLabel, Tuple[int, ...]]:
    merged: Dict[CanonicalLabel, Tuple[int, ...]] = {}
    for adj in parents:
        merged.update(extend_graph(n, adj, d))
    return merged


def _is_minimal_rows(n: int, adj: Sequence[int]) -> bool:
    full = (1 << n) - 1
    for u in range(n):
        for v in iter_bits(adj[u] >> (u + 1) << (u + 1)):
            # removing uv leaves the complement triangle-free iff u, v have no common non-neighbour
            if not full & ~(adj[u] | adj[v] | 1 << u | 1 << v):
                return False
    return True


def is_minimal(g: Graph, d: int) -> bool:
    """
    Check whether removing any edge of g breaks abstract almost-equidistance.

    Removing an edge cannot create a clique or a multipartite pattern, so only the
    triangle-free complement can break: g is minimal iff every edge uv has a vertex
    adjacent to neither u nor v.

    Raises:
        NotAbstractAlmostEquidistantError: If g is not abstract almost-equidistant in R^d
    """
    if not is_abstract_aeq(g, d):
        raise NotAbstractAlmostEquidistantError(f"Graph is not abstract almost-equidistant in R^{d}")
    return _is_minimal_rows(g.n, g.adj)


def minimal_filter(graphs: Iterable[Graph], d: int) -> Iterator[Graph]:
    for g in graphs:
        if is_minimal(g, d):
            yield g


def _make_level(n: int, children: Dict[CanonicalLabel, Tuple[int, ...]], complete: bool) -> Level:
    graphs = [Graph(n, children[label]) for label in sorted(children)]
    minimal = [_is_minimal_rows(n, g.adj) for g in graphs]
    return Level(n=n, graphs=graphs, minimal=minimal, complete=complete)


def _chunks(items: List[Tuple[int, ...]], size: int) -> List[List[Tuple[int, ...]]]:
    return [items[i:i + size] for i in range(0, len(items), size)]


def _extend_serial(
        parents: List[Tuple[int, ...]],
        n: int,
        cfg: SearchConfig,
        deadline: Optional[float],
) -> Tuple[Dict[CanonicalLabel, Tuple[int, ...]], bool]:
    children: Dict[CanonicalLabel, Tuple[int, ...]] = {}
    for adj in tqdm(parents, desc=f"n={n + 1}", disable=not cfg.progress, leave=False):
        if deadline is not None and time.monotonic() > deadline:
            return children, False
        children.update(extend_graph(n, adj, cfg.d))
    return children, True


def _extend_parallel(
        executor: ProcessPoolExecutor,
        parents: List[Tuple[int, ...]],
        n: int,
        cfg: SearchConfig,
        deadline: Optional[float],
) -> Tuple[Dict[CanonicalLabel, Tuple[int, ...]], bool]:
    children: Dict[CanonicalLabel, Tuple[int, ...]] = {}
    pending = {executor.submit(_extend_chunk, chunk, n, cfg.d) for chunk in _chunks(parents, CHUNK_SIZE)}
    bar = tqdm(total=len(pending), desc=f"n={n + 1}", disable=not cfg.progress, leave=False)
    try:
        while pending:
            timeout = None if deadline is None else max(0.0, deadline - time.monotonic())
            done, pending = wait(pending, timeout=timeout, return_when=FIRST_COMPLETED)
            for future in done:
                children.update(future.result())
                bar.update(1)
            if not done:
                for future in pending:
                    future.cancel()
                return children, False
    finally:
        bar.close()
    return children, True


def iter_levels(cfg: SearchConfig) -> Iterator[Level]:
    """
    Yield the representatives of each order 1..n_max in turn.

    A level cut short by the time budget is yielded with complete=False and ends
    the iteration.
    """
    started = time.monotonic()
    deadline = started + cfg.time_budget if cfg.time_budget else None
    level = _make_level(1, {label_from_rows(1, (0,)): (0,)}, True)
    yield level

    executor = ProcessPoolExecutor(max_workers=cfg.jobs) if cfg.jobs > 1 else None
    try:
        for n in range(1, cfg.n_max):
            parents = [g.adj for g in level.graphs]
            if not parents:
                level = Level(n=n + 1, graphs=[], minimal=[])
            else:
                if executor is not None and n >= cfg.parallel_depth:
                    children, complete = _extend_parallel(executor, parents, n, cfg, deadline)
                else:
                    children, complete = _extend_serial(parents, n, cfg, deadline)
                level = _make_level(n + 1, children, complete)
            logger.info(
                "d=%d n=%d: %d graphs, %d minimal (%.1fs)%s",
                cfg.d, level.n, level.count, level.minimal_count, time.monotonic() - started,
                "" if level.complete else " [truncated]",
            )
            yield level
            if not level.complete:
                logger.warning("Time budget of %ss exhausted at n=%d", cfg.time_budget, level.n)
                return
    finally:
        if executor is not None:
            executor.shutdown(wait=True, cancel_futures=True)


def enumerate_aeq(cfg: SearchConfig) -> EnumerationResult:
    """
    Enumerate abstract almost-equidistant graphs in R^d on 1..n_max vertices.

    Args:
        cfg: Search parameters

    Returns:
        EnumerationResult with both count modes for every order and the
        representatives, one per isomorphism class

    Raises:
        SearchBudgetExceeded: If the time budget ran out; carries the partial result
    """
    result = EnumerationResult(config=cfg)
    for level in iter_levels(cfg):
        result.levels[level.n] = level
        result.table.add(level.n, cfg.d, SearchMode.ALL, level.count, level.complete)
        result.table.add(level.n, cfg.d, SearchMode.MINIMAL, level.minimal_count, level.complete)
        result.table.validate()
        if not level.complete:
            raise SearchBudgetExceeded(result, f"time budget exceeded at n={level.n}")
    return result
