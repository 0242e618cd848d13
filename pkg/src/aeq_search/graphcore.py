"""
Compact graphs on at most 64 vertices, stored as one bit mask of neighbours per vertex.

Everything else in the package builds on the detectors here: triangles in the
complement, cliques, complete multipartite patterns, and the canonical label
used to count graphs up to isomorphism.
"""
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, NewType, Optional, Sequence, Tuple, Union

import networkx as nx

from src.aeq_search.errors import Graph6Error, GraphError

MAX_VERTICES = 64

CanonicalLabel = NewType("CanonicalLabel", bytes)


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the positions of the set bits of mask in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


@dataclass(frozen=True, slots=True)
class Graph:
    """Undirected simple graph; adj[i] has bit j set iff {i, j} is an edge."""

    n: int
    adj: Tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_VERTICES:
            raise GraphError(f"Vertex count must be between 1 and {MAX_VERTICES}, got {self.n}")
        if len(self.adj) != self.n:
            raise GraphError(f"Expected {self.n} adjacency rows, got {len(self.adj)}")
        full = (1 << self.n) - 1
        for i, row in enumerate(self.adj):
            if row < 0 or row & ~full:
                raise GraphError(f"Row {i} has bits set outside the {self.n} vertices")
            if row >> i & 1:
                raise GraphError(f"Self-loop at vertex {i}")
            for j in iter_bits(row):
                if not self.adj[j] >> i & 1:
                    raise GraphError(f"Adjacency is not symmetric: {i}->{j} without {j}->{i}")

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, tuple(full ^ (1 << i) for i in range(n)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        rows = [0] * n
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"Edge ({i}, {j}) out of range for {n} vertices")
            if i == j:
                raise GraphError(f"Self-loop at vertex {i}")
            rows[i] |= 1 << j
            rows[j] |= 1 << i
        return cls(n, tuple(rows))

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "Graph":
        index = {v: i for i, v in enumerate(graph.nodes())}
        return cls.from_edges(len(index), ((index[u], index[v]) for u, v in graph.edges()))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges())
        return graph

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def edges(self) -> List[Tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in iter_bits(self.adj[i] >> (i + 1) << (i + 1))]

    @property
    def edge_count(self) -> int:
        return sum(row.bit_count() for row in self.adj) // 2

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def degrees(self) -> List[int]:
        return [row.bit_count() for row in self.adj]

    def add_edge(self, i: int, j: int) -> "Graph":
        if i == j:
            raise GraphError(f"Self-loop at vertex {i}")
        rows = list(self.adj)
        rows[i] |= 1 << j
        rows[j] |= 1 << i
        return Graph(self.n, tuple(rows))

    def remove_edge(self, i: int, j: int) -> "Graph":
        rows = list(self.adj)
        rows[i] &= ~(1 << j)
        rows[j] &= ~(1 << i)
        return Graph(self.n, tuple(rows))

    def permute(self, perm: Sequence[int]) -> "Graph":
        """Relabel so that vertex i becomes perm[i]."""
        if sorted(perm) != list(range(self.n)):
            raise GraphError("perm is not a permutation of the vertices")
        rows = [0] * self.n
        for i, row in enumerate(self.adj):
            new_row = 0
            for j in iter_bits(row):
                new_row |= 1 << perm[j]
            rows[perm[i]] = new_row
        return Graph(self.n, tuple(rows))

    def induced_subgraph(self, vertices: Sequence[int]) -> "Graph":
        position = {v: k for k, v in enumerate(vertices)}
        rows = []
        for v in vertices:
            rows.append(mask_of(position[u] for u in iter_bits(self.adj[v]) if u in position))
        return Graph(len(vertices), tuple(rows))

    def is_isomorphic(self, other: "Graph") -> bool:
        return canonical_label(self) == canonical_label(other)


@dataclass(frozen=True, slots=True)
class ForbiddenProfile:
    """The pair of forbidden subgraphs defining abstract almost-equidistance in R^d."""

    d: int
    clique_size: int
    multipartite_classes: Tuple[int, ...]

    @classmethod
    def for_dimension(cls, d: int) -> "ForbiddenProfile":
        if d < 2:
            raise GraphError(f"Abstract almost-equidistant graphs are defined for d >= 2, got {d}")
        if d == 2:
            classes = (2, 3)
        elif d % 2 == 1:
            classes = (3,) * ((d + 1) // 2)
        else:
            classes = (1,) + (3,) * (d // 2)
        return cls(d=d, clique_size=d + 2, multipartite_classes=classes)


def complement(g: Graph) -> Graph:
    full = g.full_mask
    return Graph(g.n, tuple(full ^ row ^ (1 << i) for i, row in enumerate(g.adj)))


def has_triangle(g: Graph) -> bool:
    adj = g.adj
    for i in range(g.n):
        for j in iter_bits(adj[i] >> (i + 1) << (i + 1)):
            if adj[i] & adj[j]:
                return True
    return False


def clique_in_rows(adj: Sequence[int], candidates: int, k: int) -> Optional[Tuple[int, ...]]:
    if k == 0:
        return ()
    while candidates.bit_count() >= k:
        low = candidates & -candidates
        v = low.bit_length() - 1
        candidates ^= low
        rest = clique_in_rows(adj, candidates & adj[v], k - 1)
        if rest is not None:
            return (v,) + rest
    return None


def find_clique(g: Graph, k: int, within: Optional[int] = None) -> Optional[Tuple[int, ...]]:
    """
    Search for a K_k subgraph.

    Args:
        g: Graph to search
        k: Clique size
        within: Optional bit mask restricting the vertices that may be used

    Returns:
        The clique's vertices in increasing order, or None if there is no K_k
    """
    if k < 1:
        raise GraphError(f"Clique size must be positive, got {k}")
    candidates = g.full_mask if within is None else within & g.full_mask
    return clique_in_rows(g.adj, candidates, k)


def contains_clique(g: Graph, k: int) -> bool:
    return find_clique(g, k) is not None


def _choose_class(
        adj: Sequence[int],
        candidates: Sequence[int],
        need: int,
        pool: int,
        reserve: int,
        start: int = 0,
) -> Iterator[Tuple[int, int]]:
    """
    Yield (class_mask, common_neighbours) for every way of picking `need` vertices
    from candidates[start:], keeping only choices whose common neighbourhood
    inside pool still has room for `reserve` more vertices.
    """
    def pick(index: int, need: int, chosen: int, common: int) -> Iterator[Tuple[int, int]]:
        if need == 0:
            yield chosen, common
            return
        for position in range(index, len(candidates) - need + 1):
            v = candidates[position]
            bit = 1 << v
            narrowed = common & adj[v]
            if (pool & narrowed & ~(chosen | bit)).bit_count() < reserve:
                continue
            yield from pick(position + 1, need - 1, chosen | bit, narrowed)

    return pick(start, need, 0, -1)


def _find_multipartite(
        adj: Sequence[int],
        rank: Dict[int, int],
        pool: int,
        sizes: Tuple[int, ...],
        after_rank: int,
) -> Optional[List[Tuple[int, ...]]]:
    if not sizes:
        return []
    if pool.bit_count() < sum(sizes):
        return None
    size, rest = sizes[0], sizes[1:]
    reserve = sum(rest)
    candidates = sorted(iter_bits(pool), key=rank.__getitem__)
    # classes of equal size are interchangeable: their leading vertices must appear in rank order
    start = 0
    while start < len(candidates) and rank[candidates[start]] <= after_rank:
        start += 1
    for chosen, common in _choose_class(adj, candidates, size, pool, reserve, start):
        remaining = pool & common & ~chosen
        leader = min(rank[v] for v in iter_bits(chosen))
        next_after = leader if rest and rest[0] == size else -1
        found = _find_multipartite(adj, rank, remaining, rest, next_after)
        if found is not None:
            return [tuple(iter_bits(chosen))] + found
    return None


def _degree_rank(adj: Sequence[int]) -> Dict[int, int]:
    order = sorted(range(len(adj)), key=lambda v: (-adj[v].bit_count(), v))
    return {v: position for position, v in enumerate(order)}


def multipartite_in_rows(
        n: int,
        adj: Sequence[int],
        class_sizes: Sequence[int],
        required: Optional[int] = None,
) -> Optional[List[Tuple[int, ...]]]:
    """Row-level form of find_multipartite, used on hot paths that never build a Graph."""
    sizes = tuple(sorted(class_sizes, reverse=True))
    if any(s < 1 for s in sizes):
        raise GraphError(f"Class sizes must be positive, got {list(class_sizes)}")
    if sum(sizes) > n:
        return None
    rank = _degree_rank(adj)
    full = (1 << n) - 1
    if required is None:
        return _find_multipartite(adj, rank, full, sizes, -1)

    # put the required vertex into one class of each distinct size in turn
    others = sorted(iter_bits(full & ~(1 << required)), key=rank.__getitem__)
    pool = adj[required]
    for size in sorted(set(sizes), reverse=True):
        rest = list(sizes)
        rest.remove(size)
        rest = tuple(rest)
        for chosen, common in _choose_class(adj, others, size - 1, pool, sum(rest)):
            members = chosen | 1 << required
            remaining = pool & common & ~members
            found = _find_multipartite(adj, rank, remaining, rest, -1)
            if found is not None:
                return [tuple(iter_bits(members))] + found
    return None


def find_multipartite(
        g: Graph,
        class_sizes: Sequence[int],
        required: Optional[int] = None,
) -> Optional[List[Tuple[int, ...]]]:
    """
    Search for the complete multipartite graph with the given class sizes as a subgraph.

    Edges inside a class are unconstrained; every pair of vertices from different
    classes must be adjacent. Classes are placed largest first and candidates are
    tried in order of descending degree.

    Args:
        g: Graph to search
        class_sizes: Sizes of the classes, in any order
        required: If given, only patterns that use this vertex are reported

    Returns:
        One vertex tuple per class, or None if the pattern does not occur
    """
    return multipartite_in_rows(g.n, g.adj, class_sizes, required)


def contains_multipartite(g: Graph, class_sizes: Sequence[int]) -> bool:
    return find_multipartite(g, class_sizes) is not None


def is_abstract_aeq(g: Graph, d: int) -> bool:
    """
    Check whether g is an abstract almost-equidistant graph in R^d: its complement
    is triangle-free and it contains neither K_{d+2} nor the dimension's
    complete multipartite pattern.
    """
    profile = ForbiddenProfile.for_dimension(d)
    if has_triangle(complement(g)):
        return False
    if contains_clique(g, profile.clique_size):
        return False
    return not contains_multipartite(g, profile.multipartite_classes)


# Canonical labeling

def _refine(adj: Sequence[int], cells: List[List[int]]) -> List[List[int]]:
    """Split cells by neighbour counts into every cell until the partition is equitable."""
    while True:
        masks = [mask_of(cell) for cell in cells]
        refined: List[List[int]] = []
        changed = False
        for cell in cells:
            if len(cell) == 1:
                refined.append(cell)
                continue
            groups: Dict[Tuple[int, ...], List[int]] = {}
            for v in cell:
                signature = tuple((adj[v] & m).bit_count() for m in masks)
                groups.setdefault(signature, []).append(v)
            if len(groups) == 1:
                refined.append(cell)
                continue
            changed = True
            refined.extend(groups[key] for key in sorted(groups))
        cells = refined
        if not changed:
            return cells


def _relabelled_rows(adj: Sequence[int], order: Sequence[int]) -> Tuple[int, ...]:
    position = {v: i for i, v in enumerate(order)}
    rows = []
    for v in order:
        row = 0
        for u in iter_bits(adj[v]):
            row |= 1 << position[u]
        rows.append(row)
    return tuple(rows)


def _orbit(start: Iterable[int], generators: List[Tuple[int, ...]]) -> set:
    seen = set(start)
    frontier = list(seen)
    while frontier:
        v = frontier.pop()
        for gen in generators:
            w = gen[v]
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return seen


def canonical_rows(n: int, adj: Sequence[int]) -> Tuple[int, ...]:
    """
    Adjacency rows of the canonical relabelling of the graph (n, adj).

    Individualisation-refinement: refine the degree partition to an equitable one,
    branch on the first non-singleton cell, and keep the lexicographically largest
    relabelled adjacency over all leaves. Automorphisms found along the way prune
    branches that are images of ones already explored.
    """
    best: Optional[Tuple[int, ...]] = None
    best_order: Optional[Tuple[int, ...]] = None
    automorphisms: List[Tuple[int, ...]] = []

    def search(cells: List[List[int]], prefix: Tuple[int, ...]) -> None:
        nonlocal best, best_order
        target = next((i for i, cell in enumerate(cells) if len(cell) > 1), None)
        if target is None:
            order = tuple(cell[0] for cell in cells)
            rows = _relabelled_rows(adj, order)
            if best is None or rows > best:
                best, best_order = rows, order
            elif rows == best:
                perm = [0] * n
                for a, b in zip(order, best_order):
                    perm[a] = b
                automorphisms.append(tuple(perm))
            return
        cell = cells[target]
        explored: List[int] = []
        for v in sorted(cell):
            if explored:
                stabiliser = [gen for gen in automorphisms if all(gen[p] == p for p in prefix)]
                if stabiliser and v in _orbit(explored, stabiliser):
                    continue
            split = cells[:target] + [[v], [u for u in cell if u != v]] + cells[target + 1:]
            search(_refine(adj, split), prefix + (v,))
            explored.append(v)

    search(_refine(adj, [list(range(n))]), ())
    return best


def label_from_rows(n: int, rows: Sequence[int]) -> CanonicalLabel:
    return CanonicalLabel(bytes([n]) + b"".join(row.to_bytes(8, "big") for row in rows))


def canonical_label(g: Graph) -> CanonicalLabel:
    """Byte string equal for isomorphic graphs and distinct otherwise."""
    return label_from_rows(g.n, canonical_rows(g.n, g.adj))


def canonical_form(g: Graph) -> Graph:
    return Graph(g.n, canonical_rows(g.n, g.adj))


# graph6 interchange

def to_graph6(g: Graph) -> str:
    return nx.to_graph6_bytes(g.to_networkx(), header=False).decode("ascii").strip()


def from_graph6(text: Union[str, bytes], line: Optional[int] = None) -> Graph:
    data = text.encode("ascii") if isinstance(text, str) else text
    data = data.strip()
    if data.startswith(b">>graph6<<"):
        data = data[len(b">>graph6<<"):]
    if not data:
        raise Graph6Error("empty graph6 string", line)
    try:
        graph = nx.from_graph6_bytes(data)
    except (nx.NetworkXError, ValueError, IndexError) as e:
        raise Graph6Error(f"malformed graph6 data: {e}", line) from e
    try:
        return Graph.from_networkx(graph)
    except GraphError as e:
        raise Graph6Error(str(e), line) from e


def read_graph6_file(path: Union[str, Path]) -> List[Graph]:
    """
    Read one graph per non-blank line.

    Raises:
        Graph6Error: With the 1-based line number of the first malformed line
    """
    graphs = []
    with open(path, "rb") as f:
        for number, raw in enumerate(f, start=1):
            if raw.strip():
                graphs.append(from_graph6(raw, line=number))
    return graphs


def write_graph6_file(path: Union[str, Path], graphs: Iterable[Graph]) -> int:
    count = 0
    with open(path, "w", encoding="ascii") as f:
        for g in graphs:
            f.write(to_graph6(g) + "\n")
            count += 1
    return count


def all_graphs(n: int) -> Iterator[Graph]:
    """Every labelled graph on n vertices; only sensible for small n."""
    pairs = list(itertools.combinations(range(n), 2))
    for bits in range(1 << len(pairs)):
        rows = [0] * n
        for k, (i, j) in enumerate(pairs):
            if bits >> k & 1:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
        yield Graph(n, tuple(rows))
