"""
Graph Core Module for Colourspace

Immutable simple graphs on dense integer ids 0..n-1, the structural queries
the colouring results depend on (girth, local density, independence, BFS
layers) and generators for every graph family the experiments use.
"""

import json
import logging
import math
from collections import deque
from fractions import Fraction
from heapq import heapify, heappop, heappush
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from .core.config import settings
from .core.errors import InfeasibleParametersError, InvalidVertexError
from .schemas.graph import GraphFamilySpec, GraphPayload

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


class Graph:
    """Simple undirected graph; immutable after construction"""

    __slots__ = ("_n", "_edges", "_adjacency")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if n < 0:
            raise InfeasibleParametersError(f"vertex count must be non-negative, got {n}")
        normalised = set()
        for edge in edges:
            u, v = int(edge[0]), int(edge[1])
            for x in (u, v):
                if not 0 <= x < n:
                    raise InvalidVertexError(f"edge endpoint {x} outside 0..{n - 1}")
            if u == v:
                raise InfeasibleParametersError(f"self-loop at vertex {u}")
            normalised.add((u, v) if u < v else (v, u))

        adjacency: List[set] = [set() for _ in range(n)]
        for u, v in normalised:
            adjacency[u].add(v)
            adjacency[v].add(u)

        object.__setattr__(self, "_n", n)
        object.__setattr__(self, "_edges", tuple(sorted(normalised)))
        object.__setattr__(self, "_adjacency", tuple(frozenset(a) for a in adjacency))

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return self._edges

    @property
    def adjacency(self) -> Tuple[frozenset, ...]:
        return self._adjacency

    def vertices(self) -> range:
        return range(self._n)

    def neighbours(self, v: int) -> frozenset:
        self.check_vertex(v)
        return self._adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.neighbours(v))

    def degrees(self) -> List[int]:
        return [len(a) for a in self._adjacency]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbours(u)

    def check_vertex(self, v) -> int:
        """Validate a vertex id and return it as int"""
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v < self._n:
            raise InvalidVertexError(f"invalid vertex id {v!r} for graph on {self._n} vertices")
        return int(v)

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self._n == other._n and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self._n, self._edges))

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, m={self.m})"


# ---------------------------------------------------------------------------
# Structural queries
# ---------------------------------------------------------------------------


def girth(g: Graph) -> Union[int, float]:
    """Length of a shortest cycle, ``math.inf`` for forests (BFS from every vertex)"""
    best = math.inf
    for source in g.vertices():
        dist = {source: 0}
        parent = {source: -1}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] >= best:
                break
            for w in g.adjacency[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def is_forest(g: Graph) -> bool:
    return girth(g) == math.inf


def max_degree(g: Graph) -> int:
    return max(g.degrees(), default=0)


def neighbourhood_avg_degree(g: Graph, v: int) -> Fraction:
    """Average degree of the graph induced by N(v)"""
    nbrs = g.neighbours(v)
    if not nbrs:
        return Fraction(0)
    inside = sum(len(g.adjacency[u] & nbrs) for u in nbrs)
    return Fraction(inside, len(nbrs))


def local_density(g: Graph) -> Fraction:
    """Largest neighbourhood average degree, the ``d`` of the local-density hypotheses"""
    return max((neighbourhood_avg_degree(g, v) for v in g.vertices()), default=Fraction(0))


def is_independent_set(g: Graph, s: Iterable[int]) -> bool:
    members = {g.check_vertex(v) for v in s}
    return all(not (g.adjacency[v] & members) for v in members)


def is_triangle_free(g: Graph) -> bool:
    return all(is_independent_set(g, g.adjacency[v]) for v in g.vertices())


def distance_layers(g: Graph, v: int, depth: int) -> List[frozenset]:
    """Vertex sets U_0..U_depth at exact BFS distance i from v"""
    v = g.check_vertex(v)
    if depth < 0:
        raise InfeasibleParametersError(f"depth must be non-negative, got {depth}")
    layers = [frozenset([v])]
    seen = {v}
    frontier = {v}
    for _ in range(depth):
        nxt = set()
        for u in frontier:
            nxt.update(w for w in g.adjacency[u] if w not in seen)
        seen.update(nxt)
        layers.append(frozenset(nxt))
        frontier = nxt
    return layers


def connected_components(g: Graph) -> List[List[int]]:
    """Components as sorted vertex lists, ordered by smallest member"""
    seen = [False] * g.n
    components = []
    for start in g.vertices():
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        members = []
        while queue:
            u = queue.popleft()
            members.append(u)
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
        components.append(sorted(members))
    return components


# ---------------------------------------------------------------------------
# Derived graphs
# ---------------------------------------------------------------------------


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> Tuple[Graph, Dict[int, int]]:
    """Induced subgraph relabelled densely in increasing id order; returns (graph, old->new)"""
    kept = sorted({g.check_vertex(v) for v in vertices})
    mapping = {old: new for new, old in enumerate(kept)}
    edges = [(mapping[u], mapping[v]) for u, v in g.edges if u in mapping and v in mapping]
    return Graph(len(kept), edges), mapping


def delete_vertex(g: Graph, v: int) -> Tuple[Graph, Dict[int, int]]:
    v = g.check_vertex(v)
    return induced_subgraph(g, (u for u in g.vertices() if u != v))


def delete_edge(g: Graph, edge: Edge) -> Graph:
    u, v = sorted(edge)
    if not g.has_edge(u, v):
        raise InfeasibleParametersError(f"edge {edge} not in graph")
    return Graph(g.n, [e for e in g.edges if e != (u, v)])


def contract_edge(g: Graph, edge: Edge) -> Graph:
    """Merge the larger endpoint into the smaller, dropping loops and parallel edges"""
    u, v = sorted(edge)
    if not g.has_edge(u, v):
        raise InfeasibleParametersError(f"edge {edge} not in graph")

    def relabel(x: int) -> int:
        x = u if x == v else x
        return x - 1 if x > v else x

    edges = [(relabel(a), relabel(b)) for a, b in g.edges if (a, b) != (u, v)]
    return Graph(g.n - 1, edges)


def disjoint_union(g: Graph, copies: int) -> Graph:
    if copies < 0:
        raise InfeasibleParametersError(f"copies must be non-negative, got {copies}")
    edges = [(u + c * g.n, v + c * g.n) for c in range(copies) for u, v in g.edges]
    return Graph(g.n * copies, edges)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InfeasibleParametersError(f"cycle needs at least 3 vertices, got {n}")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def complete_bipartite_graph(a: int, b: int) -> Graph:
    return Graph(a + b, [(u, a + w) for u in range(a) for w in range(b)])


def star_graph(leaves: int) -> Graph:
    """K_{1,leaves} with the centre at id 0"""
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, outer + spokes + inner)


def rooted_arity_tree(arity: int, depth: int) -> Graph:
    """Complete arity-ary tree in level order: the children of i are arity*i+1 .. arity*i+arity"""
    if arity < 1 or depth < 0:
        raise InfeasibleParametersError(f"need arity >= 1 and depth >= 0, got {arity}, {depth}")
    n = sum(arity**i for i in range(depth + 1))
    internal = n - arity**depth
    edges = [(i, arity * i + j) for i in range(internal) for j in range(1, arity + 1)]
    return Graph(n, edges)


def random_tree(n: int, seed: int) -> Graph:
    """Uniform labelled tree on n vertices from a random Pruefer sequence"""
    if n < 1:
        raise InfeasibleParametersError(f"random tree needs n >= 1, got {n}")
    if n <= 2:
        return path_graph(n)
    rng = np.random.default_rng(seed)
    sequence = [int(x) for x in rng.integers(0, n, size=n - 2)]
    degree = [1] * n
    for x in sequence:
        degree[x] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapify(leaves)
    edges = []
    for x in sequence:
        leaf = heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heappush(leaves, x)
    edges.append((heappop(leaves), heappop(leaves)))
    return Graph(n, edges)


def random_regular_graph(degree: int, n: int, seed: int, retries: int = None) -> Graph:
    """Configuration model with rejection of loops and multi-edges"""
    retries = settings.RANDOM_REGULAR_RETRIES if retries is None else retries
    if (n * degree) % 2 != 0:
        raise InfeasibleParametersError("n * degree must be even")
    if not 0 <= degree < n:
        raise InfeasibleParametersError("the 0 <= degree < n inequality must be satisfied")

    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), degree)
    for attempt in range(retries):
        shuffled = rng.permutation(stubs)
        edges = set()
        for s1, s2 in zip(shuffled[0::2], shuffled[1::2]):
            s1, s2 = (int(s1), int(s2)) if s1 < s2 else (int(s2), int(s1))
            if s1 == s2 or (s1, s2) in edges:
                break
            edges.add((s1, s2))
        else:
            logger.debug(f"random_regular(d={degree}, n={n}) simple after {attempt + 1} attempts")
            return Graph(n, edges)
    raise InfeasibleParametersError(
        f"no simple {degree}-regular graph on {n} vertices after {retries} attempts"
    )


def erdos_renyi_triangle_erased(n: int, p: float, seed: int) -> Graph:
    """G(n, p), then for each triangle u<v<w in lexicographic order delete edge (v, w)"""
    rng = np.random.default_rng(seed)
    us, vs = np.triu_indices(n, k=1)
    keep = rng.random(us.size) < p
    adjacency = [set() for _ in range(n)]
    for u, v in zip(us[keep], vs[keep]):
        adjacency[int(u)].add(int(v))
        adjacency[int(v)].add(int(u))

    erased = 0
    for u in range(n):
        higher = sorted(x for x in adjacency[u] if x > u)
        for i, v in enumerate(higher):
            for w in higher[i + 1:]:
                if w in adjacency[v]:
                    adjacency[v].discard(w)
                    adjacency[w].discard(v)
                    erased += 1
    logger.debug(f"erdos_renyi_triangle_erased(n={n}, p={p}) erased {erased} edges")
    edges = [(u, v) for u in range(n) for v in adjacency[u] if u < v]
    return Graph(n, edges)


def generate(spec: GraphFamilySpec) -> Graph:
    """Build the graph a family spec describes"""
    family = spec.family
    if family == "path":
        return path_graph(spec.n)
    if family == "cycle":
        return cycle_graph(spec.n)
    if family == "complete":
        return complete_graph(spec.n)
    if family == "complete_bipartite":
        return complete_bipartite_graph(spec.n, spec.n2)
    if family == "star":
        return star_graph(spec.n)
    if family == "edgeless":
        return Graph(spec.n)
    if family == "petersen":
        return petersen_graph()
    if family == "rooted_arity_tree":
        return rooted_arity_tree(spec.arity, spec.depth)
    if family == "disjoint_copies":
        return disjoint_union(generate(spec.base), spec.copies)
    if family == "random_regular":
        return random_regular_graph(spec.degree, spec.n, spec.seed)
    if family == "random_tree":
        return random_tree(spec.n, spec.seed)
    if family == "erdos_renyi_triangle_erased":
        return erdos_renyi_triangle_erased(spec.n, spec.p, spec.seed)
    if family == "from_file":
        return load_graph(spec.path)
    raise InfeasibleParametersError(f"unknown graph family '{family}'")


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def parse_edge_list(text: str) -> Graph:
    """Parse ``u v`` lines with ``#`` comments and an optional ``p <n> <m>`` header.

    With a header whose labels are all integers in 0..n-1 the labels are the
    ids (this is what :func:`format_edge_list` writes). Otherwise labels map
    to ids in first-seen order and a header ``n`` adds trailing isolated
    vertices.
    """
    header_n = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 3 or header_n is not None or not (parts[1].isdigit() and parts[2].isdigit()):
                raise InfeasibleParametersError(f"line {lineno}: malformed header '{raw.strip()}'")
            header_n = int(parts[1])
            continue
        if len(parts) != 2:
            raise InfeasibleParametersError(f"line {lineno}: expected 'u v', got '{raw.strip()}'")
        pairs.append((parts[0], parts[1]))

    labels = [x for pair in pairs for x in pair]
    if header_n is not None and all(x.isdigit() and int(x) < header_n for x in labels):
        return Graph(header_n, [(int(a), int(b)) for a, b in pairs])

    ids: Dict[str, int] = {}
    for x in labels:
        ids.setdefault(x, len(ids))
    n = max(len(ids), header_n or 0)
    return Graph(n, [(ids[a], ids[b]) for a, b in pairs])


def format_edge_list(g: Graph) -> str:
    lines = [f"p {g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def graph_to_json(g: Graph) -> dict:
    return {"n": g.n, "edges": [list(e) for e in g.edges]}


def graph_from_json(data: dict) -> Graph:
    payload = GraphPayload.model_validate(data)
    return Graph(payload.n, payload.edges)


def load_graph(path: Union[str, Path]) -> Graph:
    """Read a graph from a ``.json`` payload or an edge-list text file"""
    path = Path(path)
    if not path.exists():
        raise InfeasibleParametersError(f"graph file not found: {path}")
    text = path.read_text()
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InfeasibleParametersError(f"invalid JSON graph file {path}: {e}") from e
        return graph_from_json(data)
    return parse_edge_list(text)


def save_graph(g: Graph, path: Union[str, Path]) -> None:
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(json.dumps(graph_to_json(g)))
    else:
        path.write_text(format_edge_list(g))
