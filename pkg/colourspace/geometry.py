"""
Geometry Module for Colourspace

The distance-t colouring graph H(G, k, t) of all proper k-colourings, its
clusters (connected components), per-vertex classification as
loose / rigid / thawed / frozen, and the two constructive recolouring
procedures: forcing a colour at a vertex through its neighbourhood, and
layered recolouring on high-girth graphs.
"""

import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components

from .cache import get_shared_cache
from .colourings import (
    Colouring,
    ListAssignment,
    available_colours,
    hamming_distance,
    validate_colouring,
)
from .core.config import settings
from .core.errors import InfeasibleParametersError, PreconditionError
from .enumeration import enumerate_colourings, materialise
from .graphs import Graph, disjoint_union, distance_layers, girth, is_independent_set

logger = logging.getLogger(__name__)


def _close_pairs(colourings: np.ndarray, t: int):
    """All index pairs (i < j) of rows at Hamming distance <= t, sorted.

    Rows within distance t agree on at least one of t + 1 vertex blocks, so
    only rows sharing a block projection are compared. Each pair is kept
    only in the first block it agrees on, and distances are filtered one
    row at a time, so memory stays linear in the bucket size.
    """
    count, n = colourings.shape
    if count < 2:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    if t >= n:
        rows, cols = np.triu_indices(count, k=1)
        return rows.astype(np.int64), cols.astype(np.int64)

    blocks = np.array_split(np.arange(n), t + 1)
    keys = np.stack(
        [np.unique(colourings[:, block], axis=0, return_inverse=True)[1].reshape(-1) for block in blocks]
    )
    found_rows: List[np.ndarray] = []
    found_cols: List[np.ndarray] = []
    for b in range(len(blocks)):
        order = np.argsort(keys[b], kind="stable")
        splits = np.flatnonzero(np.diff(keys[b][order])) + 1
        for members in np.split(order, splits):
            if len(members) < 2:
                continue
            members = np.sort(members)
            for pos in range(len(members) - 1):
                i, later = members[pos], members[pos + 1 :]
                close = np.count_nonzero(colourings[later] != colourings[i], axis=1) <= t
                if b:
                    close &= ~np.any(keys[:b, later] == keys[:b, i : i + 1], axis=0)
                js = later[close]
                if len(js):
                    found_rows.append(np.full(len(js), i, dtype=np.int64))
                    found_cols.append(js.astype(np.int64))
    if not found_rows:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)

    rows, cols = np.concatenate(found_rows), np.concatenate(found_cols)
    order = np.lexsort((cols, rows))
    return rows[order], cols[order]


class ColouringGraphView:
    """Immutable view of H(G, k, t) with cluster labels"""

    def __init__(self, g: Graph, k: int, t: int, colourings: np.ndarray):
        if t < 0:
            raise InfeasibleParametersError(f"t must be non-negative, got {t}")
        self.g = g
        self.k = k
        self.t = t
        self.colourings = colourings
        self._index = {tuple(row): i for i, row in enumerate(colourings.tolist())}

        size = len(colourings)
        rows, cols = _close_pairs(colourings, t)
        upper = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
        self.adjacency: csr_matrix = (upper + upper.T).tocsr()
        self.edge_count = len(rows)

        if size:
            _, raw = connected_components(self.adjacency, directed=False)
        else:
            raw = np.empty(0, dtype=np.int64)
        dense: Dict[int, int] = {}
        self.labels = np.array([dense.setdefault(int(x), len(dense)) for x in raw], dtype=np.int64)
        self.cluster_count = len(dense)
        self.cluster_sizes = np.bincount(self.labels, minlength=self.cluster_count)
        self._projections: Dict[tuple, Dict[int, int]] = {}
        logger.info(
            f"ColouringGraphView for {g!r}, k={k}, t={t}: "
            f"{size} colourings, {self.edge_count} edges, {self.cluster_count} clusters"
        )

    def __len__(self) -> int:
        return len(self.colourings)

    def index_of(self, tau: Sequence[Optional[int]]) -> Optional[int]:
        return self._index.get(tuple(tau))

    def colouring(self, i: int) -> Colouring:
        return Colouring(self.colourings[i].tolist())

    def neighbours(self, i: int) -> np.ndarray:
        start, end = self.adjacency.indptr[i], self.adjacency.indptr[i + 1]
        return np.sort(self.adjacency.indices[start:end])

    def cluster_members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def projection(self, label: int, v: int) -> Dict[int, int]:
        """Colours taken by v across a cluster, each with its first member index"""
        key = (label, v)
        if key not in self._projections:
            members = self.cluster_members(label)
            colours, first = np.unique(self.colourings[members, v], return_index=True)
            self._projections[key] = {int(c): int(members[f]) for c, f in zip(colours, first)}
        return self._projections[key]


def build_view(g: Graph, k: int, t: int, budget: Optional[int] = None) -> ColouringGraphView:
    """Materialise every proper k-colouring and the distance-t graph over them"""
    if k < 0:
        raise InfeasibleParametersError(f"k must be non-negative, got {k}")
    L = ListAssignment.uniform_k(g.n, k)
    limit = settings.VIEW_BUDGET if budget is None else budget
    cache = get_shared_cache()
    key = cache.instance_key("colouring_view", g, L, t=t, limit=limit)
    return cache.get_or_compute(
        key, lambda: ColouringGraphView(g, k, t, materialise(g, L, limit=limit))
    )


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass
class VertexStatus:
    vertex: int
    colour: int
    t: int
    loose: bool
    rigid: bool
    thawed: bool
    frozen: bool
    cluster_id: int
    cluster_size: int
    witnesses: Dict[int, int] = field(default_factory=dict)

    def to_row(self) -> dict:
        return {
            "vertex": self.vertex,
            "loose": self.loose,
            "thawed": self.thawed,
            "rigid": self.rigid,
            "frozen": self.frozen,
            "cluster_id": self.cluster_id,
            "cluster_size": self.cluster_size,
        }


def _locate(view: ColouringGraphView, tau: Sequence[Optional[int]]) -> int:
    tau = Colouring(tau)
    validate_colouring(view.g, ListAssignment.uniform_k(view.g.n, view.k), tau, total=True)
    i = view.index_of(tau)
    if i is None:
        raise PreconditionError(f"colouring {list(tau)} is not in the view")
    return i


def _status(view: ColouringGraphView, i: int, v: int) -> VertexStatus:
    own = int(view.colourings[i, v])
    nbrs = view.neighbours(i)
    near = {own: i}
    for j in nbrs:
        near.setdefault(int(view.colourings[j, v]), int(j))

    label = int(view.labels[i])
    projection = view.projection(label, v)
    loose = len(near) == view.k
    thawed = len(projection) == view.k
    if loose:
        witnesses = near
    elif thawed:
        witnesses = dict(projection)
    else:
        witnesses = {}
    return VertexStatus(
        vertex=v,
        colour=own,
        t=view.t,
        loose=loose,
        rigid=len(near) == 1,
        thawed=thawed,
        frozen=set(projection) == {own},
        cluster_id=label,
        cluster_size=int(view.cluster_sizes[label]),
        witnesses=witnesses,
    )


def classify_vertex(view: ColouringGraphView, tau: Sequence[Optional[int]], v: int) -> VertexStatus:
    """Classify v in tau.

    loose: every colour of [k] is taken by v in tau or in some neighbour of
    tau in H. rigid: no neighbour changes v. thawed: v takes every colour
    across tau's cluster. frozen: v keeps tau(v) across the cluster.
    """
    v = view.g.check_vertex(v)
    return _status(view, _locate(view, tau), v)


def classify_all(view: ColouringGraphView, tau: Sequence[Optional[int]]) -> List[VertexStatus]:
    i = _locate(view, tau)
    return [_status(view, i, v) for v in view.g.vertices()]


def count_frozen(view: ColouringGraphView, tau: Sequence[Optional[int]], t: Optional[int] = None) -> int:
    if t is not None and t != view.t:
        raise InfeasibleParametersError(f"view was built for t={view.t}, not t={t}")
    return sum(1 for status in classify_all(view, tau) if status.frozen)


def cluster_histogram(view: ColouringGraphView) -> Dict[int, int]:
    """Cluster size -> number of clusters of that size"""
    sizes, counts = np.unique(view.cluster_sizes, return_counts=True)
    return {int(s): int(c) for s, c in zip(sizes, counts)}


def naive_classify(g: Graph, k: int, t: int, tau: Sequence[Optional[int]], v: int) -> Dict[str, bool]:
    """Reference classification by scanning every colouring and every pair"""
    L = ListAssignment.uniform_k(g.n, k)
    tau = Colouring(tau)
    validate_colouring(g, L, tau, total=True)
    everything = list(enumerate_colourings(g, L))
    start = everything.index(tau)

    neighbours = [s for s in everything if s != tau and hamming_distance(s, tau) <= t]
    reached = {start}
    queue = deque([start])
    while queue:
        a = queue.popleft()
        for b, other in enumerate(everything):
            if b not in reached and hamming_distance(everything[a], other) <= t:
                reached.add(b)
                queue.append(b)
    projection = {everything[b][v] for b in reached}

    return {
        "loose": {tau[v]} | {s[v] for s in neighbours} == set(range(k)),
        "rigid": all(s[v] == tau[v] for s in neighbours),
        "thawed": projection == set(range(k)),
        "frozen": projection == {tau[v]},
    }


# ---------------------------------------------------------------------------
# Constructive recolouring
# ---------------------------------------------------------------------------


@dataclass
class RecolourResult:
    success: bool
    colouring: Colouring
    changed: FrozenSet[int] = frozenset()
    reason: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "colouring": self.colouring.to_json(),
            "changed": sorted(self.changed),
            "reason": self.reason,
        }


def _changed(before: Sequence, after: Sequence) -> FrozenSet[int]:
    return frozenset(i for i, (a, b) in enumerate(zip(before, after)) if a != b)


def force_colour(g: Graph, L: ListAssignment, sigma: Colouring, v: int, x: int) -> RecolourResult:
    """Give v colour x by moving each neighbour coloured x to its smallest
    other available colour; only N[v] changes."""
    v = g.check_vertex(v)
    nbrs = sorted(g.adjacency[v])
    if not is_independent_set(g, nbrs):
        raise PreconditionError(f"N({v}) is not an independent set")
    sigma = Colouring(sigma)
    validate_colouring(g, L, sigma, total=True)
    if x not in L[v]:
        raise PreconditionError(f"colour {x} is not in the list of vertex {v}")

    work = list(sigma.with_colour(v, None))
    for u in nbrs:
        if work[u] != x:
            continue
        spare = available_colours(g, L, work, u) - {x}
        if not spare:
            return RecolourResult(False, sigma, reason=f"neighbour {u} has no available colour besides {x}")
        work[u] = min(spare)
    work[v] = x

    result = Colouring(work)
    changed = _changed(sigma, result)
    assert changed <= {v, *nbrs}
    return RecolourResult(True, result, changed)


@dataclass
class LayeredRecolouring:
    sequence: List[Colouring]
    final: Colouring
    final_list_sizes: Dict[int, int]
    threshold: int
    success: bool

    def to_dict(self) -> dict:
        return {
            "sequence": [s.to_json() for s in self.sequence],
            "final_list_sizes": {str(u): size for u, size in self.final_list_sizes.items()},
            "threshold": self.threshold,
            "success": self.success,
        }


def layered_recolour(
    g: Graph,
    k: int,
    sigma0: Colouring,
    v: int,
    g_depth: int,
    threshold: int = 2,
) -> LayeredRecolouring:
    """Grow the available lists of N(v) by recolouring BFS layers outside-in.

    Step i recolours layer U_{g-i+1}: the children of each parent in U_{g-i}
    take, one by one, the available colour already used most often by their
    processed siblings (ties to the smallest colour).
    """
    v = g.check_vertex(v)
    if g_depth < 1:
        raise InfeasibleParametersError(f"g_depth must be at least 1, got {g_depth}")
    if girth(g) < 2 * g_depth + 2:
        raise PreconditionError(f"girth {girth(g)} is below {2 * g_depth + 2}")
    L = ListAssignment.uniform_k(g.n, k)
    sigma0 = Colouring(sigma0)
    validate_colouring(g, L, sigma0, total=True)

    layers = distance_layers(g, v, g_depth)
    current = list(sigma0)
    sequence = []
    for i in range(1, g_depth):
        outer = layers[g_depth - i + 1]
        for w in sorted(layers[g_depth - i]):
            used: Counter = Counter()
            for u in sorted(x for x in g.adjacency[w] if x in outer):
                choice = max(sorted(available_colours(g, L, current, u)), key=lambda c: (used[c], -c))
                current[u] = choice
                used[choice] += 1
        sequence.append(Colouring(current))

    final = Colouring(current)
    open_v = final.with_colour(v, None)
    sizes = {u: len(available_colours(g, L, open_v, u)) for u in sorted(g.adjacency[v])}
    return LayeredRecolouring(
        sequence=sequence,
        final=final,
        final_list_sizes=sizes,
        threshold=threshold,
        success=all(size >= threshold for size in sizes.values()),
    )


def looseness_radius_witness(
    g: Graph,
    k: int,
    sigma: Colouring,
    v: int,
    x: int,
    g_depth: int,
) -> RecolourResult:
    """Layered recolouring followed by forcing x at v; reports every vertex
    changed relative to sigma, all within distance g_depth of v."""
    layered = layered_recolour(g, k, sigma, v, g_depth)
    forced = force_colour(g, ListAssignment.uniform_k(g.n, k), layered.final, v, x)
    if not forced.success:
        return RecolourResult(False, Colouring(sigma), reason=forced.reason)
    changed = _changed(sigma, forced.colouring)
    ball = frozenset().union(*distance_layers(g, v, g_depth))
    assert changed <= ball
    return RecolourResult(True, forced.colouring, changed)


@dataclass
class FrozenCopiesReport:
    copies: int
    n: int
    frozen: int
    fully_frozen_copies: int

    @property
    def fraction(self) -> float:
        return self.frozen / self.n if self.n else 0.0

    def to_dict(self) -> dict:
        return {
            "copies": self.copies,
            "n": self.n,
            "frozen": self.frozen,
            "fraction": self.fraction,
            "fully_frozen_copies": self.fully_frozen_copies,
        }


def frozen_fraction_disjoint_copies(
    base: Graph,
    copies: int,
    k: int,
    t: int,
    rng: Optional[np.random.Generator] = None,
    budget: Optional[int] = None,
) -> FrozenCopiesReport:
    """Frozen vertices of a colouring of ``copies`` disjoint copies of ``base``.

    tau is a uniform colouring when ``rng`` is given, else the first one.
    """
    if copies < 1:
        raise InfeasibleParametersError(f"copies must be at least 1, got {copies}")
    g = disjoint_union(base, copies)
    view = build_view(g, k, t, budget=budget)
    if len(view) == 0:
        raise PreconditionError(f"{g!r} has no proper {k}-colouring")
    index = 0 if rng is None else int(rng.integers(len(view)))
    statuses = classify_all(view, view.colouring(index))
    frozen = [s.frozen for s in statuses]
    per_copy = [frozen[c * base.n : (c + 1) * base.n] for c in range(copies)]
    return FrozenCopiesReport(
        copies=copies,
        n=g.n,
        frozen=sum(frozen),
        fully_frozen_copies=sum(1 for block in per_copy if all(block)),
    )
