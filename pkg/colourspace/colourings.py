"""
Colouring Core Module for Colourspace

List-assignments, total and partial colourings, properness, available
lists L_sigma(v) and Hamming distance. Colours are non-negative integers;
``uniform_k`` interprets [k] as {0, ..., k-1}.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .core.errors import ImproperColouringError, InfeasibleParametersError
from .graphs import Graph

logger = logging.getLogger(__name__)

UNCOLOURED = None


class ListAssignment:
    """Per-vertex finite colour lists L(v)"""

    __slots__ = ("_lists", "_k")

    def __init__(self, lists: Iterable[Iterable[int]]):
        frozen = []
        for v, colours in enumerate(lists):
            colours = frozenset(int(c) for c in colours)
            if any(c < 0 for c in colours):
                raise InfeasibleParametersError(f"negative colour in list of vertex {v}")
            frozen.append(colours)
        self._lists: Tuple[frozenset, ...] = tuple(frozen)
        self._k: Optional[int] = None

    @classmethod
    def uniform_k(cls, n: int, k: int) -> "ListAssignment":
        if k < 0:
            raise InfeasibleParametersError(f"k must be non-negative, got {k}")
        assignment = cls([range(k)] * n)
        assignment._k = k
        return assignment

    @property
    def n(self) -> int:
        return len(self._lists)

    @property
    def k(self) -> Optional[int]:
        """k when every list is [k], else None"""
        if self._k is None and self._lists:
            first = self._lists[0]
            if first == frozenset(range(len(first))) and all(c == first for c in self._lists):
                self._k = len(first)
        return self._k

    @property
    def is_uniform(self) -> bool:
        return self.k is not None

    def palette(self) -> List[int]:
        """Sorted union of all lists"""
        return sorted(frozenset().union(*self._lists))

    def sizes(self) -> List[int]:
        return [len(c) for c in self._lists]

    def __getitem__(self, v: int) -> frozenset:
        return self._lists[v]

    def __len__(self) -> int:
        return len(self._lists)

    def __iter__(self):
        return iter(self._lists)

    def __eq__(self, other) -> bool:
        return isinstance(other, ListAssignment) and self._lists == other._lists

    def __hash__(self) -> int:
        return hash(self._lists)

    def __repr__(self) -> str:
        if self.is_uniform:
            return f"ListAssignment.uniform_k(n={self.n}, k={self.k})"
        return f"ListAssignment(sizes={self.sizes()})"

    def to_json(self) -> List[List[int]]:
        return [sorted(c) for c in self._lists]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[int]]) -> "ListAssignment":
        return cls(data)

    def check_graph(self, g: Graph) -> None:
        if self.n != g.n:
            raise InfeasibleParametersError(f"list-assignment covers {self.n} vertices, graph has {g.n}")


class Colouring(tuple):
    """Per-vertex colour or ``None`` (uncoloured)"""

    def __new__(cls, entries: Iterable[Optional[int]] = ()):
        return super().__new__(cls, (None if c is None else int(c) for c in entries))

    @classmethod
    def empty(cls, n: int) -> "Colouring":
        return cls([None] * n)

    @property
    def is_total(self) -> bool:
        return all(c is not None for c in self)

    def uncoloured(self) -> List[int]:
        return [v for v, c in enumerate(self) if c is None]

    def coloured(self) -> List[int]:
        return [v for v, c in enumerate(self) if c is not None]

    def with_colour(self, v: int, colour: Optional[int]) -> "Colouring":
        entries = list(self)
        entries[v] = colour
        return Colouring(entries)

    def with_colours(self, updates: dict) -> "Colouring":
        entries = list(self)
        for v, colour in updates.items():
            entries[v] = colour
        return Colouring(entries)

    def restrict(self, vertices: Iterable[int]) -> "Colouring":
        """Keep colours on ``vertices``; every other vertex becomes uncoloured"""
        keep = set(vertices)
        return Colouring(c if v in keep else None for v, c in enumerate(self))

    def to_json(self) -> List[Optional[int]]:
        return list(self)

    @classmethod
    def from_json(cls, data: Sequence[Optional[int]]) -> "Colouring":
        return cls(data)

    def __repr__(self) -> str:
        return f"Colouring({list(self)})"


@dataclass(frozen=True)
class AvailableList:
    """L_sigma(v) and its order l_sigma(v)"""

    vertex: int
    colours: frozenset

    @property
    def size(self) -> int:
        return len(self.colours)


def _check_domain(g: Graph, L: ListAssignment, sigma: Colouring) -> None:
    L.check_graph(g)
    if len(sigma) != g.n:
        raise InfeasibleParametersError(f"colouring has {len(sigma)} entries, graph has {g.n} vertices")


def is_proper(g: Graph, L: ListAssignment, sigma: Colouring) -> bool:
    """Every coloured vertex uses a listed colour and no edge is monochromatic"""
    _check_domain(g, L, sigma)
    for v, c in enumerate(sigma):
        if c is not None and c not in L[v]:
            return False
    return all(sigma[u] is None or sigma[u] != sigma[v] for u, v in g.edges)


def validate_colouring(g: Graph, L: ListAssignment, sigma: Colouring, total: bool = False) -> None:
    """Raise :class:`ImproperColouringError` unless sigma is proper (and total when asked)"""
    if not is_proper(g, L, sigma):
        raise ImproperColouringError(f"colouring {list(sigma)} is not a proper L-colouring")
    if total and not sigma.is_total:
        raise ImproperColouringError(f"colouring leaves vertices {sigma.uncoloured()} uncoloured")


def available_colours(g: Graph, L: ListAssignment, sigma: Sequence[Optional[int]], v: int) -> frozenset:
    """L(v) minus colours of coloured neighbours, without validation"""
    return L[v].difference(sigma[u] for u in g.adjacency[v] if sigma[u] is not None)


def available_list(g: Graph, L: ListAssignment, sigma: Colouring, v: int) -> AvailableList:
    v = g.check_vertex(v)
    _check_domain(g, L, sigma)
    return AvailableList(v, available_colours(g, L, sigma, v))


def hamming_distance(sigma: Sequence[Optional[int]], tau: Sequence[Optional[int]]) -> int:
    if len(sigma) != len(tau):
        raise InfeasibleParametersError(f"colourings on {len(sigma)} and {len(tau)} vertices")
    return sum(1 for a, b in zip(sigma, tau) if a != b)
