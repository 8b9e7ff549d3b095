"""Finite weighted graphs for the ballistic deposition model.

Vertices are the dense integers ``0..n-1``.  Every vertex carries a positive
integer intensity (the rate multiplier of its Poisson clock); equivalent
vertices, i.e. vertices with identical closed neighbourhoods, can be merged
into one vertex whose intensity is the class size and split back again by
vertex cloning.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Graph",
    "GraphMetrics",
    "closed_neighbourhood",
    "metrics",
    "non_decreasing_permutation",
    "reduce_irreducible",
    "clone_vertices",
    "is_subgraph",
    "cycle",
    "path",
    "star",
    "complete",
    "cocktail_party",
    "butterfly",
    "petersen",
    "theorem1_family",
    "from_family",
    "load_graph",
    "dump_graph",
    "canonical_form",
    "is_isomorphic",
]

INF = math.inf


def _check_vertex(n: int, x) -> int:
    if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, np.integer)):
        raise ValueError(f"vertex id must be an integer, got {x!r}")
    if not 0 <= x < n:
        raise ValueError(f"vertex {x} out of range for a graph on {n} vertices")
    return int(x)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable connected graph with positive integer vertex intensities.

    Parameters
    ----------
    vertex_count : int
        Number of vertices; ids are ``0..vertex_count-1``.
    edges : iterable of pairs
        Undirected edges.  Duplicates and either orientation are accepted.
    intensities : sequence of int, optional
        Poisson rate multipliers, default all ones.
    labels : sequence of str, optional
        Display names.
    """

    vertex_count: int
    edges: frozenset = field(default_factory=frozenset)
    intensities: tuple = ()
    labels: tuple | None = None

    def __init__(self, vertex_count: int, edges: Iterable = (), intensities=None, labels=None):
        n = int(vertex_count)
        if n < 1:
            raise ValueError("a graph needs at least one vertex")
        es = set()
        for e in edges:
            a, b = e
            a = _check_vertex(n, a)
            b = _check_vertex(n, b)
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            es.add((min(a, b), max(a, b)))
        if intensities is None:
            ints = (1,) * n
        else:
            ints = tuple(int(w) for w in intensities)
            if len(ints) != n:
                raise ValueError("need one intensity per vertex")
            if any(w < 1 for w in ints):
                raise ValueError("intensities must be positive integers")
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != n:
                raise ValueError("need one label per vertex")
        object.__setattr__(self, "vertex_count", n)
        object.__setattr__(self, "edges", frozenset(es))
        object.__setattr__(self, "intensities", ints)
        object.__setattr__(self, "labels", labels)
        nbrs = [[] for _ in range(n)]
        for a, b in sorted(es):
            nbrs[a].append(b)
            nbrs[b].append(a)
        object.__setattr__(self, "_nbrs", tuple(tuple(sorted(v)) for v in nbrs))
        if not self._connected():
            raise ValueError("graph must be connected")

    def _connected(self) -> bool:
        seen = {0}
        todo = [0]
        while todo:
            x = todo.pop()
            for y in self._nbrs[x]:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        return len(seen) == self.vertex_count

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.vertex_count == other.vertex_count
            and self.edges == other.edges
            and self.intensities == other.intensities
        )

    def __hash__(self):
        return hash((self.vertex_count, self.edges, self.intensities))

    def __repr__(self):
        w = "" if self.is_unit else f", intensities={list(self.intensities)}"
        return f"Graph(n={self.vertex_count}, edges={sorted(self.edges)}{w})"

    @property
    def n(self) -> int:
        return self.vertex_count

    @property
    def is_unit(self) -> bool:
        return all(w == 1 for w in self.intensities)

    @property
    def total_intensity(self) -> int:
        return sum(self.intensities)

    def neighbours(self, x) -> tuple:
        return self._nbrs[_check_vertex(self.vertex_count, x)]

    def degree(self, x) -> int:
        return len(self.neighbours(x))

    def closed(self, x) -> frozenset:
        x = _check_vertex(self.vertex_count, x)
        return frozenset(self._nbrs[x]) | {x}

    def has_edge(self, a, b) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def adjacency_matrix(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=np.int64)
        for a, b in self.edges:
            A[a, b] = A[b, a] = 1
        return A

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Open-neighbourhood adjacency as ``(indptr, indices)`` int64 arrays."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        for x in range(self.n):
            indptr[x + 1] = indptr[x] + len(self._nbrs[x])
        indices = np.fromiter(
            itertools.chain.from_iterable(self._nbrs), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices

    def with_intensities(self, intensities) -> "Graph":
        return Graph(self.n, self.edges, intensities, self.labels)


@dataclass(frozen=True)
class GraphMetrics:
    max_degree: int
    girth: float
    is_regular: bool
    distances: np.ndarray

    def as_dict(self) -> dict:
        return {
            "max_degree": self.max_degree,
            "girth": None if self.girth == INF else int(self.girth),
            "is_regular": self.is_regular,
            "distances": self.distances.tolist(),
        }


def closed_neighbourhood(g: Graph, x) -> frozenset:
    """Return ``{x}`` together with all neighbours of ``x``."""
    return g.closed(x)


def _bfs(g: Graph, root: int) -> list[int]:
    dist = [-1] * g.n
    dist[root] = 0
    q = deque([root])
    while q:
        x = q.popleft()
        for y in g._nbrs[x]:
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def _girth(g: Graph) -> float:
    # BFS from every root; the shortest non-tree edge closes a shortest cycle
    # for at least one root, so the minimum over roots is exact.
    best = INF
    for r in range(g.n):
        dist = [-1] * g.n
        parent = [-1] * g.n
        dist[r] = 0
        q = deque([r])
        while q:
            x = q.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for y in g._nbrs[x]:
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    q.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    return best


def metrics(g: Graph) -> GraphMetrics:
    degs = [len(v) for v in g._nbrs]
    D = np.array([_bfs(g, r) for r in range(g.n)], dtype=np.int64)
    return GraphMetrics(
        max_degree=max(degs),
        girth=_girth(g),
        is_regular=len(set(degs)) == 1,
        distances=D,
    )


def non_decreasing_permutation(g: Graph, root) -> list[int]:
    """Vertices ordered by hop distance from ``root``, ties by ascending id."""
    root = _check_vertex(g.n, root)
    dist = _bfs(g, root)
    return sorted(range(g.n), key=lambda v: (dist[v], v))


def reduce_irreducible(g: Graph) -> Graph:
    """Merge vertices with equal closed neighbourhoods, summing intensities.

    Classes are numbered by their smallest member, so the result is
    deterministic and ``reduce_irreducible`` is idempotent.
    """
    classes: dict[frozenset, list[int]] = {}
    for x in range(g.n):
        classes.setdefault(g.closed(x), []).append(x)
    groups = sorted(classes.values(), key=lambda c: c[0])
    index = {}
    for i, grp in enumerate(groups):
        for x in grp:
            index[x] = i
    edges = {(index[a], index[b]) for a, b in g.edges if index[a] != index[b]}
    ints = [sum(g.intensities[x] for x in grp) for grp in groups]
    labels = None
    if g.labels is not None:
        labels = ["+".join(g.labels[x] for x in grp) for grp in groups]
    return Graph(len(groups), edges, ints, labels)


def clone_vertices(g: Graph, copies=None) -> Graph:
    """Expand ``g`` into a unit-intensity graph by vertex cloning.

    Vertex ``x`` ends up with ``intensities[x] * copies[x]`` representatives,
    all sharing ``x``'s closed neighbourhood.  Original vertices keep their
    ids; clones are appended in order of ``x`` then copy index.
    """
    if copies is None:
        copies = [1] * g.n
    elif isinstance(copies, (int, np.integer)):
        copies = [int(copies)] * g.n
    copies = [int(c) for c in copies]
    if len(copies) != g.n:
        raise ValueError("need one copy count per vertex")
    if any(c < 1 for c in copies):
        raise ValueError("copy counts must be >= 1")
    reps = [[x] for x in range(g.n)]
    nxt = g.n
    for x in range(g.n):
        for _ in range(g.intensities[x] * copies[x] - 1):
            reps[x].append(nxt)
            nxt += 1
    edges = set()
    for x in range(g.n):
        for a, b in itertools.combinations(reps[x], 2):
            edges.add((a, b))
    for x, y in g.edges:
        for a in reps[x]:
            for b in reps[y]:
                edges.add((a, b))
    return Graph(nxt, edges)


def is_subgraph(g: Graph, h: Graph, embedding=None) -> bool:
    """True iff every edge of ``g`` maps onto an edge of ``h``."""
    if embedding is None:
        embedding = range(g.n)
    emb = _embedding(g, h, embedding)
    return all(h.has_edge(emb[a], emb[b]) for a, b in g.edges)


def _embedding(g: Graph, h: Graph, embedding) -> list[int]:
    if embedding is None:
        emb = list(range(g.n))
    elif isinstance(embedding, Mapping):
        emb = [embedding[x] for x in range(g.n)]
    else:
        emb = list(embedding)
    if len(emb) != g.n:
        raise ValueError("embedding must map every vertex of g")
    emb = [_check_vertex(h.n, y) for y in emb]
    if len(set(emb)) != len(emb):
        raise ValueError("embedding is not injective")
    return emb


# -- families ---------------------------------------------------------------

def cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    if n < 1:
        raise ValueError("path needs n >= 1")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def star(n: int) -> Graph:
    """Star on ``n`` vertices with centre 0."""
    if n < 1:
        raise ValueError("star needs n >= 1")
    return Graph(n, [(0, i) for i in range(1, n)])


def complete(n: int) -> Graph:
    if n < 1:
        raise ValueError("complete graph needs n >= 1")
    return Graph(n, itertools.combinations(range(n), 2))


def _cocktail_edges(m: int, offset: int = 0, n: int = 1):
    # vertex (v, c) -> offset + v*n + c; v and v^1 form the removed matching
    edges = []
    ids = [[offset + v * n + c for c in range(n)] for v in range(m)]
    for v in range(m):
        edges.extend(itertools.combinations(ids[v], 2))
        for w in range(v + 1, m):
            if w != v ^ 1:
                edges.extend((a, b) for a in ids[v] for b in ids[w])
    return edges


def cocktail_party(m: int) -> Graph:
    """Complete graph on ``m`` vertices minus the matching ``{2i, 2i+1}``."""
    if m < 2 or m % 2:
        raise ValueError("cocktail party graph needs even m >= 2")
    return Graph(m, _cocktail_edges(m))


def butterfly() -> Graph:
    """Two triangles sharing vertex 0."""
    return Graph(5, [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)])


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, outer + spokes + inner)


def theorem1_family(N: int, n: int, m: int) -> Graph:
    """Cocktail party graph on ``m`` vertices, each cloned to ``n`` copies,
    joined to ``N`` dominant vertices (ids ``0..N-1``)."""
    if N < 0 or n < 1 or m < 2 or m % 2:
        raise ValueError("need N >= 0, n >= 1 and even m >= 2")
    if m == 2 and N < 1:
        raise ValueError("m = 2 requires N >= 1")
    total = N + n * m
    edges = list(itertools.combinations(range(N), 2))
    edges += [(x, y) for x in range(N) for y in range(N, total)]
    edges += _cocktail_edges(m, offset=N, n=n)
    return Graph(total, edges)


_FAMILIES = {
    "cycle": cycle,
    "path": path,
    "star": star,
    "complete": complete,
    "cocktail": cocktail_party,
    "cocktail_party": cocktail_party,
    "butterfly": butterfly,
    "petersen": petersen,
    "theorem1": theorem1_family,
}


def from_family(spec: str) -> Graph:
    """Build a graph from a name string such as ``"cycle:7"`` or ``"theorem1:1,2,2"``."""
    name, _, args = spec.strip().partition(":")
    name = name.strip().lower()
    if name not in _FAMILIES:
        raise ValueError(f"unknown graph family {name!r}; known: {sorted(_FAMILIES)}")
    try:
        params = [int(a) for a in args.split(",")] if args.strip() else []
    except ValueError:
        raise ValueError(f"bad parameters in graph spec {spec!r}") from None
    try:
        return _FAMILIES[name](*params)
    except TypeError:
        raise ValueError(f"wrong number of parameters in graph spec {spec!r}") from None


def load_graph(source) -> Graph:
    """Read a graph from a JSON file or a family string.

    The file schema is ``{"vertices": int, "edges": [[a, b], ...],
    "intensities": [int, ...], "labels": [str, ...]}``; the last two keys
    are optional.
    """
    p = Path(str(source))
    if not p.suffix == ".json" and not p.exists():
        return from_family(str(source))
    try:
        doc = json.loads(p.read_text())
        return Graph(
            doc["vertices"],
            [tuple(e) for e in doc.get("edges", [])],
            doc.get("intensities"),
            doc.get("labels"),
        )
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed graph file {p}: {exc}") from exc


def dump_graph(g: Graph) -> str:
    doc = {"vertices": g.n, "edges": [list(e) for e in sorted(g.edges)]}
    if not g.is_unit:
        doc["intensities"] = list(g.intensities)
    if g.labels is not None:
        doc["labels"] = list(g.labels)
    return json.dumps(doc)


def canonical_form(g: Graph) -> tuple:
    """Brute-force canonical form; only meant for graphs up to 8 vertices."""
    if g.n > 8:
        raise ValueError("canonical_form is limited to 8 vertices")
    best = None
    for perm in itertools.permutations(range(g.n)):
        ints = tuple(g.intensities[perm.index(i)] for i in range(g.n))
        es = tuple(sorted((min(perm[a], perm[b]), max(perm[a], perm[b])) for a, b in g.edges))
        key = (ints, es)
        if best is None or key < best:
            best = key
    return (g.n,) + best


def is_isomorphic(g: Graph, h: Graph) -> bool:
    if g.n != h.n or len(g.edges) != len(h.edges):
        return False
    if sorted(g.intensities) != sorted(h.intensities):
        return False
    if sorted(map(len, g._nbrs)) != sorted(map(len, h._nbrs)):
        return False
    return canonical_form(g) == canonical_form(h)
