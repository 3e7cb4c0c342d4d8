"""Undirected simple graphs and exact combinatorial set quantities.

Vertices are 0..n-1. Graphs are simple (no self-loops, no parallel edges),
undirected, and — unless explicitly permitted — free of isolated vertices.
All set quantities (volume, boundary, closure, cut counts, conductance) are
exact integer/rational computations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ParseError, PreconditionError
from .util import as_fraction

VertexSet = Iterable[int]

_ALPHA_EXPANDER_MAX_N = 20


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph with sorted adjacency lists."""

    n: int
    adj: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...]
    degrees: tuple[int, ...]
    m: int
    adj_masks: tuple[int, ...]

    @staticmethod
    def from_edges(
        edges: Iterable[tuple[int, int]],
        n: int | None = None,
        allow_isolated: bool = False,
    ) -> "Graph":
        edge_set: set[tuple[int, int]] = set()
        max_v = -1
        for u, v in edges:
            if u == v:
                raise PreconditionError(f"self-loop at vertex {u}")
            if u < 0 or v < 0:
                raise PreconditionError(f"negative vertex id in edge {u} {v}")
            e = (u, v) if u < v else (v, u)
            if e in edge_set:
                raise PreconditionError(f"duplicate edge {e[0]} {e[1]}")
            edge_set.add(e)
            max_v = max(max_v, u, v)
        if n is None:
            n = max_v + 1
        elif max_v >= n:
            raise PreconditionError(
                f"edge endpoint {max_v} out of range for declared n={n}"
            )
        if n <= 0 or not edge_set:
            if allow_isolated and n is not None and n > 0:
                sorted_edges: tuple[tuple[int, int], ...] = ()
                adj: tuple[tuple[int, ...], ...] = tuple(() for _ in range(n))
                degrees = tuple(0 for _ in range(n))
                masks = tuple(0 for _ in range(n))
                return Graph(n, adj, sorted_edges, degrees, 0, masks)
            raise PreconditionError("graph must have at least one edge")
        neigh: list[list[int]] = [[] for _ in range(n)]
        for u, v in edge_set:
            neigh[u].append(v)
            neigh[v].append(u)
        if not allow_isolated:
            for v in range(n):
                if not neigh[v]:
                    raise PreconditionError(f"vertex {v} is isolated")
        adj = tuple(tuple(sorted(ns)) for ns in neigh)
        degrees = tuple(len(ns) for ns in adj)
        masks_l = []
        for v in range(n):
            mk = 0
            for u in adj[v]:
                mk |= 1 << u
            masks_l.append(mk)
        sorted_edges = tuple(sorted(edge_set))
        return Graph(n, adj, sorted_edges, degrees, len(edge_set), tuple(masks_l))

    @property
    def max_degree(self) -> int:
        return max(self.degrees)

    def degree(self, v: int) -> int:
        return self.degrees[v]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj_masks[u] >> v & 1)


def _vertex_tuple(g: Graph, s: VertexSet) -> tuple[int, ...]:
    vs = sorted(set(s))
    if vs and (vs[0] < 0 or vs[-1] >= g.n):
        raise PreconditionError(f"vertex set {vs} out of range for n={g.n}")
    return tuple(vs)


def mask_of(g: Graph, s: VertexSet) -> int:
    mk = 0
    for v in _vertex_tuple(g, s):
        mk |= 1 << v
    return mk


def vertices_of_mask(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def parse_graph(text: str) -> Graph:
    """Parse an edge-list: one "u v" pair per line.

    Blank lines and lines starting with '#' are ignored.  An optional first
    data line may be a header "n m"; it is recognized as a header exactly when
    interpreting it that way is consistent (exactly m subsequent edge lines,
    every endpoint < n).  The canonical serializer emits no header and always
    emits vertex 0 in the first edge, so serialized graphs never parse as
    headered input.
    """
    rows: list[tuple[int, int, int]] = []  # (lineno, a, b)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(
                f"line {lineno}: expected two integers, got {line!r}"
            )
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(
                f"line {lineno}: expected two integers, got {line!r}"
            ) from None
        if a < 0 or b < 0:
            raise ParseError(f"line {lineno}: negative vertex id in {line!r}")
        rows.append((lineno, a, b))
    if not rows:
        raise ParseError("no edges: empty graph text")

    head_n, head_m = rows[0][1], rows[0][2]
    body = rows[1:]
    declared_n: int | None = None
    if head_n >= 1 and head_m == len(body) and all(
        u < head_n and v < head_n for _, u, v in body
    ):
        declared_n = head_n
        rows = body
        if not rows:
            raise ParseError("no edges: header present but zero edge lines")

    edge_set: set[tuple[int, int]] = set()
    for lineno, u, v in rows:
        if u == v:
            raise ParseError(f"line {lineno}: self-loop {u} {v}")
        e = (u, v) if u < v else (v, u)
        if e in edge_set:
            raise ParseError(f"line {lineno}: duplicate edge {u} {v}")
        edge_set.add(e)
    try:
        return Graph.from_edges(edge_set, n=declared_n)
    except PreconditionError as exc:
        raise ParseError(str(exc)) from None


def serialize_graph(g: Graph) -> str:
    """Canonical edge-list text: sorted "u v" lines, trailing newline."""
    return "".join(f"{u} {v}\n" for u, v in g.edges)


def volume(g: Graph, s: VertexSet) -> int:
    """Sum of degrees over the set (degrees in g)."""
    return sum(g.degrees[v] for v in _vertex_tuple(g, s))


def total_volume(g: Graph) -> int:
    return 2 * g.m


def cross_edges(g: Graph, s: VertexSet, t: VertexSet) -> int:
    """Number of edges with one endpoint in s and the other in t \\ s."""
    s_mask = mask_of(g, s)
    t_mask = mask_of(g, t)
    target = t_mask & ~s_mask
    count = 0
    mk = s_mask
    while mk:
        low = mk & -mk
        v = low.bit_length() - 1
        mk ^= low
        count += (g.adj_masks[v] & target).bit_count()
    return count


def cross_edges_mask(g: Graph, s_mask: int, t_mask: int) -> int:
    """Mask-based variant of cross_edges (sets given as bitmasks)."""
    target = t_mask & ~s_mask
    count = 0
    mk = s_mask
    while mk:
        low = mk & -mk
        v = low.bit_length() - 1
        mk ^= low
        count += (g.adj_masks[v] & target).bit_count()
    return count


def boundary_size(g: Graph, s: VertexSet) -> int:
    """Number of edges with exactly one endpoint in s."""
    s_mask = mask_of(g, s)
    return boundary_size_mask(g, s_mask)


def boundary_size_mask(g: Graph, s_mask: int) -> int:
    count = 0
    mk = s_mask
    while mk:
        low = mk & -mk
        v = low.bit_length() - 1
        mk ^= low
        count += (g.adj_masks[v] & ~s_mask).bit_count()
    return count


def closure_size(g: Graph, s: VertexSet) -> int:
    """Number of edges with at least one endpoint in s."""
    s_mask = mask_of(g, s)
    inside2 = 0
    outward = 0
    mk = s_mask
    while mk:
        low = mk & -mk
        v = low.bit_length() - 1
        mk ^= low
        inside2 += (g.adj_masks[v] & s_mask).bit_count()
        outward += (g.adj_masks[v] & ~s_mask).bit_count()
    return inside2 // 2 + outward


def set_conductance(g: Graph, s: VertexSet) -> Fraction:
    """|boundary(s)| / vol(s) as an exact rational."""
    vs = _vertex_tuple(g, s)
    if not vs:
        raise PreconditionError("conductance of the empty set is undefined")
    vol = volume(g, vs)
    if vol == 0:
        raise PreconditionError(
            "conductance undefined: set has zero volume (all vertices isolated)"
        )
    return Fraction(boundary_size(g, vs), vol)


def induced_subgraph(
    g: Graph, s: VertexSet, allow_isolated: bool = False
) -> tuple[Graph, tuple[int, ...]]:
    """Subgraph induced on s, relabelled 0..|s|-1 in sorted vertex order.

    Returns (subgraph, vertices) where vertices[i] is the original id of the
    subgraph's vertex i.
    """
    vs = _vertex_tuple(g, s)
    if not vs:
        raise PreconditionError("induced subgraph of the empty set")
    index = {v: i for i, v in enumerate(vs)}
    s_mask = mask_of(g, vs)
    sub_edges = []
    for v in vs:
        mk = g.adj_masks[v] & s_mask
        while mk:
            low = mk & -mk
            u = low.bit_length() - 1
            mk ^= low
            if u > v:
                sub_edges.append((index[v], index[u]))
    sub = Graph.from_edges(sub_edges, n=len(vs), allow_isolated=allow_isolated)
    return sub, vs


def components(g: Graph) -> list[tuple[int, ...]]:
    """Connected components as sorted vertex tuples, sorted by first vertex."""
    seen = [False] * g.n
    comps: list[tuple[int, ...]] = []
    for start in range(g.n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in g.adj[v]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        comps.append(tuple(sorted(comp)))
    return comps


def is_connected(g: Graph) -> bool:
    return len(components(g)) == 1


def is_alpha_expander(
    g: Graph, alpha: int | float | Fraction
) -> tuple[bool, tuple[int, ...] | None]:
    """Exhaustively check |boundary(S)| >= alpha*|S| for all |S| <= n/2.

    Exact rational comparison.  Only for n <= 20.  On failure returns the
    violating set that comes first in ascending-bitmask order.
    """
    if g.n > _ALPHA_EXPANDER_MAX_N:
        raise PreconditionError(
            f"is_alpha_expander is exhaustive and capped at n <= "
            f"{_ALPHA_EXPANDER_MAX_N} (got n={g.n})"
        )
    a = as_fraction(alpha)
    if a < 0:
        raise PreconditionError("alpha must be nonnegative")
    num, den = a.numerator, a.denominator
    half = g.n  # condition 2|S| <= n
    for mask in range(1, 1 << g.n):
        size = mask.bit_count()
        if 2 * size > half:
            continue
        bnd = boundary_size_mask(g, mask)
        # bnd >= (num/den) * size  <=>  bnd*den >= num*size
        if bnd * den < num * size:
            return False, vertices_of_mask(mask)
    return True, None
