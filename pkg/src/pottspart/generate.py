"""Deterministic test-instance generators.

Each generator returns a :class:`~pottspart.graphs.Graph` and is reproducible
from its arguments (plus a seed where randomness is involved).  A small
``name(arg, ...)`` spec language selects a generator from the command line:

- ``cycle(n)`` — the n-cycle.
- ``complete(n)`` — the complete graph K_n.
- ``clique-chain(t, s, bridges)`` — t copies of K_s in a row, consecutive
  copies joined by the given number of vertex-disjoint bridge edges.
- ``random-regular(n, d)`` — a uniformly random simple d-regular graph via
  the pairing model with rejection (seeded).
"""

from __future__ import annotations

import itertools
import random
import re

from .errors import BudgetError, ParseError, PreconditionError
from .graphs import Graph

__all__ = [
    "clique_chain",
    "complete_graph",
    "cycle_graph",
    "generate_graph",
    "parse_generator_spec",
    "random_regular",
]

PAIRING_ATTEMPT_BUDGET = 10_000


def cycle_graph(n: int) -> Graph:
    """The cycle on n >= 3 vertices."""
    if n < 3:
        raise PreconditionError(f"a cycle needs at least 3 vertices, got {n}")
    return Graph.from_edges([(v, (v + 1) % n) for v in range(n)])


def complete_graph(n: int) -> Graph:
    """The complete graph on n >= 2 vertices."""
    if n < 2:
        raise PreconditionError(
            f"a complete graph needs at least 2 vertices, got {n}"
        )
    return Graph.from_edges(list(itertools.combinations(range(n), 2)))


def clique_chain(t: int, s: int, bridges: int) -> Graph:
    """t copies of K_s in a row with `bridges` edges between neighbours.

    Copy i occupies vertices [i*s, (i+1)*s).  The c-th bridge between copies
    i and i+1 joins vertex i*s + (s-1-c) to vertex (i+1)*s + c, so bridge
    endpoints are distinct within each copy as long as bridges <= s.
    """
    if t < 1:
        raise PreconditionError(f"a clique chain needs at least 1 clique, got {t}")
    if s < 2:
        raise PreconditionError(f"cliques need at least 2 vertices, got size {s}")
    if not 0 <= bridges <= s:
        raise PreconditionError(
            f"bridge count must be between 0 and the clique size {s}, got {bridges}"
        )
    edges: list[tuple[int, int]] = []
    for i in range(t):
        edges.extend(
            (i * s + a, i * s + b) for a, b in itertools.combinations(range(s), 2)
        )
    for i in range(t - 1):
        edges.extend(
            (i * s + (s - 1 - c), (i + 1) * s + c) for c in range(bridges)
        )
    return Graph.from_edges(edges)


def random_regular(n: int, d: int, seed: int = 0) -> Graph:
    """A uniformly random simple d-regular graph on n vertices.

    Pairing model: shuffle n*d vertex stubs, pair them off, and reject the
    pairing whenever it produces a loop or a repeated edge.  Conditioned on
    acceptance the simple graph is uniform.  Acceptance odds decay roughly
    like exp(-(d*d-1)/4), so the attempt budget only matters for dense d.
    """
    if n < 2:
        raise PreconditionError(f"need at least 2 vertices, got {n}")
    if d < 1:
        raise PreconditionError(f"degree must be at least 1, got {d}")
    if d >= n:
        raise PreconditionError(
            f"degree {d} is impossible on {n} vertices (needs d < n)"
        )
    if n * d % 2:
        raise PreconditionError(
            f"no {d}-regular graph on {n} vertices exists: n*d is odd"
        )
    rng = random.Random(seed)
    stubs = [v for v in range(n) for _ in range(d)]
    for _ in range(PAIRING_ATTEMPT_BUDGET):
        rng.shuffle(stubs)
        edges: set[tuple[int, int]] = set()
        for i in range(0, len(stubs), 2):
            a, b = stubs[i], stubs[i + 1]
            if a == b or (min(a, b), max(a, b)) in edges:
                break
            edges.add((min(a, b), max(a, b)))
        else:
            return Graph.from_edges(sorted(edges))
    raise BudgetError(
        f"rejection sampling found no simple {d}-regular pairing on {n} "
        f"vertices in {PAIRING_ATTEMPT_BUDGET} attempts"
    )


_SPEC_RE = re.compile(r"^\s*([a-z][a-z-]*)\s*\(\s*([0-9,\s]*)\)\s*$")

_GENERATORS: dict[str, tuple[int, bool]] = {
    # name -> (argument count, takes a seed)
    "cycle": (1, False),
    "complete": (1, False),
    "clique-chain": (3, False),
    "random-regular": (2, True),
}


def parse_generator_spec(spec: str) -> tuple[str, tuple[int, ...]]:
    """Parse ``name(int, ...)`` into (name, args); raises ParseError."""
    match = _SPEC_RE.match(spec)
    if not match:
        raise ParseError(
            f"bad generator spec {spec!r}: expected name(int, ...) such as "
            f"cycle(6) or random-regular(10,3)"
        )
    name = match.group(1)
    if name not in _GENERATORS:
        known = ", ".join(sorted(_GENERATORS))
        raise ParseError(f"unknown generator {name!r} (known: {known})")
    body = match.group(2).strip()
    if body:
        try:
            args = tuple(int(tok) for tok in body.split(","))
        except ValueError:
            raise ParseError(
                f"bad generator spec {spec!r}: arguments must be integers"
            ) from None
    else:
        args = ()
    want = _GENERATORS[name][0]
    if len(args) != want:
        raise ParseError(
            f"generator {name!r} takes {want} argument(s), got {len(args)}"
        )
    return name, args


def generate_graph(spec: str, seed: int = 0) -> Graph:
    """Build the graph described by a generator spec string."""
    name, args = parse_generator_spec(spec)
    if name == "cycle":
        return cycle_graph(*args)
    if name == "complete":
        return complete_graph(*args)
    if name == "clique-chain":
        return clique_chain(*args)
    return random_regular(*args, seed=seed)
