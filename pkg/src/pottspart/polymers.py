"""Polymer models over partitioned graphs.

A *polymer* is a connected vertex set that occupies at most half of every
part of a given vertex partition.  Polymers carry positive weights derived
from a restricted colouring sum, and the log of the resulting polymer
partition function is approximated by a truncated cluster expansion whose
convergence is guarded by an explicit summability condition.

Colours are 0-based everywhere: a ground state assigns one colour in
``range(q)`` to each part.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import BudgetError, PreconditionError
from .graphs import Graph, closure_size
from .util import log_sum_exp

__all__ = [
    "Polymer",
    "Cluster",
    "ClusterExpansion",
    "TruncatedXi",
    "normalize_parts",
    "part_index_of",
    "is_small",
    "is_sparse",
    "enumerate_polymers",
    "boundary_edge_set",
    "compatible",
    "restricted_log_partition",
    "polymer_log_weight",
    "polymer_log_weights",
    "check_weight_bounds",
    "kp_margin",
    "kp_condition_holds",
    "kp_sufficient_beta",
    "truncation_depth",
    "truncated_log_xi",
    "POLYMER_SIZE_CAP",
]

POLYMER_SIZE_CAP = 20
POLYMER_COUNT_BUDGET = 200_000
RESTRICTED_TERM_BUDGET = 50_000_000
CLUSTER_BUDGET = 5_000_000

# exp(x) is exactly 0.0 below this, so pruning such cluster terms from an
# fsum is bit-identical to summing them.
_EXP_ZERO_LOG = -746.0


# ---------------------------------------------------------------------------
# partitions and ground states
# ---------------------------------------------------------------------------


def normalize_parts(
    g: Graph, parts: Sequence[Iterable[int]]
) -> tuple[tuple[int, ...], ...]:
    """Validate that ``parts`` partitions V(g); return sorted-tuple parts.

    Part order is preserved (ground states index into it); vertices within a
    part are sorted.
    """
    norm = []
    seen = 0
    for idx, part in enumerate(parts):
        vs = tuple(sorted(part))
        if not vs:
            raise PreconditionError(f"part {idx} is empty")
        mask = 0
        for v in vs:
            if not (0 <= v < g.n):
                raise PreconditionError(f"part {idx} contains invalid vertex {v}")
            mask |= 1 << v
        if len(vs) != mask.bit_count():
            raise PreconditionError(f"part {idx} repeats a vertex")
        if mask & seen:
            raise PreconditionError(f"part {idx} overlaps an earlier part")
        seen |= mask
        norm.append(vs)
    if seen != (1 << g.n) - 1:
        raise PreconditionError("parts do not cover every vertex")
    return tuple(norm)


def part_index_of(g: Graph, parts: Sequence[Sequence[int]]) -> list[int]:
    """Map each vertex to the index of its part."""
    owner = [-1] * g.n
    for idx, part in enumerate(parts):
        for v in part:
            owner[v] = idx
    return owner


def _validate_ground_state(parts: Sequence[Sequence[int]], psi: Sequence[int], q: int):
    if q < 2:
        raise PreconditionError(f"q must be at least 2, got {q}")
    psi = tuple(psi)
    if len(psi) != len(parts):
        raise PreconditionError(
            f"ground state has {len(psi)} colours for {len(parts)} parts"
        )
    for c in psi:
        if not (0 <= c < q):
            raise PreconditionError(f"ground-state colour {c} outside range(0, {q})")
    return psi


def _as_vertex_tuple(g: Graph, u: Iterable[int]) -> tuple[int, ...]:
    vs = tuple(sorted(u))
    mask = 0
    for v in vs:
        if not (0 <= v < g.n):
            raise PreconditionError(f"invalid vertex {v}")
        mask |= 1 << v
    if mask.bit_count() != len(vs):
        raise PreconditionError("vertex set repeats a vertex")
    return vs


# ---------------------------------------------------------------------------
# smallness / sparseness
# ---------------------------------------------------------------------------


def is_small(u: Iterable[int], parts: Sequence[Sequence[int]]) -> bool:
    """True iff ``u`` occupies at most half of every part."""
    uset = set(u)
    for part in parts:
        inside = sum(1 for v in part if v in uset)
        if 2 * inside > len(part):
            return False
    return True


def is_sparse(g: Graph, u: Iterable[int], parts: Sequence[Sequence[int]]) -> bool:
    """True iff every connected component of ``g[u]`` is small."""
    uset = set(u)
    for v in uset:
        if not (0 <= v < g.n):
            raise PreconditionError(f"invalid vertex {v}")
    remaining = set(uset)
    while remaining:
        start = min(remaining)
        comp = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in g.adj[x]:
                if y in uset and y not in comp:
                    comp.add(y)
                    stack.append(y)
        if not is_small(comp, parts):
            return False
        remaining -= comp
    return True


# ---------------------------------------------------------------------------
# polymers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Polymer:
    """A connected small vertex set with cached geometry."""

    vertices: tuple[int, ...]
    mask: int
    closure_size: int  # number of edges with at least one endpoint inside
    neighbourhood_mask: int  # vertices at distance <= 1

    def __len__(self) -> int:
        return len(self.vertices)


def enumerate_polymers(
    g: Graph,
    parts: Sequence[Sequence[int]],
    max_size: int,
    *,
    budget: int = POLYMER_COUNT_BUDGET,
) -> list[Polymer]:
    """All connected small vertex sets of size <= max_size.

    Each set appears exactly once; the list is sorted lexicographically by
    sorted vertex tuple.
    """
    if max_size > POLYMER_SIZE_CAP:
        raise BudgetError(
            f"polymer size {max_size} exceeds enumeration cap {POLYMER_SIZE_CAP}"
        )
    parts = normalize_parts(g, parts)
    if max_size <= 0:
        return []
    part_masks = []
    part_sizes = []
    for part in parts:
        m = 0
        for v in part:
            m |= 1 << v
        part_masks.append(m)
        part_sizes.append(len(part))

    adj = g.adj_masks
    masks: list[int] = []

    def small_ok(mask: int) -> bool:
        for pm, sz in zip(part_masks, part_sizes):
            if 2 * (mask & pm).bit_count() > sz:
                return False
        return True

    def extend(sub: int, ext: int, gt_root: int, nbhd: int, size: int) -> None:
        masks.append(sub)
        if len(masks) > budget:
            raise BudgetError(
                f"more than {budget} polymers; the instance is too dense for "
                "this truncation depth"
            )
        if size == max_size:
            return
        while ext:
            wbit = ext & -ext
            ext ^= wbit
            w = wbit.bit_length() - 1
            new_sub = sub | wbit
            if not small_ok(new_sub):
                continue
            fresh = adj[w] & ~nbhd & ~wbit & gt_root
            extend(new_sub, ext | fresh, gt_root, nbhd | adj[w] | wbit, size + 1)

    full = (1 << g.n) - 1
    for v in range(g.n):
        vbit = 1 << v
        if not small_ok(vbit):
            continue
        gt_root = full ^ ((vbit << 1) - 1)  # vertices with index > v
        extend(vbit, adj[v] & gt_root, gt_root, adj[v] | vbit, 1)

    polymers = []
    for mask in masks:
        vs = tuple(v for v in range(g.n) if mask >> v & 1)
        nbhd = mask
        for v in vs:
            nbhd |= adj[v]
        polymers.append(
            Polymer(
                vertices=vs,
                mask=mask,
                closure_size=closure_size(g, vs),
                neighbourhood_mask=nbhd,
            )
        )
    polymers.sort(key=lambda p: p.vertices)
    return polymers


def boundary_edge_set(g: Graph, u: Iterable[int]) -> frozenset[tuple[int, int]]:
    """The set of edges with exactly one endpoint in ``u``."""
    vs = _as_vertex_tuple(g, u)
    inside = set(vs)
    out = set()
    for a in vs:
        for b in g.adj[a]:
            if b not in inside:
                out.add((a, b) if a < b else (b, a))
    return frozenset(out)


def compatible(g: Graph, first, second) -> bool:
    """True iff the two polymers are vertex-disjoint with disjoint boundaries."""
    a = first.vertices if isinstance(first, Polymer) else _as_vertex_tuple(g, first)
    b = second.vertices if isinstance(second, Polymer) else _as_vertex_tuple(g, second)
    if set(a) & set(b):
        return False
    return not (boundary_edge_set(g, a) & boundary_edge_set(g, b))


# ---------------------------------------------------------------------------
# restricted colouring sums and weights
# ---------------------------------------------------------------------------


def restricted_log_partition(
    g: Graph,
    parts: Sequence[Sequence[int]],
    psi: Sequence[int],
    u: Iterable[int],
    q: int,
    beta: float,
    *,
    cap: int = POLYMER_SIZE_CAP,
) -> float:
    """log of the boundary-conditioned colouring sum over ``u``.

    Sums, over all colourings of ``u`` that disagree with the ground state
    pointwise, the weight exp(beta * X) where X counts the edges touching
    ``u`` that are monochromatic under (colouring inside, ground state
    outside), plus the edges touching ``u`` whose endpoints already receive
    distinct ground-state colours.
    """
    parts = normalize_parts(g, parts)
    psi = _validate_ground_state(parts, psi, q)
    if beta < 0:
        raise PreconditionError(f"beta must be nonnegative, got {beta}")
    vs = _as_vertex_tuple(g, u)
    if not vs:
        return 0.0
    if len(vs) > cap:
        raise BudgetError(f"restricted sum over {len(vs)} vertices exceeds cap {cap}")
    n_terms = (q - 1) ** len(vs)
    if n_terms > RESTRICTED_TERM_BUDGET:
        raise BudgetError(
            f"restricted sum has {n_terms} terms, over budget {RESTRICTED_TERM_BUDGET}"
        )

    owner = part_index_of(g, parts)
    colour_of = [psi[owner[v]] for v in range(g.n)]
    local = {v: i for i, v in enumerate(vs)}
    inside = set(vs)

    internal: list[tuple[int, int]] = []  # local index pairs
    crossing: list[tuple[int, int]] = []  # (local index, outside ground colour)
    base = 0  # edges touching u that are bichromatic under the ground state
    for a, b in g.edges:
        a_in, b_in = a in inside, b in inside
        if not (a_in or b_in):
            continue
        if colour_of[a] != colour_of[b]:
            base += 1
        if a_in and b_in:
            internal.append((local[a], local[b]))
        elif a_in:
            crossing.append((local[a], colour_of[b]))
        else:
            crossing.append((local[b], colour_of[a]))

    allowed = []
    for v in vs:
        allowed.append(tuple(c for c in range(q) if c != colour_of[v]))

    max_x = base + len(internal) + len(crossing)
    counts = [0] * (max_x + 1)
    lam = [0] * len(vs)
    for digits in itertools.product(range(q - 1), repeat=len(vs)):
        for i, d in enumerate(digits):
            lam[i] = allowed[i][d]
        x = base
        for ia, ib in internal:
            if lam[ia] == lam[ib]:
                x += 1
        for ia, c in crossing:
            if lam[ia] == c:
                x += 1
        counts[x] += 1
    return log_sum_exp(
        [math.log(cnt) + beta * x for x, cnt in enumerate(counts) if cnt]
    )


def polymer_log_weight(
    g: Graph,
    parts: Sequence[Sequence[int]],
    psi: Sequence[int],
    gamma,
    q: int,
    beta: float,
) -> float:
    """log w = -beta * |edges touching gamma| + restricted log sum."""
    if isinstance(gamma, Polymer):
        vs = gamma.vertices
        closure = gamma.closure_size
    else:
        vs = _as_vertex_tuple(g, gamma)
        closure = closure_size(g, vs)
    log_r = restricted_log_partition(g, parts, psi, vs, q, beta)
    return -beta * closure + log_r


def polymer_log_weights(
    g: Graph,
    parts: Sequence[Sequence[int]],
    psi: Sequence[int],
    polymers: Sequence[Polymer],
    q: int,
    beta: float,
) -> list[float]:
    """Log-weights for a list of polymers under one ground state."""
    return [polymer_log_weight(g, parts, psi, p, q, beta) for p in polymers]


def check_weight_bounds(
    polymers: Sequence[Polymer],
    log_weights: Sequence[float],
    q: int,
    beta: float,
    alpha: float,
    *,
    tol: float = 1e-9,
) -> None:
    """Require log w <= |gamma| * (log(q-1) - beta*alpha) for every polymer.

    The convergence guarantee of the truncated expansion rests on this
    per-polymer bound; refusing loudly beats returning an unguaranteed
    number.
    """
    rate = math.log(q - 1) - beta * alpha
    for poly, lw in zip(polymers, log_weights):
        if lw > len(poly.vertices) * rate + tol:
            raise PreconditionError(
                "polymer weight bound violated: set "
                f"{poly.vertices} has log-weight {lw:.6g} above "
                f"{len(poly.vertices) * rate:.6g}; the truncation guarantee "
                "does not apply"
            )


# ---------------------------------------------------------------------------
# summability (convergence) condition
# ---------------------------------------------------------------------------


def kp_margin(q: int, max_degree: int, beta: float, alpha: float) -> float:
    """Slack of the convergence condition; nonpositive means it holds."""
    if q < 2:
        raise PreconditionError(f"q must be at least 2, got {q}")
    if max_degree < 1:
        raise PreconditionError(f"max degree must be positive, got {max_degree}")
    if alpha <= 0:
        raise PreconditionError(f"alpha must be positive, got {alpha}")
    a = 3.0 - beta * alpha + math.log(q - 1) + math.log(max_degree)
    return a + math.log(max_degree + 2)


def kp_condition_holds(q: int, max_degree: int, beta: float, alpha: float) -> bool:
    """True iff the cluster-expansion summability condition is verified."""
    return kp_margin(q, max_degree, beta, alpha) <= 0.0


def kp_sufficient_beta(q: int, max_degree: int, alpha: float) -> float:
    """A beta at or above this value always satisfies the condition."""
    if alpha <= 0:
        raise PreconditionError(f"alpha must be positive, got {alpha}")
    return (4.0 + 2.0 * math.log(q * max_degree)) / alpha


# ---------------------------------------------------------------------------
# cluster expansion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cluster:
    """A multiset of polymers whose incompatibility graph is connected."""

    support: tuple[int, ...]  # polymer indices, ascending
    multiplicities: tuple[int, ...]
    total_size: int  # sum of mult * |gamma|
    ursell_num: int
    ursell_den: int

    @property
    def ursell(self) -> Fraction:
        return Fraction(self.ursell_num, self.ursell_den)


def _signed_connected_sum(mults: tuple[int, ...], pair_adj: int) -> int:
    """Sum of (-1)^|A| over spanning connected edge subsets.

    Positions are the multiset elements laid out group by group; two
    positions are adjacent when they are copies of the same polymer or their
    polymers are incompatible.  ``pair_adj`` packs the upper-triangle
    adjacency between the len(mults) groups.
    """
    t = sum(mults)
    k = len(mults)
    if pair_adj == (1 << (k * (k - 1) // 2)) - 1:
        # all positions mutually adjacent (copies of one polymer always are):
        # the signed sum telescopes to (-1)^(t-1) * (t-1)!
        return (-1) ** (t - 1) * math.factorial(t - 1)
    group_of = []
    for gi, m in enumerate(mults):
        group_of.extend([gi] * m)

    def groups_adjacent(a: int, b: int) -> bool:
        if a == b:
            return True
        if a > b:
            a, b = b, a
        idx = a * k - a * (a + 1) // 2 + (b - a - 1)
        return bool(pair_adj >> idx & 1)

    adj = [0] * t
    for p in range(t):
        for r in range(t):
            if p != r and groups_adjacent(group_of[p], group_of[r]):
                adj[p] |= 1 << r

    full = (1 << t) - 1
    edge_free = [False] * (full + 1)
    edge_free[0] = True
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask ^ low
        edge_free[mask] = edge_free[rest] and not (adj[low.bit_length() - 1] & rest)

    memo: dict[int, int] = {}

    def c(mask: int) -> int:
        got = memo.get(mask)
        if got is not None:
            return got
        if mask & (mask - 1) == 0:
            memo[mask] = 1
            return 1
        total = 1 if edge_free[mask] else 0
        v0 = mask & -mask
        rest = mask ^ v0
        # proper subsets containing v0 whose complement within mask is
        # edge-free
        sub = rest
        while True:
            s = sub | v0
            if s != mask and edge_free[mask ^ s]:
                total -= c(s)
            if sub == 0:
                break
            sub = (sub - 1) & rest
        memo[mask] = total
        return total

    return c(full)


class ClusterExpansion:
    """All clusters of bounded total size over a fixed polymer list.

    The cluster structure (supports, multiplicities, coefficients) depends
    only on polymer geometry, so one instance can be evaluated under many
    ground states by supplying fresh log-weights.
    """

    def __init__(
        self,
        g: Graph,
        polymers: Sequence[Polymer],
        max_total_size: int,
        *,
        budget: int = CLUSTER_BUDGET,
    ):
        self.polymers = tuple(polymers)
        self.max_total_size = max_total_size
        t = len(self.polymers)
        sizes = [len(p.vertices) for p in self.polymers]
        inc = [0] * t
        for i, pi in enumerate(self.polymers):
            for j in range(i + 1, t):
                pj = self.polymers[j]
                if pi.neighbourhood_mask & pj.mask:
                    inc[i] |= 1 << j
                    inc[j] |= 1 << i
        self._sizes = tuple(sizes)

        supports: list[tuple[int, ...]] = []
        count = 0

        def extend(sub: tuple[int, ...], ext: int, gt_root: int, nbhd: int, size: int):
            nonlocal count
            count += 1
            if count > budget:
                raise BudgetError(
                    f"cluster enumeration exceeded budget {budget}; "
                    "request a looser accuracy or a smaller instance"
                )
            supports.append(sub)
            ext_left = ext
            while ext_left:
                wbit = ext_left & -ext_left
                ext_left ^= wbit
                w = wbit.bit_length() - 1
                new_size = size + sizes[w]
                if new_size > max_total_size:
                    continue
                fresh = inc[w] & ~nbhd & ~wbit & gt_root
                extend(
                    sub + (w,),
                    ext_left | fresh,
                    gt_root,
                    nbhd | inc[w] | wbit,
                    new_size,
                )

        full = (1 << t) - 1 if t else 0
        for root in range(t):
            if sizes[root] > max_total_size:
                continue
            rbit = 1 << root
            gt_root = full ^ ((rbit << 1) - 1)
            extend((root,), inc[root] & gt_root, gt_root, inc[root] | rbit, sizes[root])

        ursell_cache: dict[tuple[tuple[int, ...], int], int] = {}
        clusters: list[Cluster] = []

        for support in supports:
            k = len(support)
            pair_adj = 0
            bit = 0
            for a in range(k):
                for b in range(a + 1, k):
                    if inc[support[a]] >> support[b] & 1:
                        pair_adj |= 1 << bit
                    bit += 1
            base = sum(sizes[i] for i in support)
            mults = [1] * k

            def emit():
                nonlocal count
                count += 1
                if count > budget:
                    raise BudgetError(
                        f"cluster enumeration exceeded budget {budget}; "
                        "request a looser accuracy or a smaller instance"
                    )
                key = (tuple(mults), pair_adj)
                num = ursell_cache.get(key)
                if num is None:
                    num = _signed_connected_sum(*key)
                    ursell_cache[key] = num
                if num == 0:
                    return
                den = 1
                for m in mults:
                    den *= math.factorial(m)
                clusters.append(
                    Cluster(
                        support=support,
                        multiplicities=tuple(mults),
                        total_size=base,
                        ursell_num=num,
                        ursell_den=den,
                    )
                )

            # enumerate multiplicity vectors >= 1 with total size bounded
            def mult_rec(pos: int):
                nonlocal base
                if pos == k:
                    emit()
                    return
                mult_rec(pos + 1)
                added = 0
                while base + sizes[support[pos]] <= max_total_size:
                    base += sizes[support[pos]]
                    added += 1
                    mults[pos] += 1
                    mult_rec(pos + 1)
                base -= sizes[support[pos]] * added
                mults[pos] = 1

            mult_rec(0)

        clusters.sort(key=lambda c: (c.total_size, c.support, c.multiplicities))
        self.clusters = tuple(clusters)
        max_log_coeff = 0.0
        for cl in self.clusters:
            mag = math.log(abs(cl.ursell_num)) - math.log(cl.ursell_den)
            if mag > max_log_coeff:
                max_log_coeff = mag
        self._prune_log = _EXP_ZERO_LOG - max_log_coeff

    @property
    def cluster_count(self) -> int:
        return len(self.clusters)

    def log_xi(self, log_weights: Sequence[float]) -> float:
        """Evaluate the truncated expansion under the given log-weights."""
        if len(log_weights) != len(self.polymers):
            raise PreconditionError(
                f"expected {len(self.polymers)} log-weights, got {len(log_weights)}"
            )
        terms = []
        prune = self._prune_log
        for cl in self.clusters:
            s = 0.0
            for idx, mult in zip(cl.support, cl.multiplicities):
                s += mult * log_weights[idx]
            if s < prune:
                # the term would round to exactly 0.0; skipping it leaves
                # the fsum bit-identical
                continue
            terms.append((cl.ursell_num / cl.ursell_den) * math.exp(s))
        return math.fsum(terms)


# ---------------------------------------------------------------------------
# truncated polymer partition function
# ---------------------------------------------------------------------------


def truncation_depth(n: int, xi: float) -> int:
    """Depth at which the cluster tail drops below xi/2."""
    if xi <= 0:
        raise PreconditionError(f"xi must be positive, got {xi}")
    return max(1, math.ceil(math.log(2 * n / xi)))


@dataclass(frozen=True)
class TruncatedXi:
    log_xi: float
    eps_bound: float
    depth: int
    cluster_count: int
    polymer_count: int


def truncated_log_xi(
    g: Graph,
    parts: Sequence[Sequence[int]],
    psi: Sequence[int],
    q: int,
    beta: float,
    xi: float,
    alpha: float,
    *,
    model: Sequence[Polymer] | None = None,
    expansion: ClusterExpansion | None = None,
) -> TruncatedXi:
    """Relative xi-approximation to the polymer partition function.

    Refuses (rather than answering) when the summability condition or the
    per-polymer weight bound cannot be verified, since the truncation error
    guarantee would then be unsupported.
    """
    parts = normalize_parts(g, parts)
    psi = _validate_ground_state(parts, psi, q)
    if not kp_condition_holds(q, g.max_degree, beta, alpha):
        raise PreconditionError(
            "summability condition fails: "
            f"beta={beta:.6g} with alpha={alpha:.6g} needs beta >= "
            f"{kp_sufficient_beta(q, g.max_degree, alpha):.6g}"
        )
    depth = truncation_depth(g.n, xi)
    if model is None:
        model = enumerate_polymers(g, parts, min(depth, POLYMER_SIZE_CAP))
    if expansion is None:
        expansion = ClusterExpansion(g, model, depth)
    lws = polymer_log_weights(g, parts, psi, model, q, beta)
    check_weight_bounds(model, lws, q, beta, alpha)
    value = expansion.log_xi(lws)
    return TruncatedXi(
        log_xi=value,
        eps_bound=xi,
        depth=depth,
        cluster_count=expansion.cluster_count,
        polymer_count=len(model),
    )
