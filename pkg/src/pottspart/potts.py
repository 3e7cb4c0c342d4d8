"""Approximation pipelines for the ferromagnetic Potts partition function.

Z_G(beta) = sum over colourings omega of exp(beta * m_G(omega)), with
m_G the monochromatic-edge count.  At low temperature (large beta) the sum
is dominated by colourings near "ground states" that colour each part of an
expander partition monochromatically; each ground state contributes a
polymer-model partition function evaluated by a truncated cluster expansion.

Every pipeline returns a :class:`PottsResult` whose ``eps_bound`` is a
guaranteed relative error: e^(-eps) <= Z / exp(log_z) <= e^(eps).  The
pipelines refuse (with structured errors) whenever a hypothesis they rely on
cannot be verified, rather than returning an unguaranteed number.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import BudgetError, PreconditionError
from .graphs import Graph, induced_subgraph, is_alpha_expander, mask_of
from .oracle import exact_log_z
from .partition import (
    ExpanderPartition,
    PartitionParams,
    _sweep_in_part,
    partition_into_expanders,
)
from .polymers import (
    POLYMER_SIZE_CAP,
    ClusterExpansion,
    boundary_edge_set,
    enumerate_polymers,
    kp_sufficient_beta,
    normalize_parts,
    part_index_of,
    truncated_log_xi,
    truncation_depth,
)
from .util import log_sum_exp

__all__ = [
    "PottsInstance",
    "PottsResult",
    "GROUND_STATE_CAP",
    "XI_CAP",
    "monochromatic_edges",
    "ground_state_edges",
    "certified_alpha",
    "required_beta_expander",
    "required_beta_good_parts",
    "required_beta_sse",
    "approx_log_z_expander",
    "approx_log_z_good_parts",
    "approx_log_z_with_partition",
    "approx_log_z_sse",
]

GROUND_STATE_CAP = 10**6  # refuse pipelines that would sum more ground states
XI_CAP = 0.25  # accuracy requests are clamped to this (a stronger promise)


@dataclass(frozen=True)
class PottsInstance:
    """A Potts model: graph, colour count, inverse temperature."""

    g: Graph
    q: int
    beta: float

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 2:
            raise PreconditionError(f"q must be an integer >= 2, got {self.q!r}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise PreconditionError(f"beta must be positive, got {self.beta}")

    @property
    def max_degree(self) -> int:
        return self.g.max_degree

    @property
    def min_degree(self) -> int:
        return min(self.g.degrees)


def monochromatic_edges(g: Graph, colours: Sequence[int]) -> int:
    """Number of edges whose endpoints share a colour."""
    if len(colours) != g.n:
        raise PreconditionError(
            f"colouring has {len(colours)} entries for {g.n} vertices"
        )
    for v, c in enumerate(colours):
        if not isinstance(c, int):
            raise PreconditionError(f"vertex {v} has non-integer colour {c!r}")
    return sum(1 for u, v in g.edges if colours[u] == colours[v])


def ground_state_edges(
    g: Graph, parts: Sequence[Sequence[int]], psi: Sequence[int]
) -> int:
    """m_G of the colouring that gives part i the colour psi[i]."""
    owner = part_index_of(g, parts)
    colouring = [psi[owner[v]] for v in range(g.n)]
    return monochromatic_edges(g, colouring)


def _psi_of_index(index: int, q: int, ell: int) -> tuple[int, ...]:
    """Ground state number ``index`` in canonical order (part 0 varies fastest)."""
    out = []
    for _ in range(ell):
        out.append(index % q)
        index //= q
    return tuple(out)


# ---------------------------------------------------------------------------
# certified expansion constants
# ---------------------------------------------------------------------------


def _part_min_inside_degree(g: Graph, vs: Sequence[int]) -> int:
    pm = mask_of(g, vs)
    return min((g.adj_masks[v] & pm).bit_count() for v in vs)


def certified_alpha(
    g: Graph,
    parts: Sequence[Sequence[int]],
    inner_bounds: Sequence[Fraction] | None = None,
) -> float:
    """Edge-expansion constant alpha certified by the partition.

    Within each part, any set taking at most half the part has boundary (in
    the induced subgraph) at least phi_inner * volume >= phi_inner * mindeg
    * size, so alpha = min over parts of (inner conductance lower bound) *
    (min induced degree).  The inner bound is the per-part sweep-cut
    certificate (value^2 / 4) unless explicit bounds are supplied.
    Single-vertex parts admit no nonempty small set and contribute nothing;
    the result is +inf when every part is a single vertex.
    """
    alpha = math.inf
    for idx, vs in enumerate(parts):
        vs = tuple(vs)
        if len(vs) < 2:
            continue
        if inner_bounds is not None:
            phi_lb = inner_bounds[idx]
        else:
            sw = _sweep_in_part(g, set(vs))
            if sw is None:
                return 0.0  # edgeless multi-vertex part: no expansion at all
            phi_lb = sw[1] * sw[1] / 4
        alpha = min(alpha, float(phi_lb) * _part_min_inside_degree(g, vs))
    return alpha


def _coerce_partition(
    g: Graph, partition
) -> tuple[tuple[tuple[int, ...], ...], float]:
    """Accept an ExpanderPartition or raw parts; return (parts, alpha)."""
    if isinstance(partition, ExpanderPartition):
        parts = tuple(tuple(p) for p in partition.parts)
        normalize_parts(g, parts)
        bounds = [c.phi_inner_lb for c in partition.certificates]
        return parts, certified_alpha(g, parts, bounds)
    parts = normalize_parts(g, partition)
    return parts, certified_alpha(g, parts)


def required_beta_expander(q: int, max_degree: int, alpha: float) -> float:
    """Smallest inverse temperature the expander pipeline accepts."""
    return kp_sufficient_beta(q, max_degree, alpha)


def required_beta_good_parts(
    q: int, max_degree: int, alpha: float, eta: float
) -> float:
    """Smallest inverse temperature the good-parts pipeline accepts.

    Two threshold forms circulate for this composition; we enforce the
    pointwise maximum of both, so the accepted regime satisfies each.
    """
    if alpha <= 0:
        raise PreconditionError(f"alpha must be positive, got {alpha}")
    if not 0 < eta <= 1:
        raise PreconditionError(f"eta must be in (0, 1], got {eta}")
    lg = math.log(q * max_degree)
    return max(4.0 + 2.0 * lg, 2.0 + 4.0 * lg) / (alpha * eta)


def required_beta_sse(
    params: PartitionParams, q: int, max_degree: int, min_degree: int
) -> float:
    """Smallest inverse temperature the spectral pipeline accepts.

    The headline threshold C*k^6*(4+2log(q*Delta))/(lambda_k^2*delta) is not
    by itself sufficient for the inner composition with the implementation's
    explicit constants, so the guaranteed-sufficient inner threshold (with
    the partition's worst-case certificates) is enforced as well.
    """
    k = params.k
    lam = params.lambda_k
    if lam <= 0:
        raise PreconditionError(f"the {k}-th eigenvalue must be positive")
    headline = (
        params.C
        * k**6
        * (4.0 + 2.0 * math.log(q * max_degree))
        / (lam * lam * min_degree)
    )
    alpha_guaranteed = (
        (params.phi_in * params.phi_in / 4.0) * float(params.tau) * min_degree
    )
    inner = required_beta_good_parts(q, max_degree, alpha_guaranteed, 1.0 / k)
    return max(headline, inner)


# ---------------------------------------------------------------------------
# result container
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PottsResult:
    """log Z approximation with its guaranteed relative-error bound."""

    log_z: float
    eps_bound: float
    mode: str  # "sse" | "partition" | "expander" | "bruteforce"
    ground_states: int
    truncation_depth: int
    clusters_evaluated: int
    per_psi: tuple[Mapping, ...]

    def to_dict(self) -> dict:
        return {
            "logZ": self.log_z,
            "epsBound": self.eps_bound,
            "mode": self.mode,
            "groundStates": self.ground_states,
            "truncationDepth": self.truncation_depth,
            "clustersEvaluated": self.clusters_evaluated,
            "perPsi": [dict(p) for p in self.per_psi],
        }


def _check_q_beta_xi(q: int, beta: float, xi: float) -> float:
    if not isinstance(q, int) or q < 2:
        raise PreconditionError(f"q must be an integer >= 2, got {q!r}")
    if not (math.isfinite(beta) and beta > 0):
        raise PreconditionError(f"beta must be positive, got {beta}")
    if not (math.isfinite(xi) and xi > 0):
        raise PreconditionError(f"accuracy must be positive, got {xi}")
    return min(xi, XI_CAP)


# ---------------------------------------------------------------------------
# the shared ground-state pipeline
# ---------------------------------------------------------------------------


def _approx_core(
    g: Graph,
    parts: Sequence[Sequence[int]],
    q: int,
    beta: float,
    xi: float,
    alpha: float,
    mode: str,
    threads: int,
) -> PottsResult:
    """Sum exp(beta*m_G(psi) + log Xi^psi) over all ground states psi.

    xi must already be clamped and the convergence gate checked by the
    caller.  When xi <= e^(-n/2) the exact oracle is cheaper than the
    expansion and is used instead (the result is then exact).
    """
    if not isinstance(threads, int) or threads < 1:
        raise PreconditionError(f"threads must be a positive integer, got {threads!r}")
    n = g.n
    ell = len(parts)
    states = q**ell
    if states > GROUND_STATE_CAP:
        raise BudgetError(
            f"{states} ground states exceed the cap {GROUND_STATE_CAP}"
        )
    if xi <= math.exp(-n / 2.0):
        return PottsResult(
            log_z=exact_log_z(g, q, beta),
            eps_bound=0.0,
            mode="bruteforce",
            ground_states=states,
            truncation_depth=0,
            clusters_evaluated=0,
            per_psi=(),
        )
    # truncation at zeta = xi/2 leaves e^(-n) <= xi/2 of slack for the
    # states the ground-state decomposition misses or double-counts
    zeta = xi / 2.0
    depth = truncation_depth(n, zeta)
    model = enumerate_polymers(g, parts, min(depth, POLYMER_SIZE_CAP))
    expansion = ClusterExpansion(g, model, depth)

    def one(index: int) -> tuple[tuple[int, ...], int, float]:
        psi = _psi_of_index(index, q, ell)
        m_psi = ground_state_edges(g, parts, psi)
        tx = truncated_log_xi(
            g, parts, psi, q, beta, zeta, alpha, model=model, expansion=expansion
        )
        return psi, m_psi, tx.log_xi

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            evaluated = list(pool.map(one, range(states)))
    else:
        evaluated = [one(w) for w in range(states)]

    log_z = log_sum_exp(beta * m + lx for _, m, lx in evaluated)
    per_psi = tuple(
        {"psi": list(psi), "monochromaticEdges": m, "logXi": lx}
        for psi, m, lx in evaluated
    )
    return PottsResult(
        log_z=log_z,
        eps_bound=xi,
        mode=mode,
        ground_states=states,
        truncation_depth=depth,
        clusters_evaluated=expansion.cluster_count,
        per_psi=per_psi,
    )


# ---------------------------------------------------------------------------
# public pipelines
# ---------------------------------------------------------------------------


def approx_log_z_expander(
    g: Graph,
    q: int,
    beta: float,
    xi: float,
    alpha: float,
    *,
    threads: int = 1,
) -> PottsResult:
    """Relative xi-approximation of log Z for an alpha-expander graph.

    The expansion hypothesis is the caller's responsibility; it is checked
    exhaustively when n <= 20 and trusted otherwise.  The single-part
    pipeline runs with the q monochromatic colourings as ground states.
    """
    xi = _check_q_beta_xi(q, beta, xi)
    if not (math.isfinite(alpha) and alpha > 0):
        raise PreconditionError(f"alpha must be positive, got {alpha}")
    if g.m == 0:
        if g.n == 1:
            # a single vertex is vacuously an expander; Z = q exactly
            return PottsResult(math.log(q), 0.0, "bruteforce", q, 0, 0, ())
        raise PreconditionError(
            f"an edgeless graph on {g.n} vertices is not an expander"
        )
    need = required_beta_expander(q, g.max_degree, alpha)
    if beta < need:
        raise PreconditionError(
            f"beta={beta:.6g} is below the required threshold {need:.6g} "
            f"for q={q}, max degree {g.max_degree}, alpha={alpha:.6g}"
        )
    if g.n <= 20:
        ok, witness = is_alpha_expander(g, alpha)
        if not ok:
            raise PreconditionError(
                f"the graph is not an {alpha:.6g}-expander: the set {witness} "
                "has too small a boundary"
            )
    return _approx_core(
        g, (tuple(range(g.n)),), q, beta, xi, alpha, "expander", threads
    )


def approx_log_z_good_parts(
    g: Graph,
    partition,
    q: int,
    beta: float,
    xi: float,
    *,
    threads: int = 1,
) -> PottsResult:
    """Relative xi-approximation of log Z given an all-good expander partition.

    ``partition`` is an ExpanderPartition or a raw sequence of vertex sets;
    raw parts are certified here (per-part sweep bound and induced minimum
    degree).  Every part counts toward eta = min |P_i| / n.
    """
    xi = _check_q_beta_xi(q, beta, xi)
    parts, alpha = _coerce_partition(g, partition)
    eta = min(len(p) for p in parts) / g.n
    if alpha <= 0:
        raise PreconditionError(
            "the partition certifies no expansion (a multi-vertex part has "
            "sweep conductance 0); the polymer weights are unbounded"
        )
    if math.isfinite(alpha):
        need = required_beta_good_parts(q, g.max_degree, alpha, eta)
        if beta < need:
            raise PreconditionError(
                f"beta={beta:.6g} is below the required threshold {need:.6g} "
                f"for q={q}, max degree {g.max_degree}, alpha={alpha:.6g}, "
                f"eta={eta:.6g}"
            )
    return _approx_core(g, parts, q, beta, xi, alpha, "partition", threads)


def approx_log_z_with_partition(
    g: Graph,
    partition,
    q: int,
    beta: float,
    xi: float,
    eta: float,
    *,
    threads: int = 1,
) -> PottsResult:
    """Approximate log Z for a partition that may contain small (bad) parts.

    Parts with |P_i| < eta*n are cut out: their boundary edges (X of them,
    counted once each) are removed, each bad part is handled by the
    single-expander pipeline on its induced subgraph, the remaining good
    parts by the good-parts pipeline, and the removed edges contribute
    beta*X/2 to both the estimate and the (reported) error bound
    (s+1)*xi + beta*X/2, where s is the number of bad parts.
    """
    xi = _check_q_beta_xi(q, beta, xi)
    if not (0 < eta <= 1):
        raise PreconditionError(f"eta must be in (0, 1], got {eta}")
    parts, alpha = _coerce_partition(g, partition)
    if alpha <= 0:
        raise PreconditionError(
            "the partition certifies no expansion (a multi-vertex part has "
            "sweep conductance 0); the polymer weights are unbounded"
        )
    if math.isfinite(alpha):
        need = required_beta_good_parts(q, g.max_degree, alpha, eta)
        if beta < need:
            raise PreconditionError(
                f"beta={beta:.6g} is below the required threshold {need:.6g} "
                f"for q={q}, max degree {g.max_degree}, alpha={alpha:.6g}, "
                f"eta={eta:.6g}"
            )
    # exact comparison: lift the float eta so classification is reproducible
    eta_exact = Fraction(eta)
    bad = [i for i, p in enumerate(parts) if len(p) < eta_exact * g.n]
    if not bad:
        return approx_log_z_good_parts(g, parts, q, beta, xi, threads=threads)

    s = len(bad)
    removed: set[tuple[int, int]] = set()
    for i in bad:
        removed |= boundary_edge_set(g, parts[i])
    x_count = len(removed)

    log_z = beta * x_count / 2.0
    ground_states = 0
    depth = 0
    clusters = 0
    for i in bad:
        sub, _ = induced_subgraph(g, parts[i], allow_isolated=True)
        if sub.m == 0:
            # isolated piece after edge removal: contributes q^|P_i| exactly
            log_z += sub.n * math.log(q)
            continue
        sub_alpha = certified_alpha(sub, (tuple(range(sub.n)),))
        if sub_alpha <= 0:
            raise PreconditionError(
                f"bad part {i} induces a graph with no certified expansion"
            )
        res = approx_log_z_expander(
            sub, q, beta, xi, min(sub_alpha, alpha), threads=threads
        )
        log_z += res.log_z
        ground_states += res.ground_states
        depth = max(depth, res.truncation_depth)
        clusters += res.clusters_evaluated

    bad_set = set(bad)
    good = [p for i, p in enumerate(parts) if i not in bad_set]
    if good:
        keep = sorted(v for p in good for v in p)
        sub, vs = induced_subgraph(g, keep, allow_isolated=True)
        relabel = {v: j for j, v in enumerate(vs)}
        sub_parts = [tuple(relabel[v] for v in p) for p in good]
        res = approx_log_z_good_parts(sub, sub_parts, q, beta, xi, threads=threads)
        log_z += res.log_z
        ground_states += res.ground_states
        depth = max(depth, res.truncation_depth)
        clusters += res.clusters_evaluated

    return PottsResult(
        log_z=log_z,
        eps_bound=(s + 1) * xi + beta * x_count / 2.0,
        mode="partition",
        ground_states=ground_states,
        truncation_depth=depth,
        clusters_evaluated=clusters,
        per_psi=(),
    )


def approx_log_z_sse(
    g: Graph,
    k: int,
    q: int,
    beta: float,
    eps: float,
    C: float = 1.0,
    *,
    threads: int = 1,
) -> PottsResult:
    """End-to-end approximation driven by the spectral partitioner.

    Requires lambda_k > 0 and beta at or above the stated threshold.  The
    graph is partitioned into at most k-1 expander parts; when every part
    has at least n/k vertices the good-parts pipeline gives a relative
    eps-approximation, otherwise the with-partition composition runs and
    the (weaker) bound it reports is returned.
    """
    params = PartitionParams.from_graph(g, k, C)
    if params.lambda_k <= 0:
        raise PreconditionError(
            f"the {k}-th eigenvalue must be positive, got {params.lambda_k}; "
            "the graph has too many near-components"
        )
    eps = _check_q_beta_xi(q, beta, eps)
    delta = min(g.degrees)
    need = required_beta_sse(params, q, g.max_degree, delta)
    if beta < need:
        raise PreconditionError(
            f"beta={beta:.6g} is below the required threshold {need:.6g} "
            f"for k={k}, q={q}, max degree {g.max_degree}, "
            f"lambda_k={params.lambda_k:.6g}, min degree {delta}"
        )
    part = partition_into_expanders(g, params)
    bad = [i for i, p in enumerate(part.parts) if len(p) * k < g.n]
    if bad:
        return approx_log_z_with_partition(
            g, part, q, beta, eps, 1.0 / k, threads=threads
        )
    res = approx_log_z_good_parts(g, part, q, beta, eps, threads=threads)
    if res.mode == "partition":
        res = replace(res, mode="sse")
    return res
