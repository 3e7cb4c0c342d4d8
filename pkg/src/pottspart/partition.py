"""Partitioning a graph into expander-induced parts with core repair.

The partitioner maintains a list of parts P_1..P_l with cores B_i inside
them, splitting cores along sweep cuts, splitting off low-conductance
pieces, and merging stray fragments toward their strongest attachment,
until every part induces an expander and no fragment prefers another part.
All comparisons that drive control flow are exact rational arithmetic; the
spectral quantities enter only through precomputed constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import BudgetError, PreconditionError, VerificationError
from .graphs import (
    Graph,
    boundary_size_mask,
    cross_edges_mask,
    induced_subgraph,
    mask_of,
    volume,
)
from .oracle import SUBSET_ENUM_MAX_N, min_conductance
from .spectral import normalized_laplacian_spectrum, sweep_cut

__all__ = [
    "PartitionParams",
    "PartCertificate",
    "ExpanderPartition",
    "PartReport",
    "PartitionReport",
    "phi_after_vertex_removal",
    "partition_into_expanders",
    "verify_partition",
]

_EIGENVALUE_ZERO_SNAP = 1e-8


@dataclass(frozen=True)
class PartitionParams:
    """Spectral constants controlling the partitioner, fixed per graph."""

    k: int
    C: float
    lambdas: tuple[float, ...]  # ascending normalized-Laplacian eigenvalues
    rho_star: float
    phi_in: float
    phi_out: float
    tau: Fraction

    @staticmethod
    def from_graph(g: Graph, k: int, C: float = 1.0) -> "PartitionParams":
        if not isinstance(k, int) or k < 2:
            raise PreconditionError(f"k must be an integer >= 2, got {k!r}")
        if k > g.n:
            raise PreconditionError(f"k={k} exceeds the vertex count {g.n}")
        if not (math.isfinite(C) and C > 0):
            raise PreconditionError(f"C must be a positive real, got {C}")
        spectrum = normalized_laplacian_spectrum(g)
        lambdas = tuple(
            0.0 if lam <= _EIGENVALUE_ZERO_SNAP else lam
            for lam in spectrum.eigenvalues
        )
        lam_k = lambdas[k - 1]
        lam_km1 = lambdas[k - 2]
        rho_star = min(lam_k / 10.0, 30.0 * C * k**5 * math.sqrt(lam_km1))
        phi_in = lam_k / (140.0 * k * k)
        phi_out = 90.0 * C * k**6 * math.sqrt(lam_km1)
        tau = Fraction(1, 5 * (k - 1))
        return PartitionParams(
            k=k,
            C=C,
            lambdas=lambdas,
            rho_star=rho_star,
            phi_in=phi_in,
            phi_out=phi_out,
            tau=tau,
        )

    @property
    def lambda_k(self) -> float:
        return self.lambdas[self.k - 1]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "C": self.C,
            "lambda": list(self.lambdas),
            "constants": {
                "rhoStar": self.rho_star,
                "phiIn": self.phi_in,
                "phiOut": self.phi_out,
                "tau": float(self.tau),
            },
        }


@dataclass(frozen=True)
class PartCertificate:
    """Exact per-part quantities backing the partition's guarantees."""

    sweep_conductance: Fraction  # best sweep cut inside the part
    phi_inner_lb: Fraction  # certified lower bound on the part's conductance
    phi_outer: Fraction  # boundary/volume of the part within the whole graph
    min_degree_ratio: Fraction  # min over v of inside-degree / full degree


@dataclass(frozen=True)
class ExpanderPartition:
    parts: tuple[tuple[int, ...], ...]
    cores: tuple[tuple[int, ...], ...]
    ell: int
    certificates: tuple[PartCertificate, ...]
    iterations: Mapping[str, int]

    def to_dict(self) -> dict:
        return {
            "parts": [list(p) for p in self.parts],
            "cores": [list(c) for c in self.cores],
            "certificates": [
                {
                    "sweepConductance": str(c.sweep_conductance),
                    "phiInnerLowerBound": str(c.phi_inner_lb),
                    "phiOuter": str(c.phi_outer),
                    "minDegreeRatio": str(c.min_degree_ratio),
                }
                for c in self.certificates
            ],
            "iterations": dict(self.iterations),
        }


def phi_after_vertex_removal(g: Graph, b: Iterable[int], u: int) -> Fraction:
    """Conductance of b minus one vertex, by closed form (exact).

    With d the full degree of u and d_b its degree into b, removing u
    rescales the conductance as
    phi(b - u) = vol(b)/(vol(b)-d) * phi(b) - (d - 2*d_b)/(vol(b)-d).
    """
    bs = sorted(set(b))
    if u not in bs:
        raise PreconditionError(f"vertex {u} is not in the set")
    vol_b = volume(g, bs)
    d_v = g.degrees[u]
    if vol_b <= d_v:
        raise PreconditionError(
            f"removal leaves no volume: vol={vol_b}, degree of {u} is {d_v}"
        )
    b_mask = mask_of(g, bs)
    d_b = (g.adj_masks[u] & b_mask).bit_count()
    phi_b = Fraction(boundary_size_mask(g, b_mask), vol_b)
    return (
        Fraction(vol_b, vol_b - d_v) * phi_b
        - Fraction(d_v - 2 * d_b, vol_b - d_v)
    )


# ---------------------------------------------------------------------------
# the partitioner
# ---------------------------------------------------------------------------


class _State:
    """Mutable partition state with exact-arithmetic helpers."""

    def __init__(self, g: Graph):
        self.g = g
        self.parts: list[set[int]] = [set(range(g.n))]
        self.cores: list[set[int]] = [set(range(g.n))]

    @property
    def ell(self) -> int:
        return len(self.parts)

    def mask(self, s: set[int]) -> int:
        m = 0
        for v in s:
            m |= 1 << v
        return m

    def e(self, s: set[int], t: set[int]) -> int:
        return cross_edges_mask(self.g, self.mask(s), self.mask(t))

    def phi(self, s: set[int]) -> Fraction:
        m = self.mask(s)
        return Fraction(boundary_size_mask(self.g, m), volume(self.g, s))

    def vol(self, s: set[int]) -> int:
        return volume(self.g, s)


def _sweep_in_part(g: Graph, part: set[int]):
    """Sweep cut of the induced subgraph, in original labels.

    Returns (vertex set, conductance) or None when the part is too small or
    edgeless to sweep.
    """
    if len(part) < 2:
        return None
    sub, vs = induced_subgraph(g, sorted(part), allow_isolated=True)
    if sub.m == 0:
        return None
    if any(d == 0 for d in sub.degrees):
        # isolated vertex inside the part: a zero-conductance piece exists
        isolated = min(v for v in range(sub.n) if sub.degrees[v] == 0)
        return {vs[isolated]}, Fraction(0)
    sc = sweep_cut(sub)
    return {vs[j] for j in sc.vertices}, sc.conductance


def _relative_conductance_leq(
    st: _State, s: set[int], b: set[int], threshold: Fraction
) -> bool:
    """Exact test of e(s,b)*vol(b) / (vol(b\\s)*e(s,V\\b)) <= threshold.

    A zero denominator counts as +infinity (test fails) unless the numerator
    is zero too.
    """
    num = st.e(s, b) * st.vol(b) * threshold.denominator
    rest = set(range(st.g.n)) - b
    den = st.vol(b - s) * st.e(s, rest) * threshold.numerator
    return num <= den




def partition_into_expanders(
    g: Graph,
    params: PartitionParams,
    *,
    _resume: tuple[Sequence[Iterable[int]], Sequence[Iterable[int]]] | None = None,
) -> ExpanderPartition:
    """Partition V into parts that induce expanders, with exact certificates.

    Raises when the spectral precondition fails, when the iteration budget
    is exhausted, or when a certified invariant breaks (the latter signals
    an implementation bug, never an unlucky input).

    _resume is a testing hook: a (parts, cores) pair to continue from
    instead of the single all-vertex part. The state is validated and
    repaired before the loop runs, and every invariant is enforced on it.
    """
    if params.lambda_k <= 0:
        raise PreconditionError(
            f"the {params.k}-th eigenvalue must be positive, got "
            f"{params.lambda_k}; the graph has too many near-components"
        )
    k = params.k
    n, m = g.n, g.m
    budget = 10 * k * n * m
    st = _State(g)
    if _resume is not None:
        parts_in, cores_in = _resume
        parts = [set(p) for p in parts_in]
        cores = [set(c) for c in cores_in]
        if len(parts) != len(cores):
            raise PreconditionError("resume state needs one core per part")
        covered: set[int] = set()
        for idx, (p, c) in enumerate(zip(parts, cores)):
            if not c or not c <= p:
                raise PreconditionError(
                    f"resume core {idx} must be a nonempty subset of its part"
                )
            if p & covered:
                raise PreconditionError(f"resume part {idx} overlaps another")
            covered |= p
        if covered != set(range(g.n)):
            raise PreconditionError("resume parts must cover every vertex")
        st.parts = parts
        st.cores = cores
    counters = {
        "main": 0,
        "coreSplit": 0,
        "coreRefine": 0,
        "partSplit": 0,
        "fragmentMerge": 0,
        "sweepMove": 0,
        "fallbackMerge": 0,
        "repairDegree": 0,
        "repairAttraction": 0,
    }

    def threshold(level: int) -> float:
        return params.rho_star * (1.0 + 1.0 / k) ** level

    def repairs() -> None:
        # (a) drop core vertices that lost most of their degree to the core
        changed = True
        while changed:
            changed = False
            for i in range(st.ell):
                core = st.cores[i]
                core_mask = st.mask(core)
                for v in sorted(core):
                    deg_in = (g.adj_masks[v] & core_mask).bit_count()
                    if 5 * deg_in < g.degrees[v]:
                        if len(core) == 1:
                            raise VerificationError(
                                f"core {i} would be emptied by degree repair"
                            )
                        phi_before = st.phi(core)
                        phi_after = phi_after_vertex_removal(g, core, v)
                        if phi_after > phi_before:
                            raise VerificationError(
                                "degree repair increased core conductance: "
                                f"{phi_before} -> {phi_after}"
                            )
                        core.discard(v)
                        counters["repairDegree"] += 1
                        if counters["repairDegree"] > budget:
                            raise BudgetError(
                                "degree-repair steps exceeded the iteration "
                                f"budget {budget}"
                            )
                        changed = True
                        break
                if changed:
                    break
        # (b) move non-core vertices toward their strongest attachment
        changed = True
        while changed:
            changed = False
            part_masks = [st.mask(p) for p in st.parts]
            for i in range(st.ell):
                for v in sorted(st.parts[i] - st.cores[i]):
                    e_here = (g.adj_masks[v] & part_masks[i]).bit_count()
                    best_j = -1
                    best_e = -1
                    for j in range(st.ell):
                        if j == i:
                            continue
                        e_j = (g.adj_masks[v] & part_masks[j]).bit_count()
                        if e_j > best_e:
                            best_e = e_j
                            best_j = j
                    if best_j >= 0 and e_here < best_e:
                        st.parts[i].discard(v)
                        st.parts[best_j].add(v)
                        counters["repairAttraction"] += 1
                        if counters["repairAttraction"] > budget:
                            raise BudgetError(
                                "attraction-repair steps exceeded the "
                                f"iteration budget {budget}"
                            )
                        changed = True
                        break
                if changed:
                    break
        for i in range(st.ell):
            if not st.cores[i]:
                raise VerificationError(f"core {i} became empty")
            if not st.cores[i] <= st.parts[i]:
                raise VerificationError(f"core {i} escaped its part")

    def assert_invariants() -> None:
        if st.ell >= k:
            raise VerificationError(
                f"{st.ell} parts created; fewer than {k} are guaranteed"
            )
        bound = threshold(st.ell)
        for i in range(st.ell):
            phi_core = st.phi(st.cores[i])
            if phi_core > bound:
                raise VerificationError(
                    f"core {i} conductance {phi_core} exceeds level bound {bound}"
                )

    repairs()
    assert_invariants()
    while True:
        counters["main"] += 1
        if counters["main"] > budget:
            raise BudgetError(
                f"main loop exceeded the iteration budget {budget}; "
                "this signals an implementation bug"
            )

        # evaluate the two progress conditions, lowest part index first
        chosen = -1
        merge_holds = False
        sweep_result = None
        for i in range(st.ell):
            frag = st.parts[i] - st.cores[i]
            attract = False
            if frag:
                e_core = st.e(frag, st.cores[i])
                for j in range(st.ell):
                    if j != i and e_core < st.e(frag, st.parts[j]):
                        attract = True
                        break
            sw = _sweep_in_part(g, st.parts[i])
            sparse_cut = sw is not None and sw[1] < params.phi_in
            if attract or sparse_cut:
                chosen = i
                merge_holds = attract
                sweep_result = sw
                break
        if chosen < 0:
            break

        i = chosen
        acted = False
        s_set: set[int] | None = None
        if sweep_result is not None:
            s_set = set(sweep_result[0])
            # orient the cut so it takes at most half the core's volume
            if 2 * st.vol(s_set & st.cores[i]) > st.vol(st.cores[i]):
                s_set = st.parts[i] - s_set

        if s_set is not None:
            core = st.cores[i]
            s_b = s_set & core
            s_b_bar = core - s_set
            s_p = s_set - core
            level_bound = threshold(st.ell + 1)

            if (
                s_b
                and s_b_bar
                and st.phi(s_b) <= level_bound
                and st.phi(s_b_bar) <= level_bound
            ):
                # split the core: keep the light half, spin off the heavy half
                st.cores[i] = s_b
                st.parts[i] = st.parts[i] - s_b_bar
                st.parts.append(set(s_b_bar))
                st.cores.append(set(s_b_bar))
                counters["coreSplit"] += 1
                acted = True
            elif (
                s_b
                and s_b_bar
                and _relative_conductance_leq(st, s_b, core, Fraction(1, 3 * k))
                and _relative_conductance_leq(st, s_b_bar, core, Fraction(1, 3 * k))
            ):
                # shrink the core to whichever cut half has smaller
                # conductance; this never increases the core's conductance
                phi_core = st.phi(core)
                picked = s_b if st.phi(s_b) <= st.phi(s_b_bar) else s_b_bar
                if st.phi(picked) > phi_core:
                    raise VerificationError(
                        "core refinement increased core conductance: "
                        f"{phi_core} -> {st.phi(picked)}"
                    )
                st.cores[i] = set(picked)
                counters["coreRefine"] += 1
                acted = True
            elif s_p and st.phi(s_p) <= level_bound:
                # the sweep found a low-conductance piece outside the core:
                # make it a part of its own
                st.parts[i] = st.parts[i] - s_p
                st.parts.append(set(s_p))
                st.cores.append(set(s_p))
                counters["partSplit"] += 1
                acted = True

        if not acted:
            frag = st.parts[i] - st.cores[i]
            if frag and st.ell > 1:
                e_home = st.e(frag, st.cores[i])
                best_j = -1
                best_e = -1
                for j in range(st.ell):
                    if j == i:
                        continue
                    e_j = st.e(frag, st.cores[j])
                    if e_j > best_e:
                        best_e = e_j
                        best_j = j
                if best_j >= 0 and e_home < best_e:
                    st.parts[best_j] |= frag
                    st.parts[i] = set(st.cores[i])
                    counters["fragmentMerge"] += 1
                    acted = True

        if not acted and s_set is not None:
            s_p = s_set - st.cores[i]
            if s_p and st.ell > 1:
                e_home = st.e(s_p, st.parts[i])
                best_j = -1
                best_e = -1
                for j in range(st.ell):
                    if j == i:
                        continue
                    e_j = st.e(s_p, st.parts[j])
                    if e_j > best_e:
                        best_e = e_j
                        best_j = j
                if best_j >= 0 and e_home < best_e:
                    st.parts[i] = st.parts[i] - s_p
                    st.parts[best_j] |= s_p
                    counters["sweepMove"] += 1
                    acted = True

        if not acted:
            if merge_holds:
                # the fragment is attracted to another part as a whole even
                # though no listed action applies; moving it to its
                # strongest attachment strictly reduces cross edges
                frag = st.parts[i] - st.cores[i]
                best_j = -1
                best_e = -1
                for j in range(st.ell):
                    if j == i:
                        continue
                    e_j = st.e(frag, st.parts[j])
                    if e_j > best_e:
                        best_e = e_j
                        best_j = j
                if best_j < 0 or best_e <= st.e(frag, st.cores[i]):
                    raise VerificationError(
                        "attraction condition held but no better part exists"
                    )
                st.parts[best_j] |= frag
                st.parts[i] = set(st.cores[i])
                counters["fallbackMerge"] += 1
            else:
                raise VerificationError(
                    f"a sparse cut exists in part {i} but no action applies; "
                    "the progress guarantee is violated"
                )

        repairs()
        assert_invariants()

    # terminal certificates
    certificates = []
    for i in range(st.ell):
        part = st.parts[i]
        sw = _sweep_in_part(g, part)
        if sw is None or sw[1] < params.phi_in:
            raise VerificationError(
                f"terminal part {i} still admits a sparse cut "
                "(or is degenerate); the loop must not have ended"
            )
        sweep_val: Fraction = sw[1]
        phi_lb = sweep_val * sweep_val / 4
        phi_outer = st.phi(part)
        part_mask = st.mask(part)
        ratio = min(
            Fraction((g.adj_masks[v] & part_mask).bit_count(), g.degrees[v])
            for v in part
        )
        if ratio < params.tau:
            raise VerificationError(
                f"part {i} keeps only {ratio} of some vertex degree, "
                f"below the guaranteed {params.tau}"
            )
        outer_bound = st.ell * math.e * params.rho_star
        if st.ell > 1 and phi_outer > outer_bound:
            raise VerificationError(
                f"part {i} outer conductance {phi_outer} exceeds {outer_bound}"
            )
        certificates.append(
            PartCertificate(
                sweep_conductance=sweep_val,
                phi_inner_lb=phi_lb,
                phi_outer=phi_outer,
                min_degree_ratio=ratio,
            )
        )

    return ExpanderPartition(
        parts=tuple(tuple(sorted(p)) for p in st.parts),
        cores=tuple(tuple(sorted(c)) for c in st.cores),
        ell=st.ell,
        certificates=tuple(certificates),
        iterations=dict(counters),
    )


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartReport:
    vertices: tuple[int, ...]
    phi_outer: Fraction
    phi_outer_ok: bool
    min_degree_ratio: Fraction
    min_degree_ratio_ok: bool
    inner_lower_bound: Fraction | None  # via sweep, None for degenerate parts
    brute_inner: Fraction | None  # exact, only for small parts
    inner_ok: bool


@dataclass(frozen=True)
class PartitionReport:
    parts: tuple[PartReport, ...]
    passed: bool

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "parts": [
                {
                    "vertices": list(p.vertices),
                    "phiOuter": str(p.phi_outer),
                    "phiOuterOk": p.phi_outer_ok,
                    "minDegreeRatio": str(p.min_degree_ratio),
                    "minDegreeRatioOk": p.min_degree_ratio_ok,
                    "innerLowerBound": (
                        None
                        if p.inner_lower_bound is None
                        else str(p.inner_lower_bound)
                    ),
                    "bruteInner": (
                        None if p.brute_inner is None else str(p.brute_inner)
                    ),
                    "innerOk": p.inner_ok,
                }
                for p in self.parts
            ],
        }


def verify_partition(
    g: Graph,
    parts: Sequence[Iterable[int]],
    params: PartitionParams,
) -> PartitionReport:
    """Check a claimed partition against the three per-part certificates.

    Inner conductance is verified by brute force for parts of at most 20
    vertices and by the sweep bound otherwise; the outer conductance and
    degree-ratio checks are exact.
    """
    norm: list[tuple[int, ...]] = []
    seen = 0
    for idx, part in enumerate(parts):
        vs = tuple(sorted(part))
        if not vs:
            raise PreconditionError(f"part {idx} is empty")
        pm = mask_of(g, vs)
        if pm.bit_count() != len(vs):
            raise PreconditionError(f"part {idx} repeats a vertex")
        if pm & seen:
            raise PreconditionError(f"part {idx} overlaps an earlier part")
        seen |= pm
        norm.append(vs)
    if seen != (1 << g.n) - 1:
        raise PreconditionError("parts do not cover every vertex")

    inner_threshold = params.phi_in * params.phi_in / 4.0
    reports = []
    for vs in norm:
        pm = mask_of(g, vs)
        phi_outer = (
            Fraction(0)
            if len(norm) == 1
            else Fraction(boundary_size_mask(g, pm), volume(g, vs))
        )
        phi_outer_ok = phi_outer <= params.phi_out
        ratio = min(
            Fraction((g.adj_masks[v] & pm).bit_count(), g.degrees[v]) for v in vs
        )
        ratio_ok = ratio >= params.tau
        sub, _ = induced_subgraph(g, vs, allow_isolated=True)
        inner_lb: Fraction | None = None
        brute: Fraction | None = None
        if sub.n == 1:
            inner_ok = True  # vacuous: no cut exists inside a single vertex
        elif sub.m == 0:
            brute = Fraction(0)
            inner_ok = inner_threshold <= 0.0
        else:
            if sub.n <= SUBSET_ENUM_MAX_N:
                brute = (
                    min_conductance(sub)[0]
                    if all(d > 0 for d in sub.degrees)
                    else Fraction(0)
                )
                inner_ok = brute >= inner_threshold
            else:
                sw = _sweep_in_part(g, set(vs))
                assert sw is not None
                inner_lb = sw[1] * sw[1] / 4
                inner_ok = inner_lb >= inner_threshold
        reports.append(
            PartReport(
                vertices=vs,
                phi_outer=phi_outer,
                phi_outer_ok=phi_outer_ok,
                min_degree_ratio=ratio,
                min_degree_ratio_ok=ratio_ok,
                inner_lower_bound=inner_lb,
                brute_inner=brute,
                inner_ok=inner_ok,
            )
        )
    return PartitionReport(
        parts=tuple(reports),
        passed=all(
            r.phi_outer_ok and r.min_degree_ratio_ok and r.inner_ok for r in reports
        ),
    )
