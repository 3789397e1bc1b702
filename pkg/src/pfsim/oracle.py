# oracle.py
"""
Exact enumeration of the Potts and random-cluster measures on tiny boxes
and the exact checks built on top of them: the cluster-coloring coupling,
the free-energy/edge-marginal identity, the interface lift-ratio
inequality, hard-vs-soft-floor monotonicity, and fuzzy FKG.

Everything here is exact up to float64 arithmetic; Monte Carlo never
enters this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from . import _kernels
from .lattice import (BLUE, FLOOR, RED, SPLIT, BoundaryCondition, Domain,
                      ModelParams, Plaquette, plaquette_of_edge)
from .sampler import SpinConfig, tables_for
from .rc import EdgeConfig

STATE_CAP = 10 ** 8


class OracleCheckError(RuntimeError):
    """An exact inequality or identity failed."""


class EnumerationCapError(ValueError):
    pass


def _mixed_radix(n_states: int, n_digits: int, q: int) -> np.ndarray:
    """(S, N) int8 digit matrix; digit t = (index // q^t) % q."""
    idx = np.arange(n_states, dtype=np.int64)
    out = np.empty((n_states, n_digits), dtype=np.int8)
    for t in range(n_digits):
        out[:, t] = (idx // q ** t) % q
    return out


def _popcount64(arr: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(arr).astype(np.int64)
    out = np.empty(arr.shape[0], dtype=np.int64)
    step = 1 << 20
    for lo in range(0, arr.shape[0], step):
        chunk = arr[lo:lo + step].astype(np.uint64)
        bits = np.unpackbits(chunk.view(np.uint8)).reshape(-1, 64)
        out[lo:lo + step] = bits.sum(axis=1)
    return out


# -- exact measures ----------------------------------------------------


@dataclass
class ExactMeasure:
    """An enumerated measure: states with log-weights and query methods."""

    kind: str  # "potts" or "fk"
    domain: Domain
    bc: BoundaryCondition
    params: ModelParams
    log_weights: np.ndarray
    states: np.ndarray  # potts: (S, N) int8 colors; fk: (S,) uint64 masks

    @property
    def n_states(self) -> int:
        return self.log_weights.shape[0]

    @property
    def log_z(self) -> float:
        m = self.log_weights.max()
        return float(m + np.log(np.exp(self.log_weights - m).sum()))

    def probabilities(self) -> np.ndarray:
        w = np.exp(self.log_weights - self.log_weights.max())
        return w / w.sum()

    def state(self, t: int):
        if self.kind == "potts":
            return SpinConfig(self.states[t].copy(), self.domain, self.bc)
        ne = self.domain.n_edges
        mask = int(self.states[t])
        bits = np.array([(mask >> e) & 1 for e in range(ne)], dtype=bool)
        return EdgeConfig(bits, self.domain, self.bc)

    def iter_states(self):
        for t in range(self.n_states):
            yield self.state(t)

    def indicator(self, event) -> np.ndarray:
        if isinstance(event, np.ndarray):
            return event
        return np.fromiter((bool(event(s)) for s in self.iter_states()),
                           dtype=bool, count=self.n_states)

    def prob(self, event) -> float:
        return float(self.probabilities()[self.indicator(event)].sum())

    def conditional(self, event) -> "ExactMeasure":
        keep = self.indicator(event)
        if not keep.any():
            raise ValueError("conditioning event has probability zero")
        return ExactMeasure(self.kind, self.domain, self.bc, self.params,
                            self.log_weights[keep], self.states[keep])

    def site_marginal(self, site, color: int) -> float:
        if self.kind != "potts":
            raise ValueError("site marginals need a potts measure")
        t = self.domain.site_index[tuple(site)]
        return float(self.probabilities()[self.states[:, t] == color].sum())

    def edge_marginal(self, e: int) -> float:
        if self.kind != "fk":
            raise ValueError("edge marginals need an fk measure")
        open_bit = (self.states >> np.uint64(e)).astype(np.int64) & 1
        return float(self.probabilities()[open_bit == 1].sum())


def enumerate_potts(domain: Domain, bc: BoundaryCondition,
                    params: ModelParams, cap: int = STATE_CAP) -> ExactMeasure:
    """Exact Potts measure with boundary colors fixed.

    State index convention: index = sum_t (color_t - 1) q^t over sites in
    canonical order.
    """
    q = params.q
    n = domain.n_sites
    n_states = q ** n
    if n_states > cap:
        raise EnumerationCapError(f"q^N = {n_states} exceeds cap {cap}")
    states = _mixed_radix(n_states, n, q) + 1
    energies = np.zeros(n_states, dtype=np.int64)
    si = domain.site_index
    for u, v in domain.interior_edges:
        energies += states[:, si[u]] != states[:, si[v]]
    for u, v in domain.boundary_edges:
        energies += states[:, si[u]] != bc.color_of(v)
    return ExactMeasure("potts", domain, bc, params,
                        -params.beta * energies.astype(np.float64), states)


def enumerate_fk(domain: Domain, bc: BoundaryCondition, params: ModelParams,
                 condition_on_disconnection: bool = False,
                 cap: int = STATE_CAP) -> ExactMeasure:
    """Exact FK measure with wiring-class cluster counting.

    State t is the edge mask t (bit e = edge e open, canonical edge order).
    """
    if not params.beta > 0:
        raise ValueError("fk enumeration needs beta > 0")
    ne = domain.n_edges
    n_states = 1 << ne
    if n_states > cap:
        raise EnumerationCapError(f"2^E = {n_states} exceeds cap {cap}")
    t = tables_for(domain, bc)
    red = domain.n_sites
    blue = red + 1 if bc.n_wiring_classes == 2 else -1
    kap, disc = _kernels.fk_mask_scan(t.edge_node_u, t.edge_node_v,
                                      t.n_nodes, red, blue)
    masks = np.arange(n_states, dtype=np.uint64)
    if condition_on_disconnection:
        if bc.n_wiring_classes < 2:
            raise ValueError("disconnection needs two wiring classes")
        masks = masks[disc]
        kap = kap[disc]
    p = params.p
    log_x = math.log(p / (1.0 - p))
    logw = (_popcount64(masks) * log_x
            + kap.astype(np.float64) * math.log(params.q))
    return ExactMeasure("fk", domain, bc, params, logw, masks)


def graph_fk_measure(edge_u: np.ndarray, edge_v: np.ndarray, n_nodes: int,
                     params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """(probabilities, kappa) over all edge masks of an abstract graph
    with free (unwired) vertices."""
    eu = np.asarray(edge_u, dtype=np.int64)
    ev = np.asarray(edge_v, dtype=np.int64)
    kap, _ = _kernels.fk_mask_scan(eu, ev, n_nodes, 0, -1)
    masks = np.arange(1 << eu.shape[0], dtype=np.uint64)
    log_x = math.log(params.p / (1.0 - params.p))
    logw = _popcount64(masks) * log_x + kap * math.log(params.q)
    w = np.exp(logw - logw.max())
    return w / w.sum(), kap


# -- transfer-matrix partition function (independent route) ------------


def transfer_matrix_log_z(domain: Domain, bc: BoundaryCondition,
                          params: ModelParams, cap: int = 4096) -> float:
    """log Z by slicing the box into x-layers.

    Independent of enumerate_potts: builds a dense transfer matrix over
    the q^L colorings of one layer (L = layer size), with the boundary
    field absorbed into the diagonal.
    """
    q, beta = params.q, params.beta
    ir, kr = domain.i_range, domain.k_range
    layer = [(j, k) for k in kr for j in ir]
    nl = len(layer)
    n_states = q ** nl
    if n_states > cap:
        raise EnumerationCapError(f"layer state count {n_states} exceeds {cap}")
    d = _mixed_radix(n_states, nl, q)  # colors - 1
    pos = {jk: t for t, jk in enumerate(layer)}
    e_in = np.zeros(n_states, dtype=np.int64)
    e_field = np.zeros(n_states, dtype=np.int64)
    e_end = np.zeros(n_states, dtype=np.int64)
    for t, (j, k) in enumerate(layer):
        for dj, dk in ((1, 0), (0, 1)):
            t2 = pos.get((j + dj, k + dk))
            if t2 is not None:
                e_in += d[:, t] != d[:, t2]
        for dj, dk in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if (j + dj) not in ir or (k + dk) not in kr:
                # lateral/top/bottom shell color depends only on height
                c = bc.color_of((ir.start, j + dj, k + dk))
                e_field += d[:, t] != (c - 1)
        c = bc.color_of((ir.start - 1, j, k))  # end shells: same both sides
        e_end += d[:, t] != (c - 1)
    cross = (d[:, None, :] != d[None, :, :]).sum(axis=2)
    transfer = np.exp(-beta * cross)
    diag = np.exp(-beta * (e_in + e_field).astype(np.float64))
    v = diag * np.exp(-beta * e_end.astype(np.float64))
    log_scale = 0.0
    for _ in range(domain.n - 1):
        v = (v @ transfer) * diag
        m = v.max()
        v /= m
        log_scale += math.log(m)
    v = v * np.exp(-beta * e_end.astype(np.float64))
    return float(math.log(v.sum()) + log_scale)


# -- coupling pushforward (collapsed exact scan) -----------------------


@dataclass
class _CollapsedSystem:
    edge_node_u: np.ndarray
    edge_node_v: np.ndarray
    edge_class: np.ndarray  # 0 = plain interior edge; g = boundary group of size g
    n_weight_classes: int
    n_nodes: int
    n_interior: int
    red_node: int
    blue_node: int


def _collapsed_system(domain: Domain, bc: BoundaryCondition) -> _CollapsedSystem:
    cached = getattr(domain, "_collapsed_cache", None)
    if cached is None:
        cached = {}
        domain._collapsed_cache = cached
    if bc in cached:
        return cached[bc]
    if bc.n_wiring_classes != 2:
        raise ValueError("collapsed coupling scan needs two wiring classes")
    n = domain.n_sites
    si = domain.site_index
    eu, ev, ecls = [], [], []
    for u, v in domain.interior_edges:
        eu.append(si[u])
        ev.append(si[v])
        ecls.append(0)
    groups: dict[tuple, int] = {}
    for u, v in domain.boundary_edges:
        key = (si[u], bc.wiring_class_of(v))
        groups[key] = groups.get(key, 0) + 1
    for (t, cls), g in sorted(groups.items()):
        eu.append(t)
        ev.append(n + cls)
        ecls.append(g)
    sys = _CollapsedSystem(
        np.array(eu, dtype=np.int64), np.array(ev, dtype=np.int64),
        np.array(ecls, dtype=np.int64), max(ecls) + 1, n + 2, n, n, n + 1)
    cached[bc] = sys
    return sys


def _collapsed_scan(domain: Domain, bc: BoundaryCondition):
    """(unique codes, inverse index, per-class counts, kappa) of the
    disconnection-conditioned collapsed FK states; cached per (domain, bc)
    since none of it depends on (q, beta)."""
    cached = getattr(domain, "_collapsed_scan_cache", None)
    if cached is None:
        cached = {}
        domain._collapsed_scan_cache = cached
    if bc not in cached:
        sys = _collapsed_system(domain, bc)
        codes, feat = _kernels.fk_collapsed_scan(
            sys.edge_node_u, sys.edge_node_v, sys.edge_class,
            sys.n_weight_classes, sys.n_nodes, sys.red_node, sys.blue_node)
        counts = np.empty((feat.shape[0], sys.n_weight_classes), dtype=np.int64)
        f = feat.copy()
        for c in range(sys.n_weight_classes):
            counts[:, c] = f & 63
            f >>= 6
        kappa = f
        uniq, inverse = np.unique(codes, return_inverse=True)
        cached[bc] = (uniq, inverse, counts, kappa)
    return cached[bc]


@dataclass
class PushforwardResult:
    tv: float
    n_codes: int
    fk_probs: np.ndarray
    potts_probs: np.ndarray


def coupling_pushforward_tv(domain: Domain, bc: BoundaryCondition,
                            params: ModelParams) -> PushforwardResult:
    """TV distance between (a) the disconnection-conditioned FK measure
    pushed through uniform cluster coloring and (b) the exact Potts
    measure with the same boundary colors.

    Boundary-edge bundles to a wiring class are collapsed exactly: a
    bundle of g parallel edges contributes open-weight (1+x)^g - 1 and
    closed-weight 1 without changing kappa.
    """
    q = params.q
    x = params.p / (1.0 - params.p)
    sys = _collapsed_system(domain, bc)
    uniq, inverse, counts, kappa = _collapsed_scan(domain, bc)
    class_logw = np.empty(sys.n_weight_classes)
    class_logw[0] = math.log(x)
    for g in range(1, sys.n_weight_classes):
        class_logw[g] = math.log((1.0 + x) ** g - 1.0)
    logw = counts @ class_logw + kappa * math.log(q)
    w = np.exp(logw - logw.max())
    acc = np.bincount(inverse, weights=w, minlength=uniq.shape[0])
    p_code = acc / acc.sum()

    n = sys.n_interior
    base = n + 2
    pushed = np.zeros(q ** n, dtype=np.float64)
    q_pow = q ** np.arange(n, dtype=np.int64)
    for ci, code in enumerate(uniq):
        digits = np.empty(n, dtype=np.int64)
        c = int(code)
        for t in range(n):
            digits[t] = c % base
            c //= base
        # red cluster sites carry color index (RED - 1) = 1
        idxs = np.array([int(q_pow[digits == 0].sum())], dtype=np.int64)
        free_ids = np.unique(digits[digits >= 2])
        for fid in free_ids:
            wsum = int(q_pow[digits == fid].sum())
            idxs = (idxs[:, None]
                    + np.arange(q, dtype=np.int64)[None, :] * wsum).ravel()
        pushed[idxs] += p_code[ci] / q ** len(free_ids)

    potts = enumerate_potts(domain, bc, params).probabilities()
    tv = 0.5 * float(np.abs(pushed - potts).sum())
    return PushforwardResult(tv, uniq.shape[0], pushed, potts)


# -- free-energy identity ----------------------------------------------


@dataclass
class FKGraph:
    """Abstract FK graph with a distinguished tunable edge set."""

    edge_node_u: np.ndarray
    edge_node_v: np.ndarray
    in_tilde: np.ndarray
    n_nodes: int

    @property
    def n_edges(self) -> int:
        return self.edge_node_u.shape[0]


def single_edge_graph() -> FKGraph:
    return FKGraph(np.array([0], dtype=np.int64), np.array([1], dtype=np.int64),
                   np.array([True]), 2)


def box_fk_graph(domain: Domain, bc: BoundaryCondition,
                 keep_classes: tuple[int, ...] | None = None,
                 anchor_sites: tuple = ()) -> FKGraph:
    """FK graph of a boxed domain with wired class nodes, optionally
    keeping only some wiring classes (edges to dropped classes are
    removed entirely) and adding tunable anchor edges from the given
    interior sites to one extra external vertex."""
    if keep_classes is None:
        keep_classes = tuple(range(bc.n_wiring_classes))
    n = domain.n_sites
    si = domain.site_index
    class_node = {}
    nid = n
    for cls in keep_classes:
        class_node[cls] = nid
        nid += 1
    eu, ev, tilde = [], [], []
    for u, v in domain.interior_edges:
        eu.append(si[u])
        ev.append(si[v])
        tilde.append(False)
    for u, v in domain.boundary_edges:
        cls = bc.wiring_class_of(v)
        if cls in class_node:
            eu.append(si[u])
            ev.append(class_node[cls])
            tilde.append(False)
    if anchor_sites:
        ext = nid
        nid += 1
        for s in anchor_sites:
            eu.append(si[tuple(s)])
            ev.append(ext)
            tilde.append(True)
    return FKGraph(np.array(eu, dtype=np.int64), np.array(ev, dtype=np.int64),
                   np.array(tilde, dtype=bool), nid)


@dataclass
class FreeEnergyResult:
    lhs: float
    rhs: float
    discrepancy: float
    quad_error: float


def free_energy_identity_check(graph: FKGraph, params: ModelParams,
                               theta0: float, theta1: float,
                               cap: int = STATE_CAP) -> FreeEnergyResult:
    """Check log Z(theta1) - log Z(theta0) against the integral of the
    tunable-edge open-count marginal over theta.

    Plain edges sit at the model's p; the tilde edges share the tunable
    parameter theta.  lhs comes from two exact partition functions; rhs
    from adaptive quadrature of the exact marginals; both routes use only
    the coefficient table N[a, b, kappa].
    """
    if not (0.0 < theta0 < theta1 < 1.0):
        raise ValueError("need 0 < theta0 < theta1 < 1")
    if (1 << graph.n_edges) > cap:
        raise EnumerationCapError(f"2^{graph.n_edges} exceeds cap {cap}")
    table = _kernels.fk_poly_table(graph.edge_node_u, graph.edge_node_v,
                                   graph.in_tilde, graph.n_nodes)
    a_idx, b_idx, k_idx = np.nonzero(table)
    counts = table[a_idx, b_idx, k_idx]
    xp = params.p / (1.0 - params.p)
    log_base = (a_idx * math.log(xp) if xp != 1.0 else np.zeros_like(counts)) \
        + k_idx * math.log(params.q) + np.log(counts)

    def weights(theta: float) -> np.ndarray:
        xt = theta / (1.0 - theta)
        return np.exp(log_base + b_idx * math.log(xt))

    def log_z(theta: float) -> float:
        lw = log_base + b_idx * math.log(theta / (1.0 - theta))
        m = lw.max()
        return float(m + math.log(np.exp(lw - m).sum()))

    def integrand(theta: float) -> float:
        w = weights(theta)
        return float((w * b_idx).sum() / w.sum() / (theta * (1.0 - theta)))

    lhs = log_z(theta1) - log_z(theta0)
    rhs, err = quad(integrand, theta0, theta1, epsabs=1e-12, epsrel=1e-9,
                    limit=200)
    return FreeEnergyResult(lhs, rhs, abs(lhs - rhs), err)


# -- interface lift-ratio inequality -----------------------------------


def _spin_log_sum(edge_u: np.ndarray, edge_v: np.ndarray, n_nodes: int,
                  q: int, beta: float, cap: int = STATE_CAP) -> float:
    """log sum over all q^V colorings of exp(-beta * #bichromatic edges)."""
    n_states = q ** n_nodes
    if n_states > cap:
        raise EnumerationCapError(f"q^V = {n_states} exceeds cap {cap}")
    d = _mixed_radix(n_states, n_nodes, q)
    e = np.zeros(n_states, dtype=np.int64)
    for t in range(edge_u.shape[0]):
        e += d[:, edge_u[t]] != d[:, edge_v[t]]
    w = np.exp(-beta * e.astype(np.float64))
    return float(math.log(w.sum()))


def graph_fk_log_z_spin(edge_u: np.ndarray, edge_v: np.ndarray, n_nodes: int,
                        params: ModelParams) -> float:
    """log sum_omega x^{|omega|} q^{kappa} via the spin-sum identity
    (the sum equals (1-p)^{-|E|} times the unconstrained spin sum)."""
    ne = edge_u.shape[0]
    return ne * params.beta + _spin_log_sum(edge_u, edge_v, n_nodes,
                                            params.q, params.beta)


def graph_fk_log_z_enum(edge_u: np.ndarray, edge_v: np.ndarray, n_nodes: int,
                        params: ModelParams, cap: int = STATE_CAP) -> float:
    """Same quantity by direct enumeration over edge masks (dual route)."""
    ne = edge_u.shape[0]
    if (1 << ne) > cap:
        raise EnumerationCapError(f"2^{ne} exceeds cap {cap}")
    kap, _ = _kernels.fk_mask_scan(np.asarray(edge_u, dtype=np.int64),
                                   np.asarray(edge_v, dtype=np.int64),
                                   n_nodes, 0, -1)
    masks = np.arange(1 << ne, dtype=np.uint64)
    log_x = math.log(params.p / (1.0 - params.p))
    logw = _popcount64(masks) * log_x + kap * math.log(params.q)
    m = logw.max()
    return float(m + math.log(np.exp(logw - m).sum()))


def flat_interface_plaquettes(domain: Domain) -> frozenset:
    """The n^2 horizontal plaquettes at height 0."""
    out = set()
    for i in domain.i_range:
        for j in domain.i_range:
            out.add(Plaquette((i, j, -1), (i, j, 0)))
    return frozenset(out)


def _top_level_sites(domain: Domain) -> list:
    k_top = domain.k_range.stop - 1
    return [s for s in domain.sites if s[2] == k_top]


def _red_constrained_sum(domain: Domain, bc: BoundaryCondition,
                         params: ModelParams, perm: np.ndarray | None = None
                         ) -> float:
    """Sum over the free edges of the top level (in-plane edges at weight
    x, per-site red-boundary bundles at weight (1+x)^g - 1) restricted to
    every top-level site being connected to the red class."""
    x = params.p / (1.0 - params.p)
    top = _top_level_sites(domain)
    node = {s: t for t, s in enumerate(top)}
    red = len(top)
    eu, ev, w = [], [], []
    for u, v in domain.interior_edges:
        if u in node and v in node:
            eu.append(node[u])
            ev.append(node[v])
            w.append(x)
    groups: dict = {}
    for u, v in domain.boundary_edges:
        if u in node and bc.color_of(v) == RED:
            groups[node[u]] = groups.get(node[u], 0) + 1
    for t, g in sorted(groups.items()):
        eu.append(t)
        ev.append(red)
        w.append((1.0 + x) ** g - 1.0)
    eu = np.array(eu, dtype=np.int64)
    ev = np.array(ev, dtype=np.int64)
    w = np.array(w, dtype=np.float64)
    if perm is not None:
        eu, ev, w = eu[perm], ev[perm], w[perm]
    return float(_kernels.connected_event_sum(eu, ev, w, red + 1, red,
                                              len(top)))


def _blue_subgraph(domain: Domain, bc: BoundaryCondition, sites):
    """Induced subgraph on the given sites plus one wired blue node;
    red-boundary edges do not appear (they are forced closed)."""
    node = {s: t for t, s in enumerate(sites)}
    blue = len(node)
    eu, ev = [], []
    for u, v in domain.interior_edges:
        if u in node and v in node:
            eu.append(node[u])
            ev.append(node[v])
    for u, v in domain.boundary_edges:
        if u in node and bc.color_of(v) == BLUE:
            eu.append(node[u])
            ev.append(blue)
    return (np.array(eu, dtype=np.int64), np.array(ev, dtype=np.int64),
            blue + 1)


@dataclass
class XiRatioResult:
    log_xi_fl: float
    log_xi_dob: float
    log_lower_bound: float
    components: dict

    @property
    def xi_fl(self) -> float:
        return math.exp(self.log_xi_fl)

    @property
    def xi_dob(self) -> float:
        return math.exp(self.log_xi_dob)


def xi_ratio_check(n: int, params: ModelParams, j: int = 1, c_const: float = 1.0,
                   interface: frozenset | None = None,
                   edge_order_seed: int | None = None) -> XiRatioResult:
    """Exact lift ratios P(I_top = lifted I) / P(I_top = I) under the
    hard-floor and split measures for the flat interface I, with the
    inequalities ratio_fl >= ratio_dob >= exp(-4(beta + C) j n).

    Each ratio factorizes over the event: the region above the lifted
    interface carries an all-connected-to-red constrained sum (enumerated
    over collapsed free edges), the region below an unconstrained FK
    partition function (evaluated via the spin-sum identity).  The
    normalizing constants cancel inside each ratio.
    """
    if 2 * j > n:
        raise ValueError(f"need j <= n/2, got j={j}, n={n}")
    if j != 1:
        raise NotImplementedError("only the single-step lift is enumerable")
    dom_fl = Domain("floor", n, 1)
    dom_sl = Domain("slab", n, 1)
    flat = flat_interface_plaquettes(dom_fl)
    if interface is not None:
        given = interface.plaquettes if hasattr(interface, "plaquettes") \
            else frozenset(interface)
        if given != flat:
            raise ValueError("only the flat interface is enumerable here")
    # flat has column height 0 < j
    bc_fl = BoundaryCondition(FLOOR)
    bc_sl = BoundaryCondition(SPLIT, 0)
    q, beta = params.q, params.beta

    perm_top_fl = perm_top_sl = None
    if edge_order_seed is not None:
        rng = np.random.default_rng(edge_order_seed)
        n_free = n * n + 2 * n * (n - 1)  # bundles + in-plane edges
        perm_top_fl = rng.permutation(n_free)
        perm_top_sl = rng.permutation(n_free)

    # hard floor: P(I) ~ q^2 K, P(lifted I) ~ q B_below
    k_fl = _red_constrained_sum(dom_fl, bc_fl, params, perm_top_fl)
    eu, ev, nn = _blue_subgraph(dom_fl, bc_fl, dom_fl.sites)
    log_b_fl = graph_fk_log_z_spin(eu, ev, nn, params)
    log_xi_fl = log_b_fl - math.log(q) - math.log(k_fl)

    # split: P(I) ~ q K B_lower, P(lifted I) ~ q B_whole
    k_dob = _red_constrained_sum(dom_sl, bc_sl, params, perm_top_sl)
    lower = [s for s in dom_sl.sites if s[2] < 0]
    eu, ev, nn = _blue_subgraph(dom_sl, bc_sl, lower)
    log_b_low = graph_fk_log_z_spin(eu, ev, nn, params)
    eu, ev, nn = _blue_subgraph(dom_sl, bc_sl, dom_sl.sites)
    log_b_big = graph_fk_log_z_spin(eu, ev, nn, params)
    log_xi_dob = log_b_big - math.log(k_dob) - log_b_low

    log_lb = -4.0 * (beta + c_const) * j * n
    result = XiRatioResult(log_xi_fl, log_xi_dob, log_lb, {
        "k_fl": k_fl, "k_dob": k_dob, "log_b_fl": log_b_fl,
        "log_b_low": log_b_low, "log_b_big": log_b_big})
    if log_xi_fl < log_xi_dob - 1e-12:
        raise OracleCheckError(
            f"lift-ratio inequality failed: fl {log_xi_fl} < dob {log_xi_dob}")
    if log_xi_dob < log_lb - 1e-12:
        raise OracleCheckError(
            f"lift-ratio lower bound failed: dob {log_xi_dob} < {log_lb}")
    return result


# -- monotonicity and FKG ----------------------------------------------


def _certify(event, domain: Domain, bc: BoundaryCondition, q: int) -> None:
    from . import fuzzy
    cached = getattr(domain, "_cert_cache", None)
    if cached is None:
        cached = {}
        domain._cert_cache = cached
    key = (event.name, bc, q)
    if key not in cached:
        # blue-increasingness only involves blue sets: exhaust at q=2
        inc = fuzzy.certify_blue_increasing(event, domain, bc, 2)
        meas = fuzzy.certify_fuzzy_measurable(event, domain, bc, q)
        cached[key] = inc and meas
    if not cached[key]:
        raise ValueError(f"event {event.name!r} failed certification")


def monotonicity_check(n: int, m: int, h: int, params: ModelParams, event,
                       tol: float = 1e-12, certify: bool = True
                       ) -> tuple[float, float]:
    """Exact P under the hard floor vs the conditioned split measure;
    asserts hard-floor <= conditioned-split + tol for certified
    blue-increasing events."""
    from .interfaces import blue_interface_in_upper_half
    dom_fl = Domain("floor", n, m)
    bc_fl = BoundaryCondition(FLOOR)
    dom_sl = Domain("slab", n, m)
    bc_sl = BoundaryCondition(SPLIT, h)
    if certify:
        _certify(event, dom_fl, bc_fl, params.q)
        _certify(event, dom_sl, bc_sl, params.q)
    p_fl = enumerate_potts(dom_fl, bc_fl, params).prob(event.predicate)
    soft = enumerate_potts(dom_sl, bc_sl, params) \
        .conditional(blue_interface_in_upper_half)
    p_soft = soft.prob(event.predicate)
    if p_fl > p_soft + tol:
        raise OracleCheckError(
            f"monotonicity failed for {event.name!r}: {p_fl} > {p_soft}")
    return p_fl, p_soft


def fkg_check(domain: Domain, bc: BoundaryCondition, params: ModelParams,
              event_a, event_b, tol: float = 1e-12, certify: bool = True
              ) -> tuple[float, float]:
    """phi(A and B) >= phi(A) phi(B) - tol for blue-increasing events
    under the fuzzy projection of the exact Potts measure."""
    if certify:
        _certify(event_a, domain, bc, params.q)
        _certify(event_b, domain, bc, params.q)
    em = enumerate_potts(domain, bc, params)
    ind_a = em.indicator(event_a.predicate)
    ind_b = em.indicator(event_b.predicate)
    p_ab = em.prob(ind_a & ind_b)
    p_prod = em.prob(ind_a) * em.prob(ind_b)
    if p_ab < p_prod - tol:
        raise OracleCheckError(
            f"FKG failed for ({event_a.name!r}, {event_b.name!r}): "
            f"{p_ab} < {p_prod}")
    return p_ab, p_prod


# -- named check suites (CLI surface) ----------------------------------


def _suite_coupling() -> list[dict]:
    checks = []
    for (kind, n, m) in (("floor", 2, 1), ("floor", 2, 2)):
        for q in (2, 3):
            for beta in (0.7, 1.2):
                dom = Domain(kind, n, m)
                res = coupling_pushforward_tv(dom, BoundaryCondition(FLOOR),
                                              ModelParams(q, beta))
                checks.append({"name": f"pushforward-{n}x{n}x{m}-q{q}-b{beta}",
                               "tv": res.tv, "passed": res.tv < 1e-10})
    return checks


def _suite_monotonicity() -> list[dict]:
    from .fuzzy import make_standard_events
    checks = []
    dom = Domain("slab", 2, 1)
    events = make_standard_events(dom)
    for h in (0, 1):
        for ev in events:
            try:
                p_fl, p_soft = monotonicity_check(2, 1, h, ModelParams(2, 1.0),
                                                  ev)
                checks.append({"name": f"{ev.name}-h{h}", "hard": p_fl,
                               "soft": p_soft, "passed": True})
            except OracleCheckError as exc:
                checks.append({"name": f"{ev.name}-h{h}", "passed": False,
                               "error": str(exc)})
    return checks


def _suite_fkg() -> list[dict]:
    from .fuzzy import make_standard_events
    checks = []
    dom = Domain("floor", 2, 1)
    bc = BoundaryCondition(FLOOR)
    events = make_standard_events(dom)
    for a in events:
        for b in events:
            try:
                p_ab, p_prod = fkg_check(dom, bc, ModelParams(3, 1.0), a, b)
                checks.append({"name": f"{a.name}&{b.name}", "joint": p_ab,
                               "product": p_prod, "passed": True})
            except OracleCheckError as exc:
                checks.append({"name": f"{a.name}&{b.name}", "passed": False,
                               "error": str(exc)})
    return checks


def _suite_free_energy() -> list[dict]:
    checks = []
    params = ModelParams(2, math.log(2.0))
    res = free_energy_identity_check(single_edge_graph(), params, 0.2, 0.8)
    checks.append({"name": "single-edge", "discrepancy": res.discrepancy,
                   "passed": res.discrepancy < 1e-8})
    dom = Domain("floor", 2, 1)
    graph = box_fk_graph(dom, BoundaryCondition(FLOOR),
                         anchor_sites=dom.sites[:2])
    res = free_energy_identity_check(graph, ModelParams(2, 1.0), 0.1, 0.9)
    checks.append({"name": "floor-2x2x1-anchored", "discrepancy": res.discrepancy,
                   "passed": res.discrepancy < 1e-6})
    return checks


def _suite_xi_ratio() -> list[dict]:
    try:
        res = xi_ratio_check(3, ModelParams(2, 1.0))
        return [{"name": "flat-3x3-lift", "log_ratio_fl": res.log_xi_fl,
                 "log_ratio_dob": res.log_xi_dob, "passed": True}]
    except OracleCheckError as exc:
        return [{"name": "flat-3x3-lift", "passed": False, "error": str(exc)}]


SUITES = {
    "coupling": _suite_coupling,
    "monotonicity": _suite_monotonicity,
    "fkg": _suite_fkg,
    "free-energy": _suite_free_energy,
    "xi-ratio": _suite_xi_ratio,
}


def run_suite(name: str) -> dict:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; available: {sorted(SUITES)}")
    checks = SUITES[name]()
    return {"suite": name, "passed": all(c["passed"] for c in checks),
            "checks": checks}
