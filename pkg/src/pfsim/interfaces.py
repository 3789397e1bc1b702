# interfaces.py
"""
Extraction of the separating interfaces from coupled spin/edge
configurations, per-column height maps, the interface partial order, and
the lifting / spike transforms.

Conventions.  A vertex region V is grown from the matching boundary
cells; its augmentation V-hat absorbs the complement components that do
not touch the boundary shell (their outer vertex boundary then lies in
V).  Interfaces contain only plaquettes dual to *domain* edges (at least
one interior endpoint); the contact plaquettes between blue and red
boundary cells act as exterior anchors for the full interface but are
not members.  Per-column heights are driven by horizontal plaquettes:
a half-integer column meets a plaquette's closed unit square iff the
plaquette is horizontal and its cell contains the column.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import ndimage

from .lattice import (BLUE, RED, BoundaryCondition, Domain, Plaquette, Site,
                      plaquette_of_edge)
from .rc import EdgeConfig, cluster_labeling
from .sampler import SpinConfig

_STRUCT6 = ndimage.generate_binary_structure(3, 1)


@dataclass
class VertexRegion:
    mask: np.ndarray  # bool over the full grid (interior + shell)
    tag: str
    domain: Domain


@dataclass
class InterfaceSet:
    plaquettes: frozenset
    label: str  # Blue / Red / Top / Bot / Full
    domain: Domain
    vhat: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.plaquettes)

    @cached_property
    def column_heights2(self) -> dict:
        """Per-column (overline, underline) heights in doubled units,
        from horizontal plaquettes; columns the interface misses are absent."""
        out: dict[tuple[int, int], tuple[int, int]] = {}
        for p in self.plaquettes:
            if p.orientation != "horizontal":
                continue
            _, i, j = p.projection()
            h2 = p.height2
            if (i, j) in out:
                lo, hi = out[(i, j)]
                out[(i, j)] = (min(lo, h2), max(hi, h2))
            else:
                out[(i, j)] = (h2, h2)
        return out

    def overline_hgt2(self, col) -> int | None:
        v = self.column_heights2.get(tuple(col))
        return None if v is None else v[1]

    def underline_hgt2(self, col) -> int | None:
        v = self.column_heights2.get(tuple(col))
        return None if v is None else v[0]

    def max_overline_hgt2(self) -> int | None:
        ch = self.column_heights2
        return max((v[1] for v in ch.values()), default=None)


# -- region growing ----------------------------------------------------


def _grow_from_seeds(mask: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Union of connected components of mask that intersect seeds."""
    lab, n = ndimage.label(mask, structure=_STRUCT6)
    if n == 0:
        return np.zeros_like(mask)
    hit = np.unique(lab[seeds & (lab > 0)])
    if hit.size == 0:
        return np.zeros_like(mask)
    return np.isin(lab, hit)


def augment(mask: np.ndarray, domain: Domain) -> np.ndarray:
    """Absorb complement components whose outer vertex boundary lies in
    the region (equivalently: components not touching the boundary shell)."""
    comp = domain.valid_mask & ~mask
    lab, n = ndimage.label(comp, structure=_STRUCT6)
    if n == 0:
        return mask.copy()
    touching = np.unique(lab[domain.boundary_mask & (lab > 0)])
    absorbed = comp & ~np.isin(lab, touching)
    return mask | absorbed


def _edge_grid_arrays(domain: Domain):
    cached = getattr(domain, "_edge_grid_arrays", None)
    if cached is None:
        shape = domain.grid_shape
        eu = np.array([np.ravel_multi_index(domain.grid_idx(u), shape)
                       for u, _ in domain.edges], dtype=np.int64)
        ev = np.array([np.ravel_multi_index(domain.grid_idx(v), shape)
                       for _, v in domain.edges], dtype=np.int64)
        cached = (eu, ev)
        domain._edge_grid_arrays = cached
    return cached


def _crossing_plaquettes(vhat: np.ndarray, domain: Domain) -> frozenset:
    eu, ev = _edge_grid_arrays(domain)
    flat = vhat.ravel()
    idx = np.nonzero(flat[eu] != flat[ev])[0]
    return frozenset(plaquette_of_edge(*domain.edges[i]) for i in idx)


def _shell_color_mask(spin_or_domain, bc: BoundaryCondition, color: int,
                      domain: Domain) -> np.ndarray:
    grid = domain.boundary_color_grid(bc)
    return grid == color


def extract_potts_interface(spin: SpinConfig, color: int) -> InterfaceSet:
    """I_blue or I_red of a spin configuration (Potts interfaces)."""
    domain, bc = spin.domain, spin.bc
    grid = spin.grid()
    mask = (grid == color) & domain.valid_mask
    seeds = _shell_color_mask(spin, bc, color, domain)
    v = _grow_from_seeds(mask, seeds)
    vhat = augment(v, domain)
    label = "Blue" if color == BLUE else "Red"
    return InterfaceSet(_crossing_plaquettes(vhat, domain), label, domain, vhat)


def extract_fk_interface(omega: EdgeConfig, side: str) -> InterfaceSet:
    """I_top (open cluster of the red class) or I_bot (of the blue class)."""
    domain, bc = omega.domain, omega.bc
    if bc.n_wiring_classes < 2:
        raise ValueError("fk interfaces need two wiring classes")
    lab = cluster_labeling(omega)
    if lab.class_node_label(0) == lab.class_node_label(1):
        raise ValueError("disconnection event violated")
    cls = 0 if side == "top" else 1
    v = np.zeros(domain.grid_shape, dtype=bool)
    in_cluster = lab.touches(cls)
    for t, s in enumerate(domain.sites):
        if in_cluster[t]:
            v[domain.grid_idx(s)] = True
    shell_color = RED if cls == 0 else BLUE
    v |= _shell_color_mask(omega, bc, shell_color, domain)
    vhat = augment(v, domain)
    return InterfaceSet(_crossing_plaquettes(vhat, domain),
                        "Top" if side == "top" else "Bot", domain, vhat)


# -- full interface ----------------------------------------------------


def _anchor_plaquettes(domain: Domain, bc: BoundaryCondition) -> list[Plaquette]:
    """Contact plaquettes between the blue and red boundary classes.

    For split bc these are duals of adjacent blue/red shell pairs.  Floor
    bc has no adjacent blue/red shell pairs; its anchor is the rim ring
    of the bottom face (bottom-shell cells paired with the lateral
    exterior cell at the same height, viewed as red).
    """
    if bc.n_wiring_classes < 2:
        raise ValueError("full interface needs two wiring classes")
    anchors = []
    if bc.variant == "split":
        bindex = domain.boundary_index
        for s in domain.boundary_sites:
            if bc.color_of(s) != BLUE:
                continue
            for d in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
                      (0, 0, 1), (0, 0, -1)):
                t = (s[0] + d[0], s[1] + d[1], s[2] + d[2])
                if t in bindex and bc.color_of(t) == RED:
                    anchors.append(plaquette_of_edge(s, t))
    else:  # floor
        ir = domain.i_range
        for s in domain.boundary_sites:
            if bc.color_of(s) != BLUE:
                continue
            for d in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)):
                t = (s[0] + d[0], s[1] + d[1], s[2] + d[2])
                if t[0] not in ir or t[1] not in ir:
                    anchors.append(plaquette_of_edge(s, t))
    return anchors


def closed_plaquettes(omega: EdgeConfig) -> list[Plaquette]:
    return [plaquette_of_edge(*omega.domain.edges[i])
            for i in np.nonzero(~omega.bits)[0]]


def one_connected_components(plaqs: list[Plaquette]) -> list[set]:
    """Partition by 1-connectivity (shared unit segment)."""
    seg_map: dict = {}
    for idx, p in enumerate(plaqs):
        for s in p.segments():
            seg_map.setdefault(s, []).append(idx)
    seen = [False] * len(plaqs)
    comps = []
    for start in range(len(plaqs)):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = set()
        while stack:
            i = stack.pop()
            comp.add(i)
            for s in plaqs[i].segments():
                for jdx in seg_map[s]:
                    if not seen[jdx]:
                        seen[jdx] = True
                        stack.append(jdx)
        comps.append(comp)
    return comps


def _full_candidate_plaquettes(omega: EdgeConfig) -> list[Plaquette]:
    """Closed-edge duals eligible for the full interface.

    A closed edge contributes its dual plaquette when it crosses the
    boundary of an augmented wired region, lies entirely between the two
    regions, or is a single-plaquette decoration (an internal closed edge
    whose dual shares no segment with another internal closed dual).  The
    last clause keeps dangling hairs on an otherwise clean surface while
    excluding the diffuse web of thermal closed edges deep inside the
    wired clusters, which at moderate coupling strength would otherwise
    percolate and swallow the separating surface.
    """
    domain = omega.domain
    vt = extract_fk_interface(omega, "top").vhat.ravel()
    vb = extract_fk_interface(omega, "bot").vhat.ravel()
    eu, ev = _edge_grid_arrays(domain)
    cand: list[Plaquette] = []
    internal: list[Plaquette] = []
    for i in np.nonzero(~omega.bits)[0]:
        a, b = eu[i], ev[i]
        crossing = (vt[a] != vt[b]) or (vb[a] != vb[b])
        middle = not (vt[a] or vb[a] or vt[b] or vb[b])
        p = plaquette_of_edge(*domain.edges[i])
        if crossing or middle:
            cand.append(p)
        else:
            internal.append(p)
    seg_count: dict = {}
    for p in internal:
        for s in p.segments():
            seg_count[s] = seg_count.get(s, 0) + 1
    cand.extend(p for p in internal
                if all(seg_count[s] == 1 for s in p.segments()))
    return cand


def extract_full_interface(omega: EdgeConfig) -> InterfaceSet:
    """The separating surface: 1-connected components of the candidate
    closed-edge duals incident to the blue/red boundary contact
    plaquettes, joined through that contact ring."""
    domain, bc = omega.domain, omega.bc
    from .rc import check_disconnection
    if not check_disconnection(omega):
        raise ValueError("disconnection event violated")
    plaqs = _full_candidate_plaquettes(omega)
    anchor_segs = set()
    for a in _anchor_plaquettes(domain, bc):
        anchor_segs.update(a.segments())
    comps = one_connected_components(plaqs)
    out = set()
    for comp in comps:
        if any(not anchor_segs.isdisjoint(plaqs[i].segments()) for i in comp):
            out.update(plaqs[i] for i in comp)
    return InterfaceSet(frozenset(out), "Full", domain)


# -- ordering ----------------------------------------------------------


def verify_ordering(i_top: InterfaceSet, i_red: InterfaceSet,
                    i_blue: InterfaceSet, i_bot: InterfaceSet) -> bool:
    """Vertex-set form of I_top >= I_red >= I_blue >= I_bot."""
    vt, vr, vb, vo = i_top.vhat, i_red.vhat, i_blue.vhat, i_bot.vhat
    if any(v is None for v in (vt, vr, vb, vo)):
        raise ValueError("interfaces must carry their vertex regions")
    return (bool(np.all(vo <= vb))
            and bool(np.all(vt <= vr))
            and not bool(np.any(vr & vb)))


# -- transforms --------------------------------------------------------


def lateral_boundary_edges(domain: Domain, levels: range) -> list[tuple[Site, Site]]:
    """Boundary edges from interior sites at the given k-levels to the
    lateral shell (4n edges per level)."""
    ir = domain.i_range
    out = []
    for u, v in domain.boundary_edges:
        if u[2] in levels and v[2] == u[2] and (v[0] not in ir or v[1] not in ir):
            out.append((u, v))
    return out


def theta_shift(iface: InterfaceSet, j: int, domain: Domain) -> InterfaceSet:
    """Lift a Top-type interface in the upper half-space by j, adding the
    4jn lateral boundary plaquettes at heights in [0, j]."""
    if j < 0:
        raise ValueError("j must be >= 0")
    if j == 0:
        return iface
    if any(p.height2 < 0 for p in iface.plaquettes):
        raise ValueError("interface must lie in the upper half-space")
    top = iface.max_overline_hgt2()
    kmax = max(domain.k_range)
    if top is not None and top // 2 + j > kmax + 1:
        raise ValueError("shift overflows the ceiling")
    shifted = {Plaquette((p.u[0], p.u[1], p.u[2] + j),
                         (p.v[0], p.v[1], p.v[2] + j))
               for p in iface.plaquettes}
    ring = {plaquette_of_edge(u, v)
            for u, v in lateral_boundary_edges(domain, range(0, j))}
    out = frozenset(shifted | ring)
    assert len(out) == len(iface) + 4 * j * domain.n
    return InterfaceSet(out, iface.label, domain)


def _edge_index(domain: Domain) -> dict:
    cached = getattr(domain, "_edge_index_map", None)
    if cached is None:
        cached = {}
        for idx, (u, v) in enumerate(domain.edges):
            cached[(u, v)] = idx
            cached[(v, u)] = idx
        domain._edge_index_map = cached
    return cached


def spike_transform(omega: EdgeConfig, columns, h: int) -> EdgeConfig:
    """Dig a depth-h spike below the top interface over each given column:
    open the h vertical edges down the column, close the 4h sheathing
    horizontal edges and the one vertical edge below the lowest vertex."""
    if h < 1:
        raise ValueError("h must be >= 1")
    if not columns:
        return omega.copy()
    iface = extract_fk_interface(omega, "top")
    emap = _edge_index(omega.domain)
    bits = omega.bits.copy()
    for col in columns:
        uh2 = iface.underline_hgt2(col)
        if uh2 is None:
            raise ValueError(f"column {col} has no horizontal interface plaquette")
        k0 = uh2 // 2  # site just above the local minimum has k = k0
        i, j = col
        vs = [(i, j, k0 - t) for t in range(h + 1)]
        try:
            for a, b in zip(vs[:-1], vs[1:]):
                bits[emap[(a, b)]] = True
            for t in range(1, h + 1):
                v = vs[t]
                for d in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)):
                    w = (v[0] + d[0], v[1] + d[1], v[2] + d[2])
                    bits[emap[(v, w)]] = False
            below = (i, j, k0 - h - 1)
            bits[emap[(vs[-1], below)]] = False
        except KeyError as exc:
            raise ValueError(f"column {col} blocked: edge {exc} outside domain")
    return EdgeConfig(bits, omega.domain, omega.bc)


# -- event helpers shared with fuzzy / oracle --------------------------


def blue_interface_in_upper_half(spin: SpinConfig) -> bool:
    """The soft-floor event: I_blue lies in the closed upper half-space."""
    iface = extract_potts_interface(spin, BLUE)
    return all(p.height2 >= 0 for p in iface.plaquettes)


def vhat_blue_contains(spin: SpinConfig, site: Site) -> bool:
    iface = extract_potts_interface(spin, BLUE)
    return bool(iface.vhat[spin.domain.grid_idx(site)])
