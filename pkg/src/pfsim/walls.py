# walls.py
"""
Wall/ceiling decomposition of full interfaces: the horizontal star
augmentation I*, ceiling plaquettes (unique horizontal plaquette over
their cell), walls as 0-connected components of the rest, excess areas,
projections, hulls, and outermost-wall statistics.

Projection bookkeeping: horizontal plaquettes project to unit cells,
vertical plaquettes to unit segments.  Segments carry no area but block
2D flood-fill connectivity when computing hulls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .interfaces import InterfaceSet
from .lattice import Domain, Plaquette


@dataclass
class Wall:
    a_plaquettes: frozenset  # W cap I_Full
    b_plaquettes: frozenset  # W cap (I* \ I_Full)
    touches_lateral_boundary: bool = False

    @property
    def plaquettes(self) -> frozenset:
        return self.a_plaquettes | self.b_plaquettes

    @property
    def projection_cells(self) -> set:
        return {p.projection()[1:] for p in self.plaquettes
                if p.orientation == "horizontal"}

    @property
    def projection_segments(self) -> set:
        return {p.projection() for p in self.plaquettes
                if p.orientation == "vertical"}

    @property
    def excess_area(self) -> int:
        return len(self.a_plaquettes) - len(self.projection_cells)


@dataclass
class CeilingSet:
    components: list  # list of (frozenset of plaquettes, height2)


def star_augment(iface: InterfaceSet) -> frozenset:
    """I* : the interface plus all horizontal domain plaquettes
    1-connected to it."""
    domain = iface.domain
    base = set(iface.plaquettes)
    candidate_index = _horizontal_by_segment(domain)
    added = set()
    for p in base:
        for seg in p.segments():
            for q in candidate_index.get(seg, ()):
                if q not in base:
                    added.add(q)
    return frozenset(base | added)


def _horizontal_by_segment(domain: Domain) -> dict:
    cached = getattr(domain, "_horiz_seg_index", None)
    if cached is None:
        cached = {}
        from .lattice import plaquette_of_edge
        for u, v in domain.edges:
            p = plaquette_of_edge(u, v)
            if p.orientation != "horizontal":
                continue
            for seg in p.segments():
                cached.setdefault(seg, []).append(p)
        domain._horiz_seg_index = cached
    return cached


def _zero_connected_components(plaqs: list[Plaquette]) -> list[set]:
    """Partition by 0-connectivity (shared corner point)."""
    corner_map: dict = {}
    for idx, p in enumerate(plaqs):
        for c in p.corners():
            corner_map.setdefault(c, []).append(idx)
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
            for c in plaqs[i].corners():
                for j in corner_map[c]:
                    if not seen[j]:
                        seen[j] = True
                        stack.append(j)
        comps.append(comp)
    return comps


def decompose_walls(iface: InterfaceSet) -> tuple[list[Wall], CeilingSet]:
    """Partition I* into ceiling plaquettes and 0-connected walls."""
    domain = iface.domain
    star = star_augment(iface)
    cell_count: dict = {}
    for p in star:
        if p.orientation == "horizontal":
            cell = p.projection()[1:]
            cell_count[cell] = cell_count.get(cell, 0) + 1
    ceiling_plaqs = [p for p in star
                     if p.orientation == "horizontal"
                     and cell_count[p.projection()[1:]] == 1]
    ceil_set = set(ceiling_plaqs)
    wall_plaqs = [p for p in star if p not in ceil_set]

    ifull = set(iface.plaquettes)
    ir = domain.i_range
    lateral = (ir.start, ir.start + domain.n)
    walls = []
    for comp in _zero_connected_components(wall_plaqs):
        plaqs = [wall_plaqs[i] for i in comp]
        a = frozenset(p for p in plaqs if p in ifull)
        b = frozenset(p for p in plaqs if p not in ifull)
        touches = any(
            c[0] in lateral or c[1] in lateral
            for p in plaqs for c in p.corners())
        walls.append(Wall(a, b, touches))

    ceil_comps = []
    for comp in _zero_connected_components(ceiling_plaqs):
        plaqs = frozenset(ceiling_plaqs[i] for i in comp)
        h2 = next(iter(plaqs)).height2
        ceil_comps.append((plaqs, h2))
    return walls, CeilingSet(ceil_comps)


def total_excess(walls: list[Wall]) -> int:
    return sum(w.excess_area for w in walls)


def hull_cells(wall: Wall, domain: Domain) -> set:
    """rho(hull W): projection cells plus finite components of the
    complement, by 2D flood fill from outside the footprint.  Vertical
    segments block cell-to-cell connectivity but add no area."""
    blocked = wall.projection_cells
    segs = wall.projection_segments
    ir = domain.i_range
    lo, hi = ir.start - 1, ir.start + domain.n  # footprint plus one ring
    reached = set()
    stack = []
    for a in range(lo, hi + 1):
        for b in (lo, hi):
            for cell in ((a, b), (b, a)):
                if cell not in blocked and cell not in reached:
                    reached.add(cell)
                    stack.append(cell)
    while stack:
        a, b = stack.pop()
        for da, db, seg in (
                (1, 0, ("sy", a + 1, b)), (-1, 0, ("sy", a, b)),
                (0, 1, ("sx", a, b + 1)), (0, -1, ("sx", a, b))):
            nxt = (a + da, b + db)
            if not (lo <= nxt[0] <= hi and lo <= nxt[1] <= hi):
                continue
            if nxt in blocked or nxt in reached or seg in segs:
                continue
            reached.add(nxt)
            stack.append(nxt)
    interior = {(a, b) for a in range(lo, hi + 1) for b in range(lo, hi + 1)} \
        - reached - blocked
    return blocked | interior


def _wall_projection_inside_hull(wall: Wall, hull: set) -> bool:
    if not set(wall.projection_cells) <= hull:
        return False
    for kind, a, b in wall.projection_segments:
        if kind == "sy":  # segment between cells (a-1, b) and (a, b)
            if (a - 1, b) not in hull and (a, b) not in hull:
                return False
        else:  # "sx": between cells (a, b-1) and (a, b)
            if (a, b - 1) not in hull and (a, b) not in hull:
                return False
    return True


def outermost_walls(walls: list[Wall], domain: Domain) -> list[Wall]:
    hulls = [hull_cells(w, domain) for w in walls]
    out = []
    for i, w in enumerate(walls):
        dominated = any(
            j != i and _wall_projection_inside_hull(w, hulls[j])
            for j in range(len(walls)))
        if not dominated:
            out.append(w)
    return out


@dataclass
class WallSampleRow:
    sample_id: int
    full_size: int
    n_walls: int
    total_excess: int
    outermost_hull_area: int
    level_set_count: int
    boundary_wall_flag: bool


def wall_area_statistics(ifulls, domain: Domain, level_interfaces=None,
                         h: int = 1) -> list[WallSampleRow]:
    """Per-sample wall statistics.

    level_interfaces (defaults to the full interfaces themselves) drive
    the level-set count |{x : overline-hgt_x >= h}|.
    """
    if level_interfaces is None:
        level_interfaces = ifulls
    rows = []
    for sid, (ifull, ilev) in enumerate(zip(ifulls, level_interfaces)):
        walls, _ = decompose_walls(ifull)
        outer = outermost_walls(walls, domain)
        hull_area = sum(len(hull_cells(w, domain)) for w in outer)
        level = sum(1 for _, (_, hi2) in ilev.column_heights2.items()
                    if hi2 >= 2 * h)
        rows.append(WallSampleRow(
            sample_id=sid,
            full_size=len(ifull),
            n_walls=len(walls),
            total_excess=total_excess(walls),
            outermost_hull_area=hull_area,
            level_set_count=level,
            boundary_wall_flag=any(w.touches_lateral_boundary for w in walls)))
    return rows
