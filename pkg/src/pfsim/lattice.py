# lattice.py
"""
Geometry of the half-integer lattice boxes, their dual plaquettes, and
boundary-condition color/wiring assignments.

Sites are stored as integer triples (i, j, k); the physical site is
(i+1/2, j+1/2, k+1/2), so height(site) = k + 1/2.  All height arithmetic
is done in doubled units (integers) to avoid floating-point equality.

Two boxed domains are supported:

    FloorBox(n, m):  n x n footprint, site heights in (0, m)
    SlabBox(n, m):   n x n footprint, site heights in (-m, m)

The boundary is the outer vertex boundary: sites outside the box adjacent
to an interior site.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

# color encoding: 0 is reserved for "absent" cells in grid arrays
BLUE = 1
RED = 2

FLOOR = "floor"   # blue bottom face, red elsewhere
SPLIT = "split"   # red at heights > h, blue below
REDALL = "redall"

Site = tuple[int, int, int]

_AXES = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def adjacent(u: Site, v: Site) -> bool:
    """Nearest-neighbor adjacency on the site lattice."""
    d = abs(u[0] - v[0]) + abs(u[1] - v[1]) + abs(u[2] - v[2])
    return d == 1


def height2(s: Site) -> int:
    """Site height in doubled units: 2*(k + 1/2)."""
    return 2 * s[2] + 1


@dataclass(frozen=True, order=True)
class Plaquette:
    """Unit square dual to a lattice edge, identified by its site pair.

    u < v lexicographically on (k, j, i); axis is the direction in which
    u and v differ.  Horizontal plaquettes (dual to vertical edges) have
    integer height; vertical plaquettes have half-integer height.
    """

    u: Site
    v: Site

    @property
    def axis(self) -> int:
        for a in range(3):
            if self.u[a] != self.v[a]:
                return a
        raise ValueError("degenerate plaquette")

    @property
    def orientation(self) -> str:
        return "horizontal" if self.axis == 2 else "vertical"

    @property
    def height2(self) -> int:
        """Height of the plaquette midpoint in doubled units."""
        return self.u[2] + self.v[2] + 1

    @property
    def hgt(self) -> float:
        return self.height2 / 2.0

    def corners(self) -> tuple[tuple[int, int, int], ...]:
        """The 4 integer corner points of the square in R^3."""
        i, j, k = self.u
        a = self.axis
        if a == 2:
            z = k + 1
            return ((i, j, z), (i + 1, j, z), (i, j + 1, z), (i + 1, j + 1, z))
        if a == 0:
            x = i + 1
            return ((x, j, k), (x, j + 1, k), (x, j, k + 1), (x, j + 1, k + 1))
        y = j + 1
        return ((i, y, k), (i + 1, y, k), (i, y, k + 1), (i + 1, y, k + 1))

    def segments(self) -> tuple[tuple, ...]:
        """The 4 unit boundary segments, each a sorted pair of corners."""
        c = self.corners()
        # corners() lists a 2x2 grid in order (00, 10, 01, 11) in the square's plane
        pairs = ((c[0], c[1]), (c[0], c[2]), (c[1], c[3]), (c[2], c[3]))
        return tuple(tuple(sorted(p)) for p in pairs)

    def projection(self):
        """Shadow on the horizontal plane.

        Horizontal plaquettes project onto a unit cell, returned as
        ("c", a, b) for the cell [a,a+1]x[b,b+1]; vertical plaquettes
        project onto a unit segment, ("sx", a, b) for the segment from
        (a, b) to (a+1, b) or ("sy", a, b) for (a, b)-(a, b+1).
        """
        i, j, k = self.u
        a = self.axis
        if a == 2:
            return ("c", i, j)
        if a == 0:
            return ("sy", i + 1, j)
        return ("sx", i, j + 1)


def plaquette_of_edge(u: Site, v: Site) -> Plaquette:
    """Dual plaquette of the edge (u, v)."""
    if not adjacent(u, v):
        raise ValueError(f"sites {u} and {v} are not adjacent")
    a, b = sorted((u, v), key=_site_key)
    return Plaquette(a, b)


def _site_key(s: Site):
    # lexicographic on (k, j, i): deterministic ordering used everywhere
    return (s[2], s[1], s[0])


@dataclass(frozen=True)
class ModelParams:
    q: int
    beta: float

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be >= 2")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    @property
    def p(self) -> float:
        return 1.0 - np.exp(-self.beta)


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary coloring and FK wiring classes.

    variant "floor": blue below height 0 (bottom shell), red elsewhere.
    variant "split": red at heights > h, blue at heights < h (h integer >= 0).
    variant "redall": red everywhere; a single wiring class.
    """

    variant: str
    h: int = 0

    def __post_init__(self):
        if self.variant not in (FLOOR, SPLIT, REDALL):
            raise ValueError(f"unknown boundary variant {self.variant!r}")

    def color_of(self, s: Site) -> int:
        if self.variant == REDALL:
            return RED
        if self.variant == FLOOR:
            return BLUE if height2(s) < 0 else RED
        # split: red iff height > h  <=>  2k+1 > 2h
        return RED if height2(s) > 2 * self.h else BLUE

    @property
    def n_wiring_classes(self) -> int:
        return 1 if self.variant == REDALL else 2

    def wiring_class_of(self, s: Site) -> int:
        """0 = red class; 1 = blue class (absent for redall)."""
        return 0 if self.color_of(s) == RED else 1


def dob() -> BoundaryCondition:
    """Dobrushin boundary conditions: Split(0)."""
    return BoundaryCondition(SPLIT, 0)


class Domain:
    """A boxed domain with deterministic site/edge/plaquette enumerations.

    Site order is lexicographic on (k, j, i).  Edge order: all interior
    edges first (by lower endpoint, then axis x,y,z), then boundary edges
    (by interior endpoint, then fixed direction order).
    """

    def __init__(self, kind: str, n: int, m: int):
        if kind not in ("floor", "slab"):
            raise ValueError(f"unknown domain kind {kind!r}")
        if n < 2:
            raise ValueError("n must be >= 2")
        if m < 1:
            raise ValueError("m must be >= 1")
        self.kind = kind
        self.n = n
        self.m = m
        lo = -(n // 2)
        self.i_range = range(lo, lo + n)
        self.k_range = range(0, m) if kind == "floor" else range(-m, m)
        self._build()

    # -- construction -------------------------------------------------

    def _build(self):
        ir, kr = self.i_range, self.k_range
        sites = [(i, j, k) for k in kr for j in ir for i in ir]
        self.sites: list[Site] = sites
        self.site_index: dict[Site, int] = {s: t for t, s in enumerate(sites)}
        inset = self.site_index

        bset: dict[Site, None] = {}
        for s in sites:
            for d in _AXES:
                for sgn in (1, -1):
                    t = (s[0] + sgn * d[0], s[1] + sgn * d[1], s[2] + sgn * d[2])
                    if t not in inset:
                        bset[t] = None
        bsites = sorted(bset, key=_site_key)
        self.boundary_sites: list[Site] = bsites
        self.boundary_index: dict[Site, int] = {s: t for t, s in enumerate(bsites)}

        interior_edges: list[tuple[Site, Site]] = []
        boundary_edges: list[tuple[Site, Site]] = []
        for s in sites:
            for d in _AXES:
                t = (s[0] + d[0], s[1] + d[1], s[2] + d[2])
                if t in inset:
                    interior_edges.append((s, t))
            for d in _AXES:
                for sgn in (1, -1):
                    t = (s[0] + sgn * d[0], s[1] + sgn * d[1], s[2] + sgn * d[2])
                    if t not in inset:
                        boundary_edges.append((s, t))
        self.interior_edges = interior_edges
        self.boundary_edges = boundary_edges
        self.edges = interior_edges + boundary_edges

    # -- basic queries -------------------------------------------------

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def is_interior(self, s: Site) -> bool:
        return s in self.site_index

    def is_boundary(self, s: Site) -> bool:
        return s in self.boundary_index

    def plaquettes(self) -> list[Plaquette]:
        return [plaquette_of_edge(u, v) for u, v in self.edges]

    def columns(self) -> list[tuple[int, int]]:
        """All (i, j) columns of the footprint, lex (j, i) order."""
        return [(i, j) for j in self.i_range for i in self.i_range]

    # -- grid representation ------------------------------------------
    # A full grid with a one-cell shell around the interior box.  Cells
    # are "valid" iff interior or boundary (face-adjacent shell); shell
    # corners/edges are not lattice sites of the domain.

    @cached_property
    def grid_shape(self) -> tuple[int, int, int]:
        return (self.n + 2, self.n + 2, len(self.k_range) + 2)

    @property
    def grid_origin(self) -> Site:
        return (self.i_range.start - 1, self.i_range.start - 1, self.k_range.start - 1)

    def grid_idx(self, s: Site) -> tuple[int, int, int]:
        o = self.grid_origin
        return (s[0] - o[0], s[1] - o[1], s[2] - o[2])

    def site_of_grid_idx(self, g: tuple[int, int, int]) -> Site:
        o = self.grid_origin
        return (g[0] + o[0], g[1] + o[1], g[2] + o[2])

    @cached_property
    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.grid_shape, dtype=bool)
        for s in self.sites:
            mask[self.grid_idx(s)] = True
        return mask

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.grid_shape, dtype=bool)
        for s in self.boundary_sites:
            mask[self.grid_idx(s)] = True
        return mask

    @cached_property
    def valid_mask(self) -> np.ndarray:
        return self.interior_mask | self.boundary_mask

    @cached_property
    def interior_flat(self) -> np.ndarray:
        """Flat grid indices of interior sites, in site order."""
        shape = self.grid_shape
        return np.array(
            [np.ravel_multi_index(self.grid_idx(s), shape) for s in self.sites],
            dtype=np.int64,
        )

    @cached_property
    def neighbor_flat(self) -> np.ndarray:
        """(n_sites, 6) flat grid indices of the 6 neighbors of each interior site."""
        shape = self.grid_shape
        out = np.empty((self.n_sites, 6), dtype=np.int64)
        for t, s in enumerate(self.sites):
            col = 0
            for d in _AXES:
                for sgn in (1, -1):
                    u = (s[0] + sgn * d[0], s[1] + sgn * d[1], s[2] + sgn * d[2])
                    out[t, col] = np.ravel_multi_index(self.grid_idx(u), shape)
                    col += 1
        return out

    def boundary_color_grid(self, bc: BoundaryCondition) -> np.ndarray:
        """int8 grid: boundary colors in place, 0 elsewhere."""
        grid = np.zeros(self.grid_shape, dtype=np.int8)
        for s in self.boundary_sites:
            grid[self.grid_idx(s)] = bc.color_of(s)
        return grid

    def __repr__(self):
        return f"Domain({self.kind!r}, n={self.n}, m={self.m})"


def build_domain(kind: str, n: int, m: int) -> Domain:
    return Domain(kind, n, m)


def boundary_color(domain: Domain, bc: BoundaryCondition, s: Site) -> int:
    """Color forced at boundary site s; raises if s is not a boundary site."""
    if not domain.is_boundary(s):
        raise ValueError(f"{s} is not a boundary site of {domain}")
    return bc.color_of(s)
