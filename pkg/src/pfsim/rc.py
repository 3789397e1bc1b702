# rc.py
"""
Random-cluster (FK) configurations on boxed domains, the spin<->edge
coupling in both directions, cluster labeling with boundary wiring, the
disconnection event, and exact FK weights.

Wiring: all boundary sites of one wiring class act as a single vertex
when counting clusters.  Node numbering: interior sites in canonical
order, then one node per wiring class (red first, then blue).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .lattice import BLUE, RED, BoundaryCondition, Domain, ModelParams
from .sampler import SpinConfig, _rng_double, seed_state, tables_for


@dataclass
class EdgeConfig:
    """One bit per enumerated edge (interior edges first, then boundary)."""

    bits: np.ndarray
    domain: Domain
    bc: BoundaryCondition

    def __post_init__(self):
        assert self.bits.shape[0] == self.domain.n_edges

    def n_open(self) -> int:
        return int(self.bits.sum())

    def copy(self) -> "EdgeConfig":
        return EdgeConfig(self.bits.copy(), self.domain, self.bc)


@dataclass
class ClusterLabeling:
    """Per-node cluster labels; label = lowest node index in the cluster."""

    node_label: np.ndarray      # interior nodes then class nodes
    n_interior: int
    n_classes: int

    @property
    def site_label(self) -> np.ndarray:
        return self.node_label[:self.n_interior]

    def class_node_label(self, cls: int) -> int:
        return int(self.node_label[self.n_interior + cls])

    @property
    def kappa(self) -> int:
        return len(np.unique(self.node_label))

    def touches(self, cls: int) -> np.ndarray:
        """Boolean per interior site: in the cluster of wiring class cls."""
        return self.site_label == self.class_node_label(cls)


def cluster_labeling(omega: EdgeConfig) -> ClusterLabeling:
    t = tables_for(omega.domain, omega.bc)
    labels = _kernels.label_open_clusters(
        omega.bits, t.edge_node_u, t.edge_node_v, t.n_nodes)
    return ClusterLabeling(labels, omega.domain.n_sites,
                           omega.bc.n_wiring_classes)


def kappa(omega: EdgeConfig) -> int:
    return cluster_labeling(omega).kappa


def fk_log_weight(omega: EdgeConfig, params: ModelParams) -> float:
    """log of (p/(1-p))^{|omega|} q^{kappa(omega)} with wired boundary classes."""
    p = params.p
    return omega.n_open() * np.log(p / (1.0 - p)) + kappa(omega) * np.log(params.q)


def check_disconnection(omega: EdgeConfig) -> bool:
    """True iff no open path joins the red and blue wiring classes."""
    if omega.bc.n_wiring_classes < 2:
        raise ValueError("disconnection needs two wiring classes")
    lab = cluster_labeling(omega)
    return lab.class_node_label(0) != lab.class_node_label(1)


def couple_edges_from_spins(spin: SpinConfig, params: ModelParams,
                            rng) -> EdgeConfig:
    """Close every bichromatic edge; open each monochromatic edge
    independently with probability p."""
    t = tables_for(spin.domain, spin.bc)
    state = _as_state(rng)
    bits = _kernels.couple_edges(spin.grid().ravel(), t.edge_u_flat,
                                 t.edge_v_flat, params.p, state)
    return EdgeConfig(bits, spin.domain, spin.bc)


def color_spins_from_edges(omega: EdgeConfig, bc: BoundaryCondition,
                           params: ModelParams, rng) -> SpinConfig:
    """Color the wired clusters by their forced colors and every free
    cluster uniformly at random."""
    lab = cluster_labeling(omega)
    state = _as_state(rng)
    n = omega.domain.n_sites
    if bc.n_wiring_classes == 2 and lab.class_node_label(0) == lab.class_node_label(1):
        raise ValueError("edge configuration violates the disconnection event")
    forced = {}
    forced[lab.class_node_label(0)] = RED
    if bc.n_wiring_classes == 2:
        forced[lab.class_node_label(1)] = BLUE
    colors = np.empty(n, dtype=np.int8)
    site_label = lab.site_label
    free_labels = sorted(set(int(l) for l in site_label) - set(forced))
    free_color = {l: 1 + int(_rng_double(state) * params.q) for l in free_labels}
    for t in range(n):
        l = int(site_label[t])
        colors[t] = forced.get(l, 0) or free_color[l]
    return SpinConfig(colors, omega.domain, bc)


def _as_state(rng) -> np.ndarray:
    if isinstance(rng, np.ndarray):
        return rng
    return seed_state(int(rng))
