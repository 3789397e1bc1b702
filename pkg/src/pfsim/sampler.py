# sampler.py
"""
Sampling from the boxed Potts measures: heat-bath Glauber sweeps,
frozen-boundary Swendsen-Wang sweeps, and conditional sampling from the
soft-floor measure (split boundary conditions conditioned on the blue
interface staying in the upper half-space).

Determinism contract: a ChainState carries an explicit splitmix64 RNG
state; identical (seed, params, domain, bc, sweep schedule) gives a
byte-identical trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .lattice import BLUE, RED, FLOOR, REDALL, SPLIT, BoundaryCondition, Domain, ModelParams


class ConditionalSamplingError(RuntimeError):
    pass


@dataclass
class SpinConfig:
    """Colors of the interior sites (1..q), in canonical site order."""

    colors: np.ndarray
    domain: Domain
    bc: BoundaryCondition

    def grid(self) -> np.ndarray:
        """Full int8 grid: interior colors plus forced boundary colors."""
        g = self.domain.boundary_color_grid(self.bc).copy()
        g.ravel()[self.domain.interior_flat] = self.colors
        return g

    def copy(self) -> "SpinConfig":
        return SpinConfig(self.colors.copy(), self.domain, self.bc)


@dataclass
class ChainState:
    spin: SpinConfig
    sweep: int
    rng_state: np.ndarray  # uint64[1]
    energy: int
    _grid: np.ndarray = field(default=None, repr=False)

    def grid(self) -> np.ndarray:
        if self._grid is None:
            self._grid = self.spin.grid()
        return self._grid

    def sync_spin(self):
        """Copy the working grid back into the SpinConfig color vector."""
        if self._grid is not None:
            self.spin.colors = self._grid.ravel()[self.spin.domain.interior_flat].copy()


class _Tables:
    """Per-(domain, bc) arrays shared by the kernels."""

    def __init__(self, domain: Domain, bc: BoundaryCondition):
        shape = domain.grid_shape
        n = domain.n_sites

        def flat(s):
            return np.ravel_multi_index(domain.grid_idx(s), shape)

        eu, ev, nu, nv = [], [], [], []
        n_classes = bc.n_wiring_classes
        for u, v in domain.edges:
            eu.append(flat(u))
            ev.append(flat(v))
            nu.append(domain.site_index[u])
            if v in domain.site_index:
                nv.append(domain.site_index[v])
            else:
                nv.append(n + bc.wiring_class_of(v))
        self.edge_u_flat = np.array(eu, dtype=np.int64)
        self.edge_v_flat = np.array(ev, dtype=np.int64)
        self.edge_node_u = np.array(nu, dtype=np.int64)
        self.edge_node_v = np.array(nv, dtype=np.int64)
        self.class_nodes = np.arange(n, n + n_classes, dtype=np.int64)
        # wiring class 0 is red, class 1 (when present) blue
        self.class_colors = np.array([RED, BLUE][:n_classes], dtype=np.int8)
        self.n_nodes = n + n_classes


_tables_cache: dict = {}


def tables_for(domain: Domain, bc: BoundaryCondition) -> _Tables:
    # key by value, not id(): ids are recycled after garbage collection
    key = (domain.kind, domain.n, domain.m, bc)
    if key not in _tables_cache:
        _tables_cache[key] = _Tables(domain, bc)
    return _tables_cache[key]


def energy(spin: SpinConfig) -> int:
    """Number of bichromatic nearest-neighbor pairs, boundary edges included."""
    t = tables_for(spin.domain, spin.bc)
    return int(_kernels.energy_of(spin.grid().ravel(), t.edge_u_flat, t.edge_v_flat))


def ground_state(domain: Domain, bc: BoundaryCondition) -> SpinConfig:
    """A boundary-compatible deterministic start configuration."""
    colors = np.empty(domain.n_sites, dtype=np.int8)
    for t, s in enumerate(domain.sites):
        if bc.variant == SPLIT and s[2] < bc.h:
            colors[t] = BLUE
        else:
            colors[t] = RED
    return SpinConfig(colors, domain, bc)


def make_chain(domain: Domain, bc: BoundaryCondition, params: ModelParams,
               seed: int, stream: int = 0) -> ChainState:
    spin = ground_state(domain, bc)
    state = ChainState(spin, 0, seed_state(seed, stream), 0)
    state.energy = energy(spin)
    return state


def seed_state(seed: int, stream: int = 0) -> np.ndarray:
    # splittable: fold the stream id into the seed through one mix round
    z = (seed + 0x9E3779B97F4A7C15 * (stream + 1)) % (1 << 64)
    return np.array([z], dtype=np.uint64)


def _exp_table(params: ModelParams) -> np.ndarray:
    return np.exp(params.beta * np.arange(7, dtype=np.float64))


def heat_bath_sweep(state: ChainState, params: ModelParams) -> ChainState:
    """One heat-bath sweep in deterministic site order."""
    d = state.spin.domain
    de = _kernels.heat_bath_sweep(
        state.grid().ravel(), d.interior_flat, d.neighbor_flat,
        params.q, _exp_table(params), state.rng_state)
    state.energy += int(de)
    state.sweep += 1
    state.sync_spin()
    return state


def sw_sweep_frozen_boundary(state: ChainState, params: ModelParams) -> ChainState:
    """One frozen-boundary Swendsen-Wang sweep."""
    d = state.spin.domain
    t = tables_for(d, state.spin.bc)
    _kernels.sw_sweep(
        state.grid().ravel(), d.interior_flat, t.edge_u_flat, t.edge_v_flat,
        t.edge_node_u, t.edge_node_v, t.class_nodes, t.class_colors,
        params.p, params.q, state.rng_state)
    state.sync_spin()
    state.energy = energy(state.spin)
    state.sweep += 1
    return state


def run_sweeps(state: ChainState, params: ModelParams, n_sweeps: int,
               algorithm: str = "hb") -> ChainState:
    """Advance the chain; algorithm in {"hb", "sw", "alt"}."""
    for t in range(n_sweeps):
        if algorithm == "hb" or (algorithm == "alt" and t % 2 == 0):
            heat_bath_sweep(state, params)
        else:
            sw_sweep_frozen_boundary(state, params)
    return state


def annealed_chain(domain: Domain, bc: BoundaryCondition, params: ModelParams,
                   seed: int, beta_start: float = 0.7, ramp_sweeps: int = 1500,
                   burnin: int = 4000, algorithm: str = "alt") -> ChainState:
    """Equilibrate through a rough-phase ramp in inverse temperature.

    The hard-floor measure is bistable at moderate beta for box sizes near
    the interface detachment crossover: a quench from the ground state can
    freeze into whichever branch it starts in and stay there for tens of
    thousands of sweeps.  Starting in the rough phase (low beta), where the
    interface position mixes freely, then ramping beta up and burning in
    lets the chain settle into the equilibrium branch at the target beta.
    """
    b0 = min(beta_start, params.beta)
    warm = ModelParams(params.q, b0)
    state = make_chain(domain, bc, warm, seed)
    run_sweeps(state, warm, 500, algorithm)
    steps = max(1, ramp_sweeps // 2)
    for t in range(steps):
        b = b0 + (params.beta - b0) * (t + 1) / steps
        run_sweeps(state, ModelParams(params.q, b), 2, algorithm)
    run_sweeps(state, params, burnin, algorithm)
    return state


# -- conditional sampling from the soft-floor measure ------------------


def _blue_interface_above_floor(spin: SpinConfig) -> bool:
    from .interfaces import extract_potts_interface
    iface = extract_potts_interface(spin, BLUE)
    return all(p.height2 >= 0 for p in iface.plaquettes)


def sample_conditional_soft_floor(domain: Domain, h: int, params: ModelParams,
                                  n_samples: int, seed: int,
                                  method: str = "rejection",
                                  burnin: int = 200, interval: int = 4,
                                  max_draws: int = 10_000_000):
    """Yield SpinConfigs from the split measure conditioned on the blue
    interface lying in the upper half-space.

    method "rejection": sample the unconditioned chain, keep samples
    satisfying the event (correctness reference).  method "restricted":
    Metropolis with single-site heat-bath proposals, rejecting proposals
    that leave the event (fast path; assumes the restricted state space is
    connected under single-site moves).
    """
    if domain.kind != "slab":
        raise ValueError("soft-floor sampling requires a slab domain")
    if h < 0:
        raise ValueError("h must be >= 0")
    bc = BoundaryCondition(SPLIT, h)
    if method == "rejection":
        yield from _rejection_stream(domain, bc, params, n_samples, seed,
                                     burnin, interval, max_draws)
    elif method == "restricted":
        yield from _restricted_stream(domain, bc, params, n_samples, seed,
                                      burnin, interval)
    else:
        raise ValueError(f"unknown method {method!r}")


def _rejection_stream(domain, bc, params, n_samples, seed, burnin, interval,
                      max_draws):
    state = make_chain(domain, bc, params, seed)
    run_sweeps(state, params, burnin, "alt")
    produced = 0
    draws = 0
    accepted = 0
    while produced < n_samples:
        run_sweeps(state, params, interval, "alt")
        draws += 1
        if draws > 1000 and accepted / draws < 1e-6:
            raise ConditionalSamplingError(
                f"rejection acceptance rate {accepted}/{draws} below 1e-6")
        if draws > max_draws:
            raise ConditionalSamplingError("rejection draw budget exceeded")
        if _blue_interface_above_floor(state.spin):
            accepted += 1
            produced += 1
            yield state.spin.copy()


def _restricted_stream(domain, bc, params, n_samples, seed, burnin, interval):
    from . import _kernels as K
    state = make_chain(domain, bc, params, seed)
    # the ground state for split(h>=0) satisfies the event
    assert _blue_interface_above_floor(state.spin)
    exp_t = _exp_table(params)
    grid = state.grid().ravel()
    d = domain

    def restricted_sweep():
        for t in range(d.n_sites):
            f = d.interior_flat[t]
            counts = np.zeros(params.q, dtype=np.int64)
            for c in range(6):
                counts[grid[d.neighbor_flat[t, c]] - 1] += 1
            w = exp_t[counts]
            u = _rng_double(state.rng_state) * w.sum()
            new = int(np.searchsorted(np.cumsum(w), u, side="right"))
            new = min(new, params.q - 1)
            old = grid[f]
            if new + 1 == old:
                continue
            grid[f] = new + 1
            state.sync_spin()
            if not _blue_interface_above_floor(state.spin):
                grid[f] = old
                state.sync_spin()
        state.sweep += 1

    for _ in range(burnin):
        restricted_sweep()
    for _ in range(n_samples):
        for _ in range(interval):
            restricted_sweep()
        state.sync_spin()
        yield state.spin.copy()


def _rng_double(rng_state: np.ndarray) -> float:
    # same stream as the kernels
    rng_state[0] = np.uint64((int(rng_state[0]) + 0x9E3779B97F4A7C15) % (1 << 64))
    z = rng_state[0]
    z = np.uint64((int(z) ^ (int(z) >> 30)) * 0xBF58476D1CE4E5B9 & (2**64 - 1))
    z = np.uint64((int(z) ^ (int(z) >> 27)) * 0x94D049BB133111EB & (2**64 - 1))
    z = int(z) ^ (int(z) >> 31)
    return (z >> 11) * 1.1102230246251565e-16
