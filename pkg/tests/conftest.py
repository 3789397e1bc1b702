"""Shared fixtures and hand-built configurations used across the suite."""

from __future__ import annotations

import numpy as np
import pytest

from pfsim.lattice import BLUE, BoundaryCondition, Domain, ModelParams, dob
from pfsim.rc import EdgeConfig
from pfsim.sampler import SpinConfig, ground_state


@pytest.fixture
def slab221():
    return Domain("slab", 2, 1)


@pytest.fixture
def floor221():
    return Domain("floor", 2, 1)


@pytest.fixture
def floor222():
    return Domain("floor", 2, 2)


def monochromatic_coupling(spin: SpinConfig) -> EdgeConfig:
    """The p = 1 coupling: open exactly the monochromatic edges."""
    g = spin.grid()
    bits = np.array([g[spin.domain.grid_idx(u)] == g[spin.domain.grid_idx(v)]
                     for u, v in spin.domain.edges], dtype=bool)
    return EdgeConfig(bits, spin.domain, spin.bc)


def flat_split_state(n: int, m: int) -> SpinConfig:
    """Ground state of the split measure: blue below 0, red above."""
    return ground_state(Domain("slab", n, m), dob())


def flat_split_omega(n: int, m: int) -> EdgeConfig:
    return monochromatic_coupling(flat_split_state(n, m))


def bump_spin(n: int, m: int, col=(0, 0)) -> SpinConfig:
    """Flat split state with the height-1/2 site over one column flipped
    blue (a unit bump in the interface)."""
    spin = flat_split_state(n, m)
    spin.colors[spin.domain.site_index[(col[0], col[1], 0)]] = BLUE
    return spin


def params22() -> ModelParams:
    return ModelParams(2, 1.2)
