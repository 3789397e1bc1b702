# fuzzy.py
"""
Blue/fuzzy projection of Potts configurations and a registry of named
events with certification helpers (blue-increasing, fuzzy-measurable)
used by the monotonicity and FKG checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lattice import BLUE, BoundaryCondition, Domain
from .sampler import SpinConfig


@dataclass
class FuzzyConfig:
    blue: np.ndarray  # bool per interior site
    domain: Domain
    bc: BoundaryCondition


def project_bf(spin: SpinConfig) -> FuzzyConfig:
    """Relabel every non-blue color as fuzzy."""
    return FuzzyConfig(spin.colors == BLUE, spin.domain, spin.bc)


@dataclass(frozen=True)
class Event:
    name: str
    predicate: Callable[[SpinConfig], bool]
    fuzzy_measurable: bool
    blue_complement_measurable: bool = False  # determined by the non-blue region


_REGISTRY: dict[str, Event] = {}


def register_event(event: Event) -> Event:
    _REGISTRY[event.name] = event
    return event


def get_event(name: str) -> Event:
    return _REGISTRY[name]


def registered_events() -> dict[str, Event]:
    return dict(_REGISTRY)


# -- certification by exhaustion on tiny boxes -------------------------


def all_spin_configs(domain: Domain, bc: BoundaryCondition, q: int):
    n = domain.n_sites
    for colors in itertools.product(range(1, q + 1), repeat=n):
        yield SpinConfig(np.array(colors, dtype=np.int8), domain, bc)


def is_blue_increasing_witness(event: Event, spin: SpinConfig) -> bool:
    """True iff flipping some single non-blue site to blue destroys the
    event at this configuration (a monotonicity violation witness)."""
    if not event.predicate(spin):
        return False
    for t in range(spin.colors.shape[0]):
        if spin.colors[t] == BLUE:
            continue
        flipped = spin.copy()
        flipped.colors[t] = BLUE
        if not event.predicate(flipped):
            return True
    return False


def certify_blue_increasing(event: Event, domain: Domain,
                            bc: BoundaryCondition, q: int) -> bool:
    """Exhaustive single-flip scan over all configurations.

    Predicate values are computed once per configuration; flips are then
    table lookups (a flipped configuration is itself a configuration).
    """
    configs = list(all_spin_configs(domain, bc, q))
    vals = {s.colors.tobytes(): bool(event.predicate(s)) for s in configs}
    for s in configs:
        if not vals[s.colors.tobytes()]:
            continue
        for t in range(s.colors.shape[0]):
            if s.colors[t] == BLUE:
                continue
            flipped = s.colors.copy()
            flipped[t] = BLUE
            if not vals[flipped.tobytes()]:
                return False
    return True


def certify_fuzzy_measurable(event: Event, domain: Domain,
                             bc: BoundaryCondition, q: int) -> bool:
    """Exhaustive check that the event depends only on the blue set."""
    seen: dict[bytes, bool] = {}
    for s in all_spin_configs(domain, bc, q):
        key = (s.colors == BLUE).tobytes()
        val = bool(event.predicate(s))
        if key in seen and seen[key] != val:
            return False
        seen[key] = val
    return True


def certify_blue_complement_measurable(event: Event, domain: Domain,
                                       bc: BoundaryCondition, q: int) -> bool:
    """Exhaustive check that the event is determined by the complement of
    the augmented blue region."""
    from .interfaces import extract_potts_interface
    seen: dict[bytes, bool] = {}
    for s in all_spin_configs(domain, bc, q):
        key = extract_potts_interface(s, BLUE).vhat.tobytes()
        val = bool(event.predicate(s))
        if key in seen and seen[key] != val:
            return False
        seen[key] = val
    return True


# -- the registered event family ---------------------------------------


def _site_blue(site):
    def pred(spin: SpinConfig) -> bool:
        return spin.colors[spin.domain.site_index[site]] == BLUE
    return pred


def _vhat_blue_contains(site):
    def pred(spin: SpinConfig) -> bool:
        from .interfaces import vhat_blue_contains
        return vhat_blue_contains(spin, site)
    return pred


def _blue_max_height_at_least(h: int):
    def pred(spin: SpinConfig) -> bool:
        from .interfaces import extract_potts_interface
        iface = extract_potts_interface(spin, BLUE)
        top = iface.max_overline_hgt2()
        return top is not None and top >= 2 * h
    return pred


def _blue_interface_above_floor(spin: SpinConfig) -> bool:
    from .interfaces import blue_interface_in_upper_half
    return blue_interface_in_upper_half(spin)


def make_standard_events(domain: Domain) -> list[Event]:
    """The registered family on a given tiny domain.

    All of these are functions of the blue vertex set; the interface
    events are additionally determined by the augmented-blue complement.
    """
    o = (0, 0, 0)
    if o not in domain.site_index:
        o = min(domain.sites, key=lambda s: (s[2] < 0, abs(2 * s[2] + 1), s[1], s[0]))
    events = [
        Event(f"site-blue-{o}", _site_blue(o), fuzzy_measurable=True),
        Event(f"vhat-blue-contains-{o}", _vhat_blue_contains(o),
              fuzzy_measurable=True),
        Event("blue-max-height-ge-1", _blue_max_height_at_least(1),
              fuzzy_measurable=True, blue_complement_measurable=True),
        Event("blue-interface-above-floor", _blue_interface_above_floor,
              fuzzy_measurable=True, blue_complement_measurable=True),
    ]
    for e in events:
        register_event(e)
    return events
