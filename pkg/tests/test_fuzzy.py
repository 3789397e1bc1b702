import numpy as np
import pytest

from pfsim.fuzzy import (Event, all_spin_configs, certify_blue_increasing,
                         certify_fuzzy_measurable, get_event,
                         is_blue_increasing_witness, make_standard_events,
                         project_bf, register_event, registered_events)
from pfsim.lattice import BLUE, RED, BoundaryCondition, Domain, ModelParams, dob
from pfsim.oracle import enumerate_potts
from pfsim.sampler import SpinConfig, ground_state


def test_project_all_blue(floor221):
    bc = BoundaryCondition("floor")
    spin = ground_state(floor221, bc)
    spin.colors[:] = BLUE
    assert project_bf(spin).blue.all()


def test_project_q3_collapses_nonblue(floor221):
    bc = BoundaryCondition("floor")
    colors = np.array([1, 2, 3, 1], dtype=np.int8)
    fz = project_bf(SpinConfig(colors, floor221, bc))
    assert fz.blue.tolist() == [True, False, False, True]


def test_projection_preserves_blue_set(floor222):
    bc = BoundaryCondition("floor")
    rng = np.random.default_rng(7)
    for _ in range(1000):
        colors = rng.integers(1, 4, size=floor222.n_sites).astype(np.int8)
        spin = SpinConfig(colors, floor222, bc)
        assert np.array_equal(project_bf(spin).blue, colors == BLUE)


def test_site_red_event_not_increasing(floor221):
    bc = BoundaryCondition("floor")
    bad = Event("site-red-origin",
                lambda spin: spin.colors[0] == RED, fuzzy_measurable=False)
    assert not certify_blue_increasing(bad, floor221, bc, 2)
    # and a witness exists: the all-red configuration
    allred = ground_state(floor221, BoundaryCondition("redall"))
    assert is_blue_increasing_witness(bad, allred)


def test_standard_events_certified_on_2x2x1(floor221):
    bc = BoundaryCondition("floor")
    for event in make_standard_events(floor221):
        assert certify_blue_increasing(event, floor221, bc, 2), event.name
        assert certify_fuzzy_measurable(event, floor221, bc, 3), event.name


def test_max_height_event_increasing_on_2x2x2(floor222):
    bc = BoundaryCondition("floor")
    events = {e.name: e for e in make_standard_events(floor222)}
    assert certify_blue_increasing(events["blue-max-height-ge-1"],
                                   floor222, bc, 2)


def test_registry_round_trip(floor221):
    events = make_standard_events(floor221)
    for e in events:
        assert get_event(e.name) is e
        assert e.name in registered_events()
    with pytest.raises(KeyError):
        get_event("no-such-event")


def test_fuzzy_probabilities_color_permutation_invariant(floor221):
    # a fuzzy-measurable event cannot tell the non-blue colors apart, so
    # its probability is unchanged when red and green swap roles
    bc = BoundaryCondition("floor")
    params = ModelParams(3, 0.9)
    mu = enumerate_potts(floor221, bc, params)
    event = make_standard_events(floor221)[0]

    def swapped(spin):
        colors = spin.colors.copy()
        colors[spin.colors == 2] = 3
        colors[spin.colors == 3] = 2
        return event.predicate(SpinConfig(colors, spin.domain, spin.bc))

    p = mu.prob(lambda s: event.predicate(s))
    p_swapped = mu.prob(swapped)
    assert p == pytest.approx(p_swapped, abs=1e-12)


def test_all_spin_configs_enumeration_size(floor221):
    bc = BoundaryCondition("floor")
    configs = list(all_spin_configs(floor221, bc, 3))
    assert len(configs) == 3 ** floor221.n_sites
    assert len({c.colors.tobytes() for c in configs}) == len(configs)
