import numpy as np
import pytest

from pfsim.interfaces import (InterfaceSet, augment, blue_interface_in_upper_half,
                              extract_fk_interface, extract_full_interface,
                              extract_potts_interface, spike_transform,
                              theta_shift, verify_ordering, vhat_blue_contains)
from pfsim.lattice import (BLUE, RED, BoundaryCondition, Domain, ModelParams,
                           dob, plaquette_of_edge)
from pfsim.rc import EdgeConfig, check_disconnection, couple_edges_from_spins
from pfsim.sampler import make_chain, run_sweeps, seed_state

from conftest import (bump_spin, flat_split_omega, flat_split_state,
                      monochromatic_coupling)


def flat_layer(domain):
    """The n^2 horizontal plaquettes at height 0."""
    return frozenset(plaquette_of_edge((i, j, -1), (i, j, 0))
                     for i in domain.i_range for j in domain.i_range)


def lifted_spin(n, m=2):
    """Split ground state shifted up by one: blue up to height 1."""
    spin = flat_split_state(n, m)
    for t, s in enumerate(spin.domain.sites):
        spin.colors[t] = BLUE if s[2] < 1 else RED
    return spin


def test_flat_blue_interface_is_the_height0_layer():
    spin = flat_split_state(4, 2)
    iface = extract_potts_interface(spin, BLUE)
    assert iface.plaquettes == flat_layer(spin.domain)
    assert iface.label == "Blue"
    for col in spin.domain.columns():
        assert iface.overline_hgt2(col) == 0
        assert iface.underline_hgt2(col) == 0


def q_swap_spin(n=4, m=2):
    # the 2x2x2 cube around the origin with its colors swapped: blue on
    # top of red inside the cube, against the flat background
    spin = flat_split_state(n, m)
    d = spin.domain
    for i in (-1, 0):
        for j in (-1, 0):
            spin.colors[d.site_index[(i, j, 0)]] = BLUE
            spin.colors[d.site_index[(i, j, -1)]] = RED
    return spin


def test_q_swap_interfaces():
    spin = q_swap_spin()
    i_blue = extract_potts_interface(spin, BLUE)
    i_red = extract_potts_interface(spin, RED)
    # the cube floor belongs to the blue interface, its lid to the red one
    assert plaquette_of_edge((0, 0, -2), (0, 0, -1)) in i_blue.plaquettes
    assert plaquette_of_edge((0, 0, 0), (0, 0, 1)) in i_red.plaquettes


def test_q_swap_with_bridge_site():
    # recoloring one site next to the cube blue bridges the swapped top
    # cells to the blue bulk: both interfaces collapse to the same surface
    # in the upper half-space
    spin = q_swap_spin()
    spin.colors[spin.domain.site_index[(1, 0, 0)]] = BLUE
    i_blue = extract_potts_interface(spin, BLUE)
    i_red = extract_potts_interface(spin, RED)
    assert i_blue.plaquettes == i_red.plaquettes
    assert all(p.height2 >= 0 for p in i_blue.plaquettes)


def test_fk_flat_layer_interfaces():
    d = Domain("slab", 3, 1)
    bc = dob()
    bits = np.array([plaquette_of_edge(u, v) not in flat_layer(d)
                     for u, v in d.edges])
    omega = EdgeConfig(bits, d, bc)
    top = extract_fk_interface(omega, "top")
    bot = extract_fk_interface(omega, "bot")
    assert top.plaquettes == flat_layer(d)
    assert bot.plaquettes == flat_layer(d)


def test_fk_all_closed():
    d = Domain("slab", 3, 1)
    bc = dob()
    omega = EdgeConfig(np.zeros(d.n_edges, dtype=bool), d, bc)
    top = extract_fk_interface(omega, "top")
    g = d.boundary_color_grid(bc)
    expected = frozenset(
        plaquette_of_edge(u, v) for u, v in d.edges
        if (g[d.grid_idx(u)] == RED) != (g[d.grid_idx(v)] == RED))
    assert top.plaquettes == expected


def test_fk_interface_requires_disconnection():
    d = Domain("slab", 3, 1)
    omega = EdgeConfig(np.ones(d.n_edges, dtype=bool), d, dob())
    with pytest.raises(ValueError):
        extract_fk_interface(omega, "top")
    with pytest.raises(ValueError):
        extract_full_interface(omega)


def test_full_interface_flat():
    omega = flat_split_omega(4, 2)
    full = extract_full_interface(omega)
    assert full.plaquettes == flat_layer(omega.domain)


def test_full_interface_gains_dangling_hair():
    omega = flat_split_omega(4, 2)
    d = omega.domain
    hair_edge = ((0, 0, 0), (1, 0, 0))
    idx = next(t for t, e in enumerate(d.edges) if e == hair_edge)
    omega.bits[idx] = False
    full = extract_full_interface(omega)
    assert full.plaquettes == flat_layer(d) | {plaquette_of_edge(*hair_edge)}


def test_bump_interfaces():
    spin = bump_spin(4, 2)
    i_blue = extract_potts_interface(spin, BLUE)
    assert len(i_blue) == 4 * 4 + 4
    omega = monochromatic_coupling(spin)
    full = extract_full_interface(omega)
    assert len(full) == 20
    assert i_blue.plaquettes <= full.plaquettes
    # the bump column reaches height 1, the rest stay flat
    assert i_blue.overline_hgt2((0, 0)) == 2
    assert i_blue.underline_hgt2((0, 0)) == 2
    assert i_blue.overline_hgt2((1, 1)) == 0
    assert i_blue.max_overline_hgt2() == 2
    assert i_blue.overline_hgt2((9, 9)) is None


def test_flat_coupled_ordering_true():
    spin = flat_split_state(4, 2)
    omega = monochromatic_coupling(spin)
    i_top = extract_fk_interface(omega, "top")
    i_bot = extract_fk_interface(omega, "bot")
    i_red = extract_potts_interface(spin, RED)
    i_blue = extract_potts_interface(spin, BLUE)
    assert verify_ordering(i_top, i_red, i_blue, i_bot)


def test_mismatched_pair_ordering_false():
    # interfaces from two unrelated configurations need not be ordered
    omega = flat_split_omega(4, 2)
    spin = bump_spin(4, 2)
    i_top = extract_fk_interface(omega, "top")
    i_bot = extract_fk_interface(omega, "bot")
    i_red = extract_potts_interface(spin, RED)
    i_blue = extract_potts_interface(spin, BLUE)
    assert not verify_ordering(i_top, i_red, i_blue, i_bot)


def test_ordering_requires_vertex_regions():
    omega = flat_split_omega(4, 2)
    full = extract_full_interface(omega)
    i_top = extract_fk_interface(omega, "top")
    i_bot = extract_fk_interface(omega, "bot")
    with pytest.raises(ValueError):
        verify_ordering(i_top, full, full, i_bot)


def test_thermal_samples_ordered_and_nested():
    d = Domain("slab", 4, 2)
    bc = dob()
    params = ModelParams(2, 1.2)
    state = make_chain(d, bc, params, seed=31)
    run_sweeps(state, params, 100, "alt")
    rng = seed_state(77)
    for _ in range(150):
        run_sweeps(state, params, 3, "alt")
        omega = couple_edges_from_spins(state.spin, params, rng)
        i_top = extract_fk_interface(omega, "top")
        i_bot = extract_fk_interface(omega, "bot")
        i_red = extract_potts_interface(state.spin, RED)
        i_blue = extract_potts_interface(state.spin, BLUE)
        full = extract_full_interface(omega)
        assert verify_ordering(i_top, i_red, i_blue, i_bot)
        for iface in (i_top, i_bot, i_red, i_blue):
            assert iface.plaquettes <= full.plaquettes
        # the full interface separates the box: every column is covered
        assert set(full.column_heights2) == set(d.columns())


def test_augment_idempotent():
    d = Domain("slab", 4, 2)
    rng = np.random.default_rng(13)
    for _ in range(20):
        mask = (rng.random(d.grid_shape) < 0.5) & d.valid_mask
        once = augment(mask, d)
        assert np.array_equal(augment(once, d), once)
        assert (once & ~mask).sum() >= 0 and np.all(mask <= once)


def test_theta_shift_identity_and_flat_lift():
    d = Domain("slab", 4, 2)
    spin = flat_split_state(4, 2)
    omega = monochromatic_coupling(spin)
    i_top = extract_fk_interface(omega, "top")
    assert theta_shift(i_top, 0, d).plaquettes == i_top.plaquettes
    lifted = theta_shift(i_top, 1, d)
    assert len(lifted) == len(i_top) + 4 * 1 * 4 == 32
    # and it matches the interface extracted from a shifted configuration
    omega_up = monochromatic_coupling(lifted_spin(4, 2))
    assert lifted.plaquettes == extract_fk_interface(omega_up, "top").plaquettes
    for col in d.columns():
        assert lifted.overline_hgt2(col) == i_top.overline_hgt2(col) + 2


def test_theta_two_is_theta_one_twice():
    d = Domain("slab", 4, 4)
    base = extract_fk_interface(monochromatic_coupling(
        flat_split_state(4, 4)), "top")
    bumped = extract_potts_interface(bump_spin(4, 4), BLUE)
    for iface in (base, bumped):
        once_twice = theta_shift(theta_shift(iface, 1, d), 1, d)
        assert once_twice.plaquettes == theta_shift(iface, 2, d).plaquettes


def test_theta_shift_overflow_and_half_space_errors():
    d = Domain("slab", 4, 1)
    flat = extract_fk_interface(monochromatic_coupling(
        flat_split_state(4, 1)), "top")
    with pytest.raises(ValueError):
        theta_shift(flat, 2, d)
    d2 = Domain("slab", 4, 2)
    low = InterfaceSet(frozenset([plaquette_of_edge((0, 0, -2), (0, 0, -1))]),
                       "Top", d2)
    with pytest.raises(ValueError):
        theta_shift(low, 1, d2)


def test_spike_transform_identity_and_dip():
    omega = monochromatic_coupling(lifted_spin(4, 2))
    same = spike_transform(omega, [], 1)
    assert np.array_equal(same.bits, omega.bits)
    dipped = spike_transform(omega, [(0, 0)], 1)
    assert check_disconnection(dipped)
    i_top = extract_fk_interface(dipped, "top")
    assert i_top.underline_hgt2((0, 0)) == 0
    for col in omega.domain.columns():
        if col != (0, 0):
            assert i_top.underline_hgt2(col) == 2


def test_spike_transform_blocked_column():
    omega = monochromatic_coupling(lifted_spin(4, 2))
    with pytest.raises(ValueError):
        spike_transform(omega, [(0, 0)], 5)


def test_upper_half_predicates():
    assert blue_interface_in_upper_half(flat_split_state(4, 2))
    assert blue_interface_in_upper_half(bump_spin(4, 2))
    dip = flat_split_state(4, 2)
    dip.colors[dip.domain.site_index[(0, 0, -1)]] = RED
    assert not blue_interface_in_upper_half(dip)


def test_vhat_blue_contains():
    flat = flat_split_state(4, 2)
    assert vhat_blue_contains(flat, (0, 0, -1))
    assert not vhat_blue_contains(flat, (0, 0, 0))
    assert vhat_blue_contains(bump_spin(4, 2), (0, 0, 0))
    # a red pocket surrounded by blue is absorbed into the augmented region
    pocket = flat_split_state(6, 3)
    pocket.colors[pocket.domain.site_index[(0, 0, -2)]] = RED
    assert vhat_blue_contains(pocket, (0, 0, -2))
