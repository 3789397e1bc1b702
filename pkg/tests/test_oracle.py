import math

import numpy as np
import pytest

from pfsim.fuzzy import Event, make_standard_events
from pfsim.lattice import (BLUE, RED, BoundaryCondition, Domain, ModelParams,
                           dob)
from pfsim.oracle import (EnumerationCapError, FKGraph, OracleCheckError,
                          box_fk_graph, coupling_pushforward_tv,
                          enumerate_fk, enumerate_potts,
                          free_energy_identity_check, fkg_check,
                          graph_fk_measure, monotonicity_check, run_suite,
                          single_edge_graph, transfer_matrix_log_z,
                          xi_ratio_check, SUITES)
from pfsim.rc import EdgeConfig, check_disconnection


def test_probabilities_normalized(floor221):
    mu = enumerate_potts(floor221, BoundaryCondition("floor"),
                         ModelParams(3, 0.9))
    probs = mu.probabilities()
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert (probs > 0).all()
    assert mu.n_states == 3 ** floor221.n_sites


def test_six_blue_neighbors_marginal(slab221):
    # conditioning the three interior neighbors blue leaves a single site
    # with six blue neighbors: a two-state problem
    beta = 1.1
    params = ModelParams(2, beta)
    mu = enumerate_potts(slab221, dob(), params)
    o = slab221.site_index[(0, 0, -1)]
    nbrs = [slab221.site_index[s] for s in [(-1, 0, -1), (0, -1, -1), (0, 0, 0)]]

    cond = mu.conditional(
        lambda s: all(s.colors[t] == BLUE for t in nbrs))
    p_blue = cond.prob(lambda s: s.colors[o] == BLUE)
    assert p_blue == pytest.approx(1.0 / (1.0 + math.exp(-6.0 * beta)),
                                   abs=1e-12)


def test_enumeration_caps():
    with pytest.raises(EnumerationCapError):
        enumerate_potts(Domain("floor", 4, 4), BoundaryCondition("floor"),
                        ModelParams(3, 1.0))
    with pytest.raises(EnumerationCapError):
        enumerate_fk(Domain("floor", 3, 3), BoundaryCondition("floor"),
                     ModelParams(2, 1.0))


@pytest.mark.parametrize("q", [2, 3])
def test_transfer_matrix_cross_check(q, floor221):
    params = ModelParams(q, 1.0)
    bc = BoundaryCondition("floor")
    mu = enumerate_potts(floor221, bc, params)
    assert mu.log_z == pytest.approx(
        transfer_matrix_log_z(floor221, bc, params), abs=1e-9)


def test_single_edge_fk_weights():
    params = ModelParams(2, math.log(2.0))  # p = 1/2
    g = single_edge_graph()
    probs, kappa = graph_fk_measure(g.edge_node_u, g.edge_node_v, g.n_nodes,
                                    params)
    # closed: kappa=2, weight 4; open: kappa=1, weight 2
    assert kappa.tolist() == [2, 1]
    assert probs[1] == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_conditioned_fk_excludes_connecting_states(floor221):
    params = ModelParams(2, 1.0)
    bc = BoundaryCondition("floor")
    phi = enumerate_fk(floor221, bc, params, condition_on_disconnection=True)
    assert phi.probabilities().sum() == pytest.approx(1.0, abs=1e-12)
    for t in range(phi.n_states):
        omega = phi.state(t)
        assert isinstance(omega, EdgeConfig)
        assert check_disconnection(omega)
    # connecting masks (the all-open one among them) are excluded
    assert phi.n_states < 1 << floor221.n_edges


def test_pushforward_matches_potts(floor221):
    res = coupling_pushforward_tv(floor221, BoundaryCondition("floor"),
                                  ModelParams(3, 0.7))
    assert res.tv < 1e-10
    assert res.fk_probs.sum() == pytest.approx(1.0, abs=1e-10)


def test_free_energy_no_tunable_edges():
    g = FKGraph(np.array([0], dtype=np.int64), np.array([1], dtype=np.int64),
                np.array([False]), 2)
    res = free_energy_identity_check(g, ModelParams(2, 1.0), 0.2, 0.8)
    assert res.lhs == pytest.approx(0.0, abs=1e-12)
    assert res.rhs == pytest.approx(0.0, abs=1e-12)


def test_free_energy_single_edge():
    res = free_energy_identity_check(single_edge_graph(),
                                     ModelParams(2, math.log(2.0)), 0.2, 0.8)
    assert res.discrepancy < 1e-8


def test_free_energy_theta_window_validated():
    with pytest.raises(ValueError):
        free_energy_identity_check(single_edge_graph(), ModelParams(2, 1.0),
                                   0.8, 0.2)


def test_xi_ratio_deterministic_under_edge_reordering():
    params = ModelParams(2, 1.0)
    a = xi_ratio_check(3, params, edge_order_seed=1)
    b = xi_ratio_check(3, params, edge_order_seed=2)
    assert a.log_xi_fl == pytest.approx(b.log_xi_fl, rel=1e-12)
    assert a.log_xi_dob == pytest.approx(b.log_xi_dob, rel=1e-12)
    assert a.log_xi_fl >= a.log_xi_dob >= a.log_lower_bound


def test_xi_ratio_preconditions():
    params = ModelParams(2, 1.0)
    with pytest.raises(ValueError):
        xi_ratio_check(3, params, j=2)
    with pytest.raises(ValueError):
        xi_ratio_check(3, params, interface=frozenset())


def test_monotonicity_standard_events():
    params = ModelParams(2, 1.0)
    for ev in make_standard_events(Domain("slab", 2, 1)):
        p_fl, p_soft = monotonicity_check(2, 1, 0, params, ev)
        assert p_fl <= p_soft + 1e-12


def test_monotonicity_full_event_space():
    always = Event("always-true", lambda s: True, fuzzy_measurable=True)
    p_fl, p_soft = monotonicity_check(2, 1, 0, ModelParams(2, 1.0), always)
    assert p_fl == pytest.approx(1.0, abs=1e-12)
    assert p_soft == pytest.approx(1.0, abs=1e-12)


def test_monotonicity_rejects_decreasing_event():
    bad = Event("site-red-first", lambda s: s.colors[0] == RED,
                fuzzy_measurable=False)
    with pytest.raises(ValueError):
        monotonicity_check(2, 1, 0, ModelParams(2, 1.0), bad)


def test_fkg_pairs(floor221):
    bc = BoundaryCondition("floor")
    params = ModelParams(3, 1.0)
    events = make_standard_events(floor221)
    a = events[0]
    p_aa, p_prod = fkg_check(floor221, bc, params, a, a)
    assert p_aa >= p_prod - 1e-12
    b = events[1]
    p_ab, p_prod2 = fkg_check(floor221, bc, params, a, b)
    assert p_ab >= p_prod2 - 1e-12


def test_run_suite_free_energy():
    report = run_suite("free-energy")
    assert report["suite"] == "free-energy"
    assert report["passed"]
    assert all(c["passed"] for c in report["checks"])


def test_run_suite_unknown_name():
    with pytest.raises(KeyError):
        run_suite("bogus")
    assert set(SUITES) == {"coupling", "monotonicity", "fkg", "free-energy",
                           "xi-ratio"}
