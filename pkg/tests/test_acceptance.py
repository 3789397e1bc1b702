"""End-to-end acceptance gate.

Exact checks run at enumerable scale; Monte Carlo checks run at desk
scale with seeds pinned and tolerances stated next to each assertion.
"""

import math
from pathlib import Path

import numpy as np
import pytest

from pfsim.cli import (load_config, read_snapshot_file,
                       reproduce_cylinder_insensitivity,
                       reproduce_main_theorem_height)
from pfsim.fuzzy import make_standard_events
from pfsim.interfaces import (extract_fk_interface, extract_full_interface,
                              extract_potts_interface, verify_ordering)
from pfsim.lattice import (BLUE, RED, BoundaryCondition, Domain, ModelParams)
from pfsim.oracle import (coupling_pushforward_tv, enumerate_potts,
                          fkg_check, free_energy_identity_check,
                          monotonicity_check, single_edge_graph,
                          box_fk_graph, xi_ratio_check)
from pfsim.rates import (RateSeries, batch_means, estimate_point_to_plane,
                         fit_xi, full_interface_tail, h_star,
                         height_concentration_statistic,
                         histogram_tv_with_error, sample_full_interfaces)
from pfsim.rc import couple_edges_from_spins
from pfsim.sampler import make_chain, run_sweeps, seed_state
from pfsim.walls import decompose_walls, total_excess

FLOOR = BoundaryCondition("floor")


# 1. exact coupling: FK conditioned on disconnection, pushed through
#    cluster coloring, is the Potts measure


@pytest.mark.parametrize("n,m", [(2, 1), (2, 2)])
@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("beta", [0.7, 1.2])
def test_coupling_pushforward_exact(n, m, q, beta):
    res = coupling_pushforward_tv(Domain("floor", n, m), FLOOR,
                                  ModelParams(q, beta))
    assert res.tv < 1e-10


# 2. sampler single-site marginals against exact enumeration


@pytest.mark.parametrize("n,m", [(2, 1), (2, 2)])
@pytest.mark.parametrize("q,beta", [(2, 1.2), (3, 0.7)])
@pytest.mark.parametrize("algorithm", ["hb", "sw"])
def test_sampler_marginals_match_enumeration(n, m, q, beta, algorithm):
    domain = Domain("floor", n, m)
    params = ModelParams(q, beta)
    mu = enumerate_potts(domain, FLOOR, params)
    exact = np.array([mu.site_marginal(s, BLUE) for s in domain.sites])

    state = make_chain(domain, FLOOR, params, 11)
    run_sweeps(state, params, 500, algorithm)
    n_samples = 100000
    hits = np.zeros((n_samples, domain.n_sites))
    for t in range(n_samples):
        run_sweeps(state, params, 1, algorithm)
        hits[t] = state.spin.colors == BLUE
    for s in range(domain.n_sites):
        est = batch_means(hits[:, s])
        assert abs(est.mean - exact[s]) <= 3.0 * est.stderr


# 3. free-energy identity across the tiny-graph matrix


def test_free_energy_identity_matrix():
    cases = [
        (single_edge_graph(), ModelParams(2, math.log(2.0))),
        (single_edge_graph(), ModelParams(3, 1.0)),
        (box_fk_graph(Domain("floor", 2, 1), FLOOR), ModelParams(2, 1.0)),
        (box_fk_graph(Domain("floor", 2, 1), FLOOR,
                      anchor_sites=Domain("floor", 2, 1).sites[:2]),
         ModelParams(2, 1.0)),
        (box_fk_graph(Domain("floor", 2, 1), FLOOR,
                      anchor_sites=Domain("floor", 2, 1).sites[:2]),
         ModelParams(3, 0.8)),
    ]
    for graph, params in cases:
        res = free_energy_identity_check(graph, params, 0.1, 0.9)
        assert res.discrepancy < 1e-6


# 4. hard floor is dominated by every soft floor, exactly


@pytest.mark.parametrize("q,beta", [(2, 0.7), (2, 1.2), (3, 0.7), (3, 1.2)])
@pytest.mark.parametrize("h", [0, 1])
def test_hard_floor_below_soft_floor(q, beta, h):
    params = ModelParams(q, beta)
    for event in make_standard_events(Domain("slab", 2, 1)):
        p_fl, p_soft = monotonicity_check(2, 1, h, params, event)
        assert p_fl <= p_soft + 1e-12, event.name


# 5. positive correlation of blue-increasing events under the
#    two-class projection


def test_fkg_inequality_all_event_pairs():
    domain = Domain("floor", 2, 1)
    params = ModelParams(3, 1.0)
    events = make_standard_events(domain)
    for a in events:
        for b in events:
            p_ab, p_prod = fkg_check(domain, FLOOR, params, a, b)
            assert p_ab >= p_prod - 1e-12, (a.name, b.name)


# 6. exact lift-ratio inequality for the flat interface


def test_lift_ratio_inequality_flat_3x3():
    res = xi_ratio_check(3, ModelParams(2, 1.0))
    assert res.log_xi_fl >= res.log_xi_dob >= res.log_lower_bound


# 7. the four interfaces are ordered on every coupled sample


@pytest.mark.parametrize("q", [2, 3])
def test_interface_ordering_holds_on_all_samples(q):
    domain = Domain("floor", 6, 6)
    params = ModelParams(q, 1.2)
    state = make_chain(domain, FLOOR, params, seed=q)
    run_sweeps(state, params, 200, "alt")
    rng = seed_state(100 + q)
    for _ in range(10000):
        run_sweeps(state, params, 1, "alt")
        omega = couple_edges_from_spins(state.spin, params, rng)
        assert verify_ordering(
            extract_fk_interface(omega, "top"),
            extract_potts_interface(state.spin, RED),
            extract_potts_interface(state.spin, BLUE),
            extract_fk_interface(omega, "bot"))


# 8. exponential tail of the full-interface column height


def test_split_tail_monotone_and_fast_decaying():
    beta = 1.2
    ifaces = sample_full_interfaces(ModelParams(2, beta), 12, 4, 400, seed=5)
    domain = ifaces[0].domain
    ks = [1, 2, 3]
    tails = full_interface_tail(ifaces, ks, domain)
    ps = [tails[k].mean for k in ks]
    assert ps[0] >= ps[1] >= ps[2] >= 0.0
    # fitted decay rate of -log p against k; an unobserved level means a
    # tail too small to resolve, which only strengthens the decay
    positive = [(k, p) for k, p in zip(ks, ps) if p > 0.0]
    if len(positive) < 2:
        decay = math.inf
    else:
        xs = np.array([k for k, _ in positive], dtype=float)
        ys = np.array([-math.log(p) for _, p in positive])
        decay = float(np.polyfit(xs, ys, 1)[0])
    assert decay >= beta - 2.0


# 9. the full interface is nearly flat in area, and the excess-area
#    identity holds exactly on every sample


def test_full_interface_area_and_excess_identity():
    n = 8
    ifaces = sample_full_interfaces(ModelParams(2, 1.2), n, 4, 150, seed=7)
    ratios = [len(f) / n ** 2 for f in ifaces]
    assert np.mean(ratios) < 1.5
    for full in ifaces:
        walls, _ = decompose_walls(full)
        assert total_excess(walls) == len(full) - n ** 2


# 10. point-to-plane rates: monotone in h, additive increments, and the
#     first rate in the coarse window around 4*beta


def test_rate_monotonicity_and_additivity():
    params = ModelParams(2, 1.2)
    series = estimate_point_to_plane(params, 16, 2, 40000, seed=101)
    tilde = estimate_point_to_plane(params, 16, 1, 40000, seed=103,
                                    conditioned=True)
    r1, r2 = series.point(1), series.point(2)
    t1 = tilde.point(1)
    assert r1.usable and r2.usable and t1.usable
    assert r2.rate >= r1.rate - 3.0 * math.hypot(r1.rate_stderr,
                                                 r2.rate_stderr)
    assert 4 * params.beta - 4 <= r1.rate <= 4 * params.beta + 4
    defect = (r2.rate - r1.rate) - t1.rate
    combined = math.sqrt(r1.rate_stderr ** 2 + r2.rate_stderr ** 2 +
                         t1.rate_stderr ** 2)
    assert abs(defect) <= 3.0 * combined


# 11. the flagship trend: median interface height grows with n under the
#     hard floor, and the heights concentrate below the predicted level


def test_height_growth_trend(tmp_path):
    cfg = load_config(None)
    out = tmp_path / "trend"
    out.mkdir()
    verdict = reproduce_main_theorem_height(cfg, out, workers=2)
    assert verdict["nondecreasing"]
    assert verdict["growth_ok"]
    assert verdict["passed"]

    # rate-based height prediction, then the concentration report at the
    # largest size from the stored snapshots
    beta = float(cfg["reproduce"]["main_theorem_beta"])
    series = estimate_point_to_plane(ModelParams(2, beta), 8, 2, 20000,
                                     seed=109)
    pts = [pt for pt in series.usable_points() if pt.h >= 1]
    assert len(pts) >= 2
    xi = fit_xi(RateSeries(series.kind, series.params, series.n, pts)).slope
    assert xi > 0
    hs = h_star(64, xi)
    ifaces = []
    for path in sorted((out / "n64").glob("snapshot_*.bin")):
        spin = read_snapshot_file(path)[0]
        ifaces.append(extract_potts_interface(spin, BLUE))
    frac, median = height_concentration_statistic(ifaces, hs, 0.5, 64)
    assert 0.0 <= frac.mean <= 1.0
    assert median >= 0.0


# 12. the height histogram does not feel the cylinder height


def test_cylinder_height_insensitivity(tmp_path):
    cfg = load_config(None)
    out = tmp_path / "cyl"
    out.mkdir()
    verdict = reproduce_cylinder_insensitivity(cfg, out, workers=1)
    assert verdict["tv"] <= 3.0 * max(verdict["tv_stderr"], 1e-3)
    assert verdict["passed"]
