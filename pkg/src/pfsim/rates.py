# rates.py
"""
Non-red pillars, point-to-plane connection events, and Monte Carlo
estimation of the associated decay rates: the plain and conditioned
point-to-plane rates, the pillar-height rate, the fitted per-level rate,
and the predicted typical interface height floor(log n / rate).

Estimation strategy: translation-averaging over bulk columns (lateral
distance >= n/4 from the boundary) within each sweep, batch-means error
bars across sweeps.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .interfaces import _STRUCT6, InterfaceSet, extract_potts_interface
from .lattice import (RED, REDALL, SPLIT, BoundaryCondition, Domain,
                      ModelParams)
from .sampler import SpinConfig, make_chain, run_sweeps


# -- pillars -----------------------------------------------------------


@dataclass
class Pillar:
    sites: frozenset
    height: int  # max height of a boundary plaquette; 0 when empty

    def __bool__(self):
        return bool(self.sites)


def _k_grid(domain: Domain) -> np.ndarray:
    cached = getattr(domain, "_k_coord_grid", None)
    if cached is None:
        k0 = domain.grid_origin[2]
        cached = np.broadcast_to(
            np.arange(k0, k0 + domain.grid_shape[2]),
            domain.grid_shape).copy()
        domain._k_coord_grid = cached
    return cached


def nonred_pillar(spin: SpinConfig, x) -> Pillar:
    """Connected component of the complement of the augmented red region,
    intersected with the upper half-space, containing x.

    The pillar height is the height of the top plaquette of its highest
    cell: max k in the component plus 1.  Empty pillar has height 0.
    """
    x = tuple(x)
    if x[2] != 0:
        raise ValueError(f"pillar base {x} must sit at height 1/2")
    domain = spin.domain
    vhat = extract_potts_interface(spin, RED).vhat
    mask = domain.valid_mask & ~vhat & (_k_grid(domain) >= 0)
    gx = domain.grid_idx(x)
    if not mask[gx]:
        return Pillar(frozenset(), 0)
    lab, _ = ndimage.label(mask, structure=_STRUCT6)
    comp = lab == lab[gx]
    k_max = int(_k_grid(domain)[comp].max())
    sites = frozenset(domain.site_of_grid_idx(tuple(g))
                      for g in np.argwhere(comp))
    return Pillar(sites, k_max + 1)


# -- Monte Carlo accumulation ------------------------------------------


@dataclass
class McEstimate:
    mean: float
    stderr: float
    n_samples: int
    tau: float

    @property
    def n_eff(self) -> float:
        return self.n_samples / max(self.tau, 1.0)


def batch_means(series: np.ndarray) -> McEstimate:
    """Batch-means mean/stderr with an integrated-autocorrelation proxy
    tau = batch_size * var(batch means) / var(series)."""
    x = np.asarray(series, dtype=np.float64)
    t = x.shape[0]
    if t < 4:
        raise ValueError("need at least 4 samples for batch means")
    b = max(1, int(math.floor(math.sqrt(t))))
    nb = t // b
    bm = x[:nb * b].reshape(nb, b).mean(axis=1)
    mean = float(x.mean())
    var_b = float(bm.var(ddof=1)) if nb > 1 else 0.0
    stderr = math.sqrt(var_b / nb) if nb > 1 else 0.0
    var_x = float(x.var(ddof=1))
    tau = b * var_b / var_x if var_x > 0 else 1.0
    return McEstimate(mean, stderr, t, max(tau, 1e-12))


def ratio_batch_means(num: np.ndarray, den: np.ndarray) -> McEstimate:
    """Ratio estimator sum(num)/sum(den) with batch-based error bars."""
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    t = num.shape[0]
    if den.sum() <= 0:
        return McEstimate(0.0, 0.0, t, 1.0)
    mean = float(num.sum() / den.sum())
    b = max(1, int(math.floor(math.sqrt(t))))
    nb = t // b
    bn = num[:nb * b].reshape(nb, b).mean(axis=1)
    bd = den[:nb * b].reshape(nb, b).mean(axis=1)
    ok = bd > 0
    if ok.sum() > 1:
        ratios = bn[ok] / bd[ok]
        stderr = float(ratios.std(ddof=1) / math.sqrt(ok.sum()))
    else:
        stderr = 0.0
    resid = num - mean * den
    var_r = float(resid.var(ddof=1))
    tau = b * float((bn - mean * bd).var(ddof=1)) / var_r if var_r > 0 else 1.0
    return McEstimate(mean, stderr, t, max(tau, 1e-12))


# -- rate series -------------------------------------------------------


def rate_from_prob(est: McEstimate) -> tuple[float, float] | None:
    """-log of the estimate with first-order bias correction; None when
    the estimate is unusable (zero hits)."""
    if est.mean <= 0.0:
        return None
    rate = -math.log(est.mean) + est.stderr ** 2 / (2.0 * est.mean ** 2)
    return rate, est.stderr / est.mean


@dataclass
class RatePoint:
    h: int
    prob: McEstimate
    rate: float | None
    rate_stderr: float | None

    @property
    def usable(self) -> bool:
        return self.rate is not None


@dataclass
class RateSeries:
    kind: str  # "point-to-plane", "conditioned", "pillar"
    params: ModelParams
    n: int
    points: list[RatePoint] = field(default_factory=list)

    def point(self, h: int) -> RatePoint:
        for pt in self.points:
            if pt.h == h:
                return pt
        raise KeyError(h)

    def usable_points(self) -> list[RatePoint]:
        return [pt for pt in self.points if pt.usable]

    def csv_rows(self) -> list[dict]:
        return [{"h": pt.h, "p_hat": pt.prob.mean, "stderr": pt.prob.stderr,
                 "n_eff": pt.prob.n_eff, "rate_hat": pt.rate,
                 "rate_stderr": pt.rate_stderr} for pt in self.points]


RATE_CSV_FIELDS = ("h", "p_hat", "stderr", "n_eff", "rate_hat", "rate_stderr")


def _make_point(h: int, est: McEstimate) -> RatePoint:
    r = rate_from_prob(est)
    if r is None:
        return RatePoint(h, est, None, None)
    return RatePoint(h, est, r[0], r[1])


# -- estimation drivers ------------------------------------------------


def bulk_columns(domain: Domain) -> list[tuple[int, int]]:
    """Columns at lateral distance >= n/4 from the boundary shell."""
    ir = domain.i_range
    d_min = domain.n / 4.0

    def dist(i):
        return min(i - (ir.start - 1), ir.stop - i)

    return [(i, j) for i in ir for j in ir
            if dist(i) >= d_min and dist(j) >= d_min]


def _spin_stream(domain, bc, params, n_samples, seed, burnin, interval,
                 algorithm="alt"):
    state = make_chain(domain, bc, params, seed)
    run_sweeps(state, params, burnin, algorithm)
    for _ in range(n_samples):
        run_sweeps(state, params, interval, algorithm)
        yield state.spin


def _red_region(spin: SpinConfig, augmented: bool) -> np.ndarray:
    """Red sites connected to the red boundary shell, optionally with
    hole-filling augmentation."""
    from .interfaces import _grow_from_seeds, _shell_color_mask, augment
    domain = spin.domain
    mask = (spin.grid() == RED) & domain.valid_mask
    seeds = _shell_color_mask(spin, spin.bc, RED, domain)
    v = _grow_from_seeds(mask, seeds)
    return augment(v, domain) if augmented else v


def _component_k_max(spin: SpinConfig, upper_only: bool, augmented: bool):
    """Label the complement of the red region; per-label max k.

    Point-to-plane events live in the complement of the plain red
    cluster of the shell: under all-red boundaries the augmented region
    is the whole box and the event would be empty.  Pillars use the
    augmented region per their definition.
    """
    domain = spin.domain
    red = _red_region(spin, augmented=augmented)
    mask = domain.valid_mask & ~red
    if upper_only:
        mask &= _k_grid(domain) >= 0
    lab, nl = ndimage.label(mask, structure=_STRUCT6)
    if nl == 0:
        return lab, np.empty(0)
    k_max = ndimage.maximum(_k_grid(domain), labels=lab,
                            index=np.arange(1, nl + 1))
    return lab, np.atleast_1d(k_max)


def estimate_point_to_plane(params: ModelParams, n: int, h_max: int,
                            n_samples: int, seed: int,
                            conditioned: bool = False, m: int | None = None,
                            burnin: int = 200, interval: int = 2) -> RateSeries:
    """Probability of the origin-level site connecting to the plane at
    height h inside the non-red region, under the all-red boundary
    measure; translation-averaged over bulk columns.

    conditioned=True restricts the average to columns whose site one
    level below carries a non-red spin (the conditioned rate).
    """
    if n < 4 * h_max:
        warnings.warn(f"n={n} < 4*h_max={4 * h_max}: bulk window is thin")
    if m is None:
        m = h_max + 2
    domain = Domain("slab", n, m)
    bc = BoundaryCondition(REDALL)
    cols = bulk_columns(domain)
    base = np.array([np.ravel_multi_index(domain.grid_idx((i, j, 0)),
                                          domain.grid_shape)
                     for i, j in cols])
    below = np.array([np.ravel_multi_index(domain.grid_idx((i, j, -1)),
                                           domain.grid_shape)
                      for i, j in cols])
    hs = list(range(h_max + 1))
    num = np.zeros((n_samples, len(hs)))
    den = np.ones(n_samples) if not conditioned else np.zeros(n_samples)
    for t, spin in enumerate(_spin_stream(domain, bc, params, n_samples, seed,
                                          burnin, interval)):
        lab, k_max = _component_k_max(spin, upper_only=False, augmented=False)
        lab_o = lab.ravel()[base]
        in_comp = lab_o > 0
        if k_max.size == 0:
            comp_top = np.full(lab_o.shape, -10 ** 9)
        else:
            comp_top = np.where(in_comp, k_max[np.maximum(lab_o - 1, 0)],
                                -10 ** 9)
        if conditioned:
            cond = spin.grid().ravel()[below] != RED
            den[t] = cond.mean()
        else:
            cond = np.ones(len(cols), dtype=bool)
        for a, h in enumerate(hs):
            hit = in_comp & (comp_top >= h - 1) & cond
            num[t, a] = hit.mean()
    series = RateSeries("conditioned" if conditioned else "point-to-plane",
                        params, n)
    for a, h in enumerate(hs):
        if conditioned:
            est = ratio_batch_means(num[:, a], den)
        else:
            est = batch_means(num[:, a])
        series.points.append(_make_point(h, est))
    return series


def estimate_pillar_rate(params: ModelParams, n: int, h_max: int,
                         n_samples: int, seed: int, m: int | None = None,
                         burnin: int = 200, interval: int = 2) -> RateSeries:
    """P(pillar height >= h) averaged over bulk columns under Split(0)."""
    if n < 4 * h_max:
        warnings.warn(f"n={n} < 4*h_max={4 * h_max}: bulk window is thin")
    if m is None:
        m = h_max + 2
    domain = Domain("slab", n, m)
    bc = BoundaryCondition(SPLIT, 0)
    cols = bulk_columns(domain)
    base = np.array([np.ravel_multi_index(domain.grid_idx((i, j, 0)),
                                          domain.grid_shape)
                     for i, j in cols])
    hs = list(range(1, h_max + 1))
    frac = np.zeros((n_samples, len(hs)))
    for t, spin in enumerate(_spin_stream(domain, bc, params, n_samples, seed,
                                          burnin, interval)):
        lab, k_max = _component_k_max(spin, upper_only=True, augmented=True)
        lab_o = lab.ravel()[base]
        in_comp = lab_o > 0
        if k_max.size == 0:
            comp_top = np.full(lab_o.shape, -10 ** 9)
        else:
            comp_top = np.where(in_comp, k_max[np.maximum(lab_o - 1, 0)],
                                -10 ** 9)
        for a, h in enumerate(hs):
            frac[t, a] = (in_comp & (comp_top >= h - 1)).mean()
    series = RateSeries("pillar", params, n)
    for a, h in enumerate(hs):
        series.points.append(_make_point(h, batch_means(frac[:, a])))
    return series


# -- fitting and the height prediction ---------------------------------


@dataclass
class XiFit:
    slope: float
    slope_stderr: float
    intercept: float
    ci: tuple[float, float]
    diffs: list[tuple[int, float, float]]  # (h, rate_{h} - rate_{h-1}, se)


def fit_xi(series: RateSeries) -> XiFit:
    """Weighted least-squares slope of the rate against h, with an
    intercept absorbing the additivity defect; also successive
    differences between consecutive usable levels."""
    pts = series.usable_points()
    if len(pts) < 2:
        raise ValueError("need at least 2 usable rate points")
    h = np.array([pt.h for pt in pts], dtype=np.float64)
    y = np.array([pt.rate for pt in pts])
    se = np.array([max(pt.rate_stderr, 1e-12) for pt in pts])
    w = 1.0 / se ** 2
    design = np.stack([h, np.ones_like(h)], axis=1)
    a = design.T @ (design * w[:, None])
    b = design.T @ (y * w)
    cov = np.linalg.inv(a)
    slope, intercept = cov @ b
    slope_se = math.sqrt(cov[0, 0])
    diffs = []
    for p0, p1 in zip(pts, pts[1:]):
        if p1.h == p0.h + 1:
            d_se = math.sqrt(p0.rate_stderr ** 2 + p1.rate_stderr ** 2)
            diffs.append((p1.h, p1.rate - p0.rate, d_se))
    return XiFit(float(slope), slope_se, float(intercept),
                 (float(slope - 1.96 * slope_se),
                  float(slope + 1.96 * slope_se)), diffs)


def h_star(n: int, xi: float) -> int:
    if not xi > 0:
        raise ValueError("rate must be positive")
    if n < 2:
        raise ValueError("n must be >= 2")
    return int(math.floor(math.log(n) / xi))


def height_concentration_statistic(interfaces: list[InterfaceSet],
                                   h_star_value: int, eps: float,
                                   n: int) -> tuple[McEstimate, float]:
    """Per-sample fraction of interface plaquettes with height outside
    [(1-eps) h*, h*], normalized by n^2; plus the overall median of
    per-column heights."""
    lo2 = 2.0 * (1.0 - eps) * h_star_value
    hi2 = 2.0 * h_star_value
    fracs = np.empty(len(interfaces))
    heights2: list[int] = []
    for t, iface in enumerate(interfaces):
        outside = sum(1 for p in iface.plaquettes
                      if not (lo2 <= p.height2 <= hi2))
        fracs[t] = outside / n ** 2
        heights2.extend(v[1] for v in iface.column_heights2.values())
    med = float(np.median(heights2)) / 2.0 if heights2 else 0.0
    if len(fracs) >= 4:
        est = batch_means(fracs)
    else:
        est = McEstimate(float(fracs.mean()), 0.0, len(fracs), 1.0)
    return est, med


def column_height2_samples(interfaces: list[InterfaceSet],
                           columns=None) -> np.ndarray:
    """Per-sample per-column top heights (doubled units) as a matrix;
    columns the interface misses count as height 0."""
    out = np.zeros((len(interfaces), len(columns) if columns is not None
                    else len(interfaces[0].domain.columns())), dtype=np.int64)
    for t, iface in enumerate(interfaces):
        cols = columns if columns is not None else iface.domain.columns()
        for a, col in enumerate(cols):
            v = iface.overline_hgt2(col)
            out[t, a] = 0 if v is None else v
    return out


def sample_full_interfaces(params: ModelParams, n: int, m: int,
                           n_samples: int, seed: int, burnin: int = 200,
                           interval: int = 2) -> list[InterfaceSet]:
    """Full interfaces of edge configurations coupled to spin samples
    under Split(0) on a slab box."""
    from .interfaces import extract_full_interface
    from .rc import couple_edges_from_spins
    from .sampler import seed_state
    domain = Domain("slab", n, m)
    bc = BoundaryCondition(SPLIT, 0)
    couple_rng = seed_state(seed, stream=7)
    out = []
    for spin in _spin_stream(domain, bc, params, n_samples, seed, burnin,
                             interval):
        omega = couple_edges_from_spins(spin, params, couple_rng)
        out.append(extract_full_interface(omega))
    return out


def full_interface_tail(interfaces: list[InterfaceSet], ks,
                        domain: Domain) -> dict[int, McEstimate]:
    """P(column top height of the full interface >= k), translation-
    averaged over bulk columns."""
    cols = bulk_columns(domain)
    h2 = column_height2_samples(interfaces, cols)
    return {k: batch_means((h2 >= 2 * k).mean(axis=1)) for k in ks}


def histogram_tv_with_error(a: np.ndarray, b: np.ndarray
                            ) -> tuple[float, float]:
    """TV distance between the empirical distributions of two integer
    series, with a jackknife-over-batches standard error."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    bins = np.arange(lo, hi + 2)

    def tv(x, y):
        hx = np.histogram(x, bins=bins)[0] / x.shape[0]
        hy = np.histogram(y, bins=bins)[0] / y.shape[0]
        return 0.5 * float(np.abs(hx - hy).sum())

    full = tv(a, b)
    nb = 10
    ja = np.array_split(a, nb)
    jb = np.array_split(b, nb)
    reps = []
    for t in range(nb):
        xa = np.concatenate([ja[s] for s in range(nb) if s != t])
        xb = np.concatenate([jb[s] for s in range(nb) if s != t])
        reps.append(tv(xa, xb))
    reps = np.array(reps)
    se = math.sqrt((nb - 1) / nb * ((reps - reps.mean()) ** 2).sum())
    return full, se
