# cli.py
"""
Command-line entry point: configuration, snapshot persistence, analysis
CSVs, oracle suites, and the canned end-to-end experiment pipelines.

Exit codes: 0 on success, 1 when a pipeline verdict or oracle assertion
fails, 2 on usage errors.
"""

from __future__ import annotations

import csv
import glob as globmod
import json
import math
import struct
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__
from .lattice import BLUE, BoundaryCondition, Domain, ModelParams
from .rates import RATE_CSV_FIELDS
from .sampler import SpinConfig, make_chain, run_sweeps

SNAPSHOT_TAG = b"PFSIM1"
SNAPSHOT_VERSION = 1
_KIND_CODES = {"floor": 0, "slab": 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}
_BC_CODES = {"floor": 0, "split": 1, "redall": 2}
_BC_NAMES = {v: k for k, v in _BC_CODES.items()}
# tag, version, q, kind, beta, n, m, bc, h, seed, sweep, flags
_HEADER = struct.Struct("<6sBBBdHHBhQQBII")

DEFAULT_CONFIG = {
    "model": {"q": 2, "beta": 1.2},
    "domain": {"kind": "slab", "n": 8, "m": 8},
    "bc": {"variant": "split", "h": 0},
    "sampler": {"algorithm": "alt", "burnin": 200, "interval": 2,
                "n_samples": 100, "seed": 1, "save_edges": True,
                "conditional_soft_floor_h": None,
                "conditional_method": "rejection"},
    "analysis": {"level_h": 1, "h_max": 2, "eps": 0.5, "tail_ks": [1, 2, 3]},
    "reproduce": {"main_theorem_ns": [8, 16, 32, 64],
                  "main_theorem_beta": 1.0,
                  "main_theorem_samples": 120,
                  "tails_n": 12, "tails_samples": 400,
                  "rate_n": 16, "rate_h_max": 3, "rate_samples": 800,
                  "cylinder_n": 8, "cylinder_ms": [8, 16],
                  "cylinder_samples": 400},
}


# -- configuration ------------------------------------------------------


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | None) -> dict:
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if path is not None:
        with open(path) as fh:
            user = json.load(fh)
        unknown = set(user) - set(cfg)
        if unknown:
            raise click.UsageError(f"unknown config sections: {sorted(unknown)}")
        cfg = _merge(cfg, user)
    return cfg


def _params_of(cfg: dict) -> ModelParams:
    return ModelParams(q=int(cfg["model"]["q"]), beta=float(cfg["model"]["beta"]))


def _domain_of(cfg: dict) -> Domain:
    d = cfg["domain"]
    return Domain(d["kind"], int(d["n"]), int(d["m"]))


def _bc_of(cfg: dict) -> BoundaryCondition:
    b = cfg["bc"]
    return BoundaryCondition(b["variant"], int(b.get("h", 0)))


# -- snapshot format ----------------------------------------------------


def snapshot_bytes(spin: SpinConfig, params: ModelParams, seed: int,
                   sweep: int, edge_bits: np.ndarray | None = None) -> bytes:
    domain, bc = spin.domain, spin.bc
    flags = 1 if edge_bits is not None else 0
    n_edges = domain.n_edges if edge_bits is not None else 0
    header = _HEADER.pack(
        SNAPSHOT_TAG, SNAPSHOT_VERSION, params.q, _KIND_CODES[domain.kind],
        params.beta, domain.n, domain.m, _BC_CODES[bc.variant], bc.h,
        seed, sweep, flags, domain.n_sites, n_edges)
    payload = spin.colors.astype(np.uint8).tobytes()
    if edge_bits is not None:
        if edge_bits.shape[0] != domain.n_edges:
            raise ValueError("edge bitset length mismatch")
        payload += np.packbits(edge_bits.astype(np.uint8)).tobytes()
    return header + payload


def read_snapshot(data: bytes):
    """Returns (spin, params, seed, sweep, edge_bits-or-None)."""
    if data[:6] != SNAPSHOT_TAG:
        raise ValueError("not a snapshot: bad format tag")
    (tag, version, q, kind, beta, n, m, bcc, h, seed, sweep, flags,
     n_sites, n_edges) = _HEADER.unpack_from(data)
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    domain = Domain(_KIND_NAMES[kind], n, m)
    if domain.n_sites != n_sites:
        raise ValueError("header/site-count mismatch")
    bc = BoundaryCondition(_BC_NAMES[bcc], h)
    off = _HEADER.size
    colors = np.frombuffer(data, dtype=np.uint8, count=n_sites,
                           offset=off).astype(np.int8)
    off += n_sites
    spin = SpinConfig(colors, domain, bc)
    edge_bits = None
    if flags & 1:
        nbytes = (n_edges + 7) // 8
        packed = np.frombuffer(data, dtype=np.uint8, count=nbytes, offset=off)
        edge_bits = np.unpackbits(packed)[:n_edges].astype(bool)
    return spin, ModelParams(q=q, beta=beta), seed, sweep, edge_bits


def write_snapshot_file(path, spin, params, seed, sweep, edge_bits=None):
    Path(path).write_bytes(snapshot_bytes(spin, params, seed, sweep, edge_bits))


def read_snapshot_file(path):
    return read_snapshot(Path(path).read_bytes())


# -- sample -------------------------------------------------------------


def run_sample(cfg: dict, out_dir: Path) -> dict:
    from .rates import batch_means
    from .rc import couple_edges_from_spins
    from .sampler import sample_conditional_soft_floor, seed_state

    out_dir.mkdir(parents=True, exist_ok=True)
    params = _params_of(cfg)
    domain = _domain_of(cfg)
    bc = _bc_of(cfg)
    sc = cfg["sampler"]
    seed = int(sc["seed"])
    n_samples = int(sc["n_samples"])
    t0 = time.time()
    files = []
    energies = []
    acceptance = None

    cond_h = sc.get("conditional_soft_floor_h")
    if cond_h is not None:
        stream = sample_conditional_soft_floor(
            domain, int(cond_h), params, n_samples, seed,
            method=sc.get("conditional_method", "rejection"),
            burnin=int(sc["burnin"]), interval=int(sc["interval"]))
        drawn = 0
        for t, spin in enumerate(stream):
            drawn += 1
            fn = out_dir / f"snapshot_{t:05d}.bin"
            write_snapshot_file(fn, spin, params, seed, t)
            files.append(fn.name)
            from .sampler import energy
            energies.append(energy(spin))
        acceptance = None if drawn == 0 else 1.0  # restricted chains accept all
        if sc.get("conditional_method", "rejection") == "rejection":
            # re-derive the acceptance rate from an unconditioned run length
            acceptance = n_samples / max(n_samples, drawn)
    else:
        state = make_chain(domain, bc, params, seed)
        run_sweeps(state, params, int(sc["burnin"]), sc["algorithm"])
        couple_rng = seed_state(seed, stream=7)
        for t in range(n_samples):
            run_sweeps(state, params, int(sc["interval"]), sc["algorithm"])
            edge_bits = None
            if sc.get("save_edges") and bc.variant != "redall":
                edge_bits = couple_edges_from_spins(state.spin, params,
                                                    couple_rng).bits
            fn = out_dir / f"snapshot_{t:05d}.bin"
            write_snapshot_file(fn, state.spin, params, seed, state.sweep,
                                edge_bits)
            files.append(fn.name)
            energies.append(state.energy)

    tau = None
    if len(energies) >= 4:
        tau = batch_means(np.array(energies, dtype=np.float64)).tau
    manifest = {
        "config": cfg,
        "n_snapshots": len(files),
        "files": files,
        "tau_hat_energy": tau,
        "acceptance_rate": acceptance,
        "elapsed_seconds": time.time() - t0,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


# -- analyze ------------------------------------------------------------

WALL_CSV_FIELDS = ("sample_id", "full_size", "n_walls", "total_excess",
                   "outermost_hull_area", "level_set_count")


def _load_snapshots(paths):
    loaded = [read_snapshot_file(p) for p in sorted(paths)]
    if not loaded:
        raise click.UsageError("no snapshots matched")
    key0 = None
    for spin, params, seed, sweep, bits in loaded:
        key = (spin.domain.kind, spin.domain.n, spin.domain.m,
               spin.bc.variant, spin.bc.h, params.q, params.beta)
        if key0 is None:
            key0 = key
        elif key != key0:
            raise click.UsageError("snapshots mix domain/bc/model parameters")
    return loaded


def run_analyze(paths, analyses, out_dir: Path, cfg: dict) -> dict:
    from .interfaces import (extract_fk_interface, extract_full_interface,
                             extract_potts_interface, verify_ordering)
    from .rc import EdgeConfig
    from .walls import wall_area_statistics

    out_dir.mkdir(parents=True, exist_ok=True)
    loaded = _load_snapshots(paths)
    domain = loaded[0][0].domain
    report: dict = {"n_snapshots": len(loaded), "outputs": []}

    if "heights" in analyses:
        rows = []
        RED = 2
        audit = "ordering" in analyses
        for sid, (spin, params, seed, sweep, bits) in enumerate(loaded):
            iface = extract_potts_interface(spin, BLUE)
            ordered = ""
            if audit and bits is not None:
                omega = EdgeConfig(bits, spin.domain, spin.bc)
                ordered = verify_ordering(
                    extract_fk_interface(omega, "top"),
                    extract_potts_interface(spin, RED),
                    iface,
                    extract_fk_interface(omega, "bot"))
            for (i, j) in domain.columns():
                v = iface.overline_hgt2((i, j))
                row = {"sample_id": sid, "i": i, "j": j,
                       "height2": 0 if v is None else v}
                if audit:
                    row["ordered"] = ordered
                rows.append(row)
        fields = ["sample_id", "i", "j", "height2"] + (["ordered"] if audit else [])
        _write_csv(out_dir / "heights.csv", fields, rows)
        report["outputs"].append("heights.csv")

    if "walls" in analyses:
        ifulls = []
        for spin, params, seed, sweep, bits in loaded:
            if bits is None:
                raise click.UsageError("wall analysis needs edge bitsets")
            ifulls.append(extract_full_interface(
                EdgeConfig(bits, spin.domain, spin.bc)))
        stats = wall_area_statistics(ifulls, domain,
                                     h=int(cfg["analysis"]["level_h"]))
        rows = [{"sample_id": r.sample_id, "full_size": r.full_size,
                 "n_walls": r.n_walls, "total_excess": r.total_excess,
                 "outermost_hull_area": r.outermost_hull_area,
                 "level_set_count": r.level_set_count} for r in stats]
        _write_csv(out_dir / "walls.csv", WALL_CSV_FIELDS, rows)
        report["outputs"].append("walls.csv")

    if "rates" in analyses:
        series = _rates_from_snapshots(loaded, int(cfg["analysis"]["h_max"]))
        _write_csv(out_dir / "rates.csv", RATE_CSV_FIELDS, series.csv_rows())
        report["outputs"].append("rates.csv")

    with open(out_dir / "analyze_report.json", "w") as fh:
        json.dump(report, fh, indent=2)
    return report


def _rates_from_snapshots(loaded, h_max: int):
    """Point-to-plane rate table from stored RedAll spins."""
    from .rates import (RateSeries, _component_k_max, _make_point,
                        batch_means, bulk_columns)
    spin0 = loaded[0][0]
    if spin0.bc.variant != "redall":
        raise click.UsageError("rate analysis expects a RedAll run")
    domain = spin0.domain
    params = loaded[0][1]
    cols = bulk_columns(domain)
    base = np.array([np.ravel_multi_index(domain.grid_idx((i, j, 0)),
                                          domain.grid_shape)
                     for i, j in cols])
    hs = list(range(h_max + 1))
    frac = np.zeros((len(loaded), len(hs)))
    for t, (spin, _, _, _, _) in enumerate(loaded):
        lab, k_max = _component_k_max(spin, upper_only=False, augmented=False)
        lab_o = lab.ravel()[base]
        in_comp = lab_o > 0
        if k_max.size == 0:
            comp_top = np.full(lab_o.shape, -10 ** 9)
        else:
            comp_top = np.where(in_comp, k_max[np.maximum(lab_o - 1, 0)],
                                -10 ** 9)
        for a, h in enumerate(hs):
            frac[t, a] = (in_comp & (comp_top >= h - 1)).mean()
    series = RateSeries("point-to-plane", params, domain.n)
    for a, h in enumerate(hs):
        series.points.append(_make_point(h, batch_means(frac[:, a])))
    return series


def _write_csv(path, fields, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fields))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


# -- reproduce pipelines ------------------------------------------------


def _map_jobs(fn, jobs, workers: int):
    """Order-preserving map; results are independent of worker count
    because every job carries its own seed stream."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _heights_job(job):
    """Sample the hard-floor measure at one size; return per-column
    top heights (doubled units) of the blue interface."""
    from .interfaces import extract_potts_interface
    from .sampler import annealed_chain
    n, beta, q, n_samples, seed, out = job
    params = ModelParams(q=q, beta=beta)
    domain = Domain("floor", n, 8)
    bc = BoundaryCondition("floor")
    state = annealed_chain(domain, bc, params, seed)
    heights = []
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for t in range(n_samples):
        run_sweeps(state, params, 10, "alt")
        write_snapshot_file(out_dir / f"snapshot_{t:05d}.bin", state.spin,
                            params, seed, state.sweep)
        iface = extract_potts_interface(state.spin, BLUE)
        for col in domain.columns():
            v = iface.overline_hgt2(col)
            heights.append(0 if v is None else v)
    return n, heights


def _xi_from_series(series):
    """Fitted decay rate from the h >= 1 points (the h=0 and h=1 events
    coincide, so including h=0 would flatten the slope)."""
    from .rates import RateSeries, fit_xi
    pts = [pt for pt in series.usable_points() if pt.h >= 1]
    if len(pts) < 2:
        return None
    sub = RateSeries(series.kind, series.params, series.n, pts)
    slope = fit_xi(sub).slope
    return slope if slope > 0 else None


def reproduce_main_theorem_height(cfg: dict, out_dir: Path, workers: int) -> dict:
    from .rates import estimate_point_to_plane, fit_xi, h_star
    rc = cfg["reproduce"]
    ns = [int(n) for n in rc["main_theorem_ns"]]
    beta = float(rc["main_theorem_beta"])
    q = int(cfg["model"]["q"])
    n_samples = int(rc["main_theorem_samples"])
    seed = int(cfg["sampler"]["seed"])
    jobs = [(n, beta, q, n_samples, seed + 1000 + idx,
             str(out_dir / f"n{n}")) for idx, n in enumerate(ns)]
    results = _map_jobs(_heights_job, jobs, workers)
    medians = {n: float(np.median(h)) / 2.0 for n, h in results}

    rate = estimate_point_to_plane(ModelParams(q=q, beta=beta),
                                   n=max(8, min(ns)), h_max=2,
                                   n_samples=max(200, n_samples), seed=seed)
    xi = _xi_from_series(rate)
    rows = []
    for n in ns:
        hs = h_star(n, xi) if xi is not None else ""
        rows.append({"n": n, "log_n": math.log(n), "median_height": medians[n],
                     "h_star": hs})
    _write_csv(out_dir / "main_theorem_height.csv",
               ("n", "log_n", "median_height", "h_star"), rows)
    meds = [medians[n] for n in ns]
    verdict = {
        "medians": medians,
        "xi_hat": xi if xi is not None else "unresolved",
        "nondecreasing": all(a <= b for a, b in zip(meds, meds[1:])),
        "growth_ok": meds[-1] >= meds[0] + 1.0,
    }
    verdict["passed"] = verdict["nondecreasing"] and verdict["growth_ok"]
    return verdict


def reproduce_dobrushin_tails(cfg: dict, out_dir: Path, workers: int) -> dict:
    from .rates import full_interface_tail, sample_full_interfaces
    rc = cfg["reproduce"]
    n = int(rc["tails_n"])
    params = _params_of(cfg)
    ifaces = sample_full_interfaces(params, n, n, int(rc["tails_samples"]),
                                    int(cfg["sampler"]["seed"]))
    domain = ifaces[0].domain
    ks = [int(k) for k in cfg["analysis"]["tail_ks"]]
    tail = full_interface_tail(ifaces, ks, domain)
    rows = [{"k": k, "p_hat": tail[k].mean, "stderr": tail[k].stderr}
            for k in ks]
    _write_csv(out_dir / "dobrushin_tails.csv", ("k", "p_hat", "stderr"), rows)
    ps = [tail[k].mean for k in ks]
    verdict = {"tail": {k: tail[k].mean for k in ks},
               "monotone": all(a >= b for a, b in zip(ps, ps[1:]))}
    verdict["passed"] = verdict["monotone"]
    return verdict


def reproduce_rate_table(cfg: dict, out_dir: Path, workers: int) -> dict:
    from .rates import estimate_point_to_plane, fit_xi
    rc = cfg["reproduce"]
    params = _params_of(cfg)
    series = estimate_point_to_plane(params, int(rc["rate_n"]),
                                     int(rc["rate_h_max"]),
                                     int(rc["rate_samples"]),
                                     int(cfg["sampler"]["seed"]))
    _write_csv(out_dir / "rate_table.csv", RATE_CSV_FIELDS, series.csv_rows())
    usable = [pt for pt in series.usable_points() if pt.h >= 1]
    verdict = {"n_usable": len(usable)}
    if len(usable) >= 2:
        from .rates import RateSeries
        fit = fit_xi(RateSeries(series.kind, series.params, series.n, usable))
        verdict.update({"xi_hat": fit.slope, "xi_stderr": fit.slope_stderr,
                        "ci": list(fit.ci)})
        verdict["passed"] = fit.slope > 0
    else:
        verdict["passed"] = False
    return verdict


def reproduce_cylinder_insensitivity(cfg: dict, out_dir: Path,
                                     workers: int) -> dict:
    from .interfaces import extract_potts_interface
    from .rates import column_height2_samples, histogram_tv_with_error
    rc = cfg["reproduce"]
    n = int(rc["cylinder_n"])
    ms = [int(m) for m in rc["cylinder_ms"]]
    params = _params_of(cfg)
    seed = int(cfg["sampler"]["seed"])
    samples = {}
    for m in ms:
        domain = Domain("floor", n, m)
        bc = BoundaryCondition("floor")
        state = make_chain(domain, bc, params, seed)
        run_sweeps(state, params, 200, "alt")
        ifaces = []
        for _ in range(int(rc["cylinder_samples"])):
            run_sweeps(state, params, 2, "alt")
            ifaces.append(extract_potts_interface(state.spin, BLUE))
        samples[m] = column_height2_samples(ifaces).ravel()
    tv, tv_se = histogram_tv_with_error(samples[ms[0]], samples[ms[1]])
    rows = [{"m": m, "mean_height2": float(samples[m].mean())} for m in ms]
    _write_csv(out_dir / "cylinder_insensitivity.csv",
               ("m", "mean_height2"), rows)
    verdict = {"tv": tv, "tv_stderr": tv_se, "passed": tv <= 3.0 * max(tv_se, 1e-3)}
    return verdict


REPRODUCE_IDS = {
    "main-theorem-height": reproduce_main_theorem_height,
    "dobrushin-tails": reproduce_dobrushin_tails,
    "rate-table": reproduce_rate_table,
    "cylinder-insensitivity": reproduce_cylinder_insensitivity,
}


# -- click wiring -------------------------------------------------------


@click.group()
def main():
    """Monte Carlo simulation and analysis of 3D Potts / random-cluster
    interfaces above hard and soft floors."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=1)
@click.option("--out", "out_dir", type=click.Path(), default="runs/sample")
def sample(config_path, seed, workers, out_dir):
    """Draw snapshots from the configured measure."""
    cfg = load_config(config_path)
    if seed is not None:
        cfg["sampler"]["seed"] = seed
    manifest = run_sample(cfg, Path(out_dir))
    click.echo(json.dumps({"n_snapshots": manifest["n_snapshots"],
                           "out": str(out_dir)}))


@main.command()
@click.argument("snapshot_glob")
@click.option("--analyses", default="heights",
              help="comma list: heights,ordering,walls,rates")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", type=click.Path(), default="runs/analyze")
def analyze(snapshot_glob, analyses, config_path, out_dir):
    """Produce CSV reports from stored snapshots."""
    cfg = load_config(config_path)
    paths = globmod.glob(snapshot_glob)
    wanted = {a.strip() for a in analyses.split(",") if a.strip()}
    unknown = wanted - {"heights", "ordering", "walls", "rates"}
    if unknown:
        raise click.UsageError(f"unknown analyses: {sorted(unknown)}")
    report = run_analyze(paths, wanted, Path(out_dir), cfg)
    click.echo(json.dumps(report))


@main.command()
@click.argument("suite")
@click.option("--out", "out_dir", type=click.Path(), default=None)
def oracle(suite, out_dir):
    """Run an exact-check suite and report a JSON verdict."""
    from .oracle import SUITES, run_suite
    if suite not in SUITES:
        raise click.UsageError(
            f"unknown suite {suite!r}; available: {sorted(SUITES)}")
    report = run_suite(suite)
    text = json.dumps(report, indent=2, default=str)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / f"oracle_{suite}.json").write_text(text)
    click.echo(text)
    if not report["passed"]:
        sys.exit(1)


@main.command()
@click.argument("experiment_id")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=1)
@click.option("--out", "out_dir", type=click.Path(), default="runs/reproduce")
def reproduce(experiment_id, config_path, seed, workers, out_dir):
    """Run a canned sample->analyze->report pipeline."""
    if experiment_id not in REPRODUCE_IDS:
        raise click.UsageError(
            f"unknown experiment {experiment_id!r}; "
            f"available: {sorted(REPRODUCE_IDS)}")
    cfg = load_config(config_path)
    if seed is not None:
        cfg["sampler"]["seed"] = seed
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    verdict = REPRODUCE_IDS[experiment_id](cfg, out, workers)
    verdict["experiment"] = experiment_id
    verdict["config"] = cfg
    (out / f"{experiment_id}_verdict.json").write_text(
        json.dumps(verdict, indent=2, default=str))
    click.echo(json.dumps({k: v for k, v in verdict.items()
                           if k != "config"}, default=str))
    if not verdict["passed"]:
        sys.exit(1)


@main.command()
def info():
    """Show version, oracle suites, and experiment ids."""
    from .oracle import SUITES
    click.echo(json.dumps({
        "version": __version__,
        "snapshot_tag": SNAPSHOT_TAG.decode(),
        "oracle_suites": sorted(SUITES),
        "reproduce_ids": sorted(REPRODUCE_IDS),
        "domains": ["floor", "slab"],
    }, indent=2))


if __name__ == "__main__":
    main()
