"""End-to-end experiments: synthetic data, reconstruction runs, figures."""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curve import (OBSTACLES, PeriodicGrid, RadialCurve, catalog_radius,
                    obstacle_catalog, radial_to_boundary)
from .errors import ConfigurationError, NumericalError
from .forward import (FarFieldMap, assemble_cfie, far_field, intensity,
                      solve_density, solve_far_field, unit_directions)
from .mcmc import ChainResult, run_chain, summarize
from .oracles import mie_far_field
from .posterior import HybridPotential, PoissonObservation
from .storage import (ChainSummary, DataFile, ExperimentConfig, atomic_write,
                      write_samples_csv)
from .svgplot import Figure

__all__ = [
    "ARTIFACTS",
    "synthesize_data",
    "draw_counts",
    "run_experiment",
    "render_figures",
    "validate_forward",
    "CheckResult",
]

log = logging.getLogger(__name__)

ARTIFACTS = ("samples.csv", "summary.json", "data.svg", "reconstruction.svg", "trace.svg")
AUTO_SHIFT_THRESHOLD = 1e-12


def synthesize_data(obstacle: str, fmap: FarFieldMap, seed: int, n_points: int = 512,
                    grading_order: int | None = None, auto_shift: float | None = None
                    ) -> DataFile:
    """Poisson counts for a catalog obstacle, computed on a fine grid.

    With ``auto_shift`` set, a uniform shift of that size is added to the
    intensities whenever some noiseless intensity falls below 1e-12.
    """
    curve = obstacle_catalog(obstacle, PeriodicGrid(n_points), grading_order)
    order = grading_order if grading_order is not None else (0 if OBSTACLES[obstacle].smooth else 3)
    lam = intensity(solve_far_field(curve, fmap), fmap.tau, fmap.shift).values
    if auto_shift and np.min(lam) < AUTO_SHIFT_THRESHOLD:
        fmap = FarFieldMap(k=fmap.k, incident_dirs=fmap.incident_dirs, eta=fmap.eta,
                           obs_dirs=fmap.obs_dirs, tau=fmap.tau,
                           shift=fmap.shift + auto_shift)
        lam = lam + auto_shift
    if np.any(lam < 0):
        raise NumericalError("negative synthesised intensity")
    y = draw_counts(lam, seed)
    truth = obstacle_catalog(obstacle, PeriodicGrid(256), 0)
    return DataFile(obstacle=obstacle, obs_dirs=fmap.obs_dirs, incident_dirs=fmap.incident_dirs,
                    k=fmap.k, eta=fmap.eta, tau=fmap.tau, shift=fmap.shift, y=y, lam=lam,
                    seed=seed, n_points=n_points, grading_order=order,
                    truth_points=truth.points)


def draw_counts(lam, seed) -> np.ndarray:
    """Independent Poisson counts with means ``lam`` from a seeded generator."""
    return np.random.default_rng(seed).poisson(np.asarray(lam, dtype=float)).astype(np.int64)


def _chain_worker(args) -> ChainResult:
    cfg, chain_cfg, data, rng_seed = args
    grid = PeriodicGrid(cfg.n_points)
    target = HybridPotential(PoissonObservation(data.y, data.obs_dirs, data.tau,
                                                data.incident_dirs),
                             data.forward_map(), cfg.positivity, cfg.tv)
    every = max(cfg.n_iters // 20, 1)

    def progress(i, psi, acc):
        log.info("iter %d/%d  psi=%.6g  acceptance=%.3f", i, cfg.n_iters, psi, acc)

    rng = np.random.default_rng(rng_seed)
    return run_chain(chain_cfg, target, grid, progress=progress, progress_every=every,
                     rng=rng, summarize_result=False)


def _n_workers(n_chains: int) -> int:
    cap = os.environ.get("SCATTER_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ConfigurationError(f"SCATTER_THREADS={cap!r} is not an integer") from None
    return max(1, min(n_chains, limit))


def run_experiment(cfg: ExperimentConfig) -> ChainSummary:
    """Run the configured reconstruction and write all artifacts.

    Writes ``samples.csv``, ``summary.json`` and three SVG figures to
    ``cfg.output_dir``; if no data file is configured the synthesised data
    is written there as ``data.json`` first.
    """
    out = Path(cfg.output_dir)
    if cfg.data_path:
        data_path = Path(cfg.data_path)
        data = DataFile.load(data_path)
    else:
        data = synthesize_data(cfg.obstacle, cfg.forward_map(), cfg.data_seed,
                               cfg.data_n_points, cfg.grading_order,
                               auto_shift=0.1 if cfg.auto_shift else None)
        data_path = data.save(out / "data.json")
    if data.obstacle != cfg.obstacle:
        log.warning("data file obstacle %r differs from configured %r",
                    data.obstacle, cfg.obstacle)

    if cfg.n_chains == 1:
        seeds = [cfg.seed]
    else:
        seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_chains)
    jobs = [(cfg, cfg.chain_config(), data, s) for s in seeds]
    t0 = time.perf_counter()
    workers = _n_workers(cfg.n_chains)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_chain_worker, jobs))
    else:
        results = [_chain_worker(j) for j in jobs]
    log.info("sampling finished in %.1f s", time.perf_counter() - t0)

    grid = PeriodicGrid(cfg.n_points)
    samples = np.concatenate([r.samples for r in results])
    mean, lo, hi = summarize(samples, cfg.positivity, grid)
    truth_q = catalog_radius(data.obstacle, grid.nodes)
    rel = cov = None
    if truth_q is not None:
        rel = float(np.linalg.norm(mean.q - truth_q) / np.linalg.norm(truth_q))
        cov = float(np.mean((lo <= truth_q) & (truth_q <= hi)))
    try:
        data_ref = os.path.relpath(data_path, out)
    except ValueError:
        data_ref = str(data_path)
    summary = ChainSummary(
        obstacle=data.obstacle, config=cfg.to_dict(), n_points=grid.n_points,
        mean_q=mean.q, band_lo=lo, band_hi=hi,
        acceptance_rates=[r.acceptance_rate for r in results], n_retained=len(samples),
        n_failures=sum(r.n_failures for r in results),
        potential_trace=np.concatenate([r.potential_trace for r in results]),
        obs_angles=np.mod(np.arctan2(data.obs_dirs[:, 1], data.obs_dirs[:, 0]), 2 * np.pi),
        y=data.y, lam_true=data.lam, truth_points=data.truth_points, truth_q=truth_q,
        rel_l2_error=rel, band_coverage=cov, data_file=data_ref.replace(os.sep, "/"),
    )
    write_samples_csv(out / "samples.csv", samples, grid.nodes)
    summary.save(out / "summary.json")
    render_figures(summary, out)
    return summary


def render_figures(summary: ChainSummary, out_dir) -> list[Path]:
    out = Path(out_dir)
    n_inc = max(1, len(summary.y) // max(1, len(summary.obs_angles)))
    ang = np.tile(summary.obs_angles, n_inc)
    fig = Figure(f"Poisson data: {summary.obstacle}", "observation angle (rad)", "counts")
    order = np.argsort(summary.obs_angles)
    m = len(summary.obs_angles)
    for l in range(n_inc):
        sl = slice(l * m, (l + 1) * m)
        fig.line(summary.obs_angles[order], summary.lam_true[sl][order],
                 label="intensity" if l == 0 else None)
    fig.points(ang, summary.y, label="counts")
    paths = [atomic_write(out / "data.svg", fig.to_svg())]

    t = 2 * np.pi * np.arange(summary.n_points) / summary.n_points
    cs, sn = np.cos(t), np.sin(t)
    rec = Figure(f"Reconstruction: {summary.obstacle}", "x1", "x2", equal_aspect=True)
    rec.region(summary.band_hi * cs, summary.band_hi * sn, summary.band_lo * cs,
               summary.band_lo * sn, label="95% band")
    tp = summary.truth_points
    rec.line(tp[:, 0], tp[:, 1], color="black", label="truth", closed=True)
    rec.line(summary.mean_q * cs, summary.mean_q * sn, color="#d62728", dash="6,3",
             label="posterior mean", closed=True)
    paths.append(atomic_write(out / "reconstruction.svg", rec.to_svg()))

    trace = summary.potential_trace
    stride = max(1, len(trace) // 2000)
    it = np.arange(len(trace))[::stride]
    tr = Figure("Potential trace", "iteration", "potential")
    tr.line(it, trace[::stride])
    paths.append(atomic_write(out / "trace.svg", tr.to_svg()))
    return paths


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: {self.value:.3e} (tolerance {self.tolerance:.1e})"


def _far_field_matrix(curve, k, eta, obs, inc):
    A = assemble_cfie(curve, k, eta)
    sol = solve_density(A, curve, k, inc)
    return far_field(sol, curve, k, eta, obs).values


def validate_forward() -> list[CheckResult]:
    """Run the analytic and physical consistency checks of the forward solver."""
    checks = []
    ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    obs = unit_directions(ang)
    for R in (0.5, 1.0, 2.0):
        for k in (1.0, 2.0):
            curve = radial_to_boundary(RadialCurve(PeriodicGrid(128), np.full(128, R)))
            u = _far_field_matrix(curve, k, 1.0, obs, [[1.0, 0.0]])[:, 0]
            err = float(np.max(np.abs(u - mie_far_field(R, k, ang))))
            checks.append(CheckResult(f"Mie circle R={R} k={k}", err, 1e-8, err < 1e-8))

    n_dirs = 16
    dang = 2 * np.pi * np.arange(n_dirs) / n_dirs
    dirs = unit_directions(dang)
    flip = (np.arange(n_dirs) + n_dirs // 2) % n_dirs
    for name in OBSTACLES:
        smooth = OBSTACLES[name].smooth
        curve = obstacle_catalog(name, PeriodicGrid(256))
        U = _far_field_matrix(curve, 1.0, 1.0, dirs, dirs)
        err = float(np.max(np.abs(U - U[np.ix_(flip, flip)].T)))
        tol = 1e-8 if smooth else 1e-4
        checks.append(CheckResult(f"reciprocity {name}", err, tol, err < tol))

    quad = unit_directions(np.linspace(0, 2 * np.pi, 256, endpoint=False))
    for name in (n for n, o in OBSTACLES.items() if o.smooth):
        curve = obstacle_catalog(name, PeriodicGrid(256))
        k = 1.0
        U = _far_field_matrix(curve, k, k, np.vstack([quad, [[1.0, 0.0]]]), [[1.0, 0.0]])[:, 0]
        lhs = 2 * np.pi * np.mean(np.abs(U[:-1]) ** 2)
        rhs = -np.sqrt(8 * np.pi / k) * np.real(np.exp(0.25j * np.pi) * U[-1])
        rel = float(abs(lhs - rhs) / abs(rhs))
        checks.append(CheckResult(f"optical theorem {name}", rel, 1e-6, rel < 1e-6))

    ref = _far_field_matrix(obstacle_catalog("kite", PeriodicGrid(512)), 1.0, 1.0, dirs,
                            [[1.0, 0.0]])
    errs = [float(np.max(np.abs(_far_field_matrix(
        obstacle_catalog("kite", PeriodicGrid(n)), 1.0, 1.0, dirs, [[1.0, 0.0]]) - ref)))
        for n in (32, 64, 128)]
    ratio = min(errs[0] / errs[1], errs[1] / max(errs[2], 1e-300))
    checks.append(CheckResult("kite convergence (min error ratio per doubling)", ratio, 10.0,
                              ratio > 10.0))
    return checks
