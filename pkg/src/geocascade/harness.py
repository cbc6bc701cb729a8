"""Monte Carlo estimation of the mean failure ratio and sweep assembly.

Trials are independent realizations; trial t of a run with master seed m
uses the generator seeded with derive_seed(m, t) (or derive_seed(m, t, k)
for the k-th rejection attempt when conditioning on connectivity), so
results are reproducible bit-for-bit under any parallel schedule. Within a
trial the sampled graph is shared across the whole tolerance grid; the
per-trial seed does not depend on the tolerance, so a one-point sweep
equals a direct estimate.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import lower, upper
from .cascade import apply_attack, first_round_loads, run_cascade
from .errors import ParameterDomainError
from .rgg import RNG_ALGORITHM, derive_seed, is_connected, make_rng, sample_graph

_MAX_CONNECT_ATTEMPTS = 10_000
_PROBE_BATCH = 100


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a base scenario, a tolerance grid, and trial bookkeeping."""

    config: object
    alpha_grid: tuple
    trials: int = 1000
    condition_on_connected: bool = False
    master_seed: int = 0
    threads: int = 0  # 0 = one worker per CPU

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterDomainError(f"trials must be >= 1, got {self.trials}")
        grid = tuple(float(a) for a in self.alpha_grid)
        if not grid:
            raise ParameterDomainError("alpha grid must not be empty")
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ParameterDomainError("alpha grid must be sorted ascending")
        object.__setattr__(self, "alpha_grid", grid)


@dataclass
class BoundCurve:
    """Per-tolerance Monte Carlo estimates next to both analytic bounds."""

    alphas: np.ndarray
    fbar: np.ndarray
    stderr: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    lower_applicable: np.ndarray
    trials: int
    disconnected: int
    metadata: dict = field(default_factory=dict)

    CSV_HEADER = "alpha,fbar,stderr,upper,lower,lower_applicable,trials,disconnected"

    def rows(self):
        for i in range(self.alphas.size):
            yield (
                self.alphas[i],
                self.fbar[i],
                self.stderr[i],
                self.upper[i],
                self.lower[i],
                int(self.lower_applicable[i]),
                self.trials,
                self.disconnected,
            )

    def to_csv_text(self):
        lines = [self.CSV_HEADER]
        for a, f, se, ub, lb, app, tr, disc in self.rows():
            lines.append(
                f"{a:.17g},{f:.17g},{se:.17g},{ub:.17g},{lb:.17g},{app},{tr},{disc}"
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_csv_text())


def _draw_graph(cfg, master_seed, trial, condition):
    """Sample a realization; reject disconnected draws when conditioning."""
    if not condition:
        return sample_graph(cfg, make_rng(derive_seed(master_seed, trial))), 0
    for attempt in range(_MAX_CONNECT_ATTEMPTS):
        g = sample_graph(cfg, make_rng(derive_seed(master_seed, trial, attempt)))
        if is_connected(g):
            return g, attempt
    raise RuntimeError(
        f"no connected realization in {_MAX_CONNECT_ATTEMPTS} attempts "
        f"(trial {trial}); connectivity conditioning is infeasible here"
    )


def _run_trial_chunk(args):
    cfg, alphas, trial_indices, master_seed, condition = args
    ratios = np.empty((len(trial_indices), len(alphas)), dtype=np.float64)
    rejected = 0
    for row, t in enumerate(trial_indices):
        g, rej = _draw_graph(cfg, master_seed, t, condition)
        rejected += rej
        attacked = apply_attack(g, cfg.attack_radius)
        for j, alpha in enumerate(alphas):
            ratios[row, j] = run_cascade(g, attacked, alpha).failure_ratio
    return ratios, rejected


def _connectivity_probe(cfg, master_seed):
    """Fail fast when conditioning would reject essentially every draw."""
    connected = 0
    for i in range(_PROBE_BATCH):
        g = sample_graph(cfg, make_rng(derive_seed(master_seed, -1, i)))
        if is_connected(g):
            connected += 1
    if connected == 0:
        raise RuntimeError(
            f"connectivity probe: 0/{_PROBE_BATCH} draws connected; "
            "rejection sampling of connected graphs is infeasible at these "
            "parameters"
        )


def _worker_count(threads, trials):
    if threads == 0:
        threads = os.cpu_count() or 1
    return max(1, min(threads, trials))


def run_trials(spec):
    """Failure-ratio matrix (trials x alphas) plus disconnected-draw count.

    Row t is fully determined by (config, master_seed, t), so the assembled
    matrix is identical for every thread count.
    """
    cfg = spec.config
    if spec.condition_on_connected:
        _connectivity_probe(cfg, spec.master_seed)
    workers = _worker_count(spec.threads, spec.trials)
    indices = list(range(spec.trials))
    if workers == 1:
        chunks = [
            _run_trial_chunk(
                (cfg, spec.alpha_grid, indices, spec.master_seed, spec.condition_on_connected)
            )
        ]
    else:
        step = math.ceil(spec.trials / workers)
        parts = [indices[i : i + step] for i in range(0, spec.trials, step)]
        args = [
            (cfg, spec.alpha_grid, part, spec.master_seed, spec.condition_on_connected)
            for part in parts
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_trial_chunk, args))
    ratios = np.vstack([c[0] for c in chunks])
    rejected = sum(c[1] for c in chunks)
    return ratios, rejected


def estimate_failure_ratio(cfg, trials, master_seed, *, alpha=None, condition_on_connected=False, threads=0):
    """Sample mean and standard error of the failure ratio.

    Returns (mean, stderr, diagnostics). The tolerance defaults to the
    config's.
    """
    alpha = cfg.tolerance if alpha is None else alpha
    spec = SweepSpec(
        config=cfg,
        alpha_grid=(alpha,),
        trials=trials,
        condition_on_connected=condition_on_connected,
        master_seed=master_seed,
        threads=threads,
    )
    ratios, rejected = run_trials(spec)
    col = ratios[:, 0]
    mean = float(col.mean())
    stderr = float(col.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    diagnostics = {
        "trials": trials,
        "disconnected": rejected,
        "rng": RNG_ALGORITHM,
        "master_seed": master_seed,
    }
    return mean, stderr, diagnostics


def sweep(spec):
    """BoundCurve over the spec's tolerance grid."""
    cfg = spec.config
    ratios, rejected = run_trials(spec)
    fbar = ratios.mean(axis=0)
    if spec.trials > 1:
        stderr = ratios.std(axis=0, ddof=1) / math.sqrt(spec.trials)
    else:
        stderr = np.zeros_like(fbar)
    profile = upper.load_profile(cfg)
    ub = np.array([upper.upper_bound(a, cfg, profile=profile) for a in spec.alpha_grid])
    # the lower bound is only defined for tolerances above 1 (and below its
    # validity limit); rows outside that carry applicable=False
    lb_results = [
        lower.lower_bound(a, cfg) if a > 1 else lower.LowerBoundResult(0.0, False)
        for a in spec.alpha_grid
    ]
    metadata = {
        "rng": RNG_ALGORITHM,
        "seed_rule": "splitmix64(master, trial[, attempt])",
        "master_seed": spec.master_seed,
        "trials": spec.trials,
        "condition_on_connected": spec.condition_on_connected,
        "config": {
            "density": cfg.density,
            "conn_radius": cfg.conn_radius,
            "region_diameter": cfg.region_diameter,
            "attack_radius": cfg.attack_radius,
        },
    }
    return BoundCurve(
        alphas=np.asarray(spec.alpha_grid),
        fbar=fbar,
        stderr=stderr,
        upper=ub,
        lower=np.array([r.value for r in lb_results]),
        lower_applicable=np.array([r.applicable for r in lb_results], dtype=bool),
        trials=spec.trials,
        disconnected=rejected,
        metadata=metadata,
    )


@dataclass
class DensitySeries:
    """One BoundCurve per density, plus the shared step threshold."""

    densities: tuple
    curves: list
    alpha_upper: float


def density_series(spec, densities):
    """Sweeps at several densities with fixed geometry.

    Reproduces the sharpening of the failure-ratio transition: the
    tolerance window over which the curve falls shrinks as the density
    grows, closing in on the step threshold.
    """
    from .rgg import NetworkConfig

    curves = []
    for density in densities:
        cfg = NetworkConfig(
            density=density,
            conn_radius=spec.config.conn_radius,
            region_diameter=spec.config.region_diameter,
            attack_radius=spec.config.attack_radius,
            tolerance=spec.config.tolerance,
            seed=spec.config.seed,
        )
        curves.append(
            sweep(
                SweepSpec(
                    config=cfg,
                    alpha_grid=spec.alpha_grid,
                    trials=spec.trials,
                    condition_on_connected=spec.condition_on_connected,
                    master_seed=spec.master_seed,
                    threads=spec.threads,
                )
            )
        )
    return DensitySeries(
        densities=tuple(densities),
        curves=curves,
        alpha_upper=upper.critical_tolerance_upper(spec.config),
    )


@dataclass(frozen=True)
class TransitionStats:
    """Interpolated tolerance values where the curve crosses given levels."""

    high_cross: float  # falls through 0.9
    mid_cross: float  # falls through 0.5
    low_cross: float  # falls through 0.1

    @property
    def width(self):
        return self.low_cross - self.high_cross


def _crossing(alphas, fbar, level):
    hits = [
        i
        for i in range(len(fbar) - 1)
        if fbar[i] >= level > fbar[i + 1]
    ]
    if not hits:
        raise ValueError(f"curve never falls through {level}")
    i = hits[-1]
    frac = (fbar[i] - level) / (fbar[i] - fbar[i + 1])
    return float(alphas[i] + frac * (alphas[i + 1] - alphas[i]))


def transition_stats(curve):
    """Crossing points of the mean-failure-ratio curve at 0.9/0.5/0.1."""
    return TransitionStats(
        high_cross=_crossing(curve.alphas, curve.fbar, 0.9),
        mid_cross=_crossing(curve.alphas, curve.fbar, 0.5),
        low_cross=_crossing(curve.alphas, curve.fbar, 0.1),
    )


def first_round_load_probe(cfg, node_dists, draws, master_seed, halfwidth=0.002):
    """Empirical first-redistribution load moments near given radii.

    For every sampled node whose radius falls within ``halfwidth`` of a
    target, records its received load together with the model prediction
    at its exact radius (share_model="exact"), so no binning bias enters
    the comparison. Returns, per target: dict with the sample count, mean
    received load and its stderr, the matched prediction mean, the sample
    variance and its stderr, and the matched predicted variance.
    """
    grid = np.linspace(cfg.attack_radius, cfg.attack_radius + cfg.conn_radius, 257)
    stats = [upper.load_stats(r, cfg, share_model="exact") for r in grid]
    mean_itp = PchipInterpolator(grid, [s.mean for s in stats])
    var_itp = PchipInterpolator(grid, [s.variance for s in stats])

    received = {t: [] for t in node_dists}
    predicted_mean = {t: [] for t in node_dists}
    predicted_var = {t: [] for t in node_dists}
    for trial in range(draws):
        g = sample_graph(cfg, make_rng(derive_seed(master_seed, trial)))
        attacked = apply_attack(g, cfg.attack_radius)
        rec = first_round_loads(g, attacked)
        radii = g.radii()
        inside = np.zeros(g.node_count, dtype=bool)
        inside[attacked] = True
        for t in node_dists:
            sel = (np.abs(radii - t) < halfwidth) & ~inside
            for i in np.nonzero(sel)[0]:
                received[t].append(rec[i])
                predicted_mean[t].append(float(mean_itp(radii[i])))
                predicted_var[t].append(float(var_itp(radii[i])))
    out = {}
    for t in node_dists:
        x = np.asarray(received[t])
        pm = np.asarray(predicted_mean[t])
        pv = np.asarray(predicted_var[t])
        n = x.size
        dev2 = (x - pm) ** 2
        out[t] = {
            "count": n,
            "mean": float(x.mean()),
            "mean_stderr": float(x.std(ddof=1) / math.sqrt(n)),
            "predicted_mean": float(pm.mean()),
            "variance": float(dev2.mean()),
            "variance_stderr": float(dev2.std(ddof=1) / math.sqrt(n)),
            "predicted_variance": float(pv.mean()),
        }
    return out
