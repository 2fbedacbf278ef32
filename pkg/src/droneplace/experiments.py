"""Monte-Carlo experiment drivers: rate CDFs, backhaul sweeps, robustness.

Each driver runs the full placement pipeline over a list of seeds and
returns an ExperimentReport holding the raw per-seed values (long-format
CSV) plus deterministic metadata for the JSON sidecar. Reports are
byte-identical across thread counts and reruns; anything non-deterministic
(wall clock) stays on the console.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .channel import EnvironmentParams, pathloss_db, spectral_efficiency
from .placement import PlacementResult, PlacementSearch, SystemParams
from .users import ClusterConfig, assign_weights, displace_users, sample_population

MODES = ("network_centric", "user_centric")


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class SweepSpec:
    """Backhaul capacity sweep: which R values, seeds and weighting to run."""

    backhaul_values_mbps: tuple[float, ...]
    seeds: tuple[int, ...]
    mode: str = "network_centric"

    def __post_init__(self):
        _check_mode(self.mode)
        if not self.backhaul_values_mbps or not self.seeds:
            raise ValueError("sweep needs at least one backhaul value and one seed")
        if any(
            b <= a for a, b in zip(self.backhaul_values_mbps, self.backhaul_values_mbps[1:])
        ):
            raise ValueError("backhaul_values_mbps must be strictly increasing")


@dataclass(frozen=True)
class RobustnessSpec:
    """Displacement robustness: move users, keep the plan, count the fallout."""

    displacement_values_m: tuple[float, ...]
    seeds: tuple[int, ...]
    mode: str = "network_centric"

    def __post_init__(self):
        _check_mode(self.mode)
        if not self.displacement_values_m or not self.seeds:
            raise ValueError("robustness needs at least one displacement and one seed")
        if any(d < 0 for d in self.displacement_values_m):
            raise ValueError("displacements must be non-negative")
        if any(
            b <= a for a, b in zip(self.displacement_values_m, self.displacement_values_m[1:])
        ):
            raise ValueError("displacement_values_m must be strictly increasing")


@dataclass
class ExperimentReport:
    """Raw per-seed experiment values plus aggregation helpers.

    ``metrics[name]`` is an (n_seeds, n_points) array aligned with ``seeds``
    and ``x_values``. ``std`` is the population standard deviation (ddof=0).
    """

    x_name: str
    x_values: list[float]
    seeds: list[int]
    metrics: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def mean(self, metric: str) -> np.ndarray:
        return self.metrics[metric].mean(axis=0)

    def std(self, metric: str) -> np.ndarray:
        return self.metrics[metric].std(axis=0)


# =====================================================================
# Rate CDF
# =====================================================================


def rate_cdf(result: PlacementResult, users, rate_set_mbps) -> list[float]:
    """Fraction of served users with required rate <= each value of the set.

    Evaluated at the rate-set points in the order given; reaches 1 at the
    largest rate present. Errors on an empty served set.
    """
    served = np.array([u.rate_mbps for u, s in zip(users, result.selected) if s])
    if len(served) == 0:
        raise ValueError("no served users; CDF undefined")
    return [float(np.mean(served <= rho)) for rho in rate_set_mbps]


def rate_cdf_from_rates(served_rates, rate_set_mbps) -> list[float]:
    """CDF over an explicit pool of served rates (multi-seed aggregation)."""
    rates = np.asarray(served_rates, dtype=float)
    if len(rates) == 0:
        raise ValueError("no served users; CDF undefined")
    return [float(np.mean(rates <= rho)) for rho in rate_set_mbps]


# =====================================================================
# Drivers
# =====================================================================


def _population(sys: SystemParams, cluster: ClusterConfig, rate_set_mbps, seed, mode):
    sample = sample_population(sys.bounds, cluster, rate_set_mbps, seed)
    return assign_weights(sample.users, mode), sample.resamples


def backhaul_sweep(
    spec: SweepSpec,
    sys: SystemParams,
    env: EnvironmentParams,
    cluster: ClusterConfig,
    rate_set_mbps,
    threads: int = 1,
) -> ExperimentReport:
    """Optimal placement per seed at every backhaul capacity value.

    The per-scenario geometry is precomputed once per seed and shared across
    R values; ascending R values warm-start each other's pruning (objective
    is monotone in R, so the previous optimum is always attainable).
    """
    n_x = len(spec.backhaul_values_mbps)
    metrics = {
        name: np.zeros((len(spec.seeds), n_x))
        for name in ("served_count", "objective", "rate_used_mbps", "bandwidth_used_mhz")
    }
    resamples = []
    for si, seed in enumerate(spec.seeds):
        users, n_resamples = _population(sys, cluster, rate_set_mbps, seed, spec.mode)
        resamples.append(n_resamples)
        weights = [u.weight for u in users]
        search = PlacementSearch(users, sys, env)
        warm = None
        for xi in range(n_x):  # values are strictly increasing, so warm is valid
            r_cap = float(spec.backhaul_values_mbps[xi])
            best = search.solve(weights, r_cap, threads=threads, warm_value=warm)
            res = search.result(best, weights, backhaul_mbps=r_cap)
            warm = res.objective
            metrics["served_count"][si, xi] = res.served_count
            metrics["objective"][si, xi] = res.objective
            metrics["rate_used_mbps"][si, xi] = res.rate_used_mbps
            metrics["bandwidth_used_mhz"][si, xi] = res.bandwidth_used_mhz
    return ExperimentReport(
        x_name="backhaul_mbps",
        x_values=[float(v) for v in spec.backhaul_values_mbps],
        seeds=list(spec.seeds),
        metrics=metrics,
        metadata={"mode": spec.mode, "resamples": resamples},
    )


def _displacement_seed(seed: int, point_index: int) -> int:
    # documented derivation so every (seed, delta) pair is reproducible
    return int(np.random.SeedSequence([seed, 1000 + point_index]).generate_state(1)[0])


def robustness_eval(
    spec: RobustnessSpec,
    sys: SystemParams,
    env: EnvironmentParams,
    cluster: ClusterConfig,
    rate_set_mbps,
    threads: int = 1,
) -> ExperimentReport:
    """Displace users after placement; the drone and its plan stay fixed.

    Per displacement distance: users served by the unperturbed optimum that
    now exceed the pathloss threshold are dropped; the survivors' bandwidth
    needs are recomputed at their new positions and, if the spectrum budget
    is violated, the largest consumers are dropped until it holds again
    (counted separately as resource drops). Dropped plus remaining equals the
    original served count exactly.
    """
    n_x = len(spec.displacement_values_m)
    names = ("remaining_served", "dropped_pct", "dropped_pathloss", "dropped_resource")
    metrics = {name: np.zeros((len(spec.seeds), n_x)) for name in names}
    resamples = []
    for si, seed in enumerate(spec.seeds):
        users, n_resamples = _population(sys, cluster, rate_set_mbps, seed, spec.mode)
        resamples.append(n_resamples)
        base = PlacementSearch(users, sys, env)
        weights = [u.weight for u in users]
        result = base.result(base.solve(weights, sys.backhaul_mbps, threads=threads), weights)
        served_idx = np.flatnonzero(np.array(result.selected))
        n_served = len(served_idx)
        if n_served == 0:
            raise RuntimeError("optimal placement served no users; robustness undefined")
        for xi, delta in enumerate(spec.displacement_values_m):
            if delta == 0:
                moved = users
            else:
                moved = displace_users(users, float(delta), _displacement_seed(seed, xi))
            mx = np.array([moved[i].x_m for i in served_idx])
            my = np.array([moved[i].y_m for i in served_idx])
            dist = np.hypot(mx - result.placement.x_m, my - result.placement.y_m)
            pl = pathloss_db(dist, result.placement.h_m, env, sys.carrier_hz)
            keep = pl <= sys.pl_max_db
            dropped_pl = int(np.sum(~keep))
            # survivors' bandwidth re-check at the new positions
            rates = np.array([moved[i].rate_mbps for i in served_idx])
            zeta = spectral_efficiency(pl, sys)
            with np.errstate(divide="ignore"):
                bw = np.where(zeta > 0, rates / zeta, np.inf)
            dropped_res = 0
            bw_alive = np.where(keep, bw, 0.0)
            while np.sum(bw_alive) > sys.bandwidth_mhz + 1e-9:
                worst = int(np.argmax(bw_alive))
                bw_alive[worst] = 0.0
                keep[worst] = False
                dropped_res += 1
            remaining = int(np.sum(keep))
            assert remaining + dropped_pl + dropped_res == n_served
            metrics["remaining_served"][si, xi] = remaining
            metrics["dropped_pct"][si, xi] = 100.0 * (n_served - remaining) / n_served
            metrics["dropped_pathloss"][si, xi] = dropped_pl
            metrics["dropped_resource"][si, xi] = dropped_res
    return ExperimentReport(
        x_name="displacement_m",
        x_values=[float(v) for v in spec.displacement_values_m],
        seeds=list(spec.seeds),
        metrics=metrics,
        metadata={"mode": spec.mode, "resamples": resamples},
    )


# =====================================================================
# Emission
# =====================================================================


def write_report_csv(report: ExperimentReport, path) -> None:
    """Long-format CSV: seed,x_value,metric,value (floats via repr)."""
    with open(path, "w", newline="") as f:
        f.write("seed,x_value,metric,value\n")
        for si, seed in enumerate(report.seeds):
            for xi, x in enumerate(report.x_values):
                for name, values in report.metrics.items():
                    f.write(f"{seed},{x!r},{name},{float(values[si, xi])!r}\n")


def write_report_metadata(report: ExperimentReport, path, extra: dict | None = None) -> None:
    """Deterministic JSON sidecar: config echo, seeds, per-point summaries."""
    doc = {
        "x_name": report.x_name,
        "x_values": report.x_values,
        "seeds": report.seeds,
        "summary": {
            name: {
                "mean": [float(v) for v in report.mean(name)],
                "std": [float(v) for v in report.std(name)],
            }
            for name in sorted(report.metrics)
        },
        **report.metadata,
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
