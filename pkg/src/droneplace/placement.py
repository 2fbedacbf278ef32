"""Optimal 3D drone placement by exhaustive candidate-grid search.

Every (x, y, h) grid candidate is scored by the exact selection optimum of
the users it can reach (pathloss within the service threshold); the search
returns the first candidate attaining the maximum objective, scanning
x-major, then y, then h ascending.

The scan prunes candidates whose admissible upper bound (eligible weight
sum, then the fractional-relaxation bound) sits a strict margin below an
already-evaluated candidate's exact objective. Such candidates provably
cannot attain the maximum, so pruning - and any threading of the scan -
never changes the returned result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from threading import Lock

import numpy as np

from .channel import EnvironmentParams, pathloss_db, spectral_efficiency
from .selection import (
    _SEARCH_EPS,
    TIE_EPS,
    SelectionInstance,
    SelectionResult,
    _fractional_fill,
    solve_bnb,
)
from .users import AreaBounds

_CHUNK = 256


@dataclass(frozen=True)
class Placement:
    """One drone position: horizontal coordinates and altitude, meters."""

    x_m: float
    y_m: float
    h_m: float


@dataclass(frozen=True)
class SystemParams:
    """Radio, budget and search-domain parameters of one scenario."""

    carrier_hz: float
    tx_power_w: float  # EIRP
    bandwidth_mhz: float  # spectrum budget B
    backhaul_mbps: float  # wireless backhaul budget R
    pl_max_db: float  # service pathloss threshold
    noise_density_dbm_hz: float
    bounds: AreaBounds
    h_min_m: float
    h_max_m: float
    grid_step_m: float
    noise_figure_db: float = 0.0

    def __post_init__(self):
        if self.carrier_hz <= 0 or self.tx_power_w <= 0:
            raise ValueError("carrier_hz and tx_power_w must be positive")
        if self.bandwidth_mhz <= 0:
            raise ValueError("bandwidth_mhz must be positive")
        if self.backhaul_mbps < 0:
            raise ValueError("backhaul_mbps must be non-negative")
        if self.pl_max_db <= 0:
            raise ValueError("pl_max_db must be positive")
        if not (0 < self.h_min_m <= self.h_max_m):
            raise ValueError("need 0 < h_min_m <= h_max_m")
        if self.grid_step_m <= 0:
            raise ValueError("grid_step_m must be positive")
        if self.noise_figure_db < 0:
            raise ValueError("noise_figure_db must be non-negative")

    @property
    def tx_power_dbm(self) -> float:
        return 10.0 * math.log10(self.tx_power_w * 1000.0)

    @property
    def noise_power_dbm(self) -> float:
        """Noise over the full system bandwidth plus noise figure."""
        return (
            self.noise_density_dbm_hz
            + 10.0 * math.log10(self.bandwidth_mhz * 1e6)
            + self.noise_figure_db
        )


@dataclass(frozen=True)
class PlacementResult:
    """Winning placement plus the exact selection found there."""

    placement: Placement
    selected: tuple[bool, ...]
    served_user_ids: tuple[int, ...]
    objective: float
    rate_used_mbps: float
    bandwidth_used_mhz: float
    candidates_evaluated: int
    solver_nodes: int

    @property
    def served_count(self) -> int:
        return int(sum(self.selected))

    @property
    def sum_rate_mbps(self) -> float:
        """Total required rate of the served users (equals the backhaul draw)."""
        return self.rate_used_mbps


def _axis_points(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive ticks from lo by step; a short final step is clamped to hi."""
    if hi < lo:
        raise ValueError("axis upper end below lower end")
    n = int(math.floor((hi - lo) / step + 1e-9))
    pts = lo + step * np.arange(n + 1)
    if abs(pts[-1] - hi) <= 1e-9 * max(1.0, abs(hi)):
        pts[-1] = hi
    elif pts[-1] < hi:
        pts = np.append(pts, hi)
    return pts


def candidate_grid(sys: SystemParams) -> list[Placement]:
    """All candidate placements, x-major, then y, then h ascending."""
    xs = _axis_points(sys.bounds.x_min_m, sys.bounds.x_max_m, sys.grid_step_m)
    ys = _axis_points(sys.bounds.y_min_m, sys.bounds.y_max_m, sys.grid_step_m)
    hs = _axis_points(sys.h_min_m, sys.h_max_m, sys.grid_step_m)
    return [
        Placement(float(x), float(y), float(h)) for x in xs for y in ys for h in hs
    ]


class PlacementSearch:
    """Grid scan with per-scenario precomputation, reusable across budgets.

    Pathloss depends only on geometry, and per-user bandwidth need only on
    pathloss, so both are computed once per (users, radio params) and shared
    by every backhaul value and weighting of a sweep.
    """

    def __init__(self, users, sys: SystemParams, env: EnvironmentParams):
        self.users = list(users)
        self.sys = sys
        self.env = env
        self.xs = _axis_points(sys.bounds.x_min_m, sys.bounds.x_max_m, sys.grid_step_m)
        self.ys = _axis_points(sys.bounds.y_min_m, sys.bounds.y_max_m, sys.grid_step_m)
        self.hs = _axis_points(sys.h_min_m, sys.h_max_m, sys.grid_step_m)
        self.n_candidates = len(self.xs) * len(self.ys) * len(self.hs)

        n = len(self.users)
        ux = np.array([u.x_m for u in self.users])
        uy = np.array([u.y_m for u in self.users])
        self.rates = np.array([u.rate_mbps for u in self.users])
        # horizontal distance of every (x, y) grid row to every user
        gx = np.repeat(self.xs, len(self.ys))
        gy = np.tile(self.ys, len(self.xs))
        dist = np.hypot(gx[:, None] - ux[None, :], gy[:, None] - uy[None, :])
        self.eligible = []  # per altitude layer: (n_xy, n) bool
        self.bw_need = []  # per altitude layer: (n_xy, n) MHz
        for h in self.hs:
            pl = pathloss_db(dist, float(h), env, sys.carrier_hz)
            zeta = spectral_efficiency(pl, sys)
            with np.errstate(divide="ignore"):
                bw = np.where(zeta > 0, self.rates[None, :] / zeta, np.inf)
            self.eligible.append(pl <= sys.pl_max_db)
            self.bw_need.append(bw)

    def _candidate(self, c: int) -> Placement:
        n_h = len(self.hs)
        n_y = len(self.ys)
        row, lay = divmod(c, n_h)
        ix, iy = divmod(row, n_y)
        return Placement(float(self.xs[ix]), float(self.ys[iy]), float(self.hs[lay]))

    def solve(
        self,
        weights,
        backhaul_mbps: float,
        threads: int = 1,
        warm_value: float | None = None,
    ):
        """Scan the grid; returns (candidate_index, eligible_mask, selection).

        ``warm_value`` may carry any objective known to be attainable (e.g.
        from the previous point of a backhaul sweep); it only tightens
        pruning and cannot change the result.
        """
        w = np.asarray(weights, dtype=float)
        R = float(backhaul_mbps)
        B = self.sys.bandwidth_mhz
        n_h = len(self.hs)
        n_xy = len(self.xs) * len(self.ys)

        # per-layer admissible summaries
        sum_w = np.empty((n_xy, n_h))
        sum_r = np.empty((n_xy, n_h))
        sum_b = np.empty((n_xy, n_h))
        for lay in range(n_h):
            el = self.eligible[lay]
            sum_w[:, lay] = el @ w
            sum_r[:, lay] = el @ self.rates
            sum_b[:, lay] = np.sum(np.where(el, self.bw_need[lay], 0.0), axis=1)
        bound0 = sum_w.reshape(-1)
        all_fit = (
            (sum_r <= R + _SEARCH_EPS) & (sum_b <= B + _SEARCH_EPS)
        ).reshape(-1)

        # Skip thresholds come in two strengths. Within a chunk the scan is
        # sequential, so a candidate whose bound merely TIES the local best
        # can be skipped outright (replacement demands a strict improvement
        # and ties go to the earlier candidate). The warm value and other
        # chunks' results only promise the maximum is attained SOMEWHERE —
        # possibly later in scan order than here — so they may only skip
        # candidates strictly below them, or the first attaining candidate
        # could be lost and the tie rule broken.
        shared = [-math.inf]
        warm = -math.inf if warm_value is None else float(warm_value)
        lock = Lock()

        def scan(lo: int, hi: int):
            best_val = -math.inf
            best: tuple[int, np.ndarray, SelectionResult] | None = None
            for c in range(lo, hi):
                cross = max(warm, shared[0])
                skip_at = max(best_val + 0.5 * TIE_EPS, cross - 0.5 * TIE_EPS)
                if bound0[c] <= skip_at:
                    continue
                row, lay = divmod(c, n_h)
                mask = self.eligible[lay][row]
                if all_fit[c]:
                    inst = SelectionInstance(
                        w[mask], self.rates[mask], self.bw_need[lay][row][mask], R, B
                    )
                    res = _select_all(inst)
                else:
                    bw_row = self.bw_need[lay][row][mask]
                    lp = min(
                        _fractional_fill(w[mask], self.rates[mask], R),
                        _fractional_fill(w[mask], bw_row, B),
                    )
                    if lp <= skip_at:
                        continue
                    res = solve_bnb(
                        SelectionInstance(w[mask], self.rates[mask], bw_row, R, B),
                        prune_below=max(best_val, cross - 2.0 * TIE_EPS),
                    )
                    if res is None:
                        continue
                # require a genuine improvement: subsets at different candidates
                # can sum to the "same" objective with ~1e-13 float noise, and
                # ties must go to the earliest candidate in scan order
                if res.objective > best_val + TIE_EPS:
                    best_val = res.objective
                    best = (c, mask, res)
                    with lock:
                        if best_val > shared[0]:
                            shared[0] = best_val
            return best

        if threads <= 1:
            winners = [scan(0, self.n_candidates)]
        else:
            spans = [
                (lo, min(lo + _CHUNK, self.n_candidates))
                for lo in range(0, self.n_candidates, _CHUNK)
            ]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                winners = list(pool.map(lambda s: scan(*s), spans))

        best = None
        for cand in winners:
            if cand is None:
                continue
            if best is None or cand[2].objective > best[2].objective + TIE_EPS:
                best = cand
        if best is None:
            # only reachable when warm_value overstates what is attainable
            raise ValueError("warm_value exceeded every candidate's objective")
        return best

    def result(self, best, weights, backhaul_mbps: float | None = None) -> PlacementResult:
        """Expand a scan winner into a verified PlacementResult."""
        c, mask, res = best
        R = self.sys.backhaul_mbps if backhaul_mbps is None else float(backhaul_mbps)
        w = np.asarray(weights, dtype=float)
        full = np.zeros(len(self.users), dtype=bool)
        full[np.flatnonzero(mask)[list(res.selected)]] = True
        lay, row = c % len(self.hs), c // len(self.hs)
        out = PlacementResult(
            placement=self._candidate(c),
            selected=tuple(bool(v) for v in full),
            served_user_ids=tuple(self.users[i].id for i in np.flatnonzero(full)),
            objective=float(np.sum(w[full])),
            rate_used_mbps=float(np.sum(self.rates[full])),
            bandwidth_used_mhz=float(np.sum(self.bw_need[lay][row][full])),
            candidates_evaluated=self.n_candidates,
            solver_nodes=res.nodes_explored,
        )
        self._verify(out, R)
        return out

    def _verify(self, out: PlacementResult, backhaul_mbps: float) -> None:
        """Re-check the returned solution against the model from scratch."""
        served = np.array(out.selected)
        if not np.any(served):
            return
        ux = np.array([u.x_m for u in self.users])[served]
        uy = np.array([u.y_m for u in self.users])[served]
        dist = np.hypot(ux - out.placement.x_m, uy - out.placement.y_m)
        pl = pathloss_db(dist, out.placement.h_m, self.env, self.sys.carrier_hz)
        if np.any(pl > self.sys.pl_max_db):
            raise RuntimeError("served user beyond the pathloss threshold")
        if out.rate_used_mbps > backhaul_mbps + 1e-9:
            raise RuntimeError("backhaul budget exceeded")
        if out.bandwidth_used_mhz > self.sys.bandwidth_mhz + 1e-9:
            raise RuntimeError("bandwidth budget exceeded")


def _select_all(inst: SelectionInstance) -> SelectionResult:
    """Every user fits: selecting all of them is the unique optimum."""
    mask = np.ones(inst.n, dtype=bool)
    return SelectionResult(
        selected=tuple(bool(v) for v in mask),
        objective=float(np.sum(inst.weights)),
        rate_used_mbps=float(np.sum(inst.rates_mbps)),
        bandwidth_used_mhz=float(np.sum(inst.bandwidths_mhz)),
        nodes_explored=0,
    )


def evaluate_position(users, placement: Placement, sys: SystemParams, env) -> SelectionResult:
    """Exact selection optimum with the drone fixed at one position.

    Users beyond the pathloss threshold are excluded up front; the returned
    ``selected`` runs over the full user list (excluded users are False).
    """
    users = list(users)
    ux = np.array([u.x_m for u in users])
    uy = np.array([u.y_m for u in users])
    rates = np.array([u.rate_mbps for u in users])
    weights = np.array([u.weight for u in users])
    dist = np.hypot(ux - placement.x_m, uy - placement.y_m)
    pl = pathloss_db(dist, placement.h_m, env, sys.carrier_hz)
    zeta = spectral_efficiency(pl, sys)
    with np.errstate(divide="ignore"):
        bw = np.where(zeta > 0, rates / zeta, np.inf)
    mask = pl <= sys.pl_max_db
    inst = SelectionInstance(
        weights[mask], rates[mask], bw[mask], sys.backhaul_mbps, sys.bandwidth_mhz
    )
    if (
        np.sum(inst.rates_mbps) <= sys.backhaul_mbps + _SEARCH_EPS
        and np.sum(inst.bandwidths_mhz) <= sys.bandwidth_mhz + _SEARCH_EPS
    ):
        res = _select_all(inst)
    else:
        res = solve_bnb(inst)
    full = np.zeros(len(users), dtype=bool)
    full[np.flatnonzero(mask)[list(res.selected)]] = True
    return SelectionResult(
        selected=tuple(bool(v) for v in full),
        objective=float(np.sum(weights[full])),
        rate_used_mbps=float(np.sum(rates[full])),
        bandwidth_used_mhz=float(np.sum(bw[full])),
        nodes_explored=res.nodes_explored,
    )


def optimal_placement(
    users, sys: SystemParams, env: EnvironmentParams, threads: int = 1
) -> PlacementResult:
    """Best placement over the whole candidate grid.

    Deterministic: the first candidate (in grid order) attaining the maximum
    objective wins, independent of ``threads``.
    """
    search = PlacementSearch(users, sys, env)
    weights = [u.weight for u in users]
    best = search.solve(weights, sys.backhaul_mbps, threads=threads)
    return search.result(best, weights)
