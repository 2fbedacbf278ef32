"""Exact user selection under backhaul and bandwidth budgets.

Given per-user weights, required rates and required bandwidths, pick the
0/1 subset maximizing total weight subject to two knapsack constraints
(sum of rates <= backhaul capacity, sum of bandwidths <= spectrum). Solved
exactly by depth-first branch and bound; a full-enumeration solver is kept
alongside as an independent oracle for tests.

Quantities are expected in Mbps / MHz so magnitudes sit near 1 and the
absolute tolerances below behave uniformly.

Determinism and ties
--------------------
Objectives within TIE_EPS are treated as ties, broken toward the
lexicographically preferred indicator vector: scanning user indices
ascending, inclusion wins at the first difference. The branch-and-bound
visits complete solutions exactly in that preference order (index-order
branching, include-before-exclude), so its first incumbent at the optimal
value is the tie-break winner and tie subtrees can be pruned. The oracle
applies the same rule explicitly. Agreement of the two solvers assumes
genuine objective gaps are large against TIE_EPS (weights on a 0.1 grid
give gaps >= ~0.1; TIE_EPS is 1e-9).
"""

from __future__ import annotations

import math
import sys
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

FEAS_EPS = 1e-9  # documented slack on the result invariants
TIE_EPS = 1e-9  # objective values closer than this count as equal
_SEARCH_EPS = FEAS_EPS / 2  # internal feasibility slack; keeps recomputed
# sums (pairwise np.sum vs incremental) inside FEAS_EPS of the caps

BRUTE_FORCE_MAX_USERS = 25


@dataclass
class SelectionInstance:
    """One selection problem: parallel per-user arrays plus the two caps."""

    weights: np.ndarray  # objective weight per user, > 0
    rates_mbps: np.ndarray  # backhaul consumption per user, >= 0
    bandwidths_mhz: np.ndarray  # spectrum consumption per user, >= 0
    backhaul_cap_mbps: float
    bandwidth_cap_mhz: float

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.rates_mbps = np.asarray(self.rates_mbps, dtype=float)
        self.bandwidths_mhz = np.asarray(self.bandwidths_mhz, dtype=float)
        n = len(self.weights)
        if len(self.rates_mbps) != n or len(self.bandwidths_mhz) != n:
            raise ValueError("weights, rates and bandwidths must have equal length")
        if n and not np.all(self.weights > 0):
            raise ValueError("weights must be positive")
        if n and (np.any(self.rates_mbps < 0) or np.any(self.bandwidths_mhz < 0)):
            raise ValueError("rates and bandwidths must be non-negative")
        if self.backhaul_cap_mbps < 0 or self.bandwidth_cap_mhz < 0:
            raise ValueError("capacities must be non-negative")

    @property
    def n(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of one exact solve."""

    selected: tuple[bool, ...]
    objective: float
    rate_used_mbps: float
    bandwidth_used_mhz: float
    nodes_explored: int

    @property
    def served_count(self) -> int:
        return int(sum(self.selected))


def _finalize(inst: SelectionInstance, mask: np.ndarray, nodes: int) -> SelectionResult:
    # canonical recompute: np.sum over ascending indices, identical in both
    # solvers, so equal selections give bitwise-equal reported sums
    mask = np.asarray(mask, dtype=bool)
    return SelectionResult(
        selected=tuple(bool(v) for v in mask),
        objective=float(np.sum(inst.weights[mask])),
        rate_used_mbps=float(np.sum(inst.rates_mbps[mask])),
        bandwidth_used_mhz=float(np.sum(inst.bandwidths_mhz[mask])),
        nodes_explored=nodes,
    )


# =====================================================================
# Brute-force oracle
# =====================================================================


def solve_brute_force(inst: SelectionInstance) -> SelectionResult:
    """Enumerate all subsets; same tie rule as :func:`solve_bnb`.

    Subset sums are built by doubling (each subset accumulates in ascending
    index order, matching the search's incremental sums). Guarded to
    BRUTE_FORCE_MAX_USERS users.
    """
    n = inst.n
    if n > BRUTE_FORCE_MAX_USERS:
        raise ValueError(f"brute force capped at {BRUTE_FORCE_MAX_USERS} users, got {n}")
    obj = np.zeros(1)
    rate = np.zeros(1)
    bw = np.zeros(1)
    for i in range(n):
        obj = np.concatenate([obj, obj + inst.weights[i]])
        rate = np.concatenate([rate, rate + inst.rates_mbps[i]])
        bw = np.concatenate([bw, bw + inst.bandwidths_mhz[i]])
    feasible = (rate <= inst.backhaul_cap_mbps + _SEARCH_EPS) & (
        bw <= inst.bandwidth_cap_mhz + _SEARCH_EPS
    )
    best = np.max(obj[feasible])  # subset 0 is always feasible
    ties = np.flatnonzero(feasible & (obj >= best - TIE_EPS))
    # lexicographic preference = maximize the bit-reversed mask (user 0 most
    # significant, inclusion preferred)
    keys = np.zeros(len(ties), dtype=np.uint64)
    for i in range(n):
        keys |= (((ties.astype(np.uint64) >> np.uint64(i)) & np.uint64(1))) << np.uint64(
            n - 1 - i
        )
    winner = int(ties[int(np.argmax(keys))])
    mask = np.array([(winner >> i) & 1 for i in range(n)], dtype=bool)
    return _finalize(inst, mask, nodes=2**n)


# =====================================================================
# Fractional-relaxation bounds
# =====================================================================


def _fractional_fill(weights, costs, cap) -> float:
    """Best value of fractionally packing items under one capacity.

    Zero-cost items are taken whole first (infinite ratio). Classic LP
    relaxation of a single-constraint knapsack.
    """
    cap = max(float(cap), 0.0)
    free = costs <= 0
    total = float(np.sum(weights[free]))
    w = weights[~free]
    c = costs[~free]
    if len(w) == 0:
        return total
    order = np.lexsort((np.arange(len(w)), -(w / c)))
    w = w[order]
    c = c[order]
    cum = np.cumsum(c)
    k = int(np.searchsorted(cum, cap + 1e-12, side="right"))
    total += float(np.sum(w[:k]))
    if k < len(w):
        rem = cap - (float(cum[k - 1]) if k else 0.0)
        if rem > 0:
            total += float(w[k]) * rem / float(c[k])
    return total


def upper_bound(inst: SelectionInstance, fixed) -> float:
    """Admissible bound on the best completion of a partial assignment.

    ``fixed`` maps user index -> bool (or is a full-length sequence with None
    for undecided users). The bound is the included weight plus the smaller of
    the two single-constraint fractional-greedy relaxations over the free
    users with the remaining capacities; it never undercuts the best feasible
    completion, and with every variable fixed it returns the exact objective.
    """
    n = inst.n
    state = np.full(n, -1, dtype=int)  # -1 free / 0 out / 1 in
    if isinstance(fixed, dict):
        for i, v in fixed.items():
            state[i] = 1 if v else 0
    else:
        for i, v in enumerate(fixed):
            if v is not None:
                state[i] = 1 if v else 0
    inc = state == 1
    value = float(np.sum(inst.weights[inc]))
    r_rem = inst.backhaul_cap_mbps - float(np.sum(inst.rates_mbps[inc]))
    b_rem = inst.bandwidth_cap_mhz - float(np.sum(inst.bandwidths_mhz[inc]))
    if r_rem < -FEAS_EPS or b_rem < -FEAS_EPS:
        raise ValueError("fixed assignment already violates a capacity")
    free = state == -1
    if not np.any(free):
        return value
    wf = inst.weights[free]
    return value + min(
        _fractional_fill(wf, inst.rates_mbps[free], r_rem),
        _fractional_fill(wf, inst.bandwidths_mhz[free], b_rem),
    )


def _value_grid(weights) -> float | None:
    """Detect whether all weights sit on a coarse value grid (1 or 0.1)."""
    for q in (1.0, 0.1):
        scaled = weights / q
        if np.all(np.abs(scaled - np.round(scaled)) <= 1e-9):
            return q
    return None


class _ReachableSums:
    """Exact subset-sum reachability of grid-valued rates, per suffix.

    When the objective weight of every user equals its rate (the sum-rate
    weighting), the fractional rate bound degenerates to "fill the whole
    remaining capacity" at every node, which prunes nothing whenever the
    optimum is below the cap. With rates on a coarse grid the true maximum
    achievable rate-sum of a suffix is cheap to precompute as bitmask
    subset-sum tables (bit v of ``reach[k]`` = some subset of users k..
    sums to v grid units), giving an exact - hence admissible - rate-side
    bound that replaces the vacuous relaxation.
    """

    MAX_UNITS = 1_000_000

    def __init__(self, units: list[int], cap_units: int):
        full = (1 << (cap_units + 1)) - 1
        m = len(units)
        reach = [0] * (m + 1)
        reach[m] = 1  # empty suffix reaches only 0
        for k in range(m - 1, -1, -1):
            prev = reach[k + 1]
            reach[k] = (prev | (prev << units[k])) & full
        self.reach = reach
        self.cap_units = cap_units

    @classmethod
    def build(cls, rates: np.ndarray, cap: float, grid: float | None):
        if grid is None:
            return None
        cap_units = int((cap + _SEARCH_EPS) / grid)
        if cap_units > cls.MAX_UNITS:
            return None
        units = [int(round(v / grid)) for v in rates]
        return cls(units, cap_units)

    def max_reachable(self, k: int, cap_units: int) -> int:
        """Largest reachable sum (grid units) of suffix k under cap_units."""
        bits = self.reach[k]
        if cap_units < self.cap_units:
            bits &= (1 << (cap_units + 1)) - 1
        return bits.bit_length() - 1


# =====================================================================
# Branch and bound
# =====================================================================


class _SuffixBounds:
    """Per-suffix fractional-greedy tables for one constraint.

    Branching in index order keeps every node's free set a suffix, so the
    greedy order restricted to users k.. can be precomputed once per suffix
    and each node's bound becomes one binary search. The tables are plain
    lists: bound() runs millions of times on hard instances and scalar
    bisect on a list is roughly an order of magnitude cheaper than the
    equivalent numpy searchsorted call.
    """

    def __init__(self, weights, costs):
        m = len(weights)
        self._weights = weights
        self._costs = costs
        ratio = np.where(costs > 0, weights / np.where(costs > 0, costs, 1.0), np.inf)
        self._order = np.lexsort((np.arange(m), -ratio))  # ratio desc, index asc
        # suffix tables materialize on first use: shallow searches (the common
        # case under aggressive root pruning) never pay for the deep levels
        self.cum_c: list = [None] * (m + 1)
        self.cum_w: list = [None] * (m + 1)
        self.item_c: list = [None] * (m + 1)
        self.item_w: list = [None] * (m + 1)

    def _materialize(self, k: int):
        sel = self._order[self._order >= k]
        c = self._costs[sel]
        w = self._weights[sel]
        self.item_c[k] = c.tolist()
        self.item_w[k] = w.tolist()
        self.cum_c[k] = np.cumsum(c).tolist()
        self.cum_w[k] = np.cumsum(w).tolist()
        return self.cum_c[k]

    def bound(self, k: int, cap: float) -> float:
        cum_c = self.cum_c[k]
        if cum_c is None:
            cum_c = self._materialize(k)
        if not cum_c:
            return 0.0
        if cap < 0.0:
            cap = 0.0
        j = bisect_right(cum_c, cap + 1e-12)
        total = self.cum_w[k][j - 1] if j else 0.0
        if j < len(cum_c):
            rem = cap - (cum_c[j - 1] if j else 0.0)
            c_next = self.item_c[k][j]
            if rem > 0 and c_next > 0:
                total += self.item_w[k][j] * rem / c_next
        return total


def _pick_surrogate_mu(w, r, b, R, B) -> float | None:
    """Multiplier for a weighted-sum surrogate constraint, or None.

    For any mu >= 0, feasibility implies sum((r_i + mu*b_i) x_i) <= R + mu*B,
    so the single-constraint fractional bound on that mixed cost is
    admissible; minimized over mu it equals the true two-constraint LP bound.
    The pure rate/bandwidth bounds are the mu -> 0 and mu -> inf limits, so a
    mu is only worth the extra per-node lookup when some interior value beats
    both — which happens exactly in the regime where both budgets bind and
    the pure bounds go slack.
    """
    if R <= 0 or B <= 0 or not math.isfinite(R) or not math.isfinite(B):
        return None
    base = min(_fractional_fill(w, r, R), _fractional_fill(w, b, B))
    best_mu, best_val = None, base - 1e-9
    for k in range(-4, 5):
        mu = (R / B) * 4.0**k
        val = _fractional_fill(w, r + mu * b, R + mu * B)
        if val < best_val:
            best_mu, best_val = mu, val
    return best_mu


def _dual_point(w, c, cap):
    """Lagrangian value G and multiplier t of one single-constraint relaxation.

    t is the critical weight/cost ratio of the fractional fill, the minimizer
    of G(t) = sum(max(0, w_i - t*c_i)) + t*cap; G(t) bounds every feasible
    value, and flipping item i away from the sign of its reduced cost
    w_i - t*c_i lowers the bound by that amount.
    """
    positive = c > 0
    if cap < 0:
        cap = 0.0
    if np.all(~positive):
        return float(np.sum(w)), 0.0
    ratio = w[positive] / c[positive]
    order = np.argsort(-ratio)
    cum = np.cumsum(c[positive][order])
    j = int(np.searchsorted(cum, cap + 1e-12, side="right"))
    t = float(ratio[order[j]]) if j < len(order) else 0.0
    g_val = float(np.sum(np.maximum(0.0, w - t * c))) + t * cap
    return g_val, t


class _FlipBounds:
    """Reduced-cost bounds on selections that flip one item's natural state.

    Evaluates the Lagrangian dual on the pure-rate, pure-bandwidth and mixed
    surrogate rays; from the best point, ``drop_out[i]`` bounds the value of
    every feasible selection excluding item i, and ``drop_in[i]`` of every
    one including it. Any item whose flip bound rounds down to a target
    threshold or below is therefore forced for all selections above that
    threshold — fixing it preserves the full set of such selections,
    including the lexicographically first optimum the search must return.
    """

    def __init__(self, w, r, b, R, B):
        rays = [(r, R), (b, B)]
        if R > 0 and B > 0 and math.isfinite(R) and math.isfinite(B):
            rays += [(r + (R / B) * 4.0**k * b, R + (R / B) * 4.0**k * B) for k in range(-4, 5)]
        best = None
        for cost, cap in rays:
            g_val, t = _dual_point(w, cost, cap)
            if best is None or g_val < best[0]:
                best = (g_val, t, cost)
        g_val, t, cost = best
        rc = w - t * cost
        self.root = g_val
        self.drop_out = g_val - np.maximum(0.0, rc)
        self.drop_in = g_val + np.minimum(0.0, rc)

    def fix(self, threshold: float, q: float | None):
        """(fixed_in, free) masks valid for selections with value > threshold."""
        out_b, in_b = self.drop_out, self.drop_in
        if q:
            out_b = q * np.floor(out_b / q + 1e-9)
            in_b = q * np.floor(in_b / q + 1e-9)
        fixed_in = out_b <= threshold + TIE_EPS
        fixed_out = (in_b <= threshold + TIE_EPS) & ~fixed_in
        return fixed_in, ~(fixed_in | fixed_out)


def _greedy_value(weights, rates, bws, r_cap, b_cap) -> float:
    """Feasible greedy by weight per combined relative cost; warm-start value."""
    denom = rates / max(r_cap, 1e-300) + bws / max(b_cap, 1e-300)
    ratio = np.where(denom > 0, weights / np.where(denom > 0, denom, 1.0), np.inf)
    order = np.lexsort((np.arange(len(weights)), -ratio))
    value = 0.0
    r_rem, b_rem = r_cap, b_cap
    for i in order:
        if rates[i] <= r_rem + _SEARCH_EPS and bws[i] <= b_rem + _SEARCH_EPS:
            value += float(weights[i])
            r_rem -= float(rates[i])
            b_rem -= float(bws[i])
    return value


def solve_bnb(inst: SelectionInstance, prune_below: float = -math.inf) -> SelectionResult | None:
    """Exact maximum-weight selection under both capacity constraints.

    Depth-first branch and bound over users in index order, include branch
    first. Per-node upper bound: the smaller of the two single-constraint
    fractional relaxations over the remaining suffix (plus a mixed surrogate
    and, for sum-rate weights, an exact subset-sum reachability bound),
    floored to the weight grid when one exists.

    The search runs as threshold passes descending from the rounded root
    relaxation to just below the greedy value (an aspiration ladder). A pass
    at threshold t returns the lexicographically-first selection worth more
    than t, or nothing; passes above the optimum terminate almost
    immediately since the root bound itself prunes, while the pass just
    below it enjoys both maximal bound pruning and maximal reduced-cost
    fixing — every item whose flip bound rounds down to t or less is frozen
    before the descent, so only the genuinely ambiguous band is searched.

    ``prune_below`` raises the floor of the ladder: values at or below it
    are of no interest to the caller, and the solve may return None instead
    of a result when nothing clears the floor. The default floor is below
    the greedy value, which is always attainable, so a result is guaranteed.
    """
    n = inst.n
    if n == 0:
        return _finalize(inst, np.zeros(0, dtype=bool), nodes=0)
    R = float(inst.backhaul_cap_mbps)
    B = float(inst.bandwidth_cap_mhz)
    fits = (inst.rates_mbps <= R + _SEARCH_EPS) & (inst.bandwidths_mhz <= B + _SEARCH_EPS)
    idx = np.flatnonzero(fits)  # ascending, so lex order is preserved
    full_mask = np.zeros(n, dtype=bool)
    if len(idx) == 0:
        return _finalize(inst, full_mask, nodes=1)
    w0 = inst.weights[idx]
    r0 = inst.rates_mbps[idx]
    b0 = inst.bandwidths_mhz[idx]

    q = _value_grid(w0)
    grid_floor = (lambda x: q * math.floor(x / q + 1e-9)) if q else (lambda x: x)
    g = _greedy_value(w0, r0, b0, R, B)
    threshold = max(g - (q if q else 1e-6 * max(1.0, abs(g))), prune_below)
    flip = _FlipBounds(w0, r0, b0, R, B)
    if sys.getrecursionlimit() < len(idx) + 1000:
        sys.setrecursionlimit(len(idx) + 1000)  # DFS depth is at most len(idx)
    nodes = 0

    def run_pass(t: float) -> np.ndarray | None:
        """Lex-first selection with value > t over the fitting items, or None."""
        nonlocal nodes
        fixed_in, free = flip.fix(t, q)
        base = float(np.sum(w0[fixed_in]))
        in_r = float(np.sum(r0[fixed_in]))
        in_b = float(np.sum(b0[fixed_in]))
        if in_r > R + _SEARCH_EPS or in_b > B + _SEARCH_EPS:
            # Every feasible selection worth more than t must contain the
            # whole forced set; if that set already violates a cap, no such
            # selection exists. Reachable when t is above the true optimum:
            # the per-item certificates are then vacuously true and fixing
            # may force a mutually infeasible set.
            return None
        w, r, b = w0[free], r0[free], b0[free]
        free_idx = np.flatnonzero(free)
        m = len(w)
        if m == 0:
            # everything forced: the lone candidate wins iff it clears t
            return fixed_in if base > t + TIE_EPS else None
        Rp = max(R - in_r, 0.0)
        Bp = max(B - in_b, 0.0)

        rate_bounds = _SuffixBounds(w, r)
        bw_bounds = _SuffixBounds(w, b)
        # sum-rate weighting: swap in the exact grid-reachability rate bound
        reach = _ReachableSums.build(r, Rp, _value_grid(r)) if np.array_equal(w, r) else None
        rate_grid = _value_grid(r) if reach is not None else None
        surr_mu = _pick_surrogate_mu(w, r, b, Rp, Bp)
        surr_bounds = _SuffixBounds(w, r + surr_mu * b) if surr_mu is not None else None
        # scalars touched every node live in plain lists / bound methods;
        # numpy element access is several times costlier at this grain
        suffix_rate_sum = np.concatenate([np.cumsum(r[::-1])[::-1], [0.0]]).tolist()
        suffix_bw_sum = np.concatenate([np.cumsum(b[::-1])[::-1], [0.0]]).tolist()
        suffix_w_sum = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]]).tolist()
        w_l, r_l, b_l = w.tolist(), r.tolist(), b.tolist()
        rate_bound = rate_bounds.bound
        bw_bound = bw_bounds.bound
        surr_bound = surr_bounds.bound if surr_bounds is not None else None

        def prune_cut(v: float) -> float:
            # subtrees with ub < cut cannot beat incumbent v:
            # ub < cut  <=>  grid_floor(ub) <= v + TIE_EPS
            if q:
                return q * (math.floor((v + TIE_EPS) / q) + 1.0 - 1e-9)
            return v + TIE_EPS

        best_val = t - base
        best_sel: np.ndarray | None = None
        cut = prune_cut(best_val)
        cur = np.zeros(m, dtype=bool)

        def consider(value: float, sel: np.ndarray) -> None:
            nonlocal best_val, best_sel, cut
            if value > best_val + TIE_EPS:
                best_val = value
                best_sel = sel
                cut = prune_cut(best_val)

        def dfs(k: int, r_rem: float, b_rem: float, value: float) -> None:
            nonlocal nodes
            nodes += 1
            if suffix_rate_sum[k] <= r_rem + _SEARCH_EPS and suffix_bw_sum[k] <= b_rem + _SEARCH_EPS:
                # whole suffix fits: taking all of it is both value- and lex-optimal
                sel = cur.copy()
                sel[k:] = True
                consider(value + suffix_w_sum[k], sel)
                return
            if reach is not None:
                ru = int((r_rem + _SEARCH_EPS) / rate_grid)
                rate_ub = rate_grid * reach.max_reachable(k, ru)
            else:
                rate_ub = rate_bound(k, r_rem)
            ub = value + min(rate_ub, bw_bound(k, b_rem))
            if ub < cut:
                return
            if surr_bound is not None:
                # only consulted when the cheap pure bounds failed to prune
                mixed = value + surr_bound(k, r_rem + surr_mu * b_rem)
                if mixed < ub:
                    ub = mixed
                if ub < cut:
                    return
            rk, bk = r_l[k], b_l[k]
            if rk <= r_rem + _SEARCH_EPS and bk <= b_rem + _SEARCH_EPS:
                cur[k] = True
                dfs(k + 1, r_rem - rk, b_rem - bk, value + w_l[k])
                cur[k] = False
            dfs(k + 1, r_rem, b_rem, value)

        dfs(0, Rp, Bp, 0.0)
        if best_sel is None:
            return None
        out = fixed_in.copy()
        out[free_idx[best_sel]] = True
        return out

    ladder: list[float] = []
    if q:
        t = grid_floor(flip.root) - q
        while len(ladder) < 3 and t > threshold + TIE_EPS:
            ladder.append(t)
            t -= q
    ladder.append(threshold)  # the safe rung: the greedy value is attainable
    sel_mask = None
    for t in ladder:
        sel_mask = run_pass(t)
        if sel_mask is not None:
            break

    if sel_mask is None:
        # only reachable with a raised floor: the default threshold sits
        # strictly below the feasible greedy value, which the search finds
        assert prune_below > -math.inf
        return None
    full_mask[idx[sel_mask]] = True
    return _finalize(inst, full_mask, nodes=nodes)
