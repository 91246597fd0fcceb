"""Per-snapshot 3D placement: candidate lattice, exact MILP (selection,
assignment, altitudes, linearized loss), a best-first branch-and-bound solver
over the LP relaxation, and bisection for the minimum fleet size.

The MILP instance holds every constraint family of the model exactly once;
the solver presolves aggressively (arc elimination, redundant-row drops,
product-term substitution) in ways that provably preserve the optimal value,
and an independent validator re-checks solutions against the raw families.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .channel import Environment, elevation_angle, mean_path_loss, taylor_gate
from .geometry import Point3, distance3
from .scenario import FleetParams, Region, User


@dataclass(frozen=True)
class CandidateSet:
    """Horizontal candidate points (meters), pairwise distinct, inside the region."""

    points: tuple[tuple[float, float], ...]
    ids: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(-1, 2)


def generate_candidates(region: Region, spacing: float) -> CandidateSet:
    """Hexagonal lattice over the region, centered so edge margins stay below
    half a pitch; deterministic for fixed inputs. Returns at least one point.
    """
    if spacing <= 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    w, h = region.width, region.height
    dy = spacing * math.sqrt(3.0) / 2.0
    n_rows = max(1, math.ceil(h / dy))
    y0 = (h - (n_rows - 1) * dy) / 2.0
    pts: list[tuple[float, float]] = []
    for j in range(n_rows):
        shift = spacing / 2.0 if j % 2 else 0.0
        span = w - shift
        n_cols = max(1, math.ceil(span / spacing))
        x0 = (span - (n_cols - 1) * spacing) / 2.0 + shift
        for k in range(n_cols):
            x = x0 + k * spacing
            y = y0 + j * dy
            if region.contains(x, y):
                pts.append((float(x), float(y)))
    if not pts:
        pts = [(w / 2.0, h / 2.0)]
    return CandidateSet(points=tuple(pts), ids=tuple(range(len(pts))))


@dataclass(frozen=True)
class Snapshot:
    """User population at one instant plus the derived candidate points."""

    index: int
    users: tuple[User, ...]
    candidates: CandidateSet


# -- instance ---------------------------------------------------------------


@dataclass
class PlacementMilp:
    """Structured MILP instance: one variable block per (candidate, user) pair.

    Families carried (indices i over candidates, j over users):
      objective     min sum k_ij
      assign-once   sum_i x_ij <= 1
      channels      sum_j x_ij <= psi
      open-link     x_ij <= m_i
      full-cover    sum_ij x_ij = U
      backhaul      sum_j D_j x_ij <= beta m_i
      fleet-size    sum_i m_i = P
      alt-band      h_i <= Hmax m_i ;  h_i >= Hmin m_i
      cone          cot(theta) d_ij x_ij <= h_i
      loss-line     k_ij >= c1_ij x_ij + c2 t_ij  (Taylor, linear domain)
      loss-switch   k_ij <= M_obj x_ij
      gate          x_ij (M_alt - a_ij + 1/2) <= M_alt - h_i
      product       t_ij <= h_i ; t_ij <= Hmax x_ij ; t_ij >= h_i - (1-x_ij) Hmax
    """

    candidates: CandidateSet
    users: tuple[User, ...]
    P: int
    env: Environment
    params: FleetParams
    dist: np.ndarray            # (I, U) horizontal distances
    cone_alt: np.ndarray        # (I, U) minimum altitude when serving
    gate_alt: np.ndarray        # (I, U) altitude gate a_ij
    taylor_const: np.ndarray    # (I, U) c1_ij
    taylor_slope: float         # c2 (shared)
    demands: np.ndarray         # (U,)
    big_m_obj: float
    big_m_alt: float

    @property
    def n_candidates(self) -> int:
        return len(self.candidates)

    @property
    def n_users(self) -> int:
        return len(self.users)

    def n_binary_x(self) -> int:
        return self.n_candidates * self.n_users

    def n_binary_m(self) -> int:
        return self.n_candidates

    def n_continuous_h(self) -> int:
        return self.n_candidates

    def pair_serveable(self) -> np.ndarray:
        """Pairs that any feasible solution could use: cone reachable below the
        altitude ceiling and below the loss gate."""
        return (self.cone_alt <= self.params.h_max) & (
            self.cone_alt < self.gate_alt - 0.5
        ) & (self.gate_alt - 0.5 > self.params.h_min)

    def to_lp_text(self) -> str:
        """The full model in LP interchange text (developer tooling)."""
        I, U = self.n_candidates, self.n_users
        hm, hx = self.params.h_min, self.params.h_max
        lines = ["Minimize", " obj: " + " + ".join(f"k_{i}_{j}" for i in range(I) for j in range(U))]
        lines.append("Subject To")
        for j in range(U):
            lines.append(f" assign_{j}: " + " + ".join(f"x_{i}_{j}" for i in range(I)) + " <= 1")
        for i in range(I):
            lines.append(f" chan_{i}: " + " + ".join(f"x_{i}_{j}" for j in range(U)) + f" <= {self.params.psi_fbs}")
        for i in range(I):
            for j in range(U):
                lines.append(f" open_{i}_{j}: x_{i}_{j} - m_{i} <= 0")
        lines.append(" cover: " + " + ".join(f"x_{i}_{j}" for i in range(I) for j in range(U)) + f" = {U}")
        for i in range(I):
            terms = " + ".join(f"{self.demands[j]:.9g} x_{i}_{j}" for j in range(U))
            lines.append(f" backhaul_{i}: {terms} - {self.params.backhaul_mbps:.9g} m_{i} <= 0")
        lines.append(" fleet: " + " + ".join(f"m_{i}" for i in range(I)) + f" = {self.P}")
        for i in range(I):
            lines.append(f" hmax_{i}: h_{i} - {hx:.9g} m_{i} <= 0")
            lines.append(f" hmin_{i}: {hm:.9g} m_{i} - h_{i} <= 0")
        for i in range(I):
            for j in range(U):
                lines.append(f" cone_{i}_{j}: {self.cone_alt[i, j]:.9g} x_{i}_{j} - h_{i} <= 0")
                c1 = self.taylor_const[i, j]
                lines.append(
                    f" loss_{i}_{j}: {c1:.9g} x_{i}_{j} + {self.taylor_slope:.9g} t_{i}_{j} - k_{i}_{j} <= 0"
                )
                lines.append(f" kswitch_{i}_{j}: k_{i}_{j} - {self.big_m_obj:.9g} x_{i}_{j} <= 0")
                gate_coef = self.big_m_alt - self.gate_alt[i, j] + 0.5
                lines.append(
                    f" gate_{i}_{j}: {gate_coef:.9g} x_{i}_{j} + h_{i} <= {self.big_m_alt:.9g}"
                )
                lines.append(f" tub1_{i}_{j}: t_{i}_{j} - h_{i} <= 0")
                lines.append(f" tub2_{i}_{j}: t_{i}_{j} - {hx:.9g} x_{i}_{j} <= 0")
                lines.append(
                    f" tlb_{i}_{j}: h_{i} - t_{i}_{j} + {hx:.9g} x_{i}_{j} <= {hx:.9g}"
                )
        lines.append("Bounds")
        for i in range(I):
            lines.append(f" 0 <= h_{i} <= {hx:.9g}")
        for i in range(I):
            for j in range(U):
                lines.append(f" 0 <= t_{i}_{j} <= {hx:.9g}")
                lines.append(f" k_{i}_{j} >= 0")
        lines.append("Binaries")
        lines.append(" " + " ".join(f"x_{i}_{j}" for i in range(I) for j in range(U)))
        lines.append(" " + " ".join(f"m_{i}" for i in range(I)))
        lines.append("End")
        return "\n".join(lines)


def build_milp(
    snapshot: Snapshot,
    candidates: CandidateSet,
    P: int,
    env: Environment,
    params: FleetParams,
) -> PlacementMilp:
    """Assemble the full placement instance for fleet size P."""
    if P < 1:
        raise ValueError("P must be >= 1")
    if len(candidates) == 0:
        raise ValueError("candidate set must be non-empty")
    cands = candidates.as_array()
    users = snapshot.users
    U = len(users)
    ux = np.array([u.pos.x for u in users])
    uy = np.array([u.pos.y for u in users])
    demands = np.array([u.demand for u in users])

    dist = np.hypot(cands[:, 0:1] - ux[None, :], cands[:, 1:2] - uy[None, :])
    cone_alt = params.cot_theta * dist
    h0 = params.h0
    a_coef = env.fspl_coeff
    with np.errstate(invalid="ignore"):
        gate_alt = (env.pl_max_linear - a_coef * (dist ** 2 - h0 ** 2)) / (2.0 * a_coef * h0)
    taylor_const = a_coef * (dist ** 2 - h0 ** 2)
    taylor_slope = 2.0 * a_coef * h0

    diag = math.hypot(
        max(np.max(ux, initial=0.0), np.max(cands[:, 0])),
        max(np.max(uy, initial=0.0), np.max(cands[:, 1])),
    )
    k_max = a_coef * (diag ** 2 - h0 ** 2) + taylor_slope * params.h_max
    big_m_obj = 10.0 * max(k_max, 1.0)
    big_m_alt = 10.0 * max(params.h_max, float(np.max(gate_alt, initial=1.0)))

    return PlacementMilp(
        candidates=candidates,
        users=users,
        P=P,
        env=env,
        params=params,
        dist=dist,
        cone_alt=cone_alt,
        gate_alt=gate_alt,
        taylor_const=taylor_const,
        taylor_slope=taylor_slope,
        demands=demands,
        big_m_obj=big_m_obj,
        big_m_alt=big_m_alt,
    )


# -- outcomes ----------------------------------------------------------------


@dataclass(frozen=True)
class PlacementSolution:
    selected: tuple[tuple[int, float], ...]   # (candidate id, altitude)
    assignment: dict[int, int]                # user id -> candidate id
    path_loss: dict[int, float]               # user id -> exact mean loss (dB)
    objective: float                          # sum of linearized k_ij


@dataclass(frozen=True)
class Infeasible:
    reason: str = ""


@dataclass(frozen=True)
class TimedOut:
    incumbent: PlacementSolution | None = None


class NoFeasibleFleet(Exception):
    """No fleet size up to the candidate count can serve the snapshot."""


# -- solver ------------------------------------------------------------------


def _exact_objective(milp: PlacementMilp, open_set, assign):
    """Exact objective and altitudes for an integral (m, x): per-candidate the
    altitude floor is the largest cone bound, the loss line clamps at zero."""
    hmin, hmax = milp.params.h_min, milp.params.h_max
    alts = {}
    total = 0.0
    for i in open_set:
        served = [j for j, ci in assign.items() if ci == i]
        h = hmin
        if served:
            h = max(h, max(milp.cone_alt[i, j] for j in served))
        if h > hmax + 1e-9:
            return None, None
        for j in served:
            if h >= milp.gate_alt[i, j] - 0.5 - 1e-9:
                return None, None
        alts[i] = h
        for j in served:
            total += max(0.0, milp.taylor_const[i, j] + milp.taylor_slope * h)
    return total, alts


def _greedy_integer(milp: PlacementMilp, serveable, forced_zero=None, forced_one=None):
    """Greedy cover + capacity-aware assignment; returns (assign, open list) or None.

    Deterministic; used both for incumbents and for warm-start bases.
    """
    I, U = milp.n_candidates, milp.n_users
    psi, beta = milp.params.psi_fbs, milp.params.backhaul_mbps
    P = milp.P
    allowed = serveable.copy()
    if forced_zero:
        for (i, j) in forced_zero:
            allowed[i, j] = False
    pinned: dict[int, int] = {}
    if forced_one:
        for (i, j) in forced_one:
            pinned[j] = i

    open_c: list[int] = []
    load_n = np.zeros(I, dtype=int)
    load_d = np.zeros(I)
    assign: dict[int, int] = {}

    def try_serve(j, i):
        if load_n[i] < psi and load_d[i] + milp.demands[j] <= beta + 1e-9:
            assign[j] = i
            load_n[i] += 1
            load_d[i] += milp.demands[j]
            return True
        return False

    # pinned users first: their candidates must open
    for j, i in sorted(pinned.items()):
        if not allowed[i, j]:
            return None
        if i not in open_c:
            if len(open_c) >= P:
                return None
            open_c.append(i)
        if not try_serve(j, i):
            return None

    unassigned = [j for j in range(U) if j not in assign]
    while unassigned:
        # reuse open candidates greedily before opening new ones
        progressed = False
        for j in list(unassigned):
            options = [i for i in open_c if allowed[i, j]]
            if options:
                options.sort(key=lambda i: milp.dist[i, j])
                for i in options:
                    if try_serve(j, i):
                        unassigned.remove(j)
                        progressed = True
                        break
        if not unassigned:
            break
        if len(open_c) >= P:
            if not progressed:
                return None
            continue
        # open the candidate that can absorb the most unassigned users
        best_i, best_gain = -1, 0
        for i in range(I):
            if i in open_c:
                continue
            gain = sum(1 for j in unassigned if allowed[i, j])
            if gain > best_gain:
                best_gain, best_i = gain, i
        if best_i < 0:
            return None
        open_c.append(best_i)

    for i in range(I):
        if len(open_c) >= P:
            break
        if i not in open_c:
            open_c.append(i)
    if len(open_c) != P:
        return None
    return assign, sorted(open_c)


class _LpRelaxation:
    """Reduced LP relaxation over the serveable pairs with fixings applied.

    Reductions preserve the relaxation's optimal value: the product-term upper
    rows and the loss switch row never bind when the objective is minimized,
    and the lower product row substitutes the auxiliary variable away.
    """

    def __init__(self, milp: PlacementMilp, serveable: np.ndarray, fix: dict):
        self.milp = milp
        p = milp.params
        I, U = milp.n_candidates, milp.n_users
        self.fixed_one = {pq for pq, v in fix.items() if v == 1}
        self.fixed_zero = {pq for pq, v in fix.items() if v == 0}

        pairs = []
        for i in range(I):
            for j in range(U):
                if serveable[i, j] and (i, j) not in self.fixed_zero:
                    pairs.append((i, j))
        self.pairs = pairs
        self.pair_idx = {pq: p_ for p_, pq in enumerate(pairs)}
        np_ = len(pairs)
        self.n_pairs = np_
        # columns: x (np_), k (np_), m (I), h (I)
        self.X0, self.K0 = 0, np_
        self.M0, self.H0 = 2 * np_, 2 * np_ + I
        self.n_cols = 2 * np_ + 2 * I

        rows: list[list[tuple[int, float]]] = []
        rhs: list[float] = []
        senses: list[int] = []

        def add(entries, b, sense=1):
            rows.append(entries)
            rhs.append(b)
            senses.append(sense)

        user_pairs: list[list[int]] = [[] for _ in range(U)]
        cand_pairs: list[list[int]] = [[] for _ in range(I)]
        for p_, (i, j) in enumerate(pairs):
            user_pairs[j].append(p_)
            cand_pairs[i].append(p_)
        self.user_pairs = user_pairs
        self.cand_pairs = cand_pairs

        for j in range(U):
            if user_pairs[j]:
                add([(self.X0 + p_, 1.0) for p_ in user_pairs[j]], 1.0)
        for i in range(I):
            if len(cand_pairs[i]) > p.psi_fbs:
                add([(self.X0 + p_, 1.0) for p_ in cand_pairs[i]], float(p.psi_fbs))
            entries = [(self.X0 + p_, float(milp.demands[pairs[p_][1]])) for p_ in cand_pairs[i]]
            add(entries + [(self.M0 + i, -p.backhaul_mbps)], 0.0)
            add([(self.H0 + i, 1.0), (self.M0 + i, -p.h_max)], 0.0)
            add([(self.M0 + i, p.h_min), (self.H0 + i, -1.0)], 0.0)
        self.cone_row: dict[int, int] = {}
        self.krow: dict[int, int] = {}
        c2 = milp.taylor_slope
        for p_, (i, j) in enumerate(pairs):
            add([(self.X0 + p_, 1.0), (self.M0 + i, -1.0)], 0.0)
            cone = milp.cone_alt[i, j]
            if cone > p.h_min:
                self.cone_row[p_] = len(rows)
                add([(self.X0 + p_, cone), (self.H0 + i, -1.0)], 0.0)
            gate = milp.gate_alt[i, j]
            if gate - 0.5 < p.h_max:  # otherwise implied by the altitude band
                add([(self.X0 + p_, gate - 0.5), (self.H0 + i, 1.0)], gate - 0.5 + p.h_max)
            c1 = milp.taylor_const[i, j]
            self.krow[p_] = len(rows)
            add(
                [(self.X0 + p_, c1 + c2 * p.h_max), (self.H0 + i, c2), (self.K0 + p_, -1.0)],
                c2 * p.h_max,
            )
        # coverage and fleet-size equalities
        cov_rhs = float(milp.n_users)
        add([(self.X0 + p_, 1.0) for p_ in range(np_)], cov_rhs, 0)
        add([(self.M0 + i, 1.0) for i in range(I)], float(milp.P), 0)

        self.n_rows = len(rows)
        cols: list[list[tuple[int, float]]] = [[] for _ in range(self.n_cols)]
        for r, entries in enumerate(rows):
            for colid, val in entries:
                cols[colid].append((r, val))
        ptr = [0]
        ridx: list[int] = []
        vals: list[float] = []
        for jcol in range(self.n_cols):
            if not cols[jcol]:
                ridx.append(0)
                vals.append(0.0)
            else:
                for r, v in cols[jcol]:
                    ridx.append(r)
                    vals.append(v)
            ptr.append(len(ridx))
        self.A = lp.SparseCols(self.n_rows, self.n_cols, ptr, ridx, vals)
        self.b = np.array(rhs)
        self.senses = np.array(senses, dtype=np.int8)

        self.c = np.zeros(self.n_cols)
        self.c[self.K0 : self.K0 + np_] = 1.0
        self.upper = np.full(self.n_cols, np.inf)
        self.upper[self.X0 : self.X0 + np_] = 1.0
        self.upper[self.M0 : self.M0 + I] = 1.0
        self.upper[self.H0 : self.H0 + I] = p.h_max
        for pq in self.fixed_one:
            p_ = self.pair_idx.get(pq)
            if p_ is None:
                continue
            # lock x at 1 by pinning both bounds; the simplex holds it at upper
            self.fix_one_col(p_)

    def fix_one_col(self, p_):
        # represented as upper == lower == 1 via an equality row
        self.b = np.append(self.b, 1.0)
        self.senses = np.append(self.senses, 0)
        self.A = lp.SparseCols(
            self.A.m + 1,
            self.A.n,
            self.A.col_ptr,
            self.A.row_idx,
            self.A.vals,
        )
        s, e = self.A.col_ptr[p_], self.A.col_ptr[p_ + 1]
        # append the new row entry to column p_: rebuild triplets (rare path)
        ptr = self.A.col_ptr.copy()
        ridx = self.A.row_idx.tolist()
        vals = self.A.vals.tolist()
        ridx.insert(int(e), self.A.m - 1)
        vals.insert(int(e), 1.0)
        ptr[p_ + 1 :] += 1
        self.A = lp.SparseCols(self.A.m, self.A.n, ptr, ridx, vals)
        self.n_rows += 1

    def warm_from_integer(self, assign: dict[int, int], open_c: list[int], alts: dict[int, float]):
        """Basis/status arrays representing the greedy vertex."""
        n_all = self.n_cols + self.n_rows  # slack ids follow structural ids
        vstatus = np.zeros(self.n_cols, dtype=np.int8)
        basis_rows: dict[int, int] = {}
        for j, i in assign.items():
            p_ = self.pair_idx.get((i, j))
            if p_ is None:
                return None
            vstatus[self.X0 + p_] = 1  # at upper
        for i in open_c:
            vstatus[self.M0 + i] = 1
        hmin = self.milp.params.h_min
        for i in open_c:
            h = alts[i]
            binding = None
            if h > hmin:
                serving = [p_ for p_ in self.cand_pairs[i]
                           if vstatus[self.X0 + p_] == 1 and p_ in self.cone_row]
                if serving:
                    pmax = max(
                        serving,
                        key=lambda p_: self.milp.cone_alt[self.pairs[p_][0], self.pairs[p_][1]],
                    )
                    binding = self.cone_row.get(pmax)
            if binding is None:
                return None  # altitude floor case handled by leaving h nonbasic? no: bail
            basis_rows[binding] = self.H0 + i
        for j, i in assign.items():
            p_ = self.pair_idx[(i, j)]
            h = alts[i]
            line = self.milp.taylor_const[i, j] + self.milp.taylor_slope * h
            if line > 0:
                basis_rows[self.krow[p_]] = self.K0 + p_
        return vstatus, basis_rows

    def solve(self, warm=None, max_iter=None):
        return lp.solve_lp_rows(
            self.c, self.A, self.b, self.senses, self.upper,
            max_iter=max_iter, warm=warm,
        )


def _quick_infeasible(milp: PlacementMilp, serveable) -> str | None:
    """Cheap certificates: uncoverable user, capacity counting, or a pairwise
    separation witness larger than P."""
    p = milp.params
    if not serveable.any(axis=0).all():
        return "a user is outside every candidate's serviceable range"
    if milp.n_users > milp.P * p.psi_fbs:
        return "channel capacity: U > P * psi"
    if float(milp.demands.sum()) > milp.P * p.backhaul_mbps + 1e-9:
        return "backhaul capacity: total demand > P * beta"
    # users that no single candidate can co-serve need distinct fleet members
    users = milp.users
    witness: list[int] = []
    for j in range(milp.n_users):
        ok = True
        for w in witness:
            if np.any(serveable[:, j] & serveable[:, w]):
                ok = False
                break
        if ok:
            witness.append(j)
            if len(witness) > milp.P:
                return "separation witness exceeds P"
    return None


def solve_exact(milp: PlacementMilp, time_limit: float | None = None):
    """Provably optimal placement via best-first branch-and-bound on the pair
    binaries with LP-relaxation bounds; returns PlacementSolution, Infeasible,
    or TimedOut carrying the incumbent if any.
    """
    t_start = time.monotonic()
    serveable = milp.pair_serveable()

    cert = _quick_infeasible(milp, serveable)
    if cert is not None:
        return Infeasible(cert)
    if milp.P > milp.n_candidates:
        return Infeasible("P exceeds candidate count")

    incumbent = None
    incumbent_obj = math.inf
    incumbent_key = None

    g = _greedy_integer(milp, serveable)
    if g is not None:
        assign, open_c = g
        obj, alts = _exact_objective(milp, open_c, assign)
        if obj is not None:
            incumbent = (assign, open_c, alts)
            incumbent_obj = obj

    def out_of_time():
        return time_limit is not None and (time.monotonic() - t_start) > time_limit

    def finish(best, best_obj):
        if best is None:
            return Infeasible("branch and bound exhausted without an integer point")
        assign, open_c, alts = best
        return _to_solution(milp, assign, open_c, alts, best_obj)

    # best-first over nodes; each node re-derives its reduced LP with fixings
    counter = 0
    root_fix: dict = {}
    heap: list = []

    def push(fix, warm_hint):
        nonlocal counter, incumbent, incumbent_obj
        if out_of_time():
            return "timeout"
        rel = _LpRelaxation(milp, serveable, fix)
        warm = None
        g2 = _greedy_integer(
            milp, serveable,
            forced_zero=[pq for pq, v in fix.items() if v == 0],
            forced_one=[pq for pq, v in fix.items() if v == 1],
        )
        if g2 is not None:
            assign2, open2 = g2
            obj2, alts2 = _exact_objective(milp, open2, assign2)
            if obj2 is not None:
                better = obj2 < incumbent_obj - 1e-9
                tie_smaller = (
                    incumbent is not None
                    and abs(obj2 - incumbent_obj) <= 1e-9
                    and _lex_key(milp, assign2, open2) < _lex_key(milp, incumbent[0], incumbent[1])
                )
                if better or tie_smaller:
                    incumbent = (assign2, open2, alts2)
                    incumbent_obj = min(obj2, incumbent_obj)
                warm_info = rel.warm_from_integer(assign2, open2, alts2)
                if warm_info is not None:
                    vstatus, basis_rows = warm_info
                    warm = _assemble_warm(rel, vstatus, basis_rows)
        res = rel.solve(warm=warm)
        if res.status == lp.INFEASIBLE:
            return None
        if res.status != lp.OPTIMAL:
            return None  # numerically stuck node: drop its bound, keep incumbent
        bound = res.fun
        if bound >= incumbent_obj - 1e-6 * max(1.0, abs(incumbent_obj)):
            return None
        counter += 1
        heapq.heappush(heap, (bound, counter, fix, res))
        return None

    status = push(root_fix, None)
    if status == "timeout":
        return TimedOut(finish(incumbent, incumbent_obj) if incumbent else None)

    while heap:
        if out_of_time():
            sol = finish(incumbent, incumbent_obj)
            return TimedOut(sol if incumbent else None)
        bound, _, fix, res = heapq.heappop(heap)
        if bound >= incumbent_obj - 1e-6 * max(1.0, abs(incumbent_obj)):
            continue
        rel = _LpRelaxation(milp, serveable, fix)
        x = res.x
        xs = x[rel.X0 : rel.X0 + rel.n_pairs]
        frac = np.abs(xs - np.round(xs))
        p_star = int(np.argmax(frac))
        if frac[p_star] <= 1e-6:
            # integral x: build the integer completion and evaluate exactly
            assign = {}
            for p_, (i, j) in enumerate(rel.pairs):
                if xs[p_] > 0.5:
                    assign[j] = i
            used = sorted(set(assign.values()))
            extras = [i for i in range(milp.n_candidates) if i not in used]
            open_c = used + extras[: milp.P - len(used)]
            if len(open_c) < milp.P or len(assign) < milp.n_users:
                continue
            obj, alts = _exact_objective(milp, sorted(open_c), assign)
            if obj is None:
                continue
            if obj < incumbent_obj - 1e-9 or (
                abs(obj - incumbent_obj) <= 1e-9
                and incumbent is not None
                and _lex_key(milp, assign, sorted(open_c)) < _lex_key(milp, incumbent[0], incumbent[1])
            ):
                incumbent = (assign, sorted(open_c), alts)
                incumbent_obj = min(obj, incumbent_obj)
            continue
        pq = rel.pairs[p_star]
        for val in (1, 0):
            child = dict(fix)
            child[pq] = val
            st = push(child, None)
            if st == "timeout":
                return TimedOut(finish(incumbent, incumbent_obj) if incumbent else None)

    if incumbent is None:
        return Infeasible("no integer-feasible assignment")
    return finish(incumbent, incumbent_obj)


def _lex_key(milp: PlacementMilp, assign: dict[int, int], open_c: list[int]):
    m_bits = tuple(1 if i in set(open_c) else 0 for i in range(milp.n_candidates))
    x_bits = tuple(
        1 if assign.get(j) == i else 0
        for i in range(milp.n_candidates)
        for j in range(milp.n_users)
    )
    return m_bits + x_bits


def _assemble_warm(rel: _LpRelaxation, vstatus, basis_rows):
    """Turn row->basic-var hints into full (basis, vstatus) arrays: remaining
    rows take their slack (ub rows) and the two equalities keep artificials out
    by... falling back to None when a row has no natural basic column."""
    m = rel.n_rows
    basis = np.full(m, -1, dtype=np.int64)
    n_struct = rel.n_cols
    # slack column ids in the assembled LP follow structural columns, one per ub row
    ub_positions = np.flatnonzero(rel.senses == 1)
    slack_of_row = {int(r): n_struct + k for k, r in enumerate(ub_positions)}
    for r in range(m):
        if r in basis_rows:
            basis[r] = basis_rows[r]
        elif r in slack_of_row:
            basis[r] = slack_of_row[r]
        else:
            return None  # equality row without a designated basic column
    full_vstatus = np.zeros(n_struct + len(ub_positions), dtype=np.int8)
    full_vstatus[:n_struct] = vstatus
    return basis, full_vstatus


def _to_solution(milp, assign, open_c, alts, obj) -> PlacementSolution:
    path_loss = {}
    cands = milp.candidates.as_array()
    for j, i in assign.items():
        u = milp.users[j]
        h = alts[i]
        fbs = Point3(float(cands[i, 0]), float(cands[i, 1]), float(h))
        d3 = distance3(fbs, u.pos)
        theta = elevation_angle(fbs, u.pos) if fbs.z > u.pos.z else 90.0
        path_loss[u.id] = mean_path_loss(d3, theta, milp.env)
    selected = tuple((int(i), float(alts[i])) for i in sorted(open_c))
    assignment = {milp.users[j].id: int(i) for j, i in assign.items()}
    return PlacementSolution(
        selected=selected, assignment=assignment, path_loss=path_loss, objective=float(obj)
    )


def validate_solution(milp: PlacementMilp, sol: PlacementSolution) -> list[str]:
    """Independent re-check of every constraint family from the raw data."""
    errs: list[str] = []
    p = milp.params
    open_ids = [i for i, _ in sol.selected]
    alt_of = dict(sol.selected)
    uid_to_idx = {u.id: idx for idx, u in enumerate(milp.users)}

    if len(sol.selected) != milp.P:
        errs.append(f"fleet-size: selected {len(sol.selected)} != P {milp.P}")
    if len(set(open_ids)) != len(open_ids):
        errs.append("fleet-size: duplicate candidates selected")
    if set(sol.assignment) != {u.id for u in milp.users}:
        errs.append("full-cover: not every user assigned exactly once")
    loads = {i: 0 for i in open_ids}
    demand_load = {i: 0.0 for i in open_ids}
    for uid, i in sol.assignment.items():
        if i not in alt_of:
            errs.append(f"open-link: user {uid} assigned to unselected candidate {i}")
            continue
        j = uid_to_idx[uid]
        loads[i] += 1
        demand_load[i] += milp.demands[j]
        if milp.cone_alt[i, j] > alt_of[i] + 1e-6:
            errs.append(f"cone: user {uid} at candidate {i} above the coverage cone")
        if alt_of[i] >= milp.gate_alt[i, j] - 0.5 + 1e-9:
            errs.append(f"gate: user {uid} at candidate {i} violates the loss gate")
    for i in open_ids:
        if loads.get(i, 0) > p.psi_fbs:
            errs.append(f"channels: candidate {i} serves {loads[i]} > psi {p.psi_fbs}")
        if demand_load.get(i, 0.0) > p.backhaul_mbps + 1e-6:
            errs.append(f"backhaul: candidate {i} load {demand_load[i]:.3f} > beta")
        h = alt_of[i]
        if not (p.h_min - 1e-9 <= h <= p.h_max + 1e-9):
            errs.append(f"alt-band: candidate {i} altitude {h} outside band")
    # objective consistency with the loss lines
    expect = 0.0
    for uid, i in sol.assignment.items():
        j = uid_to_idx[uid]
        expect += max(0.0, milp.taylor_const[i, j] + milp.taylor_slope * alt_of[i])
    if not math.isclose(expect, sol.objective, rel_tol=1e-6, abs_tol=1e-6):
        errs.append(f"objective mismatch: stated {sol.objective} vs recomputed {expect}")
    return errs


def min_fbs_count(
    snapshot: Snapshot,
    candidates: CandidateSet,
    env: Environment,
    params: FleetParams,
    time_limit: float | None = None,
    hint: int | None = None,
):
    """Minimal feasible fleet size and its optimal placement, by bisection over
    [1, |candidates|] (feasibility is monotone in the fleet size)."""
    n = len(candidates)

    results: dict[int, object] = {}

    def feasible(P: int):
        if P in results:
            return results[P]
        out = solve_exact(build_milp(snapshot, candidates, P, env, params), time_limit)
        results[P] = out
        return out

    lo, hi = 1, n
    if hint is not None and 1 <= hint <= n:
        out = feasible(hint)
        if isinstance(out, PlacementSolution):
            hi = hint
            if hint == 1:
                return 1, out
            prev = feasible(hint - 1)
            if isinstance(prev, Infeasible):
                return hint, out
            if isinstance(prev, PlacementSolution):
                hi = hint - 1
        elif isinstance(out, Infeasible):
            lo = hint + 1
        if lo > n:
            raise NoFeasibleFleet("even the full candidate set is infeasible")

    top = feasible(hi)
    if not isinstance(top, PlacementSolution):
        if isinstance(top, TimedOut):
            raise NoFeasibleFleet("placement solve timed out at the upper fleet size")
        raise NoFeasibleFleet("even the full candidate set is infeasible")

    while lo < hi:
        mid = (lo + hi) // 2
        out = feasible(mid)
        if isinstance(out, PlacementSolution):
            hi = mid
        elif isinstance(out, Infeasible):
            lo = mid + 1
        else:
            raise NoFeasibleFleet("placement solve timed out during bisection")
    final = results[hi]
    if not isinstance(final, PlacementSolution):
        final = feasible(hi)
    return hi, final
