"""Bounded-variable revised simplex over a sparse column store.

Solves   min c.x   s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  0 <= x <= upper
with a two-phase primal simplex: slack crash basis, artificials only on rows
the crash cannot satisfy, Devex pricing with a Bland fallback after a
degeneracy stall, and an explicitly maintained basis inverse with periodic
refactorization. Deterministic for fixed inputs.

The constraint matrices this package produces are extremely sparse (a few
nonzeros per row), so pricing and column extraction run over a CSC store; the
dense m x m basis inverse update is the per-iteration cost floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = 0
INFEASIBLE = 2
UNBOUNDED = 3
ITERATION_LIMIT = 4

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2

_PIVOT_TOL = 1e-9
_STALL_LIMIT = 3000
_REFACTOR_EVERY = 600


@dataclass
class LpResult:
    status: int
    x: np.ndarray | None
    fun: float
    n_iter: int
    basis: np.ndarray | None = None
    vstatus: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class SparseCols:
    """Read-only CSC triple (col_ptr, row_idx, vals); every column non-empty."""

    def __init__(self, n_rows: int, n_cols: int, col_ptr, row_idx, vals):
        self.m = n_rows
        self.n = n_cols
        self.col_ptr = np.asarray(col_ptr, dtype=np.int64)
        self.row_idx = np.asarray(row_idx, dtype=np.int64)
        self.vals = np.asarray(vals, dtype=float)

    @classmethod
    def from_dense(cls, A: np.ndarray) -> "SparseCols":
        A = np.asarray(A, dtype=float)
        m, n = A.shape
        ptr = [0]
        rows: list[int] = []
        vals: list[float] = []
        for j in range(n):
            nz = np.flatnonzero(A[:, j])
            if nz.size == 0:
                # keep an explicit zero so pricing segments stay aligned
                rows.append(0)
                vals.append(0.0)
            else:
                rows.extend(nz.tolist())
                vals.extend(A[nz, j].tolist())
            ptr.append(len(rows))
        return cls(m, n, ptr, rows, vals)

    def col(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        s, e = self.col_ptr[j], self.col_ptr[j + 1]
        return self.row_idx[s:e], self.vals[s:e]

    def transpose_dot(self, y: np.ndarray) -> np.ndarray:
        """A.T @ y in O(nnz)."""
        prod = self.vals * y[self.row_idx]
        return np.add.reduceat(prod, self.col_ptr[:-1])

    def scale_rows(self, row_scale: np.ndarray) -> None:
        self.vals = self.vals / row_scale[self.row_idx]

    def flip_rows(self, mask: np.ndarray) -> None:
        sign = np.where(mask, -1.0, 1.0)
        self.vals = self.vals * sign[self.row_idx]

    def gather_dense(self, cols: np.ndarray) -> np.ndarray:
        out = np.zeros((self.m, cols.size))
        for p, j in enumerate(cols):
            r, v = self.col(j)
            out[r, p] = v
        return out


class _Simplex:
    """State shared by both phases: A includes structural and slack columns."""

    def __init__(self, A: SparseCols, b: np.ndarray, upper: np.ndarray, tol: float):
        self.A = A
        self.b = b
        self.m = A.m
        self.n = A.n
        self.upper = upper
        self.tol = tol
        self.basis = np.empty(self.m, dtype=np.int64)
        self.vstatus = np.full(self.n + self.m, _AT_LOWER, dtype=np.int8)
        self.x = np.zeros(self.n + self.m)
        self.art_upper = np.zeros(self.m)
        self.art_used = np.zeros(self.m, dtype=bool)
        self.binv = np.eye(self.m)
        self.n_iter = 0
        self.ub_basis = np.zeros(self.m)
        self._blk = 512
        self._upd_buf = np.empty((min(self._blk, self.m), self.m))

    # -- helpers -----------------------------------------------------------

    def _upper_of(self, j: int) -> float:
        return self.upper[j] if j < self.n else self.art_upper[j - self.n]

    def _col_w(self, j: int) -> np.ndarray:
        """binv @ column j."""
        if j < self.n:
            r, v = self.A.col(j)
            return self.binv[:, r] @ v
        return self.binv[:, j - self.n].copy()

    def crash(self, slack_basic: np.ndarray) -> None:
        for i in range(self.m):
            j = slack_basic[i]
            if j >= 0:
                self.basis[i] = j
            else:
                self.basis[i] = self.n + i
                self.art_used[i] = True
                self.art_upper[i] = np.inf
            self.vstatus[self.basis[i]] = _BASIC
            self.x[self.basis[i]] = self.b[i]
        self.binv = np.eye(self.m)
        self._sync_ub_basis()

    def warm_start(self, basis: np.ndarray, vstatus: np.ndarray) -> bool:
        """Adopt a previous basis if it factorizes and is primal feasible."""
        basis = np.asarray(basis, dtype=np.int64)
        if basis.size != self.m or basis.max(initial=-1) >= self.n:
            return False
        B = self.A.gather_dense(basis)
        try:
            binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        cond_probe = np.abs(binv).max()
        if not np.isfinite(cond_probe) or cond_probe > 1e14:
            return False
        self.basis = basis.copy()
        self.vstatus = np.full(self.n + self.m, _AT_LOWER, dtype=np.int8)
        self.vstatus[: self.n] = vstatus[: self.n]
        self.vstatus[basis] = _BASIC
        self.binv = binv
        xb = self._compute_xb()
        ub_b = np.where(np.isfinite(self.upper[basis]), self.upper[basis], np.inf)
        slack = 1e-7 * max(1.0, float(np.abs(self.b).max(initial=1.0)))
        if np.any(xb < -slack) or np.any(xb - ub_b > slack):
            return False
        self.x[:] = 0.0
        at_up = np.flatnonzero(self.vstatus[: self.n] == _AT_UPPER)
        self.x[at_up] = self.upper[at_up]
        self.x[basis] = np.clip(xb, 0.0, ub_b)
        self._sync_ub_basis()
        return True

    def _sync_ub_basis(self) -> None:
        self.ub_basis = np.array([self._upper_of(j) for j in self.basis])

    def _compute_xb(self) -> np.ndarray:
        rhs = self.b.copy()
        at_up = np.flatnonzero(self.vstatus[: self.n] == _AT_UPPER)
        for j in at_up:
            r, v = self.A.col(j)
            rhs[r] -= v * self.upper[j]
        return self.binv @ rhs

    def _refactor(self) -> None:
        struct = self.basis < self.n
        B = np.zeros((self.m, self.m))
        if struct.any():
            B[:, struct] = self.A.gather_dense(self.basis[struct])
        for p in np.flatnonzero(~struct):
            B[self.basis[p] - self.n, p] = 1.0
        try:
            self.binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            self.binv = np.linalg.pinv(B)
        self.x[self.basis] = self._compute_xb()

    # -- core loop ---------------------------------------------------------

    def optimize(self, c_struct: np.ndarray, c_art: np.ndarray, max_iter: int) -> int:
        tol = self.tol
        bland = False
        stall = 0
        devex = np.ones(self.n + self.m)

        c_full = np.concatenate([c_struct, c_art])
        y = c_full[self.basis] @ self.binv
        d = c_struct - self.A.transpose_dot(y)
        d_art = c_art - y

        while True:
            if self.n_iter >= max_iter:
                return ITERATION_LIMIT
            self.n_iter += 1
            if self.n_iter % _REFACTOR_EVERY == 0:
                self._refactor()
                y = c_full[self.basis] @ self.binv
                d = c_struct - self.A.transpose_dot(y)
                d_art = c_art - y

            st = self.vstatus[: self.n]
            open_up = self.upper > tol
            elig = ((st == _AT_LOWER) & (d < -tol) & open_up) | ((st == _AT_UPPER) & (d > tol))
            st_a = self.vstatus[self.n :]
            elig_a = (self.art_upper > 0) & (st_a == _AT_LOWER) & (d_art < -tol)

            if not (elig.any() or elig_a.any()):
                # confirm with a clean factorization before declaring optimal
                self._refactor()
                y = c_full[self.basis] @ self.binv
                d = c_struct - self.A.transpose_dot(y)
                d_art = c_art - y
                elig = ((st == _AT_LOWER) & (d < -tol) & open_up) | ((st == _AT_UPPER) & (d > tol))
                elig_a = (self.art_upper > 0) & (st_a == _AT_LOWER) & (d_art < -tol)
                if not (elig.any() or elig_a.any()):
                    return OPTIMAL

            if bland:
                idx = np.flatnonzero(elig)
                if idx.size:
                    q = int(idx[0])
                else:
                    q = self.n + int(np.flatnonzero(elig_a)[0])
            else:
                score = np.where(elig, d * d / devex[: self.n], 0.0)
                q = int(np.argmax(score))
                best = score[q]
                if elig_a.any():
                    score_a = np.where(elig_a, d_art * d_art / devex[self.n :], 0.0)
                    qa = int(np.argmax(score_a))
                    if score_a[qa] > best:
                        q = self.n + qa
                        best = score_a[qa]
                if best <= 0.0:
                    return OPTIMAL

            d_q = d[q] if q < self.n else d_art[q - self.n]
            sigma = 1.0 if self.vstatus[q] == _AT_LOWER else -1.0
            w = self._col_w(q)
            sw = sigma * w
            xb = self.x[self.basis]

            t_flip = self._upper_of(q)
            dec = sw > _PIVOT_TOL
            inc = sw < -_PIVOT_TOL
            with np.errstate(divide="ignore", invalid="ignore"):
                t_dec = np.where(dec, xb / sw, np.inf)
                t_inc = np.where(
                    inc & np.isfinite(self.ub_basis), (self.ub_basis - xb) / (-sw), np.inf
                )
            np.clip(t_dec, 0.0, None, out=t_dec)
            np.clip(t_inc, 0.0, None, out=t_inc)
            t_rows = np.minimum(t_dec, t_inc)

            p = int(np.argmin(t_rows))
            t_row_min = t_rows[p]
            if t_row_min < t_flip:
                if bland:
                    cutoff = t_row_min + 1e-12
                    cand = np.flatnonzero(t_rows <= cutoff)
                    p = int(cand[np.argmin(self.basis[cand])])
                else:
                    cutoff = t_row_min * (1.0 + 1e-9) + 1e-12
                    cand = np.flatnonzero(t_rows <= cutoff)
                    p = int(cand[np.argmax(np.abs(w[cand]))])
                t_step = t_rows[p]
                leaving = True
                leave_to_upper = t_inc[p] < t_dec[p]
            else:
                t_step = t_flip
                leaving = False
                leave_to_upper = False

            if not np.isfinite(t_step):
                return UNBOUNDED

            if t_step <= 1e-12:
                stall += 1
                if stall >= _STALL_LIMIT and not bland:
                    bland = True
                    stall = 0
            else:
                stall = 0

            if not leaving:
                # bound flip: basis, binv, y and d are unchanged
                self.x[self.basis] = xb - sw * t_step
                if sigma > 0:
                    self.x[q] = self._upper_of(q)
                    self.vstatus[q] = _AT_UPPER
                else:
                    self.x[q] = 0.0
                    self.vstatus[q] = _AT_LOWER
                continue

            r_var = int(self.basis[p])
            xb_new = xb - sw * t_step
            self.x[self.basis] = xb_new
            if leave_to_upper:
                self.x[r_var] = self._upper_of(r_var)
                self.vstatus[r_var] = _AT_UPPER
            else:
                self.x[r_var] = 0.0
                self.vstatus[r_var] = _AT_LOWER

            self.basis[p] = q
            self.vstatus[q] = _BASIC
            self.x[q] = t_step if sigma > 0 else self._upper_of(q) - t_step
            self.ub_basis[p] = self._upper_of(q)

            piv = w[p]
            if abs(piv) < _PIVOT_TOL:
                self._refactor()
                y = c_full[self.basis] @ self.binv
                d = c_struct - self.A.transpose_dot(y)
                d_art = c_art - y
                continue

            # rank-1 inverse update (blocked: the full outer product would be
            # the dominant per-iteration memory cost), then incremental duals:
            #   y' = y + d_q * row_p(binv'),  d' = d - d_q * (A.T row_p(binv'))
            row = self.binv[p, :] / piv
            for s in range(0, self.m, self._blk):
                e = min(s + self._blk, self.m)
                buf = self._upd_buf[: e - s]
                np.multiply(w[s:e, None], row[None, :], out=buf)
                self.binv[s:e] -= buf
            self.binv[p, :] = row

            y += d_q * row
            alpha = self.A.transpose_dot(row)
            d -= d_q * alpha
            d_art -= d_q * row
            if q < self.n:
                d[q] = 0.0
            else:
                d_art[q - self.n] = 0.0

            # Devex weight propagation (heuristic; correctness-neutral)
            if not bland:
                ref = max(devex[q], 1.0)
                scale = alpha * alpha * ref
                np.maximum(devex[: self.n], scale, out=devex[: self.n])
                devex[r_var] = max(ref / (piv * piv), 1.0)
                if devex.max() > 1e12:
                    devex[:] = 1.0


def solve_lp(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    upper=None,
    max_iter=None,
    tol=1e-9,
    warm=None,
) -> LpResult:
    """Minimize c.x subject to A_ub x <= b_ub, A_eq x = b_eq, 0 <= x <= upper.

    Accepts dense matrices or (SparseCols, b) pre-assembled by callers; `warm`
    optionally carries (basis, vstatus) from a related previous solve.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)

    blocks = []
    rhs = []
    n_eq = 0
    if A_eq is not None and np.size(A_eq):
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        blocks.append(A_eq)
        rhs.append(np.asarray(b_eq, dtype=float).ravel())
        n_eq = A_eq.shape[0]
    n_ub = 0
    if A_ub is not None and np.size(A_ub):
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        blocks.append(A_ub)
        rhs.append(np.asarray(b_ub, dtype=float).ravel())
        n_ub = A_ub.shape[0]

    if not blocks:
        x = np.where(c < 0, upper, 0.0)
        if np.any(np.isinf(x) & (c < 0)):
            return LpResult(UNBOUNDED, None, -np.inf, 0)
        return LpResult(OPTIMAL, x, float(c @ x), 0)

    A_dense = np.vstack(blocks)
    b = np.concatenate(rhs)
    senses = np.array([0] * n_eq + [1] * n_ub)  # 0 eq, 1 ub
    return solve_lp_rows(c, A_dense, b, senses, upper, max_iter=max_iter, tol=tol, warm=warm)


def solve_lp_rows(
    c,
    A,
    b,
    senses,
    upper,
    max_iter=None,
    tol=1e-9,
    warm=None,
) -> LpResult:
    """Row-wise entry: senses[i] == 0 for equality, 1 for <=."""
    c = np.asarray(c, dtype=float)
    n = c.size
    b = np.asarray(b, dtype=float).copy()
    senses = np.asarray(senses, dtype=np.int8)
    m = b.size

    if isinstance(A, SparseCols):
        sp_struct = A
    else:
        sp_struct = SparseCols.from_dense(np.asarray(A, dtype=float))

    # row scaling to unit max magnitude
    row_max = np.zeros(m)
    np.maximum.at(row_max, sp_struct.row_idx, np.abs(sp_struct.vals))
    zero_rows = row_max == 0
    if np.any(zero_rows & (np.abs(b) > tol) & (senses == 0)):
        return LpResult(INFEASIBLE, None, np.nan, 0)
    if np.any(zero_rows & (b < -tol) & (senses == 1)):
        return LpResult(INFEASIBLE, None, np.nan, 0)
    row_scale = np.where(zero_rows, 1.0, row_max)
    b = b / row_scale

    flip = b < 0
    b[flip] = -b[flip]

    # assemble structural + slack CSC (slack sign flips with its row)
    ub_rows = np.flatnonzero(senses == 1)
    n_slack = ub_rows.size
    vals = sp_struct.vals / row_scale[sp_struct.row_idx]
    sign = np.where(flip, -1.0, 1.0)
    vals = vals * sign[sp_struct.row_idx]
    col_ptr = sp_struct.col_ptr.copy()
    row_idx = sp_struct.row_idx.copy()

    slack_rows = ub_rows
    slack_vals = sign[ub_rows]
    full_ptr = np.concatenate([col_ptr, col_ptr[-1] + 1 + np.arange(n_slack, dtype=np.int64)])
    full_rows = np.concatenate([row_idx, slack_rows])
    full_vals = np.concatenate([vals, slack_vals])
    A_full = SparseCols(m, n + n_slack, full_ptr, full_rows, full_vals)

    upper_full = np.concatenate([np.asarray(upper, dtype=float), np.full(n_slack, np.inf)])

    # crash: slack basic on unflipped ub rows, artificial elsewhere
    slack_basic = np.full(m, -1, dtype=np.int64)
    for k, i in enumerate(ub_rows):
        if not flip[i]:
            slack_basic[i] = n + k

    cg = float(np.abs(c).max(initial=0.0))
    c_scale = cg if cg > 0 else 1.0

    sx = _Simplex(A_full, b, upper_full, tol)
    if max_iter is None:
        max_iter = 400 * (m + n)

    warmed = False
    if warm is not None:
        warmed = sx.warm_start(warm[0], warm[1])
    if not warmed:
        sx.crash(slack_basic)
        if sx.art_used.any():
            c1_art = np.where(sx.art_used, 1.0, 0.0)
            status = sx.optimize(np.zeros(A_full.n), c1_art, max_iter)
            if status == ITERATION_LIMIT:
                return LpResult(ITERATION_LIMIT, None, np.nan, sx.n_iter)
            art_mass = float(np.sum(sx.x[A_full.n :][sx.art_used]))
            if art_mass > 1e-7 * max(1.0, float(np.abs(b).max(initial=1.0))):
                return LpResult(INFEASIBLE, None, np.nan, sx.n_iter)
            sx.art_upper[:] = 0.0
            sx._sync_ub_basis()

    c2 = np.zeros(A_full.n)
    c2[:n] = c / c_scale
    status = sx.optimize(c2, np.zeros(m), max_iter)
    if status == UNBOUNDED:
        return LpResult(UNBOUNDED, None, -np.inf, sx.n_iter)
    if status == ITERATION_LIMIT:
        return LpResult(ITERATION_LIMIT, None, np.nan, sx.n_iter)

    x = sx.x[:n].copy()
    np.clip(x, 0.0, np.where(np.isfinite(upper), upper, np.inf), out=x)
    return LpResult(
        OPTIMAL,
        x,
        float(c @ x),
        sx.n_iter,
        basis=sx.basis.copy(),
        vstatus=sx.vstatus.copy(),
    )
