//! Dense linear programming for small problems.
//!
//! The engine solves `maximize c.x  subject to  a_i.x <= b_i` with free `x`
//! by running the revised simplex method on the dual standard form
//! `minimize b.y  subject to  A^t y = c, y >= 0`. The dual has one variable
//! per constraint row and only `n` equations, so the basis stays `n x n`
//! no matter how many rows the problem has; rows are stored sparse and priced
//! in one pass. The optimal primal point is the vector of simplex multipliers.
//!
//! Re-solving with a new objective keeps the previous basis and restores
//! feasibility with dual simplex steps, which is what the support-function
//! sweeps in the sigma-body construction rely on.

use crate::Error;

pub static LP_SOLVES: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
pub static LP_ITERS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
pub static LP_WARM: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);

const EPS_OPT: f64 = 1e-10;
const EPS_FEAS: f64 = 1e-10;
const EPS_PIVOT: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;

/// One inequality row `sum val[k] * x[idx[k]] <= rhs`.
#[derive(Clone, Debug)]
pub struct SparseRow {
    pub idx: Vec<u32>,
    pub val: Vec<f64>,
    pub rhs: f64,
}

impl SparseRow {
    pub fn new(idx: Vec<u32>, val: Vec<f64>, rhs: f64) -> Self {
        // merge duplicate indices and drop zeros
        let mut pairs: Vec<(u32, f64)> = idx.into_iter().zip(val).collect();
        pairs.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match merged.last_mut() {
                Some((li, lv)) if *li == i => *lv += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        let (idx, val) = merged.into_iter().unzip();
        SparseRow { idx, val, rhs }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub value: f64,
}

/// Row-form LP engine with basis reuse across objective changes.
///
/// Rows are stored flat (CSR) so pricing walks contiguous memory.
pub struct LpEngine {
    n: usize,
    m: usize,
    row_start: Vec<u32>,
    col_idx: Vec<u32>,
    coef: Vec<f64>,
    rhs: Vec<f64>,
    /// basis column ids; ids `< m` are problem columns, ids `>= m` are
    /// artificials for equation `id - m`
    basis: Vec<usize>,
    art_sign: Vec<f64>,
    binv: Vec<f64>,
    yb: Vec<f64>,
    have_basis: bool,
    pivots_since_refactor: usize,
    // workspaces
    ws_pi: Vec<f64>,
    ws_dir: Vec<f64>,
    ws_col: Vec<f64>,
    in_basis: Vec<bool>,
}

impl LpEngine {
    /// `n` primal variables; rows are normalized so each has unit max
    /// coefficient, which preserves the primal solution. Vacuous rows
    /// (no coefficients, nonnegative right-hand side) are dropped.
    pub fn new(n: usize, rows: Vec<SparseRow>) -> Self {
        let mut row_start = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut coef = Vec::new();
        let mut rhs = Vec::new();
        row_start.push(0u32);
        for mut r in rows {
            if r.idx.is_empty() && r.rhs >= 0.0 {
                continue;
            }
            let mx = r.val.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if mx > 0.0 && (mx > 16.0 || mx < 1.0 / 16.0) {
                let s = 1.0 / mx;
                for v in &mut r.val {
                    *v *= s;
                }
                r.rhs *= s;
            }
            col_idx.extend_from_slice(&r.idx);
            coef.extend_from_slice(&r.val);
            rhs.push(r.rhs);
            row_start.push(col_idx.len() as u32);
        }
        let m = rhs.len();
        LpEngine {
            n,
            m,
            row_start,
            col_idx,
            coef,
            rhs,
            basis: Vec::new(),
            art_sign: vec![1.0; n],
            binv: Vec::new(),
            yb: Vec::new(),
            have_basis: false,
            pivots_since_refactor: 0,
            ws_pi: vec![0.0; n],
            ws_dir: vec![0.0; n],
            ws_col: vec![0.0; n],
            in_basis: vec![false; m + n],
        }
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    /// Maximize `c . x`. Reuses the previous optimal basis when present.
    ///
    /// `Infeasible` here means the primal inequality system has no point;
    /// `Unbounded` means the objective is unbounded above on the polyhedron.
    pub fn maximize(&mut self, c: &[f64]) -> Result<LpSolution, Error> {
        assert_eq!(c.len(), self.n);
        LP_SOLVES.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        if self.have_basis {
            match self.warm_resolve(c) {
                Ok(sol) => {
                    LP_WARM.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    return Ok(sol);
                }
                Err(_) => {
                    // fall through to a cold start
                    self.have_basis = false;
                }
            }
        }
        self.cold_start(c)
    }

    fn cold_start(&mut self, c: &[f64]) -> Result<LpSolution, Error> {
        let n = self.n;
        let m = self.m;
        // Phase 1 basis: one artificial per equation, signed to make y >= 0.
        self.basis = (0..n).map(|i| m + i).collect();
        self.art_sign = c.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        self.binv = vec![0.0; n * n];
        for i in 0..n {
            self.binv[i * n + i] = self.art_sign[i];
        }
        self.yb = c.iter().map(|v| v.abs()).collect();
        self.pivots_since_refactor = 0;

        let obj = self.primal_simplex(Phase::One, None)?;
        if obj > 1e-7 * (1.0 + l1(c)) {
            // the dual system A^t y = c, y >= 0 is infeasible
            return Ok(LpSolution { status: LpStatus::Unbounded, x: vec![], value: f64::INFINITY });
        }
        self.expel_artificials()?;

        match self.primal_simplex(Phase::Two, None) {
            Ok(value) => {
                self.have_basis = true;
                let x = self.multipliers(Phase::Two);
                Ok(LpSolution { status: LpStatus::Optimal, x, value })
            }
            Err(Error::LpUnbounded) => {
                // dual unbounded below: primal infeasible
                Ok(LpSolution { status: LpStatus::Infeasible, x: vec![], value: f64::NEG_INFINITY })
            }
            Err(e) => Err(e),
        }
    }

    /// Re-optimize after an objective change, keeping the basis.
    fn warm_resolve(&mut self, c: &[f64]) -> Result<LpSolution, Error> {
        let m = self.m;
        if self.basis.iter().any(|&id| id >= m) {
            return Err(Error::LpInfeasible);
        }
        let n = self.n;
        let mut yb = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += self.binv[i * n + k] * c[k];
            }
            yb[i] = s;
        }
        self.yb = yb;
        self.dual_simplex(Phase::Two)?;
        let value = self.primal_simplex(Phase::Two, None)?;
        let x = self.multipliers(Phase::Two);
        Ok(LpSolution { status: LpStatus::Optimal, x, value })
    }

    /// Dense column of the dual system for column id (length n).
    fn column(&self, id: usize, out: &mut [f64]) {
        out.fill(0.0);
        if id >= self.m {
            out[id - self.m] = self.art_sign[id - self.m];
        } else {
            let (a, b) = (self.row_start[id] as usize, self.row_start[id + 1] as usize);
            for k in a..b {
                out[self.col_idx[k] as usize] += self.coef[k];
            }
        }
    }

    #[inline]
    fn col_dot(&self, id: usize, v: &[f64]) -> f64 {
        if id >= self.m {
            v[id - self.m] * self.art_sign[id - self.m]
        } else {
            let (a, b) = (self.row_start[id] as usize, self.row_start[id + 1] as usize);
            let mut s = 0.0;
            for (cf, ci) in self.coef[a..b].iter().zip(&self.col_idx[a..b]) {
                s += cf * v[*ci as usize];
            }
            s
        }
    }

    #[inline]
    fn cost(&self, phase: Phase, id: usize) -> f64 {
        let m = self.m;
        match phase {
            Phase::One => {
                if id >= m {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if id >= m {
                    f64::INFINITY
                } else {
                    self.rhs[id]
                }
            }
        }
    }

    /// Simplex multipliers `pi = B^-t cost_B`; equals the optimal primal `x`.
    fn multipliers(&self, phase: Phase) -> Vec<f64> {
        let n = self.n;
        let mut pi = vec![0.0; n];
        for i in 0..n {
            let cb = self.cost(phase, self.basis[i]);
            if cb == 0.0 {
                continue;
            }
            for k in 0..n {
                pi[k] += cb * self.binv[i * n + k];
            }
        }
        pi
    }

    fn multipliers_into(&mut self, phase: Phase) {
        let n = self.n;
        self.ws_pi.fill(0.0);
        for i in 0..n {
            let cb = self.cost(phase, self.basis[i]);
            if cb == 0.0 {
                continue;
            }
            for (pi, bi) in self.ws_pi.iter_mut().zip(&self.binv[i * n..(i + 1) * n]) {
                *pi += cb * bi;
            }
        }
    }

    /// `ws_dir = B^-1 * column(id)` using the workspaces.
    fn ftran(&mut self, id: usize) {
        let n = self.n;
        let mut col = std::mem::take(&mut self.ws_col);
        self.column(id, &mut col);
        for i in 0..n {
            let row = &self.binv[i * n..(i + 1) * n];
            let s: f64 = row.iter().zip(&col).map(|(a, b)| a * b).sum();
            self.ws_dir[i] = s;
        }
        self.ws_col = col;
    }

    /// Primal simplex to optimality; returns the objective value.
    fn primal_simplex(&mut self, phase: Phase, iter_cap: Option<usize>) -> Result<f64, Error> {
        let n = self.n;
        let m = self.m;
        let cap = iter_cap.unwrap_or(200 * (n + 16) + m + 8000);
        self.in_basis.fill(false);
        for &b in &self.basis {
            self.in_basis[b] = true;
        }
        let mut degenerate_streak = 0usize;
        for _iter in 0..cap {
            LP_ITERS.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            self.multipliers_into(phase);
            // pricing over problem columns (artificials never re-enter);
            // strict Bland's rule once a degenerate streak suggests cycling
            let bland = degenerate_streak > 3 * n + 20;
            let mut enter = usize::MAX;
            let mut best = -EPS_OPT * 8.0;
            for j in 0..m {
                if self.in_basis[j] {
                    continue;
                }
                let (a, b) = (self.row_start[j] as usize, self.row_start[j + 1] as usize);
                let mut dot = 0.0;
                for (cf, ci) in self.coef[a..b].iter().zip(&self.col_idx[a..b]) {
                    dot += cf * self.ws_pi[*ci as usize];
                }
                let cj = if phase == Phase::One { -dot } else { self.rhs[j] - dot };
                if cj < best {
                    enter = j;
                    if bland {
                        break;
                    }
                    best = cj;
                }
            }
            if enter == usize::MAX {
                let mut obj = 0.0;
                for (i, &b) in self.basis.iter().enumerate() {
                    obj += self.cost(phase, b) * self.yb[i];
                }
                return Ok(obj);
            }
            // direction: d = B^-1 a_enter
            self.ftran(enter);
            // ratio test; in Bland mode ties break by exact comparison on
            // the smallest basis id
            let mut leave = usize::MAX;
            let mut theta = f64::INFINITY;
            for i in 0..n {
                if self.ws_dir[i] > EPS_PIVOT {
                    let t = (self.yb[i] / self.ws_dir[i]).max(0.0);
                    let take = if leave == usize::MAX {
                        true
                    } else if bland {
                        t < theta || (t == theta && self.basis[i] < self.basis[leave])
                    } else {
                        t < theta - 1e-12
                            || (t < theta + 1e-12 && self.basis[i] < self.basis[leave])
                    };
                    if take {
                        theta = t;
                        leave = i;
                    }
                }
            }
            if leave == usize::MAX {
                return Err(Error::LpUnbounded);
            }
            if theta <= 1e-13 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            self.in_basis[self.basis[leave]] = false;
            self.in_basis[enter] = true;
            self.pivot_ws(leave, enter, theta);
        }
        Err(Error::BuildAssertion("simplex iteration cap exceeded".into()))
    }

    /// Dual simplex until the basic solution is feasible again.
    fn dual_simplex(&mut self, phase: Phase) -> Result<(), Error> {
        let n = self.n;
        let m = self.m;
        let cap = 40 * (n + 16) + 2000;
        self.in_basis.fill(false);
        for &b in &self.basis {
            self.in_basis[b] = true;
        }
        let mut rho = vec![0.0; n];
        for _iter in 0..cap {
            let mut leave = usize::MAX;
            let mut worst = -EPS_FEAS;
            for i in 0..n {
                if self.yb[i] < worst {
                    worst = self.yb[i];
                    leave = i;
                }
            }
            if leave == usize::MAX {
                return Ok(());
            }
            self.multipliers_into(phase);
            rho.copy_from_slice(&self.binv[leave * n..(leave + 1) * n]);
            let mut enter = usize::MAX;
            let mut best_ratio = f64::INFINITY;
            for j in 0..m {
                if self.in_basis[j] {
                    continue;
                }
                let alpha = self.col_dot(j, &rho);
                if alpha < -EPS_PIVOT {
                    let cj = (self.cost(phase, j) - self.col_dot(j, &self.ws_pi)).max(0.0);
                    let ratio = cj / (-alpha);
                    if ratio < best_ratio - 1e-12
                        || (ratio < best_ratio + 1e-12 && (enter == usize::MAX || j < enter))
                    {
                        best_ratio = ratio;
                        enter = j;
                    }
                }
            }
            if enter == usize::MAX {
                return Err(Error::LpInfeasible);
            }
            self.ftran(enter);
            if self.ws_dir[leave].abs() <= EPS_PIVOT {
                return Err(Error::LpInfeasible);
            }
            let theta = self.yb[leave] / self.ws_dir[leave];
            self.in_basis[self.basis[leave]] = false;
            self.in_basis[enter] = true;
            self.pivot_ws(leave, enter, theta);
        }
        Err(Error::BuildAssertion("dual simplex iteration cap exceeded".into()))
    }

    fn pivot_ws(&mut self, leave: usize, enter: usize, theta: f64) {
        let dir = std::mem::take(&mut self.ws_dir);
        self.pivot(leave, enter, &dir, theta);
        self.ws_dir = dir;
    }

    fn pivot(&mut self, leave: usize, enter: usize, dir: &[f64], theta: f64) {
        let n = self.n;
        for i in 0..n {
            self.yb[i] -= theta * dir[i];
        }
        self.yb[leave] = theta;
        let piv = dir[leave];
        let lrow: Vec<f64> = self.binv[leave * n..(leave + 1) * n].iter().map(|v| v / piv).collect();
        for i in 0..n {
            if i == leave {
                continue;
            }
            let f = dir[i];
            if f == 0.0 {
                continue;
            }
            for (b, l) in self.binv[i * n..(i + 1) * n].iter_mut().zip(&lrow) {
                *b -= f * l;
            }
        }
        self.binv[leave * n..(leave + 1) * n].copy_from_slice(&lrow);
        self.basis[leave] = enter;
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= REFACTOR_EVERY {
            let _ = self.refactor();
        }
    }

    /// Recompute `binv` and `yb` from the basis by Gauss-Jordan elimination.
    fn refactor(&mut self) -> Result<(), Error> {
        let n = self.n;
        let mut b = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for (slot, &id) in self.basis.iter().enumerate() {
            self.column(id, &mut col);
            for i in 0..n {
                b[i * n + slot] = col[i];
            }
        }
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            inv[i * n + i] = 1.0;
        }
        for c in 0..n {
            let mut piv = c;
            for r in (c + 1)..n {
                if b[r * n + c].abs() > b[piv * n + c].abs() {
                    piv = r;
                }
            }
            if b[piv * n + c].abs() < 1e-13 {
                return Err(Error::BuildAssertion("singular LP basis".into()));
            }
            if piv != c {
                for k in 0..n {
                    b.swap(c * n + k, piv * n + k);
                    inv.swap(c * n + k, piv * n + k);
                }
            }
            let d = b[c * n + c];
            for k in 0..n {
                b[c * n + k] /= d;
                inv[c * n + k] /= d;
            }
            for r in 0..n {
                if r == c {
                    continue;
                }
                let f = b[r * n + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..n {
                    b[r * n + k] -= f * b[c * n + k];
                    inv[r * n + k] -= f * inv[c * n + k];
                }
            }
        }
        self.binv = inv;
        self.pivots_since_refactor = 0;
        Ok(())
    }

    /// Pivot zero-level artificials out of the basis after phase 1.
    fn expel_artificials(&mut self) -> Result<(), Error> {
        let n = self.n;
        let m = self.m;
        for slot in 0..n {
            if self.basis[slot] < m {
                continue;
            }
            let rho: Vec<f64> = self.binv[slot * n..(slot + 1) * n].to_vec();
            let mut found = usize::MAX;
            for j in 0..m {
                if self.basis.contains(&j) {
                    continue;
                }
                if self.col_dot(j, &rho).abs() > 1e-9 {
                    found = j;
                    break;
                }
            }
            if found == usize::MAX {
                return Err(Error::BuildAssertion("redundant equation in LP basis".into()));
            }
            self.ftran(found);
            let theta = self.yb[slot] / self.ws_dir[slot];
            self.pivot_ws(slot, found, theta);
        }
        Ok(())
    }
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Maximize `c.z` subject to `G z <= h` and `A z = a` (dense inputs, `z` free).
///
/// Equalities become paired inequalities. Statuses distinguish unbounded from
/// infeasible problems.
pub fn solve_lp(
    c: &[f64],
    g: &[Vec<f64>],
    h: &[f64],
    a_eq: &[Vec<f64>],
    b_eq: &[f64],
) -> Result<LpSolution, Error> {
    let n = c.len();
    if g.len() != h.len() || a_eq.len() != b_eq.len() {
        return Err(Error::DimensionMismatch("constraint rows vs right-hand sides".into()));
    }
    let mut rows = Vec::with_capacity(g.len() + 2 * a_eq.len());
    let dense_row = |coeffs: &[f64], rhs: f64, flip: bool| -> Result<SparseRow, Error> {
        if coeffs.len() != n {
            return Err(Error::DimensionMismatch("constraint width vs objective".into()));
        }
        let s = if flip { -1.0 } else { 1.0 };
        let idx: Vec<u32> = (0..n as u32).collect();
        let val: Vec<f64> = coeffs.iter().map(|v| s * v).collect();
        Ok(SparseRow::new(idx, val, s * rhs))
    };
    for (row, &rhs) in g.iter().zip(h) {
        rows.push(dense_row(row, rhs, false)?);
    }
    for (row, &rhs) in a_eq.iter().zip(b_eq) {
        rows.push(dense_row(row, rhs, false)?);
        rows.push(dense_row(row, rhs, true)?);
    }
    let mut engine = LpEngine::new(n, rows);
    engine.maximize(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn max_z_below_one() {
        let sol = solve_lp(&[1.0], &[vec![1.0]], &[1.0], &[], &[]).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 1.0).abs() < 1e-9);
        assert!((sol.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn componentwise_box() {
        let sol = solve_lp(
            &[1.0, 1.0],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[1.0, 2.0],
            &[],
            &[],
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_bounds() {
        // max z1 with z1 + z2 = 1, z >= -5 componentwise (as -z <= 5)
        let sol = solve_lp(
            &[1.0, 0.0],
            &[vec![-1.0, 0.0], vec![0.0, -1.0]],
            &[5.0, 5.0],
            &[vec![1.0, 1.0]],
            &[1.0],
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 6.0).abs() < 1e-8);
        assert!((sol.x[0] + sol.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn unbounded_detected() {
        let sol = solve_lp(&[1.0], &[vec![-1.0]], &[0.0], &[], &[]).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_detected() {
        // z <= 0 and -z <= -1
        let sol = solve_lp(&[1.0], &[vec![1.0], vec![-1.0]], &[0.0, -1.0], &[], &[]).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    /// Brute-force vertex enumeration oracle for dense 2-D/3-D LPs.
    fn vertex_oracle(c: &[f64], g: &[Vec<f64>], h: &[f64]) -> Option<f64> {
        let n = c.len();
        let m = g.len();
        let mut best: Option<f64> = None;
        let idxs: Vec<usize> = (0..m).collect();
        // all n-subsets
        fn combos(v: &[usize], k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            if v.len() < k {
                return vec![];
            }
            let mut out = Vec::new();
            for (i, &x) in v.iter().enumerate() {
                for mut rest in combos(&v[i + 1..], k - 1) {
                    rest.insert(0, x);
                    out.push(rest);
                }
            }
            out
        }
        for sub in combos(&idxs, n) {
            // solve g_sub z = h_sub
            let mut a = nalgebra::DMatrix::zeros(n, n);
            let mut b = nalgebra::DVector::zeros(n);
            for (r, &i) in sub.iter().enumerate() {
                for cidx in 0..n {
                    a[(r, cidx)] = g[i][cidx];
                }
                b[r] = h[i];
            }
            let Some(sol) = a.lu().solve(&b) else { continue };
            let feasible = g
                .iter()
                .zip(h)
                .all(|(row, &rhs)| row.iter().zip(sol.iter()).map(|(a, b)| a * b).sum::<f64>() <= rhs + 1e-7);
            if feasible {
                let val: f64 = c.iter().zip(sol.iter()).map(|(a, b)| a * b).sum();
                best = Some(best.map_or(val, |v: f64| v.max(val)));
            }
        }
        best
    }

    #[test]
    fn random_lp_matches_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut solved = 0;
        for _ in 0..120 {
            let n = rng.random_range(2..4usize);
            let m = rng.random_range(n + 1..7usize);
            let mut g: Vec<Vec<f64>> = Vec::new();
            let mut h = Vec::new();
            // random rows plus a box to keep things bounded
            for _ in 0..m {
                g.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
                h.push(rng.random_range(0.2..1.5));
            }
            for i in 0..n {
                let mut row = vec![0.0; n];
                row[i] = 1.0;
                g.push(row.clone());
                h.push(2.0);
                row[i] = -1.0;
                g.push(row);
                h.push(2.0);
            }
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sol = solve_lp(&c, &g, &h, &[], &[]).unwrap();
            if sol.status != LpStatus::Optimal {
                continue;
            }
            let oracle = vertex_oracle(&c, &g, &h).expect("bounded feasible");
            assert!(
                (sol.value - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()),
                "lp {} oracle {}",
                sol.value,
                oracle
            );
            solved += 1;
        }
        assert!(solved > 80);
    }

    #[test]
    fn warm_restart_matches_cold() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        // fixed random polytope, many objectives
        let n = 4;
        let mut rows = Vec::new();
        for _ in 0..40 {
            let idx: Vec<u32> = (0..n as u32).collect();
            let val: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            rows.push(SparseRow::new(idx, val, rng.random_range(0.5..2.0)));
        }
        for i in 0..n as u32 {
            rows.push(SparseRow::new(vec![i], vec![1.0], 3.0));
            rows.push(SparseRow::new(vec![i], vec![-1.0], 3.0));
        }
        let mut warm = LpEngine::new(n, rows.clone());
        for _ in 0..30 {
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let ws = warm.maximize(&c).unwrap();
            let mut cold = LpEngine::new(n, rows.clone());
            let cs = cold.maximize(&c).unwrap();
            assert_eq!(ws.status, LpStatus::Optimal);
            assert!((ws.value - cs.value).abs() <= 1e-8 * (1.0 + cs.value.abs()));
        }
    }
}
