//! Minimization of `b^t Q b + q^t b + sum_k |l_k^t b + c_k|` subject to an
//! optional affine constraint `B b = b0`.
//!
//! Two production paths: a FISTA sweep on the box-constrained dual when `Q`
//! is diagonal with positive entries (the shape every trace-norm instance
//! assembles to), and a primal-dual splitting for general positive
//! semidefinite `Q`. An exact finite enumeration of the KKT sign patterns
//! serves as the oracle for small dimensions.

use crate::lp::SparseRow;
use crate::Error;
use nalgebra::{DMatrix, DVector};

/// One absolute-value term `|sum val[k] * beta[idx[k]] + c|`.
#[derive(Clone, Debug)]
pub struct L1Term {
    pub idx: Vec<u32>,
    pub val: Vec<f64>,
    pub c: f64,
}

impl L1Term {
    pub fn eval(&self, beta: &[f64]) -> f64 {
        let mut s = self.c;
        for (k, &i) in self.idx.iter().enumerate() {
            s += self.val[k] * beta[i as usize];
        }
        s
    }

    fn to_sparse_row(&self) -> SparseRow {
        SparseRow::new(self.idx.clone(), self.val.clone(), -self.c)
    }
}

/// Quadratic part of the objective.
#[derive(Clone, Debug)]
pub enum Quad {
    /// `sum d_i beta_i^2` with `d_i >= 0`.
    Diag(Vec<f64>),
    /// Full symmetric PSD matrix.
    Dense(DMatrix<f64>),
}

impl Quad {
    pub fn dim(&self) -> usize {
        match self {
            Quad::Diag(d) => d.len(),
            Quad::Dense(m) => m.nrows(),
        }
    }

    pub fn quad_form(&self, beta: &[f64]) -> f64 {
        match self {
            Quad::Diag(d) => d.iter().zip(beta).map(|(di, bi)| di * bi * bi).sum(),
            Quad::Dense(m) => {
                let v = DVector::from_column_slice(beta);
                (v.transpose() * m * &v)[(0, 0)]
            }
        }
    }

    /// `out += 2 Q beta` (gradient of the quadratic form).
    pub fn add_twice_mul(&self, beta: &[f64], out: &mut [f64]) {
        match self {
            Quad::Diag(d) => {
                for i in 0..d.len() {
                    out[i] += 2.0 * d[i] * beta[i];
                }
            }
            Quad::Dense(m) => {
                for r in 0..m.nrows() {
                    let mut s = 0.0;
                    for c in 0..m.ncols() {
                        s += m[(r, c)] * beta[c];
                    }
                    out[r] += 2.0 * s;
                }
            }
        }
    }

    fn strictly_positive_diag(&self) -> Option<&[f64]> {
        match self {
            Quad::Diag(d) if d.iter().all(|&v| v > 0.0) => Some(d),
            _ => None,
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Quad::Diag(d) => DMatrix::from_diagonal(&DVector::from_column_slice(d)),
            Quad::Dense(m) => m.clone(),
        }
    }
}

/// `minimize beta^t Q beta + lin^t beta + sum |l1 terms| + offset`
/// `subject to constraint.0 * beta = constraint.1` when present.
#[derive(Clone, Debug)]
pub struct QuadL1Problem {
    pub quad: Quad,
    pub lin: Vec<f64>,
    pub terms: Vec<L1Term>,
    pub constraint: Option<(DMatrix<f64>, DVector<f64>)>,
    pub offset: f64,
}

impl QuadL1Problem {
    pub fn dim(&self) -> usize {
        self.quad.dim()
    }

    pub fn unconstrained(quad: Quad, lin: Vec<f64>, terms: Vec<L1Term>) -> Self {
        assert_eq!(quad.dim(), lin.len());
        QuadL1Problem { quad, lin, terms, constraint: None, offset: 0.0 }
    }

    pub fn objective(&self, beta: &[f64]) -> f64 {
        let quad = self.quad.quad_form(beta);
        let lin: f64 = self.lin.iter().zip(beta).map(|(a, b)| a * b).sum();
        let l1: f64 = self.terms.iter().map(|t| t.eval(beta).abs()).sum();
        quad + lin + l1 + self.offset
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    /// Iteration cap reached; the solution carries the best iterate found.
    CapExceeded,
}

#[derive(Clone, Debug)]
pub struct QpSolution {
    pub beta: Vec<f64>,
    pub objective: f64,
    pub status: QpStatus,
    /// Relative optimality residual (duality gap where available).
    pub kkt_residual: f64,
}

/// Solver knobs; defaults match the crate-wide configuration.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-6, max_iter: 100_000 }
    }
}

/// Parametrize the affine constraint away: `beta = beta0 + N z` with `N` an
/// orthonormal basis of the null space of `B`. Returns the reduced problem
/// and the affine reconstruction `(beta0, N)`.
pub fn eliminate_affine(
    problem: &QuadL1Problem,
) -> Result<(QuadL1Problem, DVector<f64>, DMatrix<f64>), Error> {
    let Some((b_mat, b_rhs)) = &problem.constraint else {
        return Err(Error::DimensionMismatch("no affine constraint to eliminate".into()));
    };
    let d = problem.dim();
    let svd = b_mat.clone().svd(true, true);
    let tol = 1e-12 * svd.singular_values.max().max(1.0);
    let beta0 = svd.solve(b_rhs, tol).map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    let resid = (b_mat * &beta0 - b_rhs).norm();
    if resid > 1e-8 * (1.0 + b_rhs.norm()) {
        return Err(Error::InfeasibleConstraint);
    }
    // null-space basis from the spectral decomposition of B^t B
    let gram = b_mat.transpose() * b_mat;
    let eig = gram.symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v));
    let eig_tol = 1e-12 * max_eig.max(1e-300);
    let null_cols: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] <= eig_tol).collect();
    let null_dim = null_cols.len();
    let mut n_mat = DMatrix::zeros(d, null_dim);
    for (out_col, &src) in null_cols.iter().enumerate() {
        for i in 0..d {
            n_mat[(i, out_col)] = eig.eigenvectors[(i, src)];
        }
    }

    let q_dense = problem.quad.to_dense();
    let q_red = n_mat.transpose() * &q_dense * &n_mat;
    let lin_vec = DVector::from_column_slice(&problem.lin);
    let lin_red = n_mat.transpose() * (2.0 * &q_dense * &beta0 + &lin_vec);
    let offset = problem.offset
        + (beta0.transpose() * &q_dense * &beta0)[(0, 0)]
        + lin_vec.dot(&beta0);

    let terms_red: Vec<L1Term> = problem
        .terms
        .iter()
        .map(|t| {
            let mut dense = vec![0.0; d];
            for (k, &i) in t.idx.iter().enumerate() {
                dense[i as usize] = t.val[k];
            }
            let row = DVector::from_column_slice(&dense);
            let new_row = n_mat.transpose() * &row;
            let c = t.c + row.dot(&beta0);
            L1Term {
                idx: (0..null_dim as u32).collect(),
                val: new_row.iter().cloned().collect(),
                c,
            }
        })
        .collect();

    let reduced = QuadL1Problem {
        quad: Quad::Dense(q_red),
        lin: lin_red.iter().cloned().collect(),
        terms: terms_red,
        constraint: None,
        offset,
    };
    Ok((reduced, beta0, n_mat))
}

/// Iterative solve of the full problem. Dispatches on the structure of `Q`.
pub fn solve_quad_l1(problem: &QuadL1Problem, opts: SolveOptions) -> Result<QpSolution, Error> {
    if problem.constraint.is_some() {
        let (reduced, beta0, n_mat) = match eliminate_affine(problem) {
            Ok(r) => r,
            Err(Error::InfeasibleConstraint) => {
                return Ok(QpSolution {
                    beta: vec![],
                    objective: f64::INFINITY,
                    status: QpStatus::Infeasible,
                    kkt_residual: f64::INFINITY,
                })
            }
            Err(e) => return Err(e),
        };
        let sol = solve_quad_l1(&reduced, opts)?;
        let z = DVector::from_column_slice(&sol.beta);
        let beta = &beta0 + &n_mat * z;
        return Ok(QpSolution { beta: beta.iter().cloned().collect(), ..sol });
    }
    let d = problem.dim();
    if d == 0 {
        let objective = problem.offset + problem.terms.iter().map(|t| t.c.abs()).sum::<f64>();
        return Ok(QpSolution { beta: vec![], objective, status: QpStatus::Optimal, kkt_residual: 0.0 });
    }
    if let Some(diag) = problem.quad.strictly_positive_diag() {
        Ok(solve_dual_fista(problem, diag, opts))
    } else {
        Ok(solve_primal_dual(problem, opts))
    }
}

/// FISTA on the dual box problem; valid when `Q = diag(d) > 0`.
///
/// Dual: `maximize c^t y - (lin + L^t y)^t D^-1 (lin + L^t y) / 4` over
/// `|y_k| <= 1`, with primal recovery `beta(y) = -D^-1 (lin + L^t y) / 2`.
/// The duality gap gives a rigorous stopping rule.
fn solve_dual_fista(problem: &QuadL1Problem, diag: &[f64], opts: SolveOptions) -> QpSolution {
    let d = problem.dim();
    let m = problem.terms.len();
    let mut y = vec![0.0f64; m];
    let mut y_prev = y.clone();
    let mut t_acc = 1.0f64;

    // Lipschitz constant of the dual gradient via power iteration on
    // y -> L D^-1 L^t y / 2.
    let mut v = vec![1.0f64; m];
    let mut lip = 0.0;
    for _ in 0..40 {
        let mut bz = vec![0.0f64; d];
        add_lt_y(problem, &v, &mut bz);
        for i in 0..d {
            bz[i] /= diag[i];
        }
        let mut w = vec![0.0f64; m];
        for (k, t) in problem.terms.iter().enumerate() {
            let mut s = 0.0;
            for (j, &i) in t.idx.iter().enumerate() {
                s += t.val[j] * bz[i as usize];
            }
            w[k] = 0.5 * s;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-300 {
            lip = 0.0;
            break;
        }
        lip = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        let inv = 1.0 / norm;
        for k in 0..m {
            v[k] = w[k] * inv;
        }
    }
    let step = if lip > 0.0 { 1.0 / (1.05 * lip) } else { 1.0 };

    let mut beta = vec![0.0f64; d];
    let mut best = QpSolution {
        beta: beta.clone(),
        objective: f64::INFINITY,
        status: QpStatus::CapExceeded,
        kkt_residual: f64::INFINITY,
    };
    let mut yk = y.clone();
    for iter in 0..opts.max_iter {
        // gradient of the (negated, minimized) dual at the extrapolated point
        primal_from_dual(problem, diag, &yk, &mut beta);
        // grad of dual objective: c + L beta
        let mut new_y = yk.clone();
        for (k, t) in problem.terms.iter().enumerate() {
            let g = t.eval(&beta);
            new_y[k] = (yk[k] + step * g).clamp(-1.0, 1.0);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_acc * t_acc).sqrt());
        let momentum = (t_acc - 1.0) / t_next;
        for k in 0..m {
            let delta = new_y[k] - y[k];
            yk[k] = (new_y[k] + momentum * delta).clamp(-1.0, 1.0);
        }
        y_prev.copy_from_slice(&y);
        y.copy_from_slice(&new_y);
        t_acc = t_next;

        if iter % 8 == 0 || iter + 1 == opts.max_iter {
            primal_from_dual(problem, diag, &y, &mut beta);
            let primal = problem.objective(&beta);
            let dual = dual_value(problem, diag, &y);
            let gap = primal - dual;
            let rel = gap / (1.0 + primal.abs());
            if primal < best.objective {
                best.objective = primal;
                best.beta.copy_from_slice(&beta);
                best.kkt_residual = rel;
            }
            if rel <= opts.tol {
                best.status = QpStatus::Optimal;
                best.objective = primal;
                best.beta.copy_from_slice(&beta);
                best.kkt_residual = rel;
                return best;
            }
        }
    }
    best
}

fn add_lt_y(problem: &QuadL1Problem, y: &[f64], out: &mut [f64]) {
    for (k, t) in problem.terms.iter().enumerate() {
        let yk = y[k];
        if yk == 0.0 {
            continue;
        }
        for (j, &i) in t.idx.iter().enumerate() {
            out[i as usize] += yk * t.val[j];
        }
    }
}

fn primal_from_dual(problem: &QuadL1Problem, diag: &[f64], y: &[f64], beta: &mut [f64]) {
    let d = diag.len();
    let mut z = problem.lin.clone();
    add_lt_y(problem, y, &mut z);
    for i in 0..d {
        beta[i] = -0.5 * z[i] / diag[i];
    }
}

fn dual_value(problem: &QuadL1Problem, diag: &[f64], y: &[f64]) -> f64 {
    let d = diag.len();
    let mut z = problem.lin.clone();
    add_lt_y(problem, y, &mut z);
    let mut quad = 0.0;
    for i in 0..d {
        quad += 0.25 * z[i] * z[i] / diag[i];
    }
    let cy: f64 = problem.terms.iter().zip(y).map(|(t, &yk)| t.c * yk).sum();
    cy - quad + problem.offset
}

/// Primal-dual splitting (Chambolle-Pock) for general PSD `Q`; proximal step
/// on the l1 term through its box dual.
fn solve_primal_dual(problem: &QuadL1Problem, opts: SolveOptions) -> QpSolution {
    let d = problem.dim();
    let m = problem.terms.len();
    // operator norm of L via power iteration
    let mut v = vec![1.0f64; d];
    let mut lnorm: f64 = 0.0;
    for _ in 0..40 {
        let mut w = vec![0.0f64; m];
        for (k, t) in problem.terms.iter().enumerate() {
            let mut s = 0.0;
            for (j, &i) in t.idx.iter().enumerate() {
                s += t.val[j] * v[i as usize];
            }
            w[k] = s;
        }
        let mut back = vec![0.0f64; d];
        add_lt_y(problem, &w, &mut back);
        let n = back.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n <= 1e-300 {
            lnorm = 0.0;
            break;
        }
        lnorm = n.sqrt();
        for i in 0..d {
            v[i] = back[i] / n;
        }
    }
    let lnorm = lnorm.max(1e-9);
    let tau = 0.95 / lnorm;
    let sigma = 0.95 / lnorm;

    // prox of g(x) = x^t Q x + lin^t x is (I + 2 tau Q)^-1 (x - tau lin)
    let mut iplus = problem.quad.to_dense() * (2.0 * tau);
    for i in 0..d {
        iplus[(i, i)] += 1.0;
    }
    let chol = iplus.cholesky().expect("I + 2 tau Q is positive definite");

    let mut x = DVector::zeros(d);
    let mut x_bar = x.clone();
    let mut y = vec![0.0f64; m];
    let lin = DVector::from_column_slice(&problem.lin);

    let mut best = QpSolution {
        beta: vec![0.0; d],
        objective: problem.objective(&vec![0.0; d]),
        status: QpStatus::CapExceeded,
        kkt_residual: f64::INFINITY,
    };
    let mut last = f64::INFINITY;
    let mut stall = 0usize;
    for iter in 0..opts.max_iter {
        for (k, t) in problem.terms.iter().enumerate() {
            let mut s = t.c;
            for (j, &i) in t.idx.iter().enumerate() {
                s += t.val[j] * x_bar[i as usize];
            }
            y[k] = (y[k] + sigma * s).clamp(-1.0, 1.0);
        }
        let mut rhs = x.clone();
        for (k, t) in problem.terms.iter().enumerate() {
            let yk = y[k];
            if yk == 0.0 {
                continue;
            }
            for (j, &i) in t.idx.iter().enumerate() {
                rhs[i as usize] -= tau * yk * t.val[j];
            }
        }
        rhs -= tau * &lin;
        let x_new = chol.solve(&rhs);
        for i in 0..d {
            x_bar[i] = 2.0 * x_new[i] - x[i];
        }
        x = x_new;

        if iter % 16 == 0 || iter + 1 == opts.max_iter {
            let xs: Vec<f64> = x.iter().cloned().collect();
            let obj = problem.objective(&xs);
            if obj < best.objective {
                best.objective = obj;
                best.beta = xs;
            }
            let rel = (last - obj).abs() / (1.0 + obj.abs());
            best.kkt_residual = rel;
            if rel < opts.tol * 1e-2 {
                stall += 1;
                if stall >= 6 {
                    best.status = QpStatus::Optimal;
                    return best;
                }
            } else {
                stall = 0;
            }
            last = obj;
            if !obj.is_finite() {
                // divergence guard for unbounded problems
                best.status = QpStatus::CapExceeded;
                best.kkt_residual = f64::INFINITY;
                return best;
            }
        }
    }
    best
}

/// Exact global minimizer by enumerating the sign pattern of every
/// absolute-value term (the positive/negative/zero split of the augmented
/// KKT system), solving the resulting linear stationarity system, and
/// keeping consistent candidates.
pub fn solve_kkt_enumeration(problem: &QuadL1Problem, d_max: usize) -> Result<QpSolution, Error> {
    let d = problem.dim();
    if d > d_max {
        return Err(Error::EnumerationTooLarge(d, d_max));
    }
    let m = problem.terms.len();
    if m > 12 {
        return Err(Error::EnumerationTooLarge(m, 12));
    }
    let (n_eq, b_mat, b_rhs) = match &problem.constraint {
        Some((bm, bv)) => (bm.nrows(), Some(bm), Some(bv)),
        None => (0, None, None),
    };
    if let (Some(bm), Some(bv)) = (b_mat, b_rhs) {
        // infeasibility check
        let svd = bm.clone().svd(true, true);
        let tol = 1e-12 * svd.singular_values.max().max(1.0);
        if let Ok(b0) = svd.solve(bv, tol) {
            if (bm * &b0 - bv).norm() > 1e-8 * (1.0 + bv.norm()) {
                return Ok(QpSolution {
                    beta: vec![],
                    objective: f64::INFINITY,
                    status: QpStatus::Infeasible,
                    kkt_residual: f64::INFINITY,
                });
            }
        }
    }

    let q_dense = problem.quad.to_dense();
    let mut best: Option<QpSolution> = None;
    let mut dense_rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for t in &problem.terms {
        let mut row = vec![0.0; d];
        for (k, &i) in t.idx.iter().enumerate() {
            row[i as usize] = t.val[k];
        }
        dense_rows.push(row);
    }

    let mut pattern = vec![0i8; m];
    loop {
        // assemble the stationarity system for this pattern
        let zeros: Vec<usize> = (0..m).filter(|&k| pattern[k] == 0).collect();
        let z = zeros.len();
        let nsys = d + z + n_eq;
        let mut a = DMatrix::zeros(nsys, nsys);
        let mut rhs = DVector::zeros(nsys);
        // rows 0..d: 2 Q beta + sum_{strict} s_k l_k + sum_{zero} gamma_k l_k + B^t lambda = -lin
        for r in 0..d {
            for c in 0..d {
                a[(r, c)] = 2.0 * q_dense[(r, c)];
            }
            for (zi, &k) in zeros.iter().enumerate() {
                a[(r, d + zi)] = dense_rows[k][r];
            }
            if let Some(bm) = b_mat {
                for e in 0..n_eq {
                    a[(r, d + z + e)] = bm[(e, r)];
                }
            }
            let mut s = -problem.lin[r];
            for k in 0..m {
                if pattern[k] != 0 {
                    s -= pattern[k] as f64 * dense_rows[k][r];
                }
            }
            rhs[r] = s;
        }
        // rows d..d+z: zero rows are exactly zero
        for (zi, &k) in zeros.iter().enumerate() {
            for c in 0..d {
                a[(d + zi, c)] = dense_rows[k][c];
            }
            rhs[d + zi] = -problem.terms[k].c;
        }
        // rows d+z..: affine constraint
        if let (Some(bm), Some(bv)) = (b_mat, b_rhs) {
            for e in 0..n_eq {
                for c in 0..d {
                    a[(d + z + e, c)] = bm[(e, c)];
                }
                rhs[d + z + e] = bv[e];
            }
        }

        let svd = a.clone().svd(true, true);
        let tol = 1e-11 * svd.singular_values.max().max(1.0);
        if let Ok(sol) = svd.solve(&rhs, tol) {
            if (a * &sol - &rhs).norm() <= 1e-7 * (1.0 + rhs.norm()) {
                let beta: Vec<f64> = (0..d).map(|i| sol[i]).collect();
                let mut ok = true;
                for k in 0..m {
                    let v = problem.terms[k].eval(&beta);
                    if pattern[k] != 0 {
                        if (pattern[k] as f64) * v < -1e-8 {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    for (zi, _) in zeros.iter().enumerate() {
                        let gamma = sol[d + zi];
                        if gamma.abs() > 1.0 + 1e-8 {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    let objective = problem.objective(&beta);
                    if best.as_ref().map_or(true, |b| objective < b.objective) {
                        best = Some(QpSolution {
                            beta,
                            objective,
                            status: QpStatus::Optimal,
                            kkt_residual: 0.0,
                        });
                    }
                }
            }
        }

        // next ternary pattern
        let mut carry = 0;
        loop {
            if carry == m {
                break;
            }
            pattern[carry] += 1;
            if pattern[carry] == 2 {
                pattern[carry] = -1;
                break;
            }
            if pattern[carry] == 0 {
                carry += 1;
            } else {
                break;
            }
        }
        if carry == m {
            break;
        }
    }

    best.ok_or(Error::LpUnbounded)
}
