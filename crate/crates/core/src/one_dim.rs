//! One-dimensional bounded-depth extension operators.
//!
//! Base case (at most three samples): for nonnegative data, minimize the
//! summed one-dimensional Whitney functionals over derivative choices, lift
//! each node to the globally nonnegative quadratic given by its excess, and
//! blend consecutive quadratics with plateaued C^2 ramps; for signed data,
//! minimize the cross-term quadratic form (a linear map of the values) and
//! blend the affine node polynomials the same way.
//!
//! More samples are handled by three-node windows combined through a C^2
//! partition of unity whose ramps live strictly inside the gaps, so a query
//! between two nodes depends on at most four samples.

use crate::jet::Jet1D2;
use crate::qp::{solve_quad_l1, L1Term, Quad, QuadL1Problem, SolveOptions};
use crate::Error;

/// Strictly increasing abscissas with sample values.
#[derive(Clone, Debug)]
pub struct SortedSamples {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
}

impl SortedSamples {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self, Error> {
        if t.len() != v.len() {
            return Err(Error::DimensionMismatch("abscissas vs values".into()));
        }
        if t.iter().any(|x| !x.is_finite()) || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinitePoint);
        }
        if t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse("abscissas must be strictly increasing".into()));
        }
        Ok(SortedSamples { t, v })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// C^2 quintic smoothstep on [0, 1] as a two-jet in the raw parameter.
fn smoothstep(tau: f64) -> (f64, f64, f64) {
    if tau <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if tau >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let t2 = tau * tau;
        let t3 = t2 * tau;
        (
            t3 * (10.0 - 15.0 * tau + 6.0 * t2),
            30.0 * t2 * (1.0 - tau) * (1.0 - tau),
            60.0 * tau * (1.0 - 3.0 * tau + 2.0 * t2),
        )
    }
}

/// Jet of the 0-to-1 ramp supported on `[a, b]`, evaluated at `t`.
pub fn ramp_jet(a: f64, b: f64, t: f64) -> Jet1D2 {
    debug_assert!(b > a);
    let w = b - a;
    let (v, d1, d2) = smoothstep((t - a) / w);
    Jet1D2::new(t, v, d1 / w, d2 / (w * w))
}

/// Transition ramp occupying the middle half of the gap `[lo, hi]`.
fn gap_ramp(lo: f64, hi: f64, t: f64) -> Jet1D2 {
    let h = hi - lo;
    ramp_jet(lo + 0.25 * h, hi - 0.25 * h, t)
}

/// Indices of the samples a jet query at `t` may depend on: the whole set
/// when there are at most three samples, the three nearest on the flanks,
/// and the bracketing quadruple in the interior.
pub fn depth_set_1d(samples: &SortedSamples, t: f64) -> Vec<usize> {
    let n = samples.len();
    if n <= 3 {
        return (0..n).collect();
    }
    let ts = &samples.t;
    if t <= ts[1] {
        return vec![0, 1, 2];
    }
    if t >= ts[n - 2] {
        return vec![n - 3, n - 2, n - 1];
    }
    // locate j with ts[j] <= t < ts[j+1]; here 1 <= j <= n - 3
    let j = match ts.partition_point(|&x| x <= t) {
        p => p - 1,
    };
    vec![j - 1, j, j + 1, j + 2]
}

/// Per-node affine polynomials minimizing the cross-term quadratic form;
/// exactly linear in the values.
pub fn linear_node_polys(t: &[f64], v: &[f64]) -> Vec<Jet1D2> {
    let n = t.len();
    debug_assert!(n <= 3 && n == v.len());
    if n == 0 {
        return vec![];
    }
    if n == 1 {
        return vec![Jet1D2::new(t[0], v[0], 0.0, 0.0)];
    }
    // minimize sum over ordered pairs of
    //   (v_i - v_j - g_j (t_i - t_j))^2 / (t_i - t_j)^4 + (g_i - g_j)^2 / (t_i - t_j)^2
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = t[i] - t[j];
            let d2 = d * d;
            // value term differentiates in g_j
            a[(j, j)] += 2.0 / d2;
            b[j] += 2.0 * (v[i] - v[j]) / (d2 * d);
            // gradient term differentiates in both
            a[(i, i)] += 2.0 / d2;
            a[(i, j)] -= 2.0 / d2;
        }
    }
    let g = a.lu().solve(&b).expect("cross-term form is positive definite");
    (0..n).map(|i| Jet1D2::new(t[i], v[i], g[i], 0.0)).collect()
}

/// Per-node nonnegative quadratics from the approximate minimizer of the
/// summed Whitney functionals over the affine set of the data.
pub fn nonneg_node_polys(t: &[f64], v: &[f64]) -> Result<Vec<Jet1D2>, Error> {
    let n = t.len();
    debug_assert!(n <= 3 && n == v.len());
    if v.iter().any(|&x| x < 0.0) {
        return Err(Error::NegativeData);
    }
    // free derivative variables at nodes with positive value
    let free: Vec<usize> = (0..n).filter(|&i| v[i] > 0.0).collect();
    let var_of = |i: usize| free.iter().position(|&f| f == i);
    let d = free.len();
    let mut terms: Vec<L1Term> = Vec::new();
    for (slot, &i) in free.iter().enumerate() {
        let _ = i;
        terms.push(L1Term { idx: vec![slot as u32], val: vec![1.0], c: 0.0 });
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dt = t[i] - t[j];
            let d2 = dt * dt;
            // |v_i - v_j - g_j dt| / dt^2
            match var_of(j) {
                Some(slot) => terms.push(L1Term {
                    idx: vec![slot as u32],
                    val: vec![-dt / d2],
                    c: (v[i] - v[j]) / d2,
                }),
                None => terms.push(L1Term { idx: vec![], val: vec![], c: (v[i] - v[j]) / d2 }),
            }
            // |g_i - g_j| / |dt|
            let mut idx = Vec::new();
            let mut val = Vec::new();
            if let Some(si) = var_of(i) {
                idx.push(si as u32);
                val.push(1.0 / dt.abs());
            }
            if let Some(sj) = var_of(j) {
                idx.push(sj as u32);
                val.push(-1.0 / dt.abs());
            }
            if !idx.is_empty() {
                terms.push(L1Term { idx, val, c: 0.0 });
            }
        }
    }
    let quad = Quad::Diag(free.iter().map(|&i| 1.0 / v[i]).collect());
    let problem = QuadL1Problem::unconstrained(quad, vec![0.0; d], terms);
    let sol = solve_quad_l1(&problem, SolveOptions { tol: 1e-10, max_iter: 50_000 })?;
    let mut polys = Vec::with_capacity(n);
    for i in 0..n {
        let g = var_of(i).map_or(0.0, |s| sol.beta[s]);
        let k = if v[i] > 0.0 { g * g / (4.0 * v[i]) } else { 0.0 };
        polys.push(Jet1D2::new(t[i], v[i], g, 2.0 * k));
    }
    Ok(polys)
}

/// Jet of a quadratic node polynomial (stored as a jet at its node) at `s`.
fn poly_jet_at(p: &Jet1D2, s: f64) -> Jet1D2 {
    let d = s - p.base;
    Jet1D2::new(s, p.value + p.d1 * d + 0.5 * p.d2 * d * d, p.d1 + p.d2 * d, p.d2)
}

/// Blend node polynomials with plateaued ramps; constant continuation of the
/// edge polynomials outside the node range.
pub fn blend_jet(t: &[f64], polys: &[Jet1D2], s: f64) -> Jet1D2 {
    let n = t.len();
    debug_assert_eq!(n, polys.len());
    debug_assert!(n >= 1);
    if n == 1 || s <= t[0] {
        return poly_jet_at(&polys[0], s);
    }
    if s >= t[n - 1] {
        return poly_jet_at(&polys[n - 1], s);
    }
    let j = t.partition_point(|&x| x <= s) - 1;
    let j = j.min(n - 2);
    let w = gap_ramp(t[j], t[j + 1], s);
    if w.value == 0.0 && w.d1 == 0.0 {
        return poly_jet_at(&polys[j], s);
    }
    if w.value == 1.0 && w.d1 == 0.0 {
        return poly_jet_at(&polys[j + 1], s);
    }
    let one_minus = Jet1D2::new(s, 1.0 - w.value, -w.d1, -w.d2);
    let a = one_minus.multiply(&poly_jet_at(&polys[j], s));
    let b = w.multiply(&poly_jet_at(&polys[j + 1], s));
    a.add(&b)
}

/// Windows active at `s` with their partition-of-unity jets.
/// Window `w` consists of nodes `{w, w+1, w+2}`.
pub fn active_windows(t: &[f64], s: f64) -> Vec<(usize, Jet1D2)> {
    let n = t.len();
    debug_assert!(n >= 4);
    let last = n - 3; // last window index
    if s <= t[1] {
        return vec![(0, Jet1D2::new(s, 1.0, 0.0, 0.0))];
    }
    if s >= t[n - 2] {
        return vec![(last, Jet1D2::new(s, 1.0, 0.0, 0.0))];
    }
    let j = (t.partition_point(|&x| x <= s) - 1).min(n - 3);
    // in gap (t_j, t_{j+1}) with 1 <= j <= n-3: windows j-1 and j blend
    let r = gap_ramp(t[j], t[j + 1], s);
    if r.value == 0.0 && r.d1 == 0.0 {
        return vec![(j - 1, Jet1D2::new(s, 1.0, 0.0, 0.0))];
    }
    if r.value == 1.0 && r.d1 == 0.0 {
        return vec![(j, Jet1D2::new(s, 1.0, 0.0, 0.0))];
    }
    vec![
        (j - 1, Jet1D2::new(s, 1.0 - r.value, -r.d1, -r.d2)),
        (j, r),
    ]
}

fn windowed_jet(
    samples: &SortedSamples,
    s: f64,
    node_polys: &mut dyn FnMut(&[f64], &[f64]) -> Result<Vec<Jet1D2>, Error>,
) -> Result<Jet1D2, Error> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::EmptyField);
    }
    if n <= 3 {
        let polys = node_polys(&samples.t, &samples.v)?;
        return Ok(blend_jet(&samples.t, &polys, s));
    }
    let mut out = Jet1D2::zero(s);
    for (w, theta) in active_windows(&samples.t, s) {
        let ts = &samples.t[w..w + 3];
        let vs = &samples.v[w..w + 3];
        let polys = node_polys(ts, vs)?;
        let jet = blend_jet(ts, &polys, s);
        out = out.add(&theta.multiply(&jet));
    }
    Ok(out)
}

/// Two-jet at `s` of the nonnegative extension of the samples.
pub fn oned_nonneg_jet(samples: &SortedSamples, s: f64) -> Result<Jet1D2, Error> {
    windowed_jet(samples, s, &mut |t, v| nonneg_node_polys(t, v))
}

/// Two-jet at `s` of the linear (signed) extension of the samples.
pub fn oned_linear_jet(samples: &SortedSamples, s: f64) -> Result<Jet1D2, Error> {
    windowed_jet(samples, s, &mut |t, v| Ok(linear_node_polys(t, v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn samples(t: &[f64], v: &[f64]) -> SortedSamples {
        SortedSamples::new(t.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn depth_set_table() {
        let s = samples(&[0.0, 1.0], &[0.0, 0.0]);
        assert_eq!(depth_set_1d(&s, 55.0), vec![0, 1]);

        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let s = samples(&t, &vec![0.0; 10]);
        assert_eq!(depth_set_1d(&s, -3.0), vec![0, 1, 2]);
        assert_eq!(depth_set_1d(&s, 0.5), vec![0, 1, 2]);
        assert_eq!(depth_set_1d(&s, 8.6), vec![7, 8, 9]);
        assert_eq!(depth_set_1d(&s, 30.0), vec![7, 8, 9]);
        // interior bracketing quadruple: t between the 4th and 5th samples
        assert_eq!(depth_set_1d(&s, 3.5), vec![2, 3, 4, 5]);
    }

    #[test]
    fn base_nonneg_zero_and_constant() {
        let s = samples(&[0.0, 1.0, 2.0], &[0.0, 0.0, 0.0]);
        for q in [-1.0, 0.3, 1.5, 4.0] {
            let j = oned_nonneg_jet(&s, q).unwrap();
            assert_eq!(j.value, 0.0);
            assert_eq!(j.d1, 0.0);
        }
        let s = samples(&[0.5], &[1.0]);
        let j = oned_nonneg_jet(&s, 3.0).unwrap();
        assert_eq!((j.value, j.d1, j.d2), (1.0, 0.0, 0.0));
    }

    #[test]
    fn base_nonneg_interpolates_and_stays_nonnegative() {
        let s = samples(&[0.0, 1.0, 2.0], &[0.0, 1.0, 4.0]);
        for (i, &ti) in s.t.iter().enumerate() {
            let j = oned_nonneg_jet(&s, ti).unwrap();
            assert!((j.value - s.v[i]).abs() < 1e-12, "node {i}: {} vs {}", j.value, s.v[i]);
        }
        for k in 0..10_000 {
            let q = -1.0 + 4.0 * (k as f64) / 9_999.0;
            let j = oned_nonneg_jet(&s, q).unwrap();
            assert!(j.value >= -1e-12, "negative at {q}: {}", j.value);
        }
    }

    #[test]
    fn windowed_matches_base_for_three() {
        let s = samples(&[0.0, 0.7, 2.0], &[1.0, 0.2, 3.0]);
        let polys = nonneg_node_polys(&s.t, &s.v).unwrap();
        for q in [-0.5, 0.1, 0.9, 1.7, 2.5] {
            let a = oned_nonneg_jet(&s, q).unwrap();
            let b = blend_jet(&s.t, &polys, q);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn node_interpolation_many_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(401);
        let n = 20;
        let mut t: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t.dedup();
        let v: Vec<f64> = t.iter().map(|_| rng.random_range(0.0..3.0)).collect();
        let s = samples(&t, &v);
        let vmax = v.iter().fold(0.0f64, |a, &b| a.max(b));
        for (i, &ti) in t.iter().enumerate() {
            let j = oned_nonneg_jet(&s, ti).unwrap();
            assert!(
                (j.value - v[i]).abs() <= 1e-10 * (1.0 + vmax),
                "node {i}: {} vs {}",
                j.value,
                v[i]
            );
            let l = oned_linear_jet(&s, ti).unwrap();
            assert!((l.value - v[i]).abs() <= 1e-10 * (1.0 + vmax));
        }
        // nonnegativity on a fine grid
        for k in 0..100_000 {
            let q = -1.0 + 12.0 * (k as f64) / 99_999.0;
            let j = oned_nonneg_jet(&s, q).unwrap();
            assert!(j.value >= -1e-10 * (1.0 + vmax), "negative at {q}: {}", j.value);
        }
    }

    #[test]
    fn linear_operator_is_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(403);
        let t: Vec<f64> = (0..12).map(|i| i as f64 * 0.37).collect();
        for _ in 0..20 {
            let v: Vec<f64> = t.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
            let w: Vec<f64> = t.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
            let vw: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
            let q = rng.random_range(-1.0..6.0);
            let jv = oned_linear_jet(&samples(&t, &v), q).unwrap();
            let jw = oned_linear_jet(&samples(&t, &w), q).unwrap();
            let jvw = oned_linear_jet(&samples(&t, &vw), q).unwrap();
            assert!((jvw.value - jv.value - jw.value).abs() < 1e-10);
            assert!((jvw.d1 - jv.d1 - jw.d1).abs() < 1e-10);
            assert!((jvw.d2 - jv.d2 - jw.d2).abs() < 1e-9);
        }
        // zero data gives the zero jet
        let z = oned_linear_jet(&samples(&t, &vec![0.0; t.len()]), 1.23).unwrap();
        assert_eq!((z.value, z.d1, z.d2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn linear_operator_reproduces_affine() {
        let t: Vec<f64> = vec![-1.0, 0.25, 0.5, 1.75, 3.0];
        let (a, b) = (0.75, -0.3);
        let v: Vec<f64> = t.iter().map(|&x| a * x + b).collect();
        let s = samples(&t, &v);
        for q in [-2.0, -0.4, 0.3, 1.0, 2.2, 5.0] {
            let j = oned_linear_jet(&s, q).unwrap();
            assert!((j.value - (a * q + b)).abs() < 1e-12, "value at {q}");
            assert!((j.d1 - a).abs() < 1e-12);
            assert!(j.d2.abs() < 1e-12);
        }
    }

    /// Changing values outside the depth set leaves the jet bit-identical.
    #[test]
    fn locality_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(407);
        let t: Vec<f64> = (0..15).map(|i| i as f64 + 0.1 * (i as f64).sin()).collect();
        for _ in 0..50 {
            let v: Vec<f64> = t.iter().map(|_| rng.random_range(0.0..2.0)).collect();
            let q = rng.random_range(-2.0..16.0);
            let s = samples(&t, &v);
            let depth = depth_set_1d(&s, q);
            let j0 = oned_nonneg_jet(&s, q).unwrap();
            let l0 = oned_linear_jet(&s, q).unwrap();
            let mut v2 = v.clone();
            for i in 0..t.len() {
                if !depth.contains(&i) {
                    v2[i] = rng.random_range(0.0..2.0);
                }
            }
            let s2 = samples(&t, &v2);
            let j1 = oned_nonneg_jet(&s2, q).unwrap();
            let l1 = oned_linear_jet(&s2, q).unwrap();
            assert_eq!(j0, j1, "nonneg jet changed off-depth");
            assert_eq!(l0, l1, "linear jet changed off-depth");
        }
    }

    #[test]
    fn quadratic_data_exact_at_nodes() {
        let t = [0.0, 1.0, 2.0];
        let v: Vec<f64> = t.iter().map(|&x| x * x).collect();
        let s = samples(&t, &v);
        for (i, &ti) in t.iter().enumerate() {
            let j = oned_nonneg_jet(&s, ti).unwrap();
            assert!((j.value - v[i]).abs() < 1e-10);
        }
        for k in 0..10_000 {
            let q = -1.0 + 4.0 * (k as f64) / 9_999.0;
            assert!(oned_nonneg_jet(&s, q).unwrap().value >= -1e-10);
        }
    }

    #[test]
    fn negative_data_rejected() {
        let s = samples(&[0.0, 1.0], &[1.0, -0.5]);
        assert!(oned_nonneg_jet(&s, 0.5).is_err());
    }
}
