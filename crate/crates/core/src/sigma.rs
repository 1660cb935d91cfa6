//! Per-point convex jet bodies and their parallelogram summaries.
//!
//! For an anchor `x` in a finite set `S`, the body consists of the gradients
//! `g` such that some Whitney field on `S` vanishes identically at every
//! point, has gradient `g` at `x`, and has `W^2` norm at most one. Feasible
//! fields are characterized by linear inequalities, so each directional gauge
//! is a linear program, and the whole body is the planar projection of a
//! polytope. The projection polygon is recovered once per anchor with
//! support-function shooting and then answers every sampled direction.

use crate::geom::Point2;
use crate::index::PointIndex;
use crate::jet::Jet1;
use crate::lp::{LpEngine, LpStatus, SparseRow};
use crate::Error;

/// Sampled description of one symmetric convex body of gradients.
#[derive(Clone, Debug)]
pub struct SigmaBody {
    pub anchor: Point2,
    /// gauge values at `m_dir` uniform half-circle directions
    pub gauges: Vec<f64>,
    /// index of the largest gauge (smallest angle on ties)
    pub max_dir: usize,
    pub u_max: (f64, f64),
    pub diameter: f64,
}

impl SigmaBody {
    pub fn direction(m: usize, m_dir: usize) -> (f64, f64) {
        let theta = std::f64::consts::PI * (m as f64) / (m_dir as f64);
        (theta.cos(), theta.sin())
    }

    pub fn gauge_at(&self, m: usize) -> f64 {
        self.gauges[m]
    }

    /// Gauge in the direction perpendicular to the principal one.
    pub fn gauge_perp(&self) -> f64 {
        let m_dir = self.gauges.len();
        self.gauges[(self.max_dir + m_dir / 2) % m_dir]
    }
}

/// Linear functionals with tolerances encoding the parallelogram
/// approximation of a body, plus the depth set it was computed from.
#[derive(Clone, Debug)]
pub struct Palp {
    pub anchor_id: u32,
    pub anchor: Point2,
    /// coefficient triples on (value, g1, g2) with tolerances
    pub functionals: [((f64, f64, f64), f64); 3],
    /// sorted point ids; at most `k_depth` entries, contains the anchor
    pub depth_set: Vec<u32>,
    pub u_max: (f64, f64),
    pub diameter: f64,
}

impl Palp {
    /// Membership in the scaled body: every functional within `m * eps`,
    /// zero-tolerance rows within an absolute `1e-12`.
    pub fn contains(&self, jet: &Jet1, m: f64) -> bool {
        let anchored = if jet.base == self.anchor { *jet } else { jet.rebase(self.anchor) };
        for ((cv, c1, c2), eps) in &self.functionals {
            let val = cv * anchored.value + c1 * anchored.grad.0 + c2 * anchored.grad.1;
            let bound = if *eps == 0.0 { 1e-12 } else { m * eps };
            if val.abs() > bound {
                return false;
            }
        }
        true
    }
}

/// Variable layout shared by both gauge formulations. The anchor gradient is
/// either free (support mode) or substituted by `r * u` (direct mode).
struct RowBuilder {
    rows: Vec<SparseRow>,
    n: usize,
}

const SLOT_S: u32 = 0;
const SLOT_T: u32 = 1;

/// Build the feasibility rows over `pts` (anchor first), with the anchor
/// gradient handled by `anchor_var`: either two free variables at the given
/// slots, or the substitution `g_x = r u`.
enum AnchorVar {
    Free { gx: u32, gy: u32 },
    Ray { r: u32, u: (f64, f64) },
}

fn grad_slot(point_pos: usize, comp: usize, first: u32) -> u32 {
    first + 2 * (point_pos as u32 - 1) + comp as u32
}

fn build_rows(pts: &[Point2], anchor: &AnchorVar, first_free: u32, n_vars: usize) -> RowBuilder {
    let mut rb = RowBuilder { rows: Vec::with_capacity(8 * pts.len() * pts.len()), n: n_vars };
    // gradient coefficient accessor: returns (var, coeff) pairs for g_{p, comp}
    let gvar = |p: usize, comp: usize| -> Vec<(u32, f64)> {
        if p == 0 {
            match anchor {
                AnchorVar::Free { gx, gy } => vec![(if comp == 0 { *gx } else { *gy }, 1.0)],
                AnchorVar::Ray { r, u } => {
                    let c = if comp == 0 { u.0 } else { u.1 };
                    if c == 0.0 {
                        vec![]
                    } else {
                        vec![(*r, c)]
                    }
                }
            }
        } else {
            vec![(grad_slot(p, comp, first_free), 1.0)]
        }
    };
    let mut push = |terms: Vec<(u32, f64)>, rhs: f64| {
        let (idx, val): (Vec<u32>, Vec<f64>) = terms.into_iter().unzip();
        rb.rows.push(SparseRow::new(idx, val, rhs));
    };

    // single-point terms: |g_{p,i}| <= s
    for p in 0..pts.len() {
        for comp in 0..2 {
            for sign in [1.0, -1.0] {
                let mut terms: Vec<(u32, f64)> =
                    gvar(p, comp).into_iter().map(|(v, c)| (v, sign * c)).collect();
                terms.push((SLOT_S, -1.0));
                push(terms, 0.0);
            }
        }
    }
    // ordered cross value terms: |g_q . (p - q)| <= t |p - q|^2
    for p in 0..pts.len() {
        for q in 0..pts.len() {
            if p == q {
                continue;
            }
            let d = pts[p].sub(pts[q]);
            let d2 = d.0 * d.0 + d.1 * d.1;
            for sign in [1.0, -1.0] {
                let mut terms: Vec<(u32, f64)> = Vec::new();
                for comp in 0..2 {
                    let coef = if comp == 0 { d.0 } else { d.1 };
                    for (v, c) in gvar(q, comp) {
                        terms.push((v, sign * coef * c));
                    }
                }
                terms.push((SLOT_T, -d2));
                push(terms, 0.0);
            }
        }
    }
    // unordered gradient difference terms: |g_p,i - g_q,i| <= t |p - q|
    for p in 0..pts.len() {
        for q in (p + 1)..pts.len() {
            let dist = pts[p].dist(pts[q]);
            for comp in 0..2 {
                for sign in [1.0, -1.0] {
                    let mut terms: Vec<(u32, f64)> = Vec::new();
                    for (v, c) in gvar(p, comp) {
                        terms.push((v, sign * c));
                    }
                    for (v, c) in gvar(q, comp) {
                        terms.push((v, -sign * c));
                    }
                    terms.push((SLOT_T, -dist));
                    push(terms, 0.0);
                }
            }
        }
    }
    // norm split and sign constraints
    push(vec![(SLOT_S, 1.0), (SLOT_T, 1.0)], 1.0);
    push(vec![(SLOT_S, -1.0)], 0.0);
    push(vec![(SLOT_T, -1.0)], 0.0);
    if let AnchorVar::Ray { r, .. } = anchor {
        push(vec![(*r, -1.0)], 0.0);
    }
    rb
}

/// Test/profiling hook: the support-mode rows for a depth set.
#[doc(hidden)]
pub fn build_rows_for_profile(x: Point2, s_pts: &[Point2]) -> (Vec<SparseRow>, usize) {
    let mut pts = vec![x];
    for p in s_pts.iter().filter(|p| **p != x) {
        pts.push(*p);
    }
    let n_vars = 4 + 2 * (pts.len() - 1);
    let rb = build_rows(&pts, &AnchorVar::Free { gx: 2, gy: 3 }, 4, n_vars);
    (rb.rows, n_vars)
}

/// Exact directional gauge: the largest `r >= 0` such that a unit-norm
/// Whitney field vanishing on `S` has gradient `r u` at `x`. Requires
/// `x` to be a member of `S`.
pub fn sigma_gauge(x: Point2, s_pts: &[Point2], u: (f64, f64)) -> Result<f64, Error> {
    let pos = s_pts.iter().position(|p| *p == x);
    let Some(pos) = pos else {
        return Err(Error::DataMismatch("anchor must belong to the set".into()));
    };
    let mut pts = Vec::with_capacity(s_pts.len());
    pts.push(x);
    for (i, p) in s_pts.iter().enumerate() {
        if i != pos {
            pts.push(*p);
        }
    }
    let norm = u.0.hypot(u.1);
    if norm == 0.0 {
        return Err(Error::DimensionMismatch("direction must be nonzero".into()));
    }
    let u = (u.0 / norm, u.1 / norm);
    // vars: s, t, r, then free gradients
    let n_vars = 3 + 2 * (pts.len() - 1);
    let rb = build_rows(&pts, &AnchorVar::Ray { r: 2, u }, 3, n_vars);
    let mut engine = LpEngine::new(rb.n, rb.rows);
    let mut c = vec![0.0; n_vars];
    c[2] = 1.0;
    let sol = engine.maximize(&c)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value.max(0.0)),
        _ => Err(Error::BuildAssertion("gauge LP must be bounded and feasible".into())),
    }
}

/// Support-function shooting for the projected polygon of feasible anchor
/// gradients; returns vertices of the upper half in angle order.
struct PolygonBuilder<'a> {
    engine: &'a mut LpEngine,
    n_vars: usize,
    shots: usize,
}

impl<'a> PolygonBuilder<'a> {
    fn support(&mut self, d: (f64, f64)) -> Result<(f64, f64), Error> {
        self.shots += 1;
        let mut c = vec![0.0; self.n_vars];
        c[2] = d.0;
        c[3] = d.1;
        let sol = self.engine.maximize(&c)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::BuildAssertion("support LP must be bounded".into()));
        }
        Ok((sol.x[2], sol.x[3]))
    }

    fn refine(
        &mut self,
        d_a: (f64, f64),
        p_a: (f64, f64),
        d_b: (f64, f64),
        p_b: (f64, f64),
        depth: usize,
        out: &mut Vec<(f64, f64)>,
    ) -> Result<(), Error> {
        let scale = p_a.0.abs().max(p_a.1.abs()).max(p_b.0.abs()).max(p_b.1.abs()).max(1e-12);
        let edge = (p_b.0 - p_a.0, p_b.1 - p_a.1);
        let elen = edge.0.hypot(edge.1);
        if elen <= 1e-10 * scale || depth >= 26 || self.shots > 220 {
            return Ok(());
        }
        // outward normal of the chord
        let n = (edge.1 / elen, -edge.0 / elen);
        let p_m = self.support(n)?;
        let h_m = n.0 * p_m.0 + n.1 * p_m.1;
        let h_chord = n.0 * p_a.0 + n.1 * p_a.1;
        if h_m <= h_chord + 1e-10 * scale.max(h_chord.abs()) {
            return Ok(());
        }
        self.refine(d_a, p_a, n, p_m, depth + 1, out)?;
        out.push(p_m);
        self.refine(n, p_m, d_b, p_b, depth + 1, out)?;
        Ok(())
    }
}

/// Gauges of the body at `m_dir` uniform half-circle directions, computed
/// from the projected polygon.
pub fn build_sigma_body(x: Point2, s_pts: &[Point2], m_dir: usize) -> Result<SigmaBody, Error> {
    assert!(m_dir >= 4 && m_dir % 2 == 0, "m_dir must be even and at least 4");
    let pos = s_pts.iter().position(|p| *p == x);
    let Some(pos) = pos else {
        return Err(Error::DataMismatch("anchor must belong to the set".into()));
    };
    let mut pts = Vec::with_capacity(s_pts.len());
    pts.push(x);
    for (i, p) in s_pts.iter().enumerate() {
        if i != pos {
            pts.push(*p);
        }
    }
    // vars: s, t, gx, gy, free gradients
    let n_vars = 4 + 2 * (pts.len() - 1);
    let rb = build_rows(&pts, &AnchorVar::Free { gx: 2, gy: 3 }, 4, n_vars);
    let mut engine = LpEngine::new(rb.n, rb.rows);
    let mut pb = PolygonBuilder { engine: &mut engine, n_vars, shots: 0 };

    let d0 = (1.0, 0.0);
    let d1 = (0.0, 1.0);
    let p0 = pb.support(d0)?;
    let p1 = pb.support(d1)?;
    let p2 = (-p0.0, -p0.1); // symmetry
    let mut upper: Vec<(f64, f64)> = vec![p0];
    pb.refine(d0, p0, d1, p1, 0, &mut upper)?;
    upper.push(p1);
    pb.refine(d1, p1, (-1.0, 0.0), p2, 0, &mut upper)?;
    upper.push(p2);

    // full symmetric vertex loop: upper half then its mirror, CCW
    let mut verts = upper.clone();
    let interior = &upper[1..upper.len().saturating_sub(1)];
    for v in interior {
        verts.push((-v.0, -v.1));
    }
    // halfplane list from consecutive vertices
    let mut planes: Vec<((f64, f64), f64)> = Vec::with_capacity(verts.len());
    for w in 0..verts.len() {
        let a = verts[w];
        let b = verts[(w + 1) % verts.len()];
        let e = (b.0 - a.0, b.1 - a.1);
        let elen = e.0.hypot(e.1);
        if elen <= 1e-13 {
            continue;
        }
        let n = (e.1 / elen, -e.0 / elen);
        let h = n.0 * a.0 + n.1 * a.1;
        planes.push((n, h));
    }

    let mut gauges = Vec::with_capacity(m_dir);
    for m in 0..m_dir {
        let u = SigmaBody::direction(m, m_dir);
        let mut r = f64::INFINITY;
        for ((nx, ny), h) in &planes {
            let du = nx * u.0 + ny * u.1;
            if du > 1e-14 {
                r = r.min((h / du).max(0.0));
            }
        }
        if !r.is_finite() {
            // no confining plane in this direction: fall back to the exact LP
            r = sigma_gauge(x, s_pts, u)?;
        }
        gauges.push(r);
    }

    let mut max_dir = 0;
    for m in 1..m_dir {
        if gauges[m] > gauges[max_dir] {
            max_dir = m;
        }
    }
    let u_max = SigmaBody::direction(max_dir, m_dir);
    let diameter = 2.0 * gauges[max_dir];
    Ok(SigmaBody { anchor: x, gauges, max_dir, u_max, diameter })
}

/// Depth set (anchor plus nearest neighbors) and parallelogram functionals
/// for one data point.
pub fn build_palp(
    index: &PointIndex,
    anchor_id: u32,
    k_depth: usize,
    m_dir: usize,
) -> Result<Palp, Error> {
    let x = index.point(anchor_id);
    let mut depth_set = index.k_nearest(x, k_depth);
    debug_assert!(depth_set.contains(&anchor_id));
    let pts: Vec<Point2> = depth_set.iter().map(|&id| index.point(id)).collect();
    let body = build_sigma_body(x, &pts, m_dir)?;
    depth_set.sort_unstable();
    let eps1 = body.gauges[body.max_dir];
    let eps2 = body.gauge_perp();
    let u = body.u_max;
    let perp = (-u.1, u.0);
    Ok(Palp {
        anchor_id,
        anchor: x,
        functionals: [
            ((0.0, u.0, u.1), eps1),
            ((0.0, perp.0, perp.1), eps2),
            ((1.0, 0.0, 0.0), 0.0),
        ],
        depth_set,
        u_max: u,
        diameter: body.diameter,
    })
}

/// Build the whole table, one entry per data point.
pub fn build_all_palps(index: &PointIndex, k_depth: usize, m_dir: usize) -> Result<Vec<Palp>, Error> {
    (0..index.len() as u32)
        .map(|id| build_palp(index, id, k_depth, m_dir))
        .collect()
}
