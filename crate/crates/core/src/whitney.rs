//! Whitney fields over finite planar sets, the `W^2` norm, the nonnegative
//! excess functional, and the `Q`/`M` functionals driving the small-set trace
//! norm. Infinite values are represented by `f64::INFINITY`, not errors.

use crate::geom::Point2;
use crate::jet::{Jet1, Jet2, SymMat2};
use crate::Error;

/// A finite association of points to one-jets, each anchored at its point.
#[derive(Clone, Debug, PartialEq)]
pub struct WhitneyField {
    entries: Vec<Jet1>,
}

impl WhitneyField {
    pub fn new(entries: Vec<Jet1>) -> Result<Self, Error> {
        for (a, e) in entries.iter().enumerate() {
            if !e.base.is_finite() {
                return Err(Error::NonFinitePoint);
            }
            for f in entries.iter().skip(a + 1) {
                if e.base == f.base {
                    return Err(Error::DuplicatePoint(e.base.x, e.base.y));
                }
            }
        }
        Ok(WhitneyField { entries })
    }

    pub fn entries(&self) -> &[Jet1] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn jet_at(&self, x: Point2) -> Option<&Jet1> {
        self.entries.iter().find(|e| e.base == x)
    }
}

/// The `W^2(S)` norm: the largest single-point term plus the largest
/// cross-difference term.
pub fn whitney_norm(field: &WhitneyField) -> Result<f64, Error> {
    if field.is_empty() {
        return Err(Error::EmptyField);
    }
    let mut single: f64 = 0.0;
    let mut cross: f64 = 0.0;
    for e in field.entries() {
        single = single.max(e.value.abs()).max(e.grad.0.abs()).max(e.grad.1.abs());
    }
    for (a, e) in field.entries().iter().enumerate() {
        for (b, f) in field.entries().iter().enumerate() {
            if a == b {
                continue;
            }
            let d = e.base.dist(f.base);
            let v = (e.value - f.eval(e.base)).abs() / (d * d);
            let g0 = (e.grad.0 - f.grad.0).abs() / d;
            let g1 = (e.grad.1 - f.grad.1).abs() / d;
            cross = cross.max(v).max(g0).max(g1);
        }
    }
    Ok(single + cross)
}

/// Least `M >= 0` with `P(y) + M |y - base|^2 >= 0` everywhere, or infinity
/// when no such `M` exists. Closed form by the discriminant on lines through
/// the anchor.
pub fn wplus_excess(jet: &Jet1) -> f64 {
    let g2 = jet.grad.0 * jet.grad.0 + jet.grad.1 * jet.grad.1;
    if jet.value > 0.0 {
        g2 / (4.0 * jet.value)
    } else if jet.value == 0.0 && g2 == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// The `W^2_+` norm: `whitney_norm` plus the largest per-point excess.
pub fn wplus_norm(field: &WhitneyField) -> Result<f64, Error> {
    let base = whitney_norm(field)?;
    let mut excess: f64 = 0.0;
    for e in field.entries() {
        excess = excess.max(wplus_excess(e));
    }
    Ok(base + excess)
}

/// The summed functional `Q`: all single-point terms plus all ordered
/// cross-difference terms.
pub fn q_functional(field: &WhitneyField) -> f64 {
    let mut total = 0.0;
    for e in field.entries() {
        total += e.value.abs() + e.grad.0.abs() + e.grad.1.abs();
    }
    for (a, e) in field.entries().iter().enumerate() {
        for (b, f) in field.entries().iter().enumerate() {
            if a == b {
                continue;
            }
            let d = e.base.dist(f.base);
            total += (e.value - f.eval(e.base)).abs() / (d * d);
            total += (e.grad.0 - f.grad.0).abs() / d;
            total += (e.grad.1 - f.grad.1).abs() / d;
        }
    }
    total
}

/// The functional `M`: sum of `|grad|^2 / value` with the conventions
/// `0/0 = 0`, `a/0 = inf` for `a > 0`, and infinity if any value is negative.
pub fn m_functional(field: &WhitneyField) -> f64 {
    let mut total = 0.0;
    for e in field.entries() {
        if e.value < 0.0 {
            return f64::INFINITY;
        }
        let g2 = e.grad.0 * e.grad.0 + e.grad.1 * e.grad.1;
        if e.value == 0.0 {
            if g2 > 0.0 {
                return f64::INFINITY;
            }
        } else {
            total += g2 / e.value;
        }
    }
    total
}

/// Two-jet at `query` of the globally nonnegative quadratic
/// `Q_K(y) = P(y) + K |y - base|^2` with `K` the excess of `P`.
///
/// This is the singleton Whitney extension; the unit-scale cutoff of the
/// underlying operator is identically one on the plateau where all pipeline
/// queries occur, so the uncut polynomial's jet is returned.
pub fn singleton_extension_jet(jet: &Jet1, query: Point2) -> Result<Jet2, Error> {
    let k = wplus_excess(jet);
    if !k.is_finite() {
        return Err(Error::InfiniteExcess);
    }
    Ok(extension_quadratic(jet, k).rebase(query))
}

/// The quadratic `P(y) + K |y - base|^2` as a two-jet at the anchor.
pub fn extension_quadratic(jet: &Jet1, k: f64) -> Jet2 {
    Jet2::new(
        jet.base,
        jet.value,
        jet.grad,
        SymMat2 { xx: 2.0 * k, xy: 0.0, yy: 2.0 * k },
    )
}
