//! One- and two-jets of planar functions, and two-jets of single-variable
//! functions, identified with their Taylor polynomials at an anchor point.
//!
//! Evaluation uses the factorial-weighted Taylor form, with the Hessian entry
//! `(i, j)` storing the raw derivative `d_i d_j`.

use crate::geom::Point2;
use crate::Error;
use serde::{Deserialize, Serialize};

/// Symmetric 2x2 matrix of second derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    pub fn zero() -> Self {
        SymMat2::default()
    }

    pub fn identity() -> Self {
        SymMat2 { xx: 1.0, xy: 0.0, yy: 1.0 }
    }

    pub fn scale(self, s: f64) -> Self {
        SymMat2 { xx: s * self.xx, xy: s * self.xy, yy: s * self.yy }
    }

    pub fn add(self, o: SymMat2) -> Self {
        SymMat2 { xx: self.xx + o.xx, xy: self.xy + o.xy, yy: self.yy + o.yy }
    }

    /// Symmetrized outer product `a b^t + b a^t`.
    pub fn sym_outer(a: (f64, f64), b: (f64, f64)) -> Self {
        SymMat2 {
            xx: 2.0 * a.0 * b.0,
            xy: a.0 * b.1 + a.1 * b.0,
            yy: 2.0 * a.1 * b.1,
        }
    }

    /// Rank-one `u u^t` scaled by `s`.
    pub fn outer(u: (f64, f64), s: f64) -> Self {
        SymMat2 { xx: s * u.0 * u.0, xy: s * u.0 * u.1, yy: s * u.1 * u.1 }
    }

    pub fn quad_form(&self, v: (f64, f64)) -> f64 {
        self.xx * v.0 * v.0 + 2.0 * self.xy * v.0 * v.1 + self.yy * v.1 * v.1
    }

    pub fn mul_vec(&self, v: (f64, f64)) -> (f64, f64) {
        (self.xx * v.0 + self.xy * v.1, self.xy * v.0 + self.yy * v.1)
    }

    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }
}

/// One-jet at `base`: the affine polynomial `value + grad . (y - base)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet1 {
    pub base: Point2,
    pub value: f64,
    pub grad: (f64, f64),
}

impl Jet1 {
    pub fn new(base: Point2, value: f64, grad: (f64, f64)) -> Self {
        Jet1 { base, value, grad }
    }

    pub fn zero(base: Point2) -> Self {
        Jet1 { base, value: 0.0, grad: (0.0, 0.0) }
    }

    pub fn eval(&self, y: Point2) -> f64 {
        let (dx, dy) = y.sub(self.base);
        self.value + self.grad.0 * dx + self.grad.1 * dy
    }

    /// Same affine polynomial re-anchored at `b`.
    pub fn rebase(&self, b: Point2) -> Jet1 {
        Jet1 { base: b, value: self.eval(b), grad: self.grad }
    }

    /// Promote to a two-jet with zero Hessian (same polynomial).
    pub fn promote(&self) -> Jet2 {
        Jet2 { base: self.base, value: self.value, grad: self.grad, hess: SymMat2::zero() }
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad.0.hypot(self.grad.1)
    }
}

/// Two-jet at `base`: the quadratic Taylor polynomial
/// `value + grad . d + d^t hess d / 2` with `d = y - base`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub base: Point2,
    pub value: f64,
    pub grad: (f64, f64),
    pub hess: SymMat2,
}

impl Jet2 {
    pub fn new(base: Point2, value: f64, grad: (f64, f64), hess: SymMat2) -> Self {
        Jet2 { base, value, grad, hess }
    }

    pub fn zero(base: Point2) -> Self {
        Jet2::new(base, 0.0, (0.0, 0.0), SymMat2::zero())
    }

    pub fn constant(base: Point2, c: f64) -> Self {
        Jet2::new(base, c, (0.0, 0.0), SymMat2::zero())
    }

    pub fn eval(&self, y: Point2) -> f64 {
        let d = y.sub(self.base);
        self.value + self.grad.0 * d.0 + self.grad.1 * d.1 + 0.5 * self.hess.quad_form(d)
    }

    /// Gradient of the quadratic polynomial at `y`.
    pub fn eval_grad(&self, y: Point2) -> (f64, f64) {
        let d = y.sub(self.base);
        let hd = self.hess.mul_vec(d);
        (self.grad.0 + hd.0, self.grad.1 + hd.1)
    }

    /// Same quadratic polynomial re-anchored at `b`.
    pub fn rebase(&self, b: Point2) -> Jet2 {
        Jet2 { base: b, value: self.eval(b), grad: self.eval_grad(b), hess: self.hess }
    }

    /// Degree-one truncation at the same anchor.
    pub fn truncate(&self) -> Jet1 {
        Jet1 { base: self.base, value: self.value, grad: self.grad }
    }

    pub fn add(&self, o: &Jet2) -> Result<Jet2, Error> {
        if self.base != o.base {
            return Err(Error::BaseMismatch);
        }
        Ok(Jet2 {
            base: self.base,
            value: self.value + o.value,
            grad: (self.grad.0 + o.grad.0, self.grad.1 + o.grad.1),
            hess: self.hess.add(o.hess),
        })
    }

    pub fn scale(&self, s: f64) -> Jet2 {
        Jet2 { base: self.base, value: s * self.value, grad: (s * self.grad.0, s * self.grad.1), hess: self.hess.scale(s) }
    }

    /// Ring product: the two-jet of the pointwise product, truncated at the
    /// shared anchor.
    pub fn multiply(&self, o: &Jet2) -> Result<Jet2, Error> {
        if self.base != o.base {
            return Err(Error::BaseMismatch);
        }
        let (f, g) = (self, o);
        let hess = f
            .hess
            .scale(g.value)
            .add(g.hess.scale(f.value))
            .add(SymMat2::sym_outer(f.grad, g.grad));
        Ok(Jet2 {
            base: f.base,
            value: f.value * g.value,
            grad: (
                f.value * g.grad.0 + g.value * f.grad.0,
                f.value * g.grad.1 + g.value * f.grad.1,
            ),
            hess,
        })
    }

    /// Two-jet of `1 / F` at the anchor; requires a nonvanishing value.
    pub fn reciprocal(&self) -> Result<Jet2, Error> {
        if self.value == 0.0 {
            return Err(Error::DivisionByZeroJet);
        }
        let v = self.value;
        let g = self.grad;
        let hess = SymMat2 {
            xx: 2.0 * g.0 * g.0 / (v * v * v) - self.hess.xx / (v * v),
            xy: 2.0 * g.0 * g.1 / (v * v * v) - self.hess.xy / (v * v),
            yy: 2.0 * g.1 * g.1 / (v * v * v) - self.hess.yy / (v * v),
        };
        Ok(Jet2 { base: self.base, value: 1.0 / v, grad: (-g.0 / (v * v), -g.1 / (v * v)), hess })
    }

    pub fn max_abs(&self) -> f64 {
        self.value
            .abs()
            .max(self.grad.0.abs())
            .max(self.grad.1.abs())
            .max(self.hess.max_abs())
    }
}

/// Two-jet of a single-variable function at `base`: `value + d1 (s - base) + d2 (s - base)^2 / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet1D2 {
    pub base: f64,
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet1D2 {
    pub fn new(base: f64, value: f64, d1: f64, d2: f64) -> Self {
        Jet1D2 { base, value, d1, d2 }
    }

    pub fn zero(base: f64) -> Self {
        Jet1D2::new(base, 0.0, 0.0, 0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let d = s - self.base;
        self.value + self.d1 * d + 0.5 * self.d2 * d * d
    }

    pub fn add(&self, o: &Jet1D2) -> Jet1D2 {
        debug_assert_eq!(self.base, o.base);
        Jet1D2::new(self.base, self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }

    pub fn scale(&self, s: f64) -> Jet1D2 {
        Jet1D2::new(self.base, s * self.value, s * self.d1, s * self.d2)
    }

    /// Two-jet of the product of two single-variable functions.
    pub fn multiply(&self, o: &Jet1D2) -> Jet1D2 {
        debug_assert_eq!(self.base, o.base);
        Jet1D2::new(
            self.base,
            self.value * o.value,
            self.value * o.d1 + self.d1 * o.value,
            self.value * o.d2 + 2.0 * self.d1 * o.d1 + self.d2 * o.value,
        )
    }
}

/// Two-jet of `g(H1(y))` by the chain rule, where `g` is a single-variable
/// two-jet anchored at the value of `H1` at the query anchor.
pub fn jet2_compose_1d(g: &Jet1D2, h1: &Jet2) -> Result<Jet2, Error> {
    if g.base != h1.value {
        return Err(Error::BaseMismatch);
    }
    let gh = h1.grad;
    let hess = SymMat2::outer(gh, g.d2).add(h1.hess.scale(g.d1));
    Ok(Jet2 {
        base: h1.base,
        value: g.value,
        grad: (g.d1 * gh.0, g.d1 * gh.1),
        hess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn jet1_eval_cases() {
        assert_eq!(Jet1::new(p(0.0, 0.0), 1.0, (0.0, 0.0)).eval(p(5.0, 5.0)), 1.0);
        assert_eq!(Jet1::new(p(0.0, 0.0), 0.0, (1.0, 0.0)).eval(p(2.0, 3.0)), 2.0);
        assert_eq!(Jet1::new(p(1.0, 1.0), 3.0, (1.0, 2.0)).eval(p(2.0, 3.0)), 8.0);
    }

    #[test]
    fn jet2_eval_cases() {
        assert_eq!(Jet2::zero(p(0.0, 0.0)).eval(p(3.0, -4.0)), 0.0);
        let j = Jet2::new(p(0.0, 0.0), 0.0, (0.0, 0.0), SymMat2::identity());
        assert_eq!(j.eval(p(1.0, 1.0)), 1.0);
        let j = Jet2::new(p(0.0, 0.0), 1.0, (1.0, 0.0), SymMat2 { xx: 2.0, xy: 0.0, yy: 0.0 });
        assert_eq!(j.eval(p(1.0, 0.0)), 3.0);
    }

    #[test]
    fn rebase_identity_and_shift() {
        let j = Jet1::new(p(0.0, 0.0), 0.0, (1.0, 0.0));
        assert_eq!(j.rebase(j.base), j);
        let r = j.rebase(p(1.0, 0.0));
        assert_eq!(r.value, 1.0);
        assert_eq!(r.grad, (1.0, 0.0));
        // rebase twice equals rebase once (same polynomial; rounding only)
        let b = p(-2.5, 0.75);
        let c = p(0.3, -1.25);
        let twice = j.rebase(b).rebase(c);
        let once = j.rebase(c);
        assert!((twice.value - once.value).abs() < 1e-14);
        assert_eq!(twice.grad, once.grad);
    }

    #[test]
    fn multiply_identity_and_linear_product() {
        let base = p(0.5, -0.25);
        let one = Jet2::constant(base, 1.0);
        let j = Jet2::new(base, 0.7, (1.5, -2.0), SymMat2 { xx: 1.0, xy: 0.5, yy: -0.75 });
        assert_eq!(j.multiply(&one).unwrap(), j);

        // x * y at the origin: mixed second derivative 1.
        let base = p(0.0, 0.0);
        let jx = Jet2::new(base, 0.0, (1.0, 0.0), SymMat2::zero());
        let jy = Jet2::new(base, 0.0, (0.0, 1.0), SymMat2::zero());
        let prod = jx.multiply(&jy).unwrap();
        assert_eq!(prod.value, 0.0);
        assert_eq!(prod.grad, (0.0, 0.0));
        assert_eq!(prod.hess, SymMat2 { xx: 0.0, xy: 1.0, yy: 0.0 });
        assert_eq!(prod.eval(p(2.0, 3.0)), 6.0);
    }

    #[test]
    fn multiply_mismatched_bases_rejected() {
        let a = Jet2::zero(p(0.0, 0.0));
        let b = Jet2::zero(p(1.0, 0.0));
        assert!(a.multiply(&b).is_err());
    }

    /// Taylor-remainder oracle: the product jet approximates the product of
    /// evaluations to third order in the offset.
    #[test]
    fn multiply_matches_pointwise_product_to_third_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = p(0.2, -0.4);
        for _ in 0..50 {
            let rj = |rng: &mut ChaCha8Rng| {
                Jet2::new(
                    base,
                    rng.random_range(-2.0..2.0),
                    (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                    SymMat2 {
                        xx: rng.random_range(-2.0..2.0),
                        xy: rng.random_range(-2.0..2.0),
                        yy: rng.random_range(-2.0..2.0),
                    },
                )
            };
            let a = rj(&mut rng);
            let b = rj(&mut rng);
            let prod = a.multiply(&b).unwrap();
            for h in [1e-2, 5e-3, 2.5e-3] {
                let y = p(base.x + h, base.y - 0.5 * h);
                let err = (prod.eval(y) - a.eval(y) * b.eval(y)).abs();
                // remainder is O(h^3) with a modest constant for these sizes
                assert!(err <= 60.0 * h * h * h, "err {err} at h {h}");
            }
        }
    }

    #[test]
    fn compose_1d_identity_and_square() {
        // g identity jet, H1 = first coordinate.
        let base = p(0.3, 0.9);
        let h1 = Jet2::new(base, base.x, (1.0, 0.0), SymMat2::zero());
        let g = Jet1D2::new(base.x, base.x, 1.0, 0.0);
        let c = jet2_compose_1d(&g, &h1).unwrap();
        assert_eq!(c.value, base.x);
        assert_eq!(c.grad, (1.0, 0.0));
        assert_eq!(c.hess, SymMat2::zero());

        // g(t) = t^2, H1 = x + y at the origin: jet of (x + y)^2.
        let base = p(0.0, 0.0);
        let h1 = Jet2::new(base, 0.0, (1.0, 1.0), SymMat2::zero());
        let g = Jet1D2::new(0.0, 0.0, 0.0, 2.0);
        let c = jet2_compose_1d(&g, &h1).unwrap();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.grad, (0.0, 0.0));
        assert_eq!(c.hess, SymMat2 { xx: 2.0, xy: 2.0, yy: 2.0 });
    }

    /// Finite-difference oracle for the chain rule on a smooth pair.
    #[test]
    fn compose_1d_matches_finite_differences() {
        // scalar field u(y) = sin(y1) + 0.5 y2^2 composed with
        // g(t) = exp(t) around a generic anchor.
        let base = p(0.4, -0.7);
        let u = |y: Point2| y.x.sin() + 0.5 * y.y * y.y;
        let t0 = u(base);
        let h1 = Jet2::new(
            base,
            t0,
            (base.x.cos(), base.y),
            SymMat2 { xx: -base.x.sin(), xy: 0.0, yy: 1.0 },
        );
        let g = Jet1D2::new(t0, t0.exp(), t0.exp(), t0.exp());
        let c = jet2_compose_1d(&g, &h1).unwrap();

        let f = |y: Point2| u(y).exp();
        let h = 1e-4;
        let fd_xx = (f(p(base.x + h, base.y)) - 2.0 * f(base) + f(p(base.x - h, base.y))) / (h * h);
        let fd_yy = (f(p(base.x, base.y + h)) - 2.0 * f(base) + f(p(base.x, base.y - h))) / (h * h);
        let fd_xy = (f(p(base.x + h, base.y + h)) - f(p(base.x + h, base.y - h))
            - f(p(base.x - h, base.y + h))
            + f(p(base.x - h, base.y - h)))
            / (4.0 * h * h);
        let fd_x = (f(p(base.x + h, base.y)) - f(p(base.x - h, base.y))) / (2.0 * h);
        let fd_y = (f(p(base.x, base.y + h)) - f(p(base.x, base.y - h))) / (2.0 * h);
        assert!((c.grad.0 - fd_x).abs() < 1e-5);
        assert!((c.grad.1 - fd_y).abs() < 1e-5);
        assert!((c.hess.xx - fd_xx).abs() < 1e-5);
        assert!((c.hess.yy - fd_yy).abs() < 1e-5);
        assert!((c.hess.xy - fd_xy).abs() < 1e-5);
    }

    #[test]
    fn multiply_commutative_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let base = p(-0.1, 0.6);
        let rj = |rng: &mut ChaCha8Rng| {
            Jet2::new(
                base,
                rng.random_range(-1.0..1.0),
                (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                SymMat2 {
                    xx: rng.random_range(-1.0..1.0),
                    xy: rng.random_range(-1.0..1.0),
                    yy: rng.random_range(-1.0..1.0),
                },
            )
        };
        for _ in 0..100 {
            let a = rj(&mut rng);
            let b = rj(&mut rng);
            let c = rj(&mut rng);
            let ab = a.multiply(&b).unwrap();
            let ba = b.multiply(&a).unwrap();
            assert_eq!(ab, ba);
            let abc1 = ab.multiply(&c).unwrap();
            let abc2 = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            let scale = abc1.max_abs().max(1.0);
            assert!((abc1.value - abc2.value).abs() <= 1e-12 * scale);
            assert!((abc1.hess.xy - abc2.hess.xy).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn reciprocal_times_self_is_one() {
        let base = p(0.0, 0.0);
        let j = Jet2::new(base, 2.0, (0.5, -1.0), SymMat2 { xx: 0.25, xy: 1.0, yy: -0.5 });
        let r = j.reciprocal().unwrap();
        let prod = j.multiply(&r).unwrap();
        assert!((prod.value - 1.0).abs() < 1e-15);
        assert!(prod.grad.0.abs() < 1e-15 && prod.grad.1.abs() < 1e-15);
        assert!(prod.hess.max_abs() < 1e-14);
    }
}
