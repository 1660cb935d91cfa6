//! Planar points and dyadic squares.
//!
//! All squares are half-open: `[a, a + d) x [b, b + d)`. Dyadic squares are
//! addressed by `(k, i, j)` and denote `[2^k i, 2^k (i+1)) x [2^k j, 2^k (j+1))`.
//! Dilations by factors of the form `1 + 2^-e` and by odd integers have exact
//! dyadic endpoints, so membership tests below are bit-exact in f64.

use serde::{Deserialize, Serialize};

/// A point of the plane in the fixed global frame `[e1, e2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn sub(self, o: Point2) -> (f64, f64) {
        (self.x - o.x, self.y - o.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        let (dx, dy) = self.sub(o);
        dx.hypot(dy)
    }

    pub fn dist2(self, o: Point2) -> f64 {
        let (dx, dy) = self.sub(o);
        dx * dx + dy * dy
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Lexicographic (x, then y) order; total on finite points.
    pub fn lex_cmp(self, o: Point2) -> std::cmp::Ordering {
        self.x
            .partial_cmp(&o.x)
            .unwrap()
            .then(self.y.partial_cmp(&o.y).unwrap())
    }
}

/// An axis-parallel half-open rectangle with exactly representable bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.y >= self.y0 && p.y < self.y1
    }

    /// Distance from `p` to the closed rectangle (0 inside).
    pub fn dist(&self, p: Point2) -> f64 {
        let dx = (self.x0 - p.x).max(0.0).max(p.x - self.x1);
        let dy = (self.y0 - p.y).max(0.0).max(p.y - self.y1);
        dx.hypot(dy)
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }

    pub fn center(&self) -> Point2 {
        Point2::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }
}

/// Dyadic square `[2^k i, 2^k (i+1)) x [2^k j, 2^k (j+1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicSquare {
    pub k: i16,
    pub i: i64,
    pub j: i64,
}

/// `m * 2^e` computed exactly in f64 (exact whenever |m| < 2^53).
pub fn dyadic_f64(m: i64, e: i32) -> f64 {
    debug_assert!(m.abs() < (1i64 << 53));
    let x = m as f64;
    // Scaling by a power of two is exact barring overflow/underflow.
    libm_ldexp(x, e)
}

fn libm_ldexp(x: f64, e: i32) -> f64 {
    // f64::powi(2.0, e) is exact for the exponent range we use.
    x * 2f64.powi(e)
}

impl DyadicSquare {
    pub fn sidelength(&self) -> f64 {
        libm_ldexp(1.0, self.k as i32)
    }

    pub fn rect(&self) -> Rect {
        Rect {
            x0: dyadic_f64(self.i, self.k as i32),
            y0: dyadic_f64(self.j, self.k as i32),
            x1: dyadic_f64(self.i + 1, self.k as i32),
            y1: dyadic_f64(self.j + 1, self.k as i32),
        }
    }

    pub fn center(&self) -> Point2 {
        Point2::new(
            dyadic_f64(2 * self.i + 1, self.k as i32 - 1),
            dyadic_f64(2 * self.j + 1, self.k as i32 - 1),
        )
    }

    /// The unique dyadic parent of sidelength `2 * delta`.
    pub fn parent(&self) -> DyadicSquare {
        DyadicSquare {
            k: self.k + 1,
            i: self.i.div_euclid(2),
            j: self.j.div_euclid(2),
        }
    }

    /// The four children, in row-major (j, i) order.
    pub fn children(&self) -> [DyadicSquare; 4] {
        let k = self.k - 1;
        let (i, j) = (2 * self.i, 2 * self.j);
        [
            DyadicSquare { k, i, j },
            DyadicSquare { k, i: i + 1, j },
            DyadicSquare { k, i, j: j + 1 },
            DyadicSquare { k, i: i + 1, j: j + 1 },
        ]
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.rect().contains(p)
    }

    /// Concentric dilation by an odd integer factor (5Q, 25Q): exact bounds.
    pub fn dilate_odd(&self, factor: i64) -> Rect {
        debug_assert!(factor % 2 == 1 && factor > 0);
        // center ± factor/2 * delta = 2^(k-1) * (2i + 1 ∓ factor)
        let e = self.k as i32 - 1;
        Rect {
            x0: dyadic_f64(2 * self.i + 1 - factor, e),
            y0: dyadic_f64(2 * self.j + 1 - factor, e),
            x1: dyadic_f64(2 * self.i + 1 + factor, e),
            y1: dyadic_f64(2 * self.j + 1 + factor, e),
        }
    }

    /// Concentric dilation `(1 + num * 2^-e) Q` with `num * 2^-e` the dyadic
    /// dilation excess (e.g. `c_G = 1/32` is `num = 1, e = 5`). Exact bounds.
    pub fn dilate_dyadic(&self, num: i64, e: u32) -> Rect {
        // margin per side = num * 2^-e * delta / 2 = num * 2^(k - e - 1)
        let ee = self.k as i32 - e as i32 - 1;
        let scale = 1i64 << (e + 1);
        Rect {
            x0: dyadic_f64(scale * self.i - num, ee),
            y0: dyadic_f64(scale * self.j - num, ee),
            x1: dyadic_f64(scale * (self.i + 1) + num, ee),
            y1: dyadic_f64(scale * (self.j + 1) + num, ee),
        }
    }

    /// The dyadic square of scale `k` containing `p`.
    pub fn containing(p: Point2, k: i16) -> DyadicSquare {
        let s = libm_ldexp(1.0, -(k as i32));
        DyadicSquare {
            k,
            i: (p.x * s).floor() as i64,
            j: (p.y * s).floor() as i64,
        }
    }
}
