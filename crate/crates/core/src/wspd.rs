//! Well-separated pair decomposition via a fair split tree.
//!
//! The pair list partitions `E x E` minus the diagonal: every ordered pair
//! of distinct points lies in exactly one `left x right` product, and both
//! sides have diameter at most `kappa` times their distance. Representatives
//! are the lexicographically least points of each side.

use crate::geom::Point2;
use crate::Error;

#[derive(Clone, Debug)]
struct SplitNode {
    /// tight bounding box of the points below
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    start: u32,
    len: u32,
    children: Option<(u32, u32)>,
    lex_min: u32,
}

impl SplitNode {
    fn diam(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    fn dist(&self, o: &SplitNode) -> f64 {
        let dx = (self.x0 - o.x1).max(0.0).max(o.x0 - self.x1);
        let dy = (self.y0 - o.y1).max(0.0).max(o.y0 - self.y1);
        dx.hypot(dy)
    }
}

/// One ordered well-separated pair, sides referenced through tree nodes.
#[derive(Clone, Copy, Debug)]
pub struct WspdPair {
    left: u32,
    right: u32,
    pub rep_left: u32,
    pub rep_right: u32,
}

/// Fair split tree plus the full pair list for a fixed separation parameter.
pub struct Wspd {
    points: Vec<Point2>,
    ordered: Vec<u32>,
    nodes: Vec<SplitNode>,
    pairs: Vec<WspdPair>,
    pub kappa: f64,
}

impl Wspd {
    pub fn build(points: &[Point2], kappa: f64) -> Result<Self, Error> {
        if kappa <= 0.0 {
            return Err(Error::InvalidConfig("kappa must be positive".into()));
        }
        let mut w = Wspd {
            points: points.to_vec(),
            ordered: (0..points.len() as u32).collect(),
            nodes: Vec::new(),
            pairs: Vec::new(),
            kappa,
        };
        if points.len() < 2 {
            return Ok(w);
        }
        let root = w.build_node(0, points.len());
        w.find_pairs(root, root);
        Ok(w)
    }

    fn build_node(&mut self, start: usize, len: usize) -> u32 {
        let ids = &self.ordered[start..start + len];
        let mut x0 = f64::INFINITY;
        let mut y0 = f64::INFINITY;
        let mut x1 = f64::NEG_INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        let mut lex_min = ids[0];
        for &id in ids {
            let p = self.points[id as usize];
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
            if p.lex_cmp(self.points[lex_min as usize]) == std::cmp::Ordering::Less {
                lex_min = id;
            }
        }
        let me = self.nodes.len() as u32;
        self.nodes.push(SplitNode {
            x0,
            y0,
            x1,
            y1,
            start: start as u32,
            len: len as u32,
            children: None,
            lex_min,
        });
        if len >= 2 {
            // fair split: halve the longer side of the tight box
            let along_x = (x1 - x0) >= (y1 - y0);
            let mid = if along_x { 0.5 * (x0 + x1) } else { 0.5 * (y0 + y1) };
            let slice = &mut self.ordered[start..start + len];
            slice.sort_by(|&a, &b| {
                let (pa, pb) = (self.points[a as usize], self.points[b as usize]);
                let (ka, kb) = if along_x { (pa.x, pb.x) } else { (pa.y, pb.y) };
                ka.partial_cmp(&kb).unwrap().then(pa.lex_cmp(pb)).then(a.cmp(&b))
            });
            let mut cut = slice.partition_point(|&id| {
                let p = self.points[id as usize];
                (if along_x { p.x } else { p.y }) < mid
            });
            // degenerate boxes (all mass on one side) still must split
            cut = cut.clamp(1, len - 1);
            let l = self.build_node(start, cut);
            let r = self.build_node(start + cut, len - cut);
            self.nodes[me as usize].children = Some((l, r));
        }
        me
    }

    fn find_pairs(&mut self, u: u32, v: u32) {
        if u == v {
            let Some((l, r)) = self.nodes[u as usize].children else {
                return;
            };
            self.find_pairs(l, l);
            self.find_pairs(r, r);
            self.find_pairs(l, r);
            return;
        }
        let (nu, nv) = (&self.nodes[u as usize], &self.nodes[v as usize]);
        let sep = nu.dist(nv);
        if nu.diam().max(nv.diam()) <= self.kappa * sep && sep > 0.0 {
            let (rl, rr) = (nu.lex_min, nv.lex_min);
            self.pairs.push(WspdPair { left: u, right: v, rep_left: rl, rep_right: rr });
            self.pairs.push(WspdPair { left: v, right: u, rep_left: rr, rep_right: rl });
            return;
        }
        // split the side with the larger diameter (ties: the left argument)
        if nu.diam() >= nv.diam() {
            let (l, r) = self.nodes[u as usize].children.expect("splittable node");
            self.find_pairs(l, v);
            self.find_pairs(r, v);
        } else {
            let (l, r) = self.nodes[v as usize].children.expect("splittable node");
            self.find_pairs(u, l);
            self.find_pairs(u, r);
        }
    }

    pub fn pairs(&self) -> &[WspdPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn side_points(&self, pair: &WspdPair, left: bool) -> &[u32] {
        let n = &self.nodes[if left { pair.left } else { pair.right } as usize];
        &self.ordered[n.start as usize..(n.start + n.len) as usize]
    }
}
