//! Compressed quadtree over the data set.
//!
//! Supports the square queries the decomposition needs (emptiness of dilated
//! squares, representative points with lexicographic tie-breaks, range
//! enumeration) plus deterministic k-nearest-neighbor search. Dilated-square
//! bounds are exact dyadic rationals, so membership never suffers boundary
//! misclassification; squares are half-open throughout.

use crate::geom::{DyadicSquare, Point2, Rect};
use crate::Error;

const NO_CHILD: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub cell: DyadicSquare,
    pub children: [u32; 4],
    /// contiguous slice of `ordered` holding every point under this node
    pub start: u32,
    pub len: u32,
    /// id of the lexicographically least point under this node
    pub lex_min: u32,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.children == [NO_CHILD; 4]
    }
}

/// Compressed quadtree over a fixed set of distinct labeled points.
#[derive(Clone, Debug)]
pub struct PointIndex {
    points: Vec<Point2>,
    ordered: Vec<u32>,
    nodes: Vec<Node>,
    roots: [u32; 4],
    root_scale: i16,
}

impl PointIndex {
    pub fn build(points: Vec<Point2>) -> Result<Self, Error> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinitePoint);
        }
        let mut sorted: Vec<u32> = (0..points.len() as u32).collect();
        sorted.sort_by(|&a, &b| points[a as usize].lex_cmp(points[b as usize]));
        for w in sorted.windows(2) {
            if points[w[0] as usize] == points[w[1] as usize] {
                let p = points[w[0] as usize];
                return Err(Error::DuplicatePoint(p.x, p.y));
            }
        }

        let max_abs = points
            .iter()
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(1.0f64, f64::max);
        let root_scale = (max_abs.log2().ceil() as i16 + 2).max(4);

        let mut idx = PointIndex {
            points,
            ordered: Vec::new(),
            nodes: Vec::new(),
            roots: [NO_CHILD; 4],
            root_scale,
        };
        let mut ids: Vec<u32> = (0..idx.points.len() as u32).collect();
        let quads = [
            DyadicSquare { k: root_scale, i: -1, j: -1 },
            DyadicSquare { k: root_scale, i: 0, j: -1 },
            DyadicSquare { k: root_scale, i: -1, j: 0 },
            DyadicSquare { k: root_scale, i: 0, j: 0 },
        ];
        for (q, quad) in quads.into_iter().enumerate() {
            let part: Vec<u32> = ids
                .iter()
                .copied()
                .filter(|&id| quad.contains(idx.points[id as usize]))
                .collect();
            ids.retain(|id| !quad.contains(idx.points[*id as usize]));
            if part.is_empty() {
                continue;
            }
            idx.roots[q] = idx.build_node(quad, part);
        }
        debug_assert!(ids.is_empty());
        Ok(idx)
    }

    fn build_node(&mut self, cell: DyadicSquare, ids: Vec<u32>) -> u32 {
        debug_assert!(!ids.is_empty());
        // compress: shrink the cell while every point stays in one child
        let mut cell = cell;
        if ids.len() > 1 {
            loop {
                let children = cell.children();
                let mut found = None;
                for (c, ch) in children.iter().enumerate() {
                    if ch.contains(self.points[ids[0] as usize]) {
                        found = Some((c, *ch));
                        break;
                    }
                }
                let (_, ch) = found.expect("point inside parent cell");
                if ids.iter().all(|&id| ch.contains(self.points[id as usize])) {
                    cell = ch;
                } else {
                    break;
                }
            }
        }
        let start = self.ordered.len() as u32;
        if ids.len() == 1 {
            let id = ids[0];
            self.ordered.push(id);
            self.nodes.push(Node {
                cell,
                children: [NO_CHILD; 4],
                start,
                len: 1,
                lex_min: id,
            });
            return (self.nodes.len() - 1) as u32;
        }
        // partition into quadrant children
        let children_cells = cell.children();
        let mut parts: [Vec<u32>; 4] = [vec![], vec![], vec![], vec![]];
        for id in ids {
            let p = self.points[id as usize];
            let mut placed = false;
            for c in 0..4 {
                if children_cells[c].contains(p) {
                    parts[c].push(id);
                    placed = true;
                    break;
                }
            }
            debug_assert!(placed);
            let _ = placed;
        }
        let me = self.nodes.len() as u32;
        self.nodes.push(Node {
            cell,
            children: [NO_CHILD; 4],
            start,
            len: 0,
            lex_min: 0,
        });
        let mut children = [NO_CHILD; 4];
        for (c, part) in parts.into_iter().enumerate() {
            if part.is_empty() {
                continue;
            }
            children[c] = self.build_node(children_cells[c], part);
        }
        let len = self.ordered.len() as u32 - start;
        let mut lex_min = u32::MAX;
        for c in children.iter().filter(|&&c| c != NO_CHILD) {
            let cand = self.nodes[*c as usize].lex_min;
            if lex_min == u32::MAX
                || self.points[cand as usize].lex_cmp(self.points[lex_min as usize])
                    == std::cmp::Ordering::Less
            {
                lex_min = cand;
            }
        }
        let node = &mut self.nodes[me as usize];
        node.children = children;
        node.len = len;
        node.lex_min = lex_min;
        me
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn point(&self, id: u32) -> Point2 {
        self.points[id as usize]
    }

    fn root_iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.roots.iter().copied().filter(|&r| r != NO_CHILD)
    }

    /// Visit every point id inside `rect`; `visit` returns false to stop
    /// early. Returns false when stopped early.
    pub fn for_each_in_rect(&self, rect: &Rect, visit: &mut dyn FnMut(u32) -> bool) -> bool {
        for r in self.root_iter() {
            if !self.walk_rect(r, rect, visit) {
                return false;
            }
        }
        true
    }

    fn walk_rect(&self, node: u32, rect: &Rect, visit: &mut dyn FnMut(u32) -> bool) -> bool {
        let n = &self.nodes[node as usize];
        let cell = n.cell.rect();
        if !cell.intersects(rect) {
            return true;
        }
        let fully_inside = rect.x0 <= cell.x0 && cell.x1 <= rect.x1 && rect.y0 <= cell.y0 && cell.y1 <= rect.y1;
        if fully_inside || n.is_leaf() {
            for &id in &self.ordered[n.start as usize..(n.start + n.len) as usize] {
                if fully_inside || rect.contains(self.points[id as usize]) {
                    if !visit(id) {
                        return false;
                    }
                }
            }
            return true;
        }
        for c in n.children.iter().filter(|&&c| c != NO_CHILD) {
            if !self.walk_rect(*c, rect, visit) {
                return false;
            }
        }
        true
    }

    pub fn points_in_rect(&self, rect: &Rect) -> Vec<u32> {
        let mut out = Vec::new();
        self.for_each_in_rect(rect, &mut |id| {
            out.push(id);
            true
        });
        out.sort_unstable();
        out
    }

    /// Count points in `rect`, stopping once the count reaches `cap`.
    pub fn count_in_rect_capped(&self, rect: &Rect, cap: usize) -> usize {
        let mut count = 0usize;
        self.for_each_in_rect(rect, &mut |_| {
            count += 1;
            count < cap
        });
        count
    }

    /// Lexicographically least point inside `rect`.
    pub fn lex_min_in_rect(&self, rect: &Rect) -> Option<u32> {
        let mut best: Option<u32> = None;
        for r in self.root_iter() {
            self.walk_lex_min(r, rect, &mut best);
        }
        best
    }

    fn walk_lex_min(&self, node: u32, rect: &Rect, best: &mut Option<u32>) {
        let n = &self.nodes[node as usize];
        let cell = n.cell.rect();
        if !cell.intersects(rect) {
            return;
        }
        let better = |cand: u32, best: &Option<u32>| match best {
            None => true,
            Some(b) => {
                self.points[cand as usize].lex_cmp(self.points[*b as usize])
                    == std::cmp::Ordering::Less
            }
        };
        let fully_inside = rect.x0 <= cell.x0 && cell.x1 <= rect.x1 && rect.y0 <= cell.y0 && cell.y1 <= rect.y1;
        if fully_inside {
            if better(n.lex_min, best) {
                *best = Some(n.lex_min);
            }
            return;
        }
        if n.is_leaf() {
            for &id in &self.ordered[n.start as usize..(n.start + n.len) as usize] {
                if rect.contains(self.points[id as usize]) && better(id, best) {
                    *best = Some(id);
                }
            }
            return;
        }
        // prune subtrees that cannot improve on the current best along x
        if let Some(b) = best {
            if self.points[*b as usize].x < cell.x0 {
                return;
            }
        }
        for c in n.children.iter().filter(|&&c| c != NO_CHILD) {
            self.walk_lex_min(*c, rect, best);
        }
    }

    /// True when no data point lies in `25 Q`.
    pub fn empty_query(&self, q: &DyadicSquare) -> bool {
        self.count_in_rect_capped(&q.dilate_odd(25), 1) == 0
    }

    /// A point of `E /\ 25Q`, in `E /\ 5Q` whenever that set is nonempty;
    /// lexicographically least among candidates.
    pub fn rep_query(&self, q: &DyadicSquare) -> Option<u32> {
        if let Some(id) = self.lex_min_in_rect(&q.dilate_odd(5)) {
            return Some(id);
        }
        self.lex_min_in_rect(&q.dilate_odd(25))
    }

    /// Exact list of ids in the dilated square `(1 + num/2^e) Q` (sorted).
    pub fn points_in_dilated(&self, q: &DyadicSquare, num: i64, e: u32) -> Vec<u32> {
        self.points_in_rect(&q.dilate_dyadic(num, e))
    }

    /// `k` nearest neighbors of `x`, ties broken by distance then
    /// lexicographic order then id.
    pub fn k_nearest(&self, x: Point2, k: usize) -> Vec<u32> {
        use std::cmp::Ordering;
        use std::collections::BinaryHeap;

        #[derive(PartialEq)]
        enum Entry {
            Node(f64, u32),
            Point(f64, u32),
        }
        impl Entry {
            fn dist(&self) -> f64 {
                match self {
                    Entry::Node(d, _) | Entry::Point(d, _) => *d,
                }
            }
        }
        impl Eq for Entry {}
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> Ordering {
                // min-heap by distance; points before nodes at equal distance
                other
                    .dist()
                    .partial_cmp(&self.dist())
                    .unwrap()
                    .then_with(|| match (self, other) {
                        (Entry::Point(_, a), Entry::Point(_, b)) => b.cmp(a),
                        (Entry::Point(..), Entry::Node(..)) => Ordering::Greater,
                        (Entry::Node(..), Entry::Point(..)) => Ordering::Less,
                        (Entry::Node(_, a), Entry::Node(_, b)) => b.cmp(a),
                    })
            }
        }

        let k = k.min(self.points.len());
        if k == 0 {
            return vec![];
        }
        let mut heap = BinaryHeap::new();
        for r in self.root_iter() {
            heap.push(Entry::Node(self.nodes[r as usize].cell.rect().dist(x), r));
        }
        let mut out: Vec<(f64, u32)> = Vec::with_capacity(k + 8);
        while let Some(e) = heap.pop() {
            match e {
                Entry::Point(d, id) => {
                    out.push((d, id));
                    if out.len() >= k {
                        // collect any exact ties still pending for a
                        // deterministic cut
                        while let Some(t) = heap.peek() {
                            if t.dist() == d && matches!(t, Entry::Point(..)) {
                                if let Some(Entry::Point(d2, id2)) = heap.pop() {
                                    out.push((d2, id2));
                                }
                            } else {
                                break;
                            }
                        }
                        break;
                    }
                }
                Entry::Node(_, nid) => {
                    let n = &self.nodes[nid as usize];
                    if n.is_leaf() || n.len <= 8 {
                        for &id in &self.ordered[n.start as usize..(n.start + n.len) as usize] {
                            heap.push(Entry::Point(self.points[id as usize].dist(x), id));
                        }
                    } else {
                        for c in n.children.iter().filter(|&&c| c != NO_CHILD) {
                            heap.push(Entry::Node(
                                self.nodes[*c as usize].cell.rect().dist(x),
                                *c,
                            ));
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| {
            a.0.partial_cmp(&b.0).unwrap().then_with(|| {
                self.points[a.1 as usize]
                    .lex_cmp(self.points[b.1 as usize])
                    .then(a.1.cmp(&b.1))
            })
        });
        out.truncate(k);
        out.into_iter().map(|(_, id)| id).collect()
    }

    pub(crate) fn node_count(&self) -> usize {
        self.nodes.len()
    }
}
