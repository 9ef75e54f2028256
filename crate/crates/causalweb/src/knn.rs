//! Chebyshev-metric neighbor machinery: a bucketed k-d tree for k-th
//! neighbor distances and strict fixed-radius counts, a sorted-array
//! specialization for one-dimensional marginals, and brute-force
//! equivalents that serve as the testing oracle.
//!
//! All queries are pure set functions of the point cloud (order statistics
//! and strict counts), so results do not depend on tree layout, insertion
//! order, or thread count.

/// Row-major sample matrix: `n` points of dimension `dim`.
#[derive(Debug, Clone)]
pub struct PointSet {
    pub data: Vec<f64>,
    pub n: usize,
    pub dim: usize,
}

impl PointSet {
    pub fn from_columns(cols: &[&[f64]]) -> PointSet {
        assert!(!cols.is_empty(), "need at least one column");
        let n = cols[0].len();
        let dim = cols.len();
        debug_assert!(cols.iter().all(|c| c.len() == n));
        let mut data = Vec::with_capacity(n * dim);
        for i in 0..n {
            for c in cols {
                data.push(c[i]);
            }
        }
        PointSet { data, n, dim }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

#[inline]
pub fn chebyshev(a: &[f64], b: &[f64]) -> f64 {
    let mut d = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let v = (x - y).abs();
        if v > d {
            d = v;
        }
    }
    d
}

/// Chebyshev distance with early exit once `bound` is reached.
#[inline]
fn chebyshev_bounded(a: &[f64], b: &[f64], bound: f64) -> f64 {
    let mut d = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let v = (x - y).abs();
        if v > d {
            if v >= bound {
                return v;
            }
            d = v;
        }
    }
    d
}

const LEAF_SIZE: usize = 24;

struct Node {
    /// Point range [start, end) in the reordered buffer.
    start: u32,
    end: u32,
    /// Children indices; u32::MAX marks a leaf.
    left: u32,
    right: u32,
    /// Axis-aligned bounding box of the points in this node.
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Node {
    #[inline]
    fn is_leaf(&self) -> bool {
        self.left == u32::MAX
    }

    /// Smallest possible Chebyshev distance from `q` to any point in the box.
    #[inline]
    fn min_dist(&self, q: &[f64]) -> f64 {
        let mut d = 0.0f64;
        for i in 0..q.len() {
            let v = (self.lo[i] - q[i]).max(q[i] - self.hi[i]);
            if v > d {
                d = v;
            }
        }
        d
    }

    /// Largest possible Chebyshev distance from `q` to any point in the box.
    #[inline]
    fn max_dist(&self, q: &[f64]) -> f64 {
        let mut d = 0.0f64;
        for i in 0..q.len() {
            let v = (q[i] - self.lo[i]).max(self.hi[i] - q[i]);
            if v > d {
                d = v;
            }
        }
        d
    }
}

/// Bucketed k-d tree over a copied, reordered point buffer.
pub struct KdTree {
    dim: usize,
    pts: Vec<f64>,
    nodes: Vec<Node>,
    root: u32,
}

impl KdTree {
    pub fn build(points: &PointSet) -> KdTree {
        let n = points.n;
        let dim = points.dim;
        assert!(n > 0);
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::with_capacity(2 * (n / LEAF_SIZE + 1));
        let root = Self::build_node(points, &mut order, 0, n, &mut nodes);
        // lay points out in leaf order for cache-friendly scans
        let mut pts = Vec::with_capacity(n * dim);
        for &i in &order {
            pts.extend_from_slice(points.row(i as usize));
        }
        KdTree {
            dim,
            pts,
            nodes,
            root,
        }
    }

    fn build_node(
        points: &PointSet,
        order: &mut [u32],
        start: usize,
        end: usize,
        nodes: &mut Vec<Node>,
    ) -> u32 {
        let dim = points.dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &order[start..end] {
            let row = points.row(i as usize);
            for d in 0..dim {
                if row[d] < lo[d] {
                    lo[d] = row[d];
                }
                if row[d] > hi[d] {
                    hi[d] = row[d];
                }
            }
        }

        if end - start <= LEAF_SIZE {
            nodes.push(Node {
                start: start as u32,
                end: end as u32,
                left: u32::MAX,
                right: u32::MAX,
                lo,
                hi,
            });
            return (nodes.len() - 1) as u32;
        }

        // split on the axis with the widest spread
        let axis = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).partial_cmp(&(hi[b] - lo[b])).unwrap())
            .unwrap();
        let mid = (start + end) / 2;
        order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            let va = points.row(a as usize)[axis];
            let vb = points.row(b as usize)[axis];
            va.partial_cmp(&vb).unwrap().then(a.cmp(&b))
        });

        let left = Self::build_node(points, order, start, mid, nodes);
        let right = Self::build_node(points, order, mid, end, nodes);
        nodes.push(Node {
            start: start as u32,
            end: end as u32,
            left,
            right,
            lo,
            hi,
        });
        (nodes.len() - 1) as u32
    }

    #[inline]
    fn leaf_rows(&self, node: &Node) -> impl Iterator<Item = &[f64]> {
        (node.start as usize..node.end as usize).map(move |i| &self.pts[i * self.dim..(i + 1) * self.dim])
    }

    /// Distance to the k-th nearest point counting the query point itself
    /// when it is part of the cloud; pass k+1 to exclude an exact self-match.
    pub fn kth_distance(&self, q: &[f64], k: usize) -> f64 {
        debug_assert!(k >= 1);
        let mut best = KBest::new(k);
        self.knn_rec(self.root, q, &mut best);
        best.worst()
    }

    fn knn_rec(&self, node_idx: u32, q: &[f64], best: &mut KBest) {
        let node = &self.nodes[node_idx as usize];
        if node.min_dist(q) >= best.worst() {
            return;
        }
        if node.is_leaf() {
            for row in self.leaf_rows(node) {
                let d = chebyshev_bounded(row, q, best.worst());
                if d < best.worst() {
                    best.push(d);
                }
            }
            return;
        }
        let l = node.left;
        let r = node.right;
        let dl = self.nodes[l as usize].min_dist(q);
        let dr = self.nodes[r as usize].min_dist(q);
        if dl <= dr {
            self.knn_rec(l, q, best);
            if dr < best.worst() {
                self.knn_rec(r, q, best);
            }
        } else {
            self.knn_rec(r, q, best);
            if dl < best.worst() {
                self.knn_rec(l, q, best);
            }
        }
    }

    /// Number of points at Chebyshev distance strictly less than `r` from
    /// `q`, including the query point itself when it is in the cloud.
    pub fn count_within_strict(&self, q: &[f64], r: f64) -> usize {
        if r <= 0.0 {
            return 0;
        }
        self.count_rec(self.root, q, r)
    }

    fn count_rec(&self, node_idx: u32, q: &[f64], r: f64) -> usize {
        let node = &self.nodes[node_idx as usize];
        if node.min_dist(q) >= r {
            return 0;
        }
        if node.max_dist(q) < r {
            return (node.end - node.start) as usize;
        }
        if node.is_leaf() {
            let mut c = 0;
            for row in self.leaf_rows(node) {
                if chebyshev_bounded(row, q, r) < r {
                    c += 1;
                }
            }
            return c;
        }
        self.count_rec(node.left, q, r) + self.count_rec(node.right, q, r)
    }
}

/// Fixed-capacity container for the k smallest distances seen so far.
struct KBest {
    dists: Vec<f64>,
    filled: usize,
}

impl KBest {
    fn new(k: usize) -> KBest {
        KBest {
            dists: vec![f64::INFINITY; k],
            filled: 0,
        }
    }

    #[inline]
    fn worst(&self) -> f64 {
        self.dists[self.dists.len() - 1]
    }

    #[inline]
    fn push(&mut self, d: f64) {
        // insertion sort into a short array (k <= ~10 in practice)
        let mut i = self.filled.min(self.dists.len() - 1);
        while i > 0 && self.dists[i - 1] > d {
            self.dists[i] = self.dists[i - 1];
            i -= 1;
        }
        self.dists[i] = d;
        if self.filled < self.dists.len() {
            self.filled += 1;
        }
    }
}

/// Sorted-column index for one-dimensional marginals.
pub struct SortedColumn {
    vals: Vec<f64>,
}

impl SortedColumn {
    pub fn build(col: &[f64]) -> SortedColumn {
        let mut vals = col.to_vec();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        SortedColumn { vals }
    }

    /// Count of values v with |v - q| < r, including the query sample itself.
    pub fn count_within_strict(&self, q: f64, r: f64) -> usize {
        if r <= 0.0 {
            return 0;
        }
        let above = self.vals.partition_point(|&v| v < q + r);
        let below = self.vals.partition_point(|&v| v <= q - r);
        above - below
    }
}

/// Marginal-count index: a k-d tree in general, a sorted column when the
/// subspace is one-dimensional.
pub enum MarginalIndex {
    Tree(KdTree),
    Column(SortedColumn),
    /// Zero-dimensional subspace: every point is within any positive radius.
    Empty { n: usize },
}

impl MarginalIndex {
    pub fn build(points: Option<&PointSet>, n: usize) -> MarginalIndex {
        match points {
            None => MarginalIndex::Empty { n },
            Some(p) if p.dim == 1 => {
                let col: Vec<f64> = (0..p.n).map(|i| p.data[i]).collect();
                MarginalIndex::Column(SortedColumn::build(&col))
            }
            Some(p) => MarginalIndex::Tree(KdTree::build(p)),
        }
    }

    /// Strict count including the query point itself.
    pub fn count_within_strict(&self, q: &[f64], r: f64) -> usize {
        match self {
            MarginalIndex::Tree(t) => t.count_within_strict(q, r),
            MarginalIndex::Column(c) => c.count_within_strict(q[0], r),
            MarginalIndex::Empty { n } => {
                if r > 0.0 {
                    *n
                } else {
                    0
                }
            }
        }
    }
}

/// Brute-force k-th distance (including self); the testing oracle.
pub fn brute_kth_distance(points: &PointSet, q: &[f64], k: usize) -> f64 {
    let mut dists: Vec<f64> = (0..points.n).map(|i| chebyshev(points.row(i), q)).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dists[k - 1]
}

/// Brute-force strict radius count (including self); the testing oracle.
pub fn brute_count_within_strict(points: &PointSet, q: &[f64], r: f64) -> usize {
    (0..points.n)
        .filter(|&i| chebyshev(points.row(i), q) < r)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_points(n: usize, dim: usize, seed: u64) -> PointSet {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        PointSet { data, n, dim }
    }

    #[test]
    fn tree_matches_brute_force() {
        for &(n, dim) in &[(64usize, 1usize), (257, 2), (500, 3), (511, 5)] {
            let pts = random_points(n, dim, 1000 + n as u64 + dim as u64);
            let tree = KdTree::build(&pts);
            for i in (0..n).step_by(13) {
                let q = pts.row(i);
                for k in [1, 4, 5] {
                    let td = tree.kth_distance(q, k);
                    let bd = brute_kth_distance(&pts, q, k);
                    assert_eq!(td, bd, "kth mismatch n={n} dim={dim} k={k}");
                }
                for r in [1e-9, 0.05, 0.3, 1.5, 5.0] {
                    let tc = tree.count_within_strict(q, r);
                    let bc = brute_count_within_strict(&pts, q, r);
                    assert_eq!(tc, bc, "count mismatch n={n} dim={dim} r={r}");
                }
            }
        }
    }

    #[test]
    fn sorted_column_matches_brute_force() {
        let pts = random_points(301, 1, 9);
        let col: Vec<f64> = (0..pts.n).map(|i| pts.data[i]).collect();
        let sc = SortedColumn::build(&col);
        for i in (0..pts.n).step_by(7) {
            for r in [0.0, 1e-6, 0.1, 0.9, 3.0] {
                assert_eq!(
                    sc.count_within_strict(col[i], r),
                    brute_count_within_strict(&pts, pts.row(i), r)
                );
            }
        }
    }

    #[test]
    fn strict_counting_excludes_radius_ties() {
        let pts = PointSet::from_columns(&[&[0.0, 1.0, 2.0, 3.0]]);
        let tree = KdTree::build(&pts);
        // distance exactly 1.0 must not be counted
        assert_eq!(tree.count_within_strict(&[1.0], 1.0), 1);
        assert_eq!(tree.count_within_strict(&[1.0], 1.0 + 1e-12), 3);
        let sc = SortedColumn::build(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(sc.count_within_strict(1.0, 1.0), 1);
    }

    #[test]
    fn kth_distance_with_ties_is_the_order_statistic() {
        // four points at distance 0.5 from the query point
        let pts = PointSet::from_columns(&[&[0.0, 0.5, 0.5, -0.5, -0.5, 2.0]]);
        let tree = KdTree::build(&pts);
        assert_eq!(tree.kth_distance(&[0.0], 2), 0.5);
        assert_eq!(tree.kth_distance(&[0.0], 5), 0.5);
        assert_eq!(tree.kth_distance(&[0.0], 6), 2.0);
    }
}
