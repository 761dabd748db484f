//! Exact k-nearest-neighbor search over 6-dimensional feature vectors.
//!
//! A static kd-tree with bucket leaves. Splits are at the median along the
//! widest dimension of each subset, so the tree is balanced regardless of
//! data distribution. Search is exact: it returns precisely the k closest
//! points under squared Euclidean distance, with ties broken by ascending
//! point position. Given the same point set, build and search are fully
//! deterministic, which the rest of the pipeline relies on for reproducible
//! output and stable on-disk indexes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::types::FEATURE_DIM;

/// Points per leaf bucket. Small enough to keep scans cheap, large enough
/// that the tree stays shallow and build stays fast.
const LEAF_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Node {
    Split {
        dim: u8,
        value: f64,
        /// Index of the right child; the left child is always the next node.
        right: u32,
    },
    Leaf {
        start: u32,
        len: u32,
    },
}

/// One search result: the point's position in the original input order and
/// its squared distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeNeighbor {
    pub position: u32,
    pub dist2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdTree {
    nodes: Vec<Node>,
    /// Points rearranged into leaf order.
    points: Vec<[f64; FEATURE_DIM]>,
    /// Maps leaf order back to original positions.
    positions: Vec<u32>,
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    dist2: f64,
    position: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic (dist2, position). The max-heap keeps the worst kept
/// candidate on top; ties in distance resolve toward smaller positions.
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.position.cmp(&other.position))
    }
}

pub(crate) fn dist2(a: &[f64; FEATURE_DIM], b: &[f64; FEATURE_DIM]) -> f64 {
    let mut acc = 0.0;
    for d in 0..FEATURE_DIM {
        let diff = a[d] - b[d];
        acc += diff * diff;
    }
    acc
}

impl KdTree {
    /// Builds the tree. Point positions (indices into `points`) are the
    /// tie-breaking order for searches, so callers control tie semantics
    /// by how they arrange the input.
    pub fn build(points: Vec<[f64; FEATURE_DIM]>) -> KdTree {
        let n = points.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::new();
        if n > 0 {
            build_node(&points, &mut order, 0, n, &mut nodes);
        }
        let reordered = order.iter().map(|&i| points[i as usize]).collect();
        KdTree {
            nodes,
            points: reordered,
            positions: order,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact k nearest neighbors, ascending by (dist2, position). Returns
    /// all points when k exceeds the tree size.
    pub fn nearest(&self, query: &[f64; FEATURE_DIM], k: usize) -> Vec<TreeNeighbor> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::with_capacity(k + 1);
        let mut off = [0.0f64; FEATURE_DIM];
        self.search(0, query, k, &mut heap, 0.0, &mut off);
        heap.into_sorted_vec()
            .into_iter()
            .map(|e| TreeNeighbor {
                position: e.position,
                dist2: e.dist2,
            })
            .collect()
    }

    fn search(
        &self,
        node: u32,
        query: &[f64; FEATURE_DIM],
        k: usize,
        heap: &mut BinaryHeap<HeapEntry>,
        rd: f64,
        off: &mut [f64; FEATURE_DIM],
    ) {
        match self.nodes[node as usize] {
            Node::Leaf { start, len } => {
                for i in start..start + len {
                    let d2 = dist2(&self.points[i as usize], query);
                    let entry = HeapEntry {
                        dist2: d2,
                        position: self.positions[i as usize],
                    };
                    if heap.len() < k {
                        heap.push(entry);
                    } else if entry < *heap.peek().expect("heap is non-empty") {
                        heap.pop();
                        heap.push(entry);
                    }
                }
            }
            Node::Split { dim, value, right } => {
                let d = dim as usize;
                let diff = query[d] - value;
                let (near, far) = if diff < 0.0 {
                    (node + 1, right)
                } else {
                    (right, node + 1)
                };
                self.search(near, query, k, heap, rd, off);
                let old = off[d];
                let far_rd = rd - old * old + diff * diff;
                // A far-side point can tie the current worst at exactly
                // far_rd, and ties resolve by position, so the far side
                // must be visited on equality as well.
                let must_visit = heap.len() < k
                    || far_rd <= heap.peek().expect("heap is non-empty").dist2;
                if must_visit {
                    off[d] = diff;
                    self.search(far, query, k, heap, far_rd, off);
                    off[d] = old;
                }
            }
        }
    }

    pub(crate) fn parts(&self) -> (&[Node], &[[f64; FEATURE_DIM]], &[u32]) {
        (&self.nodes, &self.points, &self.positions)
    }

    /// Reassembles a tree from stored parts, validating structure: children
    /// in bounds, leaves exactly partitioning the point range in order.
    pub(crate) fn from_parts(
        nodes: Vec<Node>,
        points: Vec<[f64; FEATURE_DIM]>,
        positions: Vec<u32>,
    ) -> Result<KdTree, String> {
        let n = points.len();
        if positions.len() != n {
            return Err(format!(
                "position map has {} entries for {} points",
                positions.len(),
                n
            ));
        }
        if n == 0 {
            if nodes.is_empty() {
                return Ok(KdTree {
                    nodes,
                    points,
                    positions,
                });
            }
            return Err("nodes present for an empty tree".to_string());
        }
        if nodes.is_empty() {
            return Err("no nodes for a non-empty tree".to_string());
        }
        let mut covered = 0u64;
        for (i, node) in nodes.iter().enumerate() {
            match *node {
                Node::Leaf { start, len } => {
                    if start as u64 != covered {
                        return Err(format!("leaf {i} starts at {start}, expected {covered}"));
                    }
                    if len == 0 {
                        return Err(format!("leaf {i} is empty"));
                    }
                    covered += len as u64;
                }
                Node::Split { dim, value, right } => {
                    if dim as usize >= FEATURE_DIM {
                        return Err(format!("split {i} on dimension {dim}"));
                    }
                    if !value.is_finite() {
                        return Err(format!("split {i} at non-finite value"));
                    }
                    if (right as usize) <= i + 1 || (right as usize) >= nodes.len() {
                        return Err(format!("split {i} right child {right} out of range"));
                    }
                }
            }
        }
        if covered != n as u64 {
            return Err(format!("leaves cover {covered} points, expected {n}"));
        }
        let mut seen = vec![false; n];
        for &pos in &positions {
            match seen.get_mut(pos as usize) {
                Some(slot) if !*slot => *slot = true,
                Some(_) => return Err(format!("position {pos} appears twice")),
                None => return Err(format!("position {pos} out of range for {n} points")),
            }
        }
        Ok(KdTree {
            nodes,
            points,
            positions,
        })
    }
}

/// Recursively builds the subtree over `order[lo..hi]`, appending nodes in
/// preorder. Returns the index of the subtree root.
fn build_node(
    points: &[[f64; FEATURE_DIM]],
    order: &mut [u32],
    lo: usize,
    hi: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let this = nodes.len() as u32;
    let len = hi - lo;
    if len <= LEAF_SIZE {
        // Canonical leaf layout: ascending by position. Makes the built
        // structure independent of the input permutation that produced
        // the (position-sorted) point array upstream.
        order[lo..hi].sort_unstable();
        nodes.push(Node::Leaf {
            start: lo as u32,
            len: len as u32,
        });
        return this;
    }

    // Split along the widest dimension of this subset.
    let mut best_dim = 0usize;
    let mut best_spread = -1.0f64;
    for d in 0..FEATURE_DIM {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &i in &order[lo..hi] {
            let v = points[i as usize][d];
            min = min.min(v);
            max = max.max(v);
        }
        let spread = max - min;
        if spread > best_spread {
            best_spread = spread;
            best_dim = d;
        }
    }

    let mid = lo + len / 2;
    order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
        points[a as usize][best_dim]
            .total_cmp(&points[b as usize][best_dim])
            .then(a.cmp(&b))
    });
    let value = points[order[mid] as usize][best_dim];

    nodes.push(Node::Split {
        dim: best_dim as u8,
        value,
        right: 0, // patched after the left subtree is built
    });
    build_node(points, order, lo, mid, nodes);
    let right = build_node(points, order, mid, hi, nodes);
    match &mut nodes[this as usize] {
        Node::Split { right: slot, .. } => *slot = right,
        Node::Leaf { .. } => unreachable!("split node was just pushed"),
    }
    this
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Reference implementation: full scan, same distance arithmetic, same
    /// (dist2, position) ordering.
    fn brute_force(
        points: &[[f64; FEATURE_DIM]],
        query: &[f64; FEATURE_DIM],
        k: usize,
    ) -> Vec<TreeNeighbor> {
        let mut all: Vec<TreeNeighbor> = points
            .iter()
            .enumerate()
            .map(|(i, p)| TreeNeighbor {
                position: i as u32,
                dist2: dist2(p, query),
            })
            .collect();
        all.sort_by(|a, b| {
            a.dist2
                .total_cmp(&b.dist2)
                .then(a.position.cmp(&b.position))
        });
        all.truncate(k);
        all
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize, quantize: bool) -> Vec<[f64; FEATURE_DIM]> {
        (0..n)
            .map(|_| {
                let mut p = [0.0; FEATURE_DIM];
                for v in &mut p {
                    *v = if quantize {
                        // Coarse grid produces many exact distance ties.
                        (rng.random_range(-3.0f64..3.0) * 2.0).round() / 2.0
                    } else {
                        rng.random_range(-3.0f64..3.0)
                    };
                }
                p
            })
            .collect()
    }

    #[test]
    fn line_of_points_hand_checked() {
        let points: Vec<[f64; FEATURE_DIM]> = (0..10)
            .map(|i| {
                let mut p = [0.0; FEATURE_DIM];
                p[0] = i as f64;
                p
            })
            .collect();
        let tree = KdTree::build(points);
        let mut query = [0.0; FEATURE_DIM];
        query[0] = 2.2;
        let got = tree.nearest(&query, 3);
        let positions: Vec<u32> = got.iter().map(|n| n.position).collect();
        assert_eq!(positions, vec![2, 3, 1]);
        assert!((got[0].dist2 - 0.04).abs() < 1e-12);
        assert!((got[1].dist2 - 0.64).abs() < 1e-12);
        assert!((got[2].dist2 - 1.44).abs() < 1e-12);
    }

    #[test]
    fn ties_resolve_to_smallest_positions() {
        // 50 copies of the same point: neighbors must be positions 0..k.
        let points = vec![[1.0; FEATURE_DIM]; 50];
        let tree = KdTree::build(points);
        let got = tree.nearest(&[1.0; FEATURE_DIM], 7);
        let positions: Vec<u32> = got.iter().map(|n| n.position).collect();
        assert_eq!(positions, vec![0, 1, 2, 3, 4, 5, 6]);
        assert!(got.iter().all(|n| n.dist2 == 0.0));
    }

    #[test]
    fn k_larger_than_tree_returns_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let points = random_points(&mut rng, 5, false);
        let tree = KdTree::build(points.clone());
        let query = [0.1; FEATURE_DIM];
        assert_eq!(tree.nearest(&query, 100), brute_force(&points, &query, 100));
        assert_eq!(tree.nearest(&query, 100).len(), 5);
    }

    #[test]
    fn empty_and_zero_k() {
        let tree = KdTree::build(Vec::new());
        assert!(tree.nearest(&[0.0; FEATURE_DIM], 5).is_empty());
        let tree = KdTree::build(vec![[1.0; FEATURE_DIM]]);
        assert!(tree.nearest(&[0.0; FEATURE_DIM], 0).is_empty());
    }

    #[test]
    fn matches_brute_force_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for &(n, quantize) in &[(100usize, false), (500, true), (1000, false), (1500, true)] {
            let points = random_points(&mut rng, n, quantize);
            let tree = KdTree::build(points.clone());
            for _ in 0..50 {
                let mut query = [0.0; FEATURE_DIM];
                for v in &mut query {
                    *v = rng.random_range(-3.5f64..3.5);
                }
                for &k in &[1usize, 2, 17, 64] {
                    let got = tree.nearest(&query, k);
                    let want = brute_force(&points, &query, k);
                    assert_eq!(got, want, "n={n} quantize={quantize} k={k}");
                }
            }
        }
    }

    #[test]
    fn query_on_a_point_of_the_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points = random_points(&mut rng, 300, true);
        let tree = KdTree::build(points.clone());
        for i in [0usize, 150, 299] {
            let got = tree.nearest(&points[i], 5);
            assert_eq!(got, brute_force(&points, &points[i], 5));
            assert_eq!(got[0].dist2, 0.0);
        }
    }

    #[test]
    fn build_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let points = random_points(&mut rng, 800, true);
        let a = KdTree::build(points.clone());
        let b = KdTree::build(points);
        assert_eq!(a, b);
    }

    #[test]
    fn from_parts_round_trips_and_validates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let points = random_points(&mut rng, 200, false);
        let tree = KdTree::build(points);
        let (nodes, pts, pos) = tree.parts();
        let rebuilt =
            KdTree::from_parts(nodes.to_vec(), pts.to_vec(), pos.to_vec()).unwrap();
        assert_eq!(rebuilt, tree);

        // Corrupt a leaf range: must be rejected.
        let mut bad_nodes = nodes.to_vec();
        for node in bad_nodes.iter_mut() {
            if let Node::Leaf { len, .. } = node {
                *len += 1;
                break;
            }
        }
        assert!(KdTree::from_parts(bad_nodes, pts.to_vec(), pos.to_vec()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exact_against_brute_force(
            seed in any::<u64>(),
            n in 1usize..400,
            k in 1usize..50,
            quantize in any::<bool>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points = random_points(&mut rng, n, quantize);
            let tree = KdTree::build(points.clone());
            let mut query = [0.0; FEATURE_DIM];
            for v in &mut query {
                *v = rng.random_range(-3.5f64..3.5);
            }
            prop_assert_eq!(tree.nearest(&query, k), brute_force(&points, &query, k));
        }
    }
}
