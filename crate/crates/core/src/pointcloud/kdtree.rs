//! Balanced KD-tree over `D`-dimensional points.
//!
//! All distance tests use the same expression, `sqrt(sum((p_i - c_i)^2)) <= r`,
//! and node bounds are pruned with the same arithmetic. Floating-point
//! subtraction, squaring, summation and `sqrt` are all monotone, so the
//! distance from a query to a node's box never exceeds the computed distance to
//! any point inside it: pruning cannot drop a point the predicate would admit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const LEAF_SIZE: usize = 12;
const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node<const D: usize> {
    lo: [f64; D],
    hi: [f64; D],
    start: u32,
    end: u32,
    left: u32,
    right: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct KdTree<const D: usize> {
    points: Vec<[f64; D]>,
    ids: Vec<u32>,
    nodes: Vec<Node<D>>,
}

#[inline]
pub(crate) fn distance<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        let d = a[i] - b[i];
        s += d * d;
    }
    s.sqrt()
}

#[inline]
fn box_min_distance<const D: usize>(lo: &[f64; D], hi: &[f64; D], c: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        let d = if c[i] < lo[i] {
            lo[i] - c[i]
        } else if c[i] > hi[i] {
            c[i] - hi[i]
        } else {
            0.0
        };
        s += d * d;
    }
    s.sqrt()
}

#[inline]
fn box_max_distance<const D: usize>(lo: &[f64; D], hi: &[f64; D], c: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        let d = (c[i] - lo[i]).abs().max((hi[i] - c[i]).abs());
        s += d * d;
    }
    s.sqrt()
}

/// Candidate in the bounded k-nearest heap; the heap top is the current worst.
#[derive(Debug, PartialEq)]
struct Candidate {
    dist: f64,
    id: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist.total_cmp(&other.dist).then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const D: usize> KdTree<D> {
    /// Builds the tree. Point `i` of the iterator gets id `i`.
    pub(crate) fn build(points: impl IntoIterator<Item = [f64; D]>) -> Self {
        let mut items: Vec<([f64; D], u32)> = points.into_iter().enumerate().map(|(i, p)| (p, i as u32)).collect();
        let mut nodes = Vec::with_capacity(2 * items.len() / LEAF_SIZE + 1);
        if !items.is_empty() {
            build_node(&mut items, 0, &mut nodes);
        }
        let (points, ids) = items.into_iter().unzip();
        KdTree { points, ids, nodes }
    }

    pub(crate) fn len(&self) -> usize {
        self.points.len()
    }

    /// Ids of all points within `r` of `c` (boundary inclusive), unordered.
    pub(crate) fn within(&self, c: &[f64; D], r: f64, out: &mut Vec<u32>) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if box_min_distance(&node.lo, &node.hi, c) > r {
                continue;
            }
            let range = node.start as usize..node.end as usize;
            if box_max_distance(&node.lo, &node.hi, c) <= r {
                out.extend_from_slice(&self.ids[range]);
            } else if node.left == NONE {
                for i in range {
                    if distance(&self.points[i], c) <= r {
                        out.push(self.ids[i]);
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
    }

    /// Nearest point accepted by `keep`, skipping subtrees rejected by
    /// `keep_box(lo, hi)`. Returns `(id, distance)`; ties resolve to the lower id.
    pub(crate) fn nearest_filtered(
        &self,
        c: &[f64; D],
        keep: impl Fn(&[f64; D]) -> bool,
        keep_box: impl Fn(&[f64; D], &[f64; D]) -> bool,
    ) -> Option<(u32, f64)> {
        let mut best: Option<(u32, f64)> = None;
        if !self.nodes.is_empty() {
            self.nearest_rec(0, c, &keep, &keep_box, &mut best);
        }
        best
    }

    fn nearest_rec(
        &self,
        n: u32,
        c: &[f64; D],
        keep: &impl Fn(&[f64; D]) -> bool,
        keep_box: &impl Fn(&[f64; D], &[f64; D]) -> bool,
        best: &mut Option<(u32, f64)>,
    ) {
        let node = &self.nodes[n as usize];
        if !keep_box(&node.lo, &node.hi) {
            return;
        }
        if let Some((_, d)) = best {
            if box_min_distance(&node.lo, &node.hi, c) > *d {
                return;
            }
        }
        if node.left == NONE {
            for i in node.start as usize..node.end as usize {
                let p = &self.points[i];
                if !keep(p) {
                    continue;
                }
                let d = distance(p, c);
                let id = self.ids[i];
                let better = match best {
                    None => true,
                    Some((bid, bd)) => d < *bd || (d == *bd && id < *bid),
                };
                if better {
                    *best = Some((id, d));
                }
            }
            return;
        }
        let (l, r) = (&self.nodes[node.left as usize], &self.nodes[node.right as usize]);
        let dl = box_min_distance(&l.lo, &l.hi, c);
        let dr = box_min_distance(&r.lo, &r.hi, c);
        let (first, second) = if dl <= dr { (node.left, node.right) } else { (node.right, node.left) };
        self.nearest_rec(first, c, keep, keep_box, best);
        self.nearest_rec(second, c, keep, keep_box, best);
    }

    /// The `k` nearest ids ordered by increasing distance (ties by id).
    pub(crate) fn k_nearest(&self, c: &[f64; D], k: usize) -> Vec<(u32, f64)> {
        let mut heap = BinaryHeap::with_capacity(k + 1);
        if k > 0 && !self.nodes.is_empty() {
            self.knn_rec(0, c, k, &mut heap);
        }
        let mut out: Vec<(u32, f64)> = heap.into_iter().map(|c| (c.id, c.dist)).collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }

    fn knn_rec(&self, n: u32, c: &[f64; D], k: usize, heap: &mut BinaryHeap<Candidate>) {
        let node = &self.nodes[n as usize];
        if heap.len() == k {
            let worst = heap.peek().map(|w| w.dist).unwrap_or(f64::INFINITY);
            if box_min_distance(&node.lo, &node.hi, c) > worst {
                return;
            }
        }
        if node.left == NONE {
            for i in node.start as usize..node.end as usize {
                let cand = Candidate { dist: distance(&self.points[i], c), id: self.ids[i] };
                if heap.len() < k {
                    heap.push(cand);
                } else if heap.peek().is_some_and(|w| cand < *w) {
                    heap.pop();
                    heap.push(cand);
                }
            }
            return;
        }
        let (l, r) = (&self.nodes[node.left as usize], &self.nodes[node.right as usize]);
        let dl = box_min_distance(&l.lo, &l.hi, c);
        let dr = box_min_distance(&r.lo, &r.hi, c);
        let (first, second) = if dl <= dr { (node.left, node.right) } else { (node.right, node.left) };
        self.knn_rec(first, c, k, heap);
        self.knn_rec(second, c, k, heap);
    }
}

fn build_node<const D: usize>(items: &mut [([f64; D], u32)], offset: usize, nodes: &mut Vec<Node<D>>) -> u32 {
    let mut lo = [f64::INFINITY; D];
    let mut hi = [f64::NEG_INFINITY; D];
    for (p, _) in items.iter() {
        for i in 0..D {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let id = nodes.len() as u32;
    nodes.push(Node { lo, hi, start: offset as u32, end: (offset + items.len()) as u32, left: NONE, right: NONE });
    if items.len() <= LEAF_SIZE {
        return id;
    }
    let axis = (0..D).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap_or(0);
    if hi[axis] == lo[axis] {
        // All points coincide.
        return id;
    }
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| a.0[axis].total_cmp(&b.0[axis]).then(a.1.cmp(&b.1)));
    let (left_items, right_items) = items.split_at_mut(mid);
    let left = build_node(left_items, offset, nodes);
    let right = build_node(right_items, offset + mid, nodes);
    let node = &mut nodes[id as usize];
    node.left = left;
    node.right = right;
    id
}
