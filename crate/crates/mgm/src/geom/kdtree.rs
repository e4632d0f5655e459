//! Static kd-tree over points in R^3 for exact k-nearest-neighbor and
//! fixed-radius queries. Ties on distance break toward the lower index, so
//! queries are fully deterministic.

use crate::error::{Error, Result};
use crate::geom::{dist2, Vec3};

const LEAF_SIZE: usize = 16;

#[derive(Clone, Debug)]
enum Node {
    Leaf {
        begin: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Immutable spatial index; safe to query from multiple threads.
#[derive(Clone, Debug)]
pub struct KdTree {
    points: Vec<Vec3>,
    order: Vec<u32>,
    nodes: Vec<Node>,
    root: usize,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    d2: f64,
    idx: u32,
}

impl HeapEntry {
    #[inline]
    fn worse_than(&self, other: &HeapEntry) -> bool {
        // lexicographic on (distance, index): larger is worse
        self.d2 > other.d2 || (self.d2 == other.d2 && self.idx > other.idx)
    }
}

/// Fixed-capacity max-heap keeping the k best (smallest) entries.
struct BoundedHeap {
    entries: Vec<HeapEntry>,
    capacity: usize,
}

impl BoundedHeap {
    fn new(capacity: usize) -> Self {
        BoundedHeap {
            entries: Vec::with_capacity(capacity),
            capacity,
        }
    }

    fn full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    fn worst(&self) -> Option<HeapEntry> {
        self.entries.first().copied()
    }

    fn push(&mut self, e: HeapEntry) {
        if self.entries.len() < self.capacity {
            self.entries.push(e);
            let mut i = self.entries.len() - 1;
            while i > 0 {
                let parent = (i - 1) / 2;
                if self.entries[i].worse_than(&self.entries[parent]) {
                    self.entries.swap(i, parent);
                    i = parent;
                } else {
                    break;
                }
            }
        } else if self.entries[0].worse_than(&e) {
            self.entries[0] = e;
            let mut i = 0;
            loop {
                let (l, r) = (2 * i + 1, 2 * i + 2);
                let mut largest = i;
                if l < self.entries.len() && self.entries[l].worse_than(&self.entries[largest]) {
                    largest = l;
                }
                if r < self.entries.len() && self.entries[r].worse_than(&self.entries[largest]) {
                    largest = r;
                }
                if largest == i {
                    break;
                }
                self.entries.swap(i, largest);
                i = largest;
            }
        }
    }
}

impl KdTree {
    pub fn build(points: &[Vec3]) -> KdTree {
        let n = points.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::new();
        let root = if n == 0 {
            nodes.push(Node::Leaf { begin: 0, end: 0 });
            0
        } else {
            build_recursive(points, &mut order, &mut nodes, 0, n)
        };
        KdTree {
            points: points.to_vec(),
            order,
            nodes,
            root,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact k nearest neighbors of `query`, sorted by ascending distance with
    /// index tie-breaks. Errors if k exceeds the number of points.
    pub fn knn(&self, query: Vec3, k: usize) -> Result<Vec<usize>> {
        if k > self.points.len() {
            return Err(Error::InvalidArgument(format!(
                "knn: k = {} exceeds point count {}",
                k,
                self.points.len()
            )));
        }
        if k == 0 {
            return Ok(Vec::new());
        }
        let mut heap = BoundedHeap::new(k);
        self.knn_search(self.root, query, &mut heap);
        let mut out = heap.entries;
        out.sort_unstable_by(|a, b| a.d2.total_cmp(&b.d2).then(a.idx.cmp(&b.idx)));
        Ok(out.into_iter().map(|e| e.idx as usize).collect())
    }

    fn knn_search(&self, node: usize, query: Vec3, heap: &mut BoundedHeap) {
        match self.nodes[node] {
            Node::Leaf { begin, end } => {
                for &idx in &self.order[begin..end] {
                    let d2 = dist2(query, self.points[idx as usize]);
                    heap.push(HeapEntry { d2, idx });
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.knn_search(near, query, heap);
                let plane_d2 = diff * diff;
                let must_visit = match heap.worst() {
                    Some(w) if heap.full() => plane_d2 <= w.d2,
                    _ => true,
                };
                if must_visit {
                    self.knn_search(far, query, heap);
                }
            }
        }
    }

    /// All indices within `radius` (inclusive) of `query`, sorted by index.
    pub fn within_radius(&self, query: Vec3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.radius_search(self.root, query, radius, radius * radius, &mut out);
        out.sort_unstable();
        out
    }

    fn radius_search(&self, node: usize, query: Vec3, r: f64, r2: f64, out: &mut Vec<usize>) {
        match self.nodes[node] {
            Node::Leaf { begin, end } => {
                for &idx in &self.order[begin..end] {
                    if dist2(query, self.points[idx as usize]) <= r2 {
                        out.push(idx as usize);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                if diff <= r {
                    self.radius_search(left, query, r, r2, out);
                }
                if -diff <= r {
                    self.radius_search(right, query, r, r2, out);
                }
            }
        }
    }
}

fn build_recursive(
    points: &[Vec3],
    order: &mut [u32],
    nodes: &mut Vec<Node>,
    begin: usize,
    end: usize,
) -> usize {
    if end - begin <= LEAF_SIZE {
        nodes.push(Node::Leaf { begin, end });
        return nodes.len() - 1;
    }
    // split along the widest axis at the median
    let slice = &mut order[begin..end];
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &idx in slice.iter() {
        let p = points[idx as usize];
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let mut axis = 0;
    for a in 1..3 {
        if hi[a] - lo[a] > hi[axis] - lo[axis] {
            axis = a;
        }
    }
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .total_cmp(&points[b as usize][axis])
            .then(a.cmp(&b))
    });
    let split_value = points[slice[mid] as usize][axis];
    let node_slot = nodes.len();
    nodes.push(Node::Leaf { begin: 0, end: 0 }); // placeholder
    let left = build_recursive(points, order, nodes, begin, begin + mid);
    let right = build_recursive(points, order, nodes, begin + mid, end);
    nodes[node_slot] = Node::Split {
        axis,
        value: split_value,
        left,
        right,
    };
    node_slot
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn brute_force_knn(points: &[Vec3], query: Vec3, k: usize) -> Vec<usize> {
        let mut all: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, &p)| (dist2(query, p), i))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|(_, i)| i).collect()
    }

    #[test]
    fn self_is_nearest() {
        let pts = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0]];
        let tree = KdTree::build(&pts);
        assert_eq!(tree.knn(pts[1], 1).unwrap(), vec![1]);
    }

    #[test]
    fn grid_interior_point_neighbors() {
        // 10x10 unit grid in the plane: self plus the four axis neighbors
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                pts.push([i as f64, j as f64, 0.0]);
            }
        }
        let tree = KdTree::build(&pts);
        let center = 5 * 10 + 5;
        let nbrs = tree.knn(pts[center], 5).unwrap();
        assert_eq!(nbrs[0], center);
        let mut rest = nbrs[1..].to_vec();
        rest.sort_unstable();
        let mut expected = vec![4 * 10 + 5, 5 * 10 + 4, 5 * 10 + 6, 6 * 10 + 5];
        expected.sort_unstable();
        assert_eq!(rest, expected);
    }

    #[test]
    fn matches_brute_force_on_random_cloud() {
        let mut rng = StdRng::seed_from_u64(123);
        let pts: Vec<Vec3> = (0..200)
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]
            })
            .collect();
        let tree = KdTree::build(&pts);
        for k in [1, 2, 7, 20, 200] {
            for probe in 0..20 {
                let q = pts[probe * 7 % pts.len()];
                assert_eq!(
                    tree.knn(q, k).unwrap(),
                    brute_force_knn(&pts, q, k),
                    "k = {k}, probe = {probe}"
                );
            }
        }
    }

    #[test]
    fn k_larger_than_cloud_errors() {
        let tree = KdTree::build(&[[0.0; 3]]);
        assert!(tree.knn([0.0; 3], 2).is_err());
    }

    #[test]
    fn radius_query_matches_scan() {
        let mut rng = StdRng::seed_from_u64(77);
        let pts: Vec<Vec3> = (0..300)
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]
            })
            .collect();
        let tree = KdTree::build(&pts);
        for probe in 0..10 {
            let q = pts[probe * 13];
            let r = 0.4;
            let got = tree.within_radius(q, r);
            let expected: Vec<usize> = (0..pts.len())
                .filter(|&i| dist2(q, pts[i]) <= r * r)
                .collect();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn exact_distance_ties_break_by_index() {
        // four points at identical distance from the origin
        let pts = vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0],
        ];
        let tree = KdTree::build(&pts);
        assert_eq!(tree.knn([0.0; 3], 3).unwrap(), vec![4, 0, 1]);
    }
}
