//! Weighted sample elimination: greedy thinning of a point cloud to an exact
//! target size with near-maximal separation distance.
//!
//! Each point is weighted by how crowded it is, `w_i = sum_j (1 - d_ij /
//! (2 r_max))^8` over neighbors within `2 r_max`; the heaviest point is
//! removed and its neighbors' weights decremented until the target count
//! remains.

use crate::error::{Error, Result};
use crate::geom::{dist, KdTree, PointCloud};

/// Indexed max-heap over (weight, point); supports lazy key decreases.
pub struct EliminationHeap {
    weights: Vec<f64>,
    heap: Vec<u32>,
    pos: Vec<u32>,
}

const REMOVED: u32 = u32::MAX;

impl EliminationHeap {
    pub fn new(weights: Vec<f64>) -> Self {
        let n = weights.len();
        let heap: Vec<u32> = (0..n as u32).collect();
        let pos: Vec<u32> = (0..n as u32).collect();
        let mut h = EliminationHeap { weights, heap, pos };
        if n > 1 {
            for i in (0..n / 2).rev() {
                h.sift_down(i);
            }
        }
        h
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.pos[i] != REMOVED
    }

    /// heaviest first; ties break toward the lower index
    #[inline]
    fn before(&self, a: u32, b: u32) -> bool {
        let (wa, wb) = (self.weights[a as usize], self.weights[b as usize]);
        wa > wb || (wa == wb && a < b)
    }

    fn sift_down(&mut self, mut i: usize) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut top = i;
            if l < self.heap.len() && self.before(self.heap[l], self.heap[top]) {
                top = l;
            }
            if r < self.heap.len() && self.before(self.heap[r], self.heap[top]) {
                top = r;
            }
            if top == i {
                break;
            }
            self.swap_slots(i, top);
            i = top;
        }
    }

    fn swap_slots(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a] as usize] = a as u32;
        self.pos[self.heap[b] as usize] = b as u32;
    }

    /// Remove and return the heaviest live point.
    pub fn pop(&mut self) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0] as usize;
        let last = self.heap.len() - 1;
        self.swap_slots(0, last);
        self.heap.pop();
        self.pos[top] = REMOVED;
        if !self.heap.is_empty() {
            self.sift_down(0);
        }
        Some(top)
    }

    /// Decrease the weight of a live point and restore the heap property.
    pub fn decrease(&mut self, i: usize, delta: f64) {
        debug_assert!(self.contains(i));
        self.weights[i] -= delta;
        self.sift_down(self.pos[i] as usize);
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Thin `cloud` to exactly `n_target` points by weighted sample elimination.
/// Returns the kept indices in ascending order; deterministic.
pub fn wse_coarsen(cloud: &PointCloud, n_target: usize) -> Result<Vec<usize>> {
    let n = cloud.len();
    if n_target < 1 || n_target >= n {
        return Err(Error::InvalidArgument(format!(
            "wse_coarsen: target {n_target} must lie in [1, {n})"
        )));
    }
    let points = cloud.points();
    let tree = KdTree::build(points);

    // r_max from the input spacing: half the median nearest-neighbor
    // distance, scaled by sqrt of the thinning ratio (2-manifold spacing law)
    let mut nn_dist: Vec<f64> = (0..n)
        .map(|i| {
            let nbrs = tree.knn(points[i], 2).expect("cloud has at least 2 points");
            dist(points[i], points[nbrs[1]])
        })
        .collect();
    let mid = n / 2;
    let (_, median, _) = nn_dist.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    let r_h = 0.5 * *median;
    let r_max = r_h * ((n as f64) / (n_target as f64)).sqrt();
    let d_max = 2.0 * r_max;

    // cache neighbor lists and pairwise weights inside the elimination radius
    let weight_of = |d: f64| {
        let t = 1.0 - (d.min(d_max)) / d_max;
        let t2 = t * t;
        let t4 = t2 * t2;
        t4 * t4
    };
    let mut neighbors: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
    let mut weights = vec![0.0f64; n];
    for i in 0..n {
        let idxs = tree.within_radius(points[i], d_max);
        let mut list = Vec::with_capacity(idxs.len().saturating_sub(1));
        for j in idxs {
            if j != i {
                let w = weight_of(dist(points[i], points[j]));
                list.push((j as u32, w));
                weights[i] += w;
            }
        }
        neighbors.push(list);
    }

    let mut heap = EliminationHeap::new(weights);
    let mut remaining = n;
    while remaining > n_target {
        let victim = heap.pop().expect("heap holds all live points");
        for &(j, w) in &neighbors[victim] {
            if heap.contains(j as usize) {
                heap.decrease(j as usize, w);
            }
        }
        remaining -= 1;
    }
    let mut kept: Vec<usize> = (0..n).filter(|&i| heap.contains(i)).collect();
    kept.sort_unstable();
    Ok(kept)
}

/// Level sizes of the multilevel hierarchy: `[N, N/4, N/16, ...]` down to the
/// first size in `[n_min, 4 n_min)`. A fine size below `n_min` yields a
/// single level.
pub fn hierarchy_sizes(n_fine: usize, n_min: usize) -> Result<Vec<usize>> {
    if n_min < 1 {
        return Err(Error::InvalidArgument("n_min must be at least 1".into()));
    }
    if n_fine < 1 {
        return Err(Error::InvalidArgument("n_fine must be at least 1".into()));
    }
    // p - 1 = floor(log4(n_fine / n_min)) computed in integers
    let mut levels = 1usize;
    let mut threshold = n_min;
    loop {
        threshold = match threshold.checked_mul(4) {
            Some(t) => t,
            None => break,
        };
        if n_fine >= threshold {
            levels += 1;
        } else {
            break;
        }
    }
    let mut sizes = Vec::with_capacity(levels);
    let mut divisor = 1usize;
    for _ in 0..levels {
        sizes.push(n_fine / divisor);
        divisor *= 4;
    }
    Ok(sizes)
}
