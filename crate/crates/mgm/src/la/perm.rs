//! Permutations and the reverse Cuthill-McKee ordering.

use crate::error::{Error, Result};
use crate::la::sparse::CsrMatrix;

/// A bijection on [0, N). `forward[i]` is the original index placed at
/// position `i`; `inverse` undoes it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            forward: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    pub fn from_forward(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (pos, &orig) in forward.iter().enumerate() {
            if orig >= n || inverse[orig] != usize::MAX {
                return Err(Error::InvalidArgument(format!(
                    "forward array is not a bijection on [0, {n})"
                )));
            }
            inverse[orig] = pos;
        }
        Ok(Permutation { forward, inverse })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    /// The permutation mapping the other way.
    pub fn inverted(&self) -> Permutation {
        Permutation {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// Reorder a vector: `out[i] = x[forward[i]]`.
    pub fn apply_vec<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.len(), "permutation length mismatch");
        self.forward.iter().map(|&orig| x[orig]).collect()
    }

    /// Undo `apply_vec`: `out[forward[i]] = x[i]`.
    pub fn unapply_vec<T: Copy + Default>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.len(), "permutation length mismatch");
        let mut out = vec![T::default(); x.len()];
        for (pos, &orig) in self.forward.iter().enumerate() {
            out[orig] = x[pos];
        }
        out
    }

    /// Extend with fixed points at the end (used to pin constraint rows).
    pub fn extend_identity(&self, extra: usize) -> Permutation {
        let n = self.len();
        let mut forward = self.forward.clone();
        forward.extend(n..n + extra);
        Permutation::from_forward(forward).expect("extension preserves bijectivity")
    }
}

/// Bandwidth of the symmetric pattern: max |i - j| over stored entries.
pub fn bandwidth(a: &CsrMatrix) -> usize {
    let mut bw = 0usize;
    for i in 0..a.nrows() {
        let (cols, _) = a.row(i);
        for &j in cols {
            bw = bw.max(i.abs_diff(j));
        }
    }
    bw
}

/// Reverse Cuthill-McKee ordering of a square matrix, computed on the
/// symmetrized pattern A + A^T. Ties break on (degree, index); BFS restarts
/// from the lowest-index unvisited node of minimum degree.
pub fn rcm_ordering(a: &CsrMatrix) -> Result<Permutation> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "rcm_ordering: {}x{} matrix is not square",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    // symmetrized adjacency without self loops
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let (cols, _) = a.row(i);
        for &j in cols {
            if i != j {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
        nbrs.dedup();
    }
    let degree: Vec<usize> = adjacency.iter().map(|n| n.len()).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::new();
    let mut candidates: Vec<usize> = Vec::new();

    loop {
        // next start: minimum degree, then minimum index, among unvisited
        let mut start = usize::MAX;
        for i in 0..n {
            if !visited[i] && (start == usize::MAX || degree[i] < degree[start]) {
                start = i;
            }
        }
        if start == usize::MAX {
            break;
        }
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            candidates.clear();
            candidates.extend(adjacency[u].iter().copied().filter(|&v| !visited[v]));
            candidates.sort_unstable_by_key(|&v| (degree[v], v));
            for &v in &candidates {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    Permutation::from_forward(order)
}
