//! Recursive hyperplane partition into Voronoi cells and exact kNN search.
//!
//! Each internal node splits its samples by the hyperplane through their
//! centroid whose normal is the leading principal axis (rank-1 randomized
//! SVD of the centred samples). Leaf centroids become cell centroids, and a
//! final scan assigns every sample to its nearest centroid. Queries visit
//! cells best-first and skip any cell whose ball cannot contain a closer
//! point than the current k-th best, so results equal an exhaustive scan.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param_err, Result};
use crate::linalg::{euclidean, squared_euclidean, truncated_svd, ColumnMatrix, SvdParams};

pub const DEFAULT_MIN_CELL: usize = 64;

/// Relative slack on the pruning bound, covering rounding in the distances.
const PRUNE_SLACK: f64 = 1e-9;

/// A Voronoi cell: centroid, covering radius and member sample ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub centroid: Vec<f64>,
    pub radius: f64,
    pub members: Vec<usize>,
}

impl Cell {
    /// Radius as the largest member distance from `centroid`.
    pub fn from_members(centroid: Vec<f64>, members: Vec<usize>, samples: &DMatrix<f64>) -> Self {
        let radius = members
            .iter()
            .map(|&i| euclidean(samples.column(i).as_slice(), &centroid))
            .fold(0.0, f64::max);
        Self {
            centroid,
            radius,
            members,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        centroid: Vec<f64>,
        axis: Vec<f64>,
        left: usize,
        right: usize,
    },
    /// Construction leaf; `cell` is `None` when reassignment emptied it.
    Leaf {
        centroid: Vec<f64>,
        cell: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// `None` selects `ceil(log2(n / min_cell))`.
    pub max_levels: Option<usize>,
    pub min_cell: usize,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_levels: None,
            min_cell: DEFAULT_MIN_CELL,
            seed: 42,
        }
    }
}

pub fn default_max_levels(n: usize, min_cell: usize) -> usize {
    if n <= min_cell {
        return 0;
    }
    let ratio = n as f64 / min_cell as f64;
    ratio.log2().ceil() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTree {
    dim: usize,
    nodes: Vec<Node>,
    cells: Vec<Cell>,
    assignment: Vec<usize>,
    max_levels: usize,
    min_cell: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

#[derive(PartialEq)]
struct Candidate(f64, usize);

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Bounded max-heap holding the `k` best `(distance, id)` pairs.
struct TopK {
    k: usize,
    heap: BinaryHeap<Candidate>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    fn offer(&mut self, distance: f64, id: usize) {
        let c = Candidate(distance, id);
        if self.heap.len() < self.k {
            self.heap.push(c);
        } else if self.heap.peek().is_some_and(|w| c < *w) {
            self.heap.pop();
            self.heap.push(c);
        }
    }

    fn worst(&self) -> Option<f64> {
        if self.heap.len() < self.k {
            None
        } else {
            self.heap.peek().map(|c| c.0)
        }
    }

    fn into_sorted(self) -> Vec<Neighbor> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|Candidate(distance, id)| Neighbor { id, distance })
            .collect()
    }
}

/// Exhaustive kNN over the columns of `samples`; ties go to the lower id.
pub fn brute_force_knn(samples: &DMatrix<f64>, query: &[f64], k: usize) -> Vec<Neighbor> {
    let mut top = TopK::new(k.max(1).min(samples.ncols().max(1)));
    for (id, col) in samples.column_iter().enumerate() {
        top.offer(euclidean(col.as_slice(), query), id);
    }
    top.into_sorted()
}

fn nearest_centroid(centroids: &[&[f64]], x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = squared_euclidean(c, x);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn mean_of(samples: &DMatrix<f64>, ids: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; samples.nrows()];
    for &i in ids {
        for (acc, v) in c.iter_mut().zip(samples.column(i).iter()) {
            *acc += v;
        }
    }
    let n = ids.len() as f64;
    c.iter_mut().for_each(|v| *v /= n);
    c
}

/// Leading principal axis of `ids` around `centroid`, `None` when the
/// samples coincide.
fn principal_axis(samples: &DMatrix<f64>, ids: &[usize], centroid: &[f64], seed: u64) -> Result<Option<Vec<f64>>> {
    let d = samples.nrows();
    let centred = DMatrix::from_fn(d, ids.len(), |r, c| samples[(r, ids[c])] - centroid[r]);
    if centred.iter().all(|v| *v == 0.0) {
        return Ok(None);
    }
    let params = SvdParams {
        seed,
        ..SvdParams::default()
    };
    let svd = truncated_svd(&ColumnMatrix::Dense(centred), 1, &params)?;
    if svd.k() == 0 {
        return Ok(None);
    }
    Ok(Some(svd.u.column(0).as_slice().to_vec()))
}

impl PartitionTree {
    /// Builds the tree over the columns of `samples` (`dim × n`).
    pub fn build(samples: &DMatrix<f64>, params: &TreeParams) -> Result<Self> {
        let n = samples.ncols();
        if n == 0 || samples.nrows() == 0 {
            return Err(param_err!("cannot partition an empty sample set"));
        }
        if params.min_cell == 0 {
            return Err(param_err!("min_cell must be at least 1"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(crate::error::Error::Data("samples contain non-finite values".into()));
        }
        let max_levels = params
            .max_levels
            .unwrap_or_else(|| default_max_levels(n, params.min_cell));

        let mut nodes: Vec<Node> = Vec::new();
        let mut leaf_nodes: Vec<usize> = Vec::new();
        // (node slot, member ids, depth)
        let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        nodes.push(Node::Leaf {
            centroid: Vec::new(),
            cell: None,
        });
        stack.push((0, (0..n).collect(), 0));

        while let Some((slot, ids, depth)) = stack.pop() {
            let centroid = mean_of(samples, &ids);
            let axis = if depth < max_levels && ids.len() > 1 {
                let seed = params.seed ^ (slot as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                principal_axis(samples, &ids, &centroid, seed)?
            } else {
                None
            };
            let split = axis.and_then(|axis| {
                let (right, left): (Vec<usize>, Vec<usize>) = ids.iter().partition(|&&i| {
                    let s: f64 = samples
                        .column(i)
                        .iter()
                        .zip(&centroid)
                        .zip(&axis)
                        .map(|((x, c), a)| (x - c) * a)
                        .sum();
                    s > 0.0
                });
                (!left.is_empty() && !right.is_empty()).then_some((axis, left, right))
            });
            match split {
                Some((axis, left, right)) => {
                    let l = nodes.len();
                    let r = l + 1;
                    nodes.push(Node::Leaf {
                        centroid: Vec::new(),
                        cell: None,
                    });
                    nodes.push(Node::Leaf {
                        centroid: Vec::new(),
                        cell: None,
                    });
                    nodes[slot] = Node::Split {
                        centroid,
                        axis,
                        left: l,
                        right: r,
                    };
                    for (child, members) in [(r, right), (l, left)] {
                        if members.len() <= params.min_cell {
                            // too small to split further
                            stack.push((child, members, max_levels));
                        } else {
                            stack.push((child, members, depth + 1));
                        }
                    }
                }
                None => {
                    nodes[slot] = Node::Leaf { centroid, cell: None };
                    leaf_nodes.push(slot);
                }
            }
        }
        leaf_nodes.sort_unstable();

        // Reassignment scan against all leaf centroids.
        let centroids: Vec<&[f64]> = leaf_nodes
            .iter()
            .map(|&s| match &nodes[s] {
                Node::Leaf { centroid, .. } => centroid.as_slice(),
                Node::Split { .. } => unreachable!(),
            })
            .collect();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); leaf_nodes.len()];
        for i in 0..n {
            members[nearest_centroid(&centroids, samples.column(i).as_slice())].push(i);
        }
        let owned: Vec<Vec<f64>> = centroids.iter().map(|c| c.to_vec()).collect();

        let mut cells = Vec::new();
        let mut assignment = vec![0; n];
        for ((leaf, centroid), ids) in leaf_nodes.iter().zip(owned).zip(members) {
            if ids.is_empty() {
                continue;
            }
            let idx = cells.len();
            for &i in &ids {
                assignment[i] = idx;
            }
            if let Node::Leaf { cell, .. } = &mut nodes[*leaf] {
                *cell = Some(idx);
            }
            cells.push(Cell::from_members(centroid, ids, samples));
        }

        Ok(Self {
            dim: samples.nrows(),
            nodes,
            cells,
            assignment,
            max_levels,
            min_cell: params.min_cell,
        })
    }

    /// Reassembles a tree from stored parts (e.g. when loading a bundle).
    pub fn from_parts(
        dim: usize,
        nodes: Vec<Node>,
        cells: Vec<Cell>,
        max_levels: usize,
        min_cell: usize,
    ) -> Result<Self> {
        let n: usize = cells.iter().map(|c| c.members.len()).sum();
        let mut assignment = vec![usize::MAX; n];
        for (ci, c) in cells.iter().enumerate() {
            if c.centroid.len() != dim || c.members.is_empty() {
                return Err(param_err!("cell {ci} is malformed"));
            }
            for &m in &c.members {
                if m >= n || assignment[m] != usize::MAX {
                    return Err(param_err!("sample {m} is not assigned to exactly one cell"));
                }
                assignment[m] = ci;
            }
        }
        Ok(Self {
            dim,
            nodes,
            cells,
            assignment,
            max_levels,
            min_cell,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Cell index of every sample.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn max_levels(&self) -> usize {
        self.max_levels
    }

    pub fn min_cell(&self) -> usize {
        self.min_cell
    }

    /// Index of the cell whose centroid is nearest to `x` (lowest on ties).
    pub fn nearest_cell(&self, x: &[f64]) -> usize {
        let centroids: Vec<&[f64]> = self.cells.iter().map(|c| c.centroid.as_slice()).collect();
        nearest_centroid(&centroids, x)
    }

    /// The `k` nearest samples to `query`, identical to
    /// [`brute_force_knn`]. `k > n` returns every sample.
    pub fn knn(&self, samples: &DMatrix<f64>, query: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        if k == 0 {
            return Err(param_err!("k must be at least 1"));
        }
        if query.len() != self.dim || samples.nrows() != self.dim {
            return Err(param_err!(
                "query/sample dimension does not match tree dimension {}",
                self.dim
            ));
        }
        if samples.ncols() != self.len() {
            return Err(param_err!(
                "tree indexes {} samples, got {}",
                self.len(),
                samples.ncols()
            ));
        }
        let mut order: Vec<(f64, f64, usize)> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let dc = euclidean(query, &c.centroid);
                (dc - c.radius, dc + c.radius, i)
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));

        let mut top = TopK::new(k.min(self.len()));
        for (lower, span, ci) in order {
            if let Some(worst) = top.worst() {
                if lower - PRUNE_SLACK * (span + worst) > worst {
                    break;
                }
            }
            for &id in &self.cells[ci].members {
                top.offer(euclidean(samples.column(id).as_slice(), query), id);
            }
        }
        Ok(top.into_sorted())
    }
}

pub fn build_tree(samples: &DMatrix<f64>, max_levels: Option<usize>, min_cell: usize, seed: u64) -> Result<PartitionTree> {
    PartitionTree::build(
        samples,
        &TreeParams {
            max_levels,
            min_cell,
            seed,
        },
    )
}

/// Lloyd iterations from a seeded farthest-point start.
#[derive(Debug, Clone)]
pub struct KMeans {
    pub cells: Vec<Cell>,
    /// Sum of squared member-to-centroid distances after each assignment.
    pub objective: Vec<f64>,
}

pub fn kmeans_cells(samples: &DMatrix<f64>, c: usize, iters: usize, seed: u64) -> Result<Vec<Cell>> {
    kmeans(samples, c, iters, seed).map(|k| k.cells)
}

pub fn kmeans(samples: &DMatrix<f64>, c: usize, iters: usize, seed: u64) -> Result<KMeans> {
    let n = samples.ncols();
    if c == 0 || c > n {
        return Err(param_err!("cell count {c} must be in 1..={n}"));
    }
    let col = |i: usize| samples.column(i).as_slice().to_vec();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..n);
    let mut centroids = vec![col(first)];
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| squared_euclidean(samples.column(i).as_slice(), &centroids[0]))
        .collect();
    while centroids.len() < c {
        let mut pick = 0;
        for i in 1..n {
            if nearest[i] > nearest[pick] {
                pick = i;
            }
        }
        let next = col(pick);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(squared_euclidean(samples.column(i).as_slice(), &next));
        }
        centroids.push(next);
    }

    let assign = |centroids: &[Vec<f64>]| -> (Vec<usize>, f64) {
        let refs: Vec<&[f64]> = centroids.iter().map(Vec::as_slice).collect();
        let mut total = 0.0;
        let labels = (0..n)
            .map(|i| {
                let x = samples.column(i);
                let best = nearest_centroid(&refs, x.as_slice());
                total += squared_euclidean(x.as_slice(), refs[best]);
                best
            })
            .collect();
        (labels, total)
    };

    let (mut labels, obj) = assign(&centroids);
    let mut objective = vec![obj];
    for _ in 0..iters {
        update_means(samples, &labels, &mut centroids);
        let (next, obj) = assign(&centroids);
        objective.push(obj);
        let converged = next == labels;
        labels = next;
        if converged {
            break;
        }
    }
    update_means(samples, &labels, &mut centroids);

    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); c];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(i);
    }
    let cells = centroids
        .into_iter()
        .zip(groups)
        .filter(|(_, g)| !g.is_empty())
        .map(|(centroid, g)| Cell::from_members(centroid, g, samples))
        .collect();
    Ok(KMeans { cells, objective })
}

/// Means of each label group; empty groups keep their previous centroid.
fn update_means(samples: &DMatrix<f64>, labels: &[usize], centroids: &mut [Vec<f64>]) {
    let d = samples.nrows();
    let mut sums = vec![vec![0.0; d]; centroids.len()];
    let mut counts = vec![0usize; centroids.len()];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(samples.column(i).iter()) {
            *s += v;
        }
    }
    for ((c, s), &cnt) in centroids.iter_mut().zip(sums).zip(&counts) {
        if cnt > 0 {
            *c = s.into_iter().map(|v| v / cnt as f64).collect();
        }
    }
}
