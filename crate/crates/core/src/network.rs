//! Communication graphs and the consensus weights defined on them.
//!
//! An edge `(j, i)` means node `j` sends its estimate to node `i`, so
//! `j`'s estimate may enter `i`'s weighted average. Self-communication is
//! implicit and never stored as an edge: every weight rule here puts
//! positive mass on the diagonal, which is also what makes the associated
//! Markov chain aperiodic and the stationary vector well defined on any
//! strongly connected graph.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::scalar::Real;

/// Slack allowed when checking that weight rows sum to one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Residual target for the stationary-vector power iteration.
pub const STATIONARY_TOLERANCE: f64 = 1e-10;

/// Iteration cap for the stationary-vector power iteration.
pub const STATIONARY_MAX_ITERS: usize = 100_000;

/// Directed communication graph on nodes `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    in_neighbors: Vec<Vec<usize>>,
    out_neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from `(sender, receiver)` pairs. With `symmetric`,
    /// every pair is added in both directions. Self-loops are dropped
    /// (self-communication is implicit) and duplicates collapse.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], symmetric: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("graph needs at least one node".into()));
        }
        let mut incoming = vec![Vec::new(); n];
        let mut add = |from: usize, to: usize| -> Result<()> {
            if from >= n || to >= n {
                return Err(Error::InvalidSize(format!(
                    "edge ({from}, {to}) out of range for {n} nodes"
                )));
            }
            if from != to && !incoming[to].contains(&from) {
                incoming[to].push(from);
            }
            Ok(())
        };
        for &(from, to) in edges {
            add(from, to)?;
            if symmetric {
                add(to, from)?;
            }
        }
        Ok(Self::from_incoming(incoming))
    }

    fn from_incoming(mut incoming: Vec<Vec<usize>>) -> Self {
        let n = incoming.len();
        let mut outgoing = vec![Vec::new(); n];
        for (to, senders) in incoming.iter_mut().enumerate() {
            senders.sort_unstable();
            for &from in senders.iter() {
                outgoing[from].push(to);
            }
        }
        Self { n, in_neighbors: incoming, out_neighbors: outgoing }
    }

    /// Every ordered pair connected.
    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("graph needs at least one node".into()));
        }
        let incoming = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
        Ok(Self::from_incoming(incoming))
    }

    /// Cycle `0 -> 1 -> ... -> n-1 -> 0`; with `bidirectional`, both
    /// directions around. A single node yields the edgeless graph.
    pub fn ring(n: usize, bidirectional: bool) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges, bidirectional)
    }

    /// Chain `0 - 1 - ... - n-1`, both directions.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges, true)
    }

    /// Node 0 connected to every other node, both directions.
    pub fn star(n: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
        Self::from_edges(n, &edges, true)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Nodes whose estimates node `i` receives, sorted, never including
    /// `i` itself.
    #[inline]
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_neighbors[i]
    }

    #[inline]
    pub fn in_degree(&self, i: usize) -> usize {
        self.in_neighbors[i].len()
    }

    #[inline]
    pub fn out_degree(&self, i: usize) -> usize {
        self.out_neighbors[i].len()
    }

    /// True when every edge is paired with its reverse.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.in_neighbors[i].iter().all(|&j| self.in_neighbors[j].contains(&i)))
    }

    /// True when every node can reach every other along directed edges.
    pub fn is_strongly_connected(&self) -> bool {
        self.reaches_all(&self.out_neighbors) && self.reaches_all(&self.in_neighbors)
    }

    fn reaches_all(&self, adjacency: &[Vec<usize>]) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.n
    }
}

/// Topology presets for building graphs from configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Topology {
    Complete,
    Ring { bidirectional: bool },
    Path,
    Star,
    Custom { edges: Vec<(usize, usize)>, symmetric: bool },
}

impl Topology {
    pub fn build(&self, n: usize) -> Result<Graph> {
        match self {
            Topology::Complete => Graph::complete(n),
            Topology::Ring { bidirectional } => Graph::ring(n, *bidirectional),
            Topology::Path => Graph::path(n),
            Topology::Star => Graph::star(n),
            Topology::Custom { edges, symmetric } => Graph::from_edges(n, edges, *symmetric),
        }
    }

    /// Stable label used in reports and output files.
    pub fn label(&self) -> &'static str {
        match self {
            Topology::Complete => "complete",
            Topology::Ring { bidirectional: true } => "ring",
            Topology::Ring { bidirectional: false } => "ring_directed",
            Topology::Path => "path",
            Topology::Star => "star",
            Topology::Custom { .. } => "custom",
        }
    }
}

/// Row-stochastic consensus weights compatible with a communication graph.
///
/// Every instance satisfies, by construction or validation: non-negative
/// entries, rows summing to one within [`ROW_SUM_TOLERANCE`], and a
/// strictly positive diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Real> WeightMatrix<T> {
    /// Validates an explicit dense matrix.
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidSize("weight matrix needs at least one row".into()));
        }
        let tol = T::of(ROW_SUM_TOLERANCE);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            let mut sum = T::zero();
            for (j, &a) in row.iter().enumerate() {
                if !a.is_finite() || a < T::zero() {
                    return Err(Error::InvalidConfig(format!(
                        "weight ({i}, {j}) must be finite and non-negative"
                    )));
                }
                sum = sum + a;
            }
            if (sum - T::one()).abs() > tol {
                return Err(Error::InvalidConfig(format!("row {i} does not sum to one")));
            }
            if row[i] <= T::zero() {
                return Err(Error::InvalidConfig(format!(
                    "self-weight of node {i} must be positive"
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Each node averages its own estimate with those it receives:
    /// `1 / (in_degree + 1)` on itself and each in-neighbor. On a complete
    /// graph all weights are `1/n`; on a bidirectional ring, `1/3`.
    pub fn neighbor_average(g: &Graph) -> Result<Self> {
        let rows = (0..g.n())
            .map(|i| {
                let share = T::one() / T::of((g.in_degree(i) + 1) as f64);
                let mut row = vec![T::zero(); g.n()];
                row[i] = share;
                for &j in g.in_neighbors(i) {
                    row[j] = share;
                }
                row
            })
            .collect();
        Self::new(rows)
    }

    /// Metropolis rule on a symmetric graph: `1 / (1 + max(d_i, d_j))`
    /// across each edge, remainder on the diagonal.
    pub fn metropolis(g: &Graph) -> Result<Self> {
        if !g.is_symmetric() {
            return Err(Error::AsymmetricGraph);
        }
        let rows = (0..g.n())
            .map(|i| {
                let mut row = vec![T::zero(); g.n()];
                let mut off_diagonal = T::zero();
                for &j in g.in_neighbors(i) {
                    let larger = g.in_degree(i).max(g.in_degree(j));
                    row[j] = T::one() / T::of((1 + larger) as f64);
                    off_diagonal = off_diagonal + row[j];
                }
                row[i] = T::one() - off_diagonal;
                row
            })
            .collect();
        Self::new(rows)
    }

    /// Maximum-degree rule on a symmetric graph: `1 / (1 + d_max)` across
    /// each edge, remainder on the diagonal.
    pub fn max_degree(g: &Graph) -> Result<Self> {
        if !g.is_symmetric() {
            return Err(Error::AsymmetricGraph);
        }
        let d_max = (0..g.n()).map(|i| g.in_degree(i)).max().unwrap_or(0);
        let share = T::one() / T::of((1 + d_max) as f64);
        let rows = (0..g.n())
            .map(|i| {
                let mut row = vec![T::zero(); g.n()];
                for &j in g.in_neighbors(i) {
                    row[j] = share;
                }
                row[i] = T::one() - share * T::of(g.in_degree(i) as f64);
                row
            })
            .collect();
        Self::new(rows)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.rows[i][j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }

    /// Checks compatibility with a graph: off-diagonal weight is positive
    /// exactly where an edge delivers the sender's estimate.
    pub fn validate_for(&self, g: &Graph) -> Result<()> {
        if g.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: g.n() });
        }
        for i in 0..self.n() {
            for j in 0..self.n() {
                if i == j {
                    continue;
                }
                let connected = g.in_neighbors(i).contains(&j);
                let weighted = self.rows[i][j] > T::zero();
                if connected != weighted {
                    return Err(Error::InvalidConfig(format!(
                        "weight ({i}, {j}) inconsistent with the graph edge set"
                    )));
                }
            }
        }
        Ok(())
    }

    /// One consensus mixing step: returns `z` with
    /// `z_i = sum_j a_ij x_j`. All reads happen before any result is
    /// produced, so callers get the simultaneous-update semantics.
    pub fn weighted_averages(&self, estimates: &[Vector<T>]) -> Result<Vec<Vector<T>>> {
        if estimates.len() != self.n() {
            return Err(Error::BatchSizeMismatch { expected: self.n(), got: estimates.len() });
        }
        let dim = estimates[0].dim();
        for e in estimates {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.dim() });
            }
        }
        let mut mixed = Vec::with_capacity(self.n());
        for row in &self.rows {
            let mut z = Vector::zeros(dim)?;
            for (j, &a) in row.iter().enumerate() {
                if a > T::zero() {
                    z.add_scaled_in_place(a, &estimates[j]);
                }
            }
            mixed.push(z);
        }
        Ok(mixed)
    }

    /// Stationary distribution of the weights with the default accuracy
    /// ([`STATIONARY_TOLERANCE`], [`STATIONARY_MAX_ITERS`]).
    pub fn stationary_vector(&self) -> Result<Vector<T>> {
        self.stationary_vector_with(T::of(STATIONARY_TOLERANCE), STATIONARY_MAX_ITERS)
    }

    /// Stationary distribution by power iteration on the transpose:
    /// the unique probability vector `v` with `v^T A = v^T`, all entries
    /// positive, which exists because the diagonal is positive and the
    /// graph is strongly connected. Iterates until the sup-norm residual
    /// drops below `tol`, else [`Error::NoConvergence`].
    pub fn stationary_vector_with(&self, tol: T, max_iters: usize) -> Result<Vector<T>> {
        assert!(tol > T::zero(), "stationary tolerance must be positive");
        let n = self.n();
        let uniform = T::one() / T::of(n as f64);
        let mut v = vec![uniform; n];
        for _ in 0..max_iters {
            let mut next = vec![T::zero(); n];
            for (i, row) in self.rows.iter().enumerate() {
                for (j, &a) in row.iter().enumerate() {
                    if a > T::zero() {
                        next[j] = next[j] + v[i] * a;
                    }
                }
            }
            let residual =
                v.iter().zip(next.iter()).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
            v = next;
            if residual <= tol {
                // Row stochasticity keeps the iterate a probability
                // vector up to rounding; renormalize the leftovers.
                let sum: T = v.iter().fold(T::zero(), |acc, &x| acc + x);
                let normalized: Vec<T> = v.iter().map(|&x| x / sum).collect();
                return Vector::new(normalized);
            }
        }
        Err(Error::NoConvergence { context: "stationary vector power iteration", limit: max_iters })
    }
}

/// Weight rule presets for building matrices from configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightRule {
    NeighborAverage,
    Metropolis,
    MaxDegree,
}

impl WeightRule {
    pub fn build<T: Real>(&self, g: &Graph) -> Result<WeightMatrix<T>> {
        match self {
            WeightRule::NeighborAverage => WeightMatrix::neighbor_average(g),
            WeightRule::Metropolis => WeightMatrix::metropolis(g),
            WeightRule::MaxDegree => WeightMatrix::max_degree(g),
        }
    }

    /// Stable label used in reports and output files.
    pub fn label(&self) -> &'static str {
        match self {
            WeightRule::NeighborAverage => "neighbor_average",
            WeightRule::Metropolis => "metropolis",
            WeightRule::MaxDegree => "max_degree",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builders_validate_and_dedupe() {
        assert!(Graph::complete(0).is_err());
        assert!(Graph::from_edges(2, &[(0, 5)], false).is_err());
        // Duplicates and self-loops vanish.
        let g = Graph::from_edges(3, &[(0, 1), (0, 1), (1, 1)], false).unwrap();
        assert_eq!(g.in_neighbors(1), &[0]);
        assert_eq!(g.in_degree(1), 1);
        assert_eq!(g.out_degree(0), 1);
    }

    #[test]
    fn ring_and_connectivity() {
        let directed = Graph::ring(4, false).unwrap();
        assert_eq!(directed.in_neighbors(0), &[3]);
        assert!(!directed.is_symmetric());
        assert!(directed.is_strongly_connected());

        let bidir = Graph::ring(4, true).unwrap();
        assert_eq!(bidir.in_neighbors(0), &[1, 3]);
        assert!(bidir.is_symmetric());

        // A one-way chain cannot get back.
        let chain = Graph::from_edges(3, &[(0, 1), (1, 2)], false).unwrap();
        assert!(!chain.is_strongly_connected());
        assert!(Graph::path(3).unwrap().is_strongly_connected());

        // Single node: no edges, trivially connected and symmetric.
        let solo = Graph::ring(1, true).unwrap();
        assert_eq!(solo.in_degree(0), 0);
        assert!(solo.is_strongly_connected());
    }

    #[test]
    fn neighbor_average_matches_uniform_choices() {
        // Complete graph: every weight 1/n.
        let w: WeightMatrix<f64> =
            WeightMatrix::neighbor_average(&Graph::complete(5).unwrap()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_relative_eq!(w.get(i, j), 0.2);
            }
        }
        // Bidirectional ring: nonzero weights 1/3.
        let w: WeightMatrix<f64> =
            WeightMatrix::neighbor_average(&Graph::ring(6, true).unwrap()).unwrap();
        assert_relative_eq!(w.get(0, 0), 1.0 / 3.0);
        assert_relative_eq!(w.get(0, 1), 1.0 / 3.0);
        assert_relative_eq!(w.get(0, 5), 1.0 / 3.0);
        assert_eq!(w.get(0, 2), 0.0);
        // Directed ring: self and predecessor get 1/2.
        let w: WeightMatrix<f64> =
            WeightMatrix::neighbor_average(&Graph::ring(3, false).unwrap()).unwrap();
        assert_relative_eq!(w.get(0, 0), 0.5);
        assert_relative_eq!(w.get(0, 2), 0.5);
        assert_eq!(w.get(0, 1), 0.0);
    }

    #[test]
    fn metropolis_on_a_star() {
        // Center 0 with three leaves: edge weight 1/(1+max(3,1)) = 1/4,
        // leaf self-weight 3/4, center self-weight 1/4.
        let w: WeightMatrix<f64> = WeightMatrix::metropolis(&Graph::star(4).unwrap()).unwrap();
        assert_relative_eq!(w.get(1, 0), 0.25);
        assert_relative_eq!(w.get(1, 1), 0.75);
        assert_relative_eq!(w.get(0, 0), 0.25);
        assert_relative_eq!(w.get(0, 2), 0.25);

        let directed = Graph::ring(3, false).unwrap();
        assert_eq!(WeightMatrix::<f64>::metropolis(&directed), Err(Error::AsymmetricGraph));
    }

    #[test]
    fn max_degree_on_a_path() {
        // Path 0-1-2: d_max = 2, so edges weigh 1/3; the end nodes keep
        // 2/3 on themselves, the middle one 1/3.
        let w: WeightMatrix<f64> = WeightMatrix::max_degree(&Graph::path(3).unwrap()).unwrap();
        assert_relative_eq!(w.get(0, 1), 1.0 / 3.0);
        assert_relative_eq!(w.get(0, 0), 2.0 / 3.0);
        assert_relative_eq!(w.get(1, 1), 1.0 / 3.0);
    }

    #[test]
    fn explicit_matrix_validation() {
        assert!(WeightMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).is_ok());
        // Row sum off.
        assert!(WeightMatrix::new(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).is_err());
        // Zero diagonal.
        assert!(WeightMatrix::new(vec![vec![0.0, 1.0], vec![0.5, 0.5]]).is_err());
        // Negative entry.
        assert!(WeightMatrix::new(vec![vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
        // Ragged.
        assert!(WeightMatrix::new(vec![vec![1.0], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn validate_for_flags_edge_weight_mismatch() {
        let g = Graph::ring(3, true).unwrap();
        let w: WeightMatrix<f64> = WeightMatrix::neighbor_average(&g).unwrap();
        w.validate_for(&g).unwrap();
        // Ring weights on a complete graph: the (0, 2) edge exists there
        // but carries zero weight, which the iff-check must reject.
        let g4 = Graph::ring(4, true).unwrap();
        let w4: WeightMatrix<f64> = WeightMatrix::neighbor_average(&g4).unwrap();
        assert!(w4.validate_for(&Graph::complete(4).unwrap()).is_err());
    }

    #[test]
    fn weighted_averages_mix_simultaneously() {
        let w: WeightMatrix<f64> =
            WeightMatrix::neighbor_average(&Graph::complete(2).unwrap()).unwrap();
        let xs = vec![Vector::from_slice(&[0.0]).unwrap(), Vector::from_slice(&[4.0]).unwrap()];
        let z = w.weighted_averages(&xs).unwrap();
        assert_relative_eq!(z[0][0], 2.0);
        assert_relative_eq!(z[1][0], 2.0);
        assert!(w.weighted_averages(&xs[..1]).is_err());
    }

    #[test]
    fn stationary_vector_known_chain() {
        // Doubly stochastic: stationary vector is uniform.
        let w =
            WeightMatrix::new(vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5]])
                .unwrap();
        let v = w.stationary_vector().unwrap();
        for i in 0..3 {
            assert_relative_eq!(v[i], 1.0 / 3.0, epsilon = 1e-9);
        }

        // Two-state chain with known stationary (2/3, 1/3):
        // detailed balance v_0 * 0.2 = v_1 * 0.4.
        let w = WeightMatrix::new(vec![vec![0.8, 0.2], vec![0.4, 0.6]]).unwrap();
        let v = w.stationary_vector().unwrap();
        assert_relative_eq!(v[0], 2.0 / 3.0, epsilon = 1e-9);
        assert_relative_eq!(v[1], 1.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn stationary_vector_budget_exhaustion() {
        // Mixing time far beyond three iterations.
        let w = WeightMatrix::new(vec![vec![1.0 - 1e-6, 1e-6], vec![2e-6, 1.0 - 2e-6]]).unwrap();
        let out = w.stationary_vector_with(1e-10, 3);
        assert!(matches!(out, Err(Error::NoConvergence { .. })), "got {out:?}");
    }

    #[test]
    fn topology_and_rule_labels() {
        assert_eq!(Topology::Ring { bidirectional: true }.label(), "ring");
        assert_eq!(Topology::Complete.label(), "complete");
        assert_eq!(WeightRule::NeighborAverage.label(), "neighbor_average");
        let g = Topology::Custom { edges: vec![(0, 1)], symmetric: true }.build(2).unwrap();
        assert!(g.is_symmetric());
        let w: WeightMatrix<f64> = WeightRule::MaxDegree.build(&g).unwrap();
        assert_relative_eq!(w.get(0, 1), 0.5);
    }
}
