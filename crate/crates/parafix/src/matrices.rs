//! Row-stochastic mixing matrices and their transition products.
//!
//! A mixing matrix S pairs with a neighbor graph: s_ij > 0 exactly when j is
//! an in-neighbor of i, and row i sums to one. Applying S (x) I to a stacked
//! vector replaces each agent's block with the weighted average of its
//! neighbors' blocks — the Kronecker product itself is never materialized.
//! Products S(t)...S(tau+1) accumulate the mixing applied between two steps.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graphs::{graph_of_matrix, DirectedGraph};
use crate::vectorspace::Stacked;
use crate::RANK_TOL;

/// Tolerance on row (and, for the doubly stochastic test, column) sums.
const ROW_SUM_TOL: f64 = 1e-12;

/// Weights keyed by (agent, neighbor): entry (i, j) is the weight agent i
/// places on neighbor j's estimate.
pub type WeightMap = BTreeMap<(usize, usize), f64>;

/// A row-stochastic matrix together with the exact finite set of values its
/// entries are drawn from. Membership in the weight set is bit-exact: the
/// boundedness arguments for weighted averaging need the entries confined to
/// a finite set, not merely to an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    entries: DMatrix<f64>,
    weight_set: Vec<f64>, // sorted, deduplicated
}

fn sorted_distinct(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| a == b);
    values
}

fn validate_rows(entries: &DMatrix<f64>) -> Result<()> {
    if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "stochastic matrix must be square and non-empty, got {}x{}",
            entries.nrows(),
            entries.ncols()
        )));
    }
    if let Some(bad) = entries.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "stochastic entries must be finite and nonnegative, got {bad}"
        )));
    }
    for i in 0..entries.nrows() {
        let sum: f64 = entries.row(i).iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "row {i} sums to {sum}, expected 1 within {ROW_SUM_TOL}"
            )));
        }
    }
    Ok(())
}

impl StochasticMatrix {
    /// Uniform neighbor averaging: s_ij = 1 / |N_i| for each in-neighbor j of
    /// i, zero elsewhere. The weight set is {0} plus every reciprocal degree
    /// 1/d for d = 1..=m, so two graphs on m vertices share one weight set.
    pub fn from_graph(g: &DirectedGraph) -> Result<Self> {
        let m = g.m();
        let mut entries = DMatrix::zeros(m, m);
        for i in 0..m {
            let neighbors = g.in_neighbors(i);
            if neighbors.is_empty() {
                return Err(Error::Precondition(format!(
                    "agent {i} has no in-neighbors; every agent is its own neighbor"
                )));
            }
            let w = 1.0 / neighbors.len() as f64;
            for j in neighbors {
                entries[(i, j)] = w;
            }
        }
        let mut weight_set = vec![0.0];
        weight_set.extend((1..=m).map(|d| 1.0 / d as f64));
        Ok(StochasticMatrix { entries, weight_set: sorted_distinct(weight_set) })
    }

    /// Explicit weights on the arcs of `g`: every in-neighbor arc must carry a
    /// strictly positive weight, non-arcs must carry none, and each row must
    /// sum to one within 1e-12.
    pub fn from_weights(g: &DirectedGraph, weights: &WeightMap) -> Result<Self> {
        let m = g.m();
        let mut entries = DMatrix::zeros(m, m);
        for (&(i, j), &w) in weights {
            if i >= m || j >= m {
                return Err(Error::InvalidInput(format!(
                    "weight ({i}, {j}) out of range for {m} agents"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInput(format!("weight ({i}, {j}) = {w} must be finite and nonnegative")));
            }
            if w == 0.0 {
                continue; // explicit zero is the same as absent
            }
            if !g.has_arc(j, i) {
                return Err(Error::Precondition(format!(
                    "weight ({i}, {j}) = {w} but {j} is not a neighbor of {i}"
                )));
            }
            entries[(i, j)] = w;
        }
        for i in 0..m {
            for j in g.in_neighbors(i) {
                if entries[(i, j)] == 0.0 {
                    return Err(Error::Precondition(format!(
                        "neighbor {j} of agent {i} has no positive weight"
                    )));
                }
            }
        }
        validate_rows(&entries)?;
        let mut weight_set: Vec<f64> = entries.iter().copied().filter(|&w| w != 0.0).collect();
        weight_set.push(0.0);
        Ok(StochasticMatrix { entries, weight_set: sorted_distinct(weight_set) })
    }

    /// General constructor from explicit entries; the weight set is the set
    /// of distinct entry values.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        validate_rows(&entries)?;
        let weight_set = sorted_distinct(entries.iter().copied().collect());
        Ok(StochasticMatrix { entries, weight_set })
    }

    pub fn identity(m: usize) -> Result<Self> {
        StochasticMatrix::from_entries(DMatrix::identity(m, m))
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn weight_set(&self) -> &[f64] {
        &self.weight_set
    }

    /// Bit-exact membership in the weight set.
    pub fn contains_weight(&self, w: f64) -> bool {
        self.weight_set.iter().any(|&v| v == w)
    }

    /// The graph of the matrix: arc (j, i) iff s_ij > 0.
    pub fn graph(&self) -> DirectedGraph {
        graph_of_matrix(&self.entries).expect("stochastic entries are nonnegative")
    }

    /// Apply S (x) I to a stacked vector without forming the mn-by-mn matrix:
    /// block i of the result is sum_j s_ij x_j, accumulated over nonzero
    /// entries in ascending j. The accumulation order is part of the contract
    /// — an agent-wise average written the same way lands on identical bits.
    pub fn apply_kron(&self, x: &Stacked) -> Result<Stacked> {
        let m = self.m();
        if x.m() != m {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {m} agents but stacked vector has {}",
                x.m()
            )));
        }
        let n = x.n();
        let mut blocks = Vec::with_capacity(m);
        for i in 0..m {
            let mut acc = DVector::zeros(n);
            for j in 0..m {
                let s = self.entries[(i, j)];
                if s != 0.0 {
                    acc.axpy(s, x.block(j), 1.0);
                }
            }
            blocks.push(acc);
        }
        Stacked::new(blocks)
    }

    /// Apply S to a plain vector in R^m (the n = 1 picture).
    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.m() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows but vector has length {}",
                self.m(),
                v.len()
            )));
        }
        Ok(&self.entries * v)
    }

    /// All entries strictly positive.
    pub fn is_positive(&self) -> bool {
        self.entries.iter().all(|&v| v > 0.0)
    }

    /// Column sums also equal one (within the row-sum tolerance).
    pub fn is_doubly_stochastic(&self) -> bool {
        (0..self.m()).all(|j| {
            let sum: f64 = self.entries.column(j).iter().sum();
            (sum - 1.0).abs() <= ROW_SUM_TOL
        })
    }

    pub fn has_positive_diagonal(&self) -> bool {
        (0..self.m()).all(|i| self.entries[(i, i)] > 0.0)
    }

    /// True when the fixed vectors of S are exactly the multiples of the
    /// all-ones vector, i.e. the fixed stacked vectors of S (x) I are exactly
    /// the consensus vectors. Decided by the rank of S - I: the fixed space
    /// always contains the ones vector, so the check is rank(S - I) = m - 1,
    /// with singular values below 1e-10 counted as zero.
    pub fn consensus_fixed_set_check(&self) -> bool {
        let m = self.m();
        let diff = &self.entries - DMatrix::<f64>::identity(m, m);
        diff.rank(RANK_TOL) == m - 1
    }
}

/// The product S(t) S(t-1) ... S(tau+1) of a schedule of mixing matrices,
/// taken over steps tau+1 ..= t; the empty product (t = tau) is the identity.
#[derive(Clone, Debug)]
pub struct TransitionProduct {
    tau: usize,
    t: usize,
    matrix: DMatrix<f64>,
}

impl TransitionProduct {
    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn m(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn graph(&self) -> DirectedGraph {
        graph_of_matrix(&self.matrix).expect("product of nonnegative matrices")
    }

    pub fn is_positive(&self) -> bool {
        self.matrix.iter().all(|&v| v > 0.0)
    }

    /// Mix a stacked vector through the whole product.
    pub fn apply_kron(&self, x: &Stacked) -> Result<Stacked> {
        StochasticMatrix::from_entries(self.matrix.clone())?.apply_kron(x)
    }
}

/// Product over the window tau+1 ..= t of `seq`, where `seq[k]` is the matrix
/// applied at step k + 1. Left-multiplication in time order: later matrices
/// end up on the left.
pub fn phi_product(seq: &[StochasticMatrix], tau: usize, t: usize) -> Result<TransitionProduct> {
    if tau > t || t > seq.len() {
        return Err(Error::Precondition(format!(
            "product window needs 0 <= tau <= t <= {}, got tau={tau}, t={t}",
            seq.len()
        )));
    }
    let m = match seq.first() {
        Some(s) => s.m(),
        None => {
            return Err(Error::InvalidInput("product of an empty schedule".into()));
        }
    };
    if let Some((k, s)) = seq.iter().enumerate().find(|(_, s)| s.m() != m) {
        return Err(Error::DimensionMismatch(format!(
            "schedule matrix {k} is {}x{}, expected {m}x{m}",
            s.m(),
            s.m()
        )));
    }
    let mut matrix = DMatrix::identity(m, m);
    for k in tau..t {
        matrix = seq[k].matrix() * matrix;
    }
    // Accumulated rounding must not break row-stochasticity.
    for i in 0..m {
        let sum: f64 = matrix.row(i).iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "product row {i} sums to {sum}; window too ill-conditioned"
            )));
        }
    }
    Ok(TransitionProduct { tau, t, matrix })
}
