//! Seeded samplers shared by the verification suite, tests, and examples.
//!
//! Everything here is deterministic given the RNG state; the suite derives
//! one ChaCha stream per check so reruns with the same seed reproduce every
//! sample exactly.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graphs::DirectedGraph;
use crate::maps::ParaMap;
use crate::matrices::StochasticMatrix;
use crate::vectorspace::Stacked;
use crate::EPS_FIX;

/// Iteration cap when hunting for a fixed point by repeated application.
/// Iteration budget for fixed-point searches.
pub const FIXED_POINT_CAP: usize = 100_000;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from the axis-aligned box of half-width `radius` around
/// `center`.
pub fn vector_in_box<R: Rng>(rng: &mut R, center: &DVector<f64>, radius: f64) -> DVector<f64> {
    DVector::from_fn(center.len(), |i, _| center[i] + rng.gen_range(-radius..=radius))
}

/// Stacked vector with every block drawn independently around `center`.
pub fn stacked_in_box<R: Rng>(
    rng: &mut R,
    m: usize,
    center: &DVector<f64>,
    radius: f64,
) -> Result<Stacked> {
    Stacked::new((0..m).map(|_| vector_in_box(rng, center, radius)).collect())
}

/// A sample around the map's witness that the map actually moves.
pub fn nonfixed_sample<R: Rng>(
    map: &ParaMap,
    radius: f64,
    rng: &mut R,
) -> Result<DVector<f64>> {
    for _ in 0..1000 {
        let x = vector_in_box(rng, map.witness(), radius);
        if !map.is_fixed_point(&x, EPS_FIX)? {
            return Ok(x);
        }
    }
    Err(Error::Precondition(
        "could not sample a non-fixed point; the fixed set may cover the sampling box".into(),
    ))
}

/// Locate a fixed point by repeated application from `start`, stopping when
/// the step settles below 1e-12.
pub fn fixed_point_near(map: &ParaMap, start: &DVector<f64>) -> Result<DVector<f64>> {
    let mut x = start.clone();
    for _ in 0..FIXED_POINT_CAP {
        let next = map.eval(&x)?;
        if (&next - &x).norm() <= 1e-12 {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Precondition("fixed-point iteration did not settle".into()))
}

/// Self-arcs plus each cross arc independently with probability `arc_prob`.
pub fn random_neighbor_graph<R: Rng>(
    rng: &mut R,
    m: usize,
    arc_prob: f64,
) -> Result<DirectedGraph> {
    let mut g = DirectedGraph::with_self_arcs(m)?;
    for from in 0..m {
        for to in 0..m {
            if from != to && rng.gen_bool(arc_prob) {
                g.add_arc(from, to)?;
            }
        }
    }
    Ok(g)
}

/// Resample neighbor graphs until one is strongly connected.
pub fn random_sc_neighbor_graph<R: Rng>(rng: &mut R, m: usize) -> Result<DirectedGraph> {
    for _ in 0..1000 {
        let g = random_neighbor_graph(rng, m, 0.5)?;
        if g.is_strongly_connected() {
            return Ok(g);
        }
    }
    Err(Error::Precondition("no strongly connected sample after 1000 draws".into()))
}

/// Random doubly stochastic matrix with strictly positive diagonal: a convex
/// combination of the identity (weight at least 0.2) and a few permutation
/// matrices. Row and column sums are one by construction.
pub fn random_doubly_stochastic<R: Rng>(rng: &mut R, m: usize) -> Result<StochasticMatrix> {
    if m == 0 {
        return Err(Error::InvalidInput("matrix needs at least one row".into()));
    }
    let k = 3usize;
    let id_weight = rng.gen_range(0.2..0.6);
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let raw_sum: f64 = raw.iter().sum();
    let mut entries = DMatrix::<f64>::identity(m, m) * id_weight;
    let mut perm: Vec<usize> = (0..m).collect();
    for w in &raw {
        perm.shuffle(rng);
        let weight = w / raw_sum * (1.0 - id_weight);
        for (i, &j) in perm.iter().enumerate() {
            entries[(i, j)] += weight;
        }
    }
    StochasticMatrix::from_entries(entries)
}

/// Random row-stochastic matrix with every entry strictly positive.
pub fn random_positive_stochastic<R: Rng>(rng: &mut R, m: usize) -> Result<StochasticMatrix> {
    if m == 0 {
        return Err(Error::InvalidInput("matrix needs at least one row".into()));
    }
    let mut entries = DMatrix::from_fn(m, m, |_, _| rng.gen_range(0.05..1.0));
    for i in 0..m {
        let sum: f64 = entries.row(i).iter().sum();
        for j in 0..m {
            entries[(i, j)] /= sum;
        }
    }
    StochasticMatrix::from_entries(entries)
}

/// Random positive weights on the arcs of `g`, each row normalized.
pub fn random_stochastic_for_graph<R: Rng>(
    rng: &mut R,
    g: &DirectedGraph,
) -> Result<StochasticMatrix> {
    let m = g.m();
    let mut entries = DMatrix::zeros(m, m);
    for i in 0..m {
        let neighbors = g.in_neighbors(i);
        if neighbors.is_empty() {
            return Err(Error::Precondition(format!("agent {i} has no in-neighbors")));
        }
        let raw: Vec<f64> = neighbors.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        for (&j, w) in neighbors.iter().zip(&raw) {
            entries[(i, j)] = w / sum;
        }
    }
    StochasticMatrix::from_entries(entries)
}
