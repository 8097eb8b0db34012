//! Canonical inputs for the verification suite and the regression scenarios.
//!
//! Everything here is deterministic given its seed arguments, so the suite
//! and the acceptance tests exercise identical instances run after run. Two
//! map families recur: the Euclidean zoo (maps contracting in the 2-norm)
//! and the componentwise zoo (maps that contract in every p-norm because
//! they act coordinate by coordinate). Both families fix the origin, which
//! keeps a common fixed point available as a witness.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::engine::Scenario;
use crate::error::{Error, Result};
use crate::graphs::{DirectedGraph, GraphSchedule};
use crate::maps::{ConvexSet, NonexpansiveMap, ParaMap, ProxFn};
use crate::matrices::StochasticMatrix;
use crate::sampling::{seeded_rng, stacked_in_box, vector_in_box};
use crate::vectorspace::Stacked;

/// Maps on R^n that are paracontractions with respect to the 2-norm, all
/// fixing the origin: projectors of several shapes, a gradient step, two
/// proximity operators, an averaged map, and an orthogonal-projection
/// matrix.
pub fn euclidean_zoo(n: usize, seed: u64) -> Result<Vec<ParaMap>> {
    if n < 2 {
        return Err(Error::InvalidInput("the zoo needs dimension at least 2".into()));
    }
    let mut rng = seeded_rng(seed);
    let mut maps = Vec::new();

    // Ball containing the origin, center off to one side.
    let mut center = DVector::zeros(n);
    center[0] = 0.3;
    maps.push(ParaMap::projector(ConvexSet::ball(center, 1.0)?));

    // Halfspace through a positive offset, so the origin is interior.
    let normal = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0) + 0.1);
    maps.push(ParaMap::projector(ConvexSet::halfspace(normal, 0.5)?));

    // Axis-aligned box around the origin.
    let lo = DVector::from_element(n, -0.5);
    let hi = DVector::from_element(n, 1.0);
    maps.push(ParaMap::projector(ConvexSet::axis_box(lo, hi)?));

    // One-row affine subspace through the origin.
    let row = DMatrix::from_fn(1, n, |_, _| rng.gen_range(0.2..1.0));
    maps.push(ParaMap::affine_linear_solve(row, DVector::zeros(1))?);

    // Gradient step on a positive definite quadratic minimized at the
    // origin. The ridge keeps the curvature bounded away from zero, so
    // iterating the map settles quickly from any start.
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let q = &b * b.transpose() + DMatrix::identity(n, n) * 0.5;
    let lipschitz = q.symmetric_eigenvalues().max();
    maps.push(ParaMap::gradient_descent(q.clone(), DVector::zeros(n), 1.0 / lipschitz, lipschitz)?);

    // Proximity operators: soft threshold and a quadratic penalty.
    maps.push(ParaMap::proximal(ProxFn::OneNorm { weight: 0.7, dim: n })?);
    maps.push(ParaMap::proximal(ProxFn::Quadratic { q, c: DVector::zeros(n) })?);

    // Averaged nonexpansive map: a rotation in the plane, a reflection
    // otherwise.
    if n == 2 {
        maps.push(ParaMap::averaged(NonexpansiveMap::Rotation { angle: 0.8 }, 0.5)?);
    } else {
        let wall = ConvexSet::halfspace(DVector::from_element(n, 1.0), 0.4)?;
        maps.push(ParaMap::averaged(NonexpansiveMap::Reflection { set: wall }, 0.5)?);
    }

    // Orthogonal projection matrix onto a random line: a linear
    // paracontraction.
    let mut dir = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    dir /= dir.norm();
    maps.push(ParaMap::linear(&dir * dir.transpose())?);

    Ok(maps)
}

/// Maps that contract coordinate by coordinate, which makes them
/// paracontractions with respect to every p-norm, 1 < p < infinity. All fix
/// the origin; the diagonal shrink pins the common fixed set to {0}.
pub fn componentwise_zoo(n: usize, p: f64, seed: u64) -> Result<Vec<ParaMap>> {
    let mut rng = seeded_rng(seed);
    let mut maps = Vec::new();

    let lo = DVector::from_element(n, -0.75);
    let hi = DVector::from_element(n, 0.5);
    maps.push(ParaMap::projector(ConvexSet::axis_box(lo, hi)?).with_norm_order(p)?);

    maps.push(ParaMap::proximal(ProxFn::OneNorm { weight: 0.4, dim: n })?.with_norm_order(p)?);

    let d = DVector::from_fn(n, |_, _| rng.gen_range(0.3..0.9));
    maps.push(ParaMap::linear(DMatrix::from_diagonal(&d))?.with_norm_order(p)?);

    maps.push(
        ParaMap::linear(DMatrix::from_diagonal_element(n, n, 0.6))?.with_norm_order(p)?,
    );

    Ok(maps)
}

/// Pick `m` maps (cycling) out of a zoo.
pub fn pick_maps(zoo: &[ParaMap], m: usize) -> Vec<ParaMap> {
    (0..m).map(|i| zoo[i % zoo.len()].clone()).collect()
}

/// A well-conditioned 4x4 system A x = b with a known solution: A is a
/// small random perturbation of 2I, the solution is sampled, and b is the
/// exact float product A * x_true.
pub fn regression_system(seed: u64) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let mut rng = seeded_rng(seed);
    let n = 4;
    let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.5..0.5));
    for i in 0..n {
        a[(i, i)] += 2.0;
    }
    let x_true = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
    let b = &a * &x_true;
    (a, x_true, b)
}

/// Split the regression system across three agents by rows (2, 1, 1), each
/// an exact projection onto its own solution slab.
fn regression_maps(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Vec<ParaMap>> {
    let splits: [(usize, usize); 3] = [(0, 2), (2, 1), (3, 1)];
    splits
        .iter()
        .map(|&(start, rows)| {
            ParaMap::affine_linear_solve(
                a.rows(start, rows).into_owned(),
                b.rows(start, rows).into_owned(),
            )
        })
        .collect()
}

/// Three agents solving A x = b over a complete constant graph. Returns the
/// scenario and the direct solution it must reach.
pub fn linear_regression_scenario(seed: u64) -> Result<(Scenario, DVector<f64>)> {
    let (a, x_true, b) = regression_system(seed);
    let maps = regression_maps(&a, &b)?;
    let mut rng = seeded_rng(seed.wrapping_add(1));
    let x0 = stacked_in_box(&mut rng, 3, &DVector::zeros(4), 5.0)?;
    let schedule = GraphSchedule::constant(DirectedGraph::complete(3)?)?;
    let scenario = Scenario::new(maps, schedule, x0)?
        .with_horizon(5_000)
        .with_witness(x_true.clone());
    Ok((scenario, x_true))
}

/// The same three agents, but the graph cycles through single-arc stages:
/// 0 -> 1, then 1 -> 2, then 2 -> 0 (plus self-arcs). No single stage is
/// strongly connected; every window of three consecutive stages is.
pub fn periodic_regression_scenario(seed: u64) -> Result<(Scenario, DVector<f64>)> {
    let (a, x_true, b) = regression_system(seed);
    let maps = regression_maps(&a, &b)?;
    let mut rng = seeded_rng(seed.wrapping_add(1));
    let x0 = stacked_in_box(&mut rng, 3, &DVector::zeros(4), 5.0)?;
    let stages = vec![
        DirectedGraph::neighbor_graph(3, &[(0, 1)])?,
        DirectedGraph::neighbor_graph(3, &[(1, 2)])?,
        DirectedGraph::neighbor_graph(3, &[(2, 0)])?,
    ];
    let schedule = GraphSchedule::periodic(stages)?;
    let scenario = Scenario::new(maps, schedule, x0)?
        .with_horizon(20_000)
        .with_witness(x_true.clone());
    Ok((scenario, x_true))
}

/// The two walls whose band is the common fixed set of the stalling
/// scenario: x_1 <= 1 and x_1 >= -1.
pub fn band_sets() -> (ConvexSet, ConvexSet) {
    let c1 = ConvexSet::halfspace(DVector::from_row_slice(&[1.0, 0.0]), 1.0)
        .expect("valid halfspace");
    let c2 = ConvexSet::halfspace(DVector::from_row_slice(&[-1.0, 0.0]), 1.0)
        .expect("valid halfspace");
    (c1, c2)
}

/// Variants of the two-agent stalling scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StallVariant {
    /// Agent 0 hears only itself, starts inside its own set but outside the
    /// other: it never moves, and the run cannot converge.
    Frozen,
    /// Same graph, but agent 0 starts inside the intersection: converges.
    StartInside,
    /// The reverse arc is added, making the graph strongly connected:
    /// converges from the same start that stalled before.
    TwoWay,
}

/// Two projectors onto intersecting halfspaces under a rooted, one-way
/// constant graph. The graph has a root (agent 0 reaches everyone) yet the
/// iteration stalls unless the variant repairs it.
pub fn stall_scenario(variant: StallVariant) -> Result<Scenario> {
    let (c1, c2) = band_sets();
    let maps = vec![ParaMap::projector(c1), ParaMap::projector(c2)];
    let arcs: &[(usize, usize)] = match variant {
        StallVariant::TwoWay => &[(0, 1), (1, 0)],
        _ => &[(0, 1)],
    };
    let g = DirectedGraph::neighbor_graph(2, arcs)?;
    let agent0 = match variant {
        StallVariant::StartInside => DVector::from_row_slice(&[0.0, 0.5]),
        _ => DVector::from_row_slice(&[-3.0, 0.5]),
    };
    let x0 = Stacked::new(vec![agent0, DVector::from_row_slice(&[4.0, 1.0])])?;
    Scenario::new(maps, GraphSchedule::constant(g)?, x0).map(|s| {
        s.with_horizon(1_000)
            .with_tolerances(1e-8, 1e-8)
            .with_witness(DVector::from_row_slice(&[0.0, 0.0]))
    })
}

/// Uniform-weight mixing matrices for a self-arced directed cycle repeated
/// `q` times. For q = m - 1 the product of the window is entrywise
/// positive; for shorter windows it is strongly connected but not positive.
pub fn cycle_stages(m: usize, q: usize) -> Result<Vec<StochasticMatrix>> {
    let arcs: Vec<(usize, usize)> = (0..m).map(|i| (i, (i + 1) % m)).collect();
    let g = DirectedGraph::neighbor_graph(m, &arcs)?;
    let s = StochasticMatrix::from_graph(&g)?;
    Ok(vec![s; q])
}

/// The frozen 3x3 stochastic matrix with dyadic entries and a single zero
/// at (0, 1):
///   [ 1/2   0   1/2 ]
///   [ 1/4  1/2  1/4 ]
///   [ 1/2  1/4  1/4 ]
/// All entries are exact in binary floating point, every row sums to
/// exactly 1.0, and the fixed points of S (x) I are exactly the consensus
/// vectors — the setting where a zero entry forces the mixing step to
/// preserve some mixed norm exactly.
pub fn dyadic_zero_entry_matrix() -> StochasticMatrix {
    let s = DMatrix::from_row_slice(
        3,
        3,
        &[0.5, 0.0, 0.5, 0.25, 0.5, 0.25, 0.5, 0.25, 0.25],
    );
    StochasticMatrix::from_entries(s).expect("valid stochastic matrix")
}

/// A random m x m stochastic matrix whose entries are multiples of 1/8
/// (rows sum to exactly 1.0 in floating point), with at least one zero
/// entry off the diagonal and every diagonal entry positive. Returns `None`
/// if no draw within the budget also has the consensus vectors as the full
/// fixed set of S (x) I.
pub fn random_dyadic_zero_entry<R: Rng>(rng: &mut R, m: usize) -> Option<StochasticMatrix> {
    assert!(m >= 2, "need at least two agents");
    'draws: for _ in 0..200 {
        let mut entries = DMatrix::zeros(m, m);
        let mut zeroed = false;
        for i in 0..m {
            // Distribute eight eighths: one pinned to the diagonal, the rest
            // sprinkled over allowed columns.
            let forbidden = if !zeroed {
                let j = (i + 1) % m;
                zeroed = true;
                Some(j)
            } else {
                None
            };
            entries[(i, i)] += 0.125;
            for _ in 0..7 {
                let mut j = rng.gen_range(0..m);
                if Some(j) == forbidden {
                    j = i;
                }
                entries[(i, j)] += 0.125;
            }
            if let Some(j) = forbidden {
                if entries[(i, j)] != 0.0 {
                    continue 'draws;
                }
            }
        }
        if let Ok(s) = StochasticMatrix::from_entries(entries) {
            if s.has_positive_diagonal() && !s.is_positive() && s.consensus_fixed_set_check() {
                return Some(s);
            }
        }
    }
    None
}

/// Random points in a box around `center`, for sampling check inputs.
pub fn sample_points<R: Rng>(
    rng: &mut R,
    count: usize,
    center: &DVector<f64>,
    radius: f64,
) -> Vec<DVector<f64>> {
    (0..count).map(|_| vector_in_box(rng, center, radius)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zoo_maps_share_the_origin() {
        for map in euclidean_zoo(3, 7).unwrap() {
            assert!(map.residual(&DVector::zeros(3)).unwrap() <= 1e-12);
        }
        for map in componentwise_zoo(3, 1.5, 7).unwrap() {
            assert!(map.residual(&DVector::zeros(3)).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn regression_solution_is_exactly_fixed_for_every_agent() {
        let (scenario, x_true) = linear_regression_scenario(42).unwrap();
        for map in &scenario.maps {
            assert_eq!(map.residual(&x_true).unwrap(), 0.0);
        }
    }

    #[test]
    fn cycle_window_of_m_minus_1_is_positive_but_single_stage_is_not() {
        let stages = cycle_stages(3, 2).unwrap();
        let product = crate::matrices::phi_product(&stages, 0, 2).unwrap();
        assert!(product.is_positive());
        let single = crate::matrices::phi_product(&stages, 0, 1).unwrap();
        assert!(!single.is_positive());
        assert!(single.graph().is_strongly_connected());
    }

    #[test]
    fn dyadic_matrix_has_exact_rows_and_consensus_fixed_set() {
        let s = dyadic_zero_entry_matrix();
        assert_eq!(s.entry(0, 1), 0.0);
        assert!(s.has_positive_diagonal());
        assert!(s.consensus_fixed_set_check());
        for i in 0..3 {
            let sum: f64 = (0..3).map(|j| s.entry(i, j)).sum();
            assert_eq!(sum, 1.0);
        }
    }

    #[test]
    fn random_dyadic_draws_satisfy_the_same_contract() {
        let mut rng = seeded_rng(11);
        let s = random_dyadic_zero_entry(&mut rng, 3).expect("a draw should succeed");
        assert!(s.has_positive_diagonal());
        assert!(!s.is_positive());
        assert!(s.consensus_fixed_set_check());
        for i in 0..3 {
            let sum: f64 = (0..3).map(|j| s.entry(i, j)).sum();
            assert_eq!(sum, 1.0);
        }
    }
}
