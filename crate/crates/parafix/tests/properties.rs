//! Property tests for the iteration's structural invariants.
//!
//! Randomized counterparts to the unit suites: metrics agree with their
//! definitions on arbitrary stacks, consensus fixed points are exact
//! equilibria of every mixing step, the stacked update equals the
//! agent-wise update bit for bit, uniform explicit weights reproduce the
//! default trajectory exactly, and every step of a witnessed run obeys
//! the two-stage distance contraction.

use nalgebra::{DMatrix, DVector};
use parafix::engine::{disagreement, residual, run, step, Scenario};
use parafix::graphs::{DirectedGraph, GraphSchedule};
use parafix::maps::{ConvexSet, ParaMap};
use parafix::matrices::{StochasticMatrix, WeightMap};
use parafix::vectorspace::{mixed_norm, MixedNorm, Stacked};
use proptest::prelude::*;

// ---------------------------------------------------------------------------
// Strategies. All sets contain the origin, so the origin is a common
// fixed point of every generated map and consensus stacks of it are
// common fixed points of every step.

fn coord() -> impl Strategy<Value = f64> {
    (-50i32..=50).prop_map(|k| k as f64 / 10.0)
}

fn block(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(coord(), n).prop_map(DVector::from_vec)
}

fn stacked(m: usize, n: usize) -> impl Strategy<Value = Stacked> {
    prop::collection::vec(block(n), m).prop_map(|blocks| Stacked::new(blocks).unwrap())
}

/// A projector onto a set containing the origin.
fn origin_map(n: usize) -> impl Strategy<Value = ParaMap> {
    prop_oneof![
        // Halfspace with nonnegative offset: 0 satisfies normal . 0 <= offset.
        (block(n), 0u32..=30).prop_filter_map("degenerate normal", |(normal, off)| {
            if normal.norm() < 0.1 {
                return None;
            }
            let set = ConvexSet::halfspace(normal, f64::from(off) / 10.0).ok()?;
            Some(ParaMap::projector(set))
        }),
        // Ball whose radius reaches past its center's distance to the origin.
        (block(n), 1u32..=40).prop_map(|(center, r)| {
            let radius = f64::from(r) / 10.0 + center.norm();
            ParaMap::projector(ConvexSet::ball(center, radius).unwrap())
        }),
        // Axis box straddling the origin coordinatewise.
        (block(n), block(n)).prop_map(|(a, b)| {
            let lo = a.map(|v| -v.abs() - 0.1);
            let hi = b.map(|v| v.abs() + 0.1);
            ParaMap::projector(ConvexSet::axis_box(lo, hi).unwrap())
        }),
    ]
}

/// A random self-arced graph on m vertices from an arc bitmask.
fn graph(m: usize) -> impl Strategy<Value = DirectedGraph> {
    prop::collection::vec(prop::bool::ANY, m * m).prop_map(move |bits| {
        let mut g = DirectedGraph::with_self_arcs(m).unwrap();
        for i in 0..m {
            for j in 0..m {
                if i != j && bits[i * m + j] {
                    g.add_arc(i, j).unwrap();
                }
            }
        }
        g
    })
}

/// Maps, a start, and a graph of matching shape.
fn instance() -> impl Strategy<Value = (Vec<ParaMap>, Stacked, DirectedGraph)> {
    (2usize..=4, 1usize..=3).prop_flat_map(|(m, n)| {
        (prop::collection::vec(origin_map(n), m), stacked(m, n), graph(m))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Disagreement equals the definition: the largest pairwise block
    /// p-norm gap (up to fold-order roundoff).
    #[test]
    fn disagreement_matches_its_definition(x in (2usize..=5, 1usize..=4).prop_flat_map(|(m, n)| stacked(m, n))) {
        let d = disagreement(&x, 2.0).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..x.m() {
            for j in 0..x.m() {
                worst = worst.max((x.block(i) - x.block(j)).norm());
            }
        }
        prop_assert!((d - worst).abs() <= 1e-12 * worst.max(1.0));
    }

    /// Consensus stacks have exactly zero disagreement.
    #[test]
    fn consensus_stacks_have_zero_disagreement(b in block(3), m in 2usize..=5) {
        let x = Stacked::uniform(m, b).unwrap();
        prop_assert_eq!(disagreement(&x, 2.0).unwrap(), 0.0);
    }

    /// Consensus at a common fixed point is an equilibrium of every
    /// mixing step: step(x*, S, maps) returns x* to 1e-12.
    #[test]
    fn consensus_fixed_points_are_step_equilibria((maps, x, g) in instance()) {
        let _ = x;
        let m = maps.len();
        let n = maps[0].dim();
        let s = StochasticMatrix::from_graph(&g).unwrap();
        // The common fixed point here is the origin by construction.
        let star = Stacked::uniform(m, DVector::zeros(n)).unwrap();
        let next = step(&star, &s, &maps).unwrap();
        for i in 0..m {
            prop_assert!(next.block(i).amax() <= 1e-12);
        }
    }

    /// The stacked update is the agent-wise update, bit for bit, when the
    /// agent-wise average is accumulated in the same ascending-j order.
    #[test]
    fn stacked_step_equals_agentwise_step_bitwise((maps, x, g) in instance()) {
        let m = maps.len();
        let n = maps[0].dim();
        let s = StochasticMatrix::from_graph(&g).unwrap();
        let stacked_next = step(&x, &s, &maps).unwrap();

        for i in 0..m {
            // x_i(t+1) = M_i( sum_{j in N_i} (1/|N_i|) x_j ), accumulated
            // ascending in j exactly like the library's kron application.
            let neighbors = g.in_neighbors(i);
            let w = 1.0 / neighbors.len() as f64;
            let mut avg = DVector::zeros(n);
            for j in neighbors {
                avg.axpy(w, x.block(j), 1.0);
            }
            let agent_next = maps[i].eval(&avg).unwrap();
            prop_assert_eq!(agent_next.as_slice(), stacked_next.block(i).as_slice());
        }
    }

    /// Explicit uniform weights reproduce the default (unweighted)
    /// trajectory exactly, step by recorded step.
    #[test]
    fn uniform_weights_reproduce_the_default_trajectory(
        (maps, x0, g) in instance(),
        horizon in 5u64..40,
    ) {
        let m = maps.len();
        let mut weights = WeightMap::new();
        for i in 0..m {
            let neighbors = g.in_neighbors(i);
            let w = 1.0 / neighbors.len() as f64;
            for j in neighbors {
                weights.insert((i, j), w);
            }
        }

        let plain = Scenario::new(
            maps.clone(),
            GraphSchedule::constant(g.clone()).unwrap(),
            x0.clone(),
        )
        .unwrap()
        .with_horizon(horizon);
        let weighted = Scenario::new(maps, GraphSchedule::constant(g).unwrap(), x0)
            .unwrap()
            .with_horizon(horizon)
            .with_weights(weights);

        let a = run(&plain).unwrap();
        let b = run(&weighted).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (sa, sb) in a.steps().iter().zip(b.steps()) {
            let (fa, fb) = (sa.x.flatten(), sb.x.flatten());
            prop_assert_eq!(fa.as_slice(), fb.as_slice());
        }
    }

    /// Two-stage distance contraction on every recorded step: with x* the
    /// consensus stack of the common fixed point, mixing never increases
    /// the (p, inf) distance and neither does mapping.
    #[test]
    fn every_witnessed_step_contracts_toward_the_witness(
        (maps, x0, g) in instance(),
        horizon in 10u64..60,
    ) {
        let m = maps.len();
        let n = maps[0].dim();
        let scenario = Scenario::new(maps, GraphSchedule::constant(g).unwrap(), x0)
            .unwrap()
            .with_horizon(horizon)
            .with_witness(DVector::zeros(n));

        let trace = run(&scenario).unwrap();
        let norm = MixedNorm::p_inf(2.0).unwrap();
        let star = Stacked::uniform(m, DVector::zeros(n)).unwrap();
        let dist = |x: &Stacked| {
            let diff = Stacked::new(
                (0..m).map(|i| x.block(i) - star.block(i)).collect(),
            )
            .unwrap();
            mixed_norm(&diff, norm).unwrap()
        };

        let mut prev: Option<f64> = None;
        for s in trace.steps() {
            let dx = dist(&s.x);
            let dbar = dist(&s.xbar);
            // Mixing never increases the distance; the map stage applies
            // to xbar and its result is the next step's x.
            prop_assert!(dbar <= dx + 1e-12, "mixing grew the distance: {} > {}", dbar, dx);
            if let Some(p) = prev {
                prop_assert!(dx <= p + 1e-12, "mapping grew the distance: {} > {}", dx, p);
            }
            prev = Some(dbar);
        }
    }

    /// The affine-solve residual has the stated closed form
    /// ||A'(AA')^{-1}(Ax - b)||_2 at each block.
    #[test]
    fn affine_residual_matches_the_normal_equations_form(
        x in block(3),
        rows in prop::collection::vec(prop::collection::vec(coord(), 3), 1..=2),
    ) {
        let nrows = rows.len();
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let a = DMatrix::from_row_slice(nrows, 3, &flat);
        prop_assume!(a.rank(1e-2) == nrows);
        let b = &a * DVector::from_row_slice(&[0.5, -1.0, 2.0]);

        let map = ParaMap::affine_linear_solve(a.clone(), b.clone()).unwrap();
        let r = &a * &x - &b;
        let gram = (&a * a.transpose()).try_inverse().unwrap();
        let expected = (a.transpose() * gram * r).norm();
        let got = map.residual(&x).unwrap();
        prop_assert!((got - expected).abs() <= 1e-9 * expected.max(1.0));
    }

    /// A projector's residual at a point is that point's distance to the
    /// set.
    #[test]
    fn projector_residual_is_the_set_distance(x in block(2), off in 0u32..=20) {
        let wall = ConvexSet::halfspace(DVector::from_row_slice(&[1.0, 0.0]), f64::from(off) / 10.0)
            .unwrap();
        let expected = wall.distance(&x).unwrap();
        let map = ParaMap::projector(wall);
        let got = map.residual(&x).unwrap();
        prop_assert!((got - expected).abs() <= 1e-12 * expected.max(1.0));
    }
}

// Pinned metric examples, outside proptest: exact expected values.
#[test]
fn pinned_disagreement_and_residual_examples() {
    let x = Stacked::new(vec![
        DVector::from_row_slice(&[0.0, 0.0]),
        DVector::from_row_slice(&[3.0, 4.0]),
    ])
    .unwrap();
    assert_eq!(disagreement(&x, 2.0).unwrap(), 5.0);

    let basis = Stacked::new(vec![
        DVector::from_row_slice(&[1.0, 0.0, 0.0]),
        DVector::from_row_slice(&[0.0, 1.0, 0.0]),
        DVector::from_row_slice(&[0.0, 0.0, 1.0]),
    ])
    .unwrap();
    assert!((disagreement(&basis, 2.0).unwrap() - 2.0f64.sqrt()).abs() <= 1e-15);

    // Blocks already at their own fixed points: residual exactly zero.
    let maps = vec![
        ParaMap::projector(
            ConvexSet::halfspace(DVector::from_row_slice(&[1.0, 0.0]), 1.0).unwrap(),
        ),
        ParaMap::projector(ConvexSet::ball(DVector::from_row_slice(&[0.0, 0.0]), 5.0).unwrap()),
    ];
    let fixed = Stacked::new(vec![
        DVector::from_row_slice(&[0.5, 2.0]),
        DVector::from_row_slice(&[3.0, -4.0]),
    ])
    .unwrap();
    assert_eq!(residual(&fixed, &maps, 2.0).unwrap(), 0.0);
}
