//! Acceptance gate: nine end-to-end criteria the crate must meet, each
//! printing a single verdict line. Run with `--nocapture` to see the
//! lines for passing criteria too:
//!
//! ```text
//! cargo test --test acceptance -- --nocapture
//! ```
//!
//! Every tolerance is pinned here, next to the criterion that uses it.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use parafix::cli::{cmd_certify_graphs, cmd_run, EXIT_NOT_CERTIFIED, EXIT_OK};
use parafix::engine::run;
use parafix::graphs::{compose_graphs, graph_of_matrix, DirectedGraph};
use parafix::sampling::{random_stochastic_for_graph, seeded_rng};
use parafix::vectorspace::{mixed_norm, MixedNorm, Stacked};
use parafix::verify::checks::{check_double_stochastic_pc, check_mix_pc_pinf, check_positivity_necessity};
use parafix::verify::fixtures::{
    band_sets, linear_regression_scenario, periodic_regression_scenario, regression_system,
    stall_scenario, StallVariant,
};
use parafix::verify::run_check;
use parafix::DEFAULT_SEED;
use rand::Rng;

/// Consensus / residual convergence threshold for the regression runs.
const EPS_RUN: f64 = 1e-8;
/// Agreement between the distributed limit and the direct-solve oracle.
const ORACLE_TOL: f64 = 1e-6;
/// A frozen agent must hold its state to this over the whole run.
const FREEZE_TOL: f64 = 1e-12;
/// The frozen agent's distance to the other constraint set may shrink by
/// at most this relative factor (i.e. not at all, up to roundoff).
const DIST_SHRINK: f64 = 1e-9;
/// Slack for the per-step distance chain toward the witness.
const FEJER_SLACK: f64 = 1e-12;
/// Runtime budgets.
const BUDGET_REGRESSION: f64 = 5.0;
const BUDGET_STALL: f64 = 1.0;

fn verdict(criterion: usize, ok: bool, detail: &str) {
    println!("criterion {criterion}: {} — {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

/// Direct-solve oracle for the shared regression system: the full 4x4
/// system solved in one shot. The rows are independent by construction,
/// so the solution is unique.
fn oracle() -> DVector<f64> {
    let (a, _, b) = regression_system(DEFAULT_SEED);
    a.lu().solve(&b).expect("the regression system is square and full-rank")
}

#[test]
fn criterion_1_linear_regression_consensus() {
    let clock = Instant::now();
    let (scenario, _) = linear_regression_scenario(DEFAULT_SEED).unwrap();
    let trace = run(&scenario).unwrap();
    let elapsed = clock.elapsed().as_secs_f64();
    let last = trace.final_step();
    let x_direct = oracle();
    let worst_block = (0..3)
        .map(|i| (trace.final_state().block(i) - &x_direct).norm())
        .fold(0.0f64, f64::max);
    let ok = trace.converged()
        && trace.len() <= 5_000
        && last.disagreement <= EPS_RUN
        && last.residual <= EPS_RUN
        && worst_block <= ORACLE_TOL
        && elapsed < BUDGET_REGRESSION;
    verdict(
        1,
        ok,
        &format!(
            "complete-graph regression consensus in {} steps, disagreement {:.2e}, \
             residual {:.2e}, worst block-to-oracle distance {:.2e}, {elapsed:.2}s",
            trace.len(),
            last.disagreement,
            last.residual,
            worst_block
        ),
    );
}

#[test]
fn criterion_2_periodic_schedule_consensus() {
    let cert_exit = cmd_certify_graphs(&scenario_path("periodic.json"), 10, 5);
    let (scenario, _) = periodic_regression_scenario(DEFAULT_SEED).unwrap();
    let trace = run(&scenario).unwrap();
    let last = trace.final_step();
    let x_direct = oracle();
    let worst_block = (0..3)
        .map(|i| (trace.final_state().block(i) - &x_direct).norm())
        .fold(0.0f64, f64::max);
    let ok = cert_exit == EXIT_OK
        && trace.converged()
        && trace.len() <= 20_000
        && last.disagreement <= EPS_RUN
        && last.residual <= EPS_RUN
        && worst_block <= ORACLE_TOL;
    verdict(
        2,
        ok,
        &format!(
            "single-arc periodic schedule certified (exit {cert_exit}), consensus in {} steps, \
             worst block-to-oracle distance {:.2e}",
            trace.len(),
            worst_block
        ),
    );
}

#[test]
fn criterion_3_one_way_graph_stalls_and_reverse_arc_repairs_it() {
    let clock = Instant::now();
    let frozen = stall_scenario(StallVariant::Frozen).unwrap();
    let trace = run(&frozen).unwrap();
    let (_, c2) = band_sets();

    let x1_start = trace.step(1).unwrap().x.block(0).clone_owned();
    let d_start = c2.distance(&x1_start).unwrap();
    let mut worst_drift = 0.0f64;
    let mut min_distance = f64::INFINITY;
    for step in trace.steps() {
        let x1 = step.x.block(0).clone_owned();
        worst_drift = worst_drift.max((&x1 - &x1_start).amax());
        min_distance = min_distance.min(c2.distance(&x1).unwrap());
    }

    let repaired = run(&stall_scenario(StallVariant::TwoWay).unwrap()).unwrap();
    let elapsed = clock.elapsed().as_secs_f64();
    let ok = !trace.converged()
        && trace.len() == 1_000
        && worst_drift <= FREEZE_TOL
        && min_distance >= d_start * (1.0 - DIST_SHRINK)
        && repaired.converged()
        && elapsed < BUDGET_STALL;
    verdict(
        3,
        ok,
        &format!(
            "frozen agent drifted {worst_drift:.1e} over {} steps, distance to the opposite \
             wall stayed >= {min_distance:.12} (start {d_start:.12}); reverse arc converges \
             in {} steps; {elapsed:.2}s",
            trace.len(),
            repaired.len()
        ),
    );
}

#[test]
fn criterion_4_doubly_stochastic_matrices_contract_strictly() {
    let report = check_double_stochastic_pc(100, 6, 100, DEFAULT_SEED).unwrap();
    let margin = report.worst_margin().unwrap_or(f64::NAN);
    let ok = report.passed() && report.trials() > 0 && margin > 0.0;
    verdict(
        4,
        ok,
        &format!(
            "100 doubly stochastic positive-diagonal matrices x 100 samples: {} trials, \
             {} violations, worst strictness margin {margin:.2e}",
            report.trials(),
            report.violations().len()
        ),
    );
}

#[test]
fn criterion_5_positive_mixing_contracts_and_positivity_is_necessary() {
    // 10 positive matrices x 50 samples = 500 samples for each
    // p in {1.5, 2, 3}.
    let strict = check_mix_pc_pinf(10, 50, DEFAULT_SEED).unwrap();
    let necessity = check_positivity_necessity(10, DEFAULT_SEED).unwrap();
    let ok = strict.passed() && strict.trials() >= 3 * 500 && necessity.passed();
    verdict(
        5,
        ok,
        &format!(
            "strict block-max decrease: {} trials, {} violations; zero-entry witnesses \
             preserve the norm to 1e-15 on {} trials, {} violations",
            strict.trials(),
            strict.violations().len(),
            necessity.trials(),
            necessity.violations().len()
        ),
    );
}

#[test]
fn criterion_6_windowed_distance_inequalities_hold() {
    let names = ["v_inequality", "phi_strictness", "composed_map_pc", "stack_pc_22", "stack_qne_pinf"];
    let mut trials = 0usize;
    let mut violations = 0usize;
    for name in names {
        let report = run_check(name, DEFAULT_SEED).unwrap();
        trials += report.trials();
        violations += report.violations().len();
    }
    let ok = violations == 0 && trials > 0;
    verdict(
        6,
        ok,
        &format!(
            "window inequality, strictness/identity branches, and composed-map checks: \
             {trials} trials across {} checks, {violations} violations",
            names.len()
        ),
    );
}

#[test]
fn criterion_7_graph_algebra_matches_matrix_products() {
    let mut rng = seeded_rng(DEFAULT_SEED);

    // Products of stochastic matrices carry exactly the composed graph:
    // gamma(S2 S1) = gamma(S1) then gamma(S2), with no tolerance.
    let mut pair_failures = 0usize;
    for _ in 0..200 {
        let m = rng.gen_range(2..=5);
        let g1 = random_self_arced_graph(&mut rng, m);
        let g2 = random_self_arced_graph(&mut rng, m);
        let s1 = random_stochastic_for_graph(&mut rng, &g1).unwrap();
        let s2 = random_stochastic_for_graph(&mut rng, &g2).unwrap();
        let product = s2.matrix() * s1.matrix();
        let composed = compose_graphs(&s1.graph(), &s2.graph()).unwrap();
        if graph_of_matrix(&product).unwrap() != composed {
            pair_failures += 1;
        }
    }

    // Composing m - 1 self-arced strongly connected graphs yields the
    // complete graph: exhaustive over every such graph composed with
    // itself for m <= 4, plus random mixed tuples.
    let mut incomplete = 0usize;
    let mut exhaustive_graphs = 0usize;
    for m in 2..=4usize {
        for g in all_self_arced_sc_graphs(m) {
            exhaustive_graphs += 1;
            let mut acc = g.clone();
            for _ in 0..m - 2 {
                acc = compose_graphs(&acc, &g).unwrap();
            }
            if !acc.is_complete() {
                incomplete += 1;
            }
        }
    }
    let mut tuple_failures = 0usize;
    for _ in 0..200 {
        let m = rng.gen_range(2..=4);
        let mut acc = random_self_arced_sc_graph(&mut rng, m);
        for _ in 0..m - 2 {
            let next = random_self_arced_sc_graph(&mut rng, m);
            acc = compose_graphs(&acc, &next).unwrap();
        }
        if !acc.is_complete() {
            tuple_failures += 1;
        }
    }

    let ok = pair_failures == 0 && incomplete == 0 && tuple_failures == 0;
    verdict(
        7,
        ok,
        &format!(
            "matrix-product graphs matched composition on 200/200 random pairs; \
             (m-1)-fold composition complete for all {exhaustive_graphs} self-arced strongly \
             connected graphs with m <= 4 and 200 random mixed tuples \
             ({pair_failures}/{incomplete}/{tuple_failures} failures)"
        ),
    );
}

#[test]
fn criterion_8_distance_chain_is_monotone_on_every_regression_step() {
    let spec = MixedNorm::p_inf(2.0).unwrap();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut steps_checked = 0usize;
    for scenario in [
        linear_regression_scenario(DEFAULT_SEED).unwrap().0,
        periodic_regression_scenario(DEFAULT_SEED).unwrap().0,
    ] {
        let witness = scenario.witness.clone().unwrap();
        let w = Stacked::uniform(3, witness).unwrap();
        let trace = run(&scenario).unwrap();
        let d = |x: &Stacked| mixed_norm(&(x - &w), spec).unwrap();
        for pair in trace.steps().windows(2) {
            // Mixing must not increase the distance, and neither may the
            // map stage that produces the next state.
            worst_excess = worst_excess.max(d(&pair[0].xbar) - d(&pair[0].x));
            worst_excess = worst_excess.max(d(&pair[1].x) - d(&pair[0].xbar));
            steps_checked += 1;
        }
        let last = trace.final_step();
        worst_excess = worst_excess.max(d(&last.xbar) - d(&last.x));
    }
    let ok = worst_excess <= FEJER_SLACK;
    verdict(
        8,
        ok,
        &format!(
            "distance to the witness never rose by more than {worst_excess:.2e} \
             across {steps_checked} recorded steps of both regression runs (slack {FEJER_SLACK:.0e})"
        ),
    );
}

#[test]
fn criterion_9_repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ra, rb) = (
        cmd_run(&scenario_path("linear.json"), a.path()),
        cmd_run(&scenario_path("linear.json"), b.path()),
    );
    let mut identical = ra == EXIT_OK && rb == EXIT_OK;
    for file in ["trace.csv", "metrics.csv", "summary.txt"] {
        identical &= std::fs::read(a.path().join(file)).unwrap()
            == std::fs::read(b.path().join(file)).unwrap();
    }
    verdict(9, identical, "two runs of the same scenario file wrote byte-identical outputs");
}

/// Any graph with all self-arcs and a random subset of cross arcs.
fn random_self_arced_graph<R: Rng>(rng: &mut R, m: usize) -> DirectedGraph {
    let mut g = DirectedGraph::with_self_arcs(m).unwrap();
    for i in 0..m {
        for j in 0..m {
            if i != j && rng.gen_bool(0.4) {
                g.add_arc(i, j).unwrap();
            }
        }
    }
    g
}

fn random_self_arced_sc_graph<R: Rng>(rng: &mut R, m: usize) -> DirectedGraph {
    loop {
        let g = random_self_arced_graph(rng, m);
        if g.is_strongly_connected() {
            return g;
        }
    }
}

/// Every self-arced graph on `m` vertices that is strongly connected,
/// by enumerating all 2^(m(m-1)) cross-arc subsets.
fn all_self_arced_sc_graphs(m: usize) -> Vec<DirectedGraph> {
    let cross: Vec<(usize, usize)> =
        (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut graphs = Vec::new();
    for mask in 0u32..(1 << cross.len()) {
        let mut g = DirectedGraph::with_self_arcs(m).unwrap();
        for (bit, &(i, j)) in cross.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                g.add_arc(i, j).unwrap();
            }
        }
        if g.is_strongly_connected() {
            graphs.push(g);
        }
    }
    graphs
}

#[test]
fn exit_code_constants_match_the_documented_contract() {
    assert_eq!(EXIT_OK, 0);
    assert_eq!(parafix::cli::EXIT_ERROR, 1);
    assert_eq!(parafix::cli::EXIT_HORIZON, 2);
    assert_eq!(EXIT_NOT_CERTIFIED, 3);
}
