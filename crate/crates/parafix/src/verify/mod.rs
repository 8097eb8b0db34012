//! Numerical verification suite.
//!
//! Every structural claim the library's convergence machinery rests on is
//! bound to a named check that exercises it on deterministic sampled
//! instances and returns a [`CheckReport`]. The checks live in
//! [`checks`] as parameterized functions; this module fixes the canonical
//! instances (sample counts, map families, schedules) behind a name
//! registry so the CLI, the tests, and library callers all run the same
//! suite.
//!
//! Naming: checks are addressed by the names in [`CHECK_NAMES`]; a
//! `check_` prefix is accepted and stripped, so `check_counterexample`
//! and `counterexample` select the same entry.

pub mod checks;
pub mod fixtures;
pub mod vseq;

use std::io::Write as IoWrite;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graphs::search_rjsc;
use crate::maps::{ConvexSet, ParaMap};
use crate::matrices::StochasticMatrix;
use crate::report::CheckReport;
use crate::sampling::{
    random_doubly_stochastic, random_positive_stochastic, random_sc_neighbor_graph,
    random_stochastic_for_graph, seeded_rng, stacked_in_box, vector_in_box,
};
use crate::vectorspace::Stacked;
use crate::verify::fixtures::{
    band_sets, componentwise_zoo, cycle_stages, euclidean_zoo, linear_regression_scenario,
    periodic_regression_scenario, pick_maps, sample_points,
};
use crate::verify::vseq::VSequence;

pub use checks::{
    check_composed_map_pc, check_composite_fixed_set, check_composition_fixed_sets,
    check_counterexample, check_double_stochastic_pc, check_fixed_set_convexity,
    check_linear_qne_iff_ne, check_mix_pc_22, check_mix_pc_pinf, check_mix_qne_pinf,
    check_phi_strictness, check_pooled_linear, check_positivity_necessity, check_stack_pc_22,
    check_stack_qne_pinf, check_subsequence_convergence, check_v_inequality,
};

/// Every check in the default suite, in execution order.
pub const CHECK_NAMES: [&str; 17] = [
    "pooled_linear",
    "composition_fixed_sets",
    "fixed_set_convexity",
    "linear_qne_iff_ne",
    "stack_pc_22",
    "stack_qne_pinf",
    "double_stochastic_pc",
    "mix_pc_22",
    "mix_qne_pinf",
    "mix_pc_pinf",
    "positivity_necessity",
    "v_inequality",
    "phi_strictness",
    "composed_map_pc",
    "composite_fixed_set",
    "counterexample",
    "subsequence_convergence",
];

/// Run one named check on its canonical instances.
pub fn run_check(name: &str, seed: u64) -> Result<CheckReport> {
    let key = name.strip_prefix("check_").unwrap_or(name);
    match key {
        "pooled_linear" => suite_pooled_linear(seed),
        "composition_fixed_sets" => suite_composition_fixed_sets(seed),
        "fixed_set_convexity" => suite_fixed_set_convexity(seed),
        "linear_qne_iff_ne" => suite_linear_qne_iff_ne(seed),
        "stack_pc_22" => suite_stack_pc_22(seed),
        "stack_qne_pinf" => suite_stack_qne_pinf(seed),
        "double_stochastic_pc" => Ok(check_double_stochastic_pc(100, 6, 100, seed)?),
        "mix_pc_22" => Ok(check_mix_pc_22(50, 50, seed)?),
        "mix_qne_pinf" => Ok(check_mix_qne_pinf(30, 30, seed)?),
        "mix_pc_pinf" => Ok(check_mix_pc_pinf(10, 50, seed)?),
        "positivity_necessity" => Ok(check_positivity_necessity(10, seed)?),
        "v_inequality" => suite_v_inequality(seed),
        "phi_strictness" => suite_phi_strictness(seed),
        "composed_map_pc" => suite_composed_map_pc(seed),
        "composite_fixed_set" => suite_composite_fixed_set(seed),
        "counterexample" => check_counterexample(),
        "subsequence_convergence" => suite_subsequence_convergence(seed),
        _ => Err(Error::UnknownCheck(name.to_string())),
    }
}

/// Run a selection of checks: `"all"`, or comma-separated names.
pub fn run_suite(selector: &str, seed: u64) -> Result<Vec<CheckReport>> {
    let names: Vec<&str> = if selector.trim() == "all" {
        CHECK_NAMES.to_vec()
    } else {
        selector.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
    };
    if names.is_empty() {
        return Err(Error::InvalidInput("empty check selection".into()));
    }
    names.into_iter().map(|name| run_check(name, seed)).collect()
}

/// Machine-readable suite summary: `check,trials,violations,worst_margin`.
pub fn write_report_csv(reports: &[CheckReport], w: &mut impl IoWrite) -> Result<()> {
    writeln!(w, "check,trials,violations,worst_margin")?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Human-readable suite summary: one block per check with the summary
/// line, any violations (both compared sides), and notes.
pub fn write_report_text(reports: &[CheckReport], w: &mut impl IoWrite) -> Result<()> {
    for r in reports {
        writeln!(w, "{}", r.summary_line())?;
        for v in r.violations() {
            writeln!(w, "    VIOLATION {}: lhs = {:e}, rhs = {:e}", v.context, v.lhs, v.rhs)?;
        }
        for n in r.notes() {
            writeln!(w, "    note: {n}")?;
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed == 0 {
        writeln!(w, "all {} checks passed", reports.len())?;
    } else {
        writeln!(w, "{failed} of {} checks FAILED", reports.len())?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Canonical instances.

fn vec2(a: f64, b: f64) -> DVector<f64> {
    DVector::from_row_slice(&[a, b])
}

/// Limits of pooled iterations: alternating wall projections, a random
/// order over three different map kinds, a single map, and a start already
/// at the fixed point.
fn suite_pooled_linear(seed: u64) -> Result<CheckReport> {
    let (c1, c2) = band_sets();
    let pool = vec![ParaMap::projector(c1), ParaMap::projector(c2)];
    let order: Vec<usize> = (0..300).map(|k| k % 2).collect();
    let mut report = check_pooled_linear(&pool, &order, &vec2(-3.0, 7.0))?;

    let zoo = euclidean_zoo(2, seed)?;
    // Ball projector, gradient step, soft threshold: the latter two pin the
    // common fixed set to the origin.
    let pool = vec![zoo[0].clone(), zoo[4].clone(), zoo[5].clone()];
    let mut rng = seeded_rng(seed.wrapping_add(1));
    let order: Vec<usize> = (0..3000).map(|_| rng.gen_range(0..pool.len())).collect();
    let x0 = vector_in_box(&mut rng, &DVector::zeros(2), crate::SAMPLE_RADIUS);
    report.absorb(check_pooled_linear(&pool, &order, &x0)?);

    let single = vec![zoo[2].clone()];
    report.absorb(check_pooled_linear(&single, &vec![0; 50], &vec2(-3.0, 7.0))?);

    let at_witness = single[0].witness().clone();
    report.absorb(check_pooled_linear(&single, &vec![0; 5], &at_witness)?);
    Ok(report)
}

/// Fixed sets of two-map compositions: parallel walls and ball-meets-wall.
fn suite_composition_fixed_sets(seed: u64) -> Result<CheckReport> {
    let mut rng = seeded_rng(seed);
    let zero = DVector::zeros(2);

    let (c1, c2) = band_sets();
    let p1 = ParaMap::projector(c1.clone());
    let p2 = ParaMap::projector(c2.clone());
    let band = ConvexSet::intersection(vec![c1, c2], zero.clone())?;
    let intersection_samples: Vec<DVector<f64>> = (0..25)
        .map(|_| band.project(&vector_in_box(&mut rng, &zero, crate::SAMPLE_RADIUS)))
        .collect::<Result<Vec<_>>>()?;
    let probe_starts = sample_points(&mut rng, 25, &zero, crate::SAMPLE_RADIUS);
    let one_sided: Vec<DVector<f64>> = (0..10)
        .map(|_| {
            let mut v = vector_in_box(&mut rng, &zero, crate::SAMPLE_RADIUS);
            v[0] = -3.0;
            v
        })
        .collect();
    let mut report =
        check_composition_fixed_sets(&p1, &p2, &intersection_samples, &probe_starts, &one_sided)?;

    let ball = ConvexSet::ball(zero.clone(), 2.0)?;
    let wall = ConvexSet::halfspace(vec2(1.0, 0.0), 1.0)?;
    let q1 = ParaMap::projector(ball.clone());
    let q2 = ParaMap::projector(wall.clone());
    let lens = ConvexSet::intersection(vec![ball, wall], zero.clone())?;
    let intersection_samples: Vec<DVector<f64>> = (0..15)
        .map(|_| lens.project(&vector_in_box(&mut rng, &zero, crate::SAMPLE_RADIUS)))
        .collect::<Result<Vec<_>>>()?;
    let probe_starts = sample_points(&mut rng, 15, &zero, crate::SAMPLE_RADIUS);
    // In the ball but past the wall; past the ball but within the wall.
    let one_sided = vec![vec2(1.5, 0.25), vec2(0.0, 2.5)];
    report.absorb(check_composition_fixed_sets(
        &q1,
        &q2,
        &intersection_samples,
        &probe_starts,
        &one_sided,
    )?);
    Ok(report)
}

/// Convex-combination probes of located fixed points, over the whole
/// Euclidean zoo.
fn suite_fixed_set_convexity(seed: u64) -> Result<CheckReport> {
    let zoo = euclidean_zoo(3, seed)?;
    let mut report = CheckReport::new("fixed_set_convexity");
    for (i, map) in zoo.iter().enumerate() {
        report.absorb(check_fixed_set_convexity(map, 500, seed.wrapping_add(i as u64))?);
    }
    Ok(report)
}

/// The linear equivalences on four qualitatively different matrices:
/// an orthogonal projection, a doubling, a doubly stochastic averaging
/// matrix, and a rotation.
fn suite_linear_qne_iff_ne(seed: u64) -> Result<CheckReport> {
    let mut rng = seeded_rng(seed);
    let mut dir = DVector::from_fn(3, |_, _| rng.gen_range(-1.0_f64..1.0));
    dir /= dir.norm();
    let projection = ParaMap::linear(&dir * dir.transpose())?;
    let doubling = ParaMap::linear(DMatrix::identity(2, 2) * 2.0)?;
    let averaging = ParaMap::linear(random_doubly_stochastic(&mut rng, 4)?.matrix().clone())?;
    let (sin, cos) = 0.8_f64.sin_cos();
    let rotation = ParaMap::linear(DMatrix::from_row_slice(2, 2, &[cos, -sin, sin, cos]))?;

    let mut report = CheckReport::new("linear_qne_iff_ne");
    for (i, map) in [projection, doubling, averaging, rotation].iter().enumerate() {
        report.absorb(check_linear_qne_iff_ne(map, 100, seed.wrapping_add(i as u64))?);
    }
    Ok(report)
}

/// Strict (2, 2) contraction of the stacked map: zoo picks and the wall
/// pair.
fn suite_stack_pc_22(seed: u64) -> Result<CheckReport> {
    let zoo = euclidean_zoo(2, seed)?;
    let maps = pick_maps(&zoo, 3);
    let mut report = check_stack_pc_22(&maps, 200, seed.wrapping_add(1))?;

    let (c1, c2) = band_sets();
    let walls = vec![ParaMap::projector(c1), ParaMap::projector(c2)];
    report.absorb(check_stack_pc_22(&walls, 200, seed.wrapping_add(2))?);
    Ok(report)
}

/// Non-strict (p, inf) behavior of the stacked map, including the exact
/// equality witness, for componentwise maps at p in {1.5, 3} and Euclidean
/// maps at p = 2.
fn suite_stack_qne_pinf(seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::new("stack_qne_pinf");
    for (i, &p) in [1.5, 3.0].iter().enumerate() {
        let zoo = componentwise_zoo(3, p, seed)?;
        let maps = pick_maps(&zoo, 4);
        report.absorb(check_stack_qne_pinf(&maps, p, 200, seed.wrapping_add(i as u64))?);
    }
    let zoo = euclidean_zoo(3, seed)?;
    let maps = pick_maps(&zoo, 3);
    report.absorb(check_stack_qne_pinf(&maps, 2.0, 200, seed.wrapping_add(9))?);
    Ok(report)
}

/// 200 random map-then-mix windows with m <= 4 agents and up to q = 6
/// stages over strongly connected stage graphs, plus one fixed-start
/// window on the cycle schedule.
fn suite_v_inequality(seed: u64) -> Result<CheckReport> {
    let zoo = euclidean_zoo(2, seed)?;
    let y_star = DVector::zeros(2);
    let mut rng = seeded_rng(seed.wrapping_add(7));
    let mut report = CheckReport::new("v_inequality");
    for _ in 0..200 {
        let m = rng.gen_range(2..=4);
        let q = rng.gen_range(1..=6);
        let maps = pick_maps(&zoo, m);
        let stages: Vec<StochasticMatrix> = (0..q)
            .map(|_| {
                let g = random_sc_neighbor_graph(&mut rng, m)?;
                random_stochastic_for_graph(&mut rng, &g)
            })
            .collect::<Result<Vec<_>>>()?;
        let v0 = stacked_in_box(&mut rng, m, &y_star, crate::SAMPLE_RADIUS)?;
        let vs = VSequence::generate(maps, stages, v0, y_star.clone(), 2.0)?;
        report.absorb(check_v_inequality(&vs)?);
    }

    let maps = pick_maps(&zoo, 3);
    let stages = cycle_stages(3, 4)?;
    let v0 = Stacked::new(vec![vec2(5.0, -3.0), vec2(-2.0, 7.0), vec2(0.5, 0.5)])?;
    let vs = VSequence::generate(maps, stages, v0, y_star, 2.0)?;
    report.absorb(check_v_inequality(&vs)?);
    Ok(report)
}

/// The strict and identity branches at the window end: far starts make
/// some influencing block move (strict case); starts inside a shared box
/// freeze every map (exact linear-mix case).
fn suite_phi_strictness(seed: u64) -> Result<CheckReport> {
    let zoo = euclidean_zoo(2, seed)?;
    let y_star = DVector::zeros(2);
    let mut rng = seeded_rng(seed.wrapping_add(11));
    let mut report = CheckReport::new("phi_strictness");
    for _ in 0..100 {
        let m = rng.gen_range(2..=4);
        let q = rng.gen_range(1..=6);
        let maps = pick_maps(&zoo, m);
        let stages: Vec<StochasticMatrix> = (0..q)
            .map(|_| {
                let g = random_sc_neighbor_graph(&mut rng, m)?;
                random_stochastic_for_graph(&mut rng, &g)
            })
            .collect::<Result<Vec<_>>>()?;
        let v0 = stacked_in_box(&mut rng, m, &y_star, crate::SAMPLE_RADIUS)?;
        let vs = VSequence::generate(maps, stages, v0, y_star.clone(), 2.0)?;
        report.absorb(check_phi_strictness(&vs)?);
    }

    // All agents project onto the same box and start strictly inside it,
    // so every map application is the identity and the window end must be
    // the exact transition-product mix of the starts.
    let shared_box = ParaMap::projector(ConvexSet::axis_box(
        DVector::from_element(2, -0.5),
        DVector::from_element(2, 0.5),
    )?);
    for _ in 0..50 {
        let m = rng.gen_range(2..=4);
        let q = rng.gen_range(1..=6);
        let maps = vec![shared_box.clone(); m];
        let stages: Vec<StochasticMatrix> = (0..q)
            .map(|_| {
                let g = random_sc_neighbor_graph(&mut rng, m)?;
                random_stochastic_for_graph(&mut rng, &g)
            })
            .collect::<Result<Vec<_>>>()?;
        let v0 = stacked_in_box(&mut rng, m, &y_star, 0.4)?;
        let vs = VSequence::generate(maps, stages, v0, y_star.clone(), 2.0)?;
        report.absorb(check_phi_strictness(&vs)?);
    }
    Ok(report)
}

/// Three halfspace projectors sharing a fixed point, mixed over a cycle
/// window with positive product (500 samples at p = 2); then single-stage
/// positive mixing with componentwise maps at p in {1.5, 3}.
fn suite_composed_map_pc(seed: u64) -> Result<CheckReport> {
    let walls = vec![
        ParaMap::projector(ConvexSet::halfspace(vec2(1.0, 0.0), 1.0)?),
        ParaMap::projector(ConvexSet::halfspace(vec2(0.0, 1.0), 0.5)?),
        ParaMap::projector(ConvexSet::halfspace(vec2(-1.0, 1.0), 1.0)?),
    ];
    let stages = cycle_stages(3, 2)?;
    let mut report = check_composed_map_pc(&walls, &stages, 2.0, 500, seed)?;

    let mut rng = seeded_rng(seed.wrapping_add(3));
    for &p in &[1.5, 3.0] {
        let zoo = componentwise_zoo(2, p, seed)?;
        let maps = pick_maps(&zoo, 3);
        let stages = vec![random_positive_stochastic(&mut rng, 3)?];
        report.absorb(check_composed_map_pc(&maps, &stages, p, 100, seed.wrapping_add(4))?);
    }
    Ok(report)
}

/// The fixed-set identity under the weaker strongly-connected-product
/// hypothesis: one cycle stage only (not positive), with a shared box and
/// with componentwise maps.
fn suite_composite_fixed_set(seed: u64) -> Result<CheckReport> {
    let shared_box = ParaMap::projector(ConvexSet::axis_box(
        DVector::from_element(2, -0.5),
        DVector::from_element(2, 1.0),
    )?);
    let boxes = vec![shared_box.clone(), shared_box.clone(), shared_box];
    let stages = cycle_stages(3, 1)?;
    let mut report = check_composite_fixed_set(&boxes, &stages, 2.0, 10, seed)?;

    let zoo = componentwise_zoo(2, 2.0, seed)?;
    let maps = pick_maps(&zoo, 3);
    report.absorb(check_composite_fixed_set(&maps, &stages, 2.0, 10, seed.wrapping_add(1))?);
    Ok(report)
}

/// The distance chain and window-boundary subsequence on both regression
/// scenarios; the periodic schedule's window length comes from the
/// certification search, not by fiat.
fn suite_subsequence_convergence(seed: u64) -> Result<CheckReport> {
    let (periodic, _) = periodic_regression_scenario(seed)?;
    let cert = search_rjsc(&periodic.schedule, 6, 4)?.ok_or_else(|| {
        Error::Precondition("the periodic schedule should certify within l <= 6".into())
    })?;
    let mut report = check_subsequence_convergence(&periodic, cert.l, cert.rho0)?;
    report.note(format!(
        "periodic schedule certified with window length {} offset {}",
        cert.l, cert.rho0
    ));

    let (constant, _) = linear_regression_scenario(seed)?;
    report.absorb(check_subsequence_convergence(&constant, 1, 1)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_knows_every_name_with_and_without_prefix() {
        assert!(run_check("counterexample", 42).unwrap().passed());
        assert!(run_check("check_counterexample", 42).unwrap().passed());
        assert!(matches!(run_check("nosuchcheck", 42), Err(Error::UnknownCheck(_))));
    }

    #[test]
    fn selector_splits_names_and_rejects_empty() {
        let reports = run_suite("counterexample, positivity_necessity", 42).unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].name(), "counterexample");
        assert_eq!(reports[1].name(), "positivity_necessity");
        assert!(run_suite("", 42).is_err());
        assert!(run_suite(" , ,", 42).is_err());
    }

    #[test]
    fn report_csv_has_header_and_one_row_per_check() {
        let reports = run_suite("counterexample", 42).unwrap();
        let mut buf = Vec::new();
        write_report_csv(&reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "check,trials,violations,worst_margin");
        assert!(lines[1].starts_with("counterexample,"));
    }

    #[test]
    fn report_text_summarizes_the_suite() {
        let reports = run_suite("positivity_necessity", 42).unwrap();
        let mut buf = Vec::new();
        write_report_text(&reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("positivity_necessity"));
        assert!(text.contains("all 1 checks passed"));
    }
}
