//! The individual verification checks.
//!
//! Each function certifies one property of the map/mixing machinery on
//! finite samples and returns a [`CheckReport`] carrying trial counts,
//! violations, and the worst margin observed. Preconditions the check
//! cannot make sense without (a shared fixed point, a positive stage
//! product, ...) are errors, not violations: a violation always means the
//! asserted property itself failed on a concrete input.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::engine::{apply_maps, disagreement, extract_z_subsequence, run, Scenario};
use crate::error::{Error, Result};
use crate::maps::{ConvexSet, ParaMap};
use crate::matrices::{phi_product, StochasticMatrix};
use crate::report::CheckReport;
use crate::sampling::{
    fixed_point_near, seeded_rng, stacked_in_box, vector_in_box, FIXED_POINT_CAP,
};
use crate::vectorspace::{mixed_norm, p_norm, MixedNorm, NormOrder, Stacked};
use crate::verify::fixtures::{band_sets, stall_scenario, StallVariant};
use crate::verify::vseq::VSequence;
use crate::{EPS_FIX, EPS_STRICT, SAMPLE_RADIUS};

/// Relative slack for non-strict comparisons.
fn le_slack(rhs: f64) -> f64 {
    1e-12 * rhs.abs().max(1.0)
}

/// A point fixed by every map in the slice, or a precondition error. Each
/// map's stored witness is tried in turn.
fn common_witness(maps: &[ParaMap]) -> Result<DVector<f64>> {
    if maps.is_empty() {
        return Err(Error::InvalidInput("need at least one map".into()));
    }
    'candidates: for candidate in maps.iter().map(|m| m.witness()) {
        for map in maps {
            if map.residual(candidate)? > EPS_FIX {
                continue 'candidates;
            }
        }
        return Ok(candidate.clone());
    }
    Err(Error::Precondition(
        "no stored witness is a common fixed point of all the maps".into(),
    ))
}

/// One pass of the staged update: for each stage, apply every agent's map,
/// then mix with that stage's matrix.
pub fn staged_update(
    maps: &[ParaMap],
    stages: &[StochasticMatrix],
    x: &Stacked,
) -> Result<Stacked> {
    let mut cur = x.clone();
    for s in stages {
        cur = s.apply_kron(&apply_maps(&cur, maps)?)?;
    }
    Ok(cur)
}

/// Locate a fixed point of the staged update by damped iteration
/// x <- (x + T(x)) / 2, stopping when ||T(x) - x|| in the (p, inf) norm
/// drops below 1e-10.
fn damped_staged_fixed_point(
    maps: &[ParaMap],
    stages: &[StochasticMatrix],
    start: &Stacked,
    p: f64,
) -> Result<Stacked> {
    let spec = MixedNorm::p_inf(p)?;
    let mut x = start.clone();
    for _ in 0..FIXED_POINT_CAP {
        let tx = staged_update(maps, stages, &x)?;
        if mixed_norm(&(&tx - &x), spec)? <= 1e-10 {
            return Ok(tx);
        }
        let blocks: Vec<DVector<f64>> = x
            .blocks()
            .iter()
            .zip(tx.blocks())
            .map(|(a, b)| (a + b) * 0.5)
            .collect();
        x = Stacked::new(blocks)?;
    }
    Err(Error::Precondition(
        "damped fixed-point search did not settle within the step budget".into(),
    ))
}

/// Iterating maps drawn from a finite pool with a shared fixed point: the
/// limit must be fixed by every map that was applied often enough (at least
/// T / (2 * pool size) times stands in for "infinitely often").
pub fn check_pooled_linear(
    pool: &[ParaMap],
    order: &[usize],
    x0: &DVector<f64>,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("pooled_linear");
    if pool.is_empty() || order.is_empty() {
        return Err(Error::InvalidInput("need a non-empty pool and order".into()));
    }
    common_witness(pool)?;
    for (i, map) in pool.iter().enumerate() {
        if map.dim() != x0.len() {
            return Err(Error::DimensionMismatch(format!(
                "pool map {i} has dimension {}, start has {}",
                map.dim(),
                x0.len()
            )));
        }
    }
    let mut counts = vec![0usize; pool.len()];
    let mut x = x0.clone();
    for &k in order {
        let map = pool.get(k).ok_or_else(|| {
            Error::InvalidInput(format!("order index {k} out of range for pool of {}", pool.len()))
        })?;
        counts[k] += 1;
        x = map.eval(&x)?;
    }
    let often = (order.len() / (2 * pool.len())).max(1);
    for (k, (map, &count)) in pool.iter().zip(&counts).enumerate() {
        if count >= often {
            let r = map.residual(&x)?;
            report.add_trial();
            report.require_le(
                || format!("limit residual of map {k} (applied {count} times)"),
                r,
                1e-7,
                0.0,
            );
        } else {
            report.note(format!("map {k} applied only {count} times; no claim made"));
        }
    }
    Ok(report)
}

/// The fixed set of a composition with a shared fixed point is exactly the
/// intersection of the member fixed sets: intersection points are fixed by
/// the composite, composite-fixed points pass both members' oracles, and
/// one-sided points are moved.
pub fn check_composition_fixed_sets(
    p1: &ParaMap,
    p2: &ParaMap,
    intersection_samples: &[DVector<f64>],
    probe_starts: &[DVector<f64>],
    one_sided_samples: &[DVector<f64>],
) -> Result<CheckReport> {
    let mut report = CheckReport::new("composition_fixed_sets");
    let witness = intersection_samples
        .first()
        .ok_or_else(|| Error::Precondition("need at least one shared fixed point".into()))?
        .clone();
    for (k, z) in intersection_samples.iter().enumerate() {
        let r1 = p1.residual(z)?;
        let r2 = p2.residual(z)?;
        if r1 > EPS_FIX || r2 > EPS_FIX {
            return Err(Error::Precondition(format!(
                "claimed intersection point {k} is not fixed by both maps ({r1:e}, {r2:e})"
            )));
        }
    }
    let composite = crate::maps::compose(vec![p1.clone(), p2.clone()], witness)?;

    for (k, z) in intersection_samples.iter().enumerate() {
        let r = composite.residual(z)?;
        report.add_trial();
        report.require_close(|| format!("intersection point {k} fixed by the composite"), r, 0.0, 1e-10);
    }
    for (k, start) in probe_starts.iter().enumerate() {
        let z = fixed_point_near(&composite, start)?;
        let in_first = p1.fixed_set_contains(&z, 1e-6)?;
        let in_second = p2.fixed_set_contains(&z, 1e-6)?;
        report.add_trial();
        report.require(
            || format!("composite-fixed point from start {k} passes both oracles"),
            in_first && in_second,
        );
    }
    for (k, x) in one_sided_samples.iter().enumerate() {
        let oracle = composite.fixed_set_contains(x, EPS_FIX)?;
        let moved = composite.residual(x)? > EPS_FIX;
        report.add_trial();
        report.require(
            || format!("one-sided point {k} is moved and fails the oracle"),
            !oracle && moved,
        );
    }
    Ok(report)
}

/// Convex combinations of fixed points stay fixed.
pub fn check_fixed_set_convexity(map: &ParaMap, probes: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = seeded_rng(seed);
    let mut report = CheckReport::new("fixed_set_convexity");
    for k in 0..probes {
        let s1 = vector_in_box(&mut rng, map.witness(), SAMPLE_RADIUS);
        let s2 = vector_in_box(&mut rng, map.witness(), SAMPLE_RADIUS);
        let x1 = fixed_point_near(map, &s1)?;
        let x2 = fixed_point_near(map, &s2)?;
        let alpha: f64 = rng.gen_range(0.0..=1.0);
        let ok = crate::maps::fixed_set_closed_convex_probe(map, &x1, &x2, alpha)?;
        report.add_trial();
        report.require(|| format!("probe {k} with alpha = {alpha}"), ok);
    }
    Ok(report)
}

/// For a linear map, quasi-nonexpansive and nonexpansive stand or fall
/// together, and so do "paracontraction" and "strict norm decrease off the
/// fixed set". The check verifies linearity first, then asserts both
/// equivalences as observed on samples.
pub fn check_linear_qne_iff_ne(map: &ParaMap, samples: usize, seed: u64) -> Result<CheckReport> {
    let n = map.dim();
    let mut rng = seeded_rng(seed);
    let zero = DVector::zeros(n);

    // Linearity probe: additivity and homogeneity on random inputs.
    for _ in 0..20 {
        let x = vector_in_box(&mut rng, &zero, SAMPLE_RADIUS);
        let y = vector_in_box(&mut rng, &zero, SAMPLE_RADIUS);
        let lam: f64 = rng.gen_range(-3.0..3.0);
        let fx = map.eval(&x)?;
        let fy = map.eval(&y)?;
        let scale = fx.amax().max(fy.amax()).max(1.0);
        let additive = (map.eval(&(&x + &y))? - &fx - &fy).amax();
        let homogeneous = (map.eval(&(&x * lam))? - &fx * lam).amax();
        if additive > 1e-10 * scale || homogeneous > 1e-10 * scale.max(lam.abs()) {
            return Err(Error::Precondition(format!(
                "map is not linear (additivity deviation {additive:e}, homogeneity {homogeneous:e})"
            )));
        }
    }

    // Assemble the matrix and a basis of its fixed subspace null(A - I).
    let cols: Vec<DVector<f64>> = (0..n)
        .map(|j| {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            map.eval(&e)
        })
        .collect::<Result<Vec<_>>>()?;
    let a = DMatrix::from_columns(&cols);
    let shifted = &a - DMatrix::identity(n, n);
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let fixed_basis: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= crate::RANK_TOL)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    let sample_fixed = |rng: &mut rand_chacha::ChaCha8Rng| -> DVector<f64> {
        let mut y = DVector::zeros(n);
        for b in &fixed_basis {
            y += b * rng.gen_range(-SAMPLE_RADIUS..SAMPLE_RADIUS);
        }
        y
    };

    let mut ne_ok = true;
    let mut qne_ok = true;
    let mut pc_vs_fixed_ok = true;
    let mut pc_plain_ok = true;
    for _ in 0..samples {
        let z = vector_in_box(&mut rng, &zero, SAMPLE_RADIUS);
        let az = &a * &z;
        if az.norm() > z.norm() + le_slack(z.norm()) {
            ne_ok = false;
        }
        let x = vector_in_box(&mut rng, &zero, SAMPLE_RADIUS);
        let y = sample_fixed(&mut rng);
        let lhs = (&a * &x - &y).norm();
        let rhs = (&x - &y).norm();
        if lhs > rhs + le_slack(rhs) {
            qne_ok = false;
        }
        let moved = (&a * &x - &x).norm() > EPS_FIX;
        if moved {
            if lhs >= rhs - EPS_STRICT {
                pc_vs_fixed_ok = false;
            }
            if (&a * &x).norm() >= x.norm() - EPS_STRICT {
                pc_plain_ok = false;
            }
        }
    }
    let mut report = CheckReport::new("linear_qne_iff_ne");
    report.add_trials(samples);
    report.require(
        || format!("quasi-nonexpansive ({qne_ok}) iff nonexpansive ({ne_ok})"),
        qne_ok == ne_ok,
    );
    report.require(
        || {
            format!(
                "paracontraction vs fixed points ({pc_vs_fixed_ok}) iff strict norm decrease ({pc_plain_ok})"
            )
        },
        pc_vs_fixed_ok == pc_plain_ok,
    );
    report.note(format!(
        "observed: nonexpansive = {ne_ok}, quasi-nonexpansive = {qne_ok}, paracontraction = {pc_vs_fixed_ok}, fixed subspace dimension = {}",
        fixed_basis.len()
    ));
    Ok(report)
}

/// Blockwise maps that each contract in the 2-norm make the stacked map
/// contract strictly in the (2, 2) norm off its fixed set.
pub fn check_stack_pc_22(maps: &[ParaMap], samples: usize, seed: u64) -> Result<CheckReport> {
    let m = maps.len();
    let n = maps.first().map(|m| m.dim()).unwrap_or(0);
    let mut rng = seeded_rng(seed);
    let spec = MixedNorm::two_two();
    let mut report = CheckReport::new("stack_pc_22");
    let mut skipped = 0usize;
    for k in 0..samples {
        let y_blocks: Vec<DVector<f64>> = maps
            .iter()
            .map(|map| {
                let s = vector_in_box(&mut rng, map.witness(), SAMPLE_RADIUS);
                fixed_point_near(map, &s)
            })
            .collect::<Result<Vec<_>>>()?;
        let y = Stacked::new(y_blocks)?;
        let x = stacked_in_box(&mut rng, m, &DVector::zeros(n), SAMPLE_RADIUS)?;
        let image = apply_maps(&x, maps)?;
        if mixed_norm(&(&image - &x), spec)? <= EPS_FIX {
            skipped += 1;
            continue;
        }
        let lhs = mixed_norm(&(&image - &y), spec)?;
        let rhs = mixed_norm(&(&x - &y), spec)?;
        report.add_trial();
        report.require_strict(|| format!("sample {k}"), lhs, rhs);
    }
    if skipped > 0 {
        report.note(format!("{skipped} samples were already fixed and skipped"));
    }
    Ok(report)
}

/// The stacked map never increases the (p, inf) norm distance to its fixed
/// set — but in general cannot decrease it strictly: a block that is
/// already fixed and dominates the maximum is carried through unchanged.
/// The second part reproduces that equality on an explicit two-agent
/// instance.
pub fn check_stack_qne_pinf(
    maps: &[ParaMap],
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let m = maps.len();
    let n = maps.first().map(|m| m.dim()).unwrap_or(0);
    let mut rng = seeded_rng(seed);
    let spec = MixedNorm::p_inf(p)?;
    let mut report = CheckReport::new("stack_qne_pinf");
    for k in 0..samples {
        let y_blocks: Vec<DVector<f64>> = maps
            .iter()
            .map(|map| {
                let s = vector_in_box(&mut rng, map.witness(), SAMPLE_RADIUS);
                fixed_point_near(map, &s)
            })
            .collect::<Result<Vec<_>>>()?;
        let y = Stacked::new(y_blocks)?;
        let x = stacked_in_box(&mut rng, m, &DVector::zeros(n), SAMPLE_RADIUS)?;
        let image = apply_maps(&x, maps)?;
        let lhs = mixed_norm(&(&image - &y), spec)?;
        let rhs = mixed_norm(&(&x - &y), spec)?;
        report.add_trial();
        report.require_le(|| format!("sample {k}"), lhs, rhs, le_slack(rhs));
    }
    stack_equality_witness(p, &mut report)?;
    Ok(report)
}

/// The non-strictness witness: two halfspace projectors, the first block
/// moved but dominated, the second block fixed and dominating. The (p, inf)
/// distance is exactly preserved.
fn stack_equality_witness(p: f64, report: &mut CheckReport) -> Result<()> {
    let near = ParaMap::projector(ConvexSet::halfspace(
        DVector::from_row_slice(&[1.0, 0.0]),
        1.0,
    )?);
    let far = ParaMap::projector(ConvexSet::halfspace(
        DVector::from_row_slice(&[1.0, 0.0]),
        5.0,
    )?);
    let maps = [near, far];
    // Block 0 violates its wall by 1; block 1 sits strictly inside its own,
    // farther from the common reference than block 0 ever is.
    let x = Stacked::new(vec![
        DVector::from_row_slice(&[2.0, 0.0]),
        DVector::from_row_slice(&[0.0, 3.0]),
    ])?;
    let y = Stacked::uniform(2, DVector::zeros(2))?;
    report.add_trial();
    report.require(
        || "equality witness: the first block is genuinely moved".into(),
        maps[0].residual(x.block(0))? > EPS_FIX,
    );
    let image = apply_maps(&x, &maps)?;
    let spec = MixedNorm::p_inf(p)?;
    let lhs = mixed_norm(&(&image - &y), spec)?;
    let rhs = mixed_norm(&(&x - &y), spec)?;
    report.require_close(
        || format!("equality witness at p = {p}: fixed dominating block preserves the norm"),
        lhs,
        rhs,
        1e-12,
    );
    Ok(())
}

/// Doubly stochastic matrices with positive diagonals shrink the 2-norm of
/// every vector they actually move.
pub fn check_double_stochastic_pc(
    count: usize,
    m_max: usize,
    samples_per: usize,
    seed: u64,
) -> Result<CheckReport> {
    let mut rng = seeded_rng(seed);
    let mut report = CheckReport::new("double_stochastic_pc");
    let mut skipped = 0usize;
    for c in 0..count {
        let m = rng.gen_range(2..=m_max);
        let s = crate::sampling::random_doubly_stochastic(&mut rng, m)?;
        for k in 0..samples_per {
            let v = vector_in_box(&mut rng, &DVector::zeros(m), SAMPLE_RADIUS);
            let sv = s.apply(&v)?;
            if (&sv - &v).norm() <= EPS_FIX {
                skipped += 1;
                continue;
            }
            report.add_trial();
            report.require_strict(|| format!("matrix {c}, sample {k}"), sv.norm(), v.norm());
        }
    }
    if skipped > 0 {
        report.note(format!("{skipped} samples were already fixed and skipped"));
    }
    Ok(report)
}

/// The mixing step of a doubly stochastic matrix with positive diagonal
/// shrinks the (2, 2) norm strictly, both toward zero and toward any
/// consensus vector.
pub fn check_mix_pc_22(count: usize, samples_per: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = seeded_rng(seed);
    let spec = MixedNorm::two_two();
    let mut report = CheckReport::new("mix_pc_22");
    let mut skipped = 0usize;
    for c in 0..count {
        let m = rng.gen_range(2..=5);
        let n = rng.gen_range(1..=3);
        let s = crate::sampling::random_doubly_stochastic(&mut rng, m)?;
        for k in 0..samples_per {
            let x = stacked_in_box(&mut rng, m, &DVector::zeros(n), SAMPLE_RADIUS)?;
            let sx = s.apply_kron(&x)?;
            if mixed_norm(&(&sx - &x), spec)? <= EPS_FIX {
                skipped += 1;
                continue;
            }
            report.add_trial();
            report.require_strict(
                || format!("matrix {c}, sample {k}, plain"),
                mixed_norm(&sx, spec)?,
                mixed_norm(&x, spec)?,
            );
            let y = Stacked::uniform(m, vector_in_box(&mut rng, &DVector::zeros(n), SAMPLE_RADIUS))?;
            report.require_strict(
                || format!("matrix {c}, sample {k}, consensus-shifted"),
                mixed_norm(&(&sx - &y), spec)?,
                mixed_norm(&(&x - &y), spec)?,
            );
        }
    }
    if skipped > 0 {
        report.note(format!("{skipped} samples were already fixed and skipped"));
    }
    Ok(report)
}

/// Any stochastic mixing step is quasi-nonexpansive in every (p, inf)
/// norm: each output block is a convex combination of input blocks.
/// Exercised on averaging matrices, positive matrices, and permutations
/// (which preserve the norm exactly).
pub fn check_mix_qne_pinf(count: usize, samples_per: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = seeded_rng(seed);
    let mut report = CheckReport::new("mix_qne_pinf");
    for &p in &[1.5, 2.0, 3.0] {
        let spec = MixedNorm::p_inf(p)?;
        for c in 0..count {
            let m = rng.gen_range(2..=5);
            let n = rng.gen_range(1..=3);
            let s = match c % 3 {
                0 => {
                    let g = crate::sampling::random_neighbor_graph(&mut rng, m, 0.5)?;
                    crate::sampling::random_stochastic_for_graph(&mut rng, &g)?
                }
                1 => crate::sampling::random_positive_stochastic(&mut rng, m)?,
                _ => {
                    // Cyclic permutation: stochastic, norm-preserving.
                    let mut e = DMatrix::zeros(m, m);
                    for i in 0..m {
                        e[(i, (i + 1) % m)] = 1.0;
                    }
                    StochasticMatrix::from_entries(e)?
                }
            };
            for k in 0..samples_per {
                let x = stacked_in_box(&mut rng, m, &DVector::zeros(n), SAMPLE_RADIUS)?;
                let sx = s.apply_kron(&x)?;
                let rhs = mixed_norm(&x, spec)?;
                report.add_trial();
                report.require_le(
                    || format!("p = {p}, matrix {c}, sample {k}, plain"),
                    mixed_norm(&sx, spec)?,
                    rhs,
                    le_slack(rhs),
                );
                let y =
                    Stacked::uniform(m, vector_in_box(&mut rng, &DVector::zeros(n), SAMPLE_RADIUS))?;
                let rhs_shift = mixed_norm(&(&x - &y), spec)?;
                report.require_le(
                    || format!("p = {p}, matrix {c}, sample {k}, consensus-shifted"),
                    mixed_norm(&(&sx - &y), spec)?,
                    rhs_shift,
                    le_slack(rhs_shift),
                );
            }
        }
    }
    Ok(report)
}

/// An entrywise positive stochastic mixing step contracts the (p, inf)
/// norm strictly off the consensus set, for every finite p > 1.
pub fn check_mix_pc_pinf(count: usize, samples_per: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = seeded_rng(seed);
    let mut report = CheckReport::new("mix_pc_pinf");
    let mut skipped = 0usize;
    for &p in &[1.5, 2.0, 3.0] {
        let spec = MixedNorm::p_inf(p)?;
        for c in 0..count {
            let m = rng.gen_range(2..=5);
            let n = rng.gen_range(1..=3);
            let s = crate::sampling::random_positive_stochastic(&mut rng, m)?;
            for k in 0..samples_per {
                let x = stacked_in_box(&mut rng, m, &DVector::zeros(n), SAMPLE_RADIUS)?;
                if disagreement(&x, p)? <= EPS_FIX {
                    skipped += 1;
                    continue;
                }
                let sx = s.apply_kron(&x)?;
                report.add_trial();
                report.require_strict(
                    || format!("p = {p}, matrix {c}, sample {k}, plain"),
                    mixed_norm(&sx, spec)?,
                    mixed_norm(&x, spec)?,
                );
                let y =
                    Stacked::uniform(m, vector_in_box(&mut rng, &DVector::zeros(n), SAMPLE_RADIUS))?;
                report.require_strict(
                    || format!("p = {p}, matrix {c}, sample {k}, consensus-shifted"),
                    mixed_norm(&(&sx - &y), spec)?,
                    mixed_norm(&(&x - &y), spec)?,
                );
            }
        }
    }
    if skipped > 0 {
        report.note(format!("{skipped} consensus samples were skipped"));
    }
    Ok(report)
}

/// Positivity is necessary: a stochastic matrix with a zero entry — even
/// one whose mixing step fixes only consensus vectors — preserves the
/// (p, inf) norm of a specific non-consensus vector exactly. The witness
/// puts the unit block everywhere except the column the zero row ignores.
pub fn check_positivity_necessity(extra_random: usize, seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::new("positivity_necessity");
    let mut matrices = vec![crate::verify::fixtures::dyadic_zero_entry_matrix()];
    let mut rng = seeded_rng(seed);
    let mut failed_draws = 0usize;
    for _ in 0..extra_random {
        let m = rng.gen_range(3..=4);
        match crate::verify::fixtures::random_dyadic_zero_entry(&mut rng, m) {
            Some(s) => matrices.push(s),
            None => failed_draws += 1,
        }
    }
    for (idx, s) in matrices.iter().enumerate() {
        let m = s.m();
        let zero_at = (0..m)
            .flat_map(|i| (0..m).map(move |k| (i, k)))
            .find(|&(i, k)| i != k && s.entry(i, k) == 0.0)
            .expect("fixture matrices carry an off-diagonal zero");
        let (_, k) = zero_at;
        // Unit block along the first axis: exact norm 1 in every p-norm.
        let n = 2;
        let mut z = DVector::zeros(n);
        z[0] = 1.0;
        let blocks: Vec<DVector<f64>> = (0..m)
            .map(|j| if j == k { DVector::zeros(n) } else { z.clone() })
            .collect();
        let x = Stacked::new(blocks)?;
        for &p in &[1.5, 2.0, 3.0] {
            let spec = MixedNorm::p_inf(p)?;
            report.add_trial();
            report.require(
                || format!("matrix {idx}: the witness is not a consensus vector"),
                disagreement(&x, p)? > EPS_FIX,
            );
            let lhs = mixed_norm(&(s.apply_kron(&x)?), spec)?;
            let rhs = mixed_norm(&x, spec)?;
            report.require_close(
                || format!("matrix {idx}, p = {p}: zero entry forces exact norm preservation"),
                lhs,
                rhs,
                1e-15,
            );
        }
    }
    if failed_draws > 0 {
        report.note(format!(
            "{failed_draws} random draws lacked the consensus fixed-set property and were skipped"
        ));
    }
    report.note(format!("verified on {} matrices", matrices.len()));
    Ok(report)
}

/// Along a map-then-mix window, the block distances to a common fixed
/// point are dominated by the transition-product combinations of earlier
/// distances, for every pair of times in the window.
pub fn check_v_inequality(vs: &VSequence) -> Result<CheckReport> {
    let mut report = CheckReport::new("v_inequality");
    let deviation = vs.recompute_deviation()?;
    report.add_trial();
    report.require_le(
        || "stored sequence matches its per-agent recursion".into(),
        deviation,
        1e-12,
        0.0,
    );
    let q = vs.q();
    let m = vs.m();
    let mut dist = vec![vec![0.0f64; m]; q + 1];
    for (t, row) in dist.iter_mut().enumerate() {
        for (i, d) in row.iter_mut().enumerate() {
            *d = vs.block_distance(i, t)?;
        }
    }
    for tau in 0..=q {
        for t in tau..=q {
            let phi = vs.phi(t, tau)?;
            for i in 0..m {
                let rhs: f64 = (0..m).map(|j| phi.entry(i, j) * dist[tau][j]).sum();
                report.add_trial();
                report.require_le(
                    || format!("agent {i}, tau = {tau}, t = {t}"),
                    dist[t][i],
                    rhs,
                    1e-10,
                );
            }
        }
    }
    Ok(report)
}

/// The two sharper statements about the end of a window: if any block that
/// influences agent i was genuinely moved, the bound is strict; if every
/// influencing block was fixed, the end state is the exact
/// transition-product combination of the starts.
pub fn check_phi_strictness(vs: &VSequence) -> Result<CheckReport> {
    let mut report = CheckReport::new("phi_strictness");
    let q = vs.q();
    let m = vs.m();
    let order = NormOrder::finite(vs.p())?;
    // Residual of each block at each time before the last stage.
    let mut res = vec![vec![0.0f64; m]; q];
    for (t, row) in res.iter_mut().enumerate() {
        for (j, r) in row.iter_mut().enumerate() {
            let block = vs.v(t).block(j);
            *r = p_norm(&(vs.maps()[j].eval(block)? - block), order)?;
        }
    }
    let phi_q0 = vs.phi(q, 0)?;
    let dist0: Vec<f64> = (0..m)
        .map(|j| vs.block_distance(j, 0))
        .collect::<Result<Vec<_>>>()?;
    let mut ambiguous = 0usize;
    for i in 0..m {
        let mut strict_hyp = false;
        let mut identity_hyp = true;
        for t in 0..q {
            let phi_qt = vs.phi(q, t)?;
            for j in 0..m {
                if phi_qt.entry(i, j) > 0.0 {
                    if res[t][j] > EPS_FIX {
                        strict_hyp = true;
                    }
                    if res[t][j] > 1e-13 {
                        identity_hyp = false;
                    }
                }
            }
        }
        let lhs = vs.block_distance(i, q)?;
        let rhs: f64 = (0..m).map(|j| phi_q0.entry(i, j) * dist0[j]).sum();
        report.add_trial();
        report.require_le(|| format!("agent {i}: base bound"), lhs, rhs, 1e-10);
        if strict_hyp {
            report.require_strict(
                || format!("agent {i}: an influencing block moved, so the bound is strict"),
                lhs,
                rhs,
            );
        } else if identity_hyp {
            let mut acc = DVector::zeros(vs.n());
            for j in 0..m {
                let w = phi_q0.entry(i, j);
                if w != 0.0 {
                    acc += vs.v(0).block(j) * w;
                }
            }
            let dev = (&acc - vs.v(q).block(i)).amax();
            report.require_close(
                || format!("agent {i}: all influencing blocks fixed, so the end state is the linear mix"),
                dev,
                0.0,
                1e-10,
            );
        } else {
            ambiguous += 1;
        }
    }
    if ambiguous > 0 {
        report.note(format!(
            "{ambiguous} agents had borderline residuals and asserted only the base bound"
        ));
    }
    Ok(report)
}

/// When the product of the stage matrices is entrywise positive and the
/// maps share a fixed point, the staged update is a strict (p, inf)
/// contraction toward stacked common fixed points, and its fixed points
/// are exactly the consensus common fixed points.
pub fn check_composed_map_pc(
    maps: &[ParaMap],
    stages: &[StochasticMatrix],
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    if stages.is_empty() {
        return Err(Error::InvalidInput("need at least one stage".into()));
    }
    let product = phi_product(stages, 0, stages.len())?;
    if !product.is_positive() {
        return Err(Error::Precondition(
            "the product of the stage matrices must be entrywise positive".into(),
        ));
    }
    let mut report = CheckReport::new("composed_map_pc");
    composed_fixed_set_asserts(&mut report, maps, stages, p, samples, seed, true)?;
    Ok(report)
}

/// The weaker hypothesis: if the stage product merely has a strongly
/// connected graph, the staged update's fixed points are still exactly the
/// consensus common fixed points (no contraction claim).
pub fn check_composite_fixed_set(
    maps: &[ParaMap],
    stages: &[StochasticMatrix],
    p: f64,
    starts: usize,
    seed: u64,
) -> Result<CheckReport> {
    if stages.is_empty() {
        return Err(Error::InvalidInput("need at least one stage".into()));
    }
    let product = phi_product(stages, 0, stages.len())?;
    if !product.graph().is_strongly_connected() {
        return Err(Error::Precondition(
            "the product of the stage matrices must have a strongly connected graph".into(),
        ));
    }
    let mut report = CheckReport::new("composite_fixed_set");
    composed_fixed_set_asserts(&mut report, maps, stages, p, starts, seed, false)?;
    Ok(report)
}

/// Shared body: consensus witnesses are fixed; located fixed points are
/// consensus vectors fixed by every map; optionally, strict contraction on
/// non-fixed samples.
fn composed_fixed_set_asserts(
    report: &mut CheckReport,
    maps: &[ParaMap],
    stages: &[StochasticMatrix],
    p: f64,
    samples: usize,
    seed: u64,
    assert_strict: bool,
) -> Result<()> {
    let m = maps.len();
    let witness = common_witness(maps)?;
    let spec = MixedNorm::p_inf(p)?;
    let y_stack = Stacked::uniform(m, witness.clone())?;

    // Forward inclusion at the witness.
    let ty = staged_update(maps, stages, &y_stack)?;
    report.add_trial();
    report.require_close(
        || "stacked common fixed point is fixed by the staged update".into(),
        mixed_norm(&(&ty - &y_stack), spec)?,
        0.0,
        1e-12,
    );

    let mut rng = seeded_rng(seed);
    let order = NormOrder::finite(p)?;
    if assert_strict {
        let mut skipped = 0usize;
        for k in 0..samples {
            let x = stacked_in_box(&mut rng, m, &witness, SAMPLE_RADIUS)?;
            let tx = staged_update(maps, stages, &x)?;
            if mixed_norm(&(&tx - &x), spec)? <= EPS_FIX {
                skipped += 1;
                continue;
            }
            report.add_trial();
            report.require_strict(
                || format!("sample {k}: strict contraction toward the witness"),
                mixed_norm(&(&tx - &y_stack), spec)?,
                mixed_norm(&(&x - &y_stack), spec)?,
            );
        }
        if skipped > 0 {
            report.note(format!("{skipped} samples were already fixed and skipped"));
        }
    }

    // Reverse inclusion: located fixed points are consensus vectors fixed
    // by every map.
    let probes = if assert_strict { (samples / 50).max(3) } else { samples.max(1) };
    for k in 0..probes {
        let start = stacked_in_box(&mut rng, m, &witness, SAMPLE_RADIUS)?;
        let fixed = damped_staged_fixed_point(maps, stages, &start, p)?;
        report.add_trial();
        report.require_le(
            || format!("located fixed point {k}: blocks agree"),
            disagreement(&fixed, p)?,
            1e-7,
            0.0,
        );
        let block = fixed.block(0);
        for (i, map) in maps.iter().enumerate() {
            let r = p_norm(&(map.eval(block)? - block), order)?;
            report.require_le(
                || format!("located fixed point {k} is fixed by map {i}"),
                r,
                1e-7,
                0.0,
            );
        }
    }
    Ok(())
}

/// The one-way stalling construction: a rooted (but not strongly
/// connected) constant graph with two projectors whose sets intersect. The
/// isolated agent starts off the second set, never moves — bit for bit —
/// and keeps its distance bounded away from that set, so the run cannot
/// converge. Starting inside the intersection, or adding the reverse arc,
/// restores convergence.
pub fn check_counterexample() -> Result<CheckReport> {
    let mut report = CheckReport::new("counterexample");
    let (c1, c2) = band_sets();

    let trace = run(&stall_scenario(StallVariant::Frozen)?)?;
    report.add_trial();
    report.require(|| "one-way run must not converge".into(), !trace.converged());
    let first = trace.step(1).expect("trace non-empty").x.block(0).clone();
    let delta0 = c2.distance(&first)? * (1.0 - 1e-9);
    report.note(format!("stall bound delta0 = {delta0}"));
    for step in trace.steps() {
        let x0 = step.x.block(0);
        report.add_trial();
        report.require_close(
            || format!("agent 0 unchanged at t = {}", step.t),
            (x0 - &first).amax(),
            0.0,
            1e-12,
        );
        report.require_le(
            || format!("agent 0 at least delta0 from the second set at t = {}", step.t),
            delta0,
            c2.distance(x0)?,
            0.0,
        );
    }
    let bit_exact = trace.steps().iter().all(|s| s.x.block(0) == &first);
    report.add_trial();
    report.require(|| "agent 0 is frozen bit for bit".into(), bit_exact);

    let control = run(&stall_scenario(StallVariant::StartInside)?)?;
    report.add_trial();
    report.require(
        || "starting inside the intersection converges".into(),
        control.converged(),
    );

    let two_way = run(&stall_scenario(StallVariant::TwoWay)?)?;
    report.add_trial();
    report.require(
        || "the strongly connected variant converges from the stalled start".into(),
        two_way.converged(),
    );
    if two_way.converged() {
        let fin = two_way.final_state();
        for i in 0..fin.m() {
            report.add_trial();
            report.require(
                || format!("agent {i} finishes in both sets"),
                c1.contains(fin.block(i), 1e-6) && c2.contains(fin.block(i), 1e-6),
            );
        }
    }
    Ok(report)
}

/// The distance chain on a convergent run: mixing never increases the
/// (p, inf) distance to a consensus common fixed point, mapping never
/// increases it either, the averaged states sampled at window boundaries
/// have non-increasing distances, and the whole tail after each boundary
/// stays within that boundary's distance.
pub fn check_subsequence_convergence(
    scenario: &Scenario,
    l: usize,
    rho0: usize,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("subsequence_convergence");
    let witness = scenario
        .witness
        .clone()
        .ok_or_else(|| Error::Precondition("the scenario needs a fixed-point witness".into()))?;
    let trace = run(scenario)?;
    report.add_trial();
    report.require(|| "scenario converges within the horizon".into(), trace.converged());
    let p = scenario.p;
    let spec = MixedNorm::p_inf(p)?;
    let m = scenario.m();
    let y = Stacked::uniform(m, witness)?;

    let d: Vec<f64> = trace
        .steps()
        .iter()
        .map(|s| mixed_norm(&(&s.x - &y), spec))
        .collect::<Result<Vec<_>>>()?;
    let dbar: Vec<f64> = trace
        .steps()
        .iter()
        .map(|s| mixed_norm(&(&s.xbar - &y), spec))
        .collect::<Result<Vec<_>>>()?;
    for idx in 0..d.len() {
        let t = (idx + 1) as u64;
        report.add_trial();
        report.require_le(
            || format!("mixing does not increase the distance at t = {t}"),
            dbar[idx],
            d[idx],
            1e-12,
        );
        if idx + 1 < d.len() {
            report.require_le(
                || format!("mapping does not increase the distance into t = {}", t + 1),
                d[idx + 1],
                dbar[idx],
                1e-12,
            );
        }
    }

    let q = m - 1;
    let zs = extract_z_subsequence(&trace, l, rho0, q)?;
    let zdist: Vec<f64> = zs
        .iter()
        .map(|z| mixed_norm(&(z - &y), spec))
        .collect::<Result<Vec<_>>>()?;
    for k in 0..zdist.len().saturating_sub(1) {
        report.add_trial();
        report.require_le(
            || format!("window-boundary distances non-increasing at k = {}", k + 2),
            zdist[k + 1],
            zdist[k],
            1e-12,
        );
    }
    // Suffix maxima: suffix_max[idx] = max over steps with t >= idx + 1.
    let mut suffix_max = vec![0.0f64; d.len() + 1];
    for idx in (0..d.len()).rev() {
        suffix_max[idx] = d[idx].max(suffix_max[idx + 1]);
    }
    for (k, zd) in zdist.iter().enumerate() {
        let rho = (k + 1) * q * l + rho0 - 1;
        if rho < d.len() {
            report.add_trial();
            report.require_le(
                || format!("tail after the boundary at t = {rho} stays within its distance"),
                suffix_max[rho],
                *zd,
                1e-12,
            );
        }
    }
    report.note(format!(
        "trace length {}, {} window boundaries checked",
        trace.len(),
        zdist.len()
    ));
    Ok(report)
}
