//! Sampled property checks for single maps.
//!
//! The contraction claims are universally quantified, so they can only be
//! probed: the checkers take explicit sample sets, compare both sides of
//! each inequality, and report every failure with its margin. "Strict"
//! decrease is only trusted past the shared strictness slack; samples that
//! are already fixed (up to the fixed-point tolerance) are skipped, since
//! the strict inequality says nothing about them.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::report::CheckReport;
use crate::vectorspace::{p_norm, NormOrder};
use crate::EPS_FIX;

use super::ParaMap;

/// Relative slack for non-strict inequalities between computed norms.
const QNE_REL_TOL: f64 = 1e-12;

fn validate_fixed_side(map: &ParaMap, ys: &[DVector<f64>]) -> Result<()> {
    for (i, y) in ys.iter().enumerate() {
        if !map.is_fixed_point(y, EPS_FIX)? {
            return Err(Error::Precondition(format!(
                "fixed-side sample {i} is not a fixed point (residual {:e})",
                map.residual(y)?
            )));
        }
    }
    Ok(())
}

/// For every non-fixed sample x and fixed point y, require the strict
/// decrease ||M(x) - y|| < ||x - y|| in the given norm order.
pub fn check_paracontraction(
    map: &ParaMap,
    xs: &[DVector<f64>],
    ys: &[DVector<f64>],
    order: NormOrder,
) -> Result<CheckReport> {
    validate_fixed_side(map, ys)?;
    let mut report = CheckReport::new("paracontraction");
    for (xi, x) in xs.iter().enumerate() {
        if map.is_fixed_point(x, EPS_FIX)? {
            continue;
        }
        let image = map.eval(x)?;
        for (yi, y) in ys.iter().enumerate() {
            report.add_trial();
            let lhs = p_norm(&(&image - y), order)?;
            let rhs = p_norm(&(x - y), order)?;
            report.require_strict(|| format!("sample {xi} vs fixed point {yi}"), lhs, rhs);
        }
    }
    Ok(report)
}

/// For every sample x and fixed point y, require the non-strict
/// ||M(x) - y|| <= ||x - y|| in the given norm order.
pub fn check_quasi_nonexpansive(
    map: &ParaMap,
    xs: &[DVector<f64>],
    ys: &[DVector<f64>],
    order: NormOrder,
) -> Result<CheckReport> {
    validate_fixed_side(map, ys)?;
    let mut report = CheckReport::new("quasi_nonexpansive");
    for (xi, x) in xs.iter().enumerate() {
        let image = map.eval(x)?;
        for (yi, y) in ys.iter().enumerate() {
            report.add_trial();
            let lhs = p_norm(&(&image - y), order)?;
            let rhs = p_norm(&(x - y), order)?;
            report.require_le(
                || format!("sample {xi} vs fixed point {yi}"),
                lhs,
                rhs,
                QNE_REL_TOL * rhs.max(1.0),
            );
        }
    }
    Ok(report)
}

/// Probe convexity of the fixed set: given two fixed points, is their convex
/// combination fixed too?
pub fn fixed_set_closed_convex_probe(
    map: &ParaMap,
    x1: &DVector<f64>,
    x2: &DVector<f64>,
    alpha: f64,
) -> Result<bool> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Precondition(format!(
            "combination weight must lie in [0, 1], got {alpha}"
        )));
    }
    for (label, x) in [("first", x1), ("second", x2)] {
        if !map.is_fixed_point(x, EPS_FIX)? {
            return Err(Error::Precondition(format!("{label} probe point is not fixed")));
        }
    }
    let combo = x1 * alpha + x2 * (1.0 - alpha);
    map.is_fixed_point(&combo, EPS_FIX)
}

/// Largest observed ratio ||M(x) - M(y)|| / ||x - y|| over the sample pairs
/// — a continuity probe. Coincident pairs are skipped.
pub fn lipschitz_ratio(
    map: &ParaMap,
    pairs: &[(DVector<f64>, DVector<f64>)],
    order: NormOrder,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (x, y) in pairs {
        let denom = p_norm(&(x - y), order)?;
        if denom == 0.0 {
            continue;
        }
        let num = p_norm(&(map.eval(x)? - map.eval(y)?), order)?;
        worst = worst.max(num / denom);
    }
    Ok(worst)
}
