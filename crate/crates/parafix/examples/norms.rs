//! Mixed (p, q)-norms on stacked vectors.
//!
//! The convergence analysis lives in two norms at once: each agent's block
//! is measured in an ordinary p-norm, and the stack of m blocks is folded
//! with an outer q-norm. The outer order q = infinity (the worst block)
//! is the one the distance-to-witness metric uses; (2, 2) recovers the
//! flat Euclidean norm of the concatenation, which is where strict
//! stacking arguments happen.
//!
//! This example computes both folds by hand next to the library versions,
//! and shows the nesting inequality between them.

use nalgebra::DVector;
use parafix::vectorspace::{mixed_norm, p_norm, MixedNorm, NormOrder, Stacked};

fn main() -> parafix::Result<()> {
    // Two agents in R^2: a 3-4-5 block and a unit block.
    let x = Stacked::new(vec![
        DVector::from_row_slice(&[3.0, 4.0]),
        DVector::from_row_slice(&[1.0, 0.0]),
    ])?;

    // Block norms first: ||x_1||_2 = 5, ||x_2||_2 = 1.
    let order = NormOrder::finite(2.0)?;
    let block_norms: Vec<f64> =
        (0..x.m()).map(|i| p_norm(x.block(i), order)).collect::<parafix::Result<_>>()?;
    println!("block 2-norms: {block_norms:?}");

    // (2, 2): fold the block norms with an outer 2-norm. That is the
    // Euclidean norm of the flattened vector sqrt(25 + 1), up to the
    // last bit — the two folds power and scale in different orders.
    let two_two = mixed_norm(&x, MixedNorm::two_two())?;
    let flat = p_norm(&x.flatten(), order)?;
    println!("(2,2) mixed norm = {two_two}, flat 2-norm = {flat}");
    assert!((two_two - flat).abs() <= 1e-15 * flat);

    // (2, inf): the worst block. The p = 2 inner norm with an outer max.
    let two_inf = mixed_norm(&x, MixedNorm::p_inf(2.0)?)?;
    println!("(2,inf) mixed norm = {two_inf}");
    assert_eq!(two_inf, 5.0);

    // The outer max never exceeds the outer 2-fold, and the gap is at
    // most a factor sqrt(m).
    assert!(two_inf <= two_two && two_two <= (x.m() as f64).sqrt() * two_inf);

    // Inner orders p > 1 other than 2 fold the coordinates differently;
    // p = 1.5 and p = 3 bracket the Euclidean block norm on this block.
    for p in [1.5, 3.0] {
        let v = mixed_norm(&x, MixedNorm::p_inf(p)?)?;
        println!("({p},inf) mixed norm = {v}");
    }
    Ok(())
}
