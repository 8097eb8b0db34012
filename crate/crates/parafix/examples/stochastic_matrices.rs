//! Row-stochastic mixing: weight sets, block application, and products.
//!
//! Each step of the iteration averages neighbor blocks with a row-
//! stochastic matrix S supported on the step's graph, applied to the
//! stack as S (x) I without ever materializing the Kronecker product.
//! Windows multiply into transition products whose positivity is what
//! strictness arguments feed on. This example builds matrices three ways
//! (uniform from a graph, explicit exact weights, dyadic literals) and
//! inspects the products.

use nalgebra::DVector;
use parafix::graphs::DirectedGraph;
use parafix::matrices::{phi_product, StochasticMatrix, WeightMap};
use parafix::vectorspace::Stacked;

fn main() -> parafix::Result<()> {
    // Uniform averaging over in-neighbors: each row i weighs every
    // in-neighbor 1/|N_i|.
    let g = DirectedGraph::neighbor_graph(3, &[(0, 1), (1, 2), (2, 0)])?;
    let uniform = StochasticMatrix::from_graph(&g)?;
    println!("uniform rows:\n{}", uniform.matrix());

    // Explicit weights, given exactly. Every arc of the graph must carry
    // a weight and every row must sum to 1 in exact floating point —
    // 1/4 + 3/4 does, and the constructor enforces it.
    let mut weights = WeightMap::new();
    weights.insert((0, 0), 1.0);
    weights.insert((1, 0), 0.25);
    weights.insert((1, 1), 0.75);
    weights.insert((2, 1), 0.5);
    weights.insert((2, 2), 0.5);
    let explicit = StochasticMatrix::from_weights(
        &DirectedGraph::neighbor_graph(3, &[(0, 1), (1, 2)])?,
        &weights,
    )?;
    println!("explicit rows:\n{}", explicit.matrix());

    // Applying S (x) I to a stacked vector mixes whole blocks: block i
    // becomes sum_j S[i][j] * block j. Agent 0 keeps its block exactly.
    let x = Stacked::new(vec![
        DVector::from_row_slice(&[1.0, 0.0]),
        DVector::from_row_slice(&[0.0, 1.0]),
        DVector::from_row_slice(&[2.0, 2.0]),
    ])?;
    let mixed = explicit.apply_kron(&x)?;
    assert_eq!(mixed.block(0), x.block(0));
    assert_eq!(mixed.block(1), &(x.block(0) * 0.25 + x.block(1) * 0.75));
    println!("agent 1 after mixing: {}", mixed.block(1).transpose());

    // Transition products compose windows right-to-left in time order.
    // The support graph of the product is the composition of the stage
    // graphs, so positivity of the product certifies strict mixing.
    let stages = vec![uniform.clone(), uniform.clone(), uniform];
    let product = phi_product(&stages, 0, 3)?;
    println!(
        "3-stage cycle product: strongly connected = {}, entrywise positive = {}",
        product.graph().is_strongly_connected(),
        product.is_positive(),
    );
    assert!(product.is_positive());

    // Consensus vectors (all blocks equal) are fixed by every stochastic
    // mix — they are the common fixed points the agents are steering to.
    let consensus = Stacked::new(vec![DVector::from_row_slice(&[0.7, -0.2]); 3])?;
    let after = product.apply_kron(&consensus)?;
    for i in 0..3 {
        assert_eq!(after.block(i), consensus.block(i));
    }
    println!("consensus stacks are exactly fixed by every mixing product");
    Ok(())
}
