//! Why "rooted" is not enough: the frozen-agent counterexample.
//!
//! A rooted graph (one agent's information reaches everyone) might look
//! sufficient for consensus — every other agent eventually hears from the
//! root. It is not. With the constant graph 0 -> 1, agent 0 hears only
//! itself; if it starts at a fixed point of its own map that is not in
//! the common fixed set, it never moves, and agent 1 chases a point that
//! can never enter its own set. The run stalls forever at a positive
//! distance.
//!
//! Two repairs both restore convergence: start agent 0 inside the
//! intersection, or add the reverse arc (making the graph strongly
//! connected).

use parafix::engine::run;
use parafix::verify::fixtures::{band_sets, stall_scenario, StallVariant};

fn main() -> parafix::Result<()> {
    // Agent 0 projects onto { x_1 <= 1 }, agent 1 onto { x_1 >= -1 };
    // the common fixed set is the band -1 <= x_1 <= 1. Agent 0 starts at
    // (-3, 0.5): inside its own set, outside agent 1's.
    let (_, c2) = band_sets();
    let frozen = stall_scenario(StallVariant::Frozen)?;
    let trace = run(&frozen)?;
    assert!(!trace.converged());

    let x1 = trace.final_step().x.block(0);
    let gap = c2.distance(x1)?;
    println!(
        "one-way graph: stalled after {} steps; agent 0 still at ({}, {}), distance {} from \
         the other agent's set",
        trace.len(),
        x1[0],
        x1[1],
        gap
    );
    // The frozen block never moves: every recorded step shows the start.
    for step in trace.steps() {
        assert_eq!(step.x.block(0), x1);
    }
    assert!(gap >= 2.0 - 1e-12);

    // Repair 1: the same graph converges when agent 0 starts inside the
    // intersection — rootedness was never the obstacle for agent 1.
    let inside = run(&stall_scenario(StallVariant::StartInside)?)?;
    println!("same graph, start inside the band: converged = {}", inside.converged());
    assert!(inside.converged());

    // Repair 2: add the reverse arc. The graph becomes strongly
    // connected and the original stalling start now converges.
    let two_way = run(&stall_scenario(StallVariant::TwoWay)?)?;
    println!(
        "reverse arc added: converged = {} after {} steps",
        two_way.converged(),
        two_way.len()
    );
    assert!(two_way.converged());
    let limit = two_way.final_step();
    for i in 0..2 {
        let x = limit.x.block(i);
        assert!(x[0].abs() <= 1.0 + 1e-6, "limit must land in the band");
    }
    Ok(())
}
