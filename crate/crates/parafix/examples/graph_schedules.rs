//! Directed graphs, composition, schedules, and window certification.
//!
//! Convergence needs the communication pattern to recover strong
//! connectivity over bounded windows: there must be a window length l and
//! offset rho0 such that every window of l consecutive graphs, composed
//! in time order, is strongly connected. This example builds a schedule
//! from single-arc stages — none strongly connected on its own — and
//! certifies the window property, then shows a rooted-but-not-strongly-
//! connected constant graph failing certification.

use parafix::graphs::{
    certify_rjsc, compose_graphs, search_rjsc, DirectedGraph, GraphSchedule, RjscOutcome,
};

fn main() -> parafix::Result<()> {
    // Three single-arc stages on three vertices, each with self-arcs:
    // 0 -> 1, then 1 -> 2, then 2 -> 0.
    let stages = vec![
        DirectedGraph::neighbor_graph(3, &[(0, 1)])?,
        DirectedGraph::neighbor_graph(3, &[(1, 2)])?,
        DirectedGraph::neighbor_graph(3, &[(2, 0)])?,
    ];
    for (i, g) in stages.iter().enumerate() {
        println!(
            "stage {i}: {} arcs, strongly connected: {}",
            g.arc_count(),
            g.is_strongly_connected()
        );
    }

    // Composition G1 then G2 has an arc i -> k wherever some j has
    // i -> j in G1 and j -> k in G2. Composing all three closes the cycle.
    let g12 = compose_graphs(&stages[0], &stages[1])?;
    let g123 = compose_graphs(&g12, &stages[2])?;
    println!(
        "composed window: {} arcs, strongly connected: {}",
        g123.arc_count(),
        g123.is_strongly_connected()
    );
    assert!(g123.is_strongly_connected());

    // The periodic schedule over those stages certifies at window length
    // 3 with offset 1 (the search tries shorter lengths first and they
    // all fail).
    let schedule = GraphSchedule::periodic(stages)?;
    let cert = search_rjsc(&schedule, 6, 4)?.expect("the cycle certifies");
    println!(
        "certified: window length {} offset {} ({} windows checked)",
        cert.l, cert.rho0, cert.windows_checked
    );
    assert_eq!((cert.l, cert.rho0), (3, 1));

    // A constant graph with only 0 -> 1 is rooted at 0 — information
    // reaches everyone — but never strongly connected, at any length.
    let rooted = GraphSchedule::constant(DirectedGraph::neighbor_graph(2, &[(0, 1)])?)?;
    assert!(search_rjsc(&rooted, 8, 3)?.is_none());
    match certify_rjsc(&rooted, 8, 1, 3)? {
        RjscOutcome::FailedWindow { k, start, end } => {
            println!("rooted one-way graph fails at window k = {k} (steps {start}..={end})");
        }
        RjscOutcome::Certified(_) => unreachable!("a one-way pair is never strongly connected"),
    }
    Ok(())
}
