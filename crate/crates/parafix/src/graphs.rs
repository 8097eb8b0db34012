//! Directed neighbor graphs, graph composition, and schedule certification.
//!
//! An arc (j, i) means "agent j is a neighbor of agent i": information flows
//! from j to i, and i averages over its in-neighbors. Every agent is always
//! its own neighbor, so graphs fed to a schedule carry all self-arcs.
//!
//! Composition chains arcs across time: (i, j) is an arc of
//! `compose_graphs(gp, gq)` exactly when some k has (i, k) in `gp` and
//! (k, j) in `gq` — first travel in `gp`, then in `gq`. A schedule is
//! certified by composing each length-`l` window in time order and checking
//! the result is strongly connected.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense directed graph on vertices `0..m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    m: usize,
    adj: Vec<bool>, // row-major: adj[from * m + to]
}

impl DirectedGraph {
    /// Graph with no arcs.
    pub fn empty(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("graph needs at least one vertex".into()));
        }
        Ok(DirectedGraph { m, adj: vec![false; m * m] })
    }

    /// Graph whose only arcs are the self-arcs.
    pub fn with_self_arcs(m: usize) -> Result<Self> {
        let mut g = DirectedGraph::empty(m)?;
        for i in 0..m {
            g.adj[i * m + i] = true;
        }
        Ok(g)
    }

    /// All m^2 arcs, self-arcs included.
    pub fn complete(m: usize) -> Result<Self> {
        let mut g = DirectedGraph::empty(m)?;
        g.adj.iter_mut().for_each(|a| *a = true);
        Ok(g)
    }

    /// Graph with exactly the given arcs.
    pub fn from_arcs(m: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut g = DirectedGraph::empty(m)?;
        for &(from, to) in arcs {
            g.add_arc(from, to)?;
        }
        Ok(g)
    }

    /// All self-arcs plus the given cross arcs — the usual way to build a
    /// neighbor graph.
    pub fn neighbor_graph(m: usize, cross_arcs: &[(usize, usize)]) -> Result<Self> {
        let mut g = DirectedGraph::with_self_arcs(m)?;
        for &(from, to) in cross_arcs {
            g.add_arc(from, to)?;
        }
        Ok(g)
    }

    pub fn add_arc(&mut self, from: usize, to: usize) -> Result<()> {
        if from >= self.m || to >= self.m {
            return Err(Error::InvalidInput(format!(
                "arc ({from}, {to}) out of range for {} vertices",
                self.m
            )));
        }
        self.adj[from * self.m + to] = true;
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        from < self.m && to < self.m && self.adj[from * self.m + to]
    }

    /// Arcs in row-major order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.m;
        self.adj
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(move |(idx, _)| (idx / m, idx % m))
    }

    pub fn arc_count(&self) -> usize {
        self.adj.iter().filter(|&&a| a).count()
    }

    pub fn has_all_self_arcs(&self) -> bool {
        (0..self.m).all(|i| self.adj[i * self.m + i])
    }

    /// In-neighbors of `i`: the agents whose estimates `i` averages,
    /// in ascending order.
    pub fn in_neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.m).filter(|&j| self.has_arc(j, i)).collect()
    }

    /// True when every ordered pair of distinct vertices is joined by a
    /// directed path.
    pub fn is_strongly_connected(&self) -> bool {
        self.strongly_connected_components().len() == 1
    }

    /// Kosaraju's two-pass algorithm; components are listed in reverse
    /// topological order of the condensation.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let m = self.m;
        // Pass 1: record vertices by DFS finish time (iterative, explicit stack).
        let mut finished = Vec::with_capacity(m);
        let mut seen = vec![false; m];
        for start in 0..m {
            if seen[start] {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            seen[start] = true;
            while let Some(&(v, next)) = stack.last() {
                if next == m {
                    finished.push(v);
                    stack.pop();
                    continue;
                }
                stack.last_mut().expect("stack non-empty").1 += 1;
                if self.adj[v * m + next] && !seen[next] {
                    seen[next] = true;
                    stack.push((next, 0));
                }
            }
        }
        // Pass 2: DFS on the transpose in reverse finish order.
        let mut comp = vec![usize::MAX; m];
        let mut components = Vec::new();
        for &root in finished.iter().rev() {
            if comp[root] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut members = vec![root];
            comp[root] = id;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for w in 0..m {
                    // Transposed arc: w -> v in the original graph.
                    if self.adj[w * m + v] && comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }

    /// True when all m^2 arcs are present.
    pub fn is_complete(&self) -> bool {
        self.adj.iter().all(|&a| a)
    }
}

/// Composition: (i, j) is an arc iff some k has (i, k) in `gp` and (k, j) in
/// `gq`. Order matters — `gp` is traversed first.
pub fn compose_graphs(gp: &DirectedGraph, gq: &DirectedGraph) -> Result<DirectedGraph> {
    if gp.m != gq.m {
        return Err(Error::DimensionMismatch(format!(
            "composing graphs on {} and {} vertices",
            gp.m, gq.m
        )));
    }
    let m = gp.m;
    let mut out = DirectedGraph::empty(m)?;
    for i in 0..m {
        for k in 0..m {
            if gp.adj[i * m + k] {
                for j in 0..m {
                    if gq.adj[k * m + j] {
                        out.adj[i * m + j] = true;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The graph of a nonnegative matrix: arc (i, j) present iff entry (j, i) is
/// strictly positive, so an arc means "column index influences row index".
pub fn graph_of_matrix(a: &DMatrix<f64>) -> Result<DirectedGraph> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "graph of a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    if let Some(bad) = a.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "graph of matrix requires finite nonnegative entries, got {bad}"
        )));
    }
    let m = a.nrows();
    let mut g = DirectedGraph::empty(m)?;
    for i in 0..m {
        for j in 0..m {
            if a[(j, i)] > 0.0 {
                g.adj[i * m + j] = true;
            }
        }
    }
    Ok(g)
}

/// How the neighbor graph varies over time. Steps are 1-indexed.
#[derive(Clone, Debug)]
enum ScheduleKind {
    Constant(DirectedGraph),
    PeriodicList(Vec<DirectedGraph>),
    SeededRandom { pool: Vec<DirectedGraph>, seed: u64 },
}

/// A time-indexed sequence of neighbor graphs, optionally truncated at a
/// final step (the horizon).
#[derive(Clone, Debug)]
pub struct GraphSchedule {
    kind: ScheduleKind,
    horizon: Option<u64>,
    m: usize,
}

fn validate_schedule_graphs(graphs: &[DirectedGraph]) -> Result<usize> {
    if graphs.is_empty() {
        return Err(Error::InvalidInput("schedule needs at least one graph".into()));
    }
    let m = graphs[0].m();
    for (idx, g) in graphs.iter().enumerate() {
        if g.m() != m {
            return Err(Error::DimensionMismatch(format!(
                "schedule graph {idx} has {} vertices, expected {m}",
                g.m()
            )));
        }
        if !g.has_all_self_arcs() {
            return Err(Error::Precondition(format!(
                "schedule graph {idx} is missing a self-arc; every agent is its own neighbor"
            )));
        }
    }
    Ok(m)
}

impl GraphSchedule {
    /// The same graph at every step.
    pub fn constant(g: DirectedGraph) -> Result<Self> {
        let m = validate_schedule_graphs(std::slice::from_ref(&g))?;
        Ok(GraphSchedule { kind: ScheduleKind::Constant(g), horizon: None, m })
    }

    /// Cycle through the list: step t uses graph (t - 1) mod len.
    pub fn periodic(graphs: Vec<DirectedGraph>) -> Result<Self> {
        let m = validate_schedule_graphs(&graphs)?;
        Ok(GraphSchedule { kind: ScheduleKind::PeriodicList(graphs), horizon: None, m })
    }

    /// Uniform draw from the pool at every step, derandomized by seed: the
    /// draw at step t depends only on (seed, t), so lookups are random-access
    /// and two schedules with the same seed agree step for step.
    pub fn seeded_random(pool: Vec<DirectedGraph>, seed: u64) -> Result<Self> {
        let m = validate_schedule_graphs(&pool)?;
        Ok(GraphSchedule { kind: ScheduleKind::SeededRandom { pool, seed }, horizon: None, m })
    }

    /// Truncate the schedule after step `horizon`.
    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn horizon(&self) -> Option<u64> {
        self.horizon
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Graph in force at step `t >= 1`.
    pub fn graph_at(&self, t: u64) -> Result<DirectedGraph> {
        if t == 0 {
            return Err(Error::InvalidInput("schedule steps are 1-indexed".into()));
        }
        if let Some(h) = self.horizon {
            if t > h {
                return Err(Error::ScheduleExhausted { t, horizon: h });
            }
        }
        Ok(match &self.kind {
            ScheduleKind::Constant(g) => g.clone(),
            ScheduleKind::PeriodicList(gs) => gs[((t - 1) % gs.len() as u64) as usize].clone(),
            ScheduleKind::SeededRandom { pool, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(t);
                pool[rng.gen_range(0..pool.len())].clone()
            }
        })
    }
}

/// Evidence that a schedule's length-`l` windows compose to strongly
/// connected graphs, checked for `windows_checked` consecutive windows
/// starting at step `rho0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RjscCertificate {
    pub l: usize,
    pub rho0: usize,
    pub windows_checked: usize,
}

/// Result of a certification attempt: either a certificate or the first
/// window whose composition fails to be strongly connected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RjscOutcome {
    Certified(RjscCertificate),
    FailedWindow { k: usize, start: u64, end: u64 },
}

/// Compose the schedule's k-th window (steps (k-1)l + rho0 ..= kl + rho0 - 1)
/// in time order and test strong connectivity, for k = 1..=k_max.
pub fn certify_rjsc(
    schedule: &GraphSchedule,
    l: usize,
    rho0: usize,
    k_max: usize,
) -> Result<RjscOutcome> {
    if l < 1 || rho0 < 1 || k_max < 1 {
        return Err(Error::Precondition(format!(
            "rjsc certification needs l >= 1, rho0 >= 1, k_max >= 1 (got l={l}, rho0={rho0}, k_max={k_max})"
        )));
    }
    for k in 1..=k_max {
        let start = ((k - 1) * l + rho0) as u64;
        let end = (k * l + rho0 - 1) as u64;
        let mut composed = schedule.graph_at(start)?;
        for t in (start + 1)..=end {
            composed = compose_graphs(&composed, &schedule.graph_at(t)?)?;
        }
        if !composed.is_strongly_connected() {
            return Ok(RjscOutcome::FailedWindow { k, start, end });
        }
    }
    Ok(RjscOutcome::Certified(RjscCertificate { l, rho0, windows_checked: k_max }))
}

/// Scan window lengths l = 1..=l_max and offsets rho0 = 1..=l for the first
/// pair that certifies over `k_max` windows. Returns `None` when every
/// checkable pair fails; errors only when no pair fits inside the schedule's
/// horizon at all.
pub fn search_rjsc(
    schedule: &GraphSchedule,
    l_max: usize,
    k_max: usize,
) -> Result<Option<RjscCertificate>> {
    if l_max < 1 {
        return Err(Error::Precondition("rjsc search needs l_max >= 1".into()));
    }
    let mut any_checked = false;
    let mut first_err = None;
    for l in 1..=l_max {
        for rho0 in 1..=l {
            match certify_rjsc(schedule, l, rho0, k_max) {
                Ok(RjscOutcome::Certified(cert)) => return Ok(Some(cert)),
                Ok(RjscOutcome::FailedWindow { .. }) => any_checked = true,
                Err(e @ Error::ScheduleExhausted { .. }) => {
                    if first_err.is_none() {
                        first_err = Some(e);
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    match (any_checked, first_err) {
        (false, Some(e)) => Err(e),
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_chains_arcs_in_time_order() {
        // Oracle by path enumeration: with 0 -> 1 first and 1 -> 2 second,
        // the only two-step path is 0 -> 2.
        let gp = DirectedGraph::from_arcs(3, &[(0, 1)]).unwrap();
        let gq = DirectedGraph::from_arcs(3, &[(1, 2)]).unwrap();
        let c = compose_graphs(&gp, &gq).unwrap();
        assert!(c.has_arc(0, 2));
        assert_eq!(c.arc_count(), 1);

        // Reversed order: no k links them, so the composition is empty.
        let c_rev = compose_graphs(&gq, &gp).unwrap();
        assert_eq!(c_rev.arc_count(), 0);
    }

    #[test]
    fn compose_with_self_arcs_keeps_both_arc_sets() {
        let gp = DirectedGraph::neighbor_graph(3, &[(0, 1)]).unwrap();
        let gq = DirectedGraph::neighbor_graph(3, &[(1, 2)]).unwrap();
        let c = compose_graphs(&gp, &gq).unwrap();
        for g in [&gp, &gq] {
            for (from, to) in g.arcs() {
                assert!(c.has_arc(from, to), "lost arc ({from}, {to})");
            }
        }
        // Plus the chained arc.
        assert!(c.has_arc(0, 2));
    }

    #[test]
    fn strongly_connected_cycle_and_broken_cycle() {
        let cycle = DirectedGraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(cycle.is_strongly_connected());

        // Remove the return arc: still rooted at 0, no longer strongly connected.
        let chain = DirectedGraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(!chain.is_strongly_connected());
        assert_eq!(chain.strongly_connected_components().len(), 4);
    }

    #[test]
    fn single_vertex_is_strongly_connected() {
        assert!(DirectedGraph::empty(1).unwrap().is_strongly_connected());
    }

    #[test]
    fn scc_groups_mutually_reachable_vertices() {
        // Two 2-cycles joined by a one-way arc.
        let g = DirectedGraph::from_arcs(4, &[(0, 1), (1, 0), (2, 3), (3, 2), (1, 2)]).unwrap();
        let mut comps = g.strongly_connected_components();
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn complete_graph_detection() {
        assert!(DirectedGraph::complete(3).unwrap().is_complete());
        let mut g = DirectedGraph::complete(3).unwrap();
        g.adj[1] = false; // drop arc (0, 1)
        assert!(!g.is_complete());
    }

    #[test]
    fn graph_of_matrix_transposes_influence() {
        // Entry (j, i) > 0 means i influences j, i.e. arc i -> j.
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.0, 1.0]);
        let g = graph_of_matrix(&a).unwrap();
        assert!(g.has_arc(0, 0));
        assert!(g.has_arc(1, 0)); // a[(0,1)] > 0: arc 1 -> 0
        assert!(!g.has_arc(0, 1)); // a[(1,0)] = 0
        assert!(g.has_arc(1, 1));
    }

    #[test]
    fn graph_of_matrix_rejects_negative_entries() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, 0.0, 1.0]);
        assert!(graph_of_matrix(&a).is_err());
    }

    #[test]
    fn periodic_schedule_cycles_and_respects_horizon() {
        let g1 = DirectedGraph::neighbor_graph(2, &[(0, 1)]).unwrap();
        let g2 = DirectedGraph::neighbor_graph(2, &[(1, 0)]).unwrap();
        let sched = GraphSchedule::periodic(vec![g1.clone(), g2.clone()])
            .unwrap()
            .with_horizon(3);
        assert_eq!(sched.graph_at(1).unwrap(), g1);
        assert_eq!(sched.graph_at(2).unwrap(), g2);
        assert_eq!(sched.graph_at(3).unwrap(), g1);
        assert!(matches!(
            sched.graph_at(4),
            Err(Error::ScheduleExhausted { t: 4, horizon: 3 })
        ));
        assert!(sched.graph_at(0).is_err());
    }

    #[test]
    fn schedule_rejects_missing_self_arcs() {
        let g = DirectedGraph::from_arcs(2, &[(0, 1), (1, 0)]).unwrap();
        assert!(GraphSchedule::constant(g).is_err());
    }

    #[test]
    fn seeded_random_schedule_is_reproducible_and_random_access() {
        let pool = vec![
            DirectedGraph::neighbor_graph(3, &[(0, 1)]).unwrap(),
            DirectedGraph::neighbor_graph(3, &[(1, 2)]).unwrap(),
            DirectedGraph::neighbor_graph(3, &[(2, 0)]).unwrap(),
        ];
        let a = GraphSchedule::seeded_random(pool.clone(), 42).unwrap();
        let b = GraphSchedule::seeded_random(pool, 42).unwrap();
        let forward: Vec<_> = (1..=20).map(|t| a.graph_at(t).unwrap()).collect();
        // Query b out of order: draws depend only on (seed, t).
        for t in (1..=20).rev() {
            assert_eq!(b.graph_at(t).unwrap(), forward[(t - 1) as usize]);
        }
    }

    #[test]
    fn constant_strongly_connected_schedule_certifies_at_l_one() {
        let g = DirectedGraph::neighbor_graph(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let sched = GraphSchedule::constant(g).unwrap();
        let out = certify_rjsc(&sched, 1, 1, 5).unwrap();
        assert_eq!(
            out,
            RjscOutcome::Certified(RjscCertificate { l: 1, rho0: 1, windows_checked: 5 })
        );
    }

    #[test]
    fn periodic_single_arc_schedule_needs_window_three() {
        // One cross arc at a time; only the length-3 window closes the cycle.
        let sched = GraphSchedule::periodic(vec![
            DirectedGraph::neighbor_graph(3, &[(0, 1)]).unwrap(),
            DirectedGraph::neighbor_graph(3, &[(1, 2)]).unwrap(),
            DirectedGraph::neighbor_graph(3, &[(2, 0)]).unwrap(),
        ])
        .unwrap();
        assert!(matches!(
            certify_rjsc(&sched, 1, 1, 3).unwrap(),
            RjscOutcome::FailedWindow { k: 1, .. }
        ));
        let cert = search_rjsc(&sched, 4, 4).unwrap().expect("certifiable");
        assert_eq!(cert.l, 3);
        assert_eq!(cert.rho0, 1);
    }

    #[test]
    fn constant_rooted_graph_never_certifies() {
        // Rooted at 0 (everyone hears 0) but 0 hears nobody: any composition
        // of copies stays rooted and non-strongly-connected.
        let g = DirectedGraph::neighbor_graph(2, &[(0, 1)]).unwrap();
        let sched = GraphSchedule::constant(g).unwrap();
        assert_eq!(search_rjsc(&sched, 5, 3).unwrap(), None);
    }

    #[test]
    fn certification_errors_when_horizon_cuts_the_window() {
        let g = DirectedGraph::neighbor_graph(2, &[(0, 1), (1, 0)]).unwrap();
        let sched = GraphSchedule::constant(g).unwrap().with_horizon(4);
        assert!(matches!(
            certify_rjsc(&sched, 2, 1, 3),
            Err(Error::ScheduleExhausted { .. })
        ));
    }
}
