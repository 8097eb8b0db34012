//! The distributed iteration: mix under the current graph, then apply maps.
//!
//! Time starts at t = 1. One step computes the neighbor averages
//! xbar_i(t) = sum_j s_ij(t) x_j(t) and hands each agent its own average:
//! x_i(t+1) = M_i(xbar_i(t)). The run records both x(t) and xbar(t) every
//! step, together with the convergence metrics, and stops when disagreement
//! and residual both clear their thresholds or the horizon is reached.
//!
//! Everything is sequential and allocation-order deterministic: the same
//! scenario produces the same trace, bit for bit, on every run.

use std::io::Write;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::graphs::GraphSchedule;
use crate::maps::ParaMap;
use crate::matrices::{StochasticMatrix, WeightMap};
use crate::vectorspace::{mixed_norm, p_norm, MixedNorm, NormOrder, Stacked};

/// Default step budget.
pub const DEFAULT_HORIZON: u64 = 10_000;
/// Default threshold on the disagreement and residual metrics.
pub const DEFAULT_EPS: f64 = 1e-8;

/// A complete problem instance: who the agents are, how they talk, where
/// they start, and when to stop.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub maps: Vec<ParaMap>,
    pub schedule: GraphSchedule,
    /// Explicit mixing weights; `None` means uniform 1/|N_i(t)| averaging.
    pub weights: Option<WeightMap>,
    pub x0: Stacked,
    pub horizon: u64,
    pub eps_consensus: f64,
    pub eps_residual: f64,
    /// Norm order for all metrics (block norms and the mixed norm).
    pub p: f64,
    /// Optional known common fixed point; enables the distance metric.
    pub witness: Option<DVector<f64>>,
}

impl Scenario {
    pub fn new(maps: Vec<ParaMap>, schedule: GraphSchedule, x0: Stacked) -> Result<Self> {
        let s = Scenario {
            maps,
            schedule,
            weights: None,
            x0,
            horizon: DEFAULT_HORIZON,
            eps_consensus: DEFAULT_EPS,
            eps_residual: DEFAULT_EPS,
            p: 2.0,
            witness: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_weights(mut self, weights: WeightMap) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_tolerances(mut self, eps_consensus: f64, eps_residual: f64) -> Self {
        self.eps_consensus = eps_consensus;
        self.eps_residual = eps_residual;
        self
    }

    pub fn with_norm(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_witness(mut self, witness: DVector<f64>) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn m(&self) -> usize {
        self.maps.len()
    }

    pub fn n(&self) -> usize {
        self.x0.n()
    }

    pub fn validate(&self) -> Result<()> {
        if self.maps.is_empty() {
            return Err(Error::InvalidInput("scenario needs at least one agent".into()));
        }
        let m = self.maps.len();
        let n = self.x0.n();
        if self.x0.m() != m {
            return Err(Error::DimensionMismatch(format!(
                "{m} maps but {} initial blocks",
                self.x0.m()
            )));
        }
        if self.schedule.m() != m {
            return Err(Error::DimensionMismatch(format!(
                "{m} maps but schedule has {} vertices",
                self.schedule.m()
            )));
        }
        for (i, map) in self.maps.iter().enumerate() {
            if map.dim() != n {
                return Err(Error::DimensionMismatch(format!(
                    "agent {i} map lives in dimension {}, state in {n}",
                    map.dim()
                )));
            }
        }
        NormOrder::finite(self.p)?;
        if !(self.eps_consensus > 0.0 && self.eps_residual > 0.0) {
            return Err(Error::InvalidInput(format!(
                "thresholds must be positive, got consensus {} residual {}",
                self.eps_consensus, self.eps_residual
            )));
        }
        if self.horizon < 1 {
            return Err(Error::InvalidInput("horizon must be at least 1".into()));
        }
        if let Some(w) = &self.weights {
            if let Some(&(i, j)) = w.keys().find(|&&(i, j)| i >= m || j >= m) {
                return Err(Error::InvalidInput(format!(
                    "weight ({i}, {j}) out of range for {m} agents"
                )));
            }
        }
        if let Some(wit) = &self.witness {
            if wit.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "witness has dimension {}, state has {n}",
                    wit.len()
                )));
            }
            for (i, map) in self.maps.iter().enumerate() {
                let r = map.residual(wit)?;
                if r > crate::EPS_FIX {
                    return Err(Error::Precondition(format!(
                        "witness is not fixed by agent {i}'s map (residual {r:e})"
                    )));
                }
            }
        }
        Ok(())
    }

    fn mixing_matrix_at(&self, t: u64) -> Result<StochasticMatrix> {
        let g = self.schedule.graph_at(t)?;
        match &self.weights {
            Some(w) => StochasticMatrix::from_weights(&g, w),
            None => StochasticMatrix::from_graph(&g),
        }
    }
}

/// One recorded step.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub t: u64,
    pub x: Stacked,
    pub xbar: Stacked,
    pub disagreement: f64,
    pub residual: f64,
    pub distance_to_witness: Option<f64>,
}

/// The recorded run: steps t = 1, 2, ... plus the stopping verdict.
#[derive(Clone, Debug)]
pub struct Trace {
    steps: Vec<TraceStep>,
    converged: bool,
    p: f64,
}

impl Trace {
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Norm order the metrics were computed in.
    pub fn norm_order(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    /// Step by its 1-indexed time.
    pub fn step(&self, t: u64) -> Option<&TraceStep> {
        if t == 0 {
            return None;
        }
        self.steps.get((t - 1) as usize)
    }

    pub fn last_t(&self) -> u64 {
        self.steps.len() as u64
    }

    pub fn final_step(&self) -> &TraceStep {
        self.steps.last().expect("a trace records at least one step")
    }

    pub fn final_state(&self) -> &Stacked {
        &self.final_step().x
    }
}

/// Largest pairwise block distance max_{i,j} ||x_i - x_j||_p.
pub fn disagreement(x: &Stacked, p: f64) -> Result<f64> {
    let order = NormOrder::finite(p)?;
    let mut worst: f64 = 0.0;
    for i in 0..x.m() {
        for j in (i + 1)..x.m() {
            worst = worst.max(p_norm(&(x.block(i) - x.block(j)), order)?);
        }
    }
    Ok(worst)
}

/// Largest per-agent fixed-point residual max_i ||M_i(x_i) - x_i||_p.
pub fn residual(x: &Stacked, maps: &[ParaMap], p: f64) -> Result<f64> {
    if maps.len() != x.m() {
        return Err(Error::DimensionMismatch(format!(
            "{} maps but {} blocks",
            maps.len(),
            x.m()
        )));
    }
    let order = NormOrder::finite(p)?;
    let mut worst: f64 = 0.0;
    for (map, block) in maps.iter().zip(x.blocks()) {
        worst = worst.max(p_norm(&(map.eval(block)? - block), order)?);
    }
    Ok(worst)
}

/// Apply each agent's map to its own block.
pub fn apply_maps(x: &Stacked, maps: &[ParaMap]) -> Result<Stacked> {
    if maps.len() != x.m() {
        return Err(Error::DimensionMismatch(format!(
            "{} maps but {} blocks",
            maps.len(),
            x.m()
        )));
    }
    let blocks = maps
        .iter()
        .zip(x.blocks())
        .map(|(map, block)| map.eval(block))
        .collect::<Result<Vec<_>>>()?;
    Stacked::new(blocks)
}

/// One full step: mix under `s`, then map. Identical arithmetic to what
/// [`run`] performs internally.
pub fn step(x: &Stacked, s: &StochasticMatrix, maps: &[ParaMap]) -> Result<Stacked> {
    apply_maps(&s.apply_kron(x)?, maps)
}

/// Run the scenario to convergence or horizon. The trace records every
/// visited step including the last; `converged` reports whether both
/// thresholds were met.
pub fn run(scenario: &Scenario) -> Result<Trace> {
    scenario.validate()?;
    let p = scenario.p;
    let witness_stack = match &scenario.witness {
        Some(w) => Some(Stacked::uniform(scenario.m(), w.clone())?),
        None => None,
    };
    let p_inf = MixedNorm::p_inf(p)?;

    let mut steps = Vec::new();
    let mut converged = false;
    let mut x = scenario.x0.clone();
    let mut t: u64 = 1;
    loop {
        let s = scenario.mixing_matrix_at(t)?;
        let xbar = s.apply_kron(&x)?;
        let d = disagreement(&x, p)?;
        let r = residual(&x, &scenario.maps, p)?;
        let dw = match &witness_stack {
            Some(w) => Some(mixed_norm(&(&x - w), p_inf)?),
            None => None,
        };
        steps.push(TraceStep {
            t,
            x: x.clone(),
            xbar: xbar.clone(),
            disagreement: d,
            residual: r,
            distance_to_witness: dw,
        });
        if d <= scenario.eps_consensus && r <= scenario.eps_residual {
            converged = true;
            break;
        }
        if t == scenario.horizon {
            break;
        }
        x = apply_maps(&xbar, &scenario.maps)?;
        t += 1;
    }
    Ok(Trace { steps, converged, p })
}

/// The averaged-state subsequence z(k) = xbar((k-1) q l + rho0 - 1) for
/// k >= 2, where q = m - 1. These are the averages at the ends of the
/// certification windows; along them the distance chain to any common fixed
/// point contracts.
pub fn extract_z_subsequence(
    trace: &Trace,
    l: usize,
    rho0: usize,
    q: usize,
) -> Result<Vec<Stacked>> {
    if l < 1 || rho0 < 1 || q < 1 {
        return Err(Error::Precondition(format!(
            "subsequence extraction needs l >= 1, rho0 >= 1, q >= 1 (got l={l}, rho0={rho0}, q={q})"
        )));
    }
    let m = trace.final_state().m();
    if q != m - 1 {
        return Err(Error::Precondition(format!(
            "q must be m - 1 = {} for this trace, got {q}",
            m - 1
        )));
    }
    let index = |k: usize| ((k - 1) * q * l + rho0 - 1) as u64;
    if index(2) > trace.last_t() {
        return Err(Error::Precondition(format!(
            "trace of length {} is too short for the first index {}",
            trace.last_t(),
            index(2)
        )));
    }
    let mut out = Vec::new();
    let mut k = 2;
    while index(k) <= trace.last_t() {
        let step = trace.step(index(k)).expect("index bounded by last_t");
        out.push(step.xbar.clone());
        k += 1;
    }
    Ok(out)
}

/// Long-form trace CSV: one row per (step, agent, component), with both the
/// state value and the neighbor average. Floats print in shortest
/// round-trip form, so identical runs serialize to identical bytes.
pub fn write_trace_csv<W: Write>(trace: &Trace, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "t,agent,component,value,xbar_value")?;
    for step in trace.steps() {
        for agent in 0..step.x.m() {
            for c in 0..step.x.n() {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    step.t,
                    agent,
                    c,
                    step.x.block(agent)[c],
                    step.xbar.block(agent)[c]
                )?;
            }
        }
    }
    Ok(())
}

/// Metrics CSV: one row per step.
pub fn write_metrics_csv<W: Write>(trace: &Trace, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "t,disagreement,residual,distance_to_witness")?;
    for step in trace.steps() {
        let dw = match step.distance_to_witness {
            Some(v) => format!("{v}"),
            None => "NaN".to_string(),
        };
        writeln!(out, "{},{},{},{}", step.t, step.disagreement, step.residual, dw)?;
    }
    Ok(())
}

/// Human-readable run summary.
pub fn write_summary<W: Write>(trace: &Trace, out: &mut W) -> std::io::Result<()> {
    let last = trace.final_step();
    writeln!(out, "converged: {}", trace.converged())?;
    writeln!(out, "steps: {}", trace.len())?;
    writeln!(out, "final_disagreement: {}", last.disagreement)?;
    writeln!(out, "final_residual: {}", last.residual)?;
    match last.distance_to_witness {
        Some(v) => writeln!(out, "final_distance_to_witness: {v}")?,
        None => writeln!(out, "final_distance_to_witness: NaN")?,
    }
    Ok(())
}
