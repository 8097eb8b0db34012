//! Scenario files: a JSON schema for complete runs.
//!
//! A file names the agents' maps, the graph schedule, optional mixing
//! weights, the metric norm, the start, and the stopping rule, and
//! converts into an [`engine::Scenario`](crate::engine::Scenario). The
//! schema is strict — unknown keys anywhere in the document are rejected
//! before any computation — and deterministic: the same file and seed
//! always build the same scenario.
//!
//! Weights may be written as numbers or as fraction strings `"1/3"`,
//! which are parsed as an exact integer quotient rather than a decimal
//! approximation, so weight sets with denominators like 3 survive a
//! round trip through the file unchanged.
//!
//! ```
//! use parafix::scenario::ScenarioFile;
//!
//! let text = r#"{
//!     "agents": [
//!         {"kind": "projector", "set": {"kind": "halfspace", "normal": [1.0, 0.0], "offset": 1.0}},
//!         {"kind": "projector", "set": {"kind": "ball", "center": [0.0, 0.0], "radius": 2.0}}
//!     ],
//!     "graph_schedule": {"kind": "constant", "graph": {"m": 2, "arcs": [[0, 1], [1, 0]]}},
//!     "norm": {"p": 2.0},
//!     "init": {"kind": "explicit", "blocks": [[4.0, 0.0], [0.0, -3.0]]},
//!     "run": {"T": 2000, "eps_consensus": 1e-9, "eps_residual": 1e-9}
//! }"#;
//! let scenario = ScenarioFile::from_json(text).unwrap().to_scenario().unwrap();
//! assert_eq!(scenario.m(), 2);
//! ```

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::engine::Scenario;
use crate::error::{Error, Result};
use crate::graphs::{DirectedGraph, GraphSchedule};
use crate::maps::{compose, ConvexSet, NonexpansiveMap, ParaMap, ProxFn};
use crate::matrices::WeightMap;
use crate::sampling::{seeded_rng, vector_in_box};
use crate::vectorspace::Stacked;
use crate::verify::CHECK_NAMES;
use crate::DEFAULT_SEED;

/// A parsed scenario document. Field order mirrors the file layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// One map per agent, in agent order.
    pub agents: Vec<MapSpec>,
    pub graph_schedule: ScheduleSpec,
    /// Explicit mixing weights; omitted means uniform averaging over
    /// in-neighbors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<WeightEntry>>,
    /// Norm order for all metrics; omitted means Euclidean.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormSpec>,
    pub init: InitSpec,
    pub run: RunSpec,
    /// Optional known common fixed point; enables the distance metric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    /// Verification checks to run alongside the scenario; names must be
    /// in the suite registry.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verify: Vec<String>,
}

/// One agent's map.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// Orthogonal projection onto a convex set.
    Projector { set: SetSpec },
    /// Exact projection onto the solution set of `matrix · x = rhs`.
    AffineSolve { matrix: Vec<Vec<f64>>, rhs: Vec<f64> },
    /// One gradient step on (1/2) x'Qx + c'x with step size `step`.
    GradientDescent { quadratic: Vec<Vec<f64>>, linear: Vec<f64>, step: f64 },
    /// Soft threshold: the proximity operator of `weight * ||x||_1`.
    SoftThreshold { weight: f64, dim: usize },
    /// Proximity operator of (1/2) x'Qx + c'x.
    ProxQuadratic { quadratic: Vec<Vec<f64>>, linear: Vec<f64> },
    /// Averaged map (1 - alpha) I + alpha N for a nonexpansive N.
    Averaged { inner: InnerSpec, alpha: f64 },
    /// A linear map given by its matrix.
    Linear { matrix: Vec<Vec<f64>> },
    /// Right-to-left composition of member maps sharing `witness`.
    Composite { members: Vec<MapSpec>, witness: Vec<f64> },
}

/// Convex sets for projectors and indicator proxes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Halfspace { normal: Vec<f64>, offset: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    AffineSubspace { matrix: Vec<Vec<f64>>, rhs: Vec<f64> },
    /// Intersection of the members; `witness` must lie in all of them.
    Intersection { members: Vec<SetSpec>, witness: Vec<f64> },
}

/// Nonexpansive cores for averaged maps.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InnerSpec {
    Identity { dim: usize },
    Reflection { set: SetSpec },
    Rotation { angle: f64 },
    Matrix { matrix: Vec<Vec<f64>> },
}

/// A graph literal: vertex count and cross arcs as `[from, to]` pairs.
/// Self-arcs at every vertex are implied unless `self_arcs` is false.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub m: usize,
    pub arcs: Vec<(usize, usize)>,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub self_arcs: bool,
}

fn default_true() -> bool {
    true
}

#[allow(clippy::trivially_copy_pass_by_ref)]
fn is_true(b: &bool) -> bool {
    *b
}

/// How the communication graph varies over time.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// The same graph at every step.
    Constant { graph: GraphSpec },
    /// Cycles through `graphs` in order, forever.
    Periodic { graphs: Vec<GraphSpec> },
    /// A seeded uniform draw from `pool` at each step; `seed` defaults
    /// to the run seed.
    Random {
        pool: Vec<GraphSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

/// One explicit mixing weight: agent `agent` weighs in-neighbor
/// `neighbor`'s block by `weight`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightEntry {
    pub agent: usize,
    pub neighbor: usize,
    pub weight: WeightValue,
}

/// A weight written either as a number or as an exact fraction string.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightValue {
    Number(f64),
    Fraction(String),
}

impl WeightValue {
    /// The numeric value; fraction strings are parsed as an integer
    /// quotient `p/q`, not as decimals.
    pub fn value(&self) -> Result<f64> {
        match self {
            WeightValue::Number(x) => Ok(*x),
            WeightValue::Fraction(s) => {
                let (num, den) = s
                    .split_once('/')
                    .ok_or_else(|| Error::Schema(format!("weight string {s:?} is not \"p/q\"")))?;
                let num: i64 = num
                    .trim()
                    .parse()
                    .map_err(|_| Error::Schema(format!("bad fraction numerator in {s:?}")))?;
                let den: i64 = den
                    .trim()
                    .parse()
                    .map_err(|_| Error::Schema(format!("bad fraction denominator in {s:?}")))?;
                if den == 0 {
                    return Err(Error::Schema(format!("zero denominator in {s:?}")));
                }
                Ok(num as f64 / den as f64)
            }
        }
    }
}

/// Metric norm order.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub p: f64,
}

/// The start: explicit blocks, or a seeded uniform draw from a box.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Explicit { blocks: Vec<Vec<f64>> },
    /// `m` blocks drawn uniformly from the axis box `center ± radius`;
    /// `seed` defaults to the run seed.
    RandomBox {
        m: usize,
        center: Vec<f64>,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

/// Horizon, stopping thresholds, and the master seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// Step horizon: the run stops unconverged after this many steps.
    #[serde(rename = "T")]
    pub t: u64,
    pub eps_consensus: f64,
    pub eps_residual: f64,
    /// Seed for every seeded draw the file requests (random init, random
    /// schedule) unless the section overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ScenarioFile {
    /// Parse a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        file.validate_names()?;
        Ok(file)
    }

    /// Read and parse a file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Serialize back to pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The master seed: `run.seed` or the crate default.
    pub fn seed(&self) -> u64 {
        self.run.seed.unwrap_or(DEFAULT_SEED)
    }

    fn validate_names(&self) -> Result<()> {
        for name in &self.verify {
            let key = name.strip_prefix("check_").unwrap_or(name);
            if !CHECK_NAMES.contains(&key) {
                return Err(Error::Schema(format!(
                    "unknown verify check {name:?}; known checks: {}",
                    CHECK_NAMES.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Build the runnable scenario.
    pub fn to_scenario(&self) -> Result<Scenario> {
        if self.agents.is_empty() {
            return Err(Error::Schema("agents must be non-empty".into()));
        }
        let p = self.norm.as_ref().map(|n| n.p).unwrap_or(2.0);
        let maps = self
            .agents
            .iter()
            .map(|spec| spec.build()?.with_norm_order(p))
            .collect::<Result<Vec<_>>>()?;
        let schedule = self.graph_schedule.build(self.seed())?;
        let x0 = self.init.build(self.seed())?;
        let mut scenario = Scenario::new(maps, schedule, x0)?
            .with_horizon(self.run.t)
            .with_tolerances(self.run.eps_consensus, self.run.eps_residual)
            .with_norm(p);
        if let Some(entries) = &self.weights {
            let mut weights = WeightMap::new();
            for e in entries {
                if weights.insert((e.agent, e.neighbor), e.weight.value()?).is_some() {
                    return Err(Error::Schema(format!(
                        "duplicate weight for agent {} neighbor {}",
                        e.agent, e.neighbor
                    )));
                }
            }
            scenario = scenario.with_weights(weights);
        }
        if let Some(w) = &self.witness {
            scenario = scenario.with_witness(DVector::from_row_slice(w));
        }
        scenario.validate()?;
        Ok(scenario)
    }
}

impl MapSpec {
    fn build(&self) -> Result<ParaMap> {
        match self {
            MapSpec::Projector { set } => Ok(ParaMap::projector(set.build()?)),
            MapSpec::AffineSolve { matrix, rhs } => {
                ParaMap::affine_linear_solve(matrix_from_rows(matrix)?, DVector::from_row_slice(rhs))
            }
            MapSpec::GradientDescent { quadratic, linear, step } => {
                let q = matrix_from_rows(quadratic)?;
                // The step bound needs the curvature; the largest
                // eigenvalue is the Lipschitz constant of the gradient.
                let lipschitz = q.symmetric_eigenvalues().max();
                ParaMap::gradient_descent(q, DVector::from_row_slice(linear), *step, lipschitz)
            }
            MapSpec::SoftThreshold { weight, dim } => {
                ParaMap::proximal(ProxFn::OneNorm { weight: *weight, dim: *dim })
            }
            MapSpec::ProxQuadratic { quadratic, linear } => ParaMap::proximal(ProxFn::Quadratic {
                q: matrix_from_rows(quadratic)?,
                c: DVector::from_row_slice(linear),
            }),
            MapSpec::Averaged { inner, alpha } => ParaMap::averaged(inner.build()?, *alpha),
            MapSpec::Linear { matrix } => ParaMap::linear(matrix_from_rows(matrix)?),
            MapSpec::Composite { members, witness } => {
                let built = members.iter().map(MapSpec::build).collect::<Result<Vec<_>>>()?;
                compose(built, DVector::from_row_slice(witness))
            }
        }
    }
}

impl SetSpec {
    fn build(&self) -> Result<ConvexSet> {
        match self {
            SetSpec::Halfspace { normal, offset } => {
                ConvexSet::halfspace(DVector::from_row_slice(normal), *offset)
            }
            SetSpec::Ball { center, radius } => {
                ConvexSet::ball(DVector::from_row_slice(center), *radius)
            }
            SetSpec::Box { lo, hi } => {
                ConvexSet::axis_box(DVector::from_row_slice(lo), DVector::from_row_slice(hi))
            }
            SetSpec::AffineSubspace { matrix, rhs } => {
                ConvexSet::affine_subspace(matrix_from_rows(matrix)?, DVector::from_row_slice(rhs))
            }
            SetSpec::Intersection { members, witness } => {
                let built = members.iter().map(SetSpec::build).collect::<Result<Vec<_>>>()?;
                ConvexSet::intersection(built, DVector::from_row_slice(witness))
            }
        }
    }
}

impl InnerSpec {
    fn build(&self) -> Result<NonexpansiveMap> {
        Ok(match self {
            InnerSpec::Identity { dim } => NonexpansiveMap::Identity { dim: *dim },
            InnerSpec::Reflection { set } => NonexpansiveMap::Reflection { set: set.build()? },
            InnerSpec::Rotation { angle } => NonexpansiveMap::Rotation { angle: *angle },
            InnerSpec::Matrix { matrix } => {
                NonexpansiveMap::Matrix { a: matrix_from_rows(matrix)? }
            }
        })
    }
}

impl GraphSpec {
    fn build(&self) -> Result<DirectedGraph> {
        let mut g = if self.self_arcs {
            DirectedGraph::with_self_arcs(self.m)?
        } else {
            DirectedGraph::empty(self.m)?
        };
        for &(from, to) in &self.arcs {
            g.add_arc(from, to)?;
        }
        Ok(g)
    }
}

impl ScheduleSpec {
    fn build(&self, default_seed: u64) -> Result<GraphSchedule> {
        match self {
            ScheduleSpec::Constant { graph } => GraphSchedule::constant(graph.build()?),
            ScheduleSpec::Periodic { graphs } => GraphSchedule::periodic(
                graphs.iter().map(GraphSpec::build).collect::<Result<Vec<_>>>()?,
            ),
            ScheduleSpec::Random { pool, seed } => GraphSchedule::seeded_random(
                pool.iter().map(GraphSpec::build).collect::<Result<Vec<_>>>()?,
                seed.unwrap_or(default_seed),
            ),
        }
    }
}

impl InitSpec {
    fn build(&self, default_seed: u64) -> Result<Stacked> {
        match self {
            InitSpec::Explicit { blocks } => {
                Stacked::new(blocks.iter().map(|b| DVector::from_row_slice(b)).collect())
            }
            InitSpec::RandomBox { m, center, radius, seed } => {
                let mut rng = seeded_rng(seed.unwrap_or(default_seed));
                let c = DVector::from_row_slice(center);
                Stacked::new((0..*m).map(|_| vector_in_box(&mut rng, &c, *radius)).collect())
            }
        }
    }
}

/// Row-major matrix literal, with a ragged-row check.
fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Schema("matrix literal has no rows".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 {
        return Err(Error::Schema("matrix literal has an empty row".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Schema(format!(
                "matrix row {i} has {} entries, expected {ncols}",
                row.len()
            )));
        }
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(nrows, ncols, &flat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;

    fn two_wall_text() -> String {
        r#"{
            "agents": [
                {"kind": "projector", "set": {"kind": "halfspace", "normal": [1.0, 0.0], "offset": 1.0}},
                {"kind": "projector", "set": {"kind": "ball", "center": [0.0, 0.0], "radius": 2.0}}
            ],
            "graph_schedule": {"kind": "constant", "graph": {"m": 2, "arcs": [[0, 1], [1, 0]]}},
            "norm": {"p": 2.0},
            "init": {"kind": "explicit", "blocks": [[4.0, 0.0], [0.0, -3.0]]},
            "run": {"T": 2000, "eps_consensus": 1e-9, "eps_residual": 1e-9}
        }"#
        .to_string()
    }

    #[test]
    fn round_trip_preserves_the_document() {
        let file = ScenarioFile::from_json(&two_wall_text()).unwrap();
        let again = ScenarioFile::from_json(&file.to_json().unwrap()).unwrap();
        assert_eq!(file.to_json().unwrap(), again.to_json().unwrap());
    }

    #[test]
    fn floats_round_trip_bit_for_bit() {
        // A committed file must rebuild the exact scenario that produced
        // it, so serialization and parsing have to agree to the last bit
        // even on values the shortest decimal form only just pins down.
        let mut rng = crate::sampling::seeded_rng(9);
        let awkward: Vec<f64> = (0..256)
            .map(|_| rand::Rng::gen_range(&mut rng, -10.0..10.0))
            .chain([0.1 + 0.2, -0.21140612085881738, f64::MIN_POSITIVE, 1e300])
            .collect();
        let text = serde_json::to_string(&awkward).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        for (x, y) in awkward.iter().zip(&back) {
            assert_eq!(x.to_bits(), y.to_bits(), "{x:.17e} drifted through JSON");
        }
    }

    #[test]
    fn parsed_scenario_runs_to_consensus() {
        let scenario = ScenarioFile::from_json(&two_wall_text()).unwrap().to_scenario().unwrap();
        let trace = run(&scenario).unwrap();
        assert!(trace.converged());
        assert!(trace.final_step().disagreement <= 1e-9);
    }

    #[test]
    fn unknown_keys_are_rejected_everywhere() {
        let top = two_wall_text().replacen("\"norm\"", "\"extra\": 1, \"norm\"", 1);
        assert!(matches!(ScenarioFile::from_json(&top), Err(Error::Json(_))));

        let nested = two_wall_text().replacen("\"offset\"", "\"typo\": 0, \"offset\"", 1);
        assert!(matches!(ScenarioFile::from_json(&nested), Err(Error::Json(_))));
    }

    #[test]
    fn fraction_weights_parse_exactly() {
        assert_eq!(WeightValue::Fraction("1/3".into()).value().unwrap(), 1.0 / 3.0);
        assert_eq!(WeightValue::Fraction(" 2/8 ".into()).value().unwrap(), 0.25);
        assert_eq!(WeightValue::Number(0.5).value().unwrap(), 0.5);
        assert!(WeightValue::Fraction("1/0".into()).value().is_err());
        assert!(WeightValue::Fraction("0.5".into()).value().is_err());
    }

    #[test]
    fn explicit_weights_reach_the_engine() {
        let text = two_wall_text().replacen(
            "\"norm\"",
            r#""weights": [
                {"agent": 0, "neighbor": 0, "weight": "2/3"},
                {"agent": 0, "neighbor": 1, "weight": "1/3"},
                {"agent": 1, "neighbor": 0, "weight": 0.5},
                {"agent": 1, "neighbor": 1, "weight": 0.5}
            ],
            "norm""#,
            1,
        );
        let file = ScenarioFile::from_json(&text).unwrap();
        let scenario = file.to_scenario().unwrap();
        let weights = scenario.weights.as_ref().unwrap();
        assert_eq!(weights[&(0, 0)], 2.0 / 3.0);
        assert_eq!(weights[&(0, 1)], 1.0 / 3.0);
        assert!(run(&scenario).unwrap().converged());
    }

    #[test]
    fn duplicate_weight_entries_are_a_schema_error() {
        let text = two_wall_text().replacen(
            "\"norm\"",
            r#""weights": [
                {"agent": 0, "neighbor": 1, "weight": 0.5},
                {"agent": 0, "neighbor": 1, "weight": 0.5}
            ],
            "norm""#,
            1,
        );
        let err = ScenarioFile::from_json(&text).unwrap().to_scenario().unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn unknown_verify_name_is_a_schema_error() {
        let text = two_wall_text()
            .replacen("\"norm\"", "\"verify\": [\"nosuchcheck\"], \"norm\"", 1);
        assert!(matches!(ScenarioFile::from_json(&text), Err(Error::Schema(_))));

        let ok = two_wall_text()
            .replacen("\"norm\"", "\"verify\": [\"check_counterexample\"], \"norm\"", 1);
        assert!(ScenarioFile::from_json(&ok).is_ok());
    }

    #[test]
    fn random_init_is_reproducible_from_the_run_seed() {
        let text = two_wall_text().replacen(
            r#"{"kind": "explicit", "blocks": [[4.0, 0.0], [0.0, -3.0]]}"#,
            r#"{"kind": "random_box", "m": 2, "center": [0.0, 0.0], "radius": 5.0}"#,
            1,
        );
        let a = ScenarioFile::from_json(&text).unwrap().to_scenario().unwrap();
        let b = ScenarioFile::from_json(&text).unwrap().to_scenario().unwrap();
        assert_eq!(a.x0.flatten(), b.x0.flatten());
    }

    #[test]
    fn every_map_kind_builds() {
        let text = r#"{
            "agents": [
                {"kind": "projector", "set": {"kind": "box", "lo": [-1.0], "hi": [1.0]}},
                {"kind": "affine_solve", "matrix": [[2.0]], "rhs": [0.0]},
                {"kind": "gradient_descent", "quadratic": [[1.0]], "linear": [0.0], "step": 0.5},
                {"kind": "soft_threshold", "weight": 0.5, "dim": 1},
                {"kind": "prox_quadratic", "quadratic": [[1.0]], "linear": [0.0]},
                {"kind": "averaged", "inner": {"kind": "identity", "dim": 1}, "alpha": 0.5},
                {"kind": "linear", "matrix": [[0.5]]},
                {"kind": "composite", "members": [
                    {"kind": "soft_threshold", "weight": 0.1, "dim": 1},
                    {"kind": "linear", "matrix": [[0.5]]}
                ], "witness": [0.0]}
            ],
            "graph_schedule": {"kind": "constant", "graph": {"m": 8, "arcs": [
                [0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 6], [6, 7], [7, 0]
            ]}},
            "init": {"kind": "random_box", "m": 8, "center": [0.0], "radius": 3.0},
            "run": {"T": 100, "eps_consensus": 1e-6, "eps_residual": 1e-6, "seed": 7},
            "witness": [0.0]
        }"#;
        let scenario = ScenarioFile::from_json(text).unwrap().to_scenario().unwrap();
        assert_eq!(scenario.m(), 8);
        assert_eq!(scenario.n(), 1);
    }
}
