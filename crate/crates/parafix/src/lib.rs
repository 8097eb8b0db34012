//! Distributed computation of common fixed points of paracontracting maps.
//!
//! A group of `m` agents each holds a map `M_i` on R^n and an estimate
//! `x_i(t)`. At every step an agent averages the estimates of its
//! in-neighbors under a time-varying directed graph and applies its own map:
//!
//! ```text
//! x_i(t+1) = M_i( (1/|N_i(t)|) * sum over j in N_i(t) of x_j(t) )
//! ```
//!
//! When each `M_i` is a paracontraction (continuous, and strictly closer to
//! every one of its fixed points after each application, unless already
//! fixed) with a common fixed point, and the graph sequence is repeatedly
//! jointly strongly connected, all estimates converge to one common fixed
//! point. This crate provides the pieces of that story and the tooling to
//! exercise it numerically:
//!
//! - [`vectorspace`]: p-norms and the mixed (p, q)-norm on stacked vectors;
//! - [`maps`]: a catalog of paracontractions (projections, linear solves,
//!   gradient and proximal steps, averaged maps, compositions) with analytic
//!   fixed-set oracles and sampled property checkers;
//! - [`graphs`]: neighbor graphs, graph composition, schedules, and
//!   certification that windows of a schedule compose to strongly connected
//!   graphs;
//! - [`matrices`]: row-stochastic mixing matrices with exact weight sets,
//!   applied to stacked vectors without materializing Kronecker products;
//! - [`engine`]: the iteration itself, with traces, convergence metrics, and
//!   CSV export;
//! - [`verify`]: a suite of seeded numerical checks binding every
//!   convergence ingredient (contraction properties, product positivity,
//!   monotone distance chains, the frozen-agent counterexample) to code;
//! - [`scenario`] and [`cli`]: a JSON scenario format and the `run` /
//!   `verify` / `certify` commands built on it.
//!
//! The runnable examples under `examples/` walk one capability each; the
//! `parafix` binary is a thin wrapper over [`cli`].

pub mod cli;
pub mod engine;
pub mod error;
pub mod graphs;
pub mod maps;
pub mod matrices;
pub mod report;
pub mod sampling;
pub mod scenario;
pub mod vectorspace;
pub mod verify;

pub use error::{Error, Result};

/// Absolute slack below which a strict inequality is not trusted: a "strict"
/// comparison passes only when the margin exceeds this.
pub const EPS_STRICT: f64 = 1e-10;

/// Residual below which a point counts as fixed.
pub const EPS_FIX: f64 = 1e-9;

/// Singular values below this count as zero in rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Default seed for every sampler and seeded schedule.
pub const DEFAULT_SEED: u64 = 42;

/// Default half-width of sampling boxes around stored fixed points.
pub const SAMPLE_RADIUS: f64 = 10.0;
