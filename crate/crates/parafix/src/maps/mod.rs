//! The map catalog: evaluators with declared fixed-point oracles.
//!
//! Each map couples three things: an evaluator `M`, a norm order `p` in
//! which its contraction property is claimed, and an *analytic* description
//! of its fixed set (solutions of the linear system, members of the set,
//! minimizers of the objective). The oracle is deliberately independent of
//! the evaluator so the property checkers have ground truth that does not
//! simply restate `eval`.
//!
//! Every constructor that promises a paracontraction enforces the conditions
//! under which the promise holds (independent rows, a step size below 2/L,
//! an averaging weight strictly inside (0, 1)). The plain [`linear`] kind is
//! the one exception: it carries an arbitrary square matrix so the
//! equivalence checkers can probe maps that are *not* contractions, and it
//! guarantees nothing beyond fixing the origin.

mod checks;
mod convex;

pub use checks::{
    check_paracontraction, check_quasi_nonexpansive, fixed_set_closed_convex_probe,
    lipschitz_ratio,
};
pub use convex::ConvexSet;

use nalgebra::linalg::Cholesky;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::vectorspace::{p_norm, NormOrder};
use crate::{EPS_FIX, RANK_TOL};

/// Tolerance for symmetry / positive semidefiniteness of objective matrices.
const PSD_TOL: f64 = 1e-10;

/// A map that is nonexpansive in the 2-norm. Used as the core of an averaged
/// map; averaging any of these with the identity yields a paracontraction
/// whenever a fixed point exists.
#[derive(Clone, Debug)]
pub enum NonexpansiveMap {
    Identity { dim: usize },
    /// Reflection 2 P - I across a convex set's projection P.
    Reflection { set: ConvexSet },
    /// Planar rotation by `angle` radians.
    Rotation { angle: f64 },
    /// Any matrix with spectral norm at most one.
    Matrix { a: DMatrix<f64> },
}

impl NonexpansiveMap {
    pub fn dim(&self) -> usize {
        match self {
            NonexpansiveMap::Identity { dim } => *dim,
            NonexpansiveMap::Reflection { set } => set.dim(),
            NonexpansiveMap::Rotation { .. } => 2,
            NonexpansiveMap::Matrix { a } => a.nrows(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            NonexpansiveMap::Identity { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidInput("identity needs dimension >= 1".into()));
                }
            }
            NonexpansiveMap::Reflection { .. } => {}
            NonexpansiveMap::Rotation { angle } => {
                if !angle.is_finite() {
                    return Err(Error::InvalidInput(format!("rotation angle {angle} must be finite")));
                }
            }
            NonexpansiveMap::Matrix { a } => {
                if a.nrows() != a.ncols() || a.nrows() == 0 {
                    return Err(Error::DimensionMismatch(format!(
                        "nonexpansive matrix must be square, got {}x{}",
                        a.nrows(),
                        a.ncols()
                    )));
                }
                let spectral = a.clone().svd(false, false).singular_values.max();
                if spectral > 1.0 + 1e-12 {
                    return Err(Error::Precondition(format!(
                        "matrix has spectral norm {spectral} > 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "map on dimension {} applied to vector of dimension {}",
                self.dim(),
                x.len()
            )));
        }
        Ok(match self {
            NonexpansiveMap::Identity { .. } => x.clone(),
            NonexpansiveMap::Reflection { set } => set.project(x)? * 2.0 - x,
            NonexpansiveMap::Rotation { angle } => {
                let (s, c) = angle.sin_cos();
                DVector::from_row_slice(&[c * x[0] - s * x[1], s * x[0] + c * x[1]])
            }
            NonexpansiveMap::Matrix { a } => a * x,
        })
    }

    /// Analytic fixed-set membership.
    fn fixed_contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        match self {
            NonexpansiveMap::Identity { .. } => true,
            NonexpansiveMap::Reflection { set } => set.contains(x, tol),
            NonexpansiveMap::Rotation { angle } => {
                // A nontrivial rotation fixes only the origin.
                let (s, c) = angle.sin_cos();
                if s == 0.0 && c == 1.0 {
                    true
                } else {
                    x.norm() <= tol
                }
            }
            NonexpansiveMap::Matrix { a } => ((a * x) - x).norm() <= tol,
        }
    }

    fn witness(&self) -> DVector<f64> {
        match self {
            // The origin is fixed by every kind here: rotations and matrices
            // fix it linearly, and a reflection fixes its set's witness.
            NonexpansiveMap::Reflection { set } => set.witness().clone(),
            other => DVector::zeros(other.dim()),
        }
    }
}

/// Objective whose proximity operator the proximal map evaluates.
#[derive(Clone, Debug)]
pub enum ProxFn {
    /// Indicator of a convex set: the prox is the projection.
    Indicator { set: ConvexSet },
    /// (1/2) x' q x + c' x with q symmetric positive semidefinite.
    Quadratic { q: DMatrix<f64>, c: DVector<f64> },
    /// weight * ||x||_1: the prox is the soft threshold.
    OneNorm { weight: f64, dim: usize },
}

/// What a map computes; see the module docs for the guarantees per kind.
#[derive(Clone, Debug)]
pub enum MapKind {
    /// One exact step onto the solution set of a consistent linear system:
    /// x - a'(a a')^{-1}(a x - b), the orthogonal projection onto {x : ax = b}.
    AffineLinearSolve { system: ConvexSet },
    /// Orthogonal projection onto a closed convex set.
    Projector { set: ConvexSet },
    /// x - alpha (q x + c): gradient descent on (1/2) x' q x + c' x.
    GradientDescent { q: DMatrix<f64>, c: DVector<f64>, alpha: f64, lipschitz: f64 },
    /// Proximity operator of `f`: argmin_y f(y) + (1/2)||y - x||^2.
    Proximal { f: ProxFn },
    /// (1 - alpha) x + alpha n(x) for a nonexpansive n, 0 < alpha < 1.
    Averaged { inner: NonexpansiveMap, alpha: f64 },
    /// x -> a x. No contraction promise; fixes the origin.
    Linear { a: DMatrix<f64> },
    /// Right-to-left composition; fixed set is the intersection of the
    /// members' fixed sets.
    Composite { members: Vec<ParaMap> },
}

/// A map on R^n with a known fixed point and an analytic fixed-set oracle.
#[derive(Clone, Debug)]
pub struct ParaMap {
    dim: usize,
    norm_order: f64,
    kind: MapKind,
    witness: DVector<f64>,
}

fn require_symmetric_psd(q: &DMatrix<f64>, what: &str) -> Result<()> {
    if q.nrows() != q.ncols() || q.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square and non-empty, got {}x{}",
            q.nrows(),
            q.ncols()
        )));
    }
    if (q - q.transpose()).amax() > PSD_TOL {
        return Err(Error::Precondition(format!("{what} must be symmetric")));
    }
    let min_eig = q.symmetric_eigenvalues().min();
    if min_eig < -PSD_TOL {
        return Err(Error::Precondition(format!(
            "{what} must be positive semidefinite; smallest eigenvalue {min_eig}"
        )));
    }
    Ok(())
}

/// Least-squares solution of q x = -c with a consistency check: the
/// objective (1/2) x' q x + c' x has a minimizer iff -c is in the range of q.
fn quadratic_minimizer(q: &DMatrix<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = q.clone().svd(true, true);
    let sol = svd
        .solve(&(-c), RANK_TOL)
        .map_err(|e| Error::Precondition(format!("objective solve failed: {e}")))?;
    let residual = (q * &sol + c).norm();
    if residual > 1e-8 * c.norm().max(1.0) {
        return Err(Error::Precondition(format!(
            "objective is unbounded below (normal-equation residual {residual:e})"
        )));
    }
    Ok(sol)
}

impl ParaMap {
    /// Projection onto the solutions of the consistent system a x = b; the
    /// rows of `a` must be linearly independent.
    pub fn affine_linear_solve(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let system = ConvexSet::affine_subspace(a, b)?;
        let witness = system.witness().clone();
        Ok(ParaMap {
            dim: system.dim(),
            norm_order: 2.0,
            kind: MapKind::AffineLinearSolve { system },
            witness,
        })
    }

    /// Orthogonal projection onto `set`.
    pub fn projector(set: ConvexSet) -> Self {
        let witness = set.witness().clone();
        ParaMap { dim: set.dim(), norm_order: 2.0, kind: MapKind::Projector { set }, witness }
    }

    /// Gradient descent on (1/2) x' q x + c' x. Requires q symmetric PSD
    /// with largest eigenvalue at most `lipschitz`, a step size
    /// 0 < alpha < 2 / lipschitz, and a nonempty solution set for q x = -c.
    pub fn gradient_descent(
        q: DMatrix<f64>,
        c: DVector<f64>,
        alpha: f64,
        lipschitz: f64,
    ) -> Result<Self> {
        require_symmetric_psd(&q, "gradient objective matrix")?;
        if q.nrows() != c.len() {
            return Err(Error::DimensionMismatch(format!(
                "objective matrix is {}x{} but linear term has length {}",
                q.nrows(),
                q.ncols(),
                c.len()
            )));
        }
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "lipschitz constant must be positive, got {lipschitz}"
            )));
        }
        let max_eig = q.symmetric_eigenvalues().max();
        if max_eig > lipschitz + PSD_TOL {
            return Err(Error::Precondition(format!(
                "declared lipschitz constant {lipschitz} is below the largest eigenvalue {max_eig}"
            )));
        }
        if !(alpha > 0.0 && alpha < 2.0 / lipschitz) {
            return Err(Error::Precondition(format!(
                "step size must satisfy 0 < alpha < {}, got {alpha}",
                2.0 / lipschitz
            )));
        }
        let witness = quadratic_minimizer(&q, &c)?;
        Ok(ParaMap {
            dim: c.len(),
            norm_order: 2.0,
            kind: MapKind::GradientDescent { q, c, alpha, lipschitz },
            witness,
        })
    }

    /// Proximity operator of `f`.
    pub fn proximal(f: ProxFn) -> Result<Self> {
        let (dim, witness) = match &f {
            ProxFn::Indicator { set } => (set.dim(), set.witness().clone()),
            ProxFn::Quadratic { q, c } => {
                require_symmetric_psd(q, "proximal objective matrix")?;
                if q.nrows() != c.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "objective matrix is {}x{} but linear term has length {}",
                        q.nrows(),
                        q.ncols(),
                        c.len()
                    )));
                }
                (c.len(), quadratic_minimizer(q, c)?)
            }
            ProxFn::OneNorm { weight, dim } => {
                if !(weight.is_finite() && *weight > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "one-norm weight must be positive, got {weight}"
                    )));
                }
                if *dim == 0 {
                    return Err(Error::InvalidInput("one-norm prox needs dimension >= 1".into()));
                }
                (*dim, DVector::zeros(*dim))
            }
        };
        Ok(ParaMap { dim, norm_order: 2.0, kind: MapKind::Proximal { f }, witness })
    }

    /// Averaged map (1 - alpha) I + alpha `inner`, 0 < alpha < 1 strictly.
    pub fn averaged(inner: NonexpansiveMap, alpha: f64) -> Result<Self> {
        inner.validate()?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Precondition(format!(
                "averaging weight must lie strictly inside (0, 1), got {alpha}"
            )));
        }
        let witness = inner.witness();
        Ok(ParaMap {
            dim: inner.dim(),
            norm_order: 2.0,
            kind: MapKind::Averaged { inner, alpha },
            witness,
        })
    }

    /// Plain linear map x -> a x. Fixes the origin; makes no contraction
    /// promise — pair it with the property checkers.
    pub fn linear(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "linear map must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if let Some(bad) = a.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("linear map has non-finite entry {bad}")));
        }
        let dim = a.nrows();
        Ok(ParaMap {
            dim,
            norm_order: 2.0,
            kind: MapKind::Linear { a },
            witness: DVector::zeros(dim),
        })
    }

    /// Re-declare the norm order the map's contraction claims live in.
    pub fn with_norm_order(mut self, p: f64) -> Result<Self> {
        NormOrder::finite(p)?;
        if let MapKind::Composite { members } = &mut self.kind {
            let rebuilt = std::mem::take(members)
                .into_iter()
                .map(|m| m.with_norm_order(p))
                .collect::<Result<Vec<_>>>()?;
            *members = rebuilt;
        }
        self.norm_order = p;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The norm order `p` of the claimed contraction property.
    pub fn norm_order(&self) -> f64 {
        self.norm_order
    }

    /// A stored fixed point.
    pub fn witness(&self) -> &DVector<f64> {
        &self.witness
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    /// Apply the map.
    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "map on dimension {} applied to vector of dimension {}",
                self.dim,
                x.len()
            )));
        }
        Ok(match &self.kind {
            MapKind::AffineLinearSolve { system } => system.project(x)?,
            MapKind::Projector { set } => set.project(x)?,
            MapKind::GradientDescent { q, c, alpha, .. } => {
                let grad = q * x + c;
                x - grad * *alpha
            }
            MapKind::Proximal { f } => match f {
                ProxFn::Indicator { set } => set.project(x)?,
                ProxFn::Quadratic { q, c } => {
                    let n = q.nrows();
                    let shifted = q + DMatrix::<f64>::identity(n, n);
                    let chol = Cholesky::new(shifted)
                        .expect("q + I is positive definite for PSD q");
                    chol.solve(&(x - c))
                }
                ProxFn::OneNorm { weight, .. } => DVector::from_fn(x.len(), |i, _| {
                    let v = x[i];
                    v.signum() * (v.abs() - weight).max(0.0)
                }),
            },
            MapKind::Averaged { inner, alpha } => {
                let nx = inner.eval(x)?;
                let mut out = x * (1.0 - alpha);
                out.axpy(*alpha, &nx, 1.0);
                out
            }
            MapKind::Linear { a } => a * x,
            MapKind::Composite { members } => {
                let mut cur = x.clone();
                for m in members.iter().rev() {
                    cur = m.eval(&cur)?;
                }
                cur
            }
        })
    }

    /// ||M(x) - x|| in the map's declared norm order.
    pub fn residual(&self, x: &DVector<f64>) -> Result<f64> {
        let image = self.eval(x)?;
        p_norm(&(image - x), NormOrder::Finite(self.norm_order))
    }

    /// Evaluator-based fixed-point test: ||M(x) - x||_p <= tol.
    pub fn is_fixed_point(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be nonnegative, got {tol}")));
        }
        Ok(self.residual(x)? <= tol)
    }

    /// Analytic fixed-set membership: solutions of the system, members of
    /// the set, minimizers of the objective — never a rephrasing of `eval`.
    pub fn fixed_set_contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "membership query of dimension {} on a map of dimension {}",
                x.len(),
                self.dim
            )));
        }
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be nonnegative, got {tol}")));
        }
        Ok(match &self.kind {
            MapKind::AffineLinearSolve { system } => system.contains(x, tol),
            MapKind::Projector { set } => set.contains(x, tol),
            MapKind::GradientDescent { q, c, .. } => (q * x + c).norm() <= tol,
            MapKind::Proximal { f } => match f {
                ProxFn::Indicator { set } => set.contains(x, tol),
                ProxFn::Quadratic { q, c } => (q * x + c).norm() <= tol,
                ProxFn::OneNorm { .. } => x.norm() <= tol,
            },
            MapKind::Averaged { inner, .. } => inner.fixed_contains(x, tol),
            MapKind::Linear { a } => ((a * x) - x).norm() <= tol,
            MapKind::Composite { members } => {
                for m in members {
                    if !m.fixed_set_contains(x, tol)? {
                        return Ok(false);
                    }
                }
                true
            }
        })
    }
}

/// Compose maps right to left: `compose([p1, p2], w)` applies p2 first. All
/// members must share the dimension and norm order, and `witness` must be a
/// common fixed point — that hypothesis is what makes the composite's fixed
/// set equal the intersection of the members' fixed sets.
pub fn compose(members: Vec<ParaMap>, witness: DVector<f64>) -> Result<ParaMap> {
    if members.is_empty() {
        return Err(Error::InvalidInput("composition needs at least one map".into()));
    }
    let dim = members[0].dim;
    let norm_order = members[0].norm_order;
    for (i, m) in members.iter().enumerate() {
        if m.dim != dim {
            return Err(Error::DimensionMismatch(format!(
                "composition member {i} has dimension {}, expected {dim}",
                m.dim
            )));
        }
        if m.norm_order != norm_order {
            return Err(Error::Precondition(format!(
                "composition member {i} declares norm order {}, expected {norm_order}",
                m.norm_order
            )));
        }
    }
    if witness.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "witness has dimension {}, expected {dim}",
            witness.len()
        )));
    }
    for (i, m) in members.iter().enumerate() {
        let r = m.residual(&witness)?;
        if r > EPS_FIX {
            return Err(Error::Precondition(format!(
                "witness is not fixed by composition member {i} (residual {r:e})"
            )));
        }
    }
    Ok(ParaMap { dim, norm_order, kind: MapKind::Composite { members }, witness })
}
