//! Closed convex sets with exact orthogonal projections.
//!
//! Every set is built nonempty and stores a witness point, so downstream
//! code can always lay hands on a member. Projections for the primitive
//! shapes are closed-form; intersections project by Dykstra's alternating
//! scheme, which converges to the true projection onto the intersection
//! (cyclic projections alone would only reach *some* point of it).

use nalgebra::linalg::Cholesky;
use nalgebra::{DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::RANK_TOL;

/// Sweep-to-sweep movement below which Dykstra iteration stops.
const DYKSTRA_TOL: f64 = 1e-13;
const DYKSTRA_MAX_SWEEPS: usize = 10_000;

#[derive(Clone, Debug)]
enum SetKind {
    /// { x : normal . x <= offset }
    Halfspace { normal: DVector<f64>, offset: f64, norm_sq: f64 },
    /// { x : ||x - center|| <= radius }
    Ball { center: DVector<f64>, radius: f64 },
    /// { x : lo <= x <= hi } componentwise
    AxisBox { lo: DVector<f64>, hi: DVector<f64> },
    /// { x : a x = b } with independent rows; `gram` factors a a^T
    Affine { a: DMatrix<f64>, b: DVector<f64>, gram: Cholesky<f64, Dyn> },
    /// All members at once
    Intersection { members: Vec<ConvexSet> },
}

/// A nonempty closed convex subset of R^n.
#[derive(Clone, Debug)]
pub struct ConvexSet {
    kind: SetKind,
    witness: DVector<f64>,
    dim: usize,
}

fn require_finite(v: &DVector<f64>, what: &str) -> Result<()> {
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} has non-finite entry {bad}")));
    }
    Ok(())
}

impl ConvexSet {
    /// Halfspace { x : normal . x <= offset }; the normal must be nonzero.
    pub fn halfspace(normal: DVector<f64>, offset: f64) -> Result<Self> {
        require_finite(&normal, "halfspace normal")?;
        if !offset.is_finite() {
            return Err(Error::InvalidInput(format!("halfspace offset {offset} must be finite")));
        }
        let norm_sq = normal.norm_squared();
        if norm_sq == 0.0 {
            return Err(Error::InvalidInput("halfspace normal must be nonzero".into()));
        }
        let witness = &normal * (offset / norm_sq);
        let dim = normal.len();
        Ok(ConvexSet { kind: SetKind::Halfspace { normal, offset, norm_sq }, witness, dim })
    }

    /// Closed ball of strictly positive radius.
    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self> {
        require_finite(&center, "ball center")?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!("ball radius must be positive, got {radius}")));
        }
        let witness = center.clone();
        let dim = center.len();
        Ok(ConvexSet { kind: SetKind::Ball { center, radius }, witness, dim })
    }

    /// Axis-aligned box { x : lo <= x <= hi }.
    pub fn axis_box(lo: DVector<f64>, hi: DVector<f64>) -> Result<Self> {
        require_finite(&lo, "box lower bound")?;
        require_finite(&hi, "box upper bound")?;
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch(format!(
                "box bounds of lengths {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if let Some(i) = (0..lo.len()).find(|&i| lo[i] > hi[i]) {
            return Err(Error::InvalidInput(format!(
                "box bound {i} is empty: lo {} > hi {}",
                lo[i], hi[i]
            )));
        }
        let witness = (&lo + &hi) * 0.5;
        let dim = lo.len();
        Ok(ConvexSet { kind: SetKind::AxisBox { lo, hi }, witness, dim })
    }

    /// Affine subspace { x : a x = b }; rows of `a` must be linearly
    /// independent so the Gram matrix a a^T is invertible.
    pub fn affine_subspace(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidInput("affine subspace needs a non-empty matrix".into()));
        }
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} constraint rows but {} right-hand sides",
                a.nrows(),
                b.len()
            )));
        }
        if a.rank(RANK_TOL) != a.nrows() {
            return Err(Error::Precondition(
                "affine subspace constraint rows must be linearly independent".into(),
            ));
        }
        let gram = Cholesky::new(&a * a.transpose()).ok_or_else(|| {
            Error::Precondition("constraint Gram matrix is not positive definite".into())
        })?;
        // Minimum-norm solution a^T (a a^T)^{-1} b is a member.
        let witness = a.transpose() * gram.solve(&b);
        let dim = a.ncols();
        Ok(ConvexSet { kind: SetKind::Affine { a, b, gram }, witness, dim })
    }

    /// Intersection of the members. Nonemptiness is not decidable from the
    /// shapes alone, so the caller must supply a point in all members.
    pub fn intersection(members: Vec<ConvexSet>, witness: DVector<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidInput("intersection needs at least one member".into()));
        }
        let dim = members[0].dim;
        if let Some((i, s)) = members.iter().enumerate().find(|(_, s)| s.dim != dim) {
            return Err(Error::DimensionMismatch(format!(
                "intersection member {i} lives in dimension {}, expected {dim}",
                s.dim
            )));
        }
        if witness.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "witness has dimension {}, expected {dim}",
                witness.len()
            )));
        }
        for (i, s) in members.iter().enumerate() {
            if !s.contains(&witness, crate::EPS_FIX) {
                return Err(Error::Precondition(format!(
                    "witness is not in intersection member {i}"
                )));
            }
        }
        Ok(ConvexSet { kind: SetKind::Intersection { members }, witness, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// A stored member of the set.
    pub fn witness(&self) -> &DVector<f64> {
        &self.witness
    }

    /// Membership within an absolute tolerance on the defining residual.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        if x.len() != self.dim {
            return false;
        }
        match &self.kind {
            SetKind::Halfspace { normal, offset, .. } => normal.dot(x) <= offset + tol,
            SetKind::Ball { center, radius } => (x - center).norm() <= radius + tol,
            SetKind::AxisBox { lo, hi } => {
                (0..x.len()).all(|i| x[i] >= lo[i] - tol && x[i] <= hi[i] + tol)
            }
            SetKind::Affine { a, b, .. } => (a * x - b).norm() <= tol,
            SetKind::Intersection { members } => members.iter().all(|s| s.contains(x, tol)),
        }
    }

    /// Orthogonal projection onto the set. Points already inside come back
    /// unchanged — bit for bit — for every primitive shape.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "projecting a vector of dimension {} onto a set in dimension {}",
                x.len(),
                self.dim
            )));
        }
        Ok(match &self.kind {
            SetKind::Halfspace { normal, offset, norm_sq } => {
                let slack = normal.dot(x) - offset;
                if slack <= 0.0 {
                    x.clone()
                } else {
                    x - normal * (slack / norm_sq)
                }
            }
            SetKind::Ball { center, radius } => {
                let d = x - center;
                let dist = d.norm();
                if dist <= *radius {
                    x.clone()
                } else {
                    center + d * (*radius / dist)
                }
            }
            SetKind::AxisBox { lo, hi } => {
                DVector::from_fn(x.len(), |i, _| x[i].clamp(lo[i], hi[i]))
            }
            SetKind::Affine { a, b, gram } => {
                let residual = a * x - b;
                x - a.transpose() * gram.solve(&residual)
            }
            SetKind::Intersection { members } => self.project_dykstra(members, x)?,
        })
    }

    fn project_dykstra(&self, members: &[ConvexSet], x0: &DVector<f64>) -> Result<DVector<f64>> {
        let mut x = x0.clone();
        let mut corrections = vec![DVector::zeros(x0.len()); members.len()];
        for _ in 0..DYKSTRA_MAX_SWEEPS {
            let before = x.clone();
            for (s, p) in members.iter().zip(corrections.iter_mut()) {
                let shifted = &x + &*p;
                let y = s.project(&shifted)?;
                *p = shifted - &y;
                x = y;
            }
            if (&x - before).amax() <= DYKSTRA_TOL {
                return Ok(x);
            }
        }
        Err(Error::Precondition(
            "intersection projection did not settle; members may barely intersect".into(),
        ))
    }

    /// Euclidean distance to the set, computed through the projection.
    pub fn distance(&self, x: &DVector<f64>) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn vec2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_row_slice(&[a, b])
    }

    #[test]
    fn halfspace_projection_moves_along_the_normal() {
        let c = ConvexSet::halfspace(vec2(1.0, 0.0), 1.0).unwrap();
        assert_eq!(c.project(&vec2(3.0, 5.0)).unwrap(), vec2(1.0, 5.0));
        // Inside: returned unchanged, bit for bit.
        let inside = vec2(0.25, -7.0);
        assert_eq!(c.project(&inside).unwrap(), inside);
        assert!(c.contains(&inside, 0.0));
        assert!(!c.contains(&vec2(1.0 + 1e-6, 0.0), 1e-9));
    }

    #[test]
    fn ball_projection_lands_on_the_sphere() {
        let c = ConvexSet::ball(vec2(0.0, 0.0), 1.0).unwrap();
        let p = c.project(&vec2(3.0, 4.0)).unwrap();
        assert_relative_eq!(p, vec2(0.6, 0.8), epsilon = 1e-15);
        let inside = vec2(0.1, -0.2);
        assert_eq!(c.project(&inside).unwrap(), inside);
    }

    #[test]
    fn box_projection_clamps_componentwise() {
        let c = ConvexSet::axis_box(vec2(-1.0, -1.0), vec2(1.0, 2.0)).unwrap();
        assert_eq!(c.project(&vec2(5.0, -3.0)).unwrap(), vec2(1.0, -1.0));
        assert_eq!(c.project(&vec2(0.5, 1.5)).unwrap(), vec2(0.5, 1.5));
        assert!(ConvexSet::axis_box(vec2(1.0, 0.0), vec2(0.0, 1.0)).is_err());
    }

    // Oracle by hand: projecting (1, 2) onto { x + y = 7 } moves along (1, 1):
    // (1 + t) + (2 + t) = 7 gives t = 2, so the projection is (3, 4).
    #[test]
    fn affine_projection_matches_hand_solution() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_row_slice(&[7.0]);
        let c = ConvexSet::affine_subspace(a, b).unwrap();
        let p = c.project(&vec2(1.0, 2.0)).unwrap();
        assert_relative_eq!(p, vec2(3.0, 4.0), epsilon = 1e-12);
        assert!(c.contains(&p, 1e-9));
        // Idempotent within float noise.
        let pp = c.project(&p).unwrap();
        assert_relative_eq!(pp, p, epsilon = 1e-12);
    }

    #[test]
    fn affine_subspace_rejects_dependent_rows() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let b = DVector::from_row_slice(&[1.0, 2.0]);
        assert!(ConvexSet::affine_subspace(a, b).is_err());
    }

    #[test]
    fn intersection_projects_into_all_members() {
        // Band -1 <= x1 <= 1 as two halfspaces.
        let c1 = ConvexSet::halfspace(vec2(1.0, 0.0), 1.0).unwrap();
        let c2 = ConvexSet::halfspace(vec2(-1.0, 0.0), 1.0).unwrap();
        let band = ConvexSet::intersection(vec![c1, c2], vec2(0.0, 0.0)).unwrap();
        let p = band.project(&vec2(4.0, 3.0)).unwrap();
        assert_relative_eq!(p, vec2(1.0, 3.0), epsilon = 1e-9);
        assert!(band.contains(&p, 1e-9));

        // Dykstra finds the true projection, not just any intersection point:
        // project (2, 2) onto { x1 <= 1 } intersect ball(0, sqrt(2)).
        let h = ConvexSet::halfspace(vec2(1.0, 0.0), 1.0).unwrap();
        let ball = ConvexSet::ball(vec2(0.0, 0.0), 2.0f64.sqrt()).unwrap();
        let lens = ConvexSet::intersection(vec![h, ball], vec2(0.0, 0.0)).unwrap();
        let q = lens.project(&vec2(2.0, 2.0)).unwrap();
        // By symmetry of the data the answer is (1, 1), the corner of the lens.
        assert_relative_eq!(q, vec2(1.0, 1.0), epsilon = 1e-7);
    }

    #[test]
    fn intersection_requires_a_valid_witness() {
        let c1 = ConvexSet::halfspace(vec2(1.0, 0.0), 1.0).unwrap();
        let c2 = ConvexSet::halfspace(vec2(-1.0, 0.0), 1.0).unwrap();
        assert!(ConvexSet::intersection(vec![c1, c2], vec2(5.0, 0.0)).is_err());
    }

    #[test]
    fn distance_is_zero_inside_and_positive_outside() {
        let c = ConvexSet::halfspace(vec2(1.0, 0.0), 1.0).unwrap();
        assert_eq!(c.distance(&vec2(0.0, 9.0)).unwrap(), 0.0);
        assert_relative_eq!(c.distance(&vec2(3.0, 9.0)).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn witnesses_are_members() {
        let sets = vec![
            ConvexSet::halfspace(vec2(2.0, -1.0), 3.0).unwrap(),
            ConvexSet::ball(vec2(1.0, 1.0), 0.5).unwrap(),
            ConvexSet::axis_box(vec2(-1.0, 0.0), vec2(1.0, 4.0)).unwrap(),
            ConvexSet::affine_subspace(
                DMatrix::from_row_slice(1, 2, &[3.0, 4.0]),
                DVector::from_row_slice(&[10.0]),
            )
            .unwrap(),
        ];
        for s in &sets {
            assert!(s.contains(s.witness(), 1e-9));
        }
    }
}
