//! Finite map-then-mix sequences used by the inequality checks.
//!
//! A `VSequence` fixes a window of q mixing matrices S(1), ..., S(q) and a
//! start v(0), then records v(t+1) = (S(t+1) (x) I) M(v(t)) for 0 <= t < q.
//! Component-wise that is v_i(t+1) = sum_j s_ij(t+1) M_j(v_j(t)): every agent
//! first applies its own map, then the graph mixes the results. The
//! transition products Phi(t, tau) over the same window tie the distances
//! ||v_i(t) - y*|| at different times together.

use nalgebra::DVector;

use crate::engine::apply_maps;
use crate::error::{Error, Result};
use crate::maps::ParaMap;
use crate::matrices::{phi_product, StochasticMatrix, TransitionProduct};
use crate::vectorspace::{p_norm, NormOrder, Stacked};

/// A recorded window v(0), ..., v(q) together with everything needed to
/// recompute and bound it: the stage matrices, the maps, a common fixed
/// point y*, and the norm order p.
#[derive(Clone, Debug)]
pub struct VSequence {
    v: Vec<Stacked>,
    stages: Vec<StochasticMatrix>,
    maps: Vec<ParaMap>,
    y_star: DVector<f64>,
    p: f64,
}

impl VSequence {
    /// Build the window from its start. `stages[k]` is S(k+1). `y_star`
    /// must be fixed by every map.
    pub fn generate(
        maps: Vec<ParaMap>,
        stages: Vec<StochasticMatrix>,
        v0: Stacked,
        y_star: DVector<f64>,
        p: f64,
    ) -> Result<Self> {
        let m = maps.len();
        if m == 0 || stages.is_empty() {
            return Err(Error::InvalidInput(
                "a v-sequence needs at least one map and one stage".into(),
            ));
        }
        if v0.m() != m {
            return Err(Error::DimensionMismatch(format!(
                "{m} maps but {} start blocks",
                v0.m()
            )));
        }
        let n = v0.n();
        for (i, map) in maps.iter().enumerate() {
            if map.dim() != n {
                return Err(Error::DimensionMismatch(format!(
                    "map {i} has dimension {}, start blocks have {n}",
                    map.dim()
                )));
            }
        }
        for (k, s) in stages.iter().enumerate() {
            if s.m() != m {
                return Err(Error::DimensionMismatch(format!(
                    "stage {} is {}x{} but there are {m} agents",
                    k + 1,
                    s.m(),
                    s.m()
                )));
            }
        }
        if y_star.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "common point has dimension {}, blocks have {n}",
                y_star.len()
            )));
        }
        for (i, map) in maps.iter().enumerate() {
            let r = map.residual(&y_star)?;
            if r > crate::EPS_FIX {
                return Err(Error::Precondition(format!(
                    "y* is not fixed by map {i} (residual {r:e})"
                )));
            }
        }
        NormOrder::finite(p)?;

        let mut v = vec![v0];
        for s in &stages {
            let mapped = apply_maps(v.last().expect("non-empty"), &maps)?;
            v.push(s.apply_kron(&mapped)?);
        }
        Ok(VSequence { v, stages, maps, y_star, p })
    }

    /// Window length q.
    pub fn q(&self) -> usize {
        self.stages.len()
    }

    pub fn m(&self) -> usize {
        self.maps.len()
    }

    pub fn n(&self) -> usize {
        self.v[0].n()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// v(t) for 0 <= t <= q.
    pub fn v(&self, t: usize) -> &Stacked {
        &self.v[t]
    }

    pub fn maps(&self) -> &[ParaMap] {
        &self.maps
    }

    pub fn stages(&self) -> &[StochasticMatrix] {
        &self.stages
    }

    pub fn y_star(&self) -> &DVector<f64> {
        &self.y_star
    }

    /// Transition product Phi(t, tau) = S(t) ... S(tau+1) over this window.
    pub fn phi(&self, t: usize, tau: usize) -> Result<TransitionProduct> {
        phi_product(&self.stages, tau, t)
    }

    /// ||v_i(t) - y*||_p.
    pub fn block_distance(&self, i: usize, t: usize) -> Result<f64> {
        p_norm(&(self.v[t].block(i) - &self.y_star), NormOrder::finite(self.p)?)
    }

    /// Recompute every v_i(t+1) = sum_j s_ij(t+1) M_j(v_j(t)) with plain
    /// per-agent sums — a different accumulation path from the one used to
    /// build the sequence — and return the largest absolute deviation from
    /// the stored values.
    pub fn recompute_deviation(&self) -> Result<f64> {
        let m = self.m();
        let n = self.n();
        let mut worst: f64 = 0.0;
        for t in 0..self.q() {
            let images: Vec<DVector<f64>> = self
                .maps
                .iter()
                .zip(self.v[t].blocks())
                .map(|(map, block)| map.eval(block))
                .collect::<Result<Vec<_>>>()?;
            let s = &self.stages[t];
            for i in 0..m {
                let mut acc = DVector::zeros(n);
                for (j, image) in images.iter().enumerate() {
                    let w = s.entry(i, j);
                    if w != 0.0 {
                        for c in 0..n {
                            acc[c] += w * image[c];
                        }
                    }
                }
                worst = worst.max((&acc - self.v[t + 1].block(i)).amax());
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::DirectedGraph;
    use crate::maps::ConvexSet;

    fn vec2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_row_slice(&[a, b])
    }

    fn band_trio() -> Vec<ParaMap> {
        vec![
            ParaMap::projector(ConvexSet::halfspace(vec2(1.0, 0.0), 1.0).unwrap()),
            ParaMap::projector(ConvexSet::halfspace(vec2(-1.0, 0.0), 1.0).unwrap()),
            ParaMap::projector(ConvexSet::halfspace(vec2(0.0, 1.0), 2.0).unwrap()),
        ]
    }

    #[test]
    fn generate_matches_the_per_agent_recursion() {
        let maps = band_trio();
        let g = DirectedGraph::complete(3).unwrap();
        let s = StochasticMatrix::from_graph(&g).unwrap();
        let v0 =
            Stacked::new(vec![vec2(5.0, -1.0), vec2(-4.0, 3.0), vec2(0.5, 7.0)]).unwrap();
        let vs = VSequence::generate(
            maps,
            vec![s.clone(), s],
            v0,
            vec2(0.0, 0.0),
            2.0,
        )
        .unwrap();
        assert_eq!(vs.q(), 2);
        assert!(vs.recompute_deviation().unwrap() <= 1e-12);
    }

    #[test]
    fn non_fixed_y_star_is_rejected() {
        let maps = band_trio();
        let g = DirectedGraph::complete(3).unwrap();
        let s = StochasticMatrix::from_graph(&g).unwrap();
        let v0 = Stacked::uniform(3, vec2(0.0, 0.0)).unwrap();
        // (9, 0) violates the first wall, so it is not a common fixed point.
        let err = VSequence::generate(maps, vec![s], v0, vec2(9.0, 0.0), 2.0);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn phi_indices_cover_the_window() {
        let maps = band_trio();
        let g = DirectedGraph::complete(3).unwrap();
        let s = StochasticMatrix::from_graph(&g).unwrap();
        let v0 = Stacked::uniform(3, vec2(0.0, 0.0)).unwrap();
        let vs =
            VSequence::generate(maps, vec![s.clone(), s.clone(), s], v0, vec2(0.0, 0.0), 2.0)
                .unwrap();
        // Phi(t, t) is the identity, Phi(q, 0) the full product.
        let id = vs.phi(1, 1).unwrap();
        assert_eq!(id.matrix(), &nalgebra::DMatrix::identity(3, 3));
        let full = vs.phi(3, 0).unwrap();
        assert!(full.is_positive());
    }
}
