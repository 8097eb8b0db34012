//! Vectors, p-norms, and the mixed norm on stacked vectors.
//!
//! A stacked vector collects the estimates of `m` agents, one block of
//! dimension `n` per agent. The mixed (p, q)-norm takes the p-norm of each
//! block and then the q-norm of the resulting vector of block norms; the
//! (p, INF) case — the largest block p-norm — is the workhorse for all
//! contraction arguments over stacked iterates.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Order of a vector norm: a finite exponent in (1, INF) or the max norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormOrder {
    Finite(f64),
    Inf,
}

impl NormOrder {
    /// Checked constructor for a finite order; rejects p <= 1, NaN and
    /// infinities (use [`NormOrder::Inf`] for the max norm).
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 {
            Ok(NormOrder::Finite(p))
        } else {
            Err(Error::InvalidInput(format!(
                "norm order must be finite and > 1, got {p}"
            )))
        }
    }

    fn validate(self) -> Result<Self> {
        match self {
            NormOrder::Finite(p) => NormOrder::finite(p),
            NormOrder::Inf => Ok(NormOrder::Inf),
        }
    }
}

/// Mixed-norm specification: block order `p`, outer order `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedNorm {
    pub p: NormOrder,
    pub q: NormOrder,
}

impl MixedNorm {
    pub fn new(p: NormOrder, q: NormOrder) -> Self {
        MixedNorm { p, q }
    }

    /// The (p, INF) norm: max over block p-norms.
    pub fn p_inf(p: f64) -> Result<Self> {
        Ok(MixedNorm { p: NormOrder::finite(p)?, q: NormOrder::Inf })
    }

    /// The (2, 2) norm, equal to the flat 2-norm of the concatenation.
    pub fn two_two() -> Self {
        MixedNorm { p: NormOrder::Finite(2.0), q: NormOrder::Finite(2.0) }
    }
}

/// p-norm of a vector. Scales by the max absolute entry before powering so
/// large exponents neither overflow nor underflow.
pub fn p_norm(x: &DVector<f64>, order: NormOrder) -> Result<f64> {
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite entry {bad} in vector")));
    }
    let order = order.validate()?;
    let max = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    Ok(match order {
        NormOrder::Inf => max,
        NormOrder::Finite(p) => {
            if max == 0.0 {
                0.0
            } else {
                let sum: f64 = x.iter().map(|v| (v.abs() / max).powf(p)).sum();
                max * sum.powf(1.0 / p)
            }
        }
    })
}

/// `m` blocks of equal dimension `n`, one per agent.
#[derive(Clone, Debug, PartialEq)]
pub struct Stacked {
    blocks: Vec<DVector<f64>>,
}

impl Stacked {
    /// At least one block; all blocks the same dimension.
    pub fn new(blocks: Vec<DVector<f64>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput("stacked vector needs at least one block".into()));
        }
        let n = blocks[0].len();
        if n == 0 {
            return Err(Error::InvalidInput("stacked blocks must be non-empty".into()));
        }
        if let Some((i, b)) = blocks.iter().enumerate().find(|(_, b)| b.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "block 0 has dimension {n} but block {i} has dimension {}",
                b.len()
            )));
        }
        Ok(Stacked { blocks })
    }

    /// The consensus vector with every block equal to `block`.
    pub fn uniform(m: usize, block: DVector<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("stacked vector needs at least one block".into()));
        }
        Stacked::new(vec![block; m])
    }

    /// Split a flat slice of length `m * n` into `m` blocks.
    pub fn from_flat(m: usize, n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {m} blocks of dimension {n} ({} entries), got {}",
                m * n,
                data.len()
            )));
        }
        Stacked::new(data.chunks(n).map(DVector::from_row_slice).collect())
    }

    pub fn zeros(m: usize, n: usize) -> Result<Self> {
        Stacked::uniform(m, DVector::zeros(n))
    }

    /// Number of blocks (agents).
    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    /// Dimension of each block.
    pub fn n(&self) -> usize {
        self.blocks[0].len()
    }

    pub fn block(&self, i: usize) -> &DVector<f64> {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[DVector<f64>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<DVector<f64>> {
        self.blocks
    }

    /// Concatenation of the blocks in agent order.
    pub fn flatten(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.m() * self.n());
        for (i, b) in self.blocks.iter().enumerate() {
            out.rows_mut(i * self.n(), self.n()).copy_from(b);
        }
        out
    }

    pub fn mixed_norm(&self, spec: MixedNorm) -> Result<f64> {
        mixed_norm(self, spec)
    }
}

impl std::ops::Sub for &Stacked {
    type Output = Stacked;

    /// Blockwise difference. Panics on shape mismatch — callers subtract
    /// iterates of one scenario, where shapes are equal by construction.
    fn sub(self, rhs: &Stacked) -> Stacked {
        assert_eq!(self.m(), rhs.m(), "stacked subtraction: block count mismatch");
        assert_eq!(self.n(), rhs.n(), "stacked subtraction: block dimension mismatch");
        Stacked {
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Mixed (p, q)-norm: q-norm of the vector of block p-norms. With q = INF
/// this is exactly the float max over block p-norms — no rounding of its own.
pub fn mixed_norm(x: &Stacked, spec: MixedNorm) -> Result<f64> {
    let mut block_norms = DVector::zeros(x.m());
    for (i, b) in x.blocks().iter().enumerate() {
        block_norms[i] = p_norm(b, spec.p)?;
    }
    p_norm(&block_norms, spec.q)
}

/// Whether the p-norm triangle inequality is strict for the pair (u, v):
/// true iff ||u + v||_p < ||u||_p + ||v||_p by a margin greater than 1e-10.
/// For 1 < p < INF, equality holds only when one vector is a nonnegative
/// multiple of the other.
pub fn minkowski_strictness_witness(
    u: &DVector<f64>,
    v: &DVector<f64>,
    p: f64,
) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "minkowski witness: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let order = NormOrder::finite(p)?;
    let lhs = p_norm(&(u + v), order)?;
    let rhs = p_norm(u, order)? + p_norm(v, order)?;
    Ok(lhs < rhs - crate::EPS_STRICT)
}
