//! The map catalog: one of every kind, with its contract probed.
//!
//! Every map in the library is a paracontraction (or at least quasi-
//! nonexpansive) with a stored fixed-point witness, an analytic
//! fixed-set membership oracle, and an evaluation rule. This example
//! builds one map of each kind, evaluates it at a sample point, and runs
//! the sampled strict-decrease probe against its witness.

use nalgebra::{DMatrix, DVector};
use parafix::maps::{
    check_paracontraction, compose, lipschitz_ratio, ConvexSet, NonexpansiveMap, ParaMap, ProxFn,
};
use parafix::sampling::{seeded_rng, vector_in_box};
use parafix::vectorspace::NormOrder;
use parafix::{DEFAULT_SEED, SAMPLE_RADIUS};

fn vec2(a: f64, b: f64) -> DVector<f64> {
    DVector::from_row_slice(&[a, b])
}

fn main() -> parafix::Result<()> {
    let catalog: Vec<(&str, ParaMap)> = vec![
        (
            "halfspace projector",
            ParaMap::projector(ConvexSet::halfspace(vec2(1.0, 0.0), 1.0)?),
        ),
        ("ball projector", ParaMap::projector(ConvexSet::ball(vec2(0.0, 0.0), 2.0)?)),
        (
            "box projector",
            ParaMap::projector(ConvexSet::axis_box(vec2(-1.0, -1.0), vec2(1.0, 1.0))?),
        ),
        (
            "affine solve",
            ParaMap::affine_linear_solve(
                DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
                DVector::from_row_slice(&[1.0]),
            )?,
        ),
        (
            "gradient step",
            ParaMap::gradient_descent(
                DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
                vec2(0.0, 0.0),
                0.5,
                2.0,
            )?,
        ),
        ("soft threshold", ParaMap::proximal(ProxFn::OneNorm { weight: 0.5, dim: 2 })?),
        (
            "averaged reflection",
            ParaMap::averaged(
                NonexpansiveMap::Reflection { set: ConvexSet::ball(vec2(0.0, 0.0), 1.0)? },
                0.5,
            )?,
        ),
        ("linear halving", ParaMap::linear(DMatrix::identity(2, 2) * 0.5)?),
        (
            "composition",
            compose(
                vec![
                    ParaMap::projector(ConvexSet::halfspace(vec2(1.0, 0.0), 1.0)?),
                    ParaMap::projector(ConvexSet::ball(vec2(0.0, 0.0), 2.0)?),
                ],
                vec2(0.0, 0.0),
            )?,
        ),
    ];

    let mut rng = seeded_rng(DEFAULT_SEED);
    let probe = vec2(3.0, -4.0);
    for (name, map) in &catalog {
        // Every map carries a point it fixes; the probe point generally
        // moves, and must move strictly toward the witness.
        let witness = map.witness().clone();
        assert!(map.is_fixed_point(&witness, 1e-9)?);
        let image = map.eval(&probe)?;
        println!(
            "{name:>20}: M(3,-4) = ({:+.4}, {:+.4}),  residual {:.3e},  witness ({:+.2}, {:+.2})",
            image[0],
            image[1],
            map.residual(&probe)?,
            witness[0],
            witness[1],
        );

        let xs: Vec<DVector<f64>> =
            (0..50).map(|_| vector_in_box(&mut rng, &witness, SAMPLE_RADIUS)).collect();
        let report =
            check_paracontraction(map, &xs, std::slice::from_ref(&witness), NormOrder::Finite(2.0))?;
        assert!(report.passed(), "{name} failed the strict-decrease probe");

        // All catalog maps are 1-Lipschitz; the sampled ratio never
        // exceeds one (up to roundoff).
        let pairs: Vec<(DVector<f64>, DVector<f64>)> = (0..20)
            .map(|_| {
                (
                    vector_in_box(&mut rng, &witness, SAMPLE_RADIUS),
                    vector_in_box(&mut rng, &witness, SAMPLE_RADIUS),
                )
            })
            .collect();
        let ratio = lipschitz_ratio(map, &pairs, NormOrder::Finite(2.0))?;
        assert!(ratio <= 1.0 + 1e-12, "{name} sampled expansion ratio {ratio}");
    }
    println!("all {} catalog maps pass the strict-decrease and 1-Lipschitz probes", catalog.len());
    Ok(())
}
