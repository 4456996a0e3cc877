//! Displacement functions: a scalar phase on S(ℂ³) is a Clifford translation,
//! a horizontal translation of the half-space is not.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use stiefel_actions::linalg::realify_operator;
use stiefel_actions::metric_space::{clifford_detector, invariant_geodesic, UnitSphere};
use stiefel_actions::sampling::{random_unit_vector, seeded_rng};
use stiefel_actions::space_forms::{zn_halfspace_action, HalfSpaceModel, HalfSpacePoint};

fn main() -> stiefel_actions::Result<()> {
    let mut rng = seeded_rng(5);
    let sphere = UnitSphere { dim: 6 };
    let phase = realify_operator(&(DMatrix::<Complex64>::identity(3, 3) * Complex64::from_polar(1.0, 0.7)));
    let f = |x: &DVector<f64>| Ok(&phase * x);
    let df = |_: &DVector<f64>, v: &DVector<f64>| Ok(&phase * v);
    let points: Vec<_> = (0..100).map(|_| random_unit_vector(6, &mut rng)).collect();
    let verdict = clifford_detector(&sphere, &f, &points, 1e-9)?;
    println!(
        "phase e^{{0.7i}}: Clifford = {}, displacement {:.12} ± {:.1e}",
        verdict.clifford,
        verdict.profile.mean,
        verdict.profile.spread()
    );
    let report = invariant_geodesic(&sphere, &f, &df, &points[0], &verdict)?;
    println!(
        "invariant geodesic: length {:.6}, velocity mismatch {:.1e}",
        report.length, report.velocity_residual
    );

    let heights = [0.5, 1.0, 2.0, 4.0];
    let samples = heights
        .iter()
        .map(|&h| HalfSpacePoint::from_parts(&[0.0, 0.0], h))
        .collect::<stiefel_actions::Result<Vec<_>>>()?;
    let shift = |x: &HalfSpacePoint| zn_halfspace_action(&[1, 0], x);
    let verdict = clifford_detector(&HalfSpaceModel, &shift, &samples, 1e-9)?;
    println!("half-space translation: Clifford = {}, displacements {:?}", verdict.clifford, verdict.profile.values);
    Ok(())
}
