//! Hyperbolic models, the ℤ² action by Lorentz matrices, the truncated
//! infinite-dimensional hyperboloid, flat tori and spherical space forms.

use nalgebra::DVector;
use stiefel_actions::actions::L2Truncation;
use stiefel_actions::sampling::{gaussian_vector, seeded_rng};
use stiefel_actions::space_forms::{
    flat_quotient_distance, halfspace_distance, hinfty_action, hinfty_distance, hyperboloid_distance,
    lorentz_residual, sphere_quotient_check, to_hyperboloid, zn_minkowski_matrix, HInftyPoint, HalfSpacePoint,
    Lattice, ScalarGroupSpec,
};

fn main() -> stiefel_actions::Result<()> {
    let mut rng = seeded_rng(6);
    let x = HalfSpacePoint::random(3, &mut rng);
    let y = HalfSpacePoint::random(3, &mut rng);
    println!(
        "half-space {:.12} vs hyperboloid {:.12}",
        halfspace_distance(&x, &y)?,
        hyperboloid_distance(&to_hyperboloid(&x), &to_hyperboloid(&y))?
    );
    let m = zn_minkowski_matrix(&[2, -1]);
    println!("M(2, −1) =\n{m:.4}Lorentz residual {:.1e}", lorentz_residual(&m)?);

    let trunc = L2Truncation::cyclic(1, 32)?;
    let z = HInftyPoint::from_blocks(trunc.random_supported_unit(4, &mut rng) * 0.5, gaussian_vector(2, &mut rng));
    for k in [1, 5, 15] {
        let moved = hinfty_action(&[k], &z, &trunc)?;
        println!("ℍ∞: d(z, {k}·z) = {:.6}", hinfty_distance(&z, &moved)?);
    }

    let torus = Lattice::random(3, 2, &mut rng)?;
    let a = gaussian_vector(3, &mut rng);
    let b = &a + torus.point(&[3, -2]) + DVector::from_vec(vec![0.0, 0.0, 0.25]);
    println!("flat quotient distance {:.12}", flat_quotient_distance(&torus, &a, &b)?);

    for (name, spec, dim) in [
        ("ℝP²", ScalarGroupSpec::real_sign(), 3),
        ("L(5; 1, 1)", ScalarGroupSpec::complex_cyclic(5)?, 2),
        ("S³/Q₈", ScalarGroupSpec::quaternion_q8(), 1),
    ] {
        let c = sphere_quotient_check(&spec, dim, 64, 7)?;
        println!("{name}: order {}, free {}, Clifford {}", c.order, c.free, c.clifford);
    }
    Ok(())
}
