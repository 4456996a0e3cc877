//! Principal angles, the exponential/logarithm pair and the geodesic
//! involution on Gr(2, ℝ⁶).

use stiefel_actions::grassmann::{
    grassmann_distance, grassmann_geodesic, grassmann_log, involution, principal_angles, GrassmannPoint,
};
use stiefel_actions::sampling::seeded_rng;

fn main() -> stiefel_actions::Result<()> {
    let mut rng = seeded_rng(2);
    let x = GrassmannPoint::random(6, 2, &mut rng)?;
    let y = GrassmannPoint::random(6, 2, &mut rng)?;
    println!("principal angles {:?}", principal_angles(&x, &y)?);
    let xi = grassmann_log(&x, &y)?;
    let d = grassmann_distance(&x, &y)?;
    println!("d(x, y) = {d:.9}, |log_x y| = {:.9}", xi.norm());
    let midpoint = grassmann_geodesic(&xi, 0.5);
    println!(
        "midpoint distances {:.9} + {:.9}",
        grassmann_distance(&x, &midpoint)?,
        grassmann_distance(&midpoint, &y)?
    );
    let reflected = involution(&midpoint, &x)?;
    println!("σ_mid(x) = y up to {:.2e}", reflected.projector_distance(&y));
    Ok(())
}
