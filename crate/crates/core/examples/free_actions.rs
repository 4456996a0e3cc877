//! Free isometric actions of ℤ ⊕ ℤ₄ ⊕ ℤ₃ on a truncated l₂(ℤ), the obstruction
//! for repeated primes, and divergence of translation orbits.

use num_complex::Complex64;
use stiefel_actions::actions::{
    build_action, freeness_check, induced_stiefel_action, obstruction_search, orbit_divergence_check, GroupSpec,
    L2Truncation,
};
use stiefel_actions::sampling::seeded_rng;
use stiefel_actions::stiefel::StiefelPoint;

fn main() -> stiefel_actions::Result<()> {
    let trunc = L2Truncation::cyclic(1, 32)?;
    let spec = GroupSpec::from_pairs(1, &[(2, 2), (3, 1)])?;
    let action = build_action(&spec, &trunc)?;
    let cert = freeness_check(&action, false)?;
    println!(
        "ℤ ⊕ ℤ₄ ⊕ ℤ₃: free = {}, torsion gap = {:.3}, sampled displacement = {:.3?}",
        cert.free, cert.min_gap, cert.sampled_min_displacement
    );

    for (prime, dim) in [(2, 2), (2, 3), (3, 3)] {
        let r = obstruction_search(prime, dim)?;
        println!("ℤ{prime} ⊕ ℤ{prime} on ℂ^{dim}: {}/{} diagonal actions have fixed vectors", r.non_free, r.assignments);
    }

    let mut rng = seeded_rng(4);
    let x = trunc.random_supported_unit(8, &mut rng).map(|v| Complex64::new(v, 0.0));
    let g = spec.generator(0)?;
    let orbit = orbit_divergence_check(&action, &g, &x, 15, 1e-3)?;
    println!("orbit of the shift: min_k ‖gᵏx − x‖ = {:.4} at k = {}", orbit.min_distance, orbit.argmin_power);

    let y = StiefelPoint::random(2 * action.dim(), 2, &mut rng)?;
    let moved = induced_stiefel_action(&action, &g, &y)?;
    println!("induced action on St(2, ℝ^{}) moves Y by {:.4}", 2 * action.dim(), moved.chordal_distance(&y));
    Ok(())
}
