//! Holomorphic sectional curvature on complex Grassmannians Gr(p, ℂ^{2p+2}).

use stiefel_actions::kaehler::{holomorphic_sectional_curvature, kaehler_triple, ComplexGrassmannPoint};
use stiefel_actions::sampling::seeded_rng;

fn main() -> stiefel_actions::Result<()> {
    let mut rng = seeded_rng(3);
    for p in 1..=3 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for _ in 0..500 {
            let x = ComplexGrassmannPoint::random(2 * p + 2, p, &mut rng)?;
            let k = holomorphic_sectional_curvature(&x.random_horizontal(&mut rng))?;
            lo = lo.min(k);
            hi = hi.max(k);
        }
        println!("p = {p}: sampled range [{lo:.4}, {hi:.4}] inside [{:.4}, 2]", 2.0 / p as f64);
    }
    let x = ComplexGrassmannPoint::random(4, 1, &mut rng)?;
    let xi = x.random_horizontal(&mut rng);
    let triple = kaehler_triple(xi.direction(), xi.rotated().direction())?;
    println!("⟨X, JX⟩ = {:.2e}, ω(X, JX) = {:.6}", triple.real_part, triple.omega_part);
    Ok(())
}
