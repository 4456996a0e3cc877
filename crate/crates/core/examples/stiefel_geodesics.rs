//! Geodesics and distances on St(2, ℝ⁵) under both metrics.

use stiefel_actions::sampling::seeded_rng;
use stiefel_actions::stiefel::{distance, geodesic, geodesic_ode, log_map, norm, MetricKind, StiefelPoint};

fn main() -> stiefel_actions::Result<()> {
    let mut rng = seeded_rng(1);
    let y = StiefelPoint::random(5, 2, &mut rng)?;
    let v = y.random_tangent(&mut rng).scaled(0.5);
    for kind in MetricKind::ALL {
        let closed = geodesic(&v, 1.0, kind);
        let ode = geodesic_ode(&v, 1.0, kind, 256)?;
        let target = closed.clone();
        let log = log_map(&y, &target, kind)?;
        println!(
            "{kind:?}: |V| = {:.6}, closed vs ODE = {:.2e}, d(Y, exp V) = {:.6}, |log| = {:.6}",
            norm(&v, kind),
            (closed.frame() - ode.frame()).norm(),
            distance(&y, &target, kind)?,
            norm(&log, kind),
        );
    }
    Ok(())
}
