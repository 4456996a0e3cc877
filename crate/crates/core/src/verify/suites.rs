//! The registered suites. Each suite samples from its own streams, feeds the
//! worst case of every check into a [`Tracker`] and regenerates the inputs of
//! the tightest check as the witness.

use std::f64::consts::{E, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use super::{finish, matrix_json, par_trials, stream_rng, ResolvedConfig, SuiteInfo, SuiteOutcome, Tracker};
use crate::actions::{
    build_action, freeness_check, induced_stiefel_action, obstruction_search, orbit_divergence_check,
    torsion_scalar_action, GroupSpec, L2Truncation, LinearIsometryAction,
};
use crate::error::{GeomError, Result};
use crate::grassmann::{
    grassmann_distance, grassmann_embed, grassmann_geodesic, grassmann_log, horizontal_project, involution,
    push_horizontal, submersion_metric, submersion_metric_canonical, GrassmannPoint, HorizontalAtGrassmann,
};
use crate::kaehler::{
    holomorphic_sectional_curvature, holomorphic_sectional_curvature_raw, jacobi_curvature_estimate as kaehler_jacobi,
    ComplexGrassmannPoint, ComplexHorizontal,
};
use crate::linalg::{realify, realify_operator};
use crate::metric_space::{clifford_detector, invariant_geodesic, UnitSphere};
use crate::sampling::{gaussian_vector, random_complex_frame, random_frame, random_unit_vector, SeededRng};
use crate::space_forms::{
    flat_quotient_distance, halfspace_distance, hinfty_action, hinfty_distance, hyperboloid_distance,
    lorentz_residual, sphere_quotient_check, to_halfspace, to_hyperboloid, zn_halfspace_action,
    zn_minkowski_matrix, HInftyPoint, HalfSpaceModel, HalfSpacePoint, Lattice, ScalarGroupSpec,
};
use crate::stiefel::{
    self, embed_isometric, geodesic, geodesic_ode, geodesic_with_velocity, jacobi_curvature_estimate,
    push_tangent, sectional_curvature_canonical, MetricKind, StiefelPoint, TangentAtStiefel,
};

/// Default for a dimension the suite sweeps over unless it is overridden.
pub(super) const SWEEP: usize = usize::MAX;

pub(super) static REGISTRY: &[SuiteInfo] = &[
    SuiteInfo {
        name: "metric-bounds",
        anchor: "canonical metric is norm-equivalent to the Euclidean one: ½⟨V,V⟩ ≤ g_Y(V,V) = ⟨V,V⟩ − ½‖YᵗV‖² ≤ ⟨V,V⟩",
        dims: &[("n", 10), ("p", 3)],
        trials: 10_000,
        tolerances: &[("bound", 1e-12), ("identity", 1e-12)],
        run: metric_bounds,
    },
    SuiteInfo {
        name: "geodesic-crossval",
        anchor: "closed-form Stiefel geodesics solve the geodesic equation of each metric at constant speed",
        dims: &[("n", 5), ("p", 2)],
        trials: 200,
        tolerances: &[("crossval", 1e-6), ("speed", 1e-8)],
        run: geodesic_crossval,
    },
    SuiteInfo {
        name: "totally-geodesic",
        anchor: "St(p, ℝⁿ) ⊂ St(p, ℝ²ⁿ) and Gr(p, ℝⁿ) ⊂ Gr(p, ℝ²ⁿ) are totally geodesic",
        dims: &[("n", 4), ("p", 2)],
        trials: 100,
        tolerances: &[("residual", 1e-9)],
        run: totally_geodesic,
    },
    SuiteInfo {
        name: "grassmann-hopfrinow",
        anchor: "any two subspaces below the cut locus are joined by a minimal geodesic exp_x(log_x y) = y",
        dims: &[("n", 8), ("p", 2)],
        trials: 500,
        tolerances: &[("roundtrip", 1e-8)],
        run: grassmann_hopfrinow,
    },
    SuiteInfo {
        name: "submersion",
        anchor: "St → Gr is a Riemannian submersion: horizontal metrics agree and horizontal geodesics project to geodesics",
        dims: &[("n", 6), ("p", 2)],
        trials: 200,
        tolerances: &[("metric", 1e-12), ("lift", 1e-9)],
        run: submersion,
    },
    SuiteInfo {
        name: "involution",
        anchor: "σ_W = 2P_W − I is an isometric involution of Gr fixing W with differential −Id at W",
        dims: &[("n", 6), ("p", 2)],
        trials: 200,
        tolerances: &[("involution", 1e-9)],
        run: involution_suite,
    },
    SuiteInfo {
        name: "curvature-sign",
        anchor: "canonical Stiefel sectional curvature is nonnegative and nonconstant for p ≥ 2",
        dims: &[("n", SWEEP), ("p", SWEEP)],
        trials: 1_000,
        tolerances: &[("sign", 1e-9), ("spread", 0.05), ("jacobi", 5e-3)],
        run: curvature_sign,
    },
    SuiteInfo {
        name: "kaehler-bounds",
        anchor: "holomorphic sectional curvature of the complex Grassmannian lies in [2/p, 2]",
        dims: &[("p", SWEEP)],
        trials: 1_000,
        tolerances: &[("bound", 5e-3), ("jacobi", 5e-3)],
        run: kaehler_bounds,
    },
    SuiteInfo {
        name: "action-freeness",
        anchor: "ℤᵏ ⊕ torsion with distinct primes acts freely by isometries of l₂ and of the induced Stiefel manifold",
        dims: &[("k", 1), ("p", 2), ("window_radius", 8)],
        trials: 100,
        tolerances: &[("gap", 1e-8), ("floor", 1e-3)],
        run: action_freeness,
    },
    SuiteInfo {
        name: "torsion-obstruction",
        anchor: "a torsion group acts freely on a unit sphere only if its primary parts have distinct primes",
        dims: &[("n", 2)],
        trials: 1,
        tolerances: &[("gap", 1e-8)],
        run: torsion_obstruction,
    },
    SuiteInfo {
        name: "orbit-divergence",
        anchor: "orbits of an infinite-order translation on l₂ never return near the start",
        dims: &[("window_radius", 32)],
        trials: 100,
        tolerances: &[("floor", 1e-3)],
        run: orbit_divergence,
    },
    SuiteInfo {
        name: "clifford",
        anchor: "scalar unit multiplications are Clifford translations of spheres; hyperbolic translations are not",
        dims: &[("n", 3)],
        trials: 100,
        tolerances: &[("spread", 1e-9), ("separation", 0.1), ("velocity", 1e-8)],
        run: clifford,
    },
    SuiteInfo {
        name: "hyperbolic-models",
        anchor: "half-space and hyperboloid models are isometric and ℤⁿ translations are Lorentz transformations",
        dims: &[("n", 2)],
        trials: 1_000,
        tolerances: &[("crossmodel", 1e-9), ("unit", 1e-12), ("lorentz", 1e-10), ("group_law", 1e-9)],
        run: hyperbolic_models,
    },
    SuiteInfo {
        name: "hinfty-action",
        anchor: "ℤⁿ acts on the infinite-dimensional hyperboloid by translation on l₂ and Lorentz maps on the rest",
        dims: &[("n", 1), ("window_radius", 16)],
        trials: 100,
        tolerances: &[("constraint", 1e-10), ("floor", 1e-9), ("reduction", 1e-9)],
        run: hinfty_suite,
    },
    SuiteInfo {
        name: "flat-quotient",
        anchor: "ℝⁿ/Γ with the orbit distance is a metric space vanishing exactly on orbits",
        dims: &[("n", 4), ("k", SWEEP)],
        trials: 1_000,
        tolerances: &[("axioms", 1e-12), ("brute", 1e-12)],
        run: flat_quotient,
    },
    SuiteInfo {
        name: "sphere-quotient",
        anchor: "finite unit-scalar groups of ℝ, ℂ, ℍ act freely by Clifford translations on spheres",
        dims: &[],
        trials: 100,
        tolerances: &[("gap", 1e-8), ("spread", 1e-9)],
        run: sphere_quotient,
    },
];

fn stiefel_json(y: &StiefelPoint, v: Option<&TangentAtStiefel>) -> Value {
    json!({
        "frame": matrix_json(y.frame()),
        "velocity": v.map(|v| matrix_json(v.direction())),
    })
}

/// Tangent vector with Frobenius norm uniform in `[0.1, max_norm]`.
fn random_scaled_tangent(y: &StiefelPoint, max_norm: f64, rng: &mut SeededRng) -> TangentAtStiefel {
    let v = y.random_tangent(rng);
    let target = rng.random_range(0.1..max_norm);
    v.scaled(target / v.direction().norm())
}

fn sample_stiefel(n: usize, p: usize, max_norm: f64, rng: &mut SeededRng) -> Result<TangentAtStiefel> {
    let y = StiefelPoint::random(n, p, rng)?;
    Ok(random_scaled_tangent(&y, max_norm, rng))
}

fn metric_bounds(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let (n, p) = (cfg.dim("n"), cfg.dim("p"));
    let rows = par_trials(cfg.seed, 0, cfg.trials, |rng| {
        let v = sample_stiefel(n, p, 2.0, rng)?;
        let y = v.base().frame();
        let euclid = v.direction().norm_squared();
        let g = stiefel::metric(v.base(), &v, &v, MetricKind::Canonical)?;
        let vertical = (y.transpose() * v.direction()).norm_squared();
        Ok([0.5 * euclid - g, g - euclid, (g - (euclid - 0.5 * vertical)).abs()])
    })?;
    let mut lower = Tracker::at_most("lower_bound", cfg.tol("bound"));
    let mut upper = Tracker::at_most("upper_bound", cfg.tol("bound"));
    let mut identity = Tracker::at_most("identity", cfg.tol("identity"));
    for (t, r) in rows.iter().enumerate() {
        lower.observe(r[0], Some(t as u64));
        upper.observe(r[1], Some(t as u64));
        identity.observe(r[2], Some(t as u64));
    }
    Ok(finish(&[lower, upper, identity], |_, trial| {
        let t = trial.unwrap_or(0);
        match sample_stiefel(n, p, 2.0, &mut stream_rng(cfg.seed, 0, t)) {
            Ok(v) => stiefel_json(v.base(), Some(&v)),
            Err(e) => json!(e.to_string()),
        }
    }))
}

const ODE_STEPS: usize = 256;

fn geodesic_crossval(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let (n, p) = (cfg.dim("n"), cfg.dim("p"));
    let rows = par_trials(cfg.seed, 0, cfg.trials, |rng| {
        let v = sample_stiefel(n, p, 2.0, rng)?;
        let mut out = Vec::with_capacity(4);
        for kind in MetricKind::ALL {
            let closed = geodesic(&v, 1.0, kind);
            let ode = geodesic_ode(&v, 1.0, kind, ODE_STEPS)?;
            out.push((closed.frame() - ode.frame()).norm());
            let s0 = stiefel::norm(&v, kind);
            let drift = [0.5, 1.0, 1.5, 2.0]
                .iter()
                .map(|&t| (stiefel::norm(&geodesic_with_velocity(&v, t, kind), kind) - s0).abs())
                .fold(0.0, f64::max);
            out.push(drift);
        }
        Ok(out)
    })?;
    let mut trackers = vec![
        Tracker::at_most("euclidean_gap", cfg.tol("crossval")),
        Tracker::at_most("euclidean_speed_drift", cfg.tol("speed")),
        Tracker::at_most("canonical_gap", cfg.tol("crossval")),
        Tracker::at_most("canonical_speed_drift", cfg.tol("speed")),
    ];
    for (t, r) in rows.iter().enumerate() {
        for (tracker, &value) in trackers.iter_mut().zip(r) {
            tracker.observe(value, Some(t as u64));
        }
    }
    Ok(finish(&trackers, |_, trial| {
        match sample_stiefel(n, p, 2.0, &mut stream_rng(cfg.seed, 0, trial.unwrap_or(0))) {
            Ok(v) => stiefel_json(v.base(), Some(&v)),
            Err(e) => json!(e.to_string()),
        }
    }))
}

fn totally_geodesic(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let (n, p) = (cfg.dim("n"), cfg.dim("p"));
    let times: Vec<f64> = (0..=8).map(|i| i as f64 / 4.0).collect();
    let sample = |rng: &mut SeededRng| -> Result<(DMatrix<f64>, TangentAtStiefel, HorizontalAtGrassmann)> {
        let l = random_frame(2 * n, n, rng);
        let v = sample_stiefel(n, p, 2.0, rng)?;
        let x = GrassmannPoint::random(n, p, rng)?;
        let xi = x.random_horizontal(rng);
        Ok((l, v, xi))
    };
    let rows = par_trials(cfg.seed, 0, cfg.trials, |rng| {
        let (l, v, xi) = sample(rng)?;
        let complement = DMatrix::identity(2 * n, 2 * n) - &l * l.transpose();
        let big_v = push_tangent(&l, &v)?;
        let mut out = Vec::with_capacity(3);
        for kind in MetricKind::ALL {
            let worst = times
                .iter()
                .map(|&t| (&complement * geodesic(&big_v, t, kind).frame()).norm())
                .fold(0.0, f64::max);
            out.push(worst);
        }
        let big_xi = push_horizontal(&l, &xi)?;
        let worst = times
            .iter()
            .map(|&t| (&complement * grassmann_geodesic(&big_xi, t).basis()).norm())
            .fold(0.0, f64::max);
        out.push(worst);
        // the embedded base point itself must match the pushed tangent
        let embedded = embed_isometric(&l, v.base())?;
        out[0] = out[0].max((embedded.frame() - big_v.base().frame()).norm());
        let embedded_x = grassmann_embed(&l, xi.base())?;
        out[2] = out[2].max(embedded_x.projector_distance(big_xi.base()));
        Ok(out)
    })?;
    let tol = cfg.tol("residual");
    let mut trackers = vec![
        Tracker::at_most("stiefel_euclidean_residual", tol),
        Tracker::at_most("stiefel_canonical_residual", tol),
        Tracker::at_most("grassmann_residual", tol),
    ];
    for (t, r) in rows.iter().enumerate() {
        for (tracker, &value) in trackers.iter_mut().zip(r) {
            tracker.observe(value, Some(t as u64));
        }
    }
    Ok(finish(&trackers, |_, trial| match sample(&mut stream_rng(cfg.seed, 0, trial.unwrap_or(0))) {
        Ok((l, v, xi)) => json!({
            "embedding": matrix_json(&l),
            "stiefel": stiefel_json(v.base(), Some(&v)),
            "grassmann_basis": matrix_json(xi.base().basis()),
            "grassmann_direction": matrix_json(xi.direction()),
        }),
        Err(e) => json!(e.to_string()),
    }))
}

/// Random pair strictly below the cut locus, resampling the second point.
fn sample_grassmann_pair(n: usize, p: usize, rng: &mut SeededRng) -> Result<(GrassmannPoint, GrassmannPoint)> {
    let x = GrassmannPoint::random(n, p, rng)?;
    for _ in 0..100 {
        let y = GrassmannPoint::random(n, p, rng)?;
        match grassmann_log(&x, &y) {
            Ok(_) => return Ok((x, y)),
            Err(GeomError::CutLocus { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GeomError::InvalidArgument("no pair below the cut locus in 100 draws".into()))
}

fn grassmann_hopfrinow(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let (n, p) = (cfg.dim("n"), cfg.dim("p"));
    let rows = par_trials(cfg.seed, 0, cfg.trials, |rng| {
        let (x, y) = sample_grassmann_pair(n, p, rng)?;
        let xi = grassmann_log(&x, &y)?;
        let d = grassmann_distance(&x, &y)?;
        Ok([grassmann_distance(&grassmann_geodesic(&xi, 1.0), &y)?, (xi.norm() - d).abs()])
    })?;
    let mut roundtrip = Tracker::at_most("roundtrip", cfg.tol("roundtrip"));
    let mut length = Tracker::at_most("log_length", cfg.tol("roundtrip"));
    for (t, r) in rows.iter().enumerate() {
        roundtrip.observe(r[0], Some(t as u64));
        length.observe(r[1], Some(t as u64));
    }
    Ok(finish(&[roundtrip, length], |_, trial| {
        match sample_grassmann_pair(n, p, &mut stream_rng(cfg.seed, 0, trial.unwrap_or(0))) {
            Ok((x, y)) => json!({"x": matrix_json(x.basis()), "y": matrix_json(y.basis())}),
            Err(e) => json!(e.to_string()),
        }
    }))
}

fn submersion(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let (n, p) = (cfg.dim("n"), cfg.dim("p"));
    let sample = |rng: &mut SeededRng| -> Result<(StiefelPoint, HorizontalAtGrassmann)> {
        let v = sample_stiefel(n, p, 2.0, rng)?;
        let h = horizontal_project(v.base(), &v)?;
        Ok((v.base().clone(), h))
    };
    let rows = par_trials(cfg.seed, 0, cfg.trials, |rng| {
        let (y, h) = sample(rng)?;
        let x = h.base();
        let lifted = h.to_stiefel()?;
        let quotient = submersion_metric(x, &h, &h)?;
        let mut metric_gap = (quotient - submersion_metric_canonical(x, &h, &h)?).abs();
        for kind in MetricKind::ALL {
            metric_gap = metric_gap.max((stiefel::metric(lifted.base(), &lifted, &lifted, kind)? - quotient).abs());
        }
        let vertical = (y.frame().transpose() * h.direction()).norm();
        let mut lift_gap: f64 = 0.0;
        for kind in MetricKind::ALL {
            for t in [0.5, 1.0, 1.5] {
                let upstairs = GrassmannPoint::from_stiefel(&geodesic(&lifted, t, kind));
                lift_gap = lift_gap.max(upstairs.projector_distance(&grassmann_geodesic(&h, t)));
            }
        }
        Ok([metric_gap, vertical, lift_gap])
    })?;
    let mut trackers = vec![
        Tracker::at_most("metric_gap", cfg.tol("metric")),
        Tracker::at_most("horizontality", cfg.tol("metric")),
        Tracker::at_most("geodesic_lift", cfg.tol("lift")),
    ];
    for (t, r) in rows.iter().enumerate() {
        for (tracker, &value) in trackers.iter_mut().zip(r) {
            tracker.observe(value, Some(t as u64));
        }
    }
    Ok(finish(&trackers, |_, trial| match sample(&mut stream_rng(cfg.seed, 0, trial.unwrap_or(0))) {
        Ok((y, h)) => json!({"frame": matrix_json(y.frame()), "horizontal": matrix_json(h.direction())}),
        Err(e) => json!(e.to_string()),
    }))
}

fn involution_suite(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let (n, p) = (cfg.dim("n"), cfg.dim("p"));
    let h = 1e-3;
    let sample = |rng: &mut SeededRng| -> Result<(GrassmannPoint, GrassmannPoint, GrassmannPoint, HorizontalAtGrassmann)> {
        let w = GrassmannPoint::random(n, p, rng)?;
        let x = GrassmannPoint::random(n, p, rng)?;
        let y = GrassmannPoint::random(n, p, rng)?;
        let xi = w.random_horizontal(rng);
        Ok((w, x, y, xi))
    };
    let rows = par_trials(cfg.seed, 0, cfg.trials, |rng| {
        let (w, x, y, xi) = sample(rng)?;
        let sx = involution(&w, &x)?;
        let twice = involution(&w, &sx)?.projector_distance(&x);
        let fixed = involution(&w, &w)?.projector_distance(&w);
        let isometry = (grassmann_distance(&sx, &involution(&w, &y)?)? - grassmann_distance(&x, &y)?).abs();
        let forward = involution(&w, &grassmann_geodesic(&xi, h))?;
        let differential = forward.projector_distance(&grassmann_geodesic(&xi.scaled(-1.0), h));
        Ok([twice, fixed, isometry, differential])
    })?;
    let tol = cfg.tol("involution");
    let mut trackers = vec![
        Tracker::at_most("involutive", tol),
        Tracker::at_most("fixes_w", tol),
        Tracker::at_most("isometry", tol),
        Tracker::at_most("differential", tol),
    ];
    for (t, r) in rows.iter().enumerate() {
        for (tracker, &value) in trackers.iter_mut().zip(r) {
            tracker.observe(value, Some(t as u64));
        }
    }
    Ok(finish(&trackers, |_, trial| match sample(&mut stream_rng(cfg.seed, 0, trial.unwrap_or(0))) {
        Ok((w, x, y, xi)) => json!({
            "w": matrix_json(w.basis()),
            "x": matrix_json(x.basis()),
            "y": matrix_json(y.basis()),
            "xi": matrix_json(xi.direction()),
        }),
        Err(e) => json!(e.to_string()),
    }))
}

const CURVATURE_CASES: [(usize, usize); 3] = [(2, 4), (2, 6), (3, 6)];
const JACOBI_PLANES: u64 = 50;

fn sample_plane(n: usize, p: usize, rng: &mut SeededRng) -> Result<(TangentAtStiefel, TangentAtStiefel)> {
    let y = StiefelPoint::random(n, p, rng)?;
    let v = y.random_tangent(rng);
    let w = y.random_tangent(rng);
    Ok((v, w))
}

fn curvature_sign(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let cases: Vec<(usize, usize)> = match (cfg.dim_override("p"), cfg.dim_override("n")) {
        (Some(p), Some(n)) => vec![(p, n)],
        (Some(p), None) => vec![(p, 2 * p + 2)],
        (None, Some(n)) => vec![(2, n)],
        (None, None) => CURVATURE_CASES.to_vec(),
    };
    let mut trackers = Vec::new();
    let mut streams = Vec::new();
    for (stream, &(p, n)) in cases.iter().enumerate() {
        let stream = stream as u64;
        let values = par_trials(cfg.seed, 2 * stream, cfg.trials, |rng| {
            let (v, w) = sample_plane(n, p, rng)?;
            sectional_curvature_canonical(&v, &w)
        })?;
        let mut sign = Tracker::at_least(format!("min_curvature_p{p}_n{n}"), -cfg.tol("sign"));
        sign.observe_all(values.iter().copied());
        let mut spread = Tracker::at_least(format!("spread_p{p}_n{n}"), cfg.tol("spread"));
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        spread.observe(max - min, None);
        let gaps = par_trials(cfg.seed, 2 * stream + 1, JACOBI_PLANES.min(cfg.trials), |rng| {
            let (v, w) = sample_plane(n, p, rng)?;
            Ok((sectional_curvature_canonical(&v, &w)? - jacobi_curvature_estimate(&v, &w, MetricKind::Canonical)?).abs())
        })?;
        let mut jacobi = Tracker::at_most(format!("jacobi_gap_p{p}_n{n}"), cfg.tol("jacobi"));
        jacobi.observe_all(gaps);
        for t in [sign, spread, jacobi] {
            trackers.push(t);
            streams.push((p, n, stream));
        }
    }
    Ok(finish(&trackers, |id, trial| {
        let index = trackers.iter().position(|t| t.record().id == id).unwrap_or(0);
        let (p, n, stream) = streams[index];
        let sub = if id.starts_with("jacobi") { 2 * stream + 1 } else { 2 * stream };
        match trial.map(|t| sample_plane(n, p, &mut stream_rng(cfg.seed, sub, t))) {
            Some(Ok((v, w))) => json!({
                "frame": matrix_json(v.base().frame()),
                "v": matrix_json(v.direction()),
                "w": matrix_json(w.direction()),
            }),
            Some(Err(e)) => json!(e.to_string()),
            None => json!({"p": p, "n": n, "planes": cfg.trials}),
        }
    }))
}

const KAEHLER_RANKS: [usize; 3] = [1, 2, 3];
const KAEHLER_JACOBI_SAMPLES: u64 = 20;

fn sample_holomorphic(p: usize, rng: &mut SeededRng) -> Result<ComplexHorizontal> {
    let x = ComplexGrassmannPoint::random(2 * p + 2, p, rng)?;
    Ok(x.random_horizontal(rng))
}

fn kaehler_bounds(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let ranks: Vec<usize> = cfg.dim_override("p").map_or(KAEHLER_RANKS.to_vec(), |p| vec![p]);
    let tol = cfg.tol("bound");
    let mut trackers = Vec::new();
    let mut origin = Vec::new();
    for (stream, &p) in ranks.iter().enumerate() {
        let stream = stream as u64;
        let values = par_trials(cfg.seed, 2 * stream, cfg.trials, |rng| {
            holomorphic_sectional_curvature(&sample_holomorphic(p, rng)?)
        })?;
        let mut lower = Tracker::at_least(format!("lower_p{p}"), 2.0 / p as f64 - tol);
        lower.observe_all(values.iter().copied());
        let mut upper = Tracker::at_most(format!("upper_p{p}"), 2.0 + tol);
        upper.observe_all(values.iter().copied());
        trackers.extend([lower, upper]);
        origin.extend([2 * stream, 2 * stream]);
        if p == 1 {
            let mut constant = Tracker::at_most("projective_constant", tol);
            constant.observe_all(values.iter().map(|k| (k - 2.0).abs()));
            trackers.push(constant);
            origin.push(2 * stream);
        }
        let gaps = par_trials(cfg.seed, 2 * stream + 1, KAEHLER_JACOBI_SAMPLES.min(cfg.trials), |rng| {
            let xi = sample_holomorphic(p, rng)?;
            let raw = holomorphic_sectional_curvature_raw(&xi)?;
            Ok((raw - kaehler_jacobi(&xi, &xi.rotated())?).abs())
        })?;
        let mut jacobi = Tracker::at_most(format!("jacobi_gap_p{p}"), cfg.tol("jacobi"));
        jacobi.observe_all(gaps);
        trackers.push(jacobi);
        origin.push(2 * stream + 1);
    }
    Ok(finish(&trackers, |id, trial| {
        let index = trackers.iter().position(|t| t.record().id == id).unwrap_or(0);
        let stream = origin[index];
        let p = ranks[(stream / 2) as usize];
        match sample_holomorphic(p, &mut stream_rng(cfg.seed, stream, trial.unwrap_or(0))) {
            Ok(xi) => json!({
                "basis": matrix_json(&realify(xi.base().basis())),
                "direction": matrix_json(&realify(xi.direction())),
                "layout": "realified, rows interleave real and imaginary parts",
            }),
            Err(e) => json!(e.to_string()),
        }
    }))
}

/// `ℤᵏ ⊕ ℤ₄ ⊕ ℤ₃`.
fn freeness_group(k: usize) -> Result<GroupSpec> {
    GroupSpec::from_pairs(k, &[(2, 2), (3, 1)])
}

fn action_freeness(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let (k, p, radius) = (cfg.dim("k"), cfg.dim("p"), cfg.dim("window_radius"));
    let trunc = L2Truncation::cyclic(k, 2 * radius)?;
    let spec = freeness_group(k)?;
    let action = build_action(&spec, &trunc)?;
    let cert = freeness_check(&action, false)?;
    let mut gap = Tracker::at_least("torsion_gap", cfg.tol("gap"));
    gap.observe(cert.min_gap, None);
    let mut sampled = Tracker::at_least("free_displacement", cfg.tol("floor"));
    sampled.observe(cert.sampled_min_displacement.unwrap_or(f64::NAN), None);

    // ℤ₂ ⊕ ℤ₂ acting by scalars must be caught: (1, 1) acts trivially
    let control = freeness_check(&scalar_torsion_action(&[(2, 1), (2, 1)], action.dim())?, true)?;
    let mut detects = Tracker::at_most("repeated_prime_gap", cfg.tol("gap"));
    detects.observe(control.min_gap, None);

    let elements = induced_elements(&spec)?;
    let real_dim = 2 * action.dim();
    let displacements = par_trials(cfg.seed, 0, cfg.trials, |rng| {
        let y = StiefelPoint::random(real_dim, p, rng)?;
        elements.iter().try_fold(f64::INFINITY, |acc, g| {
            Ok(acc.min(induced_stiefel_action(&action, g, &y)?.chordal_distance(&y)))
        })
    })?;
    let mut induced = Tracker::at_least("induced_stiefel_displacement", cfg.tol("floor"));
    induced.observe_all(displacements);
    Ok(finish(&[gap, sampled, detects, induced], |id, trial| match (id, trial) {
        ("induced_stiefel_displacement", Some(t)) => {
            match StiefelPoint::random(real_dim, p, &mut stream_rng(cfg.seed, 0, t)) {
                Ok(y) => json!({"frame": matrix_json(y.frame())}),
                Err(e) => json!(e.to_string()),
            }
        }
        _ => json!({"free_rank": k, "torsion": [4, 3], "window_width": 2 * radius}),
    }))
}

/// Nontrivial torsion elements and `±eᵢ + τ` for every free generator.
fn induced_elements(spec: &GroupSpec) -> Result<Vec<crate::actions::GroupElement>> {
    let torsion = spec.torsion_elements()?;
    let mut out: Vec<_> = torsion.iter().filter(|g| !g.is_identity()).cloned().collect();
    for i in 0..spec.free_rank() {
        for sign in [1, -1] {
            for tau in &torsion {
                let mut g = tau.clone();
                g.free_part[i] = sign;
                out.push(g);
            }
        }
    }
    Ok(out)
}

fn scalar_torsion_action(pairs: &[(u64, u32)], dim: usize) -> Result<LinearIsometryAction> {
    let spec = GroupSpec::from_pairs(0, pairs)?;
    let images = pairs
        .iter()
        .map(|&(prime, exponent)| torsion_scalar_action(prime, exponent, dim))
        .collect::<Result<Vec<_>>>()?;
    LinearIsometryAction::new(spec, images, None)
}

fn torsion_obstruction(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let mut trackers = Vec::new();
    for (prime, dim) in [(2, 2), (2, 3), (3, 3)] {
        let report = obstruction_search(prime, dim)?;
        let mut t = Tracker::at_least(format!("non_free_fraction_z{prime}z{prime}_c{dim}"), 1.0);
        t.observe(report.non_free as f64 / report.assignments as f64, None);
        trackers.push(t);
    }
    let n = cfg.dim("n");
    for (label, pairs) in [
        ("z4", &[(2, 2)][..]),
        ("z2z3", &[(2, 1), (3, 1)][..]),
        ("z2z9", &[(2, 1), (3, 2)][..]),
    ] {
        let cert = freeness_check(&scalar_torsion_action(pairs, n)?, true)?;
        let mut t = Tracker::at_least(format!("scalar_gap_{label}"), cfg.tol("gap"));
        t.observe(cert.min_gap, None);
        trackers.push(t);
    }
    Ok(finish(&trackers, |id, _| json!({"check": id, "scalar_dim": n})))
}

fn orbit_divergence(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let radius = cfg.dim("window_radius");
    if radius < 2 {
        return Err(GeomError::InvalidArgument("window radius must be at least 2".into()));
    }
    let trunc = L2Truncation::cyclic(1, 2 * radius)?;
    let spec = GroupSpec::from_pairs(1, &[])?;
    let action = build_action(&spec, &trunc)?;
    let g = spec.generator(0)?;
    let floor = cfg.tol("floor");
    let sample = |rng: &mut SeededRng| trunc.random_supported_unit(radius / 2, rng).map(|v| Complex64::new(v, 0.0));
    let values = par_trials(cfg.seed, 0, cfg.trials, |rng| {
        Ok(orbit_divergence_check(&action, &g, &sample(rng), radius - 1, floor)?.min_distance)
    })?;
    let mut t = Tracker::at_least("min_orbit_distance", floor);
    t.observe_all(values);
    Ok(finish(&[t], |_, trial| {
        let x = sample(&mut stream_rng(cfg.seed, 0, trial.unwrap_or(0)));
        json!({"window_width": 2 * radius, "x": x.iter().map(|c| c.re).collect::<Vec<_>>()})
    }))
}

const PHASES: [f64; 4] = [0.3, 1.0, 2.0 * PI / 5.0, PI];

fn phase_operator(dim: usize, theta: f64) -> DMatrix<f64> {
    realify_operator(&(DMatrix::<Complex64>::identity(dim, dim) * Complex64::from_polar(1.0, theta)))
}

fn clifford(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let n = cfg.dim("n");
    let sphere = UnitSphere { dim: 2 * n };
    let points = par_trials(cfg.seed, 0, cfg.trials.max(2), |rng| Ok(random_unit_vector(2 * n, rng)))?;
    let mut spread = Tracker::at_most("sphere_phase_spread", cfg.tol("spread"));
    for theta in PHASES {
        let op = phase_operator(n, theta);
        let verdict = clifford_detector(&sphere, &|x: &DVector<f64>| Ok(&op * x), &points, cfg.tol("spread"))?;
        spread.observe(verdict.profile.spread(), None);
    }

    let shift = {
        let mut m = vec![0; n];
        m[0] = 1;
        m
    };
    let heights = [0.5, 2.0];
    let samples = heights
        .iter()
        .map(|&h| HalfSpacePoint::from_parts(&vec![0.0; n], h))
        .collect::<Result<Vec<_>>>()?;
    let translate = |x: &HalfSpacePoint| zn_halfspace_action(&shift, x);
    let verdict = clifford_detector(&HalfSpaceModel, &translate, &samples, cfg.tol("spread"))?;
    let mut separation = Tracker::at_least("halfspace_spread", cfg.tol("separation"));
    separation.observe(verdict.profile.spread(), None);

    let theta = 0.9;
    let op = phase_operator(n, theta);
    let f = |x: &DVector<f64>| Ok(&op * x);
    let df = |_: &DVector<f64>, v: &DVector<f64>| Ok(&op * v);
    let verdict = clifford_detector(&sphere, &f, &points, cfg.tol("spread"))?;
    let residuals = par_trials(cfg.seed, 1, cfg.trials, |rng| {
        let x0 = realify(&random_complex_frame(n, 1, rng)).column(0).into_owned();
        let r = invariant_geodesic(&sphere, &f, &df, &x0, &verdict)?;
        Ok(r.velocity_residual.max(r.image_residual))
    })?;
    let mut velocity = Tracker::at_most("invariant_geodesic_residual", cfg.tol("velocity"));
    velocity.observe_all(residuals);
    Ok(finish(&[spread, separation, velocity], |id, trial| match (id, trial) {
        ("invariant_geodesic_residual", Some(t)) => {
            let x0 = realify(&random_complex_frame(n, 1, &mut stream_rng(cfg.seed, 1, t)));
            json!({"theta": theta, "x0": x0.iter().copied().collect::<Vec<_>>()})
        }
        ("halfspace_spread", _) => json!({"shift": shift, "heights": heights}),
        _ => json!({"phases": PHASES, "complex_dim": n, "samples": points.len()}),
    }))
}

fn random_shift(n: usize, reach: i64, rng: &mut SeededRng) -> Vec<i64> {
    (0..n).map(|_| rng.random_range(-reach..=reach)).collect()
}

fn hyperbolic_models(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let n = cfg.dim("n");
    let sample = |rng: &mut SeededRng| (HalfSpacePoint::random(n + 1, rng), HalfSpacePoint::random(n + 1, rng));
    let gaps = par_trials(cfg.seed, 0, cfg.trials, |rng| {
        let (x, y) = sample(rng);
        let (u, v) = (to_hyperboloid(&x), to_hyperboloid(&y));
        let cross = (halfspace_distance(&x, &y)? - hyperboloid_distance(&u, &v)?).abs();
        let back = (to_halfspace(&u).coords() - x.coords()).norm() / (1.0 + x.coords().norm());
        Ok(cross.max(back))
    })?;
    let mut cross = Tracker::at_most("cross_model_gap", cfg.tol("crossmodel"));
    cross.observe_all(gaps);

    let mut unit = Tracker::at_most("unit_distance", cfg.tol("unit"));
    let mut origin = vec![0.0; n];
    let d = halfspace_distance(&HalfSpacePoint::from_parts(&origin, 1.0)?, &HalfSpacePoint::from_parts(&origin, E)?)?;
    unit.observe((d - 1.0).abs(), None);
    origin.clear();

    let matrices = par_trials(cfg.seed, 1, cfg.trials.min(200), |rng| {
        let a = random_shift(n, 3, rng);
        let b = random_shift(n, 3, rng);
        let sum: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let ma = zn_minkowski_matrix(&a);
        let law = (zn_minkowski_matrix(&sum) - &ma * zn_minkowski_matrix(&b)).norm();
        Ok([lorentz_residual(&ma)?, law])
    })?;
    let mut lorentz = Tracker::at_most("lorentz_residual", cfg.tol("lorentz"));
    let mut law = Tracker::at_most("group_law", cfg.tol("group_law"));
    for (t, r) in matrices.iter().enumerate() {
        lorentz.observe(r[0], Some(t as u64));
        law.observe(r[1], Some(t as u64));
    }
    Ok(finish(&[cross, unit, lorentz, law], |id, trial| match (id, trial) {
        ("cross_model_gap", Some(t)) => {
            let (x, y) = sample(&mut stream_rng(cfg.seed, 0, t));
            json!({"x": x.coords().as_slice(), "y": y.coords().as_slice()})
        }
        (_, Some(t)) => {
            let rng = &mut stream_rng(cfg.seed, 1, t);
            let a = random_shift(n, 3, rng);
            json!({"a": a, "b": random_shift(n, 3, rng)})
        }
        _ => json!({"x": "(0, 1)", "y": "(0, e)"}),
    }))
}

fn sample_hinfty(trunc: &L2Truncation, spatial: usize, rng: &mut SeededRng) -> HInftyPoint {
    let scale = rng.random_range(0.1..2.0);
    let l2 = trunc.random_supported_unit(trunc.radius() / 2, rng) * scale;
    HInftyPoint::from_blocks(l2, gaussian_vector(spatial, rng))
}

fn hinfty_suite(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let (n, radius) = (cfg.dim("n"), cfg.dim("window_radius"));
    let trunc = L2Truncation::cyclic(n, 2 * radius)?;
    let step = |k: i64| {
        let mut m = vec![0; n];
        m[0] = k;
        m
    };
    let rows = par_trials(cfg.seed, 0, cfg.trials, |rng| {
        let z = sample_hinfty(&trunc, n + 1, rng);
        let mut constraint: f64 = 0.0;
        let mut floor = f64::INFINITY;
        for k in 1..radius as i64 {
            let moved = hinfty_action(&step(k), &z, &trunc)?;
            constraint = constraint.max(moved.constraint_residual() / moved.t.max(1.0).powi(2));
            floor = floor.min(hinfty_distance(&z, &moved)?);
        }
        let flat = HInftyPoint::from_blocks(DVector::zeros(trunc.dim()), z.spatial.clone());
        let mut reduction: f64 = 0.0;
        let mut leak: f64 = 0.0;
        for k in [1, 2, radius as i64 - 1] {
            let moved = hinfty_action(&step(k), &flat, &trunc)?;
            leak = leak.max(moved.l2.norm());
            let direct = to_hyperboloid(&zn_halfspace_action(&step(k), &to_halfspace(&flat.finite_part()?))?);
            let got = moved.finite_part()?;
            reduction = reduction.max((got.coords() - direct.coords()).norm() / (1.0 + direct.coords().norm()));
        }
        Ok([constraint, floor, leak, reduction])
    })?;
    let mut trackers = vec![
        Tracker::at_most("constraint_residual", cfg.tol("constraint")),
        Tracker::at_least("orbit_distance_floor", cfg.tol("floor")),
        Tracker::at_most("l2_leak", 0.0),
        Tracker::at_most("finite_reduction_gap", cfg.tol("reduction")),
    ];
    for (t, r) in rows.iter().enumerate() {
        for (tracker, &value) in trackers.iter_mut().zip(r) {
            tracker.observe(value, Some(t as u64));
        }
    }
    Ok(finish(&trackers, |_, trial| {
        let z = sample_hinfty(&trunc, n + 1, &mut stream_rng(cfg.seed, 0, trial.unwrap_or(0)));
        json!({"l2": z.l2.as_slice(), "spatial": z.spatial.as_slice(), "t": z.t, "window_width": 2 * radius})
    }))
}

struct QuotientSample {
    lattice: Lattice,
    points: [DVector<f64>; 3],
    shift: Vec<i64>,
}

fn sample_quotient(n: usize, k: usize, rng: &mut SeededRng) -> Result<QuotientSample> {
    let lattice = Lattice::random(n, k, rng)?;
    let points = [gaussian_vector(n, rng), gaussian_vector(n, rng), gaussian_vector(n, rng)];
    let shift = random_shift(k, 3, rng);
    Ok(QuotientSample { lattice, points, shift })
}

fn flat_quotient(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let n = cfg.dim("n");
    let rank_of = |t: u64| cfg.dim_override("k").unwrap_or(1 + (t as usize % n));
    if rank_of(0) > n {
        return Err(GeomError::InvalidArgument(format!("lattice rank above dimension {n}")));
    }
    let rows = (0..cfg.trials)
        .map(|t| {
            let s = sample_quotient(n, rank_of(t), &mut stream_rng(cfg.seed, 0, t))?;
            let [x, y, z] = &s.points;
            let d = |a: &DVector<f64>, b: &DVector<f64>| flat_quotient_distance(&s.lattice, a, b);
            let dxy = d(x, y)?;
            let symmetry = (dxy - d(y, x)?).abs();
            let triangle = d(x, z)? - dxy - d(y, z)?;
            let orbit = d(x, &(x + s.lattice.point(&s.shift)))?;
            Ok([symmetry, triangle, orbit, dxy])
        })
        .collect::<Result<Vec<_>>>()?;
    let tol = cfg.tol("axioms");
    let mut trackers = vec![
        Tracker::at_most("symmetry", tol),
        Tracker::at_most("triangle_excess", tol),
        Tracker::at_most("orbit_distance", tol),
        Tracker::at_least("off_orbit_distance", tol),
    ];
    for (t, r) in rows.iter().enumerate() {
        for (tracker, &value) in trackers.iter_mut().zip(r) {
            tracker.observe(value, Some(t as u64));
        }
    }
    let square = Lattice::standard(2, 2)?;
    let brute_sample = |rng: &mut SeededRng| {
        let mut draw = || DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
        (draw(), draw())
    };
    let gaps = par_trials(cfg.seed, 1, cfg.trials, |rng| {
        let (x, y) = brute_sample(rng);
        let mut brute = f64::INFINITY;
        for a in -6..=6 {
            for b in -6..=6 {
                brute = brute.min((&x - &y - square.point(&[a, b])).norm());
            }
        }
        Ok((flat_quotient_distance(&square, &x, &y)? - brute).abs())
    })?;
    let mut brute = Tracker::at_most("brute_force_z2", cfg.tol("brute"));
    brute.observe_all(gaps);
    trackers.push(brute);
    Ok(finish(&trackers, |id, trial| {
        let t = trial.unwrap_or(0);
        if id == "brute_force_z2" {
            let (x, y) = brute_sample(&mut stream_rng(cfg.seed, 1, t));
            return json!({"x": x.as_slice(), "y": y.as_slice()});
        }
        match sample_quotient(n, rank_of(t), &mut stream_rng(cfg.seed, 0, t)) {
            Ok(s) => json!({
                "generators": matrix_json(s.lattice.generators()),
                "points": s.points.iter().map(|p| p.as_slice().to_vec()).collect::<Vec<_>>(),
                "shift": s.shift,
            }),
            Err(e) => json!(e.to_string()),
        }
    }))
}

fn sphere_quotient(cfg: &ResolvedConfig) -> Result<SuiteOutcome> {
    let samples = cfg.trials.max(2) as usize;
    let cases = [
        ("real_sign_s2", ScalarGroupSpec::real_sign(), 3, 2),
        ("complex_z5_s3", ScalarGroupSpec::complex_cyclic(5)?, 2, 5),
        ("quaternion_q8_s3", ScalarGroupSpec::quaternion_q8(), 1, 8),
    ];
    let mut trackers = Vec::new();
    for (i, (label, spec, dim, order)) in cases.iter().enumerate() {
        let cert = sphere_quotient_check(spec, *dim, samples, cfg.seed.wrapping_add(i as u64))?;
        let mut closure = Tracker::at_most(format!("order_mismatch_{label}"), 0.0);
        closure.observe((cert.order as f64 - *order as f64).abs(), None);
        let mut gap = Tracker::at_least(format!("gap_{label}"), cfg.tol("gap"));
        gap.observe_all(cert.elements.iter().map(|e| e.min_gap));
        let mut spread = Tracker::at_most(format!("spread_{label}"), cfg.tol("spread"));
        spread.observe_all(cert.elements.iter().map(|e| e.displacement_spread));
        trackers.extend([closure, gap, spread]);
    }
    Ok(finish(&trackers, |id, trial| json!({"check": id, "element": trial, "samples": samples})))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{run_suite, SuiteConfig};

    #[test]
    fn every_suite_passes_with_small_budgets() {
        for info in REGISTRY {
            let trials = info.trials.min(20);
            let report = run_suite(&SuiteConfig::new(info.name).with_trials(trials)).unwrap();
            assert!(report.passed, "{}: {:?} {:?}", info.name, report.error, report.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
            assert!(report.witness.is_some());
        }
    }
}
