//! Acceptance criteria, one line per criterion. Each criterion pins its sample
//! counts, dimensions and tolerances explicitly so that changing a suite
//! default cannot weaken it.

use std::process::ExitCode;

use stiefel_actions::verify::{run_suite, Dims, SuiteConfig, SuiteReport};

struct Criterion {
    number: usize,
    suite: &'static str,
    trials: u64,
    dims: Dims,
    tolerances: &'static [(&'static str, f64)],
    /// Check ids that must be present in the report.
    required: &'static [&'static str],
}

fn dims(n: Option<usize>, p: Option<usize>, k: Option<usize>, window_radius: Option<usize>) -> Dims {
    Dims { n, p, k, window_radius }
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            number: 1,
            suite: "metric-bounds",
            trials: 10_000,
            dims: dims(Some(10), Some(3), None, None),
            tolerances: &[("bound", 1e-12), ("identity", 1e-12)],
            required: &["lower_bound", "upper_bound", "identity"],
        },
        Criterion {
            number: 2,
            suite: "geodesic-crossval",
            trials: 200,
            dims: Dims::default(),
            tolerances: &[("crossval", 1e-6), ("speed", 1e-8)],
            required: &["euclidean_gap", "canonical_gap", "euclidean_speed_drift", "canonical_speed_drift"],
        },
        Criterion {
            number: 3,
            suite: "totally-geodesic",
            trials: 100,
            dims: dims(Some(4), Some(2), None, None),
            tolerances: &[("residual", 1e-9)],
            required: &["stiefel_euclidean_residual", "stiefel_canonical_residual", "grassmann_residual"],
        },
        Criterion {
            number: 4,
            suite: "grassmann-hopfrinow",
            trials: 500,
            dims: dims(Some(8), Some(2), None, None),
            tolerances: &[("roundtrip", 1e-8)],
            required: &["roundtrip"],
        },
        Criterion {
            number: 5,
            suite: "curvature-sign",
            trials: 1_000,
            dims: Dims::default(),
            tolerances: &[("sign", 1e-9), ("spread", 0.05), ("jacobi", 5e-3)],
            required: &[
                "min_curvature_p2_n4",
                "min_curvature_p2_n6",
                "min_curvature_p3_n6",
                "spread_p2_n4",
                "spread_p2_n6",
                "spread_p3_n6",
                "jacobi_gap_p2_n4",
            ],
        },
        Criterion {
            number: 6,
            suite: "kaehler-bounds",
            trials: 1_000,
            dims: Dims::default(),
            tolerances: &[("bound", 5e-3), ("jacobi", 5e-3)],
            required: &["lower_p1", "upper_p1", "lower_p2", "upper_p2", "lower_p3", "upper_p3", "projective_constant"],
        },
        Criterion {
            number: 7,
            suite: "torsion-obstruction",
            trials: 1,
            dims: Dims::default(),
            tolerances: &[("gap", 1e-8)],
            required: &[
                "non_free_fraction_z2z2_c2",
                "non_free_fraction_z2z2_c3",
                "non_free_fraction_z3z3_c3",
                "scalar_gap_z4",
                "scalar_gap_z2z3",
                "scalar_gap_z2z9",
            ],
        },
        Criterion {
            number: 8,
            suite: "orbit-divergence",
            trials: 100,
            dims: dims(None, None, None, Some(32)),
            tolerances: &[("floor", 1e-3)],
            required: &["min_orbit_distance"],
        },
        Criterion {
            number: 9,
            suite: "clifford",
            trials: 100,
            dims: Dims::default(),
            tolerances: &[("spread", 1e-9), ("separation", 0.1), ("velocity", 1e-8)],
            required: &["sphere_phase_spread", "halfspace_spread", "invariant_geodesic_residual"],
        },
        Criterion {
            number: 10,
            suite: "hyperbolic-models",
            trials: 1_000,
            dims: Dims::default(),
            tolerances: &[("crossmodel", 1e-9), ("unit", 1e-12), ("lorentz", 1e-10), ("group_law", 1e-9)],
            required: &["cross_model_gap", "unit_distance", "lorentz_residual", "group_law"],
        },
        Criterion {
            number: 11,
            suite: "hinfty-action",
            trials: 100,
            dims: Dims::default(),
            tolerances: &[("constraint", 1e-10), ("floor", 1e-9), ("reduction", 1e-9)],
            required: &["constraint_residual", "orbit_distance_floor", "l2_leak", "finite_reduction_gap"],
        },
        Criterion {
            number: 12,
            suite: "flat-quotient",
            trials: 1_000,
            dims: dims(Some(4), None, None, None),
            tolerances: &[("axioms", 1e-12), ("brute", 1e-12)],
            required: &["symmetry", "triangle_excess", "orbit_distance", "off_orbit_distance", "brute_force_z2"],
        },
    ]
}

fn summarize(report: &SuiteReport) -> String {
    match &report.error {
        Some(e) => format!("error: {e}"),
        None => report
            .checks
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
            .map(|c| format!("tightest {} = {:.3e} vs {:.1e}", c.id, c.value, c.bound))
            .unwrap_or_default(),
    }
}

fn main() -> ExitCode {
    let mut failures = 0;
    for c in criteria() {
        let mut config = SuiteConfig::new(c.suite).with_trials(c.trials);
        config.dims = c.dims.clone();
        for &(name, value) in c.tolerances {
            config = config.with_tolerance(name, value);
        }
        let (ok, detail) = match run_suite(&config) {
            Ok(report) => {
                let missing: Vec<_> = c
                    .required
                    .iter()
                    .filter(|id| !report.checks.iter().any(|k| k.id == **id))
                    .collect();
                let ok = report.passed && missing.is_empty();
                let detail = if missing.is_empty() {
                    summarize(&report)
                } else {
                    format!("missing checks {missing:?}")
                };
                (ok, format!("{detail} [{} ms]", report.runtime_ms))
            }
            Err(e) => (false, e.to_string()),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<20} {}  {}",
            c.number,
            c.suite,
            if ok { "PASS" } else { "FAIL" },
            detail
        );
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
