//! Metric spaces, displacement functions and Clifford translations.
//!
//! Isometries are passed as closures `Fn(&Point) -> Result<Point>`; their
//! differentials, when needed, as `Fn(&Point, &Tangent) -> Result<Tangent>`.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{shape_mismatch, GeomError, Result};
use crate::grassmann::{grassmann_distance, GrassmannPoint};
use crate::linalg::complete_orthonormal;
use crate::stiefel::{self, MetricKind, StiefelPoint};

pub trait MetricSpace {
    type Point: Clone;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Result<f64>;
}

/// A metric space with a chosen minimizing geodesic between any two points.
pub trait GeodesicSpace: MetricSpace {
    type Tangent: Clone;

    /// Initial velocity `v` at `a` with `exp_a(v) = b` and `|v| = d(a, b)`.
    fn log(&self, a: &Self::Point, b: &Self::Point) -> Result<Self::Tangent>;

    /// Point and velocity at time `t` of `t ↦ exp_a(t v)`.
    fn geodesic(&self, a: &Self::Point, v: &Self::Tangent, t: f64) -> Result<(Self::Point, Self::Tangent)>;

    fn tangent_norm(&self, at: &Self::Point, v: &Self::Tangent) -> f64;

    /// `|v − w|` for two vectors tangent at `at`.
    fn tangent_gap(&self, at: &Self::Point, v: &Self::Tangent, w: &Self::Tangent) -> f64;
}

const UNIT_TOL: f64 = 1e-10;

/// Angle between unit vectors as `2 atan2(‖a − b‖, ‖a + b‖)`, accurate for
/// nearby and antipodal points alike.
pub fn sphere_angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    2.0 * (a - b).norm().atan2((a + b).norm())
}

/// Unit sphere of `ℝⁿ` with the round metric.
#[derive(Clone, Copy, Debug)]
pub struct UnitSphere {
    pub dim: usize,
}

impl UnitSphere {
    fn check(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(shape_mismatch((self.dim, 1), (x.len(), 1)));
        }
        let deviation = (x.norm() - 1.0).abs();
        if deviation > UNIT_TOL {
            return Err(GeomError::Constraint(format!(
                "point is off the unit sphere by {deviation:.3e}"
            )));
        }
        Ok(())
    }
}

impl MetricSpace for UnitSphere {
    type Point = DVector<f64>;

    fn distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(sphere_angle(a, b))
    }
}

impl GeodesicSpace for UnitSphere {
    type Tangent = DVector<f64>;

    fn log(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        let theta = self.distance(a, b)?;
        if theta == 0.0 {
            return Ok(DVector::zeros(self.dim));
        }
        let mut u = b - a * a.dot(b);
        let n = u.norm();
        if n <= 1e-12 {
            // antipodal: every great circle through a is minimizing
            let frame = nalgebra::DMatrix::from_column_slice(self.dim, 1, a.as_slice());
            u = complete_orthonormal(&frame, 1).column(0).into_owned();
        } else {
            u /= n;
        }
        Ok(u * theta)
    }

    fn geodesic(&self, a: &DVector<f64>, v: &DVector<f64>, t: f64) -> Result<(DVector<f64>, DVector<f64>)> {
        self.check(a)?;
        let speed = v.norm();
        if speed == 0.0 {
            return Ok((a.clone(), v.clone()));
        }
        let u = v / speed;
        let (s, c) = (speed * t).sin_cos();
        Ok((a * c + &u * s, (&u * c - a * s) * speed))
    }

    fn tangent_norm(&self, _: &DVector<f64>, v: &DVector<f64>) -> f64 {
        v.norm()
    }

    fn tangent_gap(&self, _: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (v - w).norm()
    }
}

/// Euclidean space `ℝⁿ`.
#[derive(Clone, Copy, Debug)]
pub struct EuclideanSpace {
    pub dim: usize,
}

impl MetricSpace for EuclideanSpace {
    type Point = DVector<f64>;

    fn distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        if a.len() != self.dim || b.len() != self.dim {
            return Err(shape_mismatch((self.dim, 1), (a.len(), b.len())));
        }
        Ok((a - b).norm())
    }
}

impl GeodesicSpace for EuclideanSpace {
    type Tangent = DVector<f64>;

    fn log(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.distance(a, b)?;
        Ok(b - a)
    }

    fn geodesic(&self, a: &DVector<f64>, v: &DVector<f64>, t: f64) -> Result<(DVector<f64>, DVector<f64>)> {
        Ok((a + v * t, v.clone()))
    }

    fn tangent_norm(&self, _: &DVector<f64>, v: &DVector<f64>) -> f64 {
        v.norm()
    }

    fn tangent_gap(&self, _: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (v - w).norm()
    }
}

/// Stiefel manifold with one of its two metrics.
#[derive(Clone, Copy, Debug)]
pub struct StiefelSpace {
    pub kind: MetricKind,
}

impl MetricSpace for StiefelSpace {
    type Point = StiefelPoint;

    fn distance(&self, a: &StiefelPoint, b: &StiefelPoint) -> Result<f64> {
        stiefel::distance(a, b, self.kind)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GrassmannSpace;

impl MetricSpace for GrassmannSpace {
    type Point = GrassmannPoint;

    fn distance(&self, a: &GrassmannPoint, b: &GrassmannPoint) -> Result<f64> {
        grassmann_distance(a, b)
    }
}

/// `δ_f(x) = d(x, f(x))`.
pub fn displacement<S, F>(space: &S, f: &F, x: &S::Point) -> Result<f64>
where
    S: MetricSpace,
    F: Fn(&S::Point) -> Result<S::Point>,
{
    space.distance(x, &f(x)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct DisplacementProfile {
    pub values: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl DisplacementProfile {
    pub fn from_values(values: Vec<f64>) -> Self {
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
        Self {
            values,
            min,
            max,
            mean,
        }
    }

    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CliffordVerdict {
    pub clifford: bool,
    pub profile: DisplacementProfile,
    /// Sample indices of the smallest and largest displacement when the
    /// verdict is negative.
    pub witness: Option<(usize, usize)>,
}

/// Samples `δ_f` and declares `f` Clifford when `max − min ≤ tol·(1 + mean)`.
pub fn clifford_detector<S, F>(space: &S, f: &F, points: &[S::Point], tol: f64) -> Result<CliffordVerdict>
where
    S: MetricSpace,
    F: Fn(&S::Point) -> Result<S::Point>,
{
    if points.len() < 2 {
        return Err(GeomError::InvalidArgument("need at least two sample points".into()));
    }
    let values = points
        .iter()
        .map(|x| displacement(space, f, x))
        .collect::<Result<Vec<_>>>()?;
    let profile = DisplacementProfile::from_values(values);
    let clifford = profile.spread() <= tol * (1.0 + profile.mean);
    let witness = (!clifford).then(|| {
        let arg = |better: fn(f64, f64) -> bool| {
            let mut best = 0;
            for (i, &v) in profile.values.iter().enumerate() {
                if better(v, profile.values[best]) {
                    best = i;
                }
            }
            best
        };
        (arg(|a, b| a < b), arg(|a, b| a > b))
    });
    Ok(CliffordVerdict {
        clifford,
        profile,
        witness,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantGeodesicReport {
    /// Length of the segment from `x₀` to `f(x₀)`.
    pub length: f64,
    /// `|γ'(1) − df(γ'(0))| / |γ'(0)|`: mismatch of the incoming and outgoing
    /// velocities at `f(x₀)`.
    pub velocity_residual: f64,
    /// `max_t d(f(γ(t)), γ(1 + t))` over `t ∈ [0, 1]`.
    pub image_residual: f64,
}

/// Extends the minimal geodesic `γ` from `x₀` to `f(x₀)` by its image
/// `f ∘ γ` and measures how far the concatenation is from a single geodesic.
pub fn invariant_geodesic<S, F, D>(
    space: &S,
    f: &F,
    differential: &D,
    x0: &S::Point,
    verdict: &CliffordVerdict,
) -> Result<InvariantGeodesicReport>
where
    S: GeodesicSpace,
    F: Fn(&S::Point) -> Result<S::Point>,
    D: Fn(&S::Point, &S::Tangent) -> Result<S::Tangent>,
{
    if !verdict.clifford {
        return Err(GeomError::InvalidArgument(
            "isometry was not certified as a Clifford translation".into(),
        ));
    }
    let fx0 = f(x0)?;
    let v = space.log(x0, &fx0)?;
    let length = space.tangent_norm(x0, &v);
    if length == 0.0 {
        return Err(GeomError::InvalidArgument("f fixes x0".into()));
    }
    let (end, incoming) = space.geodesic(x0, &v, 1.0)?;
    let outgoing = differential(x0, &v)?;
    let velocity_residual = space.tangent_gap(&end, &incoming, &outgoing) / length;
    let mut image_residual: f64 = 0.0;
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let (p, _) = space.geodesic(x0, &v, t)?;
        let (q, _) = space.geodesic(x0, &v, 1.0 + t)?;
        image_residual = image_residual.max(space.distance(&f(&p)?, &q)?);
    }
    Ok(InvariantGeodesicReport {
        length,
        velocity_residual,
        image_residual,
    })
}
