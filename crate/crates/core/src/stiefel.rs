//! The Stiefel manifold `St(p, Hₙ)` of orthonormal `p`-frames.
//!
//! Two Riemannian metrics are supported:
//!
//! * [`MetricKind::Euclidean`], the restriction of the Frobenius product
//!   `⟨V, W⟩ = Tr(Vᵗ W)`;
//! * [`MetricKind::Canonical`], `g_Y(V, W) = Tr(Vᵗ (Id − ½ Y Yᵗ) W)`.
//!
//! Geodesics have closed forms in both metrics (a `2p × 2p` matrix exponential)
//! and an independent RK4 integrator of the geodesic equation is provided for
//! cross-validation. Distances are computed by shooting on the initial
//! velocity.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{shape_mismatch, GeomError, Result};
use crate::grassmann::{self, GrassmannPoint};
use crate::linalg::{
    complete_orthonormal, ensure_finite, orthonormality_residual,
    polar_orthonormalize, rotation_log, sym, thin_svd, AmbientMap, AmbientVector, DEFAULT_TOL,
};
use crate::sampling::{gaussian_matrix, random_frame};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Euclidean,
    Canonical,
}

impl MetricKind {
    pub const ALL: [MetricKind; 2] = [MetricKind::Euclidean, MetricKind::Canonical];
}

/// An orthonormal frame `Y` (`Yᵗ Y = I`) in an ambient space of dimension at
/// least `2p`.
#[derive(Clone, Debug, PartialEq)]
pub struct StiefelPoint {
    frame: AmbientMap,
}

impl StiefelPoint {
    pub fn new(frame: AmbientMap) -> Result<Self> {
        Self::with_tolerance(frame, DEFAULT_TOL)
    }

    pub fn with_tolerance(frame: AmbientMap, tol: f64) -> Result<Self> {
        ensure_finite(&frame)?;
        let (n, p) = frame.shape();
        if p == 0 || n < 2 * p {
            return Err(GeomError::AmbientTooSmall { n, p });
        }
        let residual = orthonormality_residual(&frame);
        if residual > tol {
            return Err(GeomError::NotOrthonormal { residual });
        }
        Ok(Self { frame })
    }

    pub(crate) fn from_frame_unchecked(frame: AmbientMap) -> Self {
        Self { frame }
    }

    /// The frame made of the first `p` standard basis vectors.
    pub fn standard(n: usize, p: usize) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, p, |i, j| if i == j { 1.0 } else { 0.0 }))
    }

    pub fn random<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<Self> {
        Self::new(random_frame(n, p, rng))
    }

    pub fn frame(&self) -> &AmbientMap {
        &self.frame
    }

    pub fn into_frame(self) -> AmbientMap {
        self.frame
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn width(&self) -> usize {
        self.frame.ncols()
    }

    /// Frobenius distance between frames.
    pub fn chordal_distance(&self, other: &StiefelPoint) -> f64 {
        (&self.frame - &other.frame).norm()
    }

    /// A random tangent vector obtained by projecting a Gaussian matrix.
    pub fn random_tangent<R: Rng + ?Sized>(&self, rng: &mut R) -> TangentAtStiefel {
        let z = gaussian_matrix(self.ambient_dim(), self.width(), rng);
        project_unchecked(self, &z)
    }
}

/// A tangent vector `V` at `Y`, i.e. `Yᵗ V` is skew-symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentAtStiefel {
    base: StiefelPoint,
    direction: AmbientMap,
}

impl TangentAtStiefel {
    pub fn new(base: StiefelPoint, direction: AmbientMap) -> Result<Self> {
        if direction.shape() != base.frame.shape() {
            return Err(shape_mismatch(base.frame.shape(), direction.shape()));
        }
        ensure_finite(&direction)?;
        let ytv = base.frame.transpose() * &direction;
        let residual = (&ytv + ytv.transpose()).norm();
        if residual > DEFAULT_TOL * (1.0 + direction.norm()) {
            return Err(GeomError::NotTangent { residual });
        }
        Ok(Self { base, direction })
    }

    pub(crate) fn new_unchecked(base: StiefelPoint, direction: AmbientMap) -> Self {
        Self { base, direction }
    }

    pub fn zero(base: StiefelPoint) -> Self {
        let direction = DMatrix::zeros(base.ambient_dim(), base.width());
        Self { base, direction }
    }

    pub fn base(&self) -> &StiefelPoint {
        &self.base
    }

    pub fn direction(&self) -> &AmbientMap {
        &self.direction
    }

    pub fn into_direction(self) -> AmbientMap {
        self.direction
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            base: self.base.clone(),
            direction: &self.direction * c,
        }
    }

    /// `a·self + b·other`; both must share the base point.
    pub fn combine(&self, a: f64, other: &TangentAtStiefel, b: f64) -> Result<Self> {
        ensure_same_base(&self.base, &other.base)?;
        Ok(Self {
            base: self.base.clone(),
            direction: &self.direction * a + &other.direction * b,
        })
    }
}

pub(crate) fn ensure_same_base(a: &StiefelPoint, b: &StiefelPoint) -> Result<()> {
    if a.frame.shape() != b.frame.shape() || (&a.frame - &b.frame).norm() > 1e-12 {
        return Err(GeomError::BaseMismatch);
    }
    Ok(())
}

fn project_unchecked(y: &StiefelPoint, z: &AmbientMap) -> TangentAtStiefel {
    let yt_z = y.frame.transpose() * z;
    let direction = z - &y.frame * sym(&yt_z);
    TangentAtStiefel::new_unchecked(y.clone(), direction)
}

/// Frobenius-orthogonal projection of `z` onto `T_Y St`.
pub fn tangent_project(y: &StiefelPoint, z: &AmbientMap) -> Result<TangentAtStiefel> {
    if z.shape() != y.frame.shape() {
        return Err(shape_mismatch(y.frame.shape(), z.shape()));
    }
    ensure_finite(z)?;
    Ok(project_unchecked(y, z))
}

/// `L_Y z = z − ½ Y (Yᵗ z)`.
pub fn l_operator(y: &StiefelPoint, z: &AmbientVector) -> Result<AmbientVector> {
    if z.len() != y.ambient_dim() {
        return Err(shape_mismatch((y.ambient_dim(), 1), (z.len(), 1)));
    }
    Ok(z - &y.frame * (y.frame.transpose() * z) * 0.5)
}

/// The `n × n` matrix `Id − ½ Y Yᵗ`.
pub fn l_operator_matrix(y: &StiefelPoint) -> DMatrix<f64> {
    let n = y.ambient_dim();
    DMatrix::identity(n, n) - &y.frame * y.frame.transpose() * 0.5
}

pub(crate) fn metric_raw(y: &AmbientMap, v: &AmbientMap, w: &AmbientMap, kind: MetricKind) -> f64 {
    let euclid = v.dot(w);
    match kind {
        MetricKind::Euclidean => euclid,
        MetricKind::Canonical => {
            let ytv = y.transpose() * v;
            let ytw = y.transpose() * w;
            euclid - 0.5 * ytv.dot(&ytw)
        }
    }
}

/// Evaluates the chosen metric on two tangent vectors at `y`.
pub fn metric(
    y: &StiefelPoint,
    v: &TangentAtStiefel,
    w: &TangentAtStiefel,
    kind: MetricKind,
) -> Result<f64> {
    ensure_same_base(y, &v.base)?;
    ensure_same_base(y, &w.base)?;
    Ok(metric_raw(&y.frame, &v.direction, &w.direction, kind))
}

pub fn norm(v: &TangentAtStiefel, kind: MetricKind) -> f64 {
    metric_raw(&v.base.frame, &v.direction, &v.direction, kind)
        .max(0.0)
        .sqrt()
}

fn first_block_columns(m: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    m.columns(0, p).into_owned()
}

fn euclidean_geodesic(y: &AmbientMap, v: &AmbientMap, t: f64) -> (AmbientMap, AmbientMap) {
    let p = y.ncols();
    let a = y.transpose() * v;
    let s = v.transpose() * v;
    let mut m = DMatrix::zeros(2 * p, 2 * p);
    m.view_mut((0, 0), (p, p)).copy_from(&a);
    m.view_mut((0, p), (p, p)).copy_from(&(-&s));
    m.view_mut((p, 0), (p, p)).fill_with_identity();
    m.view_mut((p, p), (p, p)).copy_from(&a);
    let e = (&m * t).exp();
    let f = (&a * -t).exp();
    let yv = stack_columns(y, v);
    let head = first_block_columns(&e, p);
    let point = &yv * &head * &f;
    let velocity = &yv * (first_block_columns(&(&e * &m), p) * &f - &head * &f * &a);
    (point, velocity)
}

/// Orthonormal `n × p` matrix `Q` with `Yᵗ Q = 0` whose span contains the
/// columns of `h`, together with `R = Qᵗ h`.
fn horizontal_factor(y: &AmbientMap, h: &AmbientMap) -> (AmbientMap, DMatrix<f64>) {
    let p = y.ncols();
    let svd = thin_svd(h).expect("finite input");
    let scale = 1.0 + h.norm();
    let rank = svd.sigma.iter().filter(|&&s| s > 1e-14 * scale).count();
    let used = svd.u.columns(0, rank).into_owned();
    let q = if rank == p {
        used
    } else {
        let existing = stack_columns(y, &used);
        let extra = complete_orthonormal(&existing, p - rank);
        stack_columns(&used, &extra)
    };
    let r = q.transpose() * h;
    (q, r)
}

fn canonical_geodesic(y: &AmbientMap, v: &AmbientMap, t: f64) -> (AmbientMap, AmbientMap) {
    let p = y.ncols();
    let a = y.transpose() * v;
    let h = v - y * &a;
    let (q, r) = horizontal_factor(y, &h);
    let mut k = DMatrix::zeros(2 * p, 2 * p);
    k.view_mut((0, 0), (p, p)).copy_from(&a);
    k.view_mut((0, p), (p, p)).copy_from(&(-r.transpose()));
    k.view_mut((p, 0), (p, p)).copy_from(&r);
    let e = (&k * t).exp();
    let yq = stack_columns(y, &q);
    let point = &yq * first_block_columns(&e, p);
    let velocity = &yq * first_block_columns(&(&e * &k), p);
    (point, velocity)
}

pub(crate) fn stack_columns(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

pub(crate) fn geodesic_raw(
    y: &AmbientMap,
    v: &AmbientMap,
    t: f64,
    kind: MetricKind,
) -> (AmbientMap, AmbientMap) {
    match kind {
        MetricKind::Euclidean => euclidean_geodesic(y, v, t),
        MetricKind::Canonical => canonical_geodesic(y, v, t),
    }
}

/// Closed-form geodesic `t ↦ exp_Y(t V)` in the chosen metric.
pub fn geodesic(v: &TangentAtStiefel, t: f64, kind: MetricKind) -> StiefelPoint {
    let (point, _) = geodesic_raw(&v.base.frame, &v.direction, t, kind);
    StiefelPoint::from_frame_unchecked(point)
}

/// Closed-form geodesic together with its velocity at time `t`.
pub fn geodesic_with_velocity(
    v: &TangentAtStiefel,
    t: f64,
    kind: MetricKind,
) -> TangentAtStiefel {
    let (point, velocity) = geodesic_raw(&v.base.frame, &v.direction, t, kind);
    TangentAtStiefel::new_unchecked(StiefelPoint::from_frame_unchecked(point), velocity)
}

fn acceleration(y: &AmbientMap, v: &AmbientMap, kind: MetricKind) -> AmbientMap {
    let vtv = v.transpose() * v;
    match kind {
        MetricKind::Euclidean => -(y * vtv),
        MetricKind::Canonical => {
            let ytv = y.transpose() * v;
            -(v * (v.transpose() * y)) - y * (&ytv * &ytv + vtv)
        }
    }
}

/// RK4 integration of the geodesic equation with `steps` steps, projecting the
/// state back onto the tangent bundle after every step.
pub fn geodesic_ode(
    v: &TangentAtStiefel,
    t: f64,
    kind: MetricKind,
    steps: usize,
) -> Result<StiefelPoint> {
    if steps == 0 {
        return Err(GeomError::InvalidArgument("steps must be at least 1".into()));
    }
    let h = t / steps as f64;
    let mut y = v.base.frame.clone();
    let mut vel = v.direction.clone();
    for _ in 0..steps {
        let k1y = vel.clone();
        let k1v = acceleration(&y, &vel, kind);
        let y2 = &y + &k1y * (h / 2.0);
        let v2 = &vel + &k1v * (h / 2.0);
        let k2y = v2.clone();
        let k2v = acceleration(&y2, &v2, kind);
        let y3 = &y + &k2y * (h / 2.0);
        let v3 = &vel + &k2v * (h / 2.0);
        let k3y = v3.clone();
        let k3v = acceleration(&y3, &v3, kind);
        let y4 = &y + &k3y * h;
        let v4 = &vel + &k3v * h;
        let k4y = v4.clone();
        let k4v = acceleration(&y4, &v4, kind);
        y += (k1y + &k2y * 2.0 + &k3y * 2.0 + k4y) * (h / 6.0);
        vel += (k1v + &k2v * 2.0 + &k3v * 2.0 + k4v) * (h / 6.0);
        y = polar_orthonormalize(&y)?;
        let ytv = y.transpose() * &vel;
        vel -= &y * sym(&ytv);
    }
    Ok(StiefelPoint::from_frame_unchecked(y))
}

/// Frobenius-orthonormal basis of `T_Y St`: vertical directions `Y·(Eᵢⱼ − Eⱼᵢ)/√2`
/// followed by horizontal directions `Y⊥ Eₖⱼ`.
pub fn tangent_basis(y: &StiefelPoint) -> Vec<AmbientMap> {
    let (n, p) = y.frame.shape();
    let mut basis = Vec::with_capacity(n * p - p * (p + 1) / 2);
    for i in 0..p {
        for j in (i + 1)..p {
            let mut a = DMatrix::zeros(p, p);
            a[(i, j)] = std::f64::consts::FRAC_1_SQRT_2;
            a[(j, i)] = -std::f64::consts::FRAC_1_SQRT_2;
            basis.push(&y.frame * a);
        }
    }
    let perp = complete_orthonormal(&y.frame, n - p);
    for k in 0..(n - p) {
        for j in 0..p {
            let mut m = DMatrix::zeros(n, p);
            m.set_column(j, &perp.column(k));
            basis.push(m);
        }
    }
    basis
}

/// Maximum number of Gauss–Newton iterations of the shooting solver.
pub const MAX_SHOOTING_ITERATIONS: usize = 200;
const SHOOTING_TOL: f64 = 1e-12;

struct ShootingOutcome {
    direction: AmbientMap,
    residual: f64,
    iterations: usize,
}

fn shoot(
    y1: &AmbientMap,
    y2: &AmbientMap,
    kind: MetricKind,
    basis: &[AmbientMap],
    init: &AmbientMap,
) -> ShootingOutcome {
    let d = basis.len();
    let to_direction = |c: &[f64]| -> AmbientMap {
        let mut v = DMatrix::zeros(y1.nrows(), y1.ncols());
        for (ci, b) in c.iter().zip(basis) {
            v += b * *ci;
        }
        v
    };
    let residual_of = |c: &[f64]| -> AmbientMap {
        let (point, _) = geodesic_raw(y1, &to_direction(c), 1.0, kind);
        point - y2
    };
    let mut c: Vec<f64> = basis.iter().map(|b| b.dot(init)).collect();
    let mut r = residual_of(&c);
    let mut rnorm = r.norm();
    let mut iterations = 0;
    let fd = 1e-6;
    while iterations < MAX_SHOOTING_ITERATIONS && rnorm > SHOOTING_TOL {
        iterations += 1;
        let rows = r.len();
        let mut jac = DMatrix::zeros(rows, d);
        for k in 0..d {
            let mut cp = c.clone();
            let mut cm = c.clone();
            cp[k] += fd;
            cm[k] -= fd;
            let col = (residual_of(&cp) - residual_of(&cm)) / (2.0 * fd);
            jac.set_column(k, &nalgebra::DVector::from_column_slice(col.as_slice()));
        }
        let rhs = -nalgebra::DVector::from_column_slice(r.as_slice());
        let Ok(svd) = thin_svd(&jac) else { break };
        let cutoff = 1e-12 * svd.sigma.max().max(1e-300);
        let scaled = (svd.u.transpose() * rhs).zip_map(&svd.sigma, |b, s| if s > cutoff { b / s } else { 0.0 });
        let step = &svd.v * scaled;
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let trial: Vec<f64> = c
                .iter()
                .zip(step.iter())
                .map(|(a, b)| a + lambda * b)
                .collect();
            let tr = residual_of(&trial);
            let tn = tr.norm();
            if tn < rnorm {
                c = trial;
                r = tr;
                rnorm = tn;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    ShootingOutcome {
        direction: to_direction(&c),
        residual: rnorm,
        iterations,
    }
}

fn initial_guesses(y1: &StiefelPoint, y2: &StiefelPoint) -> Vec<AmbientMap> {
    let mut guesses = Vec::new();
    let p = y1.width();
    let x1 = GrassmannPoint::from_stiefel(y1);
    let x2 = GrassmannPoint::from_stiefel(y2);
    if let Ok(xi) = grassmann::grassmann_log(&x1, &x2) {
        let lifted = grassmann::grassmann_geodesic_frame(x1.basis(), xi.direction(), 1.0);
        let q = lifted.transpose() * y2.frame();
        let q = polar_orthonormalize(&q).unwrap_or(q);
        let mut variants = vec![q.clone()];
        if q.determinant() < 0.0 {
            let mut flipped = q.clone();
            let last = flipped.column(p - 1) * -1.0;
            flipped.set_column(p - 1, &last);
            variants = vec![flipped];
        }
        for rot in variants {
            let b = rotation_log(&rot);
            guesses.push(xi.direction() + y1.frame() * b);
        }
        guesses.push(xi.direction().clone());
    }
    let chord = y2.frame() - y1.frame();
    guesses.push(project_unchecked(y1, &chord).direction);
    guesses
}

/// Initial velocity of the shortest connecting geodesic found by shooting
/// (`exp_{y1}(V) = y2`).
pub fn log_map(y1: &StiefelPoint, y2: &StiefelPoint, kind: MetricKind) -> Result<TangentAtStiefel> {
    if y1.frame.shape() != y2.frame.shape() {
        return Err(shape_mismatch(y1.frame.shape(), y2.frame.shape()));
    }
    if y1.chordal_distance(y2) <= SHOOTING_TOL {
        return Ok(TangentAtStiefel::zero(y1.clone()));
    }
    let basis = tangent_basis(y1);
    let mut best: Option<(f64, AmbientMap)> = None;
    let mut best_failure = (f64::INFINITY, f64::INFINITY, 0);
    for guess in initial_guesses(y1, y2) {
        let outcome = shoot(&y1.frame, &y2.frame, kind, &basis, &guess);
        let length = metric_raw(&y1.frame, &outcome.direction, &outcome.direction, kind)
            .max(0.0)
            .sqrt();
        if outcome.residual <= SHOOTING_TOL * 10.0 {
            if best.as_ref().is_none_or(|(l, _)| length < *l) {
                best = Some((length, outcome.direction));
            }
        } else if outcome.residual < best_failure.0 {
            best_failure = (outcome.residual, length, outcome.iterations);
        }
    }
    match best {
        Some((_, direction)) => Ok(TangentAtStiefel::new_unchecked(y1.clone(), direction)),
        None => Err(GeomError::NonConvergence {
            iterations: best_failure.2.max(MAX_SHOOTING_ITERATIONS),
            residual: best_failure.0,
            best_length: best_failure.1,
        }),
    }
}

/// Riemannian distance: length of the shortest geodesic found by [`log_map`].
pub fn distance(y1: &StiefelPoint, y2: &StiefelPoint, kind: MetricKind) -> Result<f64> {
    let v = log_map(y1, y2, kind)?;
    Ok(norm(&v, kind))
}

fn ensure_isometric(l: &DMatrix<f64>) -> Result<()> {
    ensure_finite(l)?;
    let residual = orthonormality_residual(l);
    if residual > DEFAULT_TOL {
        return Err(GeomError::NotIsometric { residual });
    }
    Ok(())
}

/// `Y ↦ L ∘ Y` for an isometric linear immersion `L` (`Lᵗ L = I`).
pub fn embed_isometric(l: &DMatrix<f64>, y: &StiefelPoint) -> Result<StiefelPoint> {
    if l.ncols() != y.ambient_dim() {
        return Err(shape_mismatch((l.nrows(), y.ambient_dim()), l.shape()));
    }
    ensure_isometric(l)?;
    Ok(StiefelPoint::from_frame_unchecked(l * &y.frame))
}

/// Pushforward of a tangent vector under `Y ↦ L ∘ Y` (or any linear isometry).
pub fn push_tangent(l: &DMatrix<f64>, v: &TangentAtStiefel) -> Result<TangentAtStiefel> {
    let base = embed_isometric(l, &v.base)?;
    Ok(TangentAtStiefel::new_unchecked(base, l * &v.direction))
}

/// Left action `Y ↦ T ∘ Y` of an orthogonal operator of the ambient space.
pub fn isometry_action(t: &DMatrix<f64>, y: &StiefelPoint) -> Result<StiefelPoint> {
    if !t.is_square() || t.nrows() != y.ambient_dim() {
        return Err(shape_mismatch((y.ambient_dim(), y.ambient_dim()), t.shape()));
    }
    ensure_isometric(t)?;
    Ok(StiefelPoint::from_frame_unchecked(t * &y.frame))
}

/// Right action `Y ↦ Y ∘ Aᵗ` of `O(p)`.
pub fn op_action(a: &DMatrix<f64>, y: &StiefelPoint) -> Result<StiefelPoint> {
    if !a.is_square() || a.nrows() != y.width() {
        return Err(shape_mismatch((y.width(), y.width()), a.shape()));
    }
    ensure_isometric(a)?;
    Ok(StiefelPoint::from_frame_unchecked(&y.frame * a.transpose()))
}

/// Horizontal lift of a tangent vector into `so(n)` for the submersion
/// `O(n) → St(p, n)`, expressed in the orthonormal frame `[Y | Y⊥]`.
fn lie_algebra_lift(v: &AmbientMap, y: &AmbientMap, perp: &AmbientMap) -> DMatrix<f64> {
    let (n, p) = y.shape();
    let a = y.transpose() * v;
    let b = perp.transpose() * v;
    let mut omega = DMatrix::zeros(n, n);
    omega.view_mut((0, 0), (p, p)).copy_from(&a);
    omega.view_mut((0, p), (p, n - p)).copy_from(&(-b.transpose()));
    omega.view_mut((p, 0), (n - p, p)).copy_from(&b);
    omega
}

/// Sectional curvature of `span(V, W)` for the quotient metric of `O(n)`
/// endowed with the bi-invariant metric `scale · Tr(Xᵗ Y)`:
///
/// `K = (¼‖[X, Y]_𝔪‖² + ‖[X, Y]_𝔥‖²) / (scale · (‖X‖²‖Y‖² − ⟨X, Y⟩²))`
///
/// where `X`, `Y` are horizontal lifts and `𝔥 = so(n − p)` is the isotropy
/// algebra.
pub fn oneill_curvature(v: &TangentAtStiefel, w: &TangentAtStiefel, scale: f64) -> Result<f64> {
    ensure_same_base(&v.base, &w.base)?;
    let y = &v.base.frame;
    let (n, p) = y.shape();
    let perp = complete_orthonormal(y, n - p);
    let x1 = lie_algebra_lift(&v.direction, y, &perp);
    let x2 = lie_algebra_lift(&w.direction, y, &perp);
    let n11 = x1.norm_squared();
    let n22 = x2.norm_squared();
    let n12 = x1.dot(&x2);
    let area = n11 * n22 - n12 * n12;
    if n11 == 0.0 || n22 == 0.0 || area <= 1e-12 * n11 * n22 {
        let rel = if n11 * n22 > 0.0 { area / (n11 * n22) } else { 0.0 };
        return Err(GeomError::DegeneratePlane { area: rel });
    }
    let bracket = &x1 * &x2 - &x2 * &x1;
    let isotropy = bracket.view((p, p), (n - p, n - p)).norm_squared();
    let complement = bracket.norm_squared() - isotropy;
    Ok((0.25 * complement + isotropy) / (scale * area))
}

/// Scale of the bi-invariant metric on `O(n)` that makes the quotient metric
/// coincide with the canonical metric, fitted on the unit sphere `St(1, 3)`
/// whose curvature is 1.
pub fn canonical_curvature_scale() -> f64 {
    static SCALE: OnceLock<f64> = OnceLock::new();
    *SCALE.get_or_init(|| {
        let y = StiefelPoint::standard(3, 1).expect("valid frame");
        let mut v = DMatrix::zeros(3, 1);
        v[(1, 0)] = 1.0;
        let mut w = DMatrix::zeros(3, 1);
        w[(2, 0)] = 1.0;
        let v = TangentAtStiefel::new_unchecked(y.clone(), v);
        let w = TangentAtStiefel::new_unchecked(y, w);
        oneill_curvature(&v, &w, 1.0).expect("nondegenerate plane")
    })
}

/// Sectional curvature of `span(V, W)` in the canonical metric.
pub fn sectional_curvature_canonical(v: &TangentAtStiefel, w: &TangentAtStiefel) -> Result<f64> {
    oneill_curvature(v, w, canonical_curvature_scale())
}

/// Gram–Schmidt in the chosen metric; fails on (nearly) dependent inputs.
pub(crate) fn orthonormal_pair(
    v: &TangentAtStiefel,
    w: &TangentAtStiefel,
    kind: MetricKind,
) -> Result<(AmbientMap, AmbientMap)> {
    ensure_same_base(&v.base, &w.base)?;
    let y = &v.base.frame;
    let vv = metric_raw(y, &v.direction, &v.direction, kind);
    let ww = metric_raw(y, &w.direction, &w.direction, kind);
    let vw = metric_raw(y, &v.direction, &w.direction, kind);
    let area = vv * ww - vw * vw;
    if vv <= 0.0 || ww <= 0.0 || area <= 1e-12 * vv * ww {
        let rel = if vv * ww > 0.0 { area / (vv * ww) } else { 0.0 };
        return Err(GeomError::DegeneratePlane { area: rel });
    }
    let e1 = &v.direction / vv.sqrt();
    let w_perp = &w.direction - &e1 * (vw / vv.sqrt());
    let e2 = &w_perp / metric_raw(y, &w_perp, &w_perp, kind).sqrt();
    Ok((e1, e2))
}

/// Geodesic-deviation estimate of the sectional curvature of `span(V, W)`.
///
/// For orthonormal `e₁, e₂` the Jacobi field `J(t) = ∂ₛ exp_Y(t(e₁ + s e₂))`
/// satisfies `‖J(t)‖² = t² − K t⁴/3 + O(t⁵)`. `J` is evaluated by central
/// differences in `s` and the leading error is removed by Richardson
/// extrapolation over two values of `t`.
pub fn jacobi_curvature_estimate(
    v: &TangentAtStiefel,
    w: &TangentAtStiefel,
    kind: MetricKind,
) -> Result<f64> {
    let (e1, e2) = orthonormal_pair(v, w, kind)?;
    let y = &v.base.frame;
    let hs = 1e-4;
    let estimate = |t: f64| -> f64 {
        let (plus, _) = geodesic_raw(y, &(&e1 + &e2 * hs), t, kind);
        let (minus, _) = geodesic_raw(y, &(&e1 - &e2 * hs), t, kind);
        let (center, _) = geodesic_raw(y, &e1, t, kind);
        let jac = (plus - minus) / (2.0 * hs);
        let jj = metric_raw(&center, &jac, &jac, kind);
        3.0 * (t * t - jj) / t.powi(4)
    };
    let t = 0.05;
    Ok(2.0 * estimate(t / 2.0) - estimate(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{gaussian_matrix, random_orthogonal, random_skew, seeded_rng};
    use std::f64::consts::FRAC_PI_2;

    fn unit(n: usize, i: usize) -> AmbientMap {
        DMatrix::from_fn(n, 1, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn construction_checks() {
        assert!(matches!(
            StiefelPoint::new(DMatrix::identity(3, 2)),
            Err(GeomError::AmbientTooSmall { n: 3, p: 2 })
        ));
        let mut f = DMatrix::from_fn(4, 2, |i, j| if i == j { 1.0 } else { 0.0 });
        f[(0, 1)] = 1e-3;
        assert!(matches!(
            StiefelPoint::new(f),
            Err(GeomError::NotOrthonormal { .. })
        ));
        let y = StiefelPoint::standard(4, 2).unwrap();
        let bad = DMatrix::from_fn(4, 2, |i, j| if i == j { 1.0 } else { 0.0 });
        assert!(matches!(
            TangentAtStiefel::new(y, bad),
            Err(GeomError::NotTangent { .. })
        ));
    }

    #[test]
    fn tangent_project_examples() {
        let mut rng = seeded_rng(10);
        let y = StiefelPoint::random(6, 2, &mut rng).unwrap();
        let v = y.random_tangent(&mut rng);
        let again = tangent_project(&y, v.direction()).unwrap();
        assert!((again.direction() - v.direction()).norm() < 1e-12);

        let s = StiefelPoint::random(5, 1, &mut rng).unwrap();
        let z = tangent_project(&s, s.frame()).unwrap();
        assert!(z.direction().norm() < 1e-14);
    }

    #[test]
    fn l_operator_examples() {
        let mut rng = seeded_rng(12);
        let y = StiefelPoint::random(6, 2, &mut rng).unwrap();
        let col = y.frame().column(0).into_owned();
        let out = l_operator(&y, &col).unwrap();
        assert!((out - &col * 0.5).norm() < 1e-14);
        let perp = complete_orthonormal(y.frame(), 1).column(0).into_owned();
        let out = l_operator(&y, &perp).unwrap();
        assert!((out - &perp).norm() < 1e-14);
    }

    #[test]
    fn metric_examples() {
        let mut rng = seeded_rng(13);
        let y = StiefelPoint::random(6, 3, &mut rng).unwrap();
        let perp = complete_orthonormal(y.frame(), 3);
        let horiz = TangentAtStiefel::new(y.clone(), &perp * gaussian_matrix(3, 3, &mut rng)).unwrap();
        let e = metric(&y, &horiz, &horiz, MetricKind::Euclidean).unwrap();
        let c = metric(&y, &horiz, &horiz, MetricKind::Canonical).unwrap();
        assert!((e - c).abs() < 1e-12);

        let vert = TangentAtStiefel::new(y.clone(), y.frame() * random_skew(3, &mut rng)).unwrap();
        let e = metric(&y, &vert, &vert, MetricKind::Euclidean).unwrap();
        let c = metric(&y, &vert, &vert, MetricKind::Canonical).unwrap();
        assert!((c - 0.5 * e).abs() < 1e-12);

        let s = StiefelPoint::random(4, 1, &mut rng).unwrap();
        let v = s.random_tangent(&mut rng);
        let e = metric(&s, &v, &v, MetricKind::Euclidean).unwrap();
        let c = metric(&s, &v, &v, MetricKind::Canonical).unwrap();
        assert!((e - c).abs() < 1e-12);

        let other = StiefelPoint::random(6, 3, &mut rng).unwrap();
        assert_eq!(
            metric(&other, &horiz, &horiz, MetricKind::Canonical),
            Err(GeomError::BaseMismatch)
        );
    }

    #[test]
    fn sphere_geodesic_is_great_circle() {
        let mut rng = seeded_rng(14);
        let y = StiefelPoint::random(5, 1, &mut rng).unwrap();
        let v = y.random_tangent(&mut rng);
        let speed = v.direction().norm();
        for kind in MetricKind::ALL {
            for &t in &[0.3, 1.0, 2.5] {
                let g = geodesic(&v, t, kind);
                let expected = y.frame() * (speed * t).cos() + v.direction() / speed * (speed * t).sin();
                assert!((g.frame() - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_velocity_is_constant() {
        let y = StiefelPoint::standard(6, 2).unwrap();
        let v = TangentAtStiefel::zero(y.clone());
        for kind in MetricKind::ALL {
            assert!((geodesic(&v, 3.0, kind).frame() - y.frame()).norm() < 1e-15);
            assert!((geodesic_ode(&v, 3.0, kind, 10).unwrap().frame() - y.frame()).norm() < 1e-15);
        }
    }

    #[test]
    fn closed_form_matches_ode() {
        let mut rng = seeded_rng(15);
        let y = StiefelPoint::random(4, 2, &mut rng).unwrap();
        let v = y.random_tangent(&mut rng);
        let v = v.scaled(1.5 / v.direction().norm());
        for kind in MetricKind::ALL {
            let closed = geodesic(&v, 1.0, kind);
            assert!(orthonormality_residual(closed.frame()) < 1e-9);
            let ode = geodesic_ode(&v, 1.0, kind, 2000).unwrap();
            assert!(closed.chordal_distance(&ode) < 1e-6, "{kind:?}");
        }
    }

    #[test]
    fn ode_converges_at_fourth_order() {
        let mut rng = seeded_rng(16);
        let y = StiefelPoint::random(5, 1, &mut rng).unwrap();
        let v = y.random_tangent(&mut rng).scaled(1.0);
        let exact = geodesic(&v, 1.0, MetricKind::Euclidean);
        let fine = geodesic_ode(&v, 1.0, MetricKind::Euclidean, 10_000).unwrap();
        assert!(exact.chordal_distance(&fine) <= 1e-8);

        let y = StiefelPoint::random(6, 2, &mut rng).unwrap();
        let v = y.random_tangent(&mut rng);
        for kind in MetricKind::ALL {
            let exact = geodesic(&v, 1.0, kind);
            let coarse = geodesic_ode(&v, 1.0, kind, 32).unwrap().chordal_distance(&exact);
            let halved = geodesic_ode(&v, 1.0, kind, 64).unwrap().chordal_distance(&exact);
            assert!(coarse / halved >= 3.5, "{kind:?}: {coarse} / {halved}");
        }
    }

    #[test]
    fn constant_speed() {
        let mut rng = seeded_rng(17);
        let y = StiefelPoint::random(7, 3, &mut rng).unwrap();
        let v = y.random_tangent(&mut rng);
        for kind in MetricKind::ALL {
            let s0 = norm(&v, kind);
            for i in 1..=10 {
                let vt = geodesic_with_velocity(&v, 0.3 * i as f64, kind);
                assert!((norm(&vt, kind) - s0).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn distance_examples() {
        let y = StiefelPoint::new(unit(4, 0)).unwrap();
        assert_eq!(distance(&y, &y, MetricKind::Euclidean).unwrap(), 0.0);
        let z = StiefelPoint::new(unit(4, 1)).unwrap();
        for kind in MetricKind::ALL {
            let d = distance(&y, &z, kind).unwrap();
            assert!((d - FRAC_PI_2).abs() < 1e-10);
        }
    }

    #[test]
    fn distance_recovers_geodesic_length() {
        let mut rng = seeded_rng(18);
        let y = StiefelPoint::random(4, 2, &mut rng).unwrap();
        let v = y.random_tangent(&mut rng);
        let v = v.scaled(0.6 / v.direction().norm());
        for kind in MetricKind::ALL {
            let target = geodesic(&v, 1.0, kind);
            let log = log_map(&y, &target, kind).unwrap();
            assert!(geodesic(&log, 1.0, kind).chordal_distance(&target) < 1e-10);
            assert!((norm(&log, kind) - norm(&v, kind)).abs() < 1e-8);
        }
    }

    #[test]
    fn distance_comparison_between_metrics() {
        let mut rng = seeded_rng(19);
        for _ in 0..5 {
            let a = StiefelPoint::random(4, 2, &mut rng).unwrap();
            let b = StiefelPoint::random(4, 2, &mut rng).unwrap();
            let de = distance(&a, &b, MetricKind::Euclidean).unwrap();
            let dc = distance(&a, &b, MetricKind::Canonical).unwrap();
            assert!(dc >= 0.5 * de * (1.0 - 1e-8), "{dc} vs {de}");
            assert!(dc <= de * (1.0 + 1e-8), "{dc} vs {de}");
        }
    }

    #[test]
    fn isometries_and_op_action() {
        let mut rng = seeded_rng(20);
        let y = StiefelPoint::random(6, 2, &mut rng).unwrap();
        let id = DMatrix::identity(6, 6);
        assert_eq!(isometry_action(&id, &y).unwrap(), y);
        assert_eq!(op_action(&DMatrix::identity(2, 2), &y).unwrap(), y);

        let rot = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
        let flipped = op_action(&rot, &y).unwrap();
        assert!((flipped.frame() + y.frame()).norm() < 1e-15);

        let t = random_orthogonal(6, &mut rng);
        let a = random_orthogonal(2, &mut rng);
        let lhs = isometry_action(&t, &op_action(&a, &y).unwrap()).unwrap();
        let rhs = op_action(&a, &isometry_action(&t, &y).unwrap()).unwrap();
        assert!((lhs.frame() - rhs.frame()).norm() < 1e-14);

        let v = y.random_tangent(&mut rng);
        let w = y.random_tangent(&mut rng);
        let tv = push_tangent(&t, &v).unwrap();
        let tw = push_tangent(&t, &w).unwrap();
        for kind in MetricKind::ALL {
            let before = metric(&y, &v, &w, kind).unwrap();
            let after = metric(tv.base(), &tv, &tw, kind).unwrap();
            assert!((before - after).abs() < 1e-12);
        }

        assert!(matches!(
            isometry_action(&(id * 2.0), &y),
            Err(GeomError::NotIsometric { .. })
        ));
    }

    #[test]
    fn op_action_is_free_on_samples() {
        let mut rng = seeded_rng(22);
        for _ in 0..100 {
            let y = StiefelPoint::random(6, 2, &mut rng).unwrap();
            for _ in 0..20 {
                let a = random_orthogonal(2, &mut rng);
                let moved = op_action(&a, &y).unwrap();
                let bound = (a.transpose() - DMatrix::identity(2, 2)).norm();
                let gap = moved.chordal_distance(&y);
                assert!((gap - bound).abs() < 1e-12);
                if bound > 0.1 {
                    assert!(gap > 0.1);
                }
            }
        }
    }

    #[test]
    fn sphere_curvature_is_one() {
        assert!((canonical_curvature_scale() - 0.5).abs() < 1e-14);
        let mut rng = seeded_rng(23);
        let y = StiefelPoint::random(6, 1, &mut rng).unwrap();
        for _ in 0..10 {
            let v = y.random_tangent(&mut rng);
            let w = y.random_tangent(&mut rng);
            let k = sectional_curvature_canonical(&v, &w).unwrap();
            assert!((k - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn curvature_is_nonconstant_for_p2() {
        let y = StiefelPoint::standard(4, 2).unwrap();
        let mk = |entries: &[(usize, usize, f64)]| {
            let mut m = DMatrix::zeros(4, 2);
            for &(i, j, v) in entries {
                m[(i, j)] = v;
            }
            TangentAtStiefel::new(y.clone(), m).unwrap()
        };
        let vertical = mk(&[(0, 1, 1.0), (1, 0, -1.0)]);
        let h1 = mk(&[(2, 0, 1.0)]);
        let h2 = mk(&[(3, 1, 1.0)]);
        let h3 = mk(&[(3, 0, 1.0)]);
        let k_a = sectional_curvature_canonical(&vertical, &h1).unwrap();
        let k_b = sectional_curvature_canonical(&h1, &h2).unwrap();
        let k_c = sectional_curvature_canonical(&h1, &h3).unwrap();
        let ks = [k_a, k_b, k_c];
        let spread = ks.iter().cloned().fold(f64::MIN, f64::max) - ks.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 0.05, "{ks:?}");
        assert!(ks.iter().all(|&k| k >= -1e-9));
    }

    #[test]
    fn curvature_matches_jacobi_estimate() {
        let mut rng = seeded_rng(24);
        for (n, p) in [(4, 2), (6, 3)] {
            let y = StiefelPoint::random(n, p, &mut rng).unwrap();
            for _ in 0..3 {
                let v = y.random_tangent(&mut rng);
                let w = y.random_tangent(&mut rng);
                let k = sectional_curvature_canonical(&v, &w).unwrap();
                let j = jacobi_curvature_estimate(&v, &w, MetricKind::Canonical).unwrap();
                assert!((k - j).abs() < 5e-3, "{k} vs {j}");
            }
        }
    }

    #[test]
    fn degenerate_plane_is_rejected() {
        let mut rng = seeded_rng(25);
        let y = StiefelPoint::random(4, 2, &mut rng).unwrap();
        let v = y.random_tangent(&mut rng);
        assert!(matches!(
            sectional_curvature_canonical(&v, &v.scaled(2.0)),
            Err(GeomError::DegeneratePlane { .. })
        ));
    }

    #[test]
    fn embedding_preserves_metric_and_geodesics() {
        let mut rng = seeded_rng(26);
        let inclusion = DMatrix::from_fn(6, 4, |i, j| if i == j { 1.0 } else { 0.0 });
        let y = StiefelPoint::random(4, 2, &mut rng).unwrap();
        let e = embed_isometric(&inclusion, &y).unwrap();
        assert_eq!(e.frame().rows(0, 4), y.frame().rows(0, 4));
        assert!(e.frame().rows(4, 2).norm() == 0.0);

        let l = random_frame(8, 4, &mut rng);
        let v = y.random_tangent(&mut rng);
        let w = y.random_tangent(&mut rng);
        let lv = push_tangent(&l, &v).unwrap();
        let lw = push_tangent(&l, &w).unwrap();
        let proj_perp = DMatrix::identity(8, 8) - &l * l.transpose();
        for kind in MetricKind::ALL {
            let before = metric(&y, &v, &w, kind).unwrap();
            let after = metric(lv.base(), &lv, &lw, kind).unwrap();
            assert!((before - after).abs() < 1e-12);
            for i in 0..=20 {
                let g = geodesic(&lv, 0.1 * i as f64, kind);
                assert!((&proj_perp * g.frame()).norm() < 1e-9);
            }
        }
        assert!(matches!(
            embed_isometric(&(l * 1.1), &y),
            Err(GeomError::NotIsometric { .. })
        ));
    }
}
