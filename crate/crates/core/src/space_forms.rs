//! Constant-curvature model spaces and their discrete quotients.
//!
//! * Upper half-space `{x ∈ ℝᵐ : x_m > 0}` with metric `x_m⁻² Σ dxᵢ²` and the
//!   hyperboloid `{u ∈ ℝ^{m+1} : q(u) = −1, t > 0}` of a Lorentz form with the
//!   time slot last. A half-space with `m` coordinates is modelled on a
//!   hyperboloid with `m + 1` coordinates.
//! * `ℤⁿ` acting on the half-space (`m = n + 1`) by horizontal translations,
//!   and on the hyperboloid by the conjugated Lorentz matrices.
//! * The infinite-dimensional hyperboloid with a truncated `l₂(ℤⁿ)` block.
//! * Flat tori `ℝⁿ/Γ` and spherical scalar quotients.

use nalgebra::{DMatrix, DVector, Quaternion};
use rand::Rng;
use serde::Serialize;

use crate::actions::{right_translation, BoundaryMode, L2Truncation};
use crate::error::{shape_mismatch, GeomError, Result};
use crate::linalg::{ensure_finite, MinkowskiForm};
use crate::metric_space::MetricSpace;
use crate::sampling::{gaussian, gaussian_vector, random_unit_vector, seeded_rng};

const CONSTRAINT_TOL: f64 = 1e-10;

fn ensure_finite_vector(v: &DVector<f64>) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::NonFinite)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpacePoint {
    coords: DVector<f64>,
}

impl HalfSpacePoint {
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        ensure_finite_vector(&coords)?;
        if coords.len() < 2 {
            return Err(GeomError::InvalidArgument("half-space needs at least two coordinates".into()));
        }
        let h = coords[coords.len() - 1];
        if h <= 0.0 {
            return Err(GeomError::Constraint(format!("height {h} is not positive")));
        }
        Ok(Self { coords })
    }

    /// Point with horizontal part `x` and height `h`.
    pub fn from_parts(x: &[f64], h: f64) -> Result<Self> {
        let mut coords = DVector::zeros(x.len() + 1);
        coords.rows_mut(0, x.len()).copy_from_slice(x);
        coords[x.len()] = h;
        Self::new(coords)
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    pub fn horizontal(&self) -> DVector<f64> {
        self.coords.rows(0, self.coords.len() - 1).into_owned()
    }

    /// Random point with Gaussian horizontal part and log-normal height.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut coords = gaussian_vector(dim, rng);
        coords[dim - 1] = gaussian(rng).exp();
        Self { coords }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperboloidPoint {
    coords: DVector<f64>,
}

impl HyperboloidPoint {
    /// `coords = (ξ₁, …, ξ_m, t)` with `‖ξ‖² − t² = −1` and `t > 0`.
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        ensure_finite_vector(&coords)?;
        if coords.len() < 2 {
            return Err(GeomError::InvalidArgument("hyperboloid needs at least two coordinates".into()));
        }
        let t = coords[coords.len() - 1];
        if t <= 0.0 {
            return Err(GeomError::Constraint("time coordinate must be positive".into()));
        }
        let q = lorentz_quadratic(&coords);
        if (q + 1.0).abs() > CONSTRAINT_TOL * t.max(1.0).powi(2) {
            return Err(GeomError::Constraint(format!("q(u) = {q} instead of −1")));
        }
        Ok(Self { coords })
    }

    /// Point with spatial part `xi` on the upper sheet.
    pub fn from_spatial(xi: &DVector<f64>) -> Self {
        let mut coords = DVector::zeros(xi.len() + 1);
        coords.rows_mut(0, xi.len()).copy_from(xi);
        coords[xi.len()] = (1.0 + xi.norm_squared()).sqrt();
        Self { coords }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn time(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    pub fn basepoint(spatial: usize) -> Self {
        Self::from_spatial(&DVector::zeros(spatial))
    }
}

/// `‖ξ‖² − t²` with the last slot as time.
fn lorentz_quadratic(u: &DVector<f64>) -> f64 {
    let k = u.len() - 1;
    u.rows(0, k).norm_squared() - u[k] * u[k]
}

/// `arcosh(1 + ‖x − y‖² / (2 x_m y_m))`.
pub fn halfspace_distance(x: &HalfSpacePoint, y: &HalfSpacePoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(shape_mismatch((x.dim(), 1), (y.dim(), 1)));
    }
    let delta = (&x.coords - &y.coords).norm_squared() / (2.0 * x.height() * y.height());
    Ok((delta + (delta * (2.0 + delta)).sqrt()).ln_1p())
}

/// `arcosh(−⟨u, v⟩)`, evaluated as `2 asinh(√q(u − v) / 2)`.
pub fn hyperboloid_distance(u: &HyperboloidPoint, v: &HyperboloidPoint) -> Result<f64> {
    if u.coords.len() != v.coords.len() {
        return Err(shape_mismatch((u.coords.len(), 1), (v.coords.len(), 1)));
    }
    lorentz_distance(&u.coords, &v.coords)
}

fn lorentz_distance(u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    let q = lorentz_quadratic(&(u - v)).max(0.0);
    Ok(2.0 * (q.sqrt() / 2.0).asinh())
}

/// Half-space to hyperboloid: for `(x, h)` with `s = ‖x‖² + h²`,
/// `ξᵢ = xᵢ/h`, `ξ_m = (s − 1)/(2h)`, `t = (s + 1)/(2h)`.
/// Sends `(0, …, 0, 1)` to the basepoint `(0, …, 0, 1)`.
pub fn to_hyperboloid(x: &HalfSpacePoint) -> HyperboloidPoint {
    let m = x.dim();
    let h = x.height();
    let s = x.coords.norm_squared();
    let mut coords = DVector::zeros(m + 1);
    for i in 0..m - 1 {
        coords[i] = x.coords[i] / h;
    }
    coords[m - 1] = (s - 1.0) / (2.0 * h);
    coords[m] = (s + 1.0) / (2.0 * h);
    HyperboloidPoint { coords }
}

/// Inverse of [`to_hyperboloid`]: `h = 1/(t − ξ_m)`, `xᵢ = ξᵢ h`.
pub fn to_halfspace(u: &HyperboloidPoint) -> HalfSpacePoint {
    let m = u.coords.len() - 1;
    let t = u.coords[m];
    let last = u.coords[m - 1];
    // t − ξ_m = (1 + Σ_{i<m} ξᵢ²)/(t + ξ_m) avoids cancellation when ξ_m > 0
    let gap = if last > 0.0 {
        (1.0 + u.coords.rows(0, m - 1).norm_squared()) / (t + last)
    } else {
        t - last
    };
    let h = 1.0 / gap;
    let mut coords = DVector::zeros(m);
    for i in 0..m - 1 {
        coords[i] = u.coords[i] * h;
    }
    coords[m - 1] = h;
    HalfSpacePoint { coords }
}

/// `x ↦ x + (m, 0)`.
pub fn zn_halfspace_action(m: &[i64], x: &HalfSpacePoint) -> Result<HalfSpacePoint> {
    if m.len() + 1 != x.dim() {
        return Err(shape_mismatch((x.dim() - 1, 1), (m.len(), 1)));
    }
    let mut coords = x.coords.clone();
    for (c, &s) in coords.iter_mut().zip(m) {
        *c += s as f64;
    }
    Ok(HalfSpacePoint { coords })
}

/// Lorentz matrix of the translation by `m ∈ ℤⁿ` acting on `ℝ^{n+2}`,
/// obtained by conjugating the half-space translation through the model map
/// on `n + 2` reference points: `M = P' P⁻¹`.
pub fn zn_minkowski_matrix(m: &[i64]) -> DMatrix<f64> {
    let n = m.len();
    let mut refs = Vec::with_capacity(n + 2);
    refs.push(HalfSpacePoint::from_parts(&vec![0.0; n], 1.0).expect("valid"));
    refs.push(HalfSpacePoint::from_parts(&vec![0.0; n], 2.0).expect("valid"));
    for i in 0..n {
        let mut x = vec![0.0; n];
        x[i] = 1.0;
        refs.push(HalfSpacePoint::from_parts(&x, 1.0).expect("valid"));
    }
    let columns: Vec<DVector<f64>> = refs.iter().map(|r| to_hyperboloid(r).coords).collect();
    let images: Vec<DVector<f64>> = refs
        .iter()
        .map(|r| to_hyperboloid(&zn_halfspace_action(m, r).expect("matching dims")).coords)
        .collect();
    let p = DMatrix::from_columns(&columns);
    let q = DMatrix::from_columns(&images);
    let p_inv = p.try_inverse().expect("reference points are independent");
    q * p_inv
}

/// `‖MᵗQM − Q‖_F` for the Lorentz form `Q` with time slot last.
pub fn lorentz_residual(m: &DMatrix<f64>) -> Result<f64> {
    let form = MinkowskiForm::lorentz(m.nrows() - 1)?;
    let q = form.matrix();
    Ok((m.transpose() * &q * m - q).norm())
}

/// Point of the truncated infinite-dimensional hyperboloid
/// `‖x‖² + ‖ξ‖² − t² = −1`, `t > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct HInftyPoint {
    pub l2: DVector<f64>,
    pub spatial: DVector<f64>,
    pub t: f64,
}

impl HInftyPoint {
    pub fn new(l2: DVector<f64>, spatial: DVector<f64>, t: f64) -> Result<Self> {
        let p = Self { l2, spatial, t };
        ensure_finite_vector(&p.l2)?;
        ensure_finite_vector(&p.spatial)?;
        if !t.is_finite() {
            return Err(GeomError::NonFinite);
        }
        if t <= 0.0 {
            return Err(GeomError::Constraint("time coordinate must be positive".into()));
        }
        let residual = p.constraint_residual();
        if residual > CONSTRAINT_TOL * t.max(1.0).powi(2) {
            return Err(GeomError::Constraint(format!("|q(z) + 1| = {residual:.3e}")));
        }
        Ok(p)
    }

    /// Lifts the two space blocks to the upper sheet.
    pub fn from_blocks(l2: DVector<f64>, spatial: DVector<f64>) -> Self {
        let t = (1.0 + l2.norm_squared() + spatial.norm_squared()).sqrt();
        Self { l2, spatial, t }
    }

    /// `|q(z) + 1|`.
    pub fn constraint_residual(&self) -> f64 {
        (self.l2.norm_squared() + self.spatial.norm_squared() - self.t * self.t + 1.0).abs()
    }

    fn stacked(&self) -> DVector<f64> {
        let a = self.l2.len();
        let b = self.spatial.len();
        let mut v = DVector::zeros(a + b + 1);
        v.rows_mut(0, a).copy_from(&self.l2);
        v.rows_mut(a, b).copy_from(&self.spatial);
        v[a + b] = self.t;
        v
    }

    /// The `(ξ, t)` block as a finite-dimensional hyperboloid point (only
    /// valid when the `l₂` block vanishes).
    pub fn finite_part(&self) -> Result<HyperboloidPoint> {
        let mut coords = DVector::zeros(self.spatial.len() + 1);
        coords.rows_mut(0, self.spatial.len()).copy_from(&self.spatial);
        coords[self.spatial.len()] = self.t;
        HyperboloidPoint::new(coords)
    }
}

pub fn hinfty_distance(a: &HInftyPoint, b: &HInftyPoint) -> Result<f64> {
    if a.l2.len() != b.l2.len() || a.spatial.len() != b.spatial.len() {
        return Err(shape_mismatch((a.l2.len(), a.spatial.len()), (b.l2.len(), b.spatial.len())));
    }
    lorentz_distance(&a.stacked(), &b.stacked())
}

/// `m·(x, ξ, t) = (R_m x, M(m)(ξ, t))` with a cyclic right translation on the
/// `l₂(ℤⁿ)` window and the Lorentz matrix on the finite block.
pub fn hinfty_action(m: &[i64], z: &HInftyPoint, trunc: &L2Truncation) -> Result<HInftyPoint> {
    if trunc.mode() != BoundaryMode::Cyclic {
        return Err(GeomError::InvalidArgument("the l2 block needs a cyclic window".into()));
    }
    if z.l2.len() != trunc.dim() {
        return Err(shape_mismatch((trunc.dim(), 1), (z.l2.len(), 1)));
    }
    if z.spatial.len() != m.len() + 1 {
        return Err(shape_mismatch((m.len() + 1, 1), (z.spatial.len(), 1)));
    }
    let l2 = right_translation(m, trunc)?.apply(&z.l2);
    let lorentz = zn_minkowski_matrix(m);
    let mut block = DVector::zeros(z.spatial.len() + 1);
    block.rows_mut(0, z.spatial.len()).copy_from(&z.spatial);
    block[z.spatial.len()] = z.t;
    let moved = lorentz * block;
    let k = z.spatial.len();
    Ok(HInftyPoint {
        l2,
        spatial: moved.rows(0, k).into_owned(),
        t: moved[k],
    })
}

#[derive(Clone, Copy, Debug)]
pub struct HalfSpaceModel;

impl MetricSpace for HalfSpaceModel {
    type Point = HalfSpacePoint;

    fn distance(&self, a: &HalfSpacePoint, b: &HalfSpacePoint) -> Result<f64> {
        halfspace_distance(a, b)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HyperboloidModel;

impl MetricSpace for HyperboloidModel {
    type Point = HyperboloidPoint;

    fn distance(&self, a: &HyperboloidPoint, b: &HyperboloidPoint) -> Result<f64> {
        hyperboloid_distance(a, b)
    }
}

/// Gram condition number above which a lattice is rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e8;
const MAX_LATTICE_CANDIDATES: u128 = 5_000_000;

/// `Γ = span_ℤ(v₁, …, v_k) ⊂ ℝⁿ` for linearly independent generators stored as
/// matrix columns.
#[derive(Clone, Debug)]
pub struct Lattice {
    generators: DMatrix<f64>,
    gram_inverse: DMatrix<f64>,
    condition: f64,
}

impl Lattice {
    pub fn new(generators: DMatrix<f64>) -> Result<Self> {
        ensure_finite(&generators)?;
        let (n, k) = generators.shape();
        if k == 0 || k > n {
            return Err(GeomError::InvalidArgument(format!("lattice rank {k} in dimension {n}")));
        }
        let gram = generators.transpose() * &generators;
        let eig = gram.clone().symmetric_eigen();
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if condition > MAX_GRAM_CONDITION {
            return Err(GeomError::IllConditioned(condition));
        }
        let gram_inverse = gram.try_inverse().ok_or(GeomError::IllConditioned(condition))?;
        Ok(Self {
            generators,
            gram_inverse,
            condition,
        })
    }

    /// `ℤᵏ ⊂ ℝⁿ` spanned by the first `k` standard basis vectors.
    pub fn standard(n: usize, k: usize) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, k, |i, j| if i == j { 1.0 } else { 0.0 }))
    }

    /// Gaussian generators, resampled until well conditioned.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        loop {
            let g = crate::sampling::gaussian_matrix(n, k, rng);
            match Self::new(g) {
                Ok(l) if l.condition <= 1e3 => return Ok(l),
                Ok(_) | Err(GeomError::IllConditioned(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn ambient_dim(&self) -> usize {
        self.generators.nrows()
    }

    pub fn rank(&self) -> usize {
        self.generators.ncols()
    }

    pub fn gram_condition(&self) -> f64 {
        self.condition
    }

    pub fn point(&self, coefficients: &[i64]) -> DVector<f64> {
        let c = DVector::from_iterator(coefficients.len(), coefficients.iter().map(|&v| v as f64));
        &self.generators * c
    }
}

/// `min_{w ∈ Γ} ‖x − y − w‖`.
///
/// The difference splits into a part in `span Γ` with coefficients `c` and an
/// orthogonal remainder. Babai rounding of `c` gives an upper bound `ρ`; any
/// better lattice point `z` satisfies `|cᵢ − zᵢ| ≤ ρ √(G⁻¹)ᵢᵢ`, and that box is
/// enumerated exhaustively.
pub fn flat_quotient_distance(lattice: &Lattice, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    let n = lattice.ambient_dim();
    if x.len() != n || y.len() != n {
        return Err(shape_mismatch((n, 1), (x.len(), y.len())));
    }
    let b = &lattice.generators;
    let d = x - y;
    let c = &lattice.gram_inverse * (b.transpose() * &d);
    let perpendicular = (&d - b * &c).norm_squared();
    // candidates are scored on ‖d − Bz‖ directly so that exact orbit points
    // score zero up to the rounding of d itself
    let residual = |z: &[i64]| -> f64 {
        let w = DVector::from_iterator(z.len(), z.iter().map(|&zi| zi as f64));
        (&d - b * w).norm_squared()
    };
    let babai: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
    let mut best = residual(&babai);
    let rho = (best - perpendicular).max(0.0).sqrt();
    let ranges: Vec<(i64, i64)> = c
        .iter()
        .enumerate()
        .map(|(i, &ci)| {
            let half = rho * lattice.gram_inverse[(i, i)].sqrt() * (1.0 + 1e-9) + 1e-9;
            ((ci - half).ceil() as i64, (ci + half).floor() as i64)
        })
        .collect();
    let candidates: u128 = ranges.iter().map(|(lo, hi)| (hi - lo + 1).max(1) as u128).product();
    if candidates > MAX_LATTICE_CANDIDATES {
        return Err(GeomError::EnumerationOverflow {
            order: candidates,
            limit: MAX_LATTICE_CANDIDATES,
        });
    }
    let mut z: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().all(|(lo, hi)| lo <= hi) {
        'outer: loop {
            best = best.min(residual(&z));
            let mut i = z.len();
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                z[i] += 1;
                if z[i] <= ranges[i].1 {
                    break;
                }
                z[i] = ranges[i].0;
            }
        }
    }
    Ok(best.sqrt())
}

/// `ℝⁿ/Γ` with the quotient metric.
#[derive(Clone, Debug)]
pub struct FlatTorus {
    pub lattice: Lattice,
}

impl MetricSpace for FlatTorus {
    type Point = DVector<f64>;

    fn distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        flat_quotient_distance(&self.lattice, a, b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
    Quaternion,
}

impl ScalarField {
    /// Real dimension of the field.
    pub fn degree(&self) -> usize {
        match self {
            ScalarField::Real => 1,
            ScalarField::Complex => 2,
            ScalarField::Quaternion => 4,
        }
    }
}

/// Largest group enumerated by [`ScalarGroupSpec::elements`].
pub const MAX_SCALAR_GROUP: usize = 120;
const SCALAR_TOL: f64 = 1e-9;

/// Finite group of unit scalars of `ℝ`, `ℂ` or `ℍ`, given by generators.
/// Scalars are stored as quaternions `w + xi + yj + zk`.
#[derive(Clone, Debug)]
pub struct ScalarGroupSpec {
    field: ScalarField,
    generators: Vec<Quaternion<f64>>,
}

impl ScalarGroupSpec {
    pub fn new(field: ScalarField, generators: Vec<Quaternion<f64>>) -> Result<Self> {
        for g in &generators {
            if (g.norm() - 1.0).abs() > 1e-12 {
                return Err(GeomError::InvalidArgument(format!("scalar {g:?} is not a unit")));
            }
            let outside = match field {
                ScalarField::Real => g.i.abs() + g.j.abs() + g.k.abs(),
                ScalarField::Complex => g.j.abs() + g.k.abs(),
                ScalarField::Quaternion => 0.0,
            };
            if outside > 0.0 {
                return Err(GeomError::InvalidArgument(format!("scalar {g:?} is not in the field")));
            }
        }
        Ok(Self { field, generators })
    }

    /// `{±1} ⊂ ℝ`.
    pub fn real_sign() -> Self {
        Self {
            field: ScalarField::Real,
            generators: vec![Quaternion::new(-1.0, 0.0, 0.0, 0.0)],
        }
    }

    /// `ℤ_m ⊂ U(1)` generated by `e^{2πi/m}`.
    pub fn complex_cyclic(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(GeomError::InvalidArgument("order must be positive".into()));
        }
        let a = 2.0 * std::f64::consts::PI / m as f64;
        Ok(Self {
            field: ScalarField::Complex,
            generators: vec![Quaternion::new(a.cos(), a.sin(), 0.0, 0.0)],
        })
    }

    /// The quaternion group `{±1, ±i, ±j, ±k}`.
    pub fn quaternion_q8() -> Self {
        Self {
            field: ScalarField::Quaternion,
            generators: vec![Quaternion::new(0.0, 1.0, 0.0, 0.0), Quaternion::new(0.0, 0.0, 1.0, 0.0)],
        }
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    /// Closure of the generators under multiplication, identity first.
    pub fn elements(&self) -> Result<Vec<Quaternion<f64>>> {
        let mut elements = vec![Quaternion::identity()];
        let mut frontier = 0;
        while frontier < elements.len() {
            let current = elements[frontier];
            frontier += 1;
            for g in &self.generators {
                let product = g * current;
                if !elements.iter().any(|e| (e - product).norm() <= SCALAR_TOL) {
                    elements.push(product);
                    if elements.len() > MAX_SCALAR_GROUP {
                        return Err(GeomError::EnumerationOverflow {
                            order: elements.len() as u128,
                            limit: MAX_SCALAR_GROUP as u128,
                        });
                    }
                }
            }
        }
        for a in &elements {
            for b in &elements {
                let product = a * b;
                if !elements.iter().any(|e| (e - product).norm() <= SCALAR_TOL) {
                    return Err(GeomError::NonClosure(format!("{a:?} · {b:?}")));
                }
            }
        }
        Ok(elements)
    }

    /// Real matrix of left multiplication by `q` on `𝔽^dim ≅ ℝ^{d·dim}`.
    pub fn operator(&self, q: &Quaternion<f64>, dim: usize) -> DMatrix<f64> {
        let d = self.field.degree();
        let basis = [
            Quaternion::new(1.0, 0.0, 0.0, 0.0),
            Quaternion::new(0.0, 1.0, 0.0, 0.0),
            Quaternion::new(0.0, 0.0, 1.0, 0.0),
            Quaternion::new(0.0, 0.0, 0.0, 1.0),
        ];
        let mut block = DMatrix::zeros(d, d);
        for (col, e) in basis.iter().take(d).enumerate() {
            let image = q * e;
            let parts = [image.w, image.i, image.j, image.k];
            for row in 0..d {
                block[(row, col)] = parts[row];
            }
        }
        let mut out = DMatrix::zeros(d * dim, d * dim);
        for k in 0..dim {
            out.view_mut((k * d, k * d), (d, d)).copy_from(&block);
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalarElementCertificate {
    /// `(w, i, j, k)`.
    pub scalar: [f64; 4],
    /// Smallest singular value of `L_q − I`.
    pub min_gap: f64,
    pub displacement_mean: f64,
    pub displacement_spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SphereQuotientCertificate {
    pub field: ScalarField,
    pub order: usize,
    pub closed: bool,
    pub free: bool,
    pub clifford: bool,
    pub elements: Vec<ScalarElementCertificate>,
}

/// Certifies that a finite scalar group acts freely on the unit sphere of
/// `𝔽^dim` by Clifford translations.
pub fn sphere_quotient_check(
    spec: &ScalarGroupSpec,
    dim: usize,
    samples: usize,
    seed: u64,
) -> Result<SphereQuotientCertificate> {
    if dim == 0 || samples < 2 {
        return Err(GeomError::InvalidArgument("need dim ≥ 1 and at least two samples".into()));
    }
    let elements = spec.elements()?;
    let real_dim = spec.field.degree() * dim;
    let mut rng = seeded_rng(seed);
    let points: Vec<DVector<f64>> = (0..samples).map(|_| random_unit_vector(real_dim, &mut rng)).collect();
    let id = DMatrix::<f64>::identity(real_dim, real_dim);
    let mut certs = Vec::with_capacity(elements.len() - 1);
    for q in elements.iter().skip(1) {
        let op = spec.operator(q, dim);
        let gap = crate::linalg::thin_svd(&(&op - &id))?.sigma.min();
        let values: Vec<f64> = points
            .iter()
            .map(|x| crate::metric_space::sphere_angle(x, &(&op * x)))
            .collect();
        let profile = crate::metric_space::DisplacementProfile::from_values(values);
        certs.push(ScalarElementCertificate {
            scalar: [q.w, q.i, q.j, q.k],
            min_gap: gap,
            displacement_mean: profile.mean,
            displacement_spread: profile.spread(),
        });
    }
    Ok(SphereQuotientCertificate {
        field: spec.field,
        order: elements.len(),
        closed: true,
        free: certs.iter().all(|c| c.min_gap > crate::actions::FIXED_VECTOR_TOL),
        clifford: certs.iter().all(|c| c.displacement_spread <= SCALAR_TOL),
        elements: certs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn hs(x: &[f64], h: f64) -> HalfSpacePoint {
        HalfSpacePoint::from_parts(x, h).unwrap()
    }

    /// RK4 for the geodesic equation of `x_m⁻² Σ dxᵢ²`:
    /// `ẍ = (2ḣ/h) ẋ − (|ẋ|²/h) e_m`.
    fn integrate_halfspace_geodesic(x: &DVector<f64>, v: &DVector<f64>, steps: usize) -> DVector<f64> {
        let m = x.len();
        let accel = |p: &DVector<f64>, w: &DVector<f64>| {
            let h = p[m - 1];
            let mut a = w * (2.0 * w[m - 1] / h);
            a[m - 1] -= w.norm_squared() / h;
            a
        };
        let dt = 1.0 / steps as f64;
        let (mut p, mut w) = (x.clone(), v.clone());
        for _ in 0..steps {
            let k1 = (w.clone(), accel(&p, &w));
            let k2 = (&w + &k1.1 * (dt / 2.0), accel(&(&p + &k1.0 * (dt / 2.0)), &(&w + &k1.1 * (dt / 2.0))));
            let k3 = (&w + &k2.1 * (dt / 2.0), accel(&(&p + &k2.0 * (dt / 2.0)), &(&w + &k2.1 * (dt / 2.0))));
            let k4 = (&w + &k3.1 * dt, accel(&(&p + &k3.0 * dt), &(&w + &k3.1 * dt)));
            p += (k1.0 + &k2.0 * 2.0 + &k3.0 * 2.0 + k4.0) * (dt / 6.0);
            w += (k1.1 + &k2.1 * 2.0 + &k3.1 * 2.0 + k4.1) * (dt / 6.0);
        }
        p
    }

    #[test]
    fn halfspace_distance_examples() {
        assert!((halfspace_distance(&hs(&[0.0], 1.0), &hs(&[0.0], E)).unwrap() - 1.0).abs() < 1e-15);
        let x = hs(&[0.3, -1.0], 0.7);
        assert_eq!(halfspace_distance(&x, &x).unwrap(), 0.0);
        assert!(HalfSpacePoint::from_parts(&[0.0], 0.0).is_err());
    }

    #[test]
    fn halfspace_distance_matches_geodesic_length() {
        let mut rng = seeded_rng(1);
        for _ in 0..5 {
            let x = HalfSpacePoint::random(3, &mut rng);
            let v = gaussian_vector(3, &mut rng);
            let end = integrate_halfspace_geodesic(x.coords(), &v, 4000);
            let length = v.norm() / x.height();
            let d = halfspace_distance(&x, &HalfSpacePoint::new(end).unwrap()).unwrap();
            assert!((d - length).abs() < 1e-5, "{d} vs {length}");
        }
    }

    #[test]
    fn hyperboloid_examples() {
        let base = HyperboloidPoint::basepoint(2);
        assert_eq!(hyperboloid_distance(&base, &base).unwrap(), 0.0);
        let s: f64 = 1.7;
        let v = HyperboloidPoint::new(DVector::from_vec(vec![s.sinh(), 0.0, s.cosh()])).unwrap();
        assert!((hyperboloid_distance(&base, &v).unwrap() - s).abs() < 1e-14);
        assert!(HyperboloidPoint::new(DVector::from_vec(vec![1.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn model_map_examples() {
        let base = to_hyperboloid(&hs(&[0.0, 0.0], 1.0));
        assert_eq!(base.coords(), &DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]));
        let mut rng = seeded_rng(2);
        for _ in 0..200 {
            let x = HalfSpacePoint::random(3, &mut rng);
            let u = to_hyperboloid(&x);
            assert!(HyperboloidPoint::new(u.coords().clone()).is_ok());
            assert!((to_halfspace(&u).coords() - x.coords()).norm() <= 1e-12 * (1.0 + x.coords().norm()));
            let y = HalfSpacePoint::random(3, &mut rng);
            let d1 = halfspace_distance(&x, &y).unwrap();
            let d2 = hyperboloid_distance(&u, &to_hyperboloid(&y)).unwrap();
            assert!((d1 - d2).abs() < 1e-9);
        }
    }

    #[test]
    fn zn_translation_examples() {
        let x = hs(&[0.5, 0.2], 1.3);
        assert_eq!(zn_halfspace_action(&[0, 0], &x).unwrap(), x);
        let mut previous = f64::INFINITY;
        for h in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let p = hs(&[0.0, 0.0], h);
            let d = halfspace_distance(&p, &zn_halfspace_action(&[1, 2], &p).unwrap()).unwrap();
            let closed = (1.0 + 5.0 / (2.0 * h * h)).acosh();
            assert!((d - closed).abs() < 1e-12);
            assert!(d < previous);
            previous = d;
        }
    }

    #[test]
    fn minkowski_matrices() {
        assert!((zn_minkowski_matrix(&[0, 0]) - DMatrix::identity(4, 4)).norm() < 1e-12);
        let mut rng = seeded_rng(3);
        for _ in 0..20 {
            let a: Vec<i64> = (0..2).map(|_| rng.random_range(-3..=3)).collect();
            let b: Vec<i64> = (0..2).map(|_| rng.random_range(-2..=2)).collect();
            let ma = zn_minkowski_matrix(&a);
            assert!(lorentz_residual(&ma).unwrap() < 1e-10);
            let sum: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            assert!((zn_minkowski_matrix(&sum) - &ma * zn_minkowski_matrix(&b)).norm() < 1e-9);
            let x = HalfSpacePoint::random(3, &mut rng);
            let via_matrix = &ma * to_hyperboloid(&x).coords();
            let direct = to_hyperboloid(&zn_halfspace_action(&a, &x).unwrap());
            assert!((via_matrix - direct.coords()).norm() <= 1e-9 * (1.0 + direct.coords().norm()));
        }
    }

    #[test]
    fn hinfty_examples() {
        let trunc = L2Truncation::cyclic(1, 16).unwrap();
        let mut rng = seeded_rng(4);
        let z = HInftyPoint::from_blocks(trunc.random_supported_unit(2, &mut rng) * 0.8, gaussian_vector(2, &mut rng));
        assert!(HInftyPoint::new(z.l2.clone(), z.spatial.clone(), z.t).is_ok());
        let same = hinfty_action(&[0], &z, &trunc).unwrap();
        assert!((same.stacked() - z.stacked()).norm() < 1e-12);
        for k in 1..8 {
            let moved = hinfty_action(&[k], &z, &trunc).unwrap();
            assert!(moved.constraint_residual() < 1e-10);
            assert!(hinfty_distance(&z, &moved).unwrap() > 0.0);
            let back = hinfty_action(&[-k], &moved, &trunc).unwrap();
            assert!((back.stacked() - z.stacked()).norm() < 1e-9);
        }

        let flat = HInftyPoint::from_blocks(DVector::zeros(16), gaussian_vector(2, &mut rng));
        let moved = hinfty_action(&[3], &flat, &trunc).unwrap();
        assert_eq!(moved.l2, DVector::zeros(16));
        let direct = to_hyperboloid(&zn_halfspace_action(&[3], &to_halfspace(&flat.finite_part().unwrap())).unwrap());
        assert!((moved.finite_part().unwrap().coords() - direct.coords()).norm() < 1e-9);
    }

    #[test]
    fn flat_quotient_examples() {
        let lattice = Lattice::standard(2, 2).unwrap();
        let x = DVector::from_vec(vec![0.3, 0.1]);
        let v1 = lattice.point(&[1, 0]);
        assert!(flat_quotient_distance(&lattice, &(&x + v1), &x).unwrap() < 1e-15);
        let y = DVector::from_vec(vec![-0.2, -0.4]);
        let d = flat_quotient_distance(&lattice, &x, &y).unwrap();
        let mut brute = f64::INFINITY;
        for a in -2..=2 {
            for b in -2..=2 {
                brute = brute.min((&x - &y - lattice.point(&[a, b])).norm());
            }
        }
        assert!((d - brute).abs() < 1e-15);
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);

        let partial = Lattice::standard(3, 1).unwrap();
        let x = DVector::from_vec(vec![2.9, 1.0, -1.0]);
        let y = DVector::zeros(3);
        let d = flat_quotient_distance(&partial, &x, &y).unwrap();
        assert!((d - (0.01f64 + 2.0).sqrt()).abs() < 1e-12);

        let skinny = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 1.0, 1e-5]);
        assert!(matches!(Lattice::new(skinny), Err(GeomError::IllConditioned(_))));
    }

    #[test]
    fn sphere_quotients() {
        let c = sphere_quotient_check(&ScalarGroupSpec::real_sign(), 3, 50, 1).unwrap();
        assert!(c.free && c.clifford && c.order == 2);
        assert!((c.elements[0].displacement_mean - PI).abs() < 1e-12);

        let c = sphere_quotient_check(&ScalarGroupSpec::complex_cyclic(5).unwrap(), 2, 50, 2).unwrap();
        assert!(c.free && c.clifford && c.order == 5);
        for (k, e) in c.elements.iter().enumerate() {
            let theta = 2.0 * PI * (k + 1) as f64 / 5.0;
            assert!((e.displacement_mean - theta.cos().acos()).abs() < 1e-12);
        }

        let c = sphere_quotient_check(&ScalarGroupSpec::quaternion_q8(), 1, 50, 3).unwrap();
        assert!(c.free && c.clifford && c.order == 8);

        let irrational = ScalarGroupSpec::new(
            ScalarField::Complex,
            vec![Quaternion::new(1f64.cos(), 1f64.sin(), 0.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(irrational.elements(), Err(GeomError::EnumerationOverflow { .. })));
    }

    #[test]
    fn quaternion_multiplication_table() {
        let spec = ScalarGroupSpec::quaternion_q8();
        let i = Quaternion::new(0.0, 1.0, 0.0, 0.0);
        let j = Quaternion::new(0.0, 0.0, 1.0, 0.0);
        let k = Quaternion::new(0.0, 0.0, 0.0, 1.0);
        assert!((i * j - k).norm() < 1e-15);
        let (li, lj, lk) = (spec.operator(&i, 1), spec.operator(&j, 1), spec.operator(&k, 1));
        assert!((&li * &lj - &lk).norm() < 1e-15);
        assert!((&li * &li + DMatrix::identity(4, 4)).norm() < 1e-15);
    }
}
