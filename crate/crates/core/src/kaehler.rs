//! Complex Stiefel and Grassmann manifolds with their Kähler structure.
//!
//! The real metric is `⟨X, Y⟩ = Re Tr(Y* X)`, the complex structure `J` is
//! multiplication by `i` and the Kähler form is `ω(X, Y) = ⟨JX, Y⟩`, so that
//! the Hermitian product splits as `h = ⟨·,·⟩ − iω`.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{shape_mismatch, GeomError, Result};
use crate::linalg::{
    complex_thin_svd, ensure_finite_complex, hermitian_inner, unitarity_residual,
    ComplexAmbientMap, DEFAULT_TOL,
};
use crate::sampling::{random_complex_frame, random_complex_gaussian};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Real and symplectic parts of the Hermitian product.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KaehlerTriple {
    /// `⟨X, Y⟩ = Re h(X, Y)`.
    pub real_part: f64,
    /// `ω(X, Y) = −Im h(X, Y)`.
    pub omega_part: f64,
}

pub fn kaehler_triple(x: &ComplexAmbientMap, y: &ComplexAmbientMap) -> Result<KaehlerTriple> {
    let h = hermitian_inner(x, y)?;
    Ok(KaehlerTriple {
        real_part: h.re,
        omega_part: -h.im,
    })
}

/// `⟨X, Y⟩ = Re Tr(Y* X)`.
pub(crate) fn real_inner(x: &ComplexAmbientMap, y: &ComplexAmbientMap) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

pub fn apply_j(x: &ComplexAmbientMap) -> ComplexAmbientMap {
    x * I
}

fn check_unitary_frame(frame: &ComplexAmbientMap) -> Result<()> {
    ensure_finite_complex(frame)?;
    let (n, p) = frame.shape();
    if p == 0 || n < p {
        return Err(GeomError::AmbientTooSmall { n, p });
    }
    let residual = unitarity_residual(frame);
    if residual > DEFAULT_TOL {
        return Err(GeomError::NotOrthonormal { residual });
    }
    Ok(())
}

/// A unitary frame `Y` with `Y* Y = I`.
#[derive(Clone, Debug)]
pub struct ComplexStiefelPoint {
    frame: ComplexAmbientMap,
}

impl ComplexStiefelPoint {
    pub fn new(frame: ComplexAmbientMap) -> Result<Self> {
        check_unitary_frame(&frame)?;
        Ok(Self { frame })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<Self> {
        Self::new(random_complex_frame(n, p, rng))
    }

    pub fn frame(&self) -> &ComplexAmbientMap {
        &self.frame
    }

    /// Right action `Y ↦ Y A*` of `U(p)`.
    pub fn right_unitary(&self, a: &ComplexAmbientMap) -> Result<Self> {
        if !a.is_square() || a.nrows() != self.frame.ncols() {
            return Err(shape_mismatch((self.frame.ncols(), self.frame.ncols()), a.shape()));
        }
        ensure_unitary(a)?;
        Ok(Self {
            frame: &self.frame * a.adjoint(),
        })
    }

    /// Random tangent vector: projection of a Gaussian onto `{V : Y*V skew-Hermitian}`.
    pub fn random_tangent<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexAmbientMap {
        let z = random_complex_gaussian(self.frame.nrows(), self.frame.ncols(), rng);
        let yz = self.frame.adjoint() * &z;
        let herm = (&yz + yz.adjoint()) * Complex64::new(0.5, 0.0);
        z - &self.frame * herm
    }
}

/// A complex `p`-plane, compared through Hermitian projectors.
#[derive(Clone, Debug)]
pub struct ComplexGrassmannPoint {
    basis: ComplexAmbientMap,
}

impl ComplexGrassmannPoint {
    pub fn new(basis: ComplexAmbientMap) -> Result<Self> {
        check_unitary_frame(&basis)?;
        Ok(Self { basis })
    }

    pub fn from_stiefel(y: &ComplexStiefelPoint) -> Self {
        Self {
            basis: y.frame.clone(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<Self> {
        Self::new(random_complex_frame(n, p, rng))
    }

    pub fn basis(&self) -> &ComplexAmbientMap {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> ComplexAmbientMap {
        &self.basis * self.basis.adjoint()
    }

    pub fn projector_distance(&self, other: &ComplexGrassmannPoint) -> f64 {
        (self.projector() - other.projector()).norm()
    }

    pub fn same_subspace(&self, other: &ComplexGrassmannPoint) -> bool {
        self.basis.shape() == other.basis.shape()
            && self.projector_distance(other) <= crate::grassmann::SAME_SUBSPACE_TOL
    }

    pub fn random_horizontal<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexHorizontal {
        let z = random_complex_gaussian(self.ambient_dim(), self.rank(), rng);
        let direction = &z - &self.basis * (self.basis.adjoint() * &z);
        ComplexHorizontal {
            base: self.clone(),
            direction,
        }
    }
}

/// Horizontal vector `X` at a unitary basis `Y` (`Y* X = 0`).
#[derive(Clone, Debug)]
pub struct ComplexHorizontal {
    base: ComplexGrassmannPoint,
    direction: ComplexAmbientMap,
}

impl ComplexHorizontal {
    pub fn new(base: ComplexGrassmannPoint, direction: ComplexAmbientMap) -> Result<Self> {
        if direction.shape() != base.basis.shape() {
            return Err(shape_mismatch(base.basis.shape(), direction.shape()));
        }
        ensure_finite_complex(&direction)?;
        let residual = (base.basis.adjoint() * &direction).norm();
        if residual > DEFAULT_TOL * (1.0 + direction.norm()) {
            return Err(GeomError::NotTangent { residual });
        }
        Ok(Self { base, direction })
    }

    pub fn base(&self) -> &ComplexGrassmannPoint {
        &self.base
    }

    pub fn direction(&self) -> &ComplexAmbientMap {
        &self.direction
    }

    pub fn norm(&self) -> f64 {
        self.direction.norm()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            base: self.base.clone(),
            direction: &self.direction * Complex64::new(c, 0.0),
        }
    }

    /// `J X`, again horizontal.
    pub fn rotated(&self) -> Self {
        Self {
            base: self.base.clone(),
            direction: apply_j(&self.direction),
        }
    }
}

/// Removes the vertical part `Y (Y* V)` of a tangent vector of the complex
/// Stiefel manifold.
pub fn complex_horizontal_project(
    y: &ComplexStiefelPoint,
    v: &ComplexAmbientMap,
) -> Result<ComplexHorizontal> {
    if v.shape() != y.frame.shape() {
        return Err(shape_mismatch(y.frame.shape(), v.shape()));
    }
    ensure_finite_complex(v)?;
    let yv = y.frame.adjoint() * v;
    let residual = (&yv + yv.adjoint()).norm();
    if residual > DEFAULT_TOL * (1.0 + v.norm()) {
        return Err(GeomError::NotTangent { residual });
    }
    Ok(ComplexHorizontal {
        base: ComplexGrassmannPoint::from_stiefel(y),
        direction: v - &y.frame * yv,
    })
}

/// Geodesic of `Gr_ℂ` through the base of `xi` (horizontal lift):
/// with `ξ = U Σ W*`, `Y(t) = Y W cos(Σt) W* + U sin(Σt) W*`.
pub fn complex_grassmann_geodesic_frame(
    basis: &ComplexAmbientMap,
    direction: &ComplexAmbientMap,
    t: f64,
) -> ComplexAmbientMap {
    let svd = complex_thin_svd(direction).expect("finite direction");
    let cos = DMatrix::from_diagonal(&svd.sigma.map(|s| Complex64::new((s * t).cos(), 0.0)));
    let sin = DMatrix::from_diagonal(&svd.sigma.map(|s| Complex64::new((s * t).sin(), 0.0)));
    let wh = svd.v.adjoint();
    basis * &svd.v * cos * &wh + &svd.u * sin * &wh
}

pub fn complex_grassmann_geodesic(xi: &ComplexHorizontal, t: f64) -> ComplexGrassmannPoint {
    ComplexGrassmannPoint {
        basis: complex_grassmann_geodesic_frame(&xi.base.basis, &xi.direction, t),
    }
}

/// Sectional curvature of `span(X, Y)` for horizontal `X, Y` in the metric
/// `Re Tr(Y* X)`, from the symmetric-space bracket:
/// `K = (‖X*Y − Y*X‖² + ‖XY* − YX*‖²) / (2 (‖X‖²‖Y‖² − ⟨X, Y⟩²))`.
pub fn sectional_curvature_raw(x: &ComplexHorizontal, y: &ComplexHorizontal) -> Result<f64> {
    if x.base.basis.shape() != y.base.basis.shape()
        || (&x.base.basis - &y.base.basis).norm() > 1e-12
    {
        return Err(GeomError::BaseMismatch);
    }
    let a = &x.direction;
    let b = &y.direction;
    let aa = real_inner(a, a);
    let bb = real_inner(b, b);
    let ab = real_inner(a, b);
    let area = aa * bb - ab * ab;
    if aa <= 0.0 || bb <= 0.0 || area <= 1e-12 * aa * bb {
        let rel = if aa * bb > 0.0 { area / (aa * bb) } else { 0.0 };
        return Err(GeomError::DegeneratePlane { area: rel });
    }
    let small = a.adjoint() * b - b.adjoint() * a;
    let large = a * b.adjoint() - b * a.adjoint();
    Ok((small.norm_squared() + large.norm_squared()) / (2.0 * area))
}

/// Holomorphic sectional curvature `K(X, JX)` in the metric `Re Tr(Y* X)`,
/// which ranges over `[4/p, 4]`.
pub fn holomorphic_sectional_curvature_raw(x: &ComplexHorizontal) -> Result<f64> {
    if x.norm() <= DEFAULT_TOL {
        return Err(GeomError::DegeneratePlane { area: 0.0 });
    }
    sectional_curvature_raw(x, &x.rotated())
}

/// Factor mapping raw holomorphic curvatures onto the `[2/p, 2]` scale,
/// fitted on `ℂP¹ = Gr_ℂ(1, ℂ²)` where both bounds coincide at 2.
pub fn holomorphic_curvature_normalization() -> f64 {
    static FACTOR: OnceLock<f64> = OnceLock::new();
    *FACTOR.get_or_init(|| {
        let basis = DMatrix::from_column_slice(2, 1, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let base = ComplexGrassmannPoint { basis };
        let direction = DMatrix::from_column_slice(2, 1, &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let x = ComplexHorizontal { base, direction };
        2.0 / holomorphic_sectional_curvature_raw(&x).expect("nondegenerate")
    })
}

/// Holomorphic sectional curvature on the scale where it lies in `[2/p, 2]`.
pub fn holomorphic_sectional_curvature(x: &ComplexHorizontal) -> Result<f64> {
    Ok(holomorphic_curvature_normalization() * holomorphic_sectional_curvature_raw(x)?)
}

/// Geodesic-deviation estimate of the raw sectional curvature of
/// `span(X, Y)` (same scale as [`sectional_curvature_raw`]).
pub fn jacobi_curvature_estimate(x: &ComplexHorizontal, y: &ComplexHorizontal) -> Result<f64> {
    let a = &x.direction;
    let b = &y.direction;
    let aa = real_inner(a, a);
    let bb = real_inner(b, b);
    let ab = real_inner(a, b);
    if aa <= 0.0 || bb <= 0.0 || aa * bb - ab * ab <= 1e-12 * aa * bb {
        return Err(GeomError::DegeneratePlane { area: 0.0 });
    }
    let e1 = a * Complex64::new(1.0 / aa.sqrt(), 0.0);
    let w = b - &e1 * Complex64::new(ab / aa.sqrt(), 0.0);
    let e2 = &w * Complex64::new(1.0 / real_inner(&w, &w).sqrt(), 0.0);
    let basis = &x.base.basis;
    let hs = 1e-3;
    let estimate = |t: f64| -> f64 {
        let plus = complex_grassmann_geodesic_frame(basis, &(&e1 + &e2 * Complex64::new(hs, 0.0)), t);
        let minus = complex_grassmann_geodesic_frame(basis, &(&e1 - &e2 * Complex64::new(hs, 0.0)), t);
        let center = complex_grassmann_geodesic_frame(basis, &e1, t);
        let jac = (plus - minus) * Complex64::new(1.0 / (2.0 * hs), 0.0);
        let horizontal = &jac - &center * (center.adjoint() * &jac);
        let jj = real_inner(&horizontal, &horizontal);
        3.0 * (t * t - jj) / t.powi(4)
    };
    let t = 0.05;
    Ok(2.0 * estimate(t / 2.0) - estimate(t))
}

fn ensure_unitary(t: &ComplexAmbientMap) -> Result<()> {
    ensure_finite_complex(t)?;
    let residual = unitarity_residual(t);
    if residual > DEFAULT_TOL {
        return Err(GeomError::NotIsometric { residual });
    }
    Ok(())
}

/// Left action `x ↦ T(x)` of a unitary operator.
pub fn unitary_action(t: &ComplexAmbientMap, x: &ComplexGrassmannPoint) -> Result<ComplexGrassmannPoint> {
    if !t.is_square() || t.ncols() != x.ambient_dim() {
        return Err(shape_mismatch((x.ambient_dim(), x.ambient_dim()), t.shape()));
    }
    ensure_unitary(t)?;
    Ok(ComplexGrassmannPoint {
        basis: t * &x.basis,
    })
}

/// Pushforward of a horizontal vector by a unitary operator or an isometric
/// complex-linear immersion.
pub fn push_horizontal(t: &ComplexAmbientMap, xi: &ComplexHorizontal) -> Result<ComplexHorizontal> {
    if t.ncols() != xi.base.ambient_dim() {
        return Err(shape_mismatch((t.nrows(), xi.base.ambient_dim()), t.shape()));
    }
    ensure_unitary(t)?;
    Ok(ComplexHorizontal {
        base: ComplexGrassmannPoint {
            basis: t * &xi.base.basis,
        },
        direction: t * &xi.direction,
    })
}

/// `σ ↦ L(σ)` for a complex-linear isometric immersion `L`.
pub fn complex_grassmann_embed(
    l: &ComplexAmbientMap,
    x: &ComplexGrassmannPoint,
) -> Result<ComplexGrassmannPoint> {
    if l.ncols() != x.ambient_dim() {
        return Err(shape_mismatch((l.nrows(), x.ambient_dim()), l.shape()));
    }
    ensure_unitary(l)?;
    Ok(ComplexGrassmannPoint {
        basis: l * &x.basis,
    })
}
