//! The Grassmann manifold `Gr(p, Hₙ) = St(p, Hₙ)/O(p)`.
//!
//! Points are represented by an orthonormal basis and compared through their
//! orthogonal projectors, so no canonical representative is ever chosen.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{shape_mismatch, GeomError, Result};
use crate::linalg::{ensure_finite, orthonormality_residual, thin_svd, AmbientMap, DEFAULT_TOL};
use crate::sampling::random_frame;
use crate::stiefel::{ensure_same_base, metric_raw, MetricKind, StiefelPoint, TangentAtStiefel};

/// Projector distance below which two subspaces are considered equal.
pub const SAME_SUBSPACE_TOL: f64 = 1e-9;
/// Principal angles closer than this to `π/2` put a pair on the cut locus.
pub const CUT_LOCUS_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GrassmannPoint {
    basis: AmbientMap,
}

impl GrassmannPoint {
    pub fn new(basis: AmbientMap) -> Result<Self> {
        ensure_finite(&basis)?;
        let (n, p) = basis.shape();
        if p == 0 || n < p {
            return Err(GeomError::AmbientTooSmall { n, p });
        }
        let residual = orthonormality_residual(&basis);
        if residual > DEFAULT_TOL {
            return Err(GeomError::NotOrthonormal { residual });
        }
        Ok(Self { basis })
    }

    pub(crate) fn from_basis_unchecked(basis: AmbientMap) -> Self {
        Self { basis }
    }

    pub fn from_stiefel(y: &StiefelPoint) -> Self {
        Self {
            basis: y.frame().clone(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<Self> {
        Self::new(random_frame(n, p, rng))
    }

    pub fn basis(&self) -> &AmbientMap {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// `‖B₁B₁ᵗ − B₂B₂ᵗ‖_F`.
    pub fn projector_distance(&self, other: &GrassmannPoint) -> f64 {
        (self.projector() - other.projector()).norm()
    }

    pub fn same_subspace(&self, other: &GrassmannPoint) -> bool {
        self.basis.shape() == other.basis.shape()
            && self.projector_distance(other) <= SAME_SUBSPACE_TOL
    }

    /// Horizontal tangent vector obtained by projecting a Gaussian matrix.
    pub fn random_horizontal<R: Rng + ?Sized>(&self, rng: &mut R) -> HorizontalAtGrassmann {
        let z = crate::sampling::gaussian_matrix(self.ambient_dim(), self.rank(), rng);
        let direction = &z - &self.basis * (self.basis.transpose() * &z);
        HorizontalAtGrassmann {
            base: self.clone(),
            direction,
        }
    }
}

/// A horizontal vector `ξ` at a basis `Y`, i.e. `Yᵗ ξ = 0`.
#[derive(Clone, Debug)]
pub struct HorizontalAtGrassmann {
    base: GrassmannPoint,
    direction: AmbientMap,
}

impl HorizontalAtGrassmann {
    pub fn new(base: GrassmannPoint, direction: AmbientMap) -> Result<Self> {
        if direction.shape() != base.basis.shape() {
            return Err(shape_mismatch(base.basis.shape(), direction.shape()));
        }
        ensure_finite(&direction)?;
        let residual = (base.basis.transpose() * &direction).norm();
        if residual > DEFAULT_TOL * (1.0 + direction.norm()) {
            return Err(GeomError::NotTangent { residual });
        }
        Ok(Self { base, direction })
    }

    pub fn zero(base: GrassmannPoint) -> Self {
        let direction = DMatrix::zeros(base.ambient_dim(), base.rank());
        Self { base, direction }
    }

    pub fn base(&self) -> &GrassmannPoint {
        &self.base
    }

    pub fn direction(&self) -> &AmbientMap {
        &self.direction
    }

    pub fn norm(&self) -> f64 {
        self.direction.norm()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            base: self.base.clone(),
            direction: &self.direction * c,
        }
    }

    /// The Stiefel tangent vector with the same representative.
    pub fn to_stiefel(&self) -> Result<TangentAtStiefel> {
        let base = StiefelPoint::new(self.base.basis.clone())?;
        TangentAtStiefel::new(base, self.direction.clone())
    }
}

fn ensure_same_representative(a: &GrassmannPoint, b: &GrassmannPoint) -> Result<()> {
    if a.basis.shape() != b.basis.shape() || (&a.basis - &b.basis).norm() > 1e-12 {
        return Err(GeomError::BaseMismatch);
    }
    Ok(())
}

/// `V ↦ V − Y(YᵗV)`: removes the vertical component `Y·(YᵗV)`.
pub fn horizontal_project(y: &StiefelPoint, v: &TangentAtStiefel) -> Result<HorizontalAtGrassmann> {
    ensure_same_base(y, v.base())?;
    let frame = y.frame();
    let direction = v.direction() - frame * (frame.transpose() * v.direction());
    Ok(HorizontalAtGrassmann {
        base: GrassmannPoint::from_stiefel(y),
        direction,
    })
}

/// Metric of the quotient: the Frobenius product of horizontal representatives.
pub fn submersion_metric(
    x: &GrassmannPoint,
    xi: &HorizontalAtGrassmann,
    eta: &HorizontalAtGrassmann,
) -> Result<f64> {
    ensure_same_representative(x, &xi.base)?;
    ensure_same_representative(x, &eta.base)?;
    Ok(xi.direction.dot(&eta.direction))
}

/// Same as [`submersion_metric`] but evaluated with the canonical Stiefel
/// metric; the two agree on horizontal vectors.
pub fn submersion_metric_canonical(
    x: &GrassmannPoint,
    xi: &HorizontalAtGrassmann,
    eta: &HorizontalAtGrassmann,
) -> Result<f64> {
    ensure_same_representative(x, &xi.base)?;
    ensure_same_representative(x, &eta.base)?;
    Ok(metric_raw(&x.basis, &xi.direction, &eta.direction, MetricKind::Canonical))
}

/// Horizontal lift at time `t` of the geodesic through `basis` with horizontal
/// velocity `direction`: with `ξ = U Σ Wᵗ`,
/// `Y(t) = Y W cos(Σt) Wᵗ + U sin(Σt) Wᵗ`.
pub fn grassmann_geodesic_frame(basis: &AmbientMap, direction: &AmbientMap, t: f64) -> AmbientMap {
    let svd = thin_svd(direction).expect("finite direction");
    let cos = DMatrix::from_diagonal(&svd.sigma.map(|s| (s * t).cos()));
    let sin = DMatrix::from_diagonal(&svd.sigma.map(|s| (s * t).sin()));
    let wt = svd.v.transpose();
    basis * &svd.v * cos * &wt + &svd.u * sin * &wt
}

pub fn grassmann_geodesic(xi: &HorizontalAtGrassmann, t: f64) -> GrassmannPoint {
    GrassmannPoint::from_basis_unchecked(grassmann_geodesic_frame(&xi.base.basis, &xi.direction, t))
}

/// Principal angles in nondecreasing order.
///
/// Each angle is `atan2(sin θ, cos θ)` with cosines taken from `Yₓᵗ Y_y` and
/// sines from `(I − Yₓ Yₓᵗ) Y_y`, which keeps full relative accuracy near 0
/// and near `π/2`.
pub fn principal_angles(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<Vec<f64>> {
    if x.basis.shape() != y.basis.shape() {
        return Err(shape_mismatch(x.basis.shape(), y.basis.shape()));
    }
    let overlap = x.basis.transpose() * &y.basis;
    let residual = &y.basis - &x.basis * &overlap;
    let cosines = thin_svd(&overlap)?.sigma;
    let sines = thin_svd(&residual)?.sigma;
    let p = x.rank();
    Ok((0..p)
        .map(|i| {
            let c = cosines[i].clamp(0.0, 1.0);
            let s = sines[p - 1 - i].clamp(0.0, 1.0);
            s.atan2(c)
        })
        .collect())
}

/// `‖(θ₁, …, θ_p)‖₂`.
pub fn grassmann_distance(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<f64> {
    Ok(principal_angles(x, y)?.iter().map(|a| a * a).sum::<f64>().sqrt())
}

/// Inverse of the exponential at `x`, defined below the cut locus:
/// `(I − P_x) Y_y (Yₓᵗ Y_y)⁻¹ = U S Wᵗ` gives `log = U atan(S) Wᵗ`.
pub fn grassmann_log(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<HorizontalAtGrassmann> {
    let angles = principal_angles(x, y)?;
    let largest = angles.iter().cloned().fold(0.0, f64::max);
    if largest > std::f64::consts::FRAC_PI_2 - CUT_LOCUS_TOL {
        return Err(GeomError::CutLocus { angle: largest });
    }
    let overlap = x.basis.transpose() * &y.basis;
    let inverse = overlap
        .try_inverse()
        .ok_or(GeomError::CutLocus { angle: largest })?;
    let residual = &y.basis - &x.basis * (x.basis.transpose() * &y.basis);
    let tangent = residual * inverse;
    let svd = thin_svd(&tangent)?;
    let atan = DMatrix::from_diagonal(&svd.sigma.map(f64::atan));
    let direction = &svd.u * atan * svd.v.transpose();
    // remove rounding-level vertical drift
    let direction = &direction - &x.basis * (x.basis.transpose() * &direction);
    Ok(HorizontalAtGrassmann {
        base: x.clone(),
        direction,
    })
}

/// Reflection `T = 2 P_W − I`, equal to `Id` on `W` and `−Id` on `W^⊥`.
pub fn involution_operator(w: &GrassmannPoint) -> DMatrix<f64> {
    let n = w.ambient_dim();
    w.projector() * 2.0 - DMatrix::identity(n, n)
}

/// Geodesic symmetry `σ_W` of the symmetric space.
pub fn involution(w: &GrassmannPoint, x: &GrassmannPoint) -> Result<GrassmannPoint> {
    if w.ambient_dim() != x.ambient_dim() {
        return Err(shape_mismatch(
            (w.ambient_dim(), x.rank()),
            x.basis.shape(),
        ));
    }
    Ok(GrassmannPoint::from_basis_unchecked(involution_operator(w) * &x.basis))
}

fn ensure_isometric(l: &DMatrix<f64>, domain: usize) -> Result<()> {
    if l.ncols() != domain {
        return Err(shape_mismatch((l.nrows(), domain), l.shape()));
    }
    ensure_finite(l)?;
    let residual = orthonormality_residual(l);
    if residual > DEFAULT_TOL {
        return Err(GeomError::NotIsometric { residual });
    }
    Ok(())
}

/// `σ ↦ L(σ)` for an isometric immersion `L`.
pub fn grassmann_embed(l: &DMatrix<f64>, x: &GrassmannPoint) -> Result<GrassmannPoint> {
    ensure_isometric(l, x.ambient_dim())?;
    Ok(GrassmannPoint::from_basis_unchecked(l * &x.basis))
}

pub fn push_horizontal(l: &DMatrix<f64>, xi: &HorizontalAtGrassmann) -> Result<HorizontalAtGrassmann> {
    let base = grassmann_embed(l, &xi.base)?;
    Ok(HorizontalAtGrassmann {
        base,
        direction: l * &xi.direction,
    })
}

/// Action of an orthogonal operator of the ambient space.
pub fn grassmann_isometry(t: &DMatrix<f64>, x: &GrassmannPoint) -> Result<GrassmannPoint> {
    if !t.is_square() {
        return Err(shape_mismatch((x.ambient_dim(), x.ambient_dim()), t.shape()));
    }
    grassmann_embed(t, x)
}
