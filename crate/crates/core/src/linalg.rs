//! Finite-truncation ambient spaces.
//!
//! A separable Hilbert space is represented by ℝⁿ (or ℂⁿ) for a truncation
//! dimension `n` chosen by the caller. Linear maps ℝᵖ → ℝⁿ are stored as
//! `n × p` matrices, so the Hilbert product of the map space is the Frobenius
//! product `⟨x, y⟩ = Tr(xᵗ y)`.
//!
//! Complex matrices are realified by interleaving rows: entry `(i, j)` of an
//! `n × p` complex matrix becomes entries `(2i, j)` (real part) and
//! `(2i + 1, j)` (imaginary part) of a `2n × p` real matrix. Multiplication by
//! `i` then acts as the block-diagonal rotation `(a, b) ↦ (−b, a)` on each row
//! pair, which is the complex structure `J` used by [`complex_structure`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{shape_mismatch, GeomError, Result};

/// An `n × p` real matrix, standing for a linear map ℝᵖ → Hₙ.
pub type AmbientMap = DMatrix<f64>;
/// An `n × p` complex matrix, standing for a complex linear map ℂᵖ → Hₙ.
pub type ComplexAmbientMap = DMatrix<Complex64>;
/// A vector of the truncated ambient space.
pub type AmbientVector = DVector<f64>;

/// Default relative tolerance for rank and orthonormality checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub fn ensure_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::NonFinite)
    }
}

pub fn ensure_finite_complex(m: &ComplexAmbientMap) -> Result<()> {
    if m.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::NonFinite)
    }
}

fn ensure_same_shape<T>(x: &DMatrix<T>, y: &DMatrix<T>) -> Result<()> {
    if x.shape() != y.shape() {
        return Err(shape_mismatch(x.shape(), y.shape()));
    }
    Ok(())
}

/// Frobenius product `Tr(xᵗ y)`.
pub fn frobenius_inner(x: &AmbientMap, y: &AmbientMap) -> Result<f64> {
    ensure_same_shape(x, y)?;
    Ok(x.dot(y))
}

/// Hermitian product `h(x, y) = Tr(y* x)`, linear in `x` and conjugate-linear in `y`.
pub fn hermitian_inner(x: &ComplexAmbientMap, y: &ComplexAmbientMap) -> Result<Complex64> {
    ensure_same_shape(x, y)?;
    Ok(x.iter()
        .zip(y.iter())
        .map(|(a, b)| b.conj() * a)
        .sum())
}

/// Splits `z` into its component in `Im x` and its component in `Ker xᵗ`.
///
/// Fails when `x` is rank deficient relative to [`DEFAULT_TOL`].
pub fn orth_decompose(x: &AmbientMap, z: &AmbientVector) -> Result<(AmbientVector, AmbientVector)> {
    if x.nrows() != z.len() {
        return Err(shape_mismatch((x.nrows(), 1), (z.len(), 1)));
    }
    ensure_finite(x)?;
    let svd = thin_svd(x)?;
    let top = svd.sigma.iter().cloned().fold(0.0_f64, f64::max);
    let bottom = svd.sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    if svd.sigma.len() < x.ncols() || top == 0.0 || bottom / top < DEFAULT_TOL {
        return Err(GeomError::RankDeficient {
            sigma_min: if top > 0.0 { bottom / top } else { 0.0 },
        });
    }
    let coeffs = svd.u.transpose() * z;
    let image = &svd.u * coeffs;
    let kernel = z - &image;
    Ok((image, kernel))
}

/// Bilinear form of signature `(positive_dim, negative_dim)`; the negative
/// slots are the trailing coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinkowskiForm {
    pub positive_dim: usize,
    pub negative_dim: usize,
}

impl MinkowskiForm {
    pub fn new(positive_dim: usize, negative_dim: usize) -> Result<Self> {
        if positive_dim == 0 || negative_dim == 0 {
            return Err(GeomError::InvalidArgument(
                "a Minkowski form needs at least one slot of each sign".into(),
            ));
        }
        Ok(Self {
            positive_dim,
            negative_dim,
        })
    }

    /// Lorentzian form of signature `(n, 1)`.
    pub fn lorentz(spatial: usize) -> Result<Self> {
        Self::new(spatial, 1)
    }

    pub fn dim(&self) -> usize {
        self.positive_dim + self.negative_dim
    }

    /// Gram matrix `diag(1, …, 1, −1, …, −1)`.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i != j {
                0.0
            } else if i < self.positive_dim {
                1.0
            } else {
                -1.0
            }
        })
    }

    pub fn quadratic(&self, u: &AmbientVector) -> Result<f64> {
        minkowski_inner(u, u, self)
    }
}

pub fn minkowski_inner(u: &AmbientVector, v: &AmbientVector, form: &MinkowskiForm) -> Result<f64> {
    if u.len() != form.dim() || v.len() != form.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: form.dim().to_string(),
            found: format!("{} and {}", u.len(), v.len()),
        });
    }
    let (pos, neg) = u
        .iter()
        .zip(v.iter())
        .enumerate()
        .fold((0.0, 0.0), |(pos, neg), (i, (a, b))| {
            if i < form.positive_dim {
                (pos + a * b, neg)
            } else {
                (pos, neg + a * b)
            }
        });
    Ok(pos - neg)
}

/// Matrix exponential (scaling and squaring with a Padé approximant).
pub fn matrix_exp(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(shape_mismatch((a.nrows(), a.nrows()), a.shape()));
    }
    ensure_finite(a)?;
    Ok(a.clone().exp())
}

pub fn complex_matrix_exp(a: &ComplexAmbientMap) -> Result<ComplexAmbientMap> {
    if !a.is_square() {
        return Err(shape_mismatch((a.nrows(), a.nrows()), a.shape()));
    }
    ensure_finite_complex(a)?;
    Ok(a.clone().exp())
}

/// Thin singular value decomposition `x = u · diag(sigma) · vᵗ` with
/// nonincreasing singular values.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u * DMatrix::from_diagonal(&self.sigma) * self.v.transpose()
    }
}

// nalgebra 0.35 returns wrong factors for some rank-deficient inputs (for
// example 3×2 of rank 1), so decompositions go through faer.
pub fn thin_svd(x: &AmbientMap) -> Result<Svd> {
    ensure_finite(x)?;
    let (n, p) = x.shape();
    let k = n.min(p);
    let svd = faer::Mat::from_fn(n, p, |i, j| x[(i, j)])
        .thin_svd()
        .map_err(|_| GeomError::SvdNoConvergence)?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    Ok(Svd {
        u: DMatrix::from_fn(n, k, |i, j| u[(i, j)]),
        sigma: DVector::from_fn(k, |j, _| s[j]),
        v: DMatrix::from_fn(p, k, |i, j| v[(i, j)]),
    })
}

/// Complex thin SVD `x = u · diag(sigma) · v*`.
#[derive(Clone, Debug)]
pub struct ComplexSvd {
    pub u: ComplexAmbientMap,
    pub sigma: DVector<f64>,
    pub v: ComplexAmbientMap,
}

pub fn complex_thin_svd(x: &ComplexAmbientMap) -> Result<ComplexSvd> {
    ensure_finite_complex(x)?;
    let (n, p) = x.shape();
    let k = n.min(p);
    let svd = faer::Mat::from_fn(n, p, |i, j| x[(i, j)])
        .thin_svd()
        .map_err(|_| GeomError::SvdNoConvergence)?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    Ok(ComplexSvd {
        u: DMatrix::from_fn(n, k, |i, j| u[(i, j)]),
        sigma: DVector::from_fn(k, |j, _| s[j].re),
        v: DMatrix::from_fn(p, k, |i, j| v[(i, j)]),
    })
}

/// `‖mᵗm − I‖_F`.
pub fn orthonormality_residual(m: &DMatrix<f64>) -> f64 {
    (m.transpose() * m - DMatrix::identity(m.ncols(), m.ncols())).norm()
}

/// `‖m*m − I‖_F`.
pub fn unitarity_residual(m: &ComplexAmbientMap) -> f64 {
    (m.adjoint() * m - DMatrix::identity(m.ncols(), m.ncols())).norm()
}

pub fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn skew(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a - a.transpose()) * 0.5
}

/// Nearest matrix with orthonormal columns (polar factor).
pub fn polar_orthonormalize(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = thin_svd(m)?;
    Ok(svd.u * svd.v.transpose())
}

pub fn complex_polar_orthonormalize(m: &ComplexAmbientMap) -> Result<ComplexAmbientMap> {
    let svd = complex_thin_svd(m)?;
    Ok(svd.u * svd.v.adjoint())
}

/// Returns `count` orthonormal columns orthogonal to the columns of `existing`
/// (which must be orthonormal), chosen greedily from the standard basis.
pub fn complete_orthonormal(existing: &DMatrix<f64>, count: usize) -> DMatrix<f64> {
    let n = existing.nrows();
    let mut basis: Vec<DVector<f64>> = existing.column_iter().map(|c| c.into_owned()).collect();
    let mut added = Vec::with_capacity(count);
    for _ in 0..count {
        let mut best: Option<DVector<f64>> = None;
        let mut best_norm = 0.0;
        for i in 0..n {
            let mut v = DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&v);
                    v.axpy(-c, b, 1.0);
                }
            }
            let norm = v.norm();
            if norm > best_norm {
                best_norm = norm;
                best = Some(v);
            }
        }
        let v = best.expect("ambient dimension exhausted") / best_norm;
        basis.push(v.clone());
        added.push(v);
    }
    if added.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&added)
    }
}

/// Principal logarithm of a rotation matrix, returned as a skew matrix.
///
/// Uses inverse scaling and squaring; when a square root iteration fails
/// (eigenvalue −1) it falls back to the skew part of `q`.
pub fn rotation_log(q: &DMatrix<f64>) -> DMatrix<f64> {
    let p = q.nrows();
    let id = DMatrix::<f64>::identity(p, p);
    let mut y = q.clone();
    let mut k = 0;
    while (&y - &id).norm() > 0.25 {
        if k > 40 {
            return skew(q);
        }
        match sqrtm_denman_beavers(&y) {
            Some(s) => y = s,
            None => return skew(q),
        }
        k += 1;
    }
    let x = &y - &id;
    let mut term = x.clone();
    let mut acc = x.clone();
    for j in 2..40 {
        term = &term * &x;
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        acc += &term * (sign / j as f64);
    }
    skew(&(acc * 2f64.powi(k)))
}

fn sqrtm_denman_beavers(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let p = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<f64>::identity(p, p);
    for _ in 0..100 {
        let yi = y.clone().try_inverse()?;
        let zi = z.clone().try_inverse()?;
        let ny = (&y + zi) * 0.5;
        let nz = (&z + yi) * 0.5;
        let delta = (&ny - &y).norm();
        y = ny;
        z = nz;
        if !y.iter().all(|v| v.is_finite()) {
            return None;
        }
        if delta < 1e-15 * (1.0 + y.norm()) {
            return Some(y);
        }
    }
    let check = (&y * &y - a).norm();
    (check < 1e-10).then_some(y)
}

/// Realifies an `n × p` complex matrix into a `2n × p` real matrix with
/// interleaved (real, imaginary) rows.
pub fn realify(x: &ComplexAmbientMap) -> DMatrix<f64> {
    DMatrix::from_fn(2 * x.nrows(), x.ncols(), |i, j| {
        let z = x[(i / 2, j)];
        if i % 2 == 0 {
            z.re
        } else {
            z.im
        }
    })
}

/// Inverse of [`realify`].
pub fn complexify(x: &DMatrix<f64>) -> Result<ComplexAmbientMap> {
    if !x.nrows().is_multiple_of(2) {
        return Err(GeomError::InvalidArgument(
            "realified matrices have an even number of rows".into(),
        ));
    }
    Ok(DMatrix::from_fn(x.nrows() / 2, x.ncols(), |i, j| {
        Complex64::new(x[(2 * i, j)], x[(2 * i + 1, j)])
    }))
}

/// Applies the complex structure `J` (multiplication by `i`) to a realified
/// matrix: each row pair `(a, b)` becomes `(−b, a)`.
pub fn complex_structure(x: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
        if i % 2 == 0 {
            -x[(i + 1, j)]
        } else {
            x[(i - 1, j)]
        }
    })
}

/// Realification of a complex square operator acting on column vectors, so
/// that `realify(T x) = realify_operator(T) · realify(x)`.
pub fn realify_operator(t: &ComplexAmbientMap) -> DMatrix<f64> {
    DMatrix::from_fn(2 * t.nrows(), 2 * t.ncols(), |i, j| {
        let z = t[(i / 2, j / 2)];
        match (i % 2, j % 2) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    })
}

pub fn to_complex(m: &DMatrix<f64>) -> ComplexAmbientMap {
    m.map(|v| Complex64::new(v, 0.0))
}
