//! Finitely generated abelian groups acting linearly and isometrically on a
//! truncated `l₂(ℤᵏ)`.
//!
//! The free part acts by right translation of the window basis `e_a ↦ e_{a+g}`;
//! each torsion factor `ℤ_{p^α}` acts by a primitive `p^α`-th root of unity on
//! the complexification. Freeness of torsion elements is certified exactly by
//! spectra; freeness of free elements can only be refuted by sampling, since a
//! cyclic window turns `ℤᵏ` into the finite group `ℤ_Nᵏ`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{shape_mismatch, GeomError, Result};
use crate::grassmann::{grassmann_isometry, GrassmannPoint};
use crate::kaehler::{unitary_action, ComplexGrassmannPoint};
use crate::linalg::{complex_thin_svd, realify_operator, unitarity_residual, ComplexAmbientMap};
use crate::sampling::{gaussian, seeded_rng};
use crate::stiefel::{isometry_action, StiefelPoint};

/// Largest torsion subgroup enumerated by exact checks.
pub const MAX_ENUMERATION: u128 = 1_000_000;
/// Smallest singular value of `ρ(g) − I` below which `g` has a fixed vector.
pub const FIXED_VECTOR_TOL: f64 = 1e-8;
/// Displacement floor used by sampling checks.
pub const FREENESS_FLOOR: f64 = 1e-3;

const ACTION_TOL: f64 = 1e-10;
const ORDER_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimePower {
    pub prime: u64,
    pub exponent: u32,
}

impl PrimePower {
    pub fn new(prime: u64, exponent: u32) -> Result<Self> {
        if !is_prime(prime) {
            return Err(GeomError::InvalidArgument(format!("{prime} is not prime")));
        }
        if exponent == 0 {
            return Err(GeomError::InvalidArgument("exponent must be at least 1".into()));
        }
        prime
            .checked_pow(exponent)
            .ok_or_else(|| GeomError::InvalidArgument("prime power overflows u64".into()))?;
        Ok(Self { prime, exponent })
    }

    pub fn order(&self) -> u64 {
        self.prime.pow(self.exponent)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `ℤᵏ ⊕ ℤ_{p₁^{α₁}} ⊕ ⋯ ⊕ ℤ_{p_m^{α_m}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    free_rank: usize,
    torsion: Vec<PrimePower>,
}

/// Element of a [`GroupSpec`]; torsion coordinates are reduced residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub free_part: Vec<i64>,
    pub torsion_part: Vec<u64>,
}

impl GroupElement {
    pub fn is_identity(&self) -> bool {
        self.free_part.iter().all(|&c| c == 0) && self.torsion_part.iter().all(|&c| c == 0)
    }

    pub fn has_infinite_order(&self) -> bool {
        self.free_part.iter().any(|&c| c != 0)
    }
}

impl GroupSpec {
    pub fn new(free_rank: usize, torsion: Vec<PrimePower>) -> Self {
        Self { free_rank, torsion }
    }

    /// Builds the torsion part from `(prime, exponent)` pairs.
    pub fn from_pairs(free_rank: usize, pairs: &[(u64, u32)]) -> Result<Self> {
        let torsion = pairs
            .iter()
            .map(|&(p, a)| PrimePower::new(p, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { free_rank, torsion })
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[PrimePower] {
        &self.torsion
    }

    pub fn torsion_orders(&self) -> Vec<u64> {
        self.torsion.iter().map(PrimePower::order).collect()
    }

    pub fn torsion_order(&self) -> u128 {
        self.torsion.iter().map(|t| t.order() as u128).product()
    }

    pub fn generator_count(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    /// True when two torsion factors share a prime.
    pub fn has_repeated_prime(&self) -> bool {
        self.torsion
            .iter()
            .enumerate()
            .any(|(i, a)| self.torsion[i + 1..].iter().any(|b| b.prime == a.prime))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            free_part: vec![0; self.free_rank],
            torsion_part: vec![0; self.torsion.len()],
        }
    }

    pub fn element(&self, free_part: Vec<i64>, torsion_part: Vec<i64>) -> Result<GroupElement> {
        if free_part.len() != self.free_rank || torsion_part.len() != self.torsion.len() {
            return Err(GeomError::DimensionMismatch {
                expected: format!("{} free and {} torsion coordinates", self.free_rank, self.torsion.len()),
                found: format!("{} and {}", free_part.len(), torsion_part.len()),
            });
        }
        let torsion_part = torsion_part
            .iter()
            .zip(&self.torsion)
            .map(|(&r, t)| r.rem_euclid(t.order() as i64) as u64)
            .collect();
        Ok(GroupElement {
            free_part,
            torsion_part,
        })
    }

    /// The `i`-th generator: free generators first, then torsion generators.
    pub fn generator(&self, i: usize) -> Result<GroupElement> {
        let mut g = self.identity();
        if i < self.free_rank {
            g.free_part[i] = 1;
        } else if i < self.generator_count() {
            g.torsion_part[i - self.free_rank] = 1 % self.torsion[i - self.free_rank].order();
        } else {
            return Err(GeomError::InvalidArgument(format!("no generator {i}")));
        }
        Ok(g)
    }

    pub fn compose(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement {
            free_part: a.free_part.iter().zip(&b.free_part).map(|(x, y)| x + y).collect(),
            torsion_part: a
                .torsion_part
                .iter()
                .zip(&b.torsion_part)
                .zip(&self.torsion)
                .map(|((x, y), t)| (x + y) % t.order())
                .collect(),
        }
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        GroupElement {
            free_part: a.free_part.iter().map(|x| -x).collect(),
            torsion_part: a
                .torsion_part
                .iter()
                .zip(&self.torsion)
                .map(|(x, t)| (t.order() - x) % t.order())
                .collect(),
        }
    }

    /// All elements of the torsion subgroup in lexicographic order, identity
    /// first.
    pub fn torsion_elements(&self) -> Result<Vec<GroupElement>> {
        let order = self.torsion_order();
        if order > MAX_ENUMERATION {
            return Err(GeomError::EnumerationOverflow {
                order,
                limit: MAX_ENUMERATION,
            });
        }
        let orders = self.torsion_orders();
        let mut out = Vec::with_capacity(order as usize);
        let mut residues = vec![0u64; orders.len()];
        loop {
            out.push(GroupElement {
                free_part: vec![0; self.free_rank],
                torsion_part: residues.clone(),
            });
            let mut i = orders.len();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                residues[i] += 1;
                if residues[i] < orders[i] {
                    break;
                }
                residues[i] = 0;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    Cyclic,
    ZeroPad,
}

/// Finite window `{−⌊N/2⌋, …, ⌈N/2⌉ − 1}ᵏ` of `ℤᵏ` spanning a truncation of
/// `l₂(ℤᵏ)`. Basis vectors are indexed in row-major order of coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct L2Truncation {
    rank: usize,
    width: usize,
    mode: BoundaryMode,
}

impl L2Truncation {
    pub fn new(rank: usize, width: usize, mode: BoundaryMode) -> Result<Self> {
        if width == 0 {
            return Err(GeomError::InvalidArgument("window width must be positive".into()));
        }
        width
            .checked_pow(rank as u32)
            .filter(|&d| d <= 1 << 24)
            .ok_or_else(|| GeomError::InvalidArgument("window too large".into()))?;
        Ok(Self { rank, width, mode })
    }

    pub fn cyclic(rank: usize, width: usize) -> Result<Self> {
        Self::new(rank, width, BoundaryMode::Cyclic)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.width.pow(self.rank as u32)
    }

    pub fn radius(&self) -> usize {
        self.width / 2
    }

    fn lower(&self) -> i64 {
        -((self.width / 2) as i64)
    }

    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.rank {
            return None;
        }
        let lo = self.lower();
        let mut index = 0usize;
        for &c in coords {
            let offset = c - lo;
            if offset < 0 || offset >= self.width as i64 {
                return None;
            }
            index = index * self.width + offset as usize;
        }
        Some(index)
    }

    pub fn coords_of(&self, mut index: usize) -> Vec<i64> {
        let mut coords = vec![0; self.rank];
        for c in coords.iter_mut().rev() {
            *c = (index % self.width) as i64 + self.lower();
            index /= self.width;
        }
        coords
    }

    /// `e_a` for a window coordinate `a`.
    pub fn basis_vector(&self, coords: &[i64]) -> Result<DVector<f64>> {
        let index = self.index_of(coords).ok_or_else(|| {
            GeomError::InvalidArgument(format!("{coords:?} lies outside the window"))
        })?;
        let mut v = DVector::zeros(self.dim());
        v[index] = 1.0;
        Ok(v)
    }

    /// Random unit vector supported on the box of the given radius around 0.
    pub fn random_supported_unit<R: Rng + ?Sized>(&self, support_radius: usize, rng: &mut R) -> DVector<f64> {
        let r = support_radius.min(self.radius()) as i64;
        loop {
            let mut v = DVector::zeros(self.dim());
            for i in 0..self.dim() {
                if self.coords_of(i).iter().all(|c| c.abs() <= r) {
                    v[i] = gaussian(rng);
                }
            }
            let n = v.norm();
            if n > 1e-8 {
                return v / n;
            }
        }
    }
}

/// Right translation as a partial permutation of window indices.
#[derive(Clone, Debug, PartialEq)]
pub struct RightTranslation {
    targets: Vec<Option<usize>>,
    /// Set when a zero-padded shift exceeds the window radius.
    pub truncation_warning: bool,
}

impl RightTranslation {
    pub fn apply<T: nalgebra::Scalar + Zero + Copy>(&self, x: &DVector<T>) -> DVector<T> {
        let mut out = DVector::from_element(x.len(), T::zero());
        for (src, dst) in self.targets.iter().enumerate() {
            if let Some(d) = dst {
                out[*d] = x[src];
            }
        }
        out
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.targets.len();
        let mut m = DMatrix::zeros(n, n);
        for (src, dst) in self.targets.iter().enumerate() {
            if let Some(d) = dst {
                m[(*d, src)] = 1.0;
            }
        }
        m
    }
}

/// `e_a ↦ e_{a+g}` on the window, wrapping in cyclic mode and dropping
/// out-of-window images in zero-pad mode.
pub fn right_translation(shift: &[i64], trunc: &L2Truncation) -> Result<RightTranslation> {
    if shift.len() != trunc.rank {
        return Err(shape_mismatch((trunc.rank, 1), (shift.len(), 1)));
    }
    let width = trunc.width as i64;
    let lo = trunc.lower();
    let targets = (0..trunc.dim())
        .map(|i| {
            let coords = trunc.coords_of(i);
            let moved: Vec<i64> = coords
                .iter()
                .zip(shift)
                .map(|(c, s)| match trunc.mode {
                    BoundaryMode::Cyclic => (c + s - lo).rem_euclid(width) + lo,
                    BoundaryMode::ZeroPad => c + s,
                })
                .collect();
            trunc.index_of(&moved)
        })
        .collect();
    let truncation_warning = trunc.mode == BoundaryMode::ZeroPad
        && shift.iter().any(|s| s.unsigned_abs() as usize > trunc.radius());
    Ok(RightTranslation {
        targets,
        truncation_warning,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslationMatrix {
    pub matrix: DMatrix<f64>,
    pub truncation_warning: bool,
}

/// Matrix of the right translation by the free part of `g`.
pub fn right_translation_matrix(g: &GroupElement, trunc: &L2Truncation) -> Result<TranslationMatrix> {
    if g.torsion_part.iter().any(|&r| r != 0) {
        return Err(GeomError::InvalidArgument(
            "right translation needs an element with trivial torsion part".into(),
        ));
    }
    let t = right_translation(&g.free_part, trunc)?;
    Ok(TranslationMatrix {
        matrix: t.to_matrix(),
        truncation_warning: t.truncation_warning,
    })
}

/// Multiplication by `exp(2πi / p^α)` on `ℂ^dim`.
pub fn torsion_scalar_action(prime: u64, exponent: u32, dim: usize) -> Result<ComplexAmbientMap> {
    let order = PrimePower::new(prime, exponent)?.order();
    Ok(DMatrix::identity(dim, dim) * root_of_unity(order, 1))
}

pub fn root_of_unity(order: u64, power: u64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (power % order) as f64 / order as f64)
}

fn complex_power(m: &ComplexAmbientMap, mut e: u64) -> ComplexAmbientMap {
    let n = m.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut base = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// A representation `ρ` of a [`GroupSpec`] by unitary operators on `ℂ^dim`.
#[derive(Clone, Debug)]
pub struct LinearIsometryAction {
    group: GroupSpec,
    generator_images: Vec<ComplexAmbientMap>,
    dim: usize,
    truncation: Option<L2Truncation>,
}

impl LinearIsometryAction {
    /// Validates unitarity, commutation and the declared torsion orders.
    pub fn new(
        group: GroupSpec,
        generator_images: Vec<ComplexAmbientMap>,
        truncation: Option<L2Truncation>,
    ) -> Result<Self> {
        if generator_images.len() != group.generator_count() {
            return Err(GeomError::InvalidArgument(format!(
                "expected {} generator images, found {}",
                group.generator_count(),
                generator_images.len()
            )));
        }
        let dim = generator_images.first().map_or(1, |m| m.nrows());
        for m in &generator_images {
            if m.shape() != (dim, dim) {
                return Err(shape_mismatch((dim, dim), m.shape()));
            }
            let residual = unitarity_residual(m);
            if residual > ACTION_TOL {
                return Err(GeomError::NotIsometric { residual });
            }
        }
        for (i, a) in generator_images.iter().enumerate() {
            for b in &generator_images[i + 1..] {
                let commutator = (a * b - b * a).norm();
                if commutator > ACTION_TOL {
                    return Err(GeomError::InvalidArgument(format!(
                        "generator images do not commute (residual {commutator:.3e})"
                    )));
                }
            }
        }
        for (t, m) in group.torsion.iter().zip(&generator_images[group.free_rank..]) {
            let residual = (complex_power(m, t.order()) - DMatrix::identity(dim, dim)).norm();
            if residual > ORDER_TOL {
                return Err(GeomError::InvalidArgument(format!(
                    "torsion generator does not have order dividing {} (residual {residual:.3e})",
                    t.order()
                )));
            }
        }
        Ok(Self {
            group,
            generator_images,
            dim,
            truncation,
        })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn truncation(&self) -> Option<&L2Truncation> {
        self.truncation.as_ref()
    }

    pub fn generator_images(&self) -> &[ComplexAmbientMap] {
        &self.generator_images
    }

    /// `ρ(g)`.
    pub fn image(&self, g: &GroupElement) -> Result<ComplexAmbientMap> {
        if g.free_part.len() != self.group.free_rank || g.torsion_part.len() != self.group.torsion.len() {
            return Err(GeomError::InvalidArgument("element does not belong to the group".into()));
        }
        let mut out = DMatrix::identity(self.dim, self.dim);
        let exponents = g
            .free_part
            .iter()
            .map(|&e| e as i128)
            .chain(g.torsion_part.iter().map(|&e| e as i128));
        for (m, e) in self.generator_images.iter().zip(exponents) {
            if e == 0 {
                continue;
            }
            let p = if e > 0 {
                complex_power(m, e as u64)
            } else {
                complex_power(&m.adjoint(), (-e) as u64)
            };
            out = &out * p;
        }
        Ok(out)
    }

    /// `ρ(g)` as a real operator; fails if it has imaginary entries.
    pub fn real_image(&self, g: &GroupElement) -> Result<DMatrix<f64>> {
        let m = self.image(g)?;
        if m.iter().any(|z| z.im.abs() > 1e-14) {
            return Err(GeomError::InvalidArgument(
                "operator is not real; use the realified image".into(),
            ));
        }
        Ok(m.map(|z| z.re))
    }

    /// `ρ(g)` acting on the realification `ℝ^{2·dim}`.
    pub fn realified_image(&self, g: &GroupElement) -> Result<DMatrix<f64>> {
        Ok(realify_operator(&self.image(g)?))
    }

    fn real_operator_for(&self, g: &GroupElement, ambient: usize) -> Result<DMatrix<f64>> {
        if ambient == self.dim {
            self.real_image(g)
        } else if ambient == 2 * self.dim {
            self.realified_image(g)
        } else {
            Err(shape_mismatch((self.dim, self.dim), (ambient, ambient)))
        }
    }
}

/// Free part by cyclic right translation on `trunc`, torsion part by scalar
/// roots of unity.
pub fn build_action(spec: &GroupSpec, trunc: &L2Truncation) -> Result<LinearIsometryAction> {
    if trunc.rank != spec.free_rank {
        return Err(GeomError::InvalidArgument(format!(
            "window rank {} does not match free rank {}",
            trunc.rank, spec.free_rank
        )));
    }
    if trunc.mode != BoundaryMode::Cyclic && spec.free_rank > 0 {
        return Err(GeomError::InvalidArgument(
            "zero-padded translations are not isometric; use a cyclic window".into(),
        ));
    }
    let dim = trunc.dim();
    let mut images = Vec::with_capacity(spec.generator_count());
    for i in 0..spec.free_rank {
        let mut shift = vec![0; spec.free_rank];
        shift[i] = 1;
        let m = right_translation(&shift, trunc)?.to_matrix();
        images.push(m.map(|v| Complex64::new(v, 0.0)));
    }
    for t in &spec.torsion {
        images.push(torsion_scalar_action(t.prime, t.exponent, dim)?);
    }
    LinearIsometryAction::new(spec.clone(), images, Some(*trunc))
}

/// Nontrivial element with a fixed unit vector.
#[derive(Clone, Debug)]
pub struct FixedPointWitness {
    pub element: GroupElement,
    pub fixed_vector: DVector<Complex64>,
    /// `‖ρ(g)v − v‖`.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct FreenessCertificate {
    /// Exact verdict on the torsion subgroup, combined with the sampling
    /// verdict on free elements when it was run.
    pub free: bool,
    pub elements_checked: usize,
    /// Smallest singular value of `ρ(g) − I` over nontrivial torsion `g`.
    pub min_gap: f64,
    pub violation: Option<FixedPointWitness>,
    /// Smallest sampled displacement `‖ρ(g)x − x‖` over free elements.
    pub sampled_min_displacement: Option<f64>,
}

const SAMPLED_VECTORS: usize = 32;

/// Certifies freeness on the unit sphere. Torsion elements are checked
/// exactly by spectrum; unless `torsion_only`, elements `±eᵢ + τ` with a
/// free generator `eᵢ` and torsion `τ` are also checked on sampled vectors.
pub fn freeness_check(action: &LinearIsometryAction, torsion_only: bool) -> Result<FreenessCertificate> {
    let elements = action.group.torsion_elements()?;
    let mut min_gap = f64::INFINITY;
    let mut violation = None;
    let mut checked = 0;
    let id = DMatrix::<Complex64>::identity(action.dim, action.dim);
    for g in elements.iter().filter(|g| !g.is_identity()) {
        checked += 1;
        let diff = action.image(g)? - &id;
        let svd = complex_thin_svd(&diff)?;
        let k = svd.sigma.len() - 1;
        let gap = svd.sigma[k];
        if gap < min_gap {
            min_gap = gap;
        }
        if gap <= FIXED_VECTOR_TOL && violation.is_none() {
            let v = svd.v.column(k).into_owned();
            violation = Some(FixedPointWitness {
                element: g.clone(),
                residual: (&diff * &v).norm(),
                fixed_vector: v,
            });
        }
    }
    let mut free = violation.is_none();
    let mut sampled_min_displacement = None;
    if !torsion_only && action.group.free_rank > 0 {
        let trunc = action.truncation.ok_or_else(|| {
            GeomError::InvalidArgument("sampling free elements needs a window".into())
        })?;
        let mut rng = seeded_rng(0);
        let vectors: Vec<DVector<Complex64>> = (0..SAMPLED_VECTORS)
            .map(|_| {
                trunc
                    .random_supported_unit(trunc.radius() / 2, &mut rng)
                    .map(|v| Complex64::new(v, 0.0))
            })
            .collect();
        let mut min_disp = f64::INFINITY;
        for i in 0..action.group.free_rank {
            for sign in [1, -1] {
                for tau in &elements {
                    let mut g = tau.clone();
                    g.free_part[i] = sign;
                    let m = action.image(&g)?;
                    for x in &vectors {
                        min_disp = min_disp.min((&m * x - x).norm());
                    }
                }
            }
        }
        free &= min_disp >= FREENESS_FLOOR;
        sampled_min_displacement = Some(min_disp);
    }
    Ok(FreenessCertificate {
        free,
        elements_checked: checked,
        min_gap,
        violation,
        sampled_min_displacement,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub prime: u64,
    pub dim: usize,
    pub assignments: usize,
    pub non_free: usize,
    /// Smallest singular value gap over all assignments, which is 0 when every
    /// assignment has a fixed vector.
    pub worst_gap: f64,
}

impl ObstructionReport {
    pub fn all_non_free(&self) -> bool {
        self.non_free == self.assignments
    }
}

/// Every assignment of `p`-th roots of unity to the diagonals of the two
/// generators of `ℤ_p ⊕ ℤ_p` acting on `ℂ^dim`, in lexicographic order.
pub fn diagonal_assignments(prime: u64, dim: usize) -> Result<Vec<(Vec<u64>, Vec<u64>)>> {
    let total = (prime as u128).checked_pow(2 * dim as u32).unwrap_or(u128::MAX);
    if total > MAX_ENUMERATION {
        return Err(GeomError::EnumerationOverflow {
            order: total,
            limit: MAX_ENUMERATION,
        });
    }
    let mut out = Vec::with_capacity(total as usize);
    for code in 0..total as u64 {
        let mut rest = code;
        let mut digits = Vec::with_capacity(2 * dim);
        for _ in 0..2 * dim {
            digits.push(rest % prime);
            rest /= prime;
        }
        digits.reverse();
        let (a, b) = digits.split_at(dim);
        out.push((a.to_vec(), b.to_vec()));
    }
    Ok(out)
}

/// Exhaustive search over diagonal unitary representations of `ℤ_p ⊕ ℤ_p`
/// on `ℂ^dim`, counting the ones that fail to act freely.
pub fn obstruction_search(prime: u64, dim: usize) -> Result<ObstructionReport> {
    let spec = GroupSpec::from_pairs(0, &[(prime, 1), (prime, 1)])?;
    let assignments = diagonal_assignments(prime, dim)?;
    let mut non_free = 0;
    let mut worst_gap: f64 = 0.0;
    for (a, b) in &assignments {
        let diag = |chars: &[u64]| {
            DMatrix::from_diagonal(&DVector::from_iterator(
                dim,
                chars.iter().map(|&c| root_of_unity(prime, c)),
            ))
        };
        let action = LinearIsometryAction::new(spec.clone(), vec![diag(a), diag(b)], None)?;
        let cert = freeness_check(&action, true)?;
        if !cert.free {
            non_free += 1;
        }
        worst_gap = worst_gap.max(cert.min_gap);
    }
    Ok(ObstructionReport {
        prime,
        dim,
        assignments: assignments.len(),
        non_free,
        worst_gap,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitDivergenceReport {
    /// `‖ρ(g)ᵏ x − x‖` for `k = 1, …, K`.
    pub distances: Vec<f64>,
    pub min_distance: f64,
    pub argmin_power: usize,
    pub floor: f64,
    pub clears_floor: bool,
}

/// Minimum of `‖ρ(g)ᵏ x − x‖` over `1 ≤ k ≤ max_power`. In cyclic mode the
/// largest translation `max_power · ‖g‖∞` must stay below the window radius.
pub fn orbit_divergence_check(
    action: &LinearIsometryAction,
    g: &GroupElement,
    x: &DVector<Complex64>,
    max_power: usize,
    floor: f64,
) -> Result<OrbitDivergenceReport> {
    if !g.has_infinite_order() {
        return Err(GeomError::InvalidArgument("element must have infinite order".into()));
    }
    if x.len() != action.dim {
        return Err(shape_mismatch((action.dim, 1), (x.len(), 1)));
    }
    if (x.norm() - 1.0).abs() > 1e-10 {
        return Err(GeomError::InvalidArgument("x must be a unit vector".into()));
    }
    if max_power == 0 {
        return Err(GeomError::InvalidArgument("max_power must be positive".into()));
    }
    if let Some(trunc) = &action.truncation {
        let step = g.free_part.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as usize;
        if trunc.mode == BoundaryMode::Cyclic && step * max_power >= trunc.radius() {
            return Err(GeomError::InvalidArgument(format!(
                "translation by {} reaches the window radius {}",
                step * max_power,
                trunc.radius()
            )));
        }
    }
    let m = action.image(g)?;
    let mut y = x.clone();
    let mut distances = Vec::with_capacity(max_power);
    for _ in 0..max_power {
        y = &m * &y;
        distances.push((&y - x).norm());
    }
    let (argmin, &min_distance) = distances
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("max_power > 0");
    Ok(OrbitDivergenceReport {
        min_distance,
        argmin_power: argmin + 1,
        floor,
        clears_floor: min_distance >= floor,
        distances,
    })
}

/// `Y ↦ ρ(g) Y` on `St(p, ℝ^dim)` (real image) or `St(p, ℝ^{2·dim})`
/// (realified image).
pub fn induced_stiefel_action(
    action: &LinearIsometryAction,
    g: &GroupElement,
    y: &StiefelPoint,
) -> Result<StiefelPoint> {
    let op = action.real_operator_for(g, y.ambient_dim())?;
    isometry_action(&op, y)
}

pub fn induced_grassmann_action(
    action: &LinearIsometryAction,
    g: &GroupElement,
    x: &GrassmannPoint,
) -> Result<GrassmannPoint> {
    let op = action.real_operator_for(g, x.ambient_dim())?;
    grassmann_isometry(&op, x)
}

pub fn induced_complex_grassmann_action(
    action: &LinearIsometryAction,
    g: &GroupElement,
    x: &ComplexGrassmannPoint,
) -> Result<ComplexGrassmannPoint> {
    unitary_action(&action.image(g)?, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_complex_frame;
    use std::f64::consts::SQRT_2;

    fn window(width: usize) -> L2Truncation {
        L2Truncation::cyclic(1, width).unwrap()
    }

    #[test]
    fn group_spec_validation() {
        assert!(PrimePower::new(4, 1).is_err());
        assert!(PrimePower::new(3, 0).is_err());
        let spec = GroupSpec::from_pairs(1, &[(2, 1), (3, 2)]).unwrap();
        assert_eq!(spec.torsion_orders(), vec![2, 9]);
        assert_eq!(spec.torsion_order(), 18);
        assert!(!spec.has_repeated_prime());
        assert!(GroupSpec::from_pairs(0, &[(2, 1), (2, 3)]).unwrap().has_repeated_prime());
        let g = spec.element(vec![3], vec![5, -1]).unwrap();
        assert_eq!(g.torsion_part, vec![1, 8]);
        let inv = spec.inverse(&g);
        assert!(spec.compose(&g, &inv).is_identity());
        assert_eq!(spec.torsion_elements().unwrap().len(), 18);
    }

    #[test]
    fn window_indexing() {
        let t = L2Truncation::cyclic(2, 4).unwrap();
        assert_eq!(t.dim(), 16);
        assert_eq!(t.radius(), 2);
        for i in 0..t.dim() {
            assert_eq!(t.index_of(&t.coords_of(i)), Some(i));
        }
        assert_eq!(t.coords_of(0), vec![-2, -2]);
        assert_eq!(t.index_of(&[2, 0]), None);
    }

    #[test]
    fn right_translation_examples() {
        let t = window(64);
        let id = right_translation_matrix(&GroupElement { free_part: vec![0], torsion_part: vec![] }, &t).unwrap();
        assert_eq!(id.matrix, DMatrix::identity(64, 64));

        let shift = right_translation(&[1], &t).unwrap();
        let e0 = t.basis_vector(&[0]).unwrap();
        let moved = shift.apply(&e0);
        assert_eq!(moved, t.basis_vector(&[1]).unwrap());
        assert!(((&moved - &e0).norm() - SQRT_2).abs() < 1e-15);

        // overlaps of a finitely supported vector decay to 0
        let x = t.random_supported_unit(2, &mut seeded_rng(1));
        let mut y = x.clone();
        for k in 1..t.radius() {
            y = shift.apply(&y);
            if k > 4 {
                assert_eq!(y.dot(&x), 0.0);
                assert!(((&y - &x).norm() - SQRT_2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cyclic_composition_is_exact() {
        let t = L2Truncation::cyclic(2, 6).unwrap();
        let a = right_translation(&[2, -1], &t).unwrap().to_matrix();
        let b = right_translation(&[-5, 4], &t).unwrap().to_matrix();
        let ab = right_translation(&[-3, 3], &t).unwrap().to_matrix();
        assert_eq!(&a * &b, ab);
        assert_eq!(a.transpose() * &a, DMatrix::identity(36, 36));
    }

    #[test]
    fn zero_pad_warns_past_radius() {
        let t = L2Truncation::new(1, 8, BoundaryMode::ZeroPad).unwrap();
        assert!(!right_translation(&[3], &t).unwrap().truncation_warning);
        assert!(right_translation(&[5], &t).unwrap().truncation_warning);
        let m = right_translation(&[1], &t).unwrap().to_matrix();
        assert!(m.column(7).norm() == 0.0);
    }

    #[test]
    fn torsion_scalar_examples() {
        let m = torsion_scalar_action(2, 1, 3).unwrap();
        assert!((m + DMatrix::<Complex64>::identity(3, 3)).norm() < 1e-15);
        let m = torsion_scalar_action(3, 1, 2).unwrap();
        let zeta = root_of_unity(3, 1);
        for k in 1..3 {
            let pk = complex_power(&m, k);
            for i in 0..2 {
                let expected = zeta.powu(k as u32);
                assert!((pk[(i, i)] - expected).norm() < 1e-14);
                assert!((expected - Complex64::new(1.0, 0.0)).norm() > 1.0);
            }
        }
        for order in 2..=16u64 {
            let (p, a) = match order {
                4 => (2, 2),
                8 => (2, 3),
                9 => (3, 2),
                16 => (2, 4),
                n if is_prime(n) => (n, 1),
                _ => continue,
            };
            let spec = GroupSpec::from_pairs(0, &[(p, a)]).unwrap();
            let action = LinearIsometryAction::new(spec, vec![torsion_scalar_action(p, a, 3).unwrap()], None).unwrap();
            assert!(freeness_check(&action, true).unwrap().free, "order {order}");
        }
    }

    #[test]
    fn build_action_examples() {
        let spec = GroupSpec::from_pairs(1, &[]).unwrap();
        let action = build_action(&spec, &window(8)).unwrap();
        assert_eq!(action.generator_images().len(), 1);

        let spec = GroupSpec::from_pairs(0, &[(2, 1), (3, 1)]).unwrap();
        let action = build_action(&spec, &L2Truncation::cyclic(0, 1).unwrap()).unwrap();
        let g = spec.element(vec![], vec![1, 1]).unwrap();
        let img = action.image(&g).unwrap();
        let six = complex_power(&img, 6);
        assert!((six - DMatrix::<Complex64>::identity(1, 1)).norm() < 1e-12);
        for k in 1..6 {
            assert!((complex_power(&img, k)[(0, 0)] - Complex64::new(1.0, 0.0)).norm() > 0.5);
        }

        let spec = GroupSpec::from_pairs(1, &[(2, 2)]).unwrap();
        let action = build_action(&spec, &window(8)).unwrap();
        let [a, b] = [&action.generator_images()[0], &action.generator_images()[1]];
        assert!((a * b - b * a).norm() < 1e-12);
    }

    #[test]
    fn group_law_holds() {
        let spec = GroupSpec::from_pairs(1, &[(3, 1)]).unwrap();
        let action = build_action(&spec, &window(10)).unwrap();
        let mut rng = seeded_rng(2);
        for _ in 0..20 {
            let a = spec.element(vec![rng.random_range(-5..5)], vec![rng.random_range(0..3)]).unwrap();
            let b = spec.element(vec![rng.random_range(-5..5)], vec![rng.random_range(0..3)]).unwrap();
            let lhs = action.image(&spec.compose(&a, &b)).unwrap();
            let rhs = action.image(&a).unwrap() * action.image(&b).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn freeness_examples() {
        let spec = GroupSpec::from_pairs(0, &[(2, 1)]).unwrap();
        let action = LinearIsometryAction::new(spec, vec![torsion_scalar_action(2, 1, 2).unwrap()], None).unwrap();
        assert!(freeness_check(&action, true).unwrap().free);

        let spec = GroupSpec::from_pairs(0, &[(2, 1), (3, 1)]).unwrap();
        let action = build_action(&spec, &L2Truncation::cyclic(0, 1).unwrap()).unwrap();
        let cert = freeness_check(&action, true).unwrap();
        assert!(cert.free);
        assert_eq!(cert.elements_checked, 5);

        let spec = GroupSpec::from_pairs(0, &[(2, 1), (2, 1)]).unwrap();
        let action = build_action(&spec, &L2Truncation::cyclic(0, 1).unwrap()).unwrap();
        let cert = freeness_check(&action, true).unwrap();
        assert!(!cert.free);
        let w = cert.violation.unwrap();
        assert_eq!(w.element.torsion_part, vec![1, 1]);
        assert!(w.residual < 1e-12);
        assert!((w.fixed_vector.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_freeness_with_free_part() {
        let spec = GroupSpec::from_pairs(1, &[(2, 1)]).unwrap();
        let action = build_action(&spec, &window(16)).unwrap();
        let cert = freeness_check(&action, false).unwrap();
        assert!(cert.free);
        assert!(cert.sampled_min_displacement.unwrap() >= FREENESS_FLOOR);
    }

    #[test]
    fn obstruction_counts() {
        let r = obstruction_search(2, 2).unwrap();
        assert_eq!(r.assignments, 16);
        assert!(r.all_non_free());
        let r = obstruction_search(3, 2).unwrap();
        assert_eq!(r.assignments, 81);
        assert!(r.all_non_free());
        assert!(r.worst_gap < 1e-12);
    }

    #[test]
    fn orbit_divergence_examples() {
        let spec = GroupSpec::from_pairs(1, &[]).unwrap();
        let t = window(64);
        let action = build_action(&spec, &t).unwrap();
        let g = spec.generator(0).unwrap();
        let e0 = t.basis_vector(&[0]).unwrap().map(|v| Complex64::new(v, 0.0));
        let r = orbit_divergence_check(&action, &g, &e0, 10, FREENESS_FLOOR).unwrap();
        assert!((r.min_distance - SQRT_2).abs() < 1e-15);

        let mut ones = DVector::zeros(64);
        for c in -2..=2 {
            ones[t.index_of(&[c]).unwrap()] = 1.0 / 5f64.sqrt();
        }
        let ones = ones.map(|v| Complex64::new(v, 0.0));
        let r = orbit_divergence_check(&action, &g, &ones, 10, FREENESS_FLOOR).unwrap();
        assert!(r.min_distance > 0.0);
        // ⟨gᵏx, x⟩ = (5 − k)/5 for k ≤ 5, so ‖gᵏx − x‖² = 2k/5
        for k in 1..=5 {
            assert!((r.distances[k - 1].powi(2) - 2.0 * k as f64 / 5.0).abs() < 1e-12);
        }
        assert!(r.distances.windows(2).all(|w| w[1] >= w[0] - 1e-15));

        assert!(orbit_divergence_check(&action, &spec.identity(), &e0, 10, 1e-3).is_err());
        assert!(orbit_divergence_check(&action, &g, &e0, 32, 1e-3).is_err());
    }

    #[test]
    fn induced_actions() {
        let spec = GroupSpec::from_pairs(1, &[(3, 1)]).unwrap();
        let t = window(8);
        let action = build_action(&spec, &t).unwrap();
        let mut rng = seeded_rng(3);
        let y = StiefelPoint::random(8, 2, &mut rng).unwrap();
        let id = spec.identity();
        assert_eq!(induced_stiefel_action(&action, &id, &y).unwrap(), y);
        let shift = spec.generator(0).unwrap();
        let moved = induced_stiefel_action(&action, &shift, &y).unwrap();
        assert!((moved.frame().rows(1, 7) - y.frame().rows(0, 7)).norm() == 0.0);
        let rot = spec.generator(1).unwrap();
        assert!(induced_stiefel_action(&action, &rot, &y).is_err());
        let y16 = StiefelPoint::random(16, 2, &mut rng).unwrap();
        assert!(induced_stiefel_action(&action, &rot, &y16).is_ok());

        // a scalar fixes every complex line
        let line = ComplexGrassmannPoint::new(random_complex_frame(8, 1, &mut rng)).unwrap();
        let image = induced_complex_grassmann_action(&action, &rot, &line).unwrap();
        assert!(image.same_subspace(&line));

        let x = GrassmannPoint::random(8, 2, &mut rng).unwrap();
        let gx = induced_grassmann_action(&action, &shift, &x).unwrap();
        assert!(!gx.same_subspace(&x));
    }
}
