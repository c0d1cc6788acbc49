//! Spectral calculus for Hermitian matrices.
//!
//! Real powers of a positive semi-definite operator act on its support only:
//! `A^x = Σ_{a>τ} a^x P_a`, where `τ = 1e-10 · λ_max` is the support cutoff.
//! In particular `A^0` is the support projection, and negative powers never
//! blow up on the kernel.

use std::ops::Deref;
use std::sync::OnceLock;

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Relative threshold below which eigenvalues count as zero.
pub const SUPPORT_CUTOFF: f64 = 1e-10;
/// Eigenvalues closer than this share a spectral projection when pinching.
pub const CLUSTER_GAP: f64 = 1e-8;
/// Most negative eigenvalue tolerated (and clipped) for PSD inputs.
pub const PSD_FLOOR: f64 = -1e-10;
/// Largest dimension any tensor product may reach.
pub const MAX_DIM: usize = 4096;

/// Eigen-decomposition with eigenvalues in ascending order; column `i` of
/// `vectors` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// A self-adjoint matrix with a lazily computed, cached spectral decomposition.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    entries: CMatrix,
    spectrum: OnceLock<Spectrum>,
}

impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl HermitianOperator {
    /// Builds an operator from a square matrix, replacing it by `(M + M†)/2`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Domain(format!(
                "matrix is {}x{}, expected square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::Domain("zero-dimensional operator".into()));
        }
        if matrix
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Domain("matrix has non-finite entries".into()));
        }
        Ok(Self::from_matrix_unchecked(matrix))
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        let adjoint = matrix.adjoint();
        let entries = (matrix + adjoint).scale(0.5);
        Self {
            entries,
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_real_diagonal(diagonal: &[f64]) -> Self {
        let d = diagonal.len();
        let entries = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(diagonal[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::from_matrix_unchecked(entries)
    }

    /// Row-major real entries.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Domain("rows do not form a square matrix".into()));
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix_unchecked(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix_unchecked(CMatrix::zeros(dim, dim))
    }

    /// The rank-one projection `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn pure_state(vector: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(vector);
        let norm2 = v.norm_squared();
        if norm2 <= 0.0 {
            return Err(Error::Domain("zero vector".into()));
        }
        Self::new((&v * v.adjoint()).unscale(norm2))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let eig = SymmetricEigen::new(self.entries.clone());
            let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
            let vectors = CMatrix::from_fn(self.dim(), order.len(), |r, c| {
                eig.eigenvectors[(r, order[c])]
            });
            Spectrum { values, vectors }
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("non-empty spectrum")
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|c| c.re).sum()
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|v| v.abs()).sum()
    }

    /// `Tr A_+`: the sum of the positive eigenvalues.
    pub fn positive_part_trace(&self) -> f64 {
        self.eigenvalues().iter().filter(|&&v| v > 0.0).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Absolute eigenvalue threshold separating support from kernel.
    pub fn support_cutoff(&self) -> f64 {
        let top = self
            .eigenvalues()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        SUPPORT_CUTOFF * top
    }

    pub fn is_psd(&self) -> bool {
        self.check_psd().is_ok()
    }

    fn check_psd(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        let scale = self
            .eigenvalues()
            .iter()
            .fold(1.0f64, |m, v| m.max(v.abs()));
        if min < PSD_FLOOR * scale {
            Err(Error::NotPsd {
                min_eigenvalue: min,
            })
        } else {
            Ok(())
        }
    }

    /// `V f(Λ) V†` for the spectral decomposition `A = V Λ V†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Self {
        let spec = self.spectrum();
        let weights: Vec<f64> = spec.values.iter().map(|&v| f(v)).collect();
        Self::from_matrix_unchecked(weighted_outer(&spec.vectors, &weights))
    }

    /// Applies `f` to eigenvalues above the support cutoff and zero elsewhere.
    fn apply_on_support(&self, f: impl Fn(f64) -> f64) -> Self {
        let cutoff = self.support_cutoff();
        self.apply(|v| if v > cutoff && v > 0.0 { f(v) } else { 0.0 })
    }

    pub fn support_projection(&self) -> Self {
        self.apply_on_support(|_| 1.0)
    }

    /// Orthonormal basis of the support, as the columns of a `d × r` isometry.
    pub fn support_basis(&self) -> CMatrix {
        let spec = self.spectrum();
        let cutoff = self.support_cutoff();
        let cols: Vec<usize> = (0..spec.values.len())
            .filter(|&i| spec.values[i] > cutoff && spec.values[i] > 0.0)
            .collect();
        CMatrix::from_fn(self.dim(), cols.len(), |r, c| spec.vectors[(r, cols[c])])
    }

    /// Support eigenvalues and their eigenvectors as the columns of a `d × r` isometry.
    pub fn support_eigenpairs(&self) -> (Vec<f64>, CMatrix) {
        let spec = self.spectrum();
        let cutoff = self.support_cutoff();
        let cols: Vec<usize> = (0..spec.values.len())
            .filter(|&i| spec.values[i] > cutoff && spec.values[i] > 0.0)
            .collect();
        let basis = CMatrix::from_fn(self.dim(), cols.len(), |r, c| spec.vectors[(r, cols[c])]);
        (cols.iter().map(|&i| spec.values[i]).collect(), basis)
    }

    pub fn rank(&self) -> usize {
        let cutoff = self.support_cutoff();
        self.eigenvalues()
            .iter()
            .filter(|&&v| v > cutoff && v > 0.0)
            .count()
    }

    /// `A^x` on the support of a PSD operator.
    pub fn support_power(&self, x: f64) -> Result<Self> {
        self.check_psd()?;
        Ok(self.apply_on_support(|v| v.powf(x)))
    }

    /// Natural logarithm on the support (zero on the kernel).
    pub fn log_on_support(&self) -> Result<Self> {
        self.check_psd()?;
        Ok(self.apply_on_support(f64::ln))
    }

    pub fn exp(&self) -> Self {
        self.apply(f64::exp)
    }

    /// Whether `other^0 ≤ self^0`, i.e. the support of `other` lies inside ours.
    pub fn supports(&self, other: &Self) -> bool {
        let outside = CMatrix::identity(self.dim(), self.dim()) - self.support_projection().entries;
        let p = other.support_projection();
        let leak = (&outside * &p.entries * &outside).trace().re;
        leak <= 1e-8
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(&self.entries + &other.entries)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(&self.entries - &other.entries)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_matrix_unchecked(self.entries.scale(factor))
    }

    /// `self · middle · self`.
    pub fn sandwich(&self, middle: &Self) -> Self {
        Self::from_matrix_unchecked(&self.entries * &middle.entries * &self.entries)
    }

    /// `V† A V` for an isometry (or any) `V`.
    pub fn compress(&self, basis: &CMatrix) -> Self {
        Self::from_matrix_unchecked(basis.adjoint() * &self.entries * basis)
    }

    /// `V A V†`.
    pub fn expand(&self, basis: &CMatrix) -> Self {
        Self::from_matrix_unchecked(basis * &self.entries * basis.adjoint())
    }

    /// Sum of `w_i A_i`; all operators must share one dimension.
    pub fn weighted_sum<'a>(terms: impl IntoIterator<Item = (f64, &'a Self)>) -> Option<Self> {
        let mut acc: Option<CMatrix> = None;
        for (w, op) in terms {
            match acc.as_mut() {
                Some(m) => *m += op.entries.scale(w),
                None => acc = Some(op.entries.scale(w)),
            }
        }
        acc.map(Self::from_matrix_unchecked)
    }
}

fn weighted_outer(vectors: &CMatrix, weights: &[f64]) -> CMatrix {
    let mut scaled = vectors.clone();
    for (j, w) in weights.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*w);
    }
    scaled * vectors.adjoint()
}

/// A positive semi-definite operator with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(HermitianOperator);

impl DensityOperator {
    /// Validates positivity, clips eigenvalues in `[-1e-10, 0)` to zero and
    /// rescales to unit trace.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        op.check_psd()?;
        let clipped = if op.min_eigenvalue() < 0.0 {
            op.apply(|v| v.max(0.0))
        } else {
            op
        };
        let tr = clipped.trace();
        if tr <= 0.0 {
            return Err(Error::Domain(
                "zero operator cannot be normalized to a state".into(),
            ));
        }
        if (tr - 1.0).abs() > 1e-15 {
            Ok(Self(clipped.scale(1.0 / tr)))
        } else {
            Ok(Self(clipped))
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianOperator::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn into_operator(self) -> HermitianOperator {
        self.0
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        0.5 * self.0.sub(&other.0).trace_norm()
    }
}

impl Deref for DensityOperator {
    type Target = HermitianOperator;
    fn deref(&self) -> &HermitianOperator {
        &self.0
    }
}

/// `A^x` on the support of a PSD operator; `x = 0` gives the support projection.
pub fn support_power(a: &HermitianOperator, x: f64) -> Result<HermitianOperator> {
    a.support_power(x)
}

/// Groups of eigenvector columns whose eigenvalues are within [`CLUSTER_GAP`]
/// of their neighbour.
fn eigen_clusters(values: &[f64]) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if (v - values[*c.last().unwrap()]).abs() <= CLUSTER_GAP => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

/// Number of distinct eigenvalues of `a` after clustering.
pub fn spectral_cluster_count(a: &HermitianOperator) -> usize {
    eigen_clusters(a.eigenvalues()).len()
}

/// The pinching `Σ_a P_a B P_a` by the spectral projections of `a`.
pub fn pinch(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let spec = a.spectrum();
    let d = a.dim();
    let mut out = CMatrix::zeros(d, d);
    for cluster in eigen_clusters(&spec.values) {
        let basis = CMatrix::from_fn(d, cluster.len(), |r, c| spec.vectors[(r, cluster[c])]);
        let proj = &basis * basis.adjoint();
        out += &proj * b.matrix() * &proj;
    }
    Ok(HermitianOperator::from_matrix_unchecked(out))
}

/// Kronecker product; index `(i_a, i_b)` maps to `i_a · dim_b + i_b`.
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    let dim = a.dim() * b.dim();
    if dim > MAX_DIM {
        return Err(Error::ResourceLimit(format!(
            "tensor dimension {dim} exceeds {MAX_DIM}"
        )));
    }
    Ok(HermitianOperator::from_matrix_unchecked(
        a.matrix().kronecker(b.matrix()),
    ))
}

/// Orthonormal basis of `ran ρ^0 ∩ ran σ^0`: the eigenvalue-one eigenspace of
/// `ρ^0 σ^0 ρ^0`.
pub fn support_intersection_basis(rho: &HermitianOperator, sigma: &HermitianOperator) -> CMatrix {
    let pr = rho.support_projection();
    let ps = sigma.support_projection();
    let m = pr.sandwich(&ps);
    let spec = m.spectrum();
    let cols: Vec<usize> = (0..spec.values.len())
        .filter(|&i| spec.values[i] > 1.0 - 1e-8)
        .collect();
    CMatrix::from_fn(rho.dim(), cols.len(), |r, c| spec.vectors[(r, cols[c])])
}

/// `Tr exp(α log ρ + (1−α) log σ)` evaluated on the intersection of the supports.
///
/// Returns 0 when the supports intersect trivially.
pub fn matrix_exp_log_combination(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let log_rho = rho.log_on_support()?;
    let log_sigma = sigma.log_on_support()?;
    let basis = support_intersection_basis(rho, sigma);
    if basis.ncols() == 0 {
        return Ok(0.0);
    }
    let exponent = log_rho
        .compress(&basis)
        .scale(alpha)
        .add(&log_sigma.compress(&basis).scale(1.0 - alpha));
    Ok(exponent.exp().trace())
}

/// Natural logarithms of the singular values of `diag(e^l) W diag(e^r)`, in
/// descending order (`-∞` for exact zeros).
///
/// The scalings may span far more than the double-precision range of a single
/// matrix. The scaled matrix is reduced by QR with column pivoting after
/// sorting its rows by norm, and the triangular factor is diagonalized by
/// one-sided Jacobi rotations, which resolves small singular values to high
/// relative accuracy when `W` is well conditioned.
pub fn graded_log_singular_values(left: &[f64], w: &CMatrix, right: &[f64]) -> Vec<f64> {
    let (m, n) = w.shape();
    if m == 0 || n == 0 {
        return Vec::new();
    }
    let shift_l = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shift_r = right.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut g = CMatrix::from_fn(m, n, |i, j| {
        w[(i, j)] * ((left[i] - shift_l).exp() * (right[j] - shift_r).exp())
    });
    if m < n {
        g = g.adjoint();
    }
    let norms: Vec<f64> = g.row_iter().map(|r| r.norm()).collect();
    let mut order: Vec<usize> = (0..g.nrows()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let g = CMatrix::from_fn(g.nrows(), g.ncols(), |i, j| g[(order[i], j)]);
    let r = g.col_piv_qr().r();
    let mut h = r.adjoint();
    one_sided_jacobi(&mut h);
    let mut out: Vec<f64> = h
        .column_iter()
        .map(|c| c.norm().ln() + shift_l + shift_r)
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Orthogonalizes the columns of `h` in place by Hestenes rotations.
fn one_sided_jacobi(h: &mut CMatrix) {
    let n = h.ncols();
    let tol = f64::EPSILON * n as f64;
    for _ in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let a = h.column(i).norm_squared();
                let b = h.column(j).norm_squared();
                let g = h.column(i).dotc(&h.column(j));
                let gn = g.norm();
                if gn == 0.0 || gn <= tol * (a * b).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = g / gn;
                let zeta = (b - a) / (2.0 * gn);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..h.nrows() {
                    let x = h[(k, i)];
                    let y = h[(k, j)] * phase.conj();
                    h[(k, i)] = x * c - y * s;
                    h[(k, j)] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn mat(rows: &[&[C64]]) -> HermitianOperator {
        let d = rows.len();
        HermitianOperator::new(CMatrix::from_fn(d, d, |i, j| rows[i][j])).unwrap()
    }

    #[test]
    fn support_power_keeps_kernel_zero() {
        let a = HermitianOperator::from_real_diagonal(&[4.0, 0.0]);
        let r = support_power(&a, 0.5).unwrap();
        assert!(r.max_abs_diff(&HermitianOperator::from_real_diagonal(&[2.0, 0.0])) < 1e-12);
        let neg = support_power(&a, -1.0).unwrap();
        assert!(neg.max_abs_diff(&HermitianOperator::from_real_diagonal(&[0.25, 0.0])) < 1e-12);
    }

    #[test]
    fn identity_is_fixed_by_powers() {
        let r = support_power(&HermitianOperator::identity(2), -3.0).unwrap();
        assert!(r.max_abs_diff(&HermitianOperator::identity(2)) < 1e-12);
    }

    #[test]
    fn reciprocal_power() {
        let a = HermitianOperator::from_real_diagonal(&[0.25, 0.75]);
        let r = support_power(&a, -1.0).unwrap();
        assert!(r.max_abs_diff(&HermitianOperator::from_real_diagonal(&[4.0, 4.0 / 3.0])) < 1e-12);
    }

    #[test]
    fn zero_power_is_support_projection() {
        let a = HermitianOperator::from_real_diagonal(&[3.0, 0.0, 1e-14]);
        let p = support_power(&a, 0.0).unwrap();
        assert!(p.max_abs_diff(&HermitianOperator::from_real_diagonal(&[1.0, 0.0, 0.0])) < 1e-12);
    }

    #[test]
    fn negative_input_is_rejected() {
        let a = HermitianOperator::from_real_diagonal(&[1.0, -1e-3]);
        assert!(matches!(support_power(&a, 0.5), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn construction_symmetrizes() {
        let m = CMatrix::from_fn(2, 2, |i, j| {
            if i == 0 && j == 1 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let h = HermitianOperator::new(m).unwrap();
        assert!((h.matrix()[(0, 1)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((h.matrix()[(1, 0)] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pinch_by_nondegenerate_diagonal_kills_offdiagonals() {
        let a = HermitianOperator::from_real_diagonal(&[1.0, 2.0]);
        let b = mat(&[&[c(1.0, 0.0), c(0.0, 1.0)], &[c(0.0, -1.0), c(3.0, 0.0)]]);
        let p = pinch(&a, &b).unwrap();
        assert!(p.max_abs_diff(&HermitianOperator::from_real_diagonal(&[1.0, 3.0])) < 1e-12);
    }

    #[test]
    fn pinch_by_identity_is_identity_map() {
        let b = mat(&[&[c(1.0, 0.0), c(0.3, 0.2)], &[c(0.3, -0.2), c(2.0, 0.0)]]);
        let p = pinch(&HermitianOperator::identity(2), &b).unwrap();
        assert!(p.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn pinch_with_two_blocks() {
        let a = HermitianOperator::from_real_diagonal(&[1.0, 1.0, 2.0]);
        let b = HermitianOperator::from_real_rows(&[
            vec![1.0, 0.2, 0.3],
            vec![0.2, 2.0, 0.4],
            vec![0.3, 0.4, 3.0],
        ])
        .unwrap();
        let expected = HermitianOperator::from_real_rows(&[
            vec![1.0, 0.2, 0.0],
            vec![0.2, 2.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ])
        .unwrap();
        assert!(pinch(&a, &b).unwrap().max_abs_diff(&expected) < 1e-12);
        assert_eq!(spectral_cluster_count(&a), 2);
    }

    #[test]
    fn pinch_dimension_mismatch() {
        let r = pinch(
            &HermitianOperator::identity(2),
            &HermitianOperator::identity(3),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn exp_log_examples() {
        let half = HermitianOperator::identity(2).scale(0.5);
        assert!((matrix_exp_log_combination(&half, &half, 3.0).unwrap() - 1.0).abs() < 1e-12);

        let rho = HermitianOperator::from_real_diagonal(&[0.5, 0.5]);
        let sigma = HermitianOperator::from_real_diagonal(&[0.25, 0.75]);
        let q = matrix_exp_log_combination(&rho, &sigma, 2.0).unwrap();
        assert!((q - 4.0 / 3.0).abs() < 1e-12);

        let pure = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let q = matrix_exp_log_combination(&pure, &half, 2.0).unwrap();
        assert!((q - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exp_log_orthogonal_supports_give_zero() {
        let a = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let b = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        assert_eq!(matrix_exp_log_combination(&a, &b, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn intersection_of_non_nested_rank_one_supports_is_trivial() {
        let zero = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let s = 0.5f64.sqrt();
        let plus = HermitianOperator::pure_state(&[c(s, 0.0), c(s, 0.0)]).unwrap();
        assert_eq!(support_intersection_basis(&zero, &plus).ncols(), 0);
    }

    #[test]
    fn tensor_examples() {
        let i4 = tensor(
            &HermitianOperator::identity(2),
            &HermitianOperator::identity(2),
        )
        .unwrap();
        assert!(i4.max_abs_diff(&HermitianOperator::identity(4)) < 1e-15);
        let t = tensor(
            &HermitianOperator::from_real_diagonal(&[1.0, 0.0]),
            &HermitianOperator::from_real_diagonal(&[0.0, 1.0]),
        )
        .unwrap();
        assert!(
            t.max_abs_diff(&HermitianOperator::from_real_diagonal(&[
                0.0, 1.0, 0.0, 0.0
            ])) < 1e-15
        );
    }

    #[test]
    fn tensor_respects_dimension_cap() {
        let big = HermitianOperator::identity(65);
        assert!(matches!(tensor(&big, &big), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn density_operator_clips_tiny_negatives() {
        let op = HermitianOperator::from_real_diagonal(&[1.0, -5e-11]);
        let rho = DensityOperator::new(op).unwrap();
        assert!(rho.min_eigenvalue() >= 0.0);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        let bad = HermitianOperator::from_real_diagonal(&[1.0, -1e-6]);
        assert!(DensityOperator::new(bad).is_err());
    }

    #[test]
    fn spectrum_reconstructs_matrix() {
        let b = mat(&[&[c(1.0, 0.0), c(0.3, 0.2)], &[c(0.3, -0.2), c(2.0, 0.0)]]);
        let rebuilt = b.apply(|v| v);
        assert!(rebuilt.max_abs_diff(&b) < 1e-10);
    }
}
