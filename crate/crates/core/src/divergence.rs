//! The α-z Rényi family and its relatives.
//!
//! `Q_{α,z}(ρ‖σ) = Tr(ρ^{α/2z} σ^{(1−α)/z} ρ^{α/2z})^z` with powers taken on
//! supports, `D_{α,z} = log(Q/Tr ρ)/(α−1)`. The special cases are `z = 1`
//! (Petz), `z = α` (sandwiched) and `z = ∞` (log-Euclidean).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    graded_log_singular_values, matrix_exp_log_combination, CMatrix, HermitianOperator,
    SUPPORT_CUTOFF,
};

/// A value in `ℝ ∪ {+∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    PosInfinity,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::PosInfinity => None,
        }
    }

    /// Maps `+∞` to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::Finite(v) => v,
            Extended::PosInfinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PosInfinity => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ZParam {
    Finite(f64),
    Infinite,
}

impl ZParam {
    pub fn is_infinite(self) -> bool {
        matches!(self, ZParam::Infinite)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ZParam::Finite(z) => z,
            ZParam::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for ZParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZParam::Finite(z) => write!(f, "{z}"),
            ZParam::Infinite => write!(f, "inf"),
        }
    }
}

/// The parameter pair `(α, z)`.
///
/// `α = 1` is representable but only accepted by operations that define the
/// `α → 1` limit ([`d_alpha_z`] and [`tsallis`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiParams {
    alpha: f64,
    z: ZParam,
}

impl RenyiParams {
    pub fn new(alpha: f64, z: ZParam) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Domain(format!(
                "alpha must be a positive real, got {alpha}"
            )));
        }
        if let ZParam::Finite(zv) = z {
            if !(zv.is_finite() && zv > 0.0) {
                return Err(Error::Domain(format!(
                    "z must be positive or infinite, got {zv}"
                )));
            }
        }
        Ok(Self { alpha, z })
    }

    pub fn finite(alpha: f64, z: f64) -> Result<Self> {
        Self::new(alpha, ZParam::Finite(z))
    }

    /// `z = α`.
    pub fn sandwiched(alpha: f64) -> Result<Self> {
        Self::finite(alpha, alpha)
    }

    /// `z = 1`.
    pub fn petz(alpha: f64) -> Result<Self> {
        Self::finite(alpha, 1.0)
    }

    /// `z = ∞`.
    pub fn log_euclidean(alpha: f64) -> Result<Self> {
        Self::new(alpha, ZParam::Infinite)
    }

    pub fn one() -> Self {
        Self {
            alpha: 1.0,
            z: ZParam::Finite(1.0),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn z(&self) -> ZParam {
        self.z
    }

    pub fn is_one(&self) -> bool {
        self.alpha == 1.0
    }

    /// `s(α) = sgn(α − 1)`.
    pub fn sign(&self) -> f64 {
        if self.alpha > 1.0 {
            1.0
        } else if self.alpha < 1.0 {
            -1.0
        } else {
            0.0
        }
    }

    fn reject_one(&self) -> Result<()> {
        if self.is_one() {
            Err(Error::Domain("alpha = 1 is only defined as a limit".into()))
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for RenyiParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(alpha={}, z={})", self.alpha, self.z)
    }
}

fn check_pair(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    if !rho.is_psd() {
        return Err(Error::NotPsd {
            min_eigenvalue: rho.min_eigenvalue(),
        });
    }
    if !sigma.is_psd() {
        return Err(Error::NotPsd {
            min_eigenvalue: sigma.min_eigenvalue(),
        });
    }
    if rho.max_eigenvalue() <= 0.0 || rho.rank() == 0 {
        return Err(Error::Domain("first argument must be non-zero".into()));
    }
    Ok(())
}

/// Rank of `ABA` for PSD `A`, `B`, read off the supports rather than the
/// spectrum of the product, whose small eigenvalues are dominated by round-off.
/// Pass the operators whose powers are sandwiched, not the powers themselves.
pub(crate) fn sandwich_rank(a: &HermitianOperator, b: &HermitianOperator) -> usize {
    let d = a.dim();
    let (ra, rb) = (a.rank(), b.rank());
    if ra == 0 || rb == 0 {
        0
    } else if rb == d {
        ra
    } else if ra == d {
        rb
    } else {
        let overlap = a.support_projection().sandwich(&b.support_projection());
        overlap
            .eigenvalues()
            .iter()
            .filter(|&&v| v > SUPPORT_CUTOFF)
            .count()
    }
}

/// `f` on the `rank` largest eigenvalues of `m` (clamped at zero), zero on the rest.
pub(crate) fn apply_top(
    m: &HermitianOperator,
    rank: usize,
    f: impl Fn(f64) -> f64,
) -> HermitianOperator {
    let spec = m.spectrum();
    let d = m.dim();
    let mut out = CMatrix::zeros(d, d);
    for i in d.saturating_sub(rank)..d {
        let v = spec.values[i];
        if v > 0.0 {
            let col = spec.vectors.column(i);
            out += (col * col.adjoint()).scale(f(v));
        }
    }
    HermitianOperator::from_matrix_unchecked(out)
}

/// `Σ λ^z` over the `rank` largest eigenvalues of `m`, clamped at zero.
pub(crate) fn trace_power_top(m: &HermitianOperator, rank: usize, z: f64) -> f64 {
    let values = m.eigenvalues();
    values[values.len().saturating_sub(rank)..]
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|v| v.powf(z))
        .sum()
}

/// `Tr(A B A)^z` for PSD `A`, `B`, where `rank` is the rank of the product.
pub(crate) fn sandwich_trace_power(
    a: &HermitianOperator,
    b: &HermitianOperator,
    z: f64,
    rank: usize,
) -> f64 {
    trace_power_top(&a.sandwich(b), rank, z)
}

/// `Tr(ρ^p σ^{2q} ρ^p)^z` through the singular values of `σ^q ρ^p`, computed in
/// the eigenbases of `ρ` and `σ` so that widely spread powers stay accurate.
pub(crate) fn graded_trace_power(
    rho: &HermitianOperator,
    p: f64,
    sigma: &HermitianOperator,
    q: f64,
    z: f64,
) -> f64 {
    let (r, u) = rho.support_eigenpairs();
    let (s, v) = sigma.support_eigenpairs();
    let right: Vec<f64> = r.iter().map(|x| p * x.ln()).collect();
    let left: Vec<f64> = s.iter().map(|x| q * x.ln()).collect();
    let logs = graded_log_singular_values(&left, &(v.adjoint() * u), &right);
    logs.iter()
        .take(sandwich_rank(rho, sigma))
        .map(|l| (2.0 * z * l).exp())
        .sum()
}

/// `Q_{α,z}(ρ‖σ)`; `+∞` when `α > 1` and the support of `ρ` leaves that of `σ`.
pub fn q_alpha_z(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    p: RenyiParams,
) -> Result<Extended> {
    p.reject_one()?;
    check_pair(rho, sigma)?;
    let alpha = p.alpha();
    if alpha > 1.0 && !sigma.supports(rho) {
        return Ok(Extended::PosInfinity);
    }
    match p.z() {
        ZParam::Infinite => Ok(Extended::Finite(matrix_exp_log_combination(
            rho, sigma, alpha,
        )?)),
        ZParam::Finite(z) => {
            if sigma.rank() == 0 {
                return Ok(Extended::Finite(0.0));
            }
            Ok(Extended::Finite(graded_trace_power(
                rho,
                alpha / (2.0 * z),
                sigma,
                (1.0 - alpha) / (2.0 * z),
                z,
            )))
        }
    }
}

/// `D_{α,z}(ρ‖σ) = log(Q_{α,z}/Tr ρ)/(α−1)`; at `α = 1` the Umegaki divergence.
pub fn d_alpha_z(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    p: RenyiParams,
) -> Result<Extended> {
    if p.is_one() {
        return umegaki(rho, sigma);
    }
    let q = q_alpha_z(rho, sigma, p)?;
    Ok(d_from_q(q, rho.trace(), p.alpha()))
}

pub(crate) fn d_from_q(q: Extended, trace_rho: f64, alpha: f64) -> Extended {
    match q {
        Extended::PosInfinity => Extended::PosInfinity,
        Extended::Finite(q) if q <= 0.0 => Extended::PosInfinity,
        Extended::Finite(q) => Extended::Finite((q / trace_rho).ln() / (alpha - 1.0)),
    }
}

/// `Tr ρ(log ρ − log σ)/Tr ρ`, or `+∞` when `ρ^0 ⊄ σ^0`.
pub fn umegaki(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<Extended> {
    check_pair(rho, sigma)?;
    if !sigma.supports(rho) {
        return Ok(Extended::PosInfinity);
    }
    let cutoff = rho.support_cutoff();
    let entropy_part: f64 = rho
        .eigenvalues()
        .iter()
        .filter(|&&v| v > cutoff && v > 0.0)
        .map(|v| v * v.ln())
        .sum();
    let log_sigma = sigma.log_on_support()?;
    let cross = (rho.matrix() * log_sigma.matrix()).trace().re;
    Ok(Extended::Finite((entropy_part - cross) / rho.trace()))
}

/// `log λ_max(σ^{−1/2} ρ̂ σ^{−1/2})` with `ρ̂ = ρ/Tr ρ`; the `α → ∞` sandwiched limit.
pub fn d_max(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<Extended> {
    check_pair(rho, sigma)?;
    if !sigma.supports(rho) {
        return Ok(Extended::PosInfinity);
    }
    let s = sigma.support_power(-0.5)?;
    let m = s.sandwich(&rho.scale(1.0 / rho.trace()));
    Ok(Extended::Finite(m.max_eigenvalue().ln()))
}

/// `T_{α,z}(ρ‖σ) = (α Tr ρ + (1−α) Tr σ − Q_{α,z})/(1−α)`.
///
/// At `α = 1` this is the limit `Tr ρ(log ρ − log σ) − Tr ρ + Tr σ`.
pub fn tsallis(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    p: RenyiParams,
) -> Result<Extended> {
    let (tr_rho, tr_sigma) = (rho.trace(), sigma.trace());
    if p.is_one() {
        return Ok(match umegaki(rho, sigma)? {
            Extended::Finite(d) => Extended::Finite(d * tr_rho - tr_rho + tr_sigma),
            Extended::PosInfinity => Extended::PosInfinity,
        });
    }
    let alpha = p.alpha();
    Ok(match q_alpha_z(rho, sigma, p)? {
        Extended::Finite(q) => {
            Extended::Finite((alpha * tr_rho + (1.0 - alpha) * tr_sigma - q) / (1.0 - alpha))
        }
        Extended::PosInfinity => Extended::PosInfinity,
    })
}

/// `D_{α,z}(ρ/Tr ρ ‖ σ/Tr σ)`.
pub fn d_hat(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    p: RenyiParams,
) -> Result<Extended> {
    check_pair(rho, sigma)?;
    let tr_sigma = sigma.trace();
    if tr_sigma <= 0.0 {
        return Err(Error::Domain("second argument must be non-zero".into()));
    }
    d_alpha_z(
        &rho.scale(1.0 / rho.trace()),
        &sigma.scale(1.0 / tr_sigma),
        p,
    )
}

/// Regularization strengths for [`d_alpha_z_regularized`].
pub const REGULARIZATION_SCHEDULE: [f64; 3] = [1e-6, 1e-8, 1e-10];

/// Independent evaluation of `D_{α,z}` through invertible perturbations.
///
/// `σ` is replaced by `σ + εI` (and also `ρ` by `ρ + εI` when `z = ∞`, where
/// logarithms need full rank) for each ε in [`REGULARIZATION_SCHEDULE`]; the
/// last two values are Richardson-extrapolated to ε = 0 assuming a linear
/// leading error term. Only meant as a cross-check of the support convention.
pub fn d_alpha_z_regularized(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    p: RenyiParams,
) -> Result<f64> {
    p.reject_one()?;
    check_pair(rho, sigma)?;
    let eye = HermitianOperator::identity(rho.dim());
    let mut values = Vec::with_capacity(REGULARIZATION_SCHEDULE.len());
    for eps in REGULARIZATION_SCHEDULE {
        let sigma_eps = sigma.add(&eye.scale(eps));
        let value = match p.z() {
            ZParam::Infinite => {
                let rho_eps = rho.add(&eye.scale(eps));
                let log_rho = rho_eps.apply(f64::ln);
                let log_sigma = sigma_eps.apply(f64::ln);
                let q = log_rho
                    .scale(p.alpha())
                    .add(&log_sigma.scale(1.0 - p.alpha()))
                    .exp()
                    .trace();
                (q / rho_eps.trace()).ln() / (p.alpha() - 1.0)
            }
            ZParam::Finite(_) => d_alpha_z(rho, &sigma_eps, p)?.to_f64(),
        };
        values.push(value);
    }
    let ratio = REGULARIZATION_SCHEDULE[1] / REGULARIZATION_SCHEDULE[2];
    let (coarse, fine) = (values[1], values[2]);
    Ok(fine + (fine - coarse) / (ratio - 1.0))
}

/// The eight parameter regions on which monotonicity and convexity are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    K0,
    K1,
    K2,
    K3,
    K4,
    K5,
    K6,
    K7,
}

impl Region {
    pub const ALL: [Region; 8] = [
        Region::K0,
        Region::K1,
        Region::K2,
        Region::K3,
        Region::K4,
        Region::K5,
        Region::K6,
        Region::K7,
    ];

    /// Closed-boundary membership test; `z = ∞` belongs to `K4` or `K7`.
    pub fn contains(self, alpha: f64, z: ZParam) -> bool {
        let zv = z.to_f64();
        let a = alpha;
        if a < 1.0 {
            match self {
                Region::K0 => zv < a.min(1.0 - a),
                Region::K1 => a <= zv && zv <= 1.0 - a,
                Region::K2 => a.max(1.0 - a) <= zv && zv <= 1.0,
                Region::K3 => 1.0 - a <= zv && zv <= a,
                Region::K4 => zv >= 1.0,
                _ => false,
            }
        } else if a > 1.0 {
            match self {
                Region::K5 => a / 2.0 <= zv && zv <= 1.0,
                Region::K6 => (a - 1.0).max(1.0) <= zv && zv <= a,
                Region::K7 => zv >= a,
                _ => false,
            }
        } else {
            false
        }
    }
}

/// Which structural properties the lemmas guarantee at a given `(α, z)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    /// Every region containing the point (boundaries belong to all adjacent regions).
    pub regions: Vec<Region>,
    /// The most permissive of `regions`, if any.
    pub region: Option<Region>,
    pub monotone_cptp: bool,
    pub jointly_convex_qbar: bool,
    pub jointly_convex_d: bool,
    pub second_arg_convex_d: bool,
    pub second_arg_convex_qbar: bool,
    pub quasi_convex_d: bool,
    pub in_gamma_d: bool,
    pub in_gamma_qbar: bool,
}

const MONOTONE: [Region; 4] = [Region::K2, Region::K4, Region::K5, Region::K6];
const JOINT_D: [Region; 2] = [Region::K2, Region::K4];
const SECOND_D: [Region; 5] = [Region::K2, Region::K3, Region::K4, Region::K6, Region::K7];
const SECOND_QBAR: [Region; 6] = [
    Region::K2,
    Region::K3,
    Region::K4,
    Region::K5,
    Region::K6,
    Region::K7,
];

pub fn classify_region(p: RenyiParams) -> Result<RegionReport> {
    p.reject_one()?;
    let (a, z) = (p.alpha(), p.z());
    let regions: Vec<Region> = Region::ALL
        .into_iter()
        .filter(|r| r.contains(a, z))
        .collect();
    let any_of = |set: &[Region]| regions.iter().any(|r| set.contains(r));
    let monotone_cptp = any_of(&MONOTONE);
    let second_arg_convex_d = any_of(&SECOND_D);
    let zv = z.to_f64();
    let in_gamma_d = if a < 1.0 {
        zv > 1.0 - a && !z.is_infinite()
    } else {
        zv >= (a / 2.0).max(a - 1.0)
    };
    let in_gamma_qbar = if a < 1.0 {
        zv > 1.0 - a && !z.is_infinite()
    } else {
        zv >= a
    };
    let score = |r: &Region| {
        [
            MONOTONE.contains(r),
            JOINT_D.contains(r),
            SECOND_D.contains(r),
            SECOND_QBAR.contains(r),
        ]
        .iter()
        .filter(|&&b| b)
        .count()
    };
    let region = regions
        .iter()
        .copied()
        .max_by(|x, y| score(x).cmp(&score(y)).then(y.cmp(x)));
    Ok(RegionReport {
        region,
        monotone_cptp,
        jointly_convex_qbar: monotone_cptp,
        jointly_convex_d: any_of(&JOINT_D),
        second_arg_convex_d,
        second_arg_convex_qbar: any_of(&SECOND_QBAR),
        quasi_convex_d: second_arg_convex_d || regions.contains(&Region::K5),
        in_gamma_d,
        in_gamma_qbar,
        regions,
    })
}
