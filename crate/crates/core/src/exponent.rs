//! Coding exponents built on weighted radii: the strong converse exponent,
//! cutoff rates, sphere packing and random coding curves, finite block length
//! bounds and information-spectrum diagnostics.
//!
//! All values are in nats.

use std::cell::RefCell;
use std::collections::BTreeMap;

use serde::Serialize;

use crate::center::{d_max_center, solve_center_d, SolverOptions};
use crate::channel::{GcqChannel, InputDistribution, TypeClass};
use crate::divergence::{q_alpha_z, Extended, RenyiParams};
use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::optimize::golden_section_max;

pub const ALPHA_MAX: f64 = 64.0;
/// Floor of the `α < 1` grids; suprema found here are flagged.
pub const ALPHA_MIN: f64 = 1e-3;
pub const GRID_POINTS: usize = 40;
pub const GOLDEN_ITERATIONS: usize = 20;

/// `n` log-spaced points `α_max^{i/n}`, `i = 1..=n`, in `(1, α_max]`.
pub fn alpha_grid_above_one(n: usize, alpha_max: f64) -> Vec<f64> {
    (1..=n)
        .map(|i| alpha_max.powf(i as f64 / n as f64))
        .collect()
}

/// `n` log-spaced points `α_min^{1 − i/n}`, `i = 0..n`, in `[α_min, 1)`.
pub fn alpha_grid_below_one(n: usize, alpha_min: f64) -> Vec<f64> {
    (0..n)
        .map(|i| alpha_min.powf(1.0 - i as f64 / n as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentKind {
    StrongConverse,
    SpherePacking,
    RandomCoding,
}

impl std::str::FromStr for ExponentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sc" | "strong-converse" => Ok(Self::StrongConverse),
            "sp" | "sphere-packing" => Ok(Self::SpherePacking),
            "rc" | "random-coding" => Ok(Self::RandomCoding),
            _ => Err(Error::Domain(format!(
                "unknown exponent {s:?}; expected sc, sp or rc"
            ))),
        }
    }
}

impl std::fmt::Display for ExponentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::StrongConverse => "strong-converse",
            Self::SpherePacking => "sphere-packing",
            Self::RandomCoding => "random-coding",
        })
    }
}

/// A one-dimensional supremum over `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Supremum {
    pub value: f64,
    /// `f64::INFINITY` when the `α → ∞` endpoint wins.
    pub argmax_alpha: f64,
    /// Set when the maximizer is the lowest grid point `α_min`.
    pub at_alpha_floor: bool,
    /// Grid points whose center solve did not converge and were skipped.
    pub dropped_alphas: Vec<f64>,
}

/// Maximizes `f` over `grid` (sorted ascending), then refines by golden
/// section between the neighbours of the grid argmax, using `lo`/`hi` as
/// neighbours at the ends. `None` marks a dropped grid point.
fn grid_supremum(
    grid: &[f64],
    lo: f64,
    hi: f64,
    mut f: impl FnMut(f64) -> Option<f64>,
) -> (f64, f64, Vec<f64>) {
    let mut dropped = Vec::new();
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    let mut best_index = None;
    for (i, &a) in grid.iter().enumerate() {
        match f(a) {
            Some(v) if v > best.1 => {
                best = (a, v);
                best_index = Some(i);
            }
            Some(_) => {}
            None => dropped.push(a),
        }
    }
    if let Some(i) = best_index {
        let left = if i == 0 { lo } else { grid[i - 1] };
        let right = if i + 1 == grid.len() { hi } else { grid[i + 1] };
        let (a, v) = golden_section_max(
            |a| f(a).unwrap_or(f64::NEG_INFINITY),
            left,
            right,
            GOLDEN_ITERATIONS,
        );
        if v > best.1 {
            best = (a, v);
        }
    }
    (best.0, best.1, dropped)
}

/// Memoized weighted radii of one channel and input distribution.
pub struct RadiusCache<'a> {
    w: &'a GcqChannel,
    p: &'a InputDistribution,
    sandwiched: RefCell<BTreeMap<u64, Option<f64>>>,
    petz: RefCell<BTreeMap<u64, Option<f64>>>,
    at_infinity: RefCell<Option<f64>>,
}

impl<'a> RadiusCache<'a> {
    pub fn new(w: &'a GcqChannel, p: &'a InputDistribution) -> Self {
        Self {
            w,
            p,
            sandwiched: RefCell::default(),
            petz: RefCell::default(),
            at_infinity: RefCell::default(),
        }
    }

    fn solve(&self, params: RenyiParams) -> Result<Option<f64>> {
        let c = solve_center_d(self.w, self.p, params, SolverOptions::default())?;
        Ok(c.converged.then_some(c.value))
    }

    /// `χ*_α = χ_{α,α}`; `None` if the center solve did not converge.
    pub fn chi_star(&self, alpha: f64) -> Result<Option<f64>> {
        if alpha == 1.0 {
            return Ok(Some(crate::center::holevo_quantity(self.w, self.p)?.0));
        }
        if let Some(v) = self.sandwiched.borrow().get(&alpha.to_bits()) {
            return Ok(*v);
        }
        let v = self.solve(RenyiParams::sandwiched(alpha)?)?;
        self.sandwiched.borrow_mut().insert(alpha.to_bits(), v);
        Ok(v)
    }

    /// `χ_α = χ_{α,1}`, the Petz-type weighted radius.
    pub fn chi_petz(&self, alpha: f64) -> Result<Option<f64>> {
        if alpha == 1.0 {
            return Ok(Some(crate::center::holevo_quantity(self.w, self.p)?.0));
        }
        if let Some(v) = self.petz.borrow().get(&alpha.to_bits()) {
            return Ok(*v);
        }
        let v = self.solve(RenyiParams::petz(alpha)?)?;
        self.petz.borrow_mut().insert(alpha.to_bits(), v);
        Ok(v)
    }

    /// `χ*_∞ = inf_σ Σ_x P(x) D_max(W(x)‖σ)`, searched from the `χ*_{α_max}` center.
    pub fn chi_star_infinity(&self) -> Result<f64> {
        if let Some(v) = *self.at_infinity.borrow() {
            return Ok(v);
        }
        let seed = solve_center_d(
            self.w,
            self.p,
            RenyiParams::sandwiched(ALPHA_MAX)?,
            SolverOptions::default(),
        )?;
        let c = d_max_center(self.w, self.p, Some(&seed.center))?;
        *self.at_infinity.borrow_mut() = Some(c.value);
        Ok(c.value)
    }
}

fn check_rate(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "rate must be positive and finite, got {r}"
        )))
    }
}

/// `sc(W, R, P) = sup_{α>1} ((α−1)/α)[R − χ*_α(W, P)]`, clamped at zero.
pub fn sc_exponent(w: &GcqChannel, p: &InputDistribution, r: f64) -> Result<Supremum> {
    sc_exponent_cached(&RadiusCache::new(w, p), r)
}

pub fn sc_exponent_cached(cache: &RadiusCache<'_>, r: f64) -> Result<Supremum> {
    check_rate(r)?;
    let grid = alpha_grid_above_one(GRID_POINTS, ALPHA_MAX);
    let mut error = None;
    let (a, v, dropped) =
        grid_supremum(&grid, 1.0, ALPHA_MAX, |alpha| match cache.chi_star(alpha) {
            Ok(chi) => chi.map(|c| (alpha - 1.0) / alpha * (r - c)),
            Err(e) => {
                error.get_or_insert(e);
                None
            }
        });
    if dropped.len() == grid.len() {
        return Err(error.unwrap_or_else(|| Error::NonConvergence {
            alpha: grid[0],
            z: grid[0].to_string(),
            detail: "no grid point converged".into(),
        }));
    }
    let mut best = (a, v);
    let at_inf = r - cache.chi_star_infinity()?;
    if at_inf > best.1 {
        best = (f64::INFINITY, at_inf);
    }
    if best.1 <= 0.0 {
        best = (1.0, 0.0);
    }
    Ok(Supremum {
        value: best.1,
        argmax_alpha: best.0,
        at_alpha_floor: false,
        dropped_alphas: dropped,
    })
}

/// The generalized `κ`-cutoff rate `C_κ(W, P) = χ*_{1/(1−κ)}(W, P)`.
pub fn cutoff_rate(w: &GcqChannel, p: &InputDistribution, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Domain(format!(
            "kappa must lie in (0, 1), got {kappa}"
        )));
    }
    let alpha = 1.0 / (1.0 - kappa);
    RadiusCache::new(w, p)
        .chi_star(alpha)?
        .ok_or_else(|| Error::NonConvergence {
            alpha,
            z: alpha.to_string(),
            detail: "sandwiched center did not converge".into(),
        })
}

/// `sup_{0<α<1} ((α−1)/α)[R − χ_α(W, P)]` with the Petz-type radius, clamped at
/// zero and evaluated on `[α_min, 1)`.
pub fn sphere_packing_bound(w: &GcqChannel, p: &InputDistribution, r: f64) -> Result<Supremum> {
    sphere_packing_cached(&RadiusCache::new(w, p), r)
}

pub fn sphere_packing_cached(cache: &RadiusCache<'_>, r: f64) -> Result<Supremum> {
    check_rate(r)?;
    let grid = alpha_grid_below_one(GRID_POINTS, ALPHA_MIN);
    let mut error = None;
    let (a, v, dropped) =
        grid_supremum(&grid, ALPHA_MIN, 1.0, |alpha| match cache.chi_petz(alpha) {
            Ok(chi) => chi.map(|c| (alpha - 1.0) / alpha * (r - c)),
            Err(e) => {
                error.get_or_insert(e);
                None
            }
        });
    if let Some(e) = error {
        return Err(e);
    }
    if v <= 0.0 {
        return Ok(Supremum {
            value: 0.0,
            argmax_alpha: 1.0,
            at_alpha_floor: false,
            dropped_alphas: dropped,
        });
    }
    Ok(Supremum {
        value: v,
        argmax_alpha: a,
        at_alpha_floor: a <= ALPHA_MIN * (1.0 + 1e-9),
        dropped_alphas: dropped,
    })
}

/// `Σ_x P(x) D_{α,1}(W(x)‖W(P))` for `α ∈ [0, 1)`, with
/// `D_0(ρ‖σ) = −log(Tr ρ^0 σ / Tr ρ)` at `α = 0`.
pub fn petz_divergence_to_average(
    w: &GcqChannel,
    p: &InputDistribution,
    alpha: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    let avg = w.average_output(p)?;
    let mut total = 0.0;
    for (o, wt) in w.supported_outputs(p)? {
        let q = if alpha == 0.0 {
            o.support_projection().sandwich(&avg).trace()
        } else {
            q_alpha_z(o, &avg, RenyiParams::petz(alpha)?)?.to_f64()
        };
        total += wt * (q / o.trace()).ln() / (alpha - 1.0);
    }
    Ok(total)
}

fn random_coding_with_penalty(
    w: &GcqChannel,
    p: &InputDistribution,
    r: f64,
    penalty: f64,
) -> Result<Supremum> {
    check_rate(r)?;
    let mut grid = vec![0.0];
    grid.extend(alpha_grid_below_one(GRID_POINTS, ALPHA_MIN));
    let mut error = None;
    let mut term = |alpha: f64| match petz_divergence_to_average(w, p, alpha) {
        Ok(d) => Some((alpha - 1.0) * (r + penalty - d)),
        Err(e) => {
            error.get_or_insert(e);
            None
        }
    };
    let (a, v, _) = grid_supremum(&grid, 0.0, 1.0, &mut term);
    if let Some(e) = error {
        return Err(e);
    }
    let (a, v) = if v > 0.0 { (a, v) } else { (1.0, 0.0) };
    Ok(Supremum {
        value: v,
        argmax_alpha: a,
        at_alpha_floor: false,
        dropped_alphas: Vec::new(),
    })
}

/// `sup_{0≤α≤1} (α−1)[R − Σ_x P(x) D_{α,1}(W(x)‖W(P))]`, clamped at zero.
pub fn random_coding_exponent(w: &GcqChannel, p: &InputDistribution, r: f64) -> Result<Supremum> {
    random_coding_with_penalty(w, p, r, 0.0)
}

/// The constant-composition bound for block length `n`: the random coding
/// exponent of the type `P_n` with `|supp P_n| log(n+1)/n` added to the rate.
pub fn finite_n_random_coding_bound(w: &GcqChannel, pn: &TypeClass, r: f64) -> Result<Supremum> {
    let n = pn.n() as f64;
    let penalty = pn.support_size() as f64 * (n + 1.0).ln() / n;
    random_coding_with_penalty(w, &pn.as_distribution(), r, penalty)
}

/// Upper bound on `(1/n) log P_s` for constant composition `P_n` codes of rate
/// at least `R`: `−sup_{α>1} ((α−1)/α)[R − χ*_α(W, P_n)]`.
pub fn finite_n_converse_bound(w: &GcqChannel, pn: &TypeClass, r: f64) -> Result<f64> {
    Ok(-sc_exponent(w, &pn.as_distribution(), r)?.value)
}

/// The same bound at a fixed `α > 1` and state `σ`:
/// `−((α−1)/α)[R − Σ_x P_n(x) D*_α(W(x)‖σ)]`.
pub fn finite_n_converse_bound_at(
    w: &GcqChannel,
    pn: &TypeClass,
    r: f64,
    alpha: f64,
    sigma: &HermitianOperator,
) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("alpha must exceed 1, got {alpha}")));
    }
    let p = pn.as_distribution();
    match crate::center::weighted_objective(w, &p, RenyiParams::sandwiched(alpha)?, sigma)? {
        Extended::Finite(v) => Ok(-(alpha - 1.0) / alpha * (r - v)),
        Extended::PosInfinity => Ok(f64::INFINITY),
    }
}

/// Step of the one-sided difference quotients of [`psi_curve`].
pub const PSI_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct PsiCurve {
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    /// `(ψ(1) − ψ(1−h))/h`.
    pub left_derivative: f64,
    /// `(ψ(1+h) − ψ(1))/h`.
    pub right_derivative: f64,
}

/// `ψ(α) = Σ_x P(x) log Q_α(ρ_x‖σ_x)`, with the Petz form for `α ≤ 1` and the
/// sandwiched form for `α > 1`.
pub fn psi_value(pairs: &[(HermitianOperator, HermitianOperator, f64)], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let mut total = 0.0;
    for (rho, sigma, weight) in pairs {
        let q = if alpha == 1.0 {
            rho.trace()
        } else if alpha < 1.0 {
            q_alpha_z(rho, sigma, RenyiParams::petz(alpha)?)?.to_f64()
        } else {
            q_alpha_z(rho, sigma, RenyiParams::sandwiched(alpha)?)?.to_f64()
        };
        total += weight * q.ln();
    }
    Ok(total)
}

/// `ψ` on `alphas` plus one-sided derivative estimates at `α = 1`.
pub fn psi_curve(
    pairs: &[(HermitianOperator, HermitianOperator, f64)],
    alphas: &[f64],
) -> Result<PsiCurve> {
    if pairs.is_empty() {
        return Err(Error::Domain("psi needs at least one pair".into()));
    }
    let weight: f64 = pairs.iter().map(|(_, _, w)| w).sum();
    if (weight - 1.0).abs() > 1e-9 || pairs.iter().any(|(_, _, w)| *w < 0.0) {
        return Err(Error::Domain(format!(
            "pair weights must form a distribution, sum is {weight}"
        )));
    }
    let values = alphas
        .iter()
        .map(|&a| psi_value(pairs, a))
        .collect::<Result<Vec<_>>>()?;
    let at_one = psi_value(pairs, 1.0)?;
    Ok(PsiCurve {
        alphas: alphas.to_vec(),
        values,
        left_derivative: (at_one - psi_value(pairs, 1.0 - PSI_STEP)?) / PSI_STEP,
        right_derivative: (psi_value(pairs, 1.0 + PSI_STEP)? - at_one) / PSI_STEP,
    })
}

/// `Tr(ρ − tσ)_+`.
pub fn clipped_trace(rho: &HermitianOperator, sigma: &HermitianOperator, t: f64) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(rho.sub(&sigma.scale(t)).positive_part_trace())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub u: Vec<f64>,
    /// `u · χ*_{1/(1−u)}(W, P)`.
    pub values: Vec<f64>,
    /// `max_i f(u_i) − (f(u_{i−1}) + f(u_{i+1}))/2` over interior points.
    pub max_violation: f64,
}

/// Midpoint-convexity check of `u ↦ u χ*_{1/(1−u)}(W, P)` on a uniform grid in `(0, 1)`.
pub fn convexity_probe(
    w: &GcqChannel,
    p: &InputDistribution,
    u: &[f64],
) -> Result<ConvexityReport> {
    if u.len() < 3 {
        return Err(Error::Domain(
            "convexity probe needs at least three grid points".into(),
        ));
    }
    if u.iter().any(|&x| !(x > 0.0 && x < 1.0)) || u.windows(2).any(|v| v[1] <= v[0]) {
        return Err(Error::Domain(
            "probe grid must be increasing inside (0, 1)".into(),
        ));
    }
    let step = u[1] - u[0];
    if u.windows(2).any(|v| ((v[1] - v[0]) - step).abs() > 1e-9) {
        return Err(Error::Domain("probe grid must be uniform".into()));
    }
    let cache = RadiusCache::new(w, p);
    let mut values = Vec::with_capacity(u.len());
    for &x in u {
        let alpha = 1.0 / (1.0 - x);
        let chi = cache
            .chi_star(alpha)?
            .ok_or_else(|| Error::NonConvergence {
                alpha,
                z: alpha.to_string(),
                detail: "sandwiched center did not converge".into(),
            })?;
        values.push(x * chi);
    }
    let max_violation = values
        .windows(3)
        .map(|v| v[1] - (v[0] + v[2]) / 2.0)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ConvexityReport {
        u: u.to_vec(),
        values,
        max_violation,
    })
}

/// An exponent as a function of the rate, with the maximizing `α` per rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentCurve {
    pub kind: ExponentKind,
    pub rates: Vec<f64>,
    pub values: Vec<f64>,
    pub maximizing_alpha: Vec<f64>,
    /// Rates whose supremum sits at the `α_min` floor of the grid.
    pub floor_hits: Vec<f64>,
    pub params: String,
}

impl ExponentCurve {
    /// Largest violation of nonnegativity, of the monotonicity expected for
    /// the kind, and of midpoint convexity (for evenly spaced rates).
    pub fn shape_violation(&self) -> f64 {
        let mut worst = self.values.iter().map(|v| -v).fold(0.0, f64::max);
        let sign = if self.kind == ExponentKind::StrongConverse {
            1.0
        } else {
            -1.0
        };
        for v in self.values.windows(2) {
            worst = worst.max(sign * (v[0] - v[1]));
        }
        let even = self
            .rates
            .windows(3)
            .all(|r| ((r[2] - r[1]) - (r[1] - r[0])).abs() < 1e-9 * r[2].abs().max(1.0));
        if even {
            for v in self.values.windows(3) {
                worst = worst.max(v[1] - (v[0] + v[2]) / 2.0);
            }
        }
        worst
    }
}

/// `steps` evenly spaced rates from `r_min` to `r_max`.
pub fn rate_grid(r_min: f64, r_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) || steps < 2 {
        return Err(Error::Domain(format!(
            "rate range needs 0 < min <= max and at least 2 steps, got ({r_min}, {r_max}, {steps})"
        )));
    }
    Ok((0..steps)
        .map(|i| r_min + (r_max - r_min) * i as f64 / (steps - 1) as f64)
        .collect())
}

/// Evaluates an exponent on the given rates, sharing radius computations across rates.
pub fn exponent_curve(
    w: &GcqChannel,
    p: &InputDistribution,
    kind: ExponentKind,
    rates: &[f64],
) -> Result<ExponentCurve> {
    if rates.is_empty() {
        return Err(Error::Domain("rate grid is empty".into()));
    }
    let cache = RadiusCache::new(w, p);
    let mut values = Vec::with_capacity(rates.len());
    let mut alphas = Vec::with_capacity(rates.len());
    let mut floor_hits = Vec::new();
    for &r in rates {
        let s = match kind {
            ExponentKind::StrongConverse => sc_exponent_cached(&cache, r)?,
            ExponentKind::SpherePacking => sphere_packing_cached(&cache, r)?,
            ExponentKind::RandomCoding => random_coding_exponent(w, p, r)?,
        };
        if s.at_alpha_floor {
            floor_hits.push(r);
        }
        values.push(s.value);
        alphas.push(s.argmax_alpha);
    }
    let params = match kind {
        ExponentKind::StrongConverse => {
            "sup_{alpha>1} (alpha-1)/alpha [R - chi*_alpha(W,P)], z = alpha"
        }
        ExponentKind::SpherePacking => {
            "sup_{0<alpha<1} (alpha-1)/alpha [R - chi_alpha(W,P)], z = 1"
        }
        ExponentKind::RandomCoding => {
            "sup_{0<=alpha<=1} (alpha-1) [R - sum_x P(x) D_alpha(W(x)||W(P))], z = 1"
        }
    };
    Ok(ExponentCurve {
        kind,
        rates: rates.to_vec(),
        values,
        maximizing_alpha: alphas,
        floor_hits,
        params: params.to_string(),
    })
}
