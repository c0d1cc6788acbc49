//! Named numerical checks of the structural properties of every module.
//!
//! Each check draws its random inputs from a seed and reports its worst
//! observed deviation against a fixed tolerance. Checks that involve a
//! channel use the supplied one where its size allows and fall back to seeded
//! random channels otherwise.

use rand::Rng;
use serde::Serialize;

use crate::center::{
    first_order_violation, holevo_quantity, mutual_information_direct, oracle_grid_center,
    probe_directions, solve_center_d, solve_center_qbar, SolverOptions,
};
use crate::channel::{
    partial_trace_classical, partial_trace_quantum, type_mixing_check, type_of, GcqChannel,
    InputDistribution, TypeClass,
};
use crate::divergence::{
    classify_region, d_alpha_z, d_hat, q_alpha_z, tsallis, umegaki, Extended, Region, RenyiParams,
    ZParam,
};
use crate::error::Result;
use crate::exponent::{
    clipped_trace, cutoff_rate, exponent_curve, rate_grid, sc_exponent, ExponentKind, RadiusCache,
};
use crate::operator::{
    matrix_exp_log_combination, pinch, spectral_cluster_count, HermitianOperator,
};
use crate::optimize::{golden_section_max, nelder_mead, NelderMeadOptions};
use crate::sampling::{
    dirichlet, random_channel, random_commuting_channel, random_distribution,
    random_full_rank_state, random_state, rng, SeededRng,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub module: String,
    pub name: String,
    pub passed: bool,
    /// Worst deviation observed, in the units of `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<PropertyCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn push(&mut self, check: PropertyCheck) {
        self.checks.push(check);
    }
}

fn check(
    module: &str,
    name: &str,
    worst: f64,
    tolerance: f64,
    detail: impl Into<String>,
) -> PropertyCheck {
    PropertyCheck {
        module: module.into(),
        name: name.into(),
        passed: worst <= tolerance,
        worst,
        tolerance,
        detail: detail.into(),
    }
}

/// Runs every check. `w`/`p` is the user channel.
pub fn run_all(w: &GcqChannel, p: &InputDistribution, seed: u64) -> Result<VerifyReport> {
    let mut r = rng(seed);
    let mut report = VerifyReport::default();
    let steps: [fn(&mut SeededRng, &GcqChannel, &InputDistribution) -> Result<PropertyCheck>; 26] = [
        |r, _, _| pinching_inequality(r),
        |r, _, _| support_power_inverse(r),
        |r, _, _| pinching_trace_and_positivity(r),
        |r, _, _| commuting_exp_log(r),
        |r, _, _| nonnegativity(r),
        |r, _, _| z_monotonicity(r),
        |r, _, _| pinching_data_processing(r),
        |r, _, _| commuting_reduction(r),
        |r, _, _| alpha_one_continuity(r),
        |r, _, _| strict_positivity(r),
        lifted_marginals,
        |r, _, _| type_class_size_bounds(r),
        |r, _, _| type_probability(r),
        fixed_point_certificate,
        entropy_bound,
        additivity,
        subadditivity,
        support_law,
        |r, _, _| oracle_equivalence(r),
        mutual_information_ordering,
        mutual_information_direct_check,
        sc_threshold,
        sc_convex_non_decreasing,
        cutoff_tangency,
        |r, _, _| classical_consistency(r),
        |r, _, _| clipped_trace_monotone(r),
    ];
    for step in steps {
        report.push(step(&mut r, w, p)?);
    }
    Ok(report)
}

fn random_psd(r: &mut SeededRng, d: usize) -> HermitianOperator {
    let rank = r.random_range(1..=d);
    random_state(r, d, rank)
        .into_operator()
        .scale(r.random_range(0.5..2.0))
}

fn random_hermitian(r: &mut SeededRng, d: usize) -> HermitianOperator {
    let mut s = random_full_rank_state(r, d).into_operator();
    if r.random_bool(0.5) {
        let v: Vec<f64> = (0..d).map(|i| (i / 2) as f64).collect();
        s = HermitianOperator::from_real_diagonal(&v);
    }
    s.sub(&random_full_rank_state(r, d).into_operator().scale(0.3))
}

fn random_params(r: &mut SeededRng) -> RenyiParams {
    loop {
        let alpha = 3.0 * (1.0 - r.random::<f64>());
        if (alpha - 1.0).abs() < 1e-6 {
            continue;
        }
        let params = if alpha > 1.0 && r.random_bool(0.15) {
            RenyiParams::new(alpha, ZParam::Infinite)
        } else {
            RenyiParams::finite(alpha, 3.0 * (1.0 - r.random::<f64>()))
        };
        if let Ok(p) = params {
            return p;
        }
    }
}

fn finite(v: Extended) -> f64 {
    v.to_f64()
}

pub fn pinching_inequality(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = r.random_range(2..=4);
        let a = random_hermitian(r, d);
        let x = random_psd(r, d);
        let gap = pinch(&a, &x)?
            .scale(spectral_cluster_count(&a) as f64)
            .sub(&x);
        worst = worst.max(-gap.min_eigenvalue());
    }
    Ok(check(
        "operator-core",
        "pinching_inequality",
        worst,
        1e-9,
        "most negative eigenvalue of |spec A| pinch(A,X) - X",
    ))
}

pub fn support_power_inverse(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = r.random_range(1..=4);
        let a = random_psd(r, d);
        let x = r.random_range(-1.0..1.0);
        let prod = a.support_power(x)?.matrix() * a.support_power(-x)?.matrix();
        worst = worst.max(
            (prod - a.support_projection().matrix())
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max),
        );
    }
    Ok(check(
        "operator-core",
        "support_power_inverse",
        worst,
        1e-9,
        "max entry of A^x A^-x - A^0",
    ))
}

pub fn pinching_trace_and_positivity(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = r.random_range(2..=4);
        let a = random_hermitian(r, d);
        let x = random_psd(r, d);
        let out = pinch(&a, &x)?;
        worst = worst
            .max((out.trace() - x.trace()).abs())
            .max(-out.min_eigenvalue());
    }
    Ok(check(
        "operator-core",
        "pinching_trace_and_positivity",
        worst,
        1e-10,
        "trace drift or negative eigenvalue",
    ))
}

pub fn commuting_exp_log(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = r.random_range(2..=4);
        let mut a = dirichlet(r, d);
        let b = dirichlet(r, d);
        a[0] = 0.0;
        let alpha = r.random_range(-1.0..3.0);
        let got = matrix_exp_log_combination(
            &HermitianOperator::from_real_diagonal(&a),
            &HermitianOperator::from_real_diagonal(&b),
            alpha,
        )?;
        let expected: f64 = a
            .iter()
            .zip(&b)
            .filter(|(x, _)| **x > 0.0)
            .map(|(x, y)| x.powf(alpha) * y.powf(1.0 - alpha))
            .sum();
        worst = worst.max((got - expected).abs());
    }
    Ok(check(
        "operator-core",
        "commuting_exp_log",
        worst,
        1e-10,
        "deviation from sum r^a s^(1-a)",
    ))
}

pub fn nonnegativity(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = r.random_range(2..=3);
        let rho = random_psd(r, d);
        let sigma = random_psd(r, d);
        let params = random_params(r);
        for v in [
            d_hat(&rho, &sigma, params)?,
            tsallis(
                &rho.scale(1.0 / rho.trace()),
                &sigma.scale(1.0 / sigma.trace()),
                params,
            )?,
        ] {
            if let Extended::Finite(v) = v {
                worst = worst.max(-v);
            }
        }
    }
    Ok(check(
        "divergences",
        "nonnegativity",
        worst,
        1e-10,
        "most negative normalized divergence",
    ))
}

pub fn z_monotonicity(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let d = r.random_range(2..=3);
        let rho = random_full_rank_state(r, d).into_operator();
        let sigma = random_full_rank_state(r, d).into_operator();
        let alpha = r.random_range(1.05..3.0);
        let mut prev = f64::INFINITY;
        for z in [
            ZParam::Finite(alpha / 2.0),
            ZParam::Finite(alpha),
            ZParam::Finite(2.0 * alpha),
            ZParam::Infinite,
        ] {
            let q = finite(q_alpha_z(&rho, &sigma, RenyiParams::new(alpha, z)?)?);
            worst = worst.max(q - prev);
            prev = q;
        }
    }
    Ok(check(
        "divergences",
        "z_monotonicity",
        worst,
        1e-9,
        "largest increase of Q along z = a/2, a, 2a, inf",
    ))
}

pub fn pinching_data_processing(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut worst: f64 = 0.0;
    let mut tried = 0;
    while tried < 40 {
        let params = random_params(r);
        if !classify_region(params)?.monotone_cptp {
            continue;
        }
        tried += 1;
        let d = r.random_range(2..=3);
        let rho = random_full_rank_state(r, d).into_operator();
        let sigma = random_full_rank_state(r, d).into_operator();
        let a = random_hermitian(r, d);
        let before = finite(d_alpha_z(&rho, &sigma, params)?);
        let after = finite(d_alpha_z(&pinch(&a, &rho)?, &pinch(&a, &sigma)?, params)?);
        worst = worst.max(after - before);
    }
    Ok(check(
        "divergences",
        "pinching_data_processing",
        worst,
        1e-9,
        "largest increase of D under pinching",
    ))
}

pub fn commuting_reduction(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let d = r.random_range(2..=4);
        let a = dirichlet(r, d);
        let b = dirichlet(r, d);
        let params = random_params(r);
        let alpha = params.alpha();
        let q: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| x.powf(alpha) * y.powf(1.0 - alpha))
            .sum();
        let rho = HermitianOperator::from_real_diagonal(&a);
        let sigma = HermitianOperator::from_real_diagonal(&b);
        worst = worst
            .max((finite(q_alpha_z(&rho, &sigma, params)?) - q).abs())
            .max((finite(d_alpha_z(&rho, &sigma, params)?) - q.ln() / (alpha - 1.0)).abs())
            .max((finite(tsallis(&rho, &sigma, params)?) - (1.0 - q) / (1.0 - alpha)).abs());
    }
    Ok(check(
        "divergences",
        "commuting_reduction",
        worst,
        1e-10,
        "deviation from classical Q, D and T",
    ))
}

pub fn alpha_one_continuity(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = r.random_range(2..=3);
        let rho = random_full_rank_state(r, d).into_operator();
        let sigma = random_full_rank_state(r, d).into_operator();
        let d1 = finite(umegaki(&rho, &sigma)?);
        let (lo, hi) = (1.0 - 1e-4, 1.0 + 1e-4);
        for family in [RenyiParams::sandwiched, RenyiParams::petz] {
            let below = finite(d_alpha_z(&rho, &sigma, family(lo)?)?);
            let above = finite(d_alpha_z(&rho, &sigma, family(hi)?)?);
            worst = worst
                .max(below - d1)
                .max(d1 - above)
                .max(((below + above) / 2.0 - d1).abs());
        }
    }
    Ok(check(
        "divergences",
        "alpha_one_continuity",
        worst,
        1e-3,
        "bracket violation of D at 1 -/+ 1e-4 around the relative entropy, or midpoint distance",
    ))
}

pub fn strict_positivity(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut smallest = f64::INFINITY;
    let mut tried = 0;
    while tried < 60 {
        let params = random_params(r);
        let report = classify_region(params)?;
        if report.regions.contains(&Region::K0) {
            continue;
        }
        tried += 1;
        let d = r.random_range(2..=3);
        let rho = random_full_rank_state(r, d).into_operator();
        let sigma = random_full_rank_state(r, d).into_operator();
        smallest = smallest
            .min(finite(d_hat(&rho, &sigma, params)?))
            .min(finite(tsallis(&rho, &sigma, params)?));
    }
    Ok(check(
        "divergences",
        "strict_positivity",
        1e-6 - smallest,
        0.0,
        format!("smallest value {smallest:.3e} must exceed 1e-6"),
    ))
}

/// The user channel when it is cq and small enough to lift, else a random one.
fn liftable<'a>(
    r: &mut SeededRng,
    w: &'a GcqChannel,
    p: &'a InputDistribution,
    max_dim: usize,
    max_symbols: usize,
) -> (
    std::borrow::Cow<'a, GcqChannel>,
    std::borrow::Cow<'a, InputDistribution>,
) {
    if w.is_cq() && w.dim() <= max_dim && p.support_size() <= max_symbols && w.alphabet_size() <= 16
    {
        (std::borrow::Cow::Borrowed(w), std::borrow::Cow::Borrowed(p))
    } else {
        let rw = random_channel(r, 2, 3);
        let rp = random_distribution(r, &rw);
        (std::borrow::Cow::Owned(rw), std::borrow::Cow::Owned(rp))
    }
}

pub fn lifted_marginals(
    r: &mut SeededRng,
    w: &GcqChannel,
    p: &InputDistribution,
) -> Result<PropertyCheck> {
    let (w, p) = liftable(r, w, p, 16, 16);
    let lifted = w.lifted_state(&p)?;
    let k = p.support_size();
    let d = w.dim();
    let weights: Vec<f64> = p.support().map(|(_, v)| v).collect();
    let classical = partial_trace_quantum(&lifted, k, d)?;
    let quantum = partial_trace_classical(&lifted, k, d)?;
    let worst = classical
        .max_abs_diff(&HermitianOperator::from_real_diagonal(&weights))
        .max(quantum.max_abs_diff(&w.average_output(&p)?));
    Ok(check(
        "channels",
        "lifted_marginals",
        worst,
        1e-12,
        "marginals versus diag(P) and W(P)",
    ))
}

pub fn type_class_size_bounds(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut failures = 0;
    for n in 1..=12u64 {
        for _ in 0..5 {
            let k = r.random_range(1..=4usize);
            let mut counts = vec![0u64; k];
            for _ in 0..n {
                counts[r.random_range(0..k)] += 1;
            }
            let t = TypeClass::from_counts(
                counts.iter().enumerate().map(|(i, c)| (i.to_string(), *c)),
            )?;
            if !t.size_bounds_hold() {
                failures += 1;
            }
        }
    }
    Ok(check(
        "channels",
        "type_class_size_bounds",
        failures as f64,
        0.0,
        "type classes violating the exact bounds",
    ))
}

pub fn type_probability(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = r.random_range(1..=10usize);
        let seq: Vec<String> = (0..n).map(|_| r.random_range(0..3u8).to_string()).collect();
        let t = type_of(&seq)?;
        let p = t.as_distribution();
        let expected = (-(n as f64) * p.entropy()).exp();
        worst = worst.max((p.sequence_probability(&seq) / expected - 1.0).abs());
        if n <= 6 {
            let mixed = type_mixing_check(&p, n as u32)?;
            worst = worst.max(mixed.max_abs_diff(&p));
        }
    }
    Ok(check(
        "channels",
        "type_probability",
        worst,
        1e-12,
        "relative deviation of P^n(x) from exp(-nH(P))",
    ))
}

const CENTER_PARAMS: [(f64, f64); 3] = [(2.0, 2.0), (0.7, 1.0), (3.0, 1.5)];

pub fn fixed_point_certificate(
    r: &mut SeededRng,
    w: &GcqChannel,
    p: &InputDistribution,
) -> Result<PropertyCheck> {
    let (w, p) = liftable(r, w, p, 6, 16);
    let opts = SolverOptions::default();
    let dirs = probe_directions(w.dim(), 5, r.random());
    let mut worst: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for (a, z) in CENTER_PARAMS {
        let params = RenyiParams::finite(a, z)?;
        let c = solve_center_d(&w, &p, params, opts)?;
        if c.converged {
            residual = residual.max(c.residual);
            worst = worst.max(first_order_violation(
                &w, &p, params, &c.center, &dirs, 1e-5,
            )?);
        }
    }
    let scaled = worst.max(residual / opts.tol * 1e-4);
    Ok(check(
        "centers",
        "fixed_point_certificate",
        scaled,
        1e-4,
        format!("largest directional derivative {worst:.3e}, residual {residual:.3e}"),
    ))
}

pub fn entropy_bound(
    r: &mut SeededRng,
    w: &GcqChannel,
    p: &InputDistribution,
) -> Result<PropertyCheck> {
    let (w, p) = liftable(r, w, p, 6, 16);
    let mut worst = f64::NEG_INFINITY;
    for (a, z) in [(2.0, 2.0), (0.7, 1.0), (1.5, 1.5), (2.0, 1.0)] {
        let c = solve_center_d(&w, &p, RenyiParams::finite(a, z)?, SolverOptions::default())?;
        worst = worst.max(c.value - p.entropy());
    }
    Ok(check(
        "centers",
        "entropy_bound",
        worst,
        1e-8,
        "largest chi - H(P)",
    ))
}

fn small_channel(
    r: &mut SeededRng,
    w: &GcqChannel,
    p: &InputDistribution,
) -> (GcqChannel, InputDistribution) {
    if w.dim() <= 2 && p.support_size() <= 3 {
        let support: Vec<(String, f64)> = p.support().map(|(s, v)| (s.to_string(), v)).collect();
        let outputs: Vec<(String, HermitianOperator)> = support
            .iter()
            .map(|(s, _)| (s.clone(), w.output(s).expect("symbol in channel").clone()))
            .collect();
        if let (Ok(sw), Ok(sp)) = (GcqChannel::new(outputs), InputDistribution::new(support)) {
            return (sw, sp);
        }
    }
    let rw = random_channel(r, 2, 2);
    let rp = random_distribution(r, &rw);
    (rw, rp)
}

pub fn additivity(
    r: &mut SeededRng,
    w: &GcqChannel,
    p: &InputDistribution,
) -> Result<PropertyCheck> {
    let (w, p) = small_channel(r, w, p);
    let ww = w.product(&w)?;
    let pp = p.product(&p);
    let mut worst: f64 = 0.0;
    for alpha in [1.2, 2.0] {
        let params = RenyiParams::sandwiched(alpha)?;
        let single = solve_center_d(&w, &p, params, SolverOptions::default())?.value;
        let double = solve_center_d(&ww, &pp, params, SolverOptions::default())?.value;
        worst = worst.max((double - 2.0 * single).abs());
    }
    Ok(check(
        "centers",
        "additivity",
        worst,
        1e-6,
        "|chi(W x W, P x P) - 2 chi(W, P)| for sandwiched alpha 1.2, 2",
    ))
}

pub fn subadditivity(
    r: &mut SeededRng,
    w: &GcqChannel,
    p: &InputDistribution,
) -> Result<PropertyCheck> {
    let (w, p) = small_channel(r, w, p);
    let ww = w.product(&w)?;
    let pp = p.product(&p);
    let mut worst = f64::NEG_INFINITY;
    for (a, z) in [(0.5, 0.3), (1.5, 0.8)] {
        let params = RenyiParams::finite(a, z)?;
        let single = solve_center_d(&w, &p, params, SolverOptions::default())?.value;
        let double = solve_center_d(&ww, &pp, params, SolverOptions::default())?.value;
        worst = worst.max(double - 2.0 * single);
    }
    Ok(check(
        "centers",
        "subadditivity",
        worst,
        1e-8,
        "chi(W x W, P x P) - 2 chi(W, P) outside the additive region",
    ))
}

pub fn support_law(
    r: &mut SeededRng,
    w: &GcqChannel,
    p: &InputDistribution,
) -> Result<PropertyCheck> {
    let (w, p) = liftable(r, w, p, 6, 16);
    let proj = w.average_output(&p)?.support_projection();
    let mut worst: f64 = 0.0;
    for (a, z) in CENTER_PARAMS {
        let params = RenyiParams::finite(a, z)?;
        if !classify_region(params)?.in_gamma_d {
            continue;
        }
        let c = solve_center_d(&w, &p, params, SolverOptions::default())?;
        if c.converged {
            worst = worst.max(c.center.support_projection().max_abs_diff(&proj));
        }
    }
    Ok(check(
        "centers",
        "support_law",
        worst,
        1e-8,
        "center support projection versus that of W(P)",
    ))
}

pub fn oracle_equivalence(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let w = random_channel(r, 2, 3);
        let p = random_distribution(r, &w);
        for (a, z) in [(2.0, 2.0), (3.0, 1.5)] {
            let params = RenyiParams::finite(a, z)?;
            let c = solve_center_d(&w, &p, params, SolverOptions::default())?;
            let o = oracle_grid_center(&w, &p, params, 0.1)?;
            worst = worst.max((c.value - o.value).abs());
        }
    }
    Ok(check(
        "centers",
        "oracle_equivalence",
        worst,
        1e-3,
        "|solver - grid oracle| on random binary-output channels",
    ))
}

pub fn mutual_information_ordering(
    r: &mut SeededRng,
    w: &GcqChannel,
    p: &InputDistribution,
) -> Result<PropertyCheck> {
    let (w, p) = liftable(r, w, p, 6, 16);
    let mut worst = f64::NEG_INFINITY;
    for (a, z) in [(0.5, 1.0), (0.7, 0.8), (2.0, 2.0), (1.5, 1.0)] {
        let params = RenyiParams::finite(a, z)?;
        let chi = solve_center_d(&w, &p, params, SolverOptions::default())?.value;
        let i = solve_center_qbar(&w, &p, params, SolverOptions::default())?.mutual_information;
        let excess = if a < 1.0 { i - chi } else { chi - i };
        worst = worst.max(excess);
    }
    Ok(check(
        "centers",
        "mutual_information_ordering",
        worst,
        1e-9,
        "violation of I <= chi (alpha < 1) or I >= chi (alpha > 1)",
    ))
}

pub fn mutual_information_direct_check(
    r: &mut SeededRng,
    w: &GcqChannel,
    p: &InputDistribution,
) -> Result<PropertyCheck> {
    let (w, p) = liftable(r, w, p, 3, 4);
    let mut worst: f64 = 0.0;
    for (a, z) in [(2.0, 2.0), (0.6, 1.0)] {
        let params = RenyiParams::finite(a, z)?;
        let i = solve_center_qbar(&w, &p, params, SolverOptions::default())?.mutual_information;
        worst = worst.max((i - mutual_information_direct(&w, &p, params)?).abs());
    }
    Ok(check(
        "centers",
        "mutual_information_direct",
        worst,
        1e-5,
        "|I from the Q-bar radius - direct minimization|",
    ))
}

pub fn sc_threshold(
    r: &mut SeededRng,
    w: &GcqChannel,
    p: &InputDistribution,
) -> Result<PropertyCheck> {
    let (w, p) = liftable(r, w, p, 4, 16);
    let holevo = holevo_quantity(&w, &p)?.0;
    let below = if holevo > 0.0 {
        sc_exponent(&w, &p, holevo)?.value
    } else {
        0.0
    };
    let chi2 = RadiusCache::new(&w, &p).chi_star(2.0)?.unwrap_or(f64::NAN);
    let above = sc_exponent(&w, &p, chi2 + 0.1)?.value;
    let worst = below.abs().max(if above > 0.0 { 0.0 } else { 1.0 });
    Ok(check(
        "exponents",
        "sc_threshold",
        worst,
        1e-10,
        format!("sc at the Holevo rate {below:.3e}; sc above chi*_2 {above:.3e} must be positive"),
    ))
}

fn curve_rates(w: &GcqChannel, p: &InputDistribution) -> Result<Vec<f64>> {
    let hi = RadiusCache::new(w, p).chi_star_infinity()?;
    rate_grid(0.02, hi + 0.5, 50)
}

pub fn sc_convex_non_decreasing(
    r: &mut SeededRng,
    w: &GcqChannel,
    p: &InputDistribution,
) -> Result<PropertyCheck> {
    let (w, p) = liftable(r, w, p, 3, 8);
    let curve = exponent_curve(&w, &p, ExponentKind::StrongConverse, &curve_rates(&w, &p)?)?;
    Ok(check(
        "exponents",
        "sc_convex_non_decreasing",
        curve.shape_violation(),
        1e-8,
        "negativity, decrease or midpoint concavity",
    ))
}

pub fn cutoff_tangency(
    r: &mut SeededRng,
    w: &GcqChannel,
    p: &InputDistribution,
) -> Result<PropertyCheck> {
    let (w, p) = liftable(r, w, p, 3, 8);
    let cache = RadiusCache::new(&w, &p);
    let f =
        |u: f64| -> Result<f64> { Ok(u * cache.chi_star(1.0 / (1.0 - u))?.unwrap_or(f64::NAN)) };
    let slope_hi = (f(0.95)? - f(0.85)?) / 0.1;
    let rates = rate_grid(0.01, slope_hi.max(0.1) + 0.1, 50)?;
    let step = rates[1] - rates[0];
    let sc: Vec<f64> = rates
        .iter()
        .map(|&x| crate::exponent::sc_exponent_cached(&cache, x).map(|s| s.value))
        .collect::<Result<_>>()?;
    let mut below: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for k in 1..=9 {
        let kappa = k as f64 / 10.0;
        let c = cutoff_rate(&w, &p, kappa)?;
        let diffs: Vec<f64> = rates
            .iter()
            .zip(&sc)
            .map(|(x, s)| s - kappa * (x - c))
            .collect();
        let min = diffs.iter().copied().fold(f64::INFINITY, f64::min);
        below = below.max(-min);
        gap = gap.max(min);
    }
    let worst = below.max(gap - step);
    Ok(check(
        "exponents",
        "cutoff_tangency",
        worst.max(0.0),
        1e-6,
        format!("sc - kappa (R - C_kappa) dips to {:.3e}; largest minimum {gap:.3e} against grid step {step:.3e}", -below),
    ))
}

/// Classical `min_q Σ_x P(x) D_α(w_x‖q)` by Nelder–Mead in softmax coordinates.
pub fn classical_chi(rows: &[Vec<f64>], weights: &[f64], alpha: f64) -> f64 {
    let d = rows[0].len();
    let objective = |x: &[f64]| {
        let mut q: Vec<f64> = std::iter::once(0.0)
            .chain(x.iter().copied())
            .map(f64::exp)
            .collect();
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= s);
        rows.iter()
            .zip(weights)
            .map(|(row, wt)| {
                let m: f64 = row
                    .iter()
                    .zip(&q)
                    .map(|(a, b)| a.powf(alpha) * b.powf(1.0 - alpha))
                    .sum();
                wt * m.ln() / (alpha - 1.0)
            })
            .sum()
    };
    let opts = NelderMeadOptions {
        step: 0.5,
        restarts: 4,
        ..Default::default()
    };
    nelder_mead(objective, &vec![0.0; d - 1], opts).value
}

/// Classical strong converse exponent by golden section in `u = (α−1)/α`.
pub fn classical_sc(rows: &[Vec<f64>], weights: &[f64], rate: f64) -> f64 {
    let g = |u: f64| u * rate - u * classical_chi(rows, weights, 1.0 / (1.0 - u));
    let (_, v) = golden_section_max(g, 1e-9, 1.0 - 1.0 / crate::exponent::ALPHA_MAX, 60);
    v.max(0.0)
}

pub fn classical_consistency(r: &mut SeededRng) -> Result<PropertyCheck> {
    let w = random_commuting_channel(r, 3, 3);
    let p = random_distribution(r, &w);
    let rows: Vec<Vec<f64>> = w
        .outputs()
        .map(|(_, o)| (0..3).map(|i| o.matrix()[(i, i)].re).collect())
        .collect();
    let weights: Vec<f64> = w.symbols().map(|s| p.weight(s)).collect();
    let cache = RadiusCache::new(&w, &p);
    let f =
        |u: f64| -> Result<f64> { Ok(u * cache.chi_star(1.0 / (1.0 - u))?.unwrap_or(f64::NAN)) };
    let hi = (f(0.95)? - f(0.85)?) / 0.1;
    let mut worst: f64 = 0.0;
    for rate in rate_grid(0.02, hi, 8)? {
        let quantum = crate::exponent::sc_exponent_cached(&cache, rate)?.value;
        worst = worst.max((quantum - classical_sc(&rows, &weights, rate)).abs());
    }
    Ok(check(
        "exponents",
        "classical_consistency",
        worst,
        1e-6,
        "|sc - scalar formula| on a commuting channel",
    ))
}

pub fn clipped_trace_monotone(r: &mut SeededRng) -> Result<PropertyCheck> {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let d = r.random_range(2..=4);
        let rho = random_psd(r, d);
        let sigma = random_psd(r, d);
        let mut prev = clipped_trace(&rho, &sigma, 0.0)?;
        for i in 1..=40 {
            let t = i as f64 * 0.1;
            let v = clipped_trace(&rho, &sigma, t)?;
            let slope = (prev - v) / 0.1;
            worst = worst.max(v - prev).max(slope - sigma.trace());
            prev = v;
        }
    }
    Ok(check(
        "exponents",
        "clipped_trace_monotone",
        worst,
        1e-10,
        "increase in t or slope beyond Tr sigma",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_random_preset() {
        let (w, p) = crate::sampling::preset("random").unwrap();
        let report = run_all(&w, &p, 42).unwrap();
        for c in &report.checks {
            assert!(
                c.passed,
                "{}.{}: {} > {} ({})",
                c.module, c.name, c.worst, c.tolerance, c.detail
            );
        }
        assert_eq!(report.checks.len(), 26);
    }

    #[test]
    fn classical_chi_noiseless() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!((classical_chi(&rows, &[0.5, 0.5], 2.0) - 2f64.ln()).abs() < 1e-9);
    }
}
