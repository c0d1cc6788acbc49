//! Weighted divergence centers and radii of cq channels.
//!
//! For `(α, z)` where the center is known to have support `W(P)^0`, all
//! iterations run in an orthonormal frame of that support, where every
//! candidate center is invertible.

use rand::SeedableRng;
use serde::Serialize;

use crate::channel::{GcqChannel, InputDistribution};
use crate::divergence::{
    apply_top, classify_region, d_alpha_z, d_max, sandwich_rank, sandwich_trace_power,
    trace_power_top, umegaki, Extended, RenyiParams, ZParam,
};
use crate::error::{Error, Result};
use crate::operator::{CMatrix, DensityOperator, HermitianOperator, C64, SUPPORT_CUTOFF};
use crate::optimize::{nelder_mead, params_from_state, state_from_params, NelderMeadOptions};
use crate::sampling::{random_full_rank_state, rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Trace-norm bound on `‖Φ(σ) − σ‖₁` at exit.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FixedPoint,
    ClosedFormZ1,
    DirectMinimization,
    OracleGrid,
}

#[derive(Debug, Clone)]
pub struct CenterResult {
    /// A state, except for the Tsallis center which is PSD with free trace.
    pub center: HermitianOperator,
    pub value: f64,
    pub iterations: usize,
    /// `‖Φ(σ) − σ‖₁` at exit for fixed-point methods; see the individual solvers otherwise.
    pub residual: f64,
    pub converged: bool,
    pub method: Method,
    /// Set when `(α, z)` lies outside the region where centers are characterized.
    pub heuristic: bool,
}

/// A `Q̄_{α,z}` center with its radius and the derived mutual information.
#[derive(Debug, Clone)]
pub struct QbarCenter {
    /// `value` holds `χ_{Q̄} = s(α) · opt_σ Σ_x P(x) Q_{α,z}(W(x)‖σ)`.
    pub result: CenterResult,
    /// `I_{α,z} = log(s(α) χ_{Q̄})/(α − 1)`.
    pub mutual_information: f64,
}

/// `Σ_x P(x) D_{α,z}(W(x)‖σ)`.
pub fn weighted_objective(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    sigma: &HermitianOperator,
) -> Result<Extended> {
    let mut total = 0.0;
    for (out, weight) in w.supported_outputs(p)? {
        match d_alpha_z(out, sigma, params)? {
            Extended::Finite(v) => total += weight * v,
            Extended::PosInfinity => return Ok(Extended::PosInfinity),
        }
    }
    Ok(Extended::Finite(total))
}

/// The support of `W(P)` together with the compressed outputs.
struct Frame {
    basis: CMatrix,
    outputs: Vec<(f64, HermitianOperator)>,
}

impl Frame {
    fn new(w: &GcqChannel, p: &InputDistribution) -> Result<Self> {
        let avg = w.average_output(p)?;
        let basis = avg.support_basis();
        if basis.ncols() == 0 {
            return Err(Error::SingularInput("average output is zero".into()));
        }
        let outputs = w
            .supported_outputs(p)?
            .into_iter()
            .map(|(o, wt)| (wt, o.compress(&basis)))
            .collect();
        Ok(Self { basis, outputs })
    }

    fn rank(&self) -> usize {
        self.basis.ncols()
    }

    fn initial(&self) -> HermitianOperator {
        let avg = HermitianOperator::weighted_sum(self.outputs.iter().map(|(w, o)| (*w, o)))
            .expect("non-empty");
        normalize(&avg)
    }

    fn expand(&self, sigma: &HermitianOperator) -> HermitianOperator {
        sigma.expand(&self.basis)
    }

    /// Compresses a full-space state that must have support exactly `W(P)^0`.
    fn compress_state(&self, sigma: &HermitianOperator) -> Result<HermitianOperator> {
        let inner = sigma.compress(&self.basis);
        let leak = self.expand(&inner).max_abs_diff(sigma);
        let scale = inner.max_eigenvalue().max(0.0);
        if leak > 1e-8 * scale.max(1.0) || inner.min_eigenvalue() <= SUPPORT_CUTOFF * scale {
            return Err(Error::Domain(
                "state must have the same support as the average output".into(),
            ));
        }
        Ok(inner)
    }

    fn trace_of_average(&self) -> f64 {
        self.outputs.iter().map(|(w, o)| w * o.trace()).sum()
    }
}

fn normalize(a: &HermitianOperator) -> HermitianOperator {
    a.scale(1.0 / a.trace())
}

/// Positive powers of PSD eigenvalues, arbitrary powers of positive ones.
fn pow_positive(a: &HermitianOperator, x: f64) -> HermitianOperator {
    a.apply(|v| if v > 0.0 { v.powf(x) } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Weighting {
    /// `P(x)/Q_x`: the D-center map.
    PerSymbol,
    /// `P(x)/Σ_y P(y) Q_y`: the `Q̄`-center map.
    Global,
    /// `P(x)`: the unnormalized Tsallis-center map.
    Plain,
}

/// Precomputed powers of the compressed outputs for finite `z`.
struct Kernel<'a> {
    frame: &'a Frame,
    alpha: f64,
    z: f64,
    /// `W(x)^{α/z}`.
    a: Vec<HermitianOperator>,
    /// `W(x)^{α/2z}`.
    c: Vec<HermitianOperator>,
    /// `rank W(x)`, which is also the rank of every sandwich with an invertible state.
    ranks: Vec<usize>,
}

impl<'a> Kernel<'a> {
    fn new(frame: &'a Frame, params: RenyiParams) -> Result<Self> {
        let z = match params.z() {
            ZParam::Finite(z) => z,
            ZParam::Infinite => return Err(Error::Domain("fixed-point maps need finite z".into())),
        };
        if params.is_one() {
            return Err(Error::Domain("alpha = 1 has no fixed-point map".into()));
        }
        let alpha = params.alpha();
        let mut a = Vec::new();
        let mut c = Vec::new();
        for (_, o) in &frame.outputs {
            a.push(o.support_power(alpha / z)?);
            c.push(o.support_power(alpha / (2.0 * z))?);
        }
        let ranks = frame.outputs.iter().map(|(_, o)| o.rank()).collect();
        Ok(Self {
            frame,
            alpha,
            z,
            a,
            c,
            ranks,
        })
    }

    fn beta(&self) -> f64 {
        (1.0 - self.alpha) / self.z
    }

    fn is_invertible(&self, sigma: &HermitianOperator) -> bool {
        sigma.min_eigenvalue() > SUPPORT_CUTOFF * sigma.max_eigenvalue()
    }

    fn require_invertible(&self, sigma: &HermitianOperator) -> Result<()> {
        if self.is_invertible(sigma) {
            Ok(())
        } else {
            Err(Error::SingularInput(
                "iterate left the interior of the support".into(),
            ))
        }
    }

    /// `Q_{α,z}(W(x)‖σ)` for each supported `x`; `None` if `σ` is singular and `α > 1`.
    fn q_values(&self, sigma: &HermitianOperator) -> Option<Vec<f64>> {
        if self.alpha > 1.0 && !self.is_invertible(sigma) {
            return None;
        }
        let s = pow_positive(sigma, self.beta());
        let invertible = self.is_invertible(sigma);
        let values =
            self.c
                .iter()
                .zip(&self.ranks)
                .zip(&self.frame.outputs)
                .map(|((c, &r), (_, o))| {
                    let rank = if invertible {
                        r
                    } else {
                        sandwich_rank(o, sigma)
                    };
                    sandwich_trace_power(c, &s, self.z, rank)
                });
        Some(values.collect())
    }

    /// `Σ_x P(x) D_{α,z}(W(x)‖σ)` evaluated in the frame.
    fn objective(&self, sigma: &HermitianOperator) -> f64 {
        let Some(q) = self.q_values(sigma) else {
            return f64::INFINITY;
        };
        let mut total = 0.0;
        for ((wt, o), qx) in self.frame.outputs.iter().zip(q) {
            if qx <= 0.0 {
                return f64::INFINITY;
            }
            total += wt * (qx / o.trace()).ln() / (self.alpha - 1.0);
        }
        total
    }

    /// `Σ_x P(x) Q_{α,z}(W(x)‖σ)`.
    fn weighted_q(&self, sigma: &HermitianOperator) -> f64 {
        match self.q_values(sigma) {
            Some(q) => self
                .frame
                .outputs
                .iter()
                .zip(q)
                .map(|((w, _), qx)| w * qx)
                .sum(),
            None => f64::INFINITY,
        }
    }

    fn weights(&self, q: &[f64], mode: Weighting) -> Result<Vec<f64>> {
        if q.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            return Err(Error::SingularInput(
                "Q vanishes for a supported input".into(),
            ));
        }
        let p = self.frame.outputs.iter().map(|(w, _)| *w);
        Ok(match mode {
            Weighting::PerSymbol => p.zip(q).map(|(w, qx)| w / qx).collect(),
            Weighting::Global => {
                let tau: f64 = self
                    .frame
                    .outputs
                    .iter()
                    .zip(q)
                    .map(|((w, _), qx)| w * qx)
                    .sum();
                p.map(|w| w / tau).collect()
            }
            Weighting::Plain => p.collect(),
        })
    }

    /// `Σ_x w_x (σ^{β/2} W(x)^{α/z} σ^{β/2})^z` with weights chosen by `mode`.
    fn phi(&self, sigma: &HermitianOperator, mode: Weighting) -> Result<HermitianOperator> {
        self.require_invertible(sigma)?;
        let half = pow_positive(sigma, self.beta() / 2.0);
        let mut terms = Vec::with_capacity(self.a.len());
        let mut q = Vec::with_capacity(self.a.len());
        for (a, &rank) in self.a.iter().zip(&self.ranks) {
            let mz = apply_top(&half.sandwich(a), rank, |v| v.powf(self.z));
            q.push(mz.trace());
            terms.push(mz);
        }
        let weights = self.weights(&q, mode)?;
        Ok(
            HermitianOperator::weighted_sum(weights.into_iter().zip(terms.iter()))
                .expect("non-empty"),
        )
    }

    /// One step of the rooted form of the fixed-point equation,
    /// `σ ∝ Φ̂(σ)^{z/(z+α−1)}` with
    /// `Φ̂(σ) = Σ_x w_x W^{α/2z}(W^{α/2z} σ^β W^{α/2z})^{z−1} W^{α/2z}`.
    fn rooted_step(&self, sigma: &HermitianOperator, mode: Weighting) -> Result<HermitianOperator> {
        self.require_invertible(sigma)?;
        let s = pow_positive(sigma, self.beta());
        let mut terms = Vec::with_capacity(self.c.len());
        let mut q = Vec::with_capacity(self.c.len());
        for (c, &rank) in self.c.iter().zip(&self.ranks) {
            let n = c.sandwich(&s);
            q.push(trace_power_top(&n, rank, self.z));
            let npow = apply_top(&n, rank, |v| v.powf(self.z - 1.0));
            terms.push(c.sandwich(&npow));
        }
        let weights = self.weights(&q, mode)?;
        let hat = HermitianOperator::weighted_sum(weights.into_iter().zip(terms.iter()))
            .expect("non-empty");
        let root = pow_positive(&hat, self.z / (self.z + self.alpha - 1.0));
        Ok(normalize(&root))
    }

    fn residual(&self, sigma: &HermitianOperator, mode: Weighting) -> Result<f64> {
        Ok(self.phi(sigma, mode)?.sub(sigma).trace_norm())
    }
}

struct Run {
    sigma: HermitianOperator,
    residual: f64,
    iterations: usize,
}

/// Damped iteration `σ ← (1−γ)σ + γ·step(σ)`.
///
/// `step` returns the candidate and the residual at `σ`. γ starts at 1 and is
/// halved (restarting from the best iterate) whenever the best residual has
/// not improved for ten iterations; the run ends once γ would drop below 1/16.
fn damped_iteration(
    sigma0: HermitianOperator,
    tol: f64,
    max_iter: usize,
    renormalize: bool,
    mut step: impl FnMut(&HermitianOperator) -> Result<(HermitianOperator, f64)>,
) -> Result<Run> {
    let mut sigma = sigma0;
    let mut gamma = 1.0;
    let mut best = Run {
        sigma: sigma.clone(),
        residual: f64::INFINITY,
        iterations: 0,
    };
    let mut stale = 0;
    let mut it = 0;
    while it < max_iter {
        let (candidate, res) = match step(&sigma) {
            Ok(v) => v,
            Err(_) if best.residual.is_finite() => (best.sigma.clone(), f64::INFINITY),
            Err(e) => return Err(e),
        };
        it += 1;
        if res < best.residual {
            best.sigma = sigma.clone();
            best.residual = res;
            stale = 0;
        } else {
            stale += 1;
        }
        if res <= tol {
            break;
        }
        if stale >= 10 || !res.is_finite() {
            if gamma <= 1.0 / 16.0 {
                break;
            }
            gamma /= 2.0;
            sigma = best.sigma.clone();
            stale = 0;
            continue;
        }
        let next = sigma.scale(1.0 - gamma).add(&candidate.scale(gamma));
        sigma = if renormalize { normalize(&next) } else { next };
    }
    best.iterations = it;
    Ok(best)
}

/// Best iterate seen across the fixed-point phases, ranked by the residual of the map itself.
struct Tracker {
    best: Option<(HermitianOperator, f64)>,
    iterations: usize,
}

impl Tracker {
    fn record(&mut self, kernel: &Kernel<'_>, mode: Weighting, run: &Run, tol: f64) -> bool {
        self.iterations += run.iterations;
        let res = kernel.residual(&run.sigma, mode).unwrap_or(f64::INFINITY);
        if self.best.as_ref().is_none_or(|(_, r)| res < *r) {
            self.best = Some((run.sigma.clone(), res));
        }
        res <= tol
    }
}

/// The damped map and the rooted form of the fixed-point equation, each
/// continuing from where the other stopped. The rooted form goes first for
/// `α > 1`, where its exponent `z/(z+α−1) < 1` contracts.
fn fixed_point_phases(
    kernel: &Kernel<'_>,
    mode: Weighting,
    start: HermitianOperator,
    opts: SolverOptions,
    tracker: &mut Tracker,
) -> Result<bool> {
    let rooted_first = kernel.alpha > 1.0;
    let mut start = start;
    for rooted in [rooted_first, !rooted_first] {
        let tol = if rooted { opts.tol / 10.0 } else { opts.tol };
        let run = damped_iteration(start.clone(), tol, opts.max_iter, true, |s| {
            let next = if rooted {
                kernel.rooted_step(s, mode)?
            } else {
                kernel.phi(s, mode)?
            };
            let res = next.sub(s).trace_norm();
            Ok((next, res))
        })?;
        if tracker.record(kernel, mode, &run, opts.tol) {
            return Ok(true);
        }
        if run.residual.is_finite() {
            start = run.sigma;
        }
    }
    Ok(false)
}

/// Fixed-point iterations for the D- or `Q̄`-center, followed by a direct
/// minimization fallback. Returns the frame state, iterations, residual,
/// convergence and method.
fn solve_in_frame(
    kernel: &Kernel<'_>,
    mode: Weighting,
    objective: impl Fn(&HermitianOperator) -> f64,
    opts: SolverOptions,
) -> Result<(HermitianOperator, usize, f64, bool, Method)> {
    let mut tracker = Tracker {
        best: None,
        iterations: 0,
    };
    if fixed_point_phases(kernel, mode, kernel.frame.initial(), opts, &mut tracker)? {
        let (s, r) = tracker.best.expect("a run was recorded");
        return Ok((s, tracker.iterations, r, true, Method::FixedPoint));
    }
    let r = kernel.frame.rank();
    let seed = match &tracker.best {
        Some((s, res)) if res.is_finite() => s.clone(),
        _ => kernel.frame.initial(),
    };
    let min = nelder_mead(
        |x| objective(&state_from_params(x, r)),
        &params_from_state(&seed),
        NelderMeadOptions::default(),
    );
    tracker.iterations += min.evaluations;
    let converged = fixed_point_phases(
        kernel,
        mode,
        state_from_params(&min.x, r),
        opts,
        &mut tracker,
    )?;
    let (s, res) = tracker.best.expect("a run was recorded");
    let method = if converged {
        Method::FixedPoint
    } else {
        Method::DirectMinimization
    };
    Ok((s, tracker.iterations, res, converged, method))
}

fn heuristic_d(params: RenyiParams) -> Result<bool> {
    let r = classify_region(params)?;
    Ok(!(r.in_gamma_d && r.second_arg_convex_d))
}

fn heuristic_qbar(params: RenyiParams) -> Result<bool> {
    let r = classify_region(params)?;
    Ok(!(r.in_gamma_qbar && r.second_arg_convex_qbar))
}

/// One application of the D-center map
/// `Φ(σ) = Σ_x P(x) (σ^{(1−α)/2z} W(x)^{α/z} σ^{(1−α)/2z})^z / Q_{α,z}(W(x)‖σ)`.
pub fn fixed_point_map_d(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    sigma: &DensityOperator,
) -> Result<DensityOperator> {
    apply_map(w, p, params, sigma, Weighting::PerSymbol)
}

/// One application of the `Q̄`-center map, which normalizes globally by
/// `τ = Σ_x P(x) Q_{α,z}(W(x)‖σ)`.
pub fn fixed_point_map_qbar(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    sigma: &DensityOperator,
) -> Result<DensityOperator> {
    apply_map(w, p, params, sigma, Weighting::Global)
}

fn apply_map(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    sigma: &DensityOperator,
    mode: Weighting,
) -> Result<DensityOperator> {
    let frame = Frame::new(w, p)?;
    let kernel = Kernel::new(&frame, params)?;
    let inner = frame.compress_state(sigma)?;
    let out = kernel.phi(&inner, mode)?;
    DensityOperator::new(frame.expand(&out))
}

/// The `P`-weighted `D_{α,z}` center and radius `χ_{α,z}(W, P)`.
///
/// Runs the fixed-point map from `W(P)/Tr W(P)` with adaptive damping, then
/// the rooted form of the same equation, and finally a Nelder–Mead search over
/// `LL†/Tr LL†` whose result is polished by the fixed-point iterations again.
/// For `z = ∞` only the direct search is available; its `residual` is then the
/// largest finite-difference directional derivative at the optimum.
pub fn solve_center_d(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    opts: SolverOptions,
) -> Result<CenterResult> {
    let heuristic = heuristic_d(params)?;
    let frame = Frame::new(w, p)?;
    if params.z().is_infinite() {
        return direct_center_d(w, p, params, &frame, heuristic);
    }
    let kernel = Kernel::new(&frame, params)?;
    let (sigma, iterations, residual, converged, method) =
        solve_in_frame(&kernel, Weighting::PerSymbol, |s| kernel.objective(s), opts)?;
    let center = frame.expand(&sigma);
    let value = weighted_objective(w, p, params, &center)?.to_f64();
    Ok(CenterResult {
        center,
        value,
        iterations,
        residual,
        converged: converged && value.is_finite(),
        method,
        heuristic,
    })
}

fn direct_center_d(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    frame: &Frame,
    heuristic: bool,
) -> Result<CenterResult> {
    let r = frame.rank();
    let objective = |x: &[f64]| {
        let s = frame.expand(&state_from_params(x, r));
        weighted_objective(w, p, params, &s)
            .map(Extended::to_f64)
            .unwrap_or(f64::INFINITY)
    };
    let min = nelder_mead(
        objective,
        &params_from_state(&frame.initial()),
        NelderMeadOptions::default(),
    );
    let inner = state_from_params(&min.x, r);
    let center = frame.expand(&inner);
    let residual = frame_stationarity(frame, &inner, |s| {
        weighted_objective(w, p, params, &frame.expand(s))
            .map(Extended::to_f64)
            .unwrap_or(f64::INFINITY)
    });
    Ok(CenterResult {
        center,
        value: min.value,
        iterations: min.evaluations,
        residual,
        converged: residual <= 1e-6 && min.value.is_finite(),
        method: Method::DirectMinimization,
        heuristic,
    })
}

/// `inf_σ Σ_x P(x) D_max(W(x)‖σ)` by Nelder–Mead over states supported on
/// `W(P)^0`, started from `seed` (compressed to that support) or `W(P)`.
///
/// The objective is not smooth, so `residual` is left at zero and `converged`
/// only records a finite value.
pub fn d_max_center(
    w: &GcqChannel,
    p: &InputDistribution,
    seed: Option<&HermitianOperator>,
) -> Result<CenterResult> {
    let frame = Frame::new(w, p)?;
    let r = frame.rank();
    let outputs = w.supported_outputs(p)?;
    let objective = |x: &[f64]| {
        let s = frame.expand(&state_from_params(x, r));
        let mut total = 0.0;
        for (o, wt) in &outputs {
            match d_max(o, &s) {
                Ok(Extended::Finite(v)) => total += wt * v,
                _ => return f64::INFINITY,
            }
        }
        total
    };
    let start = match seed {
        Some(s) => normalize(&s.compress(&frame.basis)),
        None => frame.initial(),
    };
    let min = nelder_mead(
        objective,
        &params_from_state(&start),
        NelderMeadOptions {
            restarts: 4,
            ..Default::default()
        },
    );
    Ok(CenterResult {
        center: frame.expand(&state_from_params(&min.x, r)),
        value: min.value,
        iterations: min.evaluations,
        residual: 0.0,
        converged: min.value.is_finite(),
        method: Method::DirectMinimization,
        heuristic: false,
    })
}

/// Largest symmetric finite-difference derivative of `f` at `σ` along an
/// orthonormal basis of traceless Hermitian directions of the frame.
fn frame_stationarity(
    frame: &Frame,
    sigma: &HermitianOperator,
    f: impl Fn(&HermitianOperator) -> f64,
) -> f64 {
    let r = frame.rank();
    let h = 1e-5 * sigma.min_eigenvalue().clamp(1e-3, 1.0);
    let mut worst: f64 = 0.0;
    for dir in traceless_basis(r) {
        let plus = f(&sigma.add(&dir.scale(h)));
        let minus = f(&sigma.sub(&dir.scale(h)));
        worst = worst.max(((plus - minus) / (2.0 * h)).abs());
    }
    worst
}

/// Generalized Gell-Mann matrices, normalized in Hilbert–Schmidt norm.
fn traceless_basis(r: usize) -> Vec<HermitianOperator> {
    let mut out = Vec::new();
    let s = 0.5f64.sqrt();
    for i in 0..r {
        for j in (i + 1)..r {
            let mut m = CMatrix::zeros(r, r);
            m[(i, j)] = C64::new(s, 0.0);
            m[(j, i)] = C64::new(s, 0.0);
            out.push(HermitianOperator::from_matrix_unchecked(m));
            let mut m = CMatrix::zeros(r, r);
            m[(i, j)] = C64::new(0.0, -s);
            m[(j, i)] = C64::new(0.0, s);
            out.push(HermitianOperator::from_matrix_unchecked(m));
        }
    }
    for k in 1..r {
        let mut d = vec![0.0; r];
        let norm = ((k * (k + 1)) as f64).sqrt();
        for v in d.iter_mut().take(k) {
            *v = 1.0 / norm;
        }
        d[k] = -(k as f64) / norm;
        out.push(HermitianOperator::from_real_diagonal(&d));
    }
    out
}

/// The `P`-weighted `Q̄_{α,z}` center, `χ_{Q̄}` and the mutual information `I_{α,z}`.
pub fn solve_center_qbar(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    opts: SolverOptions,
) -> Result<QbarCenter> {
    let heuristic = heuristic_qbar(params)?;
    let frame = Frame::new(w, p)?;
    let kernel = Kernel::new(&frame, params)?;
    let sign = params.sign();
    let (sigma, iterations, residual, converged, method) = solve_in_frame(
        &kernel,
        Weighting::Global,
        |s| sign * kernel.weighted_q(s),
        opts,
    )?;
    let total_q = kernel.weighted_q(&sigma);
    Ok(QbarCenter {
        result: CenterResult {
            center: frame.expand(&sigma),
            value: sign * total_q,
            iterations,
            residual,
            converged: converged && total_q.is_finite(),
            method,
            heuristic,
        },
        mutual_information: total_q.ln() / (params.alpha() - 1.0),
    })
}

/// Closed form of the `Q̄_{α,1}` center: `ω = (Σ_x P(x) W(x)^α)^{1/α}`, center
/// `ω/Tr ω`, `χ_{Q̄} = s(α)(Tr ω)^α` and `I_{α,1} = α log Tr ω/(α − 1)`.
pub fn closed_form_center_z1(
    w: &GcqChannel,
    p: &InputDistribution,
    alpha: f64,
) -> Result<QbarCenter> {
    let params = RenyiParams::petz(alpha)?;
    if params.is_one() {
        return Err(Error::Domain("alpha = 1 has no power-mean center".into()));
    }
    let omega = power_mean(w, p, alpha)?;
    let tr = omega.trace();
    let center = omega.scale(1.0 / tr);
    let frame = Frame::new(w, p)?;
    let kernel = Kernel::new(&frame, params)?;
    let residual = kernel.residual(&center.compress(&frame.basis), Weighting::Global)?;
    Ok(QbarCenter {
        result: CenterResult {
            center,
            value: params.sign() * tr.powf(alpha),
            iterations: 0,
            residual,
            converged: true,
            method: Method::ClosedFormZ1,
            heuristic: false,
        },
        mutual_information: alpha * tr.ln() / (alpha - 1.0),
    })
}

/// `(Σ_x P(x) W(x)^α)^{1/α}`.
pub fn power_mean(w: &GcqChannel, p: &InputDistribution, alpha: f64) -> Result<HermitianOperator> {
    let mut powers = Vec::new();
    for (o, wt) in w.supported_outputs(p)? {
        powers.push((wt, o.support_power(alpha)?));
    }
    let sum = HermitianOperator::weighted_sum(powers.iter().map(|(wt, o)| (*wt, o)))
        .expect("non-empty support");
    sum.support_power(1.0 / alpha)
}

/// The PSD `T_{α,z}` center `σ* = (s(α) χ_{Q̄})^{1/α} σ̄` built from the `Q̄`
/// center `σ̄`, polished by the unnormalized iteration
/// `σ ← Σ_x P(x)(σ^{(1−α)/2z} W(x)^{α/z} σ^{(1−α)/2z})^z`, with the Tsallis radius
/// `α/(1−α) · [Tr W(P) − (s(α) χ_{Q̄})^{1/α}]`.
pub fn solve_center_tsallis(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    opts: SolverOptions,
) -> Result<CenterResult> {
    let qbar = if params.z() == ZParam::Finite(1.0) {
        closed_form_center_z1(w, p, params.alpha())?
    } else {
        solve_center_qbar(w, p, params, opts)?
    };
    let frame = Frame::new(w, p)?;
    let kernel = Kernel::new(&frame, params)?;
    let lambda = (params.sign() * qbar.result.value).powf(1.0 / params.alpha());
    let start = qbar.result.center.compress(&frame.basis).scale(lambda);
    let run = damped_iteration(start, opts.tol, opts.max_iter, false, |s| {
        let next = kernel.phi(s, Weighting::Plain)?;
        let res = next.sub(s).trace_norm();
        Ok((next, res))
    })?;
    let alpha = params.alpha();
    let value = alpha / (1.0 - alpha) * (frame.trace_of_average() - lambda);
    Ok(CenterResult {
        center: frame.expand(&run.sigma),
        value,
        iterations: qbar.result.iterations + run.iterations,
        residual: run.residual,
        converged: run.residual <= opts.tol,
        method: qbar.result.method,
        heuristic: qbar.result.heuristic,
    })
}

/// Brute-force minimization of `σ ↦ Σ_x P(x) D_{α,z}(W(x)‖σ)` through the
/// generic divergence routines, independent of the fixed-point machinery.
///
/// For `d = 2` the Bloch ball is scanned on a cubic grid of spacing
/// `resolution`, after which a compass search halves its step down to 1e-10
/// (`residual` reports the final step). For larger `d` Nelder–Mead runs over
/// `LL†/Tr LL†` from `W(P)`, `I/d` and four seeded random states.
pub fn oracle_grid_center(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    resolution: f64,
) -> Result<CenterResult> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::Domain(format!(
            "resolution must lie in (0, 1], got {resolution}"
        )));
    }
    let heuristic = heuristic_d(params)?;
    let f = |s: &HermitianOperator| {
        weighted_objective(w, p, params, s)
            .map(Extended::to_f64)
            .unwrap_or(f64::INFINITY)
    };
    if w.dim() == 2 {
        let bloch = |v: [f64; 3]| -> HermitianOperator {
            let m = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => C64::new(0.5 * (1.0 + v[2]), 0.0),
                (1, 1) => C64::new(0.5 * (1.0 - v[2]), 0.0),
                (0, 1) => C64::new(0.5 * v[0], -0.5 * v[1]),
                _ => C64::new(0.5 * v[0], 0.5 * v[1]),
            });
            HermitianOperator::from_matrix_unchecked(m)
        };
        let inside = |v: [f64; 3]| v.iter().map(|x| x * x).sum::<f64>() < 1.0 - 1e-12;
        let steps = (1.0 / resolution).floor() as i64;
        let mut best = ([0.0; 3], f64::INFINITY);
        let mut evals = 0;
        for i in -steps..=steps {
            for j in -steps..=steps {
                for k in -steps..=steps {
                    let v = [
                        i as f64 * resolution,
                        j as f64 * resolution,
                        k as f64 * resolution,
                    ];
                    if !inside(v) {
                        continue;
                    }
                    let val = f(&bloch(v));
                    evals += 1;
                    if val < best.1 {
                        best = (v, val);
                    }
                }
            }
        }
        let mut step = resolution;
        while step > 1e-10 {
            let mut improved = false;
            for axis in 0..3 {
                for sgn in [-1.0, 1.0] {
                    let mut v = best.0;
                    v[axis] += sgn * step;
                    if !inside(v) {
                        continue;
                    }
                    let val = f(&bloch(v));
                    evals += 1;
                    if val < best.1 {
                        best = (v, val);
                        improved = true;
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        return Ok(CenterResult {
            center: bloch(best.0),
            value: best.1,
            iterations: evals,
            residual: step,
            converged: best.1.is_finite(),
            method: Method::OracleGrid,
            heuristic,
        });
    }
    let d = w.dim();
    let mut starts = vec![
        normalize(&w.average_output(p)?),
        HermitianOperator::identity(d).scale(1.0 / d as f64),
    ];
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    starts.extend((0..4).map(|_| random_full_rank_state(&mut r, d).into_operator()));
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut evals = 0;
    for s in starts {
        let min = nelder_mead(
            |x| f(&state_from_params(x, d)),
            &params_from_state(&s),
            NelderMeadOptions::default(),
        );
        evals += min.evaluations;
        if best.as_ref().is_none_or(|(_, v)| min.value < *v) {
            best = Some((min.x, min.value));
        }
    }
    let (x, value) = best.expect("at least one start");
    Ok(CenterResult {
        center: state_from_params(&x, d),
        value,
        iterations: evals,
        residual: 0.0,
        converged: value.is_finite(),
        method: Method::OracleGrid,
        heuristic,
    })
}

#[derive(Debug, Clone)]
pub struct RadiusResult {
    pub radius: f64,
    pub center: HermitianOperator,
    pub worst_input: InputDistribution,
    pub iterations: usize,
    /// `max_x D(W(x)‖σ) − χ(W, P)` at exit.
    pub gap: f64,
    pub converged: bool,
}

/// `R = inf_σ max_x D_{α,z}(W(x)‖σ)`, by multiplicative-weights ascent on the
/// input distribution against the weighted center.
pub fn divergence_radius(w: &GcqChannel, params: RenyiParams, tol: f64) -> Result<RadiusResult> {
    let symbols: Vec<String> = w.symbols().map(String::from).collect();
    if symbols.len() > crate::channel::MAX_LIFT_ALPHABET {
        return Err(Error::ResourceLimit(format!(
            "radius computation supports at most {} symbols",
            crate::channel::MAX_LIFT_ALPHABET
        )));
    }
    let mut weights = vec![1.0 / symbols.len() as f64; symbols.len()];
    let mut eta = 1.0;
    let mut prev_chi = f64::NEG_INFINITY;
    let mut last = None;
    for it in 1..=2000 {
        let p = InputDistribution::new(symbols.iter().cloned().zip(weights.iter().copied()))?;
        let c = if params.is_one() {
            let (value, center) = holevo_quantity(w, &p)?;
            CenterResult {
                center: center.into_operator(),
                value,
                iterations: 0,
                residual: 0.0,
                converged: true,
                method: Method::ClosedFormZ1,
                heuristic: false,
            }
        } else {
            solve_center_d(w, &p, params, SolverOptions::default())?
        };
        let mut dists = Vec::with_capacity(symbols.len());
        for s in &symbols {
            dists.push(d_alpha_z(w.output(s)?, &c.center, params)?.to_f64());
        }
        let max = dists.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gap = max - c.value;
        let done = gap <= tol || !max.is_finite();
        if c.value < prev_chi - 1e-12 {
            eta /= 2.0;
        }
        prev_chi = c.value;
        last = Some(RadiusResult {
            radius: max,
            center: c.center,
            worst_input: p,
            iterations: it,
            gap,
            converged: done && max.is_finite(),
        });
        if done {
            break;
        }
        for (wt, dx) in weights.iter_mut().zip(&dists) {
            *wt *= (eta * (dx - max)).exp();
        }
        let total: f64 = weights.iter().sum();
        weights
            .iter_mut()
            .for_each(|v| *v = (*v / total).max(1e-200));
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|v| *v /= total);
    }
    Ok(last.expect("at least one iteration"))
}

/// Temperature of the log-sum-exp surrogate for the `β = ∞` radius.
pub const SMOOTH_MAX_TEMPERATURE: f64 = 1e3;

/// `inf_σ ‖x ↦ D_{α,z}(W(x)‖σ)‖_{P,β}`; `β = f64::INFINITY` gives the maximum over `supp P`.
///
/// The search starts from the `β = 1` center. For `β = ∞` the minimizer works
/// on a log-sum-exp surrogate and the exact maximum is reported at its optimum.
pub fn weighted_radius_beta(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    beta: f64,
    tol: f64,
) -> Result<f64> {
    if !(beta >= 1.0) {
        return Err(Error::Domain(format!(
            "beta must be at least 1, got {beta}"
        )));
    }
    let base = solve_center_d(w, p, params, SolverOptions::default())?;
    if beta == 1.0 {
        return Ok(base.value);
    }
    let frame = Frame::new(w, p)?;
    let outputs: Vec<(&HermitianOperator, f64)> = w.supported_outputs(p)?;
    let distances = |s: &HermitianOperator| -> Option<Vec<f64>> {
        outputs
            .iter()
            .map(|(o, _)| d_alpha_z(o, s, params).ok().and_then(Extended::finite))
            .collect()
    };
    let norm = |d: &[f64], smooth: bool| -> f64 {
        if beta.is_infinite() {
            if smooth {
                let m = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lse: f64 = d
                    .iter()
                    .map(|v| (SMOOTH_MAX_TEMPERATURE * (v - m)).exp())
                    .sum::<f64>()
                    .ln();
                m + lse / SMOOTH_MAX_TEMPERATURE
            } else {
                d.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        } else {
            let s: f64 = outputs
                .iter()
                .zip(d)
                .map(|((_, wt), v)| wt * v.max(0.0).powf(beta))
                .sum();
            s.powf(1.0 / beta)
        }
    };
    let r = frame.rank();
    let objective = |x: &[f64]| match distances(&frame.expand(&state_from_params(x, r))) {
        Some(d) => norm(&d, true),
        None => f64::INFINITY,
    };
    let opts = NelderMeadOptions {
        ftol: tol * 1e-4,
        ..Default::default()
    };
    let seed = params_from_state(&base.center.compress(&frame.basis));
    let min = nelder_mead(objective, &seed, opts);
    let best = frame.expand(&state_from_params(&min.x, r));
    let at_best = distances(&best)
        .map(|d| norm(&d, false))
        .unwrap_or(f64::INFINITY);
    let at_seed = distances(&base.center)
        .map(|d| norm(&d, false))
        .unwrap_or(f64::INFINITY);
    Ok(at_best.min(at_seed))
}

/// `Σ_x P(x) D(W(x)‖W(P))`, whose center is `W(P)` itself.
pub fn holevo_quantity(w: &GcqChannel, p: &InputDistribution) -> Result<(f64, DensityOperator)> {
    let avg = w.average_output(p)?;
    let mut total = 0.0;
    for (o, wt) in w.supported_outputs(p)? {
        total += wt * umegaki(o, &avg)?.to_f64();
    }
    Ok((total, DensityOperator::new(avg)?))
}

/// `inf_σ D_{α,z}(Ŵ(P) ‖ Σ_x P(x)|x⟩⟨x| ⊗ σ)` by direct search on the lifted,
/// block-diagonal operators.
pub fn mutual_information_direct(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
) -> Result<f64> {
    let lifted = w.lifted_state(p)?;
    let frame = Frame::new(w, p)?;
    let weights: Vec<f64> = p.support().map(|(_, wt)| wt).collect();
    let d = w.dim();
    let r = frame.rank();
    let objective = |x: &[f64]| {
        let sigma = frame.expand(&state_from_params(x, r));
        let mut m = CMatrix::zeros(weights.len() * d, weights.len() * d);
        for (b, wt) in weights.iter().enumerate() {
            m.view_mut((b * d, b * d), (d, d))
                .copy_from(&sigma.matrix().scale(*wt));
        }
        let joint = HermitianOperator::from_matrix_unchecked(m);
        d_alpha_z(&lifted, &joint, params)
            .map(Extended::to_f64)
            .unwrap_or(f64::INFINITY)
    };
    let min = nelder_mead(
        objective,
        &params_from_state(&frame.initial()),
        NelderMeadOptions::default(),
    );
    Ok(min.value)
}

/// Largest `|∂_Y F(σ)|` over the given directions, by symmetric differences of
/// step `h`, where `F(σ) = Σ_x P(x) D_{α,z}(W(x)‖σ)`.
///
/// Directions are compressed to the support of `W(P)` and made traceless
/// there, so `σ ± hY` remain states with the center's support.
pub fn first_order_violation(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    center: &HermitianOperator,
    directions: &[HermitianOperator],
    h: f64,
) -> Result<f64> {
    let frame = Frame::new(w, p)?;
    let r = frame.rank() as f64;
    let mut worst: f64 = 0.0;
    for y in directions {
        let inner = y.compress(&frame.basis);
        let inner = inner.sub(&HermitianOperator::identity(inner.dim()).scale(inner.trace() / r));
        let dir = frame.expand(&inner);
        let plus = weighted_objective(w, p, params, &center.add(&dir.scale(h)))?.to_f64();
        let minus = weighted_objective(w, p, params, &center.sub(&dir.scale(h)))?.to_f64();
        worst = worst.max(((plus - minus) / (2.0 * h)).abs());
    }
    Ok(worst)
}

/// Random unit traceless Hermitian directions from a fixed seed.
pub fn probe_directions(d: usize, count: usize, seed: u64) -> Vec<HermitianOperator> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| crate::sampling::random_traceless_hermitian(&mut r, d))
        .collect()
}
