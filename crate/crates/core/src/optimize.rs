//! Derivative-free minimization and the `LL†/Tr LL†` parametrization of states.

use nalgebra::Cholesky;

use crate::operator::{CMatrix, HermitianOperator, C64};

/// Stopping rule for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Initial simplex edge length.
    pub step: f64,
    /// Spread of function values across the simplex.
    pub ftol: f64,
    /// Largest vertex distance from the best vertex.
    pub xtol: f64,
    pub max_evals: usize,
    /// Fresh simplices built around the incumbent after convergence.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            step: 0.1,
            ftol: 1e-14,
            xtol: 1e-10,
            max_evals: 20_000,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Nelder–Mead with dimension-adaptive coefficients. Non-finite values are
/// treated as `+∞`, so infeasible points are simply rejected.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: NelderMeadOptions,
) -> Minimum {
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let n = x0.len();
    let mut best = Minimum {
        x: x0.to_vec(),
        value: eval(x0),
        evaluations: 1,
    };
    if n == 0 {
        return best;
    }
    let nf = n as f64;
    let (reflect, expand, contract, shrink) =
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut step = opts.step;
    for _ in 0..=opts.restarts {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best.x.clone(), best.value));
        for i in 0..n {
            let mut x = best.x.clone();
            x[i] += step;
            let v = eval(&x);
            simplex.push((x, v));
        }
        best.evaluations += n;
        while best.evaluations < opts.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let f_spread = (simplex[n].1 - simplex[0].1).abs();
            let x_spread = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if (f_spread <= opts.ftol * (1.0 + simplex[0].1.abs()) && x_spread <= opts.xtol.sqrt())
                || x_spread <= opts.xtol
            {
                break;
            }
            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / nf)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(reflect);
            let fr = eval(&xr);
            best.evaluations += 1;
            if fr < simplex[0].1 {
                let xe = along(reflect * expand);
                let fe = eval(&xe);
                best.evaluations += 1;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let x = along(reflect * contract);
                    let v = eval(&x);
                    (x, v)
                } else {
                    let x = along(-contract);
                    let v = eval(&x);
                    (x, v)
                };
                best.evaluations += 1;
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let x0 = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        for (xi, bi) in vertex.0.iter_mut().zip(&x0) {
                            *xi = bi + shrink * (*xi - bi);
                        }
                        vertex.1 = eval(&vertex.0);
                    }
                    best.evaluations += n;
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= best.value {
            best.x = simplex[0].0.clone();
            best.value = simplex[0].1;
        }
        if best.evaluations >= opts.max_evals {
            break;
        }
        step = (step * 0.1).max(1e-6);
    }
    best
}

/// Golden-section search for a maximum of a unimodal function on `[a, b]`.
pub fn golden_section_max(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    iterations: usize,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Number of real parameters describing an `r`-dimensional state.
pub fn state_param_count(r: usize) -> usize {
    r * r
}

/// `σ = LL†/Tr LL†` with `L` lower triangular: the diagonal takes `r` reals,
/// each strictly lower entry a (re, im) pair.
pub fn state_from_params(params: &[f64], r: usize) -> HermitianOperator {
    let mut l = CMatrix::zeros(r, r);
    let mut it = params.iter();
    for i in 0..r {
        l[(i, i)] = C64::new(*it.next().expect("enough parameters"), 0.0);
    }
    for i in 0..r {
        for j in 0..i {
            let re = *it.next().expect("enough parameters");
            let im = *it.next().expect("enough parameters");
            l[(i, j)] = C64::new(re, im);
        }
    }
    let m = &l * l.adjoint();
    let tr = m.trace().re;
    HermitianOperator::from_matrix_unchecked(m.unscale(tr))
}

/// Inverse of [`state_from_params`] via a Cholesky factor, for positive
/// definite inputs (a tiny ridge keeps near-singular states factorable).
pub fn params_from_state(sigma: &HermitianOperator) -> Vec<f64> {
    let r = sigma.dim();
    let ridge = 1e-13 * sigma.trace().abs().max(1e-300);
    let m = sigma.matrix() + CMatrix::identity(r, r).scale(ridge);
    let l = Cholesky::new(m)
        .map(|c| c.l())
        .unwrap_or_else(|| CMatrix::identity(r, r));
    let mut out = Vec::with_capacity(r * r);
    for i in 0..r {
        out.push(l[(i, i)].re);
    }
    for i in 0..r {
        for j in 0..i {
            out.push(l[(i, j)].re);
            out.push(l[(i, j)].im);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(
            f,
            &[-1.2, 1.0],
            NelderMeadOptions {
                step: 0.5,
                ..Default::default()
            },
        );
        assert!(
            (m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5,
            "{:?}",
            m.x
        );
    }

    #[test]
    fn nelder_mead_rejects_infeasible_region() {
        let f = |x: &[f64]| {
            if x[0] < 0.5 {
                f64::NAN
            } else {
                (x[0] - 1.0).powi(2)
            }
        };
        let m = nelder_mead(f, &[2.0], NelderMeadOptions::default());
        assert!((m.x[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn golden_section_quadratic() {
        let (x, v) = golden_section_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 60);
        assert!((x - 0.3).abs() < 1e-8 && v.abs() < 1e-15);
    }

    #[test]
    fn state_params_round_trip() {
        let s = HermitianOperator::new(CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => C64::new(0.7, 0.0),
            (1, 1) => C64::new(0.3, 0.0),
            (0, 1) => C64::new(0.1, 0.2),
            _ => C64::new(0.1, -0.2),
        }))
        .unwrap();
        let p = params_from_state(&s);
        assert_eq!(p.len(), state_param_count(2));
        assert!(state_from_params(&p, 2).max_abs_diff(&s) < 1e-12);
    }

    #[test]
    fn parametrized_states_are_states() {
        let s = state_from_params(&[0.3, -2.0, 1.0, 0.5, 0.1, -0.7, 0.2, 0.9, 1.1], 3);
        assert!((s.trace() - 1.0).abs() < 1e-12);
        assert!(s.min_eigenvalue() > -1e-14);
    }
}
