//! Scalar reference implementations for simultaneously diagonal channels,
//! written against probability vectors only.
#![allow(dead_code)]

/// `min_q Σ_x P(x) D_α(w_x‖q)` for probability vectors, by damped Newton
/// steps in softmax coordinates with a finite-difference Hessian.
pub fn scalar_chi(rows: &[Vec<f64>], weights: &[f64], alpha: f64) -> f64 {
    let d = rows[0].len();
    let simplex = |theta: &[f64]| -> Vec<f64> {
        let top = theta.iter().copied().fold(0.0, f64::max);
        let mut q: Vec<f64> = theta
            .iter()
            .map(|t| (t - top).exp())
            .chain([(-top).exp()])
            .collect();
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= s);
        q
    };
    let value = |theta: &[f64]| -> f64 {
        let q = simplex(theta);
        rows.iter()
            .zip(weights)
            .map(|(w, p)| {
                let z: f64 = w
                    .iter()
                    .zip(&q)
                    .map(|(a, b)| a.powf(alpha) * b.powf(1.0 - alpha))
                    .sum();
                p * z.ln() / (alpha - 1.0)
            })
            .sum()
    };
    let grad = |theta: &[f64]| -> Vec<f64> {
        let q = simplex(theta);
        let mut g = vec![0.0; d];
        for (w, p) in rows.iter().zip(weights) {
            let z: f64 = w
                .iter()
                .zip(&q)
                .map(|(a, b)| a.powf(alpha) * b.powf(1.0 - alpha))
                .sum();
            for i in 0..d {
                g[i] -= p * w[i].powf(alpha) * q[i].powf(-alpha) / z;
            }
        }
        let mean: f64 = q.iter().zip(&g).map(|(a, b)| a * b).sum();
        (0..d - 1).map(|k| q[k] * (g[k] - mean)).collect()
    };
    let n = d - 1;
    let mut theta = vec![0.0; n];
    let mut f = value(&theta);
    for _ in 0..500 {
        let g = grad(&theta);
        if g.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-11 {
            break;
        }
        let h = 1e-5;
        let mut hess = nalgebra::DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut up = theta.clone();
            let mut down = theta.clone();
            up[j] += h;
            down[j] -= h;
            let (gu, gd) = (grad(&up), grad(&down));
            for i in 0..n {
                hess[(i, j)] = (gu[i] - gd[i]) / (2.0 * h);
            }
        }
        let hess = (&hess + hess.transpose()) / 2.0;
        let gv = nalgebra::DVector::from_vec(g.clone());
        let step = match hess.clone().cholesky() {
            Some(c) => c.solve(&gv),
            None => gv,
        };
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(a, b)| a - t * b)
                .collect();
            let fc = value(&cand);
            if fc < f {
                theta = cand;
                f = fc;
                break;
            }
            t /= 2.0;
            if t < 1e-6 {
                return f;
            }
        }
    }
    f
}

/// `sup_{u∈(0,0.95]} u R − u χ_{1/(1−u)}`, clamped at zero.
pub fn scalar_sc(rows: &[Vec<f64>], weights: &[f64], rate: f64) -> f64 {
    golden_max(
        |u| u * rate - u * scalar_chi(rows, weights, 1.0 / (1.0 - u)),
        1e-7,
        0.95,
        60,
    )
    .1
    .max(0.0)
}

/// Golden-section maximum of `f` on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut m1 = hi - ratio * (hi - lo);
    let mut m2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(m1), f(m2));
    for _ in 0..iters {
        if f1 < f2 {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + ratio * (hi - lo);
            f2 = f(m2);
        } else {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - ratio * (hi - lo);
            f1 = f(m1);
        }
    }
    if f1 >= f2 {
        (m1, f1)
    } else {
        (m2, f2)
    }
}

/// Diagonals of the outputs and the input weights in symbol order.
pub fn diagonal_rows(
    w: &cq_radius::channel::GcqChannel,
    p: &cq_radius::channel::InputDistribution,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = w.dim();
    let rows = w
        .outputs()
        .map(|(_, o)| (0..d).map(|i| o.matrix()[(i, i)].re).collect())
        .collect();
    let weights = w.symbols().map(|s| p.weight(s)).collect();
    (rows, weights)
}
