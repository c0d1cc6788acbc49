//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cq_radius::center::{
    closed_form_center_z1, first_order_violation, oracle_grid_center, probe_directions,
    solve_center_d, solve_center_qbar, SolverOptions,
};
use cq_radius::channel::{type_mixing_check, GcqChannel, InputDistribution, TypeClass};
use cq_radius::divergence::{
    classify_region, d_hat, tsallis, umegaki, Extended, Region, RenyiParams, ZParam,
};
use cq_radius::exponent::{
    convexity_probe, cutoff_rate, psi_curve, sc_exponent_cached, RadiusCache,
};
use cq_radius::operator::{DensityOperator, HermitianOperator};
use cq_radius::sampling::{
    dirichlet, random_channel, random_commuting_channel, random_distribution, random_state, rng,
    SeededRng,
};
use rand::Rng;

mod common;
use common::{diagonal_rows, scalar_chi, scalar_sc};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within_budget(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn random_p(r: &mut SeededRng, k: usize) -> InputDistribution {
    InputDistribution::new((0..k).map(|i| i.to_string()).zip(dirichlet(r, k))).unwrap()
}

fn noiseless_anchor() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for d in [2, 3, 4] {
        let w = GcqChannel::noiseless(d);
        for _ in 0..10 {
            let p = random_p(&mut r, d);
            for (a, z) in [(2.0, 2.0), (2.0, 1.0), (0.7, 1.0), (1.5, 1.5)] {
                let c = solve_center_d(&w, &p, RenyiParams::finite(a, z).unwrap(), opts()).unwrap();
                worst = worst.max((c.value - p.entropy()).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && within_budget(elapsed, Duration::from_secs(5)),
        format!(
            "max |chi - H(P)| = {worst:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn closed_form_equivalence() -> Outcome {
    let mut r = rng(202);
    let (mut dist, mut val): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let w = random_channel(&mut r, 2, 3);
        let p = random_distribution(&mut r, &w);
        for a in [0.5, 2.0, 3.0] {
            let q = solve_center_qbar(&w, &p, RenyiParams::petz(a).unwrap(), opts()).unwrap();
            let cf = closed_form_center_z1(&w, &p, a).unwrap();
            let td = DensityOperator::new(q.result.center.clone())
                .unwrap()
                .trace_distance(&DensityOperator::new(cf.result.center.clone()).unwrap());
            dist = dist.max(td);
            val = val.max((q.result.value - cf.result.value).abs());
        }
    }
    outcome(
        dist <= 1e-7 && val <= 1e-8,
        format!("trace distance {dist:.2e}, value {val:.2e}"),
    )
}

fn additivity() -> Outcome {
    let start = Instant::now();
    let mut r = rng(303);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let w = random_channel(&mut r, 2, 2);
        let p = random_distribution(&mut r, &w);
        let ww = w.product(&w).unwrap();
        let pp = p.product(&p);
        for a in [1.2, 2.0, 4.0] {
            let params = RenyiParams::sandwiched(a).unwrap();
            let one = solve_center_d(&w, &p, params, opts()).unwrap().value;
            let two = solve_center_d(&ww, &pp, params, opts()).unwrap().value;
            worst = worst.max((two - 2.0 * one).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && within_budget(elapsed, Duration::from_secs(60)),
        format!(
            "max |chi(WxW) - 2 chi(W)| = {worst:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut r = rng(404);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let w = random_channel(&mut r, 2, 3);
        let p = random_distribution(&mut r, &w);
        for (a, z) in [(2.0, 2.0), (3.0, 1.5)] {
            let params = RenyiParams::finite(a, z).unwrap();
            let c = solve_center_d(&w, &p, params, opts()).unwrap();
            let o = oracle_grid_center(&w, &p, params, 0.1).unwrap();
            worst = worst.max((c.value - o.value).abs());
        }
    }
    outcome(
        worst <= 1e-3,
        format!("max |solver - oracle| = {worst:.2e}"),
    )
}

fn classical_consistency() -> Outcome {
    let mut r = rng(505);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let w = random_commuting_channel(&mut r, 3, 3);
        let p = random_distribution(&mut r, &w);
        let (rows, weights) = diagonal_rows(&w, &p);
        let f = |u: f64| u * scalar_chi(&rows, &weights, 1.0 / (1.0 - u));
        let r_max = (f(0.9) - f(0.8)) / 0.1;
        let cache = RadiusCache::new(&w, &p);
        for i in 0..20 {
            let rate = 0.01 + (r_max - 0.01) * i as f64 / 19.0;
            let ours = sc_exponent_cached(&cache, rate).unwrap().value;
            worst = worst.max((ours - scalar_sc(&rows, &weights, rate)).abs());
        }
    }
    outcome(worst <= 1e-6, format!("max |sc - scalar| = {worst:.2e}"))
}

fn cutoff_tangency() -> Outcome {
    let mut r = rng(606);
    let (mut cutoff_err, mut dip): (f64, f64) = (0.0, f64::NEG_INFINITY);
    for _ in 0..5 {
        let w = random_channel(&mut r, 2, 3);
        let p = random_distribution(&mut r, &w);
        let cache = RadiusCache::new(&w, &p);
        let top = cache.chi_star_infinity().unwrap() + 0.5;
        let rates: Vec<f64> = (0..50)
            .map(|i| 0.01 + (top - 0.01) * i as f64 / 49.0)
            .collect();
        let sc: Vec<f64> = rates
            .iter()
            .map(|&x| sc_exponent_cached(&cache, x).unwrap().value)
            .collect();
        for kappa in [0.25, 0.5, 0.75] {
            let c = cutoff_rate(&w, &p, kappa).unwrap();
            let direct = solve_center_d(
                &w,
                &p,
                RenyiParams::sandwiched(1.0 / (1.0 - kappa)).unwrap(),
                opts(),
            )
            .unwrap();
            cutoff_err = cutoff_err.max((c - direct.value).abs());
            for (x, s) in rates.iter().zip(&sc) {
                dip = dip.max(kappa * (x - c) - s);
            }
        }
    }
    outcome(
        cutoff_err <= 1e-12 && dip <= 1e-6,
        format!("cutoff mismatch {cutoff_err:.2e}, largest kappa (R - C) - sc = {dip:.2e}"),
    )
}

fn positivity() -> Outcome {
    let mut r = rng(707);
    let alphas = [
        0.05, 0.2, 0.4, 0.5, 0.6, 0.8, 0.95, 1.05, 1.3, 1.7, 2.0, 2.5, 3.0,
    ];
    let zs = [0.05, 0.2, 0.4, 0.6, 0.8, 1.0, 1.3, 1.7, 2.0, 2.5, 3.0];
    let mut params = Vec::new();
    for &a in &alphas {
        for &z in &zs {
            params.push(RenyiParams::finite(a, z).unwrap());
        }
        if a > 1.0 {
            params.push(RenyiParams::new(a, ZParam::Infinite).unwrap());
        }
    }
    let mut most_negative = f64::INFINITY;
    let mut smallest_strict = f64::INFINITY;
    for i in 0..200 {
        let d = 2 + i % 3;
        let rank_r = if i % 4 == 0 { r.random_range(1..=d) } else { d };
        let rank_s = if i % 5 == 0 { r.random_range(1..=d) } else { d };
        let rho = random_state(&mut r, d, rank_r).into_operator();
        let sigma = random_state(&mut r, d, rank_s).into_operator();
        for &p in &params {
            let outside_k0 = !classify_region(p).unwrap().regions.contains(&Region::K0);
            for v in [
                d_hat(&rho, &sigma, p).unwrap(),
                tsallis(&rho, &sigma, p).unwrap(),
            ] {
                let v = match v {
                    Extended::Finite(v) => v,
                    Extended::PosInfinity => f64::INFINITY,
                };
                most_negative = most_negative.min(v);
                if outside_k0 {
                    smallest_strict = smallest_strict.min(v);
                }
            }
        }
    }
    outcome(
        most_negative >= -1e-10 && smallest_strict > 1e-6,
        format!("min value {most_negative:.2e}, min outside K0 {smallest_strict:.2e}"),
    )
}

fn entropy_and_ordering() -> Outcome {
    let mut r = rng(808);
    let (mut excess, mut order): (f64, f64) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for i in 0..20 {
        let w = random_channel(&mut r, 2 + i % 2, 2 + i % 3);
        let p = random_distribution(&mut r, &w);
        for (a, z) in [
            (0.5, 1.0),
            (0.7, 0.8),
            (1.5, 1.5),
            (2.0, 2.0),
            (2.0, 1.0),
            (3.0, 2.0),
        ] {
            let params = RenyiParams::finite(a, z).unwrap();
            let chi = solve_center_d(&w, &p, params, opts()).unwrap().value;
            let info = solve_center_qbar(&w, &p, params, opts())
                .unwrap()
                .mutual_information;
            excess = excess.max(chi - p.entropy());
            order = order.max(if a < 1.0 { info - chi } else { chi - info });
        }
    }
    outcome(
        excess <= 1e-8 && order <= 1e-9,
        format!("max chi - H(P) = {excess:.2e}, ordering violation {order:.2e}"),
    )
}

fn first_order_certificate() -> Outcome {
    let mut r = rng(909);
    let mut worst: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut count = 0;
    for i in 0..10 {
        let d = 2 + i % 2;
        let w = random_channel(&mut r, d, 3);
        let p = random_distribution(&mut r, &w);
        let dirs = probe_directions(d, 5, 1000 + i as u64);
        for (a, z) in [(2.0, 2.0), (0.7, 1.0), (3.0, 1.5), (1.5, 0.8), (0.5, 0.6)] {
            let params = RenyiParams::finite(a, z).unwrap();
            let c = solve_center_d(&w, &p, params, opts()).unwrap();
            if c.converged {
                count += 1;
                residual = residual.max(c.residual);
                worst = worst
                    .max(first_order_violation(&w, &p, params, &c.center, &dirs, 1e-5).unwrap());
            }
        }
    }
    outcome(
        worst <= 1e-4 && residual <= 1e-10 && count == 50,
        format!("{count}/50 converged, max directional derivative {worst:.2e}, max residual {residual:.2e}"),
    )
}

fn type_suite() -> Outcome {
    let mut r = rng(1010);
    let mut worst: f64 = 0.0;
    for k in [2, 3] {
        for m in 1..=6u32 {
            for _ in 0..5 {
                let p = random_p(&mut r, k);
                worst = worst.max(type_mixing_check(&p, m).unwrap().max_abs_diff(&p));
            }
        }
    }
    let mut failed = 0;
    let mut checked = 0;
    for n in 1..=12u64 {
        for k in [2u64, 3, 4] {
            let mut counts = vec![0u64; k as usize];
            counts[0] = n;
            loop {
                let t = TypeClass::from_counts(
                    counts.iter().enumerate().map(|(i, c)| (i.to_string(), *c)),
                )
                .unwrap();
                checked += 1;
                if !t.size_bounds_hold() {
                    failed += 1;
                }
                let Some(pos) = (0..k as usize - 1).rev().find(|&i| counts[i] > 0) else {
                    break;
                };
                counts[pos] -= 1;
                let tail: u64 = counts[pos + 1..].iter().sum::<u64>() + 1;
                counts[pos + 1..].iter_mut().for_each(|c| *c = 0);
                counts[pos + 1] = tail;
            }
        }
    }
    outcome(
        worst <= 1e-12 && failed == 0,
        format!(
            "mixing deviation {worst:.2e}, {failed}/{checked} type classes violate the size bounds"
        ),
    )
}

fn information_spectrum() -> Outcome {
    let mut r = rng(1111);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let k = 3;
        let w = random_channel(&mut r, 2, k);
        let v = random_channel(&mut r, 2, k);
        let p = dirichlet(&mut r, k);
        let pairs: Vec<(HermitianOperator, HermitianOperator, f64)> = w
            .symbols()
            .zip(&p)
            .map(|(s, &px)| {
                (
                    v.output(s).unwrap().clone(),
                    w.output(s).unwrap().clone(),
                    px,
                )
            })
            .collect();
        let expected: f64 = pairs
            .iter()
            .map(|(a, b, px)| px * umegaki(a, b).unwrap().to_f64())
            .sum();
        let c = psi_curve(&pairs, &[0.5, 1.5]).unwrap();
        worst = worst
            .max((c.left_derivative - expected).abs())
            .max((c.right_derivative - expected).abs());
    }
    outcome(
        worst <= 1e-3,
        format!("max derivative deviation {worst:.2e}"),
    )
}

fn convexity() -> Outcome {
    let mut r = rng(1212);
    let u: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10 {
        let w = random_channel(&mut r, 2, 3);
        let p = random_distribution(&mut r, &w);
        worst = worst.max(convexity_probe(&w, &p, &u).unwrap().max_violation);
    }
    outcome(worst <= 1e-6, format!("max midpoint violation {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("noiseless channel anchor", noiseless_anchor),
        ("z = 1 closed-form center", closed_form_equivalence),
        ("tensor-power additivity", additivity),
        ("grid oracle equivalence", oracle_equivalence),
        ("classical strong converse exponent", classical_consistency),
        ("cutoff rate tangency", cutoff_tangency),
        ("divergence positivity", positivity),
        (
            "entropy bound and mutual information ordering",
            entropy_and_ordering,
        ),
        ("first-order certificate", first_order_certificate),
        ("types", type_suite),
        ("information spectrum derivative", information_spectrum),
        ("convexity probe", convexity),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {:>2} {name}: {} ({:.2}s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.passed {
            failures += 1;
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
