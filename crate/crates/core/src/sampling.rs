//! Seeded random states, channels and distributions, plus named presets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::channel::{GcqChannel, InputDistribution, MAX_CHANNEL_DIM};
use crate::error::{Error, Result};
use crate::operator::{CMatrix, DensityOperator, HermitianOperator, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    })
}

/// `GG†/Tr GG†` for a `d × rank` complex Gaussian `G`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> DensityOperator {
    let g = ginibre(rng, d, rank.max(1));
    let op = HermitianOperator::from_matrix_unchecked(&g * g.adjoint());
    DensityOperator::new(op).expect("Gram matrices are PSD")
}

/// A random full-rank state.
pub fn random_full_rank_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityOperator {
    random_state(rng, d, d)
}

/// A real diagonal state with Dirichlet(1) weights.
pub fn random_diagonal_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityOperator {
    let w = dirichlet(rng, d);
    DensityOperator::new(HermitianOperator::from_real_diagonal(&w))
        .expect("diagonal weights are a state")
}

/// Uniform sample from the probability simplex.
pub fn dirichlet<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// A traceless Hermitian matrix with unit Hilbert–Schmidt norm.
pub fn random_traceless_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator {
    let g = ginibre(rng, d, d);
    let h = HermitianOperator::from_matrix_unchecked(g);
    let shifted = h.sub(&HermitianOperator::identity(d).scale(h.trace() / d as f64));
    let norm = shifted.matrix().norm();
    shifted.scale(1.0 / norm)
}

fn symbol_labels(k: usize) -> Vec<String> {
    (0..k).map(|i| i.to_string()).collect()
}

/// `k` random full-rank outputs on `C^d`, labelled `"0"`, …, `"k−1"`.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> GcqChannel {
    let outputs = symbol_labels(k)
        .into_iter()
        .map(|s| (s, random_full_rank_state(rng, d).into_operator()));
    GcqChannel::new(outputs).expect("random outputs share a dimension")
}

/// `k` random simultaneously diagonal outputs.
pub fn random_commuting_channel<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> GcqChannel {
    let outputs = symbol_labels(k)
        .into_iter()
        .map(|s| (s, random_diagonal_state(rng, d).into_operator()));
    GcqChannel::new(outputs).expect("random outputs share a dimension")
}

pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, w: &GcqChannel) -> InputDistribution {
    let weights = dirichlet(rng, w.alphabet_size());
    InputDistribution::new(w.symbols().map(String::from).zip(weights))
        .expect("Dirichlet sample is a distribution")
}

/// Resolves a preset name.
///
/// * `noiseless:d` — the noiseless channel on `d` symbols with uniform input;
/// * `random` — shorthand for `random:2:3:42`;
/// * `random:d:k:seed` — `k` random full-rank outputs on `C^d` and a random input.
pub fn preset(name: &str) -> Result<(GcqChannel, InputDistribution)> {
    let parts: Vec<&str> = name.split(':').collect();
    let num = |s: &str| -> Result<u64> {
        s.parse().map_err(|_| {
            Error::Schema(format!(
                "preset {name:?}: {s:?} is not a non-negative integer"
            ))
        })
    };
    match parts.as_slice() {
        ["noiseless", d] => {
            let d = num(d)? as usize;
            if d == 0 {
                return Err(Error::Schema(format!(
                    "preset {name:?}: dimension must be positive"
                )));
            }
            if d > MAX_CHANNEL_DIM {
                return Err(Error::ResourceLimit(format!(
                    "preset dimension {d} exceeds {MAX_CHANNEL_DIM}"
                )));
            }
            let w = GcqChannel::noiseless(d);
            let p = InputDistribution::uniform(w.symbols().map(String::from))?;
            Ok((w, p))
        }
        ["random"] => preset("random:2:3:42"),
        ["random", d, k, seed] => {
            let (d, k, seed) = (num(d)? as usize, num(k)? as usize, num(seed)?);
            if d == 0 || k == 0 {
                return Err(Error::Schema(format!(
                    "preset {name:?}: dimension and alphabet must be positive"
                )));
            }
            if d > MAX_CHANNEL_DIM {
                return Err(Error::ResourceLimit(format!(
                    "preset dimension {d} exceeds {MAX_CHANNEL_DIM}"
                )));
            }
            let mut r = rng(seed);
            let w = random_channel(&mut r, d, k);
            let p = random_distribution(&mut r, &w);
            Ok((w, p))
        }
        _ => Err(Error::Schema(format!(
            "unknown preset {name:?}; expected noiseless:d, random or random:d:k:seed"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_states_are_states() {
        let mut r = rng(7);
        for d in 1..5 {
            let s = random_full_rank_state(&mut r, d);
            assert!((s.trace() - 1.0).abs() < 1e-12 && s.min_eigenvalue() >= 0.0);
            assert_eq!(s.rank(), d);
        }
        assert_eq!(random_state(&mut r, 4, 1).rank(), 1);
    }

    #[test]
    fn traceless_direction() {
        let y = random_traceless_hermitian(&mut rng(1), 3);
        assert!(y.trace().abs() < 1e-12);
        assert!((y.matrix().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn presets_are_deterministic() {
        let (w1, p1) = preset("random:3:4:9").unwrap();
        let (w2, p2) = preset("random:3:4:9").unwrap();
        assert_eq!(w1, w2);
        assert_eq!(p1, p2);
        assert_eq!(w1.dim(), 3);
        assert_eq!(w1.alphabet_size(), 4);
        let (w, p) = preset("noiseless:3").unwrap();
        assert!(w.is_cq() && (p.entropy() - 3f64.ln()).abs() < 1e-12);
        assert!(matches!(preset("bogus"), Err(Error::Schema(_))));
        assert!(matches!(preset("random:x:2:1"), Err(Error::Schema(_))));
    }
}
