//! # cq-radius
//!
//! Quantum α-z Rényi divergences, weighted divergence radii and centers of
//! classical-quantum channels, and the constant-composition coding exponents
//! built on them.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`operator`] | Hermitian spectral calculus: support powers, pinching, tensor products |
//! | [`divergence`] | `Q_{α,z}`, `D_{α,z}`, Umegaki, max-relative entropy, Tsallis, region classifier |
//! | [`channel`] | cq channels, input distributions, lifted states, method of types |
//! | [`center`] | fixed-point centers, closed forms, mutual informations, brute-force oracle |
//! | [`exponent`] | strong converse exponent, cutoff rates, sphere packing, random coding |
//!
//! All logarithms are natural; exponents are in nats.

pub mod center;
pub mod channel;
pub mod divergence;
pub mod error;
pub mod exponent;
pub mod operator;
pub mod optimize;
pub mod sampling;
pub mod verify;

pub use center::{CenterResult, Method};
pub use channel::{GcqChannel, InputDistribution, TypeClass};
pub use divergence::{Extended, RenyiParams, ZParam};
pub use error::{Error, Result};
pub use operator::{DensityOperator, HermitianOperator};
