//! Identity-based encryption with a public vector compressed by packing
//! `ell` identity bits into each exponent, plus an executable version of its
//! security reduction to decisional bilinear Diffie-Hellman.
//!
//! - [`bilinear`]: group abstraction with a toy and a BLS12-381 backend.
//! - [`ibe`]: setup, key generation, encryption and decryption.
//! - [`reduction`]: DBDH challenges, the trapdoor simulator, artificial
//!   aborts and the security game harnesses.
//! - [`abort_analysis`]: exact and Monte Carlo analysis of the simulator's
//!   abort probability.

pub mod bilinear;
pub mod ibe;
pub mod reduction;
pub mod abort_analysis;
