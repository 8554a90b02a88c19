//! Bilinear group abstraction.
//!
//! The scheme is written against a *symmetric* pairing `e : G x G -> GT` of
//! prime order `p`. Two realizations are provided:
//!
//! - [`ToyPairing`]: `G = GT = (Z_p, +)` with `e(x, y) = x * y mod p`. Every
//!   discrete logarithm is the element itself, which makes every algebraic
//!   identity of the scheme and of its security reduction checkable exactly.
//!   It is insecure by construction.
//! - [`Bls12Pairing`]: BLS12-381, with each logical element stored as a
//!   mirrored `(G1, G2)` pair sharing one exponent (see [`curve`]).
//!
//! [`Counting`] wraps either backend and tallies group operations.

pub mod counting;
pub mod curve;
pub mod toy;

use std::fmt;

use num_bigint::BigUint;
use rand::RngCore;
use thiserror::Error;

pub use counting::{Counting, OpCounts};
pub use curve::{Bls12Pairing, MirroredPoint};
pub use toy::{ToyPairing, ToyScalar, ToySource, ToyTarget};

/// Wire identifier of a backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BackendId {
    Toy,
    Curve,
}

impl BackendId {
    pub fn to_byte(self) -> u8 {
        match self {
            BackendId::Toy => 0x01,
            BackendId::Curve => 0x02,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0x01 => Some(BackendId::Toy),
            0x02 => Some(BackendId::Curve),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BackendId::Toy => "toy",
            BackendId::Curve => "curve",
        }
    }
}

impl fmt::Display for BackendId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Static description of a backend: its order and wire sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupDescriptor {
    pub backend_id: BackendId,
    /// Prime order shared by the source and target groups.
    pub order: BigUint,
    pub source_len: usize,
    pub target_len: usize,
    pub scalar_len: usize,
}

impl GroupDescriptor {
    pub fn order_bits(&self) -> u64 {
        self.order.bits()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("wrong encoding length: expected {expected} bytes, got {actual}")]
    WrongLength { expected: usize, actual: usize },
    #[error("non-canonical element encoding")]
    NonCanonical,
    #[error("encoded point is not a valid group element")]
    InvalidPoint,
    #[error("mirrored point components do not share an exponent")]
    InconsistentMirror,
    #[error("operation not supported by the {0} backend")]
    Unsupported(&'static str),
    #[error("invalid group order: {0}")]
    InvalidOrder(String),
}

/// A prime-order group `G` with a symmetric bilinear map into `GT`.
///
/// Scalars, source elements and target elements are plain values; the
/// backend object carries the modulus and performs every operation. All
/// operations are pure except the `random_*` helpers, which draw from the
/// caller's rng.
pub trait PairingGroup: Clone + fmt::Debug + Send + Sync {
    type Scalar: Clone + PartialEq + Eq + fmt::Debug + Send + Sync;
    type Source: Clone + PartialEq + Eq + fmt::Debug + Send + Sync;
    type Target: Clone + PartialEq + Eq + fmt::Debug + Send + Sync;

    fn descriptor(&self) -> &GroupDescriptor;

    /// Uniform scalar in `[0, p)`, by rejection sampling.
    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Self::Scalar;
    fn scalar_from_u64(&self, v: u64) -> Self::Scalar;
    /// Reduces a signed integer into `[0, p)`.
    fn scalar_from_i128(&self, v: i128) -> Self::Scalar;
    fn scalar_add(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_mul(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_neg(&self, a: &Self::Scalar) -> Self::Scalar;
    /// Multiplicative inverse mod `p`; `None` for zero.
    fn scalar_inv(&self, a: &Self::Scalar) -> Option<Self::Scalar>;
    fn scalar_is_zero(&self, a: &Self::Scalar) -> bool;

    fn scalar_sub(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar {
        self.scalar_add(a, &self.scalar_neg(b))
    }

    fn generator(&self) -> Self::Source;
    fn identity(&self) -> Self::Source;
    fn exp(&self, base: &Self::Source, e: &Self::Scalar) -> Self::Source;
    /// `prod bases[i]^exps[i]` for short non-negative exponents.
    ///
    /// When the exponents together span no more bits than a scalar, this
    /// costs about one full exponentiation and is counted as one.
    fn multi_exp(&self, bases: &[Self::Source], exps: &[u64]) -> Self::Source;
    fn mul(&self, a: &Self::Source, b: &Self::Source) -> Self::Source;
    fn inv(&self, a: &Self::Source) -> Self::Source;

    fn pair(&self, a: &Self::Source, b: &Self::Source) -> Self::Target;
    /// `prod e(a_i, b_i)`, computed as one multi-pairing.
    fn pair_product(&self, pairs: &[(&Self::Source, &Self::Source)]) -> Self::Target;

    fn target_identity(&self) -> Self::Target;
    fn mul_target(&self, a: &Self::Target, b: &Self::Target) -> Self::Target;
    fn exp_target(&self, base: &Self::Target, e: &Self::Scalar) -> Self::Target;
    fn inv_target(&self, a: &Self::Target) -> Self::Target;

    fn serialize_scalar(&self, s: &Self::Scalar) -> Vec<u8>;
    fn deserialize_scalar(&self, bytes: &[u8]) -> Result<Self::Scalar, GroupError>;
    fn serialize_source(&self, x: &Self::Source) -> Vec<u8>;
    fn deserialize_source(&self, bytes: &[u8]) -> Result<Self::Source, GroupError>;
    fn serialize_target(&self, x: &Self::Target) -> Vec<u8>;
    fn deserialize_target(&self, bytes: &[u8]) -> Result<Self::Target, GroupError>;

    /// Discrete logarithm base [`generator`](Self::generator). Only the toy
    /// backend can answer.
    fn dlog(&self, _x: &Self::Source) -> Result<Self::Scalar, GroupError> {
        Err(GroupError::Unsupported(self.descriptor().backend_id.name()))
    }

    fn random_source<R: RngCore + ?Sized>(&self, rng: &mut R) -> Self::Source {
        let e = self.random_scalar(rng);
        self.exp(&self.generator(), &e)
    }

    fn random_target<R: RngCore + ?Sized>(&self, rng: &mut R) -> Self::Target {
        let g = self.generator();
        let e = self.random_scalar(rng);
        self.exp_target(&self.pair(&g, &g), &e)
    }
}
