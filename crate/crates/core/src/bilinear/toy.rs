//! Discrete-log-transparent toy pairing over `(Z_p, +)`.
//!
//! The source and target groups are both the additive group of integers mod
//! `p` with generator `1`. "Exponentiation" is multiplication by the scalar
//! and the pairing is `e(x, y) = x * y mod p`, so `e(g^a, g^b) = e(g, g)^(ab)`
//! holds with `e(g, g) = 1`. Elements serialize as 8-byte big-endian
//! integers.
//!
//! Never use this for anything but testing: every element is its own
//! discrete logarithm.

use num_bigint::BigUint;
use rand::{Rng, RngCore};

use super::{BackendId, GroupDescriptor, GroupError, PairingGroup};

pub const DEFAULT_TOY_ORDER: u64 = 1009;
const ELEMENT_LEN: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToyScalar(u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToySource(u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToyTarget(u64);

impl ToyScalar {
    pub fn value(self) -> u64 {
        self.0
    }
}

impl ToySource {
    pub fn value(self) -> u64 {
        self.0
    }
}

impl ToyTarget {
    pub fn value(self) -> u64 {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToyPairing {
    p: u64,
    descriptor: GroupDescriptor,
}

impl Default for ToyPairing {
    fn default() -> Self {
        Self::new(DEFAULT_TOY_ORDER).expect("default toy order is prime")
    }
}

impl ToyPairing {
    /// Builds the toy group of prime order `p`. `p` must be a prime below
    /// `2^63`.
    pub fn new(p: u64) -> Result<Self, GroupError> {
        if p >= 1 << 63 {
            return Err(GroupError::InvalidOrder(format!("{p} exceeds 2^63")));
        }
        if !is_prime(p) {
            return Err(GroupError::InvalidOrder(format!("{p} is not prime")));
        }
        Ok(ToyPairing {
            p,
            descriptor: GroupDescriptor {
                backend_id: BackendId::Toy,
                order: BigUint::from(p),
                source_len: ELEMENT_LEN,
                target_len: ELEMENT_LEN,
                scalar_len: ELEMENT_LEN,
            },
        })
    }

    pub fn order(&self) -> u64 {
        self.p
    }

    fn reduce(&self, v: u128) -> u64 {
        (v % self.p as u128) as u64
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 * b as u128)
    }

    fn addmod(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 + b as u128)
    }

    fn negmod(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn scalar(&self, v: u64) -> ToyScalar {
        ToyScalar(v % self.p)
    }

    /// The source element `g^v`.
    pub fn source(&self, v: u64) -> ToySource {
        ToySource(v % self.p)
    }

    /// The target element `e(g, g)^v`.
    pub fn target(&self, v: u64) -> ToyTarget {
        ToyTarget(v % self.p)
    }

    /// Discrete logarithm of a target element base `e(g, g)`.
    pub fn target_dlog(&self, x: &ToyTarget) -> ToyScalar {
        ToyScalar(x.0)
    }

    fn decode_u64(&self, bytes: &[u8]) -> Result<u64, GroupError> {
        let arr: [u8; ELEMENT_LEN] = bytes.try_into().map_err(|_| GroupError::WrongLength {
            expected: ELEMENT_LEN,
            actual: bytes.len(),
        })?;
        let v = u64::from_be_bytes(arr);
        if v >= self.p {
            return Err(GroupError::NonCanonical);
        }
        Ok(v)
    }
}

impl PairingGroup for ToyPairing {
    type Scalar = ToyScalar;
    type Source = ToySource;
    type Target = ToyTarget;

    fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> ToyScalar {
        // gen_range rejects out-of-zone draws, so there is no modulo bias.
        ToyScalar(rng.gen_range(0..self.p))
    }

    fn scalar_from_u64(&self, v: u64) -> ToyScalar {
        self.scalar(v)
    }

    fn scalar_from_i128(&self, v: i128) -> ToyScalar {
        ToyScalar(v.rem_euclid(self.p as i128) as u64)
    }

    fn scalar_add(&self, a: &ToyScalar, b: &ToyScalar) -> ToyScalar {
        ToyScalar(self.addmod(a.0, b.0))
    }

    fn scalar_mul(&self, a: &ToyScalar, b: &ToyScalar) -> ToyScalar {
        ToyScalar(self.mulmod(a.0, b.0))
    }

    fn scalar_neg(&self, a: &ToyScalar) -> ToyScalar {
        ToyScalar(self.negmod(a.0))
    }

    fn scalar_inv(&self, a: &ToyScalar) -> Option<ToyScalar> {
        if a.0 == 0 {
            return None;
        }
        Some(ToyScalar(self.pow(a.0, self.p - 2)))
    }

    fn scalar_is_zero(&self, a: &ToyScalar) -> bool {
        a.0 == 0
    }

    fn generator(&self) -> ToySource {
        ToySource(1)
    }

    fn identity(&self) -> ToySource {
        ToySource(0)
    }

    fn exp(&self, base: &ToySource, e: &ToyScalar) -> ToySource {
        ToySource(self.mulmod(base.0, e.0))
    }

    fn multi_exp(&self, bases: &[ToySource], exps: &[u64]) -> ToySource {
        assert_eq!(bases.len(), exps.len(), "multi_exp length mismatch");
        let acc = bases
            .iter()
            .zip(exps)
            .fold(0u64, |acc, (b, &e)| self.addmod(acc, self.mulmod(b.0, e % self.p)));
        ToySource(acc)
    }

    fn mul(&self, a: &ToySource, b: &ToySource) -> ToySource {
        ToySource(self.addmod(a.0, b.0))
    }

    fn inv(&self, a: &ToySource) -> ToySource {
        ToySource(self.negmod(a.0))
    }

    fn pair(&self, a: &ToySource, b: &ToySource) -> ToyTarget {
        ToyTarget(self.mulmod(a.0, b.0))
    }

    fn pair_product(&self, pairs: &[(&ToySource, &ToySource)]) -> ToyTarget {
        let acc = pairs
            .iter()
            .fold(0u64, |acc, (a, b)| self.addmod(acc, self.mulmod(a.0, b.0)));
        ToyTarget(acc)
    }

    fn target_identity(&self) -> ToyTarget {
        ToyTarget(0)
    }

    fn mul_target(&self, a: &ToyTarget, b: &ToyTarget) -> ToyTarget {
        ToyTarget(self.addmod(a.0, b.0))
    }

    fn exp_target(&self, base: &ToyTarget, e: &ToyScalar) -> ToyTarget {
        ToyTarget(self.mulmod(base.0, e.0))
    }

    fn inv_target(&self, a: &ToyTarget) -> ToyTarget {
        ToyTarget(self.negmod(a.0))
    }

    fn serialize_scalar(&self, s: &ToyScalar) -> Vec<u8> {
        s.0.to_be_bytes().to_vec()
    }

    fn deserialize_scalar(&self, bytes: &[u8]) -> Result<ToyScalar, GroupError> {
        self.decode_u64(bytes).map(ToyScalar)
    }

    fn serialize_source(&self, x: &ToySource) -> Vec<u8> {
        x.0.to_be_bytes().to_vec()
    }

    fn deserialize_source(&self, bytes: &[u8]) -> Result<ToySource, GroupError> {
        self.decode_u64(bytes).map(ToySource)
    }

    fn serialize_target(&self, x: &ToyTarget) -> Vec<u8> {
        x.0.to_be_bytes().to_vec()
    }

    fn deserialize_target(&self, bytes: &[u8]) -> Result<ToyTarget, GroupError> {
        self.decode_u64(bytes).map(ToyTarget)
    }

    fn dlog(&self, x: &ToySource) -> Result<ToyScalar, GroupError> {
        Ok(ToyScalar(x.0))
    }
}

impl ToyPairing {
    fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mulmod(acc, base);
            }
            base = self.mulmod(base, base);
            exp >>= 1;
        }
        acc
    }
}

fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod_u64(acc, base, m);
        }
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Miller-Rabin with the first twelve prime bases, which is deterministic
/// for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = powmod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
