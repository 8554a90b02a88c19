//! Operation-counting wrapper around any backend.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::RngCore;

use super::{GroupDescriptor, GroupError, PairingGroup};

#[derive(Debug, Default)]
struct Counters {
    exp: AtomicU64,
    multi_exp: AtomicU64,
    mul: AtomicU64,
    inv: AtomicU64,
    pairings: AtomicU64,
    mul_target: AtomicU64,
    exp_target: AtomicU64,
    inv_target: AtomicU64,
}

/// Snapshot of operation counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub exp: u64,
    pub multi_exp: u64,
    pub mul: u64,
    pub inv: u64,
    /// Number of pairings evaluated, counting each term of a multi-pairing.
    pub pairings: u64,
    pub mul_target: u64,
    pub exp_target: u64,
    pub inv_target: u64,
}

impl OpCounts {
    /// Full-size exponentiations in the source group; a short-exponent
    /// multi-exponentiation counts as one.
    pub fn source_exponentiations(&self) -> u64 {
        self.exp + self.multi_exp
    }
}

/// Counts every group operation delegated to the inner backend.
///
/// Clones share the same counters.
#[derive(Clone, Debug)]
pub struct Counting<G> {
    inner: G,
    counters: Arc<Counters>,
}

impl<G: PairingGroup> Counting<G> {
    pub fn new(inner: G) -> Self {
        Counting {
            inner,
            counters: Arc::default(),
        }
    }

    pub fn inner(&self) -> &G {
        &self.inner
    }

    pub fn counts(&self) -> OpCounts {
        let c = &self.counters;
        let ld = |a: &AtomicU64| a.load(Ordering::Relaxed);
        OpCounts {
            exp: ld(&c.exp),
            multi_exp: ld(&c.multi_exp),
            mul: ld(&c.mul),
            inv: ld(&c.inv),
            pairings: ld(&c.pairings),
            mul_target: ld(&c.mul_target),
            exp_target: ld(&c.exp_target),
            inv_target: ld(&c.inv_target),
        }
    }

    pub fn reset(&self) {
        let c = &self.counters;
        for a in [
            &c.exp,
            &c.multi_exp,
            &c.mul,
            &c.inv,
            &c.pairings,
            &c.mul_target,
            &c.exp_target,
            &c.inv_target,
        ] {
            a.store(0, Ordering::Relaxed);
        }
    }

    fn bump(counter: &AtomicU64, by: u64) {
        counter.fetch_add(by, Ordering::Relaxed);
    }
}

impl<G: PairingGroup> PairingGroup for Counting<G> {
    type Scalar = G::Scalar;
    type Source = G::Source;
    type Target = G::Target;

    fn descriptor(&self) -> &GroupDescriptor {
        self.inner.descriptor()
    }

    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Self::Scalar {
        self.inner.random_scalar(rng)
    }

    fn scalar_from_u64(&self, v: u64) -> Self::Scalar {
        self.inner.scalar_from_u64(v)
    }

    fn scalar_from_i128(&self, v: i128) -> Self::Scalar {
        self.inner.scalar_from_i128(v)
    }

    fn scalar_add(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar {
        self.inner.scalar_add(a, b)
    }

    fn scalar_mul(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar {
        self.inner.scalar_mul(a, b)
    }

    fn scalar_neg(&self, a: &Self::Scalar) -> Self::Scalar {
        self.inner.scalar_neg(a)
    }

    fn scalar_inv(&self, a: &Self::Scalar) -> Option<Self::Scalar> {
        self.inner.scalar_inv(a)
    }

    fn scalar_is_zero(&self, a: &Self::Scalar) -> bool {
        self.inner.scalar_is_zero(a)
    }

    fn generator(&self) -> Self::Source {
        self.inner.generator()
    }

    fn identity(&self) -> Self::Source {
        self.inner.identity()
    }

    fn exp(&self, base: &Self::Source, e: &Self::Scalar) -> Self::Source {
        Self::bump(&self.counters.exp, 1);
        self.inner.exp(base, e)
    }

    fn multi_exp(&self, bases: &[Self::Source], exps: &[u64]) -> Self::Source {
        Self::bump(&self.counters.multi_exp, 1);
        self.inner.multi_exp(bases, exps)
    }

    fn mul(&self, a: &Self::Source, b: &Self::Source) -> Self::Source {
        Self::bump(&self.counters.mul, 1);
        self.inner.mul(a, b)
    }

    fn inv(&self, a: &Self::Source) -> Self::Source {
        Self::bump(&self.counters.inv, 1);
        self.inner.inv(a)
    }

    fn pair(&self, a: &Self::Source, b: &Self::Source) -> Self::Target {
        Self::bump(&self.counters.pairings, 1);
        self.inner.pair(a, b)
    }

    fn pair_product(&self, pairs: &[(&Self::Source, &Self::Source)]) -> Self::Target {
        Self::bump(&self.counters.pairings, pairs.len() as u64);
        self.inner.pair_product(pairs)
    }

    fn target_identity(&self) -> Self::Target {
        self.inner.target_identity()
    }

    fn mul_target(&self, a: &Self::Target, b: &Self::Target) -> Self::Target {
        Self::bump(&self.counters.mul_target, 1);
        self.inner.mul_target(a, b)
    }

    fn exp_target(&self, base: &Self::Target, e: &Self::Scalar) -> Self::Target {
        Self::bump(&self.counters.exp_target, 1);
        self.inner.exp_target(base, e)
    }

    fn inv_target(&self, a: &Self::Target) -> Self::Target {
        Self::bump(&self.counters.inv_target, 1);
        self.inner.inv_target(a)
    }

    fn serialize_scalar(&self, s: &Self::Scalar) -> Vec<u8> {
        self.inner.serialize_scalar(s)
    }

    fn deserialize_scalar(&self, bytes: &[u8]) -> Result<Self::Scalar, GroupError> {
        self.inner.deserialize_scalar(bytes)
    }

    fn serialize_source(&self, x: &Self::Source) -> Vec<u8> {
        self.inner.serialize_source(x)
    }

    fn deserialize_source(&self, bytes: &[u8]) -> Result<Self::Source, GroupError> {
        self.inner.deserialize_source(bytes)
    }

    fn serialize_target(&self, x: &Self::Target) -> Vec<u8> {
        self.inner.serialize_target(x)
    }

    fn deserialize_target(&self, bytes: &[u8]) -> Result<Self::Target, GroupError> {
        self.inner.deserialize_target(bytes)
    }

    fn dlog(&self, x: &Self::Source) -> Result<Self::Scalar, GroupError> {
        self.inner.dlog(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::ToyPairing;

    #[test]
    fn counts_and_resets() {
        let grp = Counting::new(ToyPairing::default());
        let g = grp.generator();
        let s = grp.scalar_from_u64(3);
        let x = grp.exp(&g, &s);
        grp.pair_product(&[(&x, &g), (&g, &x)]);
        grp.pair(&x, &x);
        let c = grp.counts();
        assert_eq!(c.exp, 1);
        assert_eq!(c.pairings, 3);
        let shared = grp.clone();
        shared.reset();
        assert_eq!(grp.counts(), OpCounts::default());
    }
}
