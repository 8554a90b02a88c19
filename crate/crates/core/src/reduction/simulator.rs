//! The trapdoor simulator.
//!
//! Given a DBDH tuple `(g, A, B, C, z)`, the simulator publishes
//! `g1 = A`, `g2 = B` and
//!
//! ```text
//! u' = g2^(x' - k m) * g^(y')        u_i = g2^(x_i) * g^(y_i)
//! ```
//!
//! so that `H(v) = g2^F(v) * g^J(v)` with
//! `F(v) = x' + sum v_i x_i - m k` and `J(v) = y' + sum v_i y_i`. It can
//! answer a key query whenever `F(v) != 0 (mod p)` without knowing `a`, and
//! embeds `z` into the challenge when `F(v*) = 0`.

use num_bigint::BigUint;
use rand::{Rng, RngCore};

use super::{AbortKind, DbdhTuple, Outcome, ReductionError};
use crate::bilinear::PairingGroup;
use crate::ibe::{hash_product, Ciphertext, EncodedIdentity, PrivateKey, PublicParams, SchemeConfig};

/// The simulator's hidden choices. `m = 2q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrapdoorState<G: PairingGroup> {
    config: SchemeConfig,
    q: usize,
    m: u64,
    k: u64,
    x_prime: u64,
    x: Vec<u64>,
    y_prime: G::Scalar,
    y: Vec<G::Scalar>,
}

impl<G: PairingGroup> TrapdoorState<G> {
    /// Builds a state from explicit values, checking ranges.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        group: &G,
        config: SchemeConfig,
        q: usize,
        k: u64,
        x_prime: u64,
        x: Vec<u64>,
        y_prime: G::Scalar,
        y: Vec<G::Scalar>,
    ) -> Result<Self, ReductionError> {
        check_regime(group, &config, q)?;
        let m = 2 * q as u64;
        let k_bound = (config.n() as u128) << config.ell();
        if k as u128 >= k_bound {
            return Err(ReductionError::TrapdoorRange("k"));
        }
        if x_prime >= m || x.iter().any(|&xi| xi >= m) {
            return Err(ReductionError::TrapdoorRange("x"));
        }
        if x.len() != config.n() || y.len() != config.n() {
            return Err(ReductionError::TrapdoorRange("vector length"));
        }
        Ok(TrapdoorState {
            config,
            q,
            m,
            k,
            x_prime,
            x,
            y_prime,
            y,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn x_prime(&self) -> u64 {
        self.x_prime
    }

    pub fn x(&self) -> &[u64] {
        &self.x
    }

    pub fn y_prime(&self) -> &G::Scalar {
        &self.y_prime
    }

    pub fn y(&self) -> &[G::Scalar] {
        &self.y
    }

    /// `F(v) = x' + sum v_i x_i - m k`, exactly. Its magnitude stays below
    /// `m n 2^ell`.
    pub fn f(&self, v: &EncodedIdentity) -> i128 {
        let sum = v
            .blocks()
            .iter()
            .zip(&self.x)
            .fold(self.x_prime as i128, |acc, (&vi, &xi)| acc + vi as i128 * xi as i128);
        sum - self.m as i128 * self.k as i128
    }

    /// `J(v) = y' + sum v_i y_i (mod p)`.
    pub fn j(&self, group: &G, v: &EncodedIdentity) -> G::Scalar {
        v.blocks()
            .iter()
            .zip(&self.y)
            .fold(self.y_prime.clone(), |acc, (&vi, yi)| {
                group.scalar_add(&acc, &group.scalar_mul(&group.scalar_from_u64(vi), yi))
            })
    }

    /// Whether a key for `v` can be produced: `F(v) != 0 (mod m)`.
    pub fn can_answer(&self, v: &EncodedIdentity) -> bool {
        self.f(v).rem_euclid(self.m as i128) != 0
    }
}

/// The reduction needs `p > m n 2^ell` so that `F(v) = 0 (mod p)` forces
/// `F(v) = 0` over the integers, and `F` must fit in an `i128`.
fn check_regime<G: PairingGroup>(group: &G, config: &SchemeConfig, q: usize) -> Result<(), ReductionError> {
    if q == 0 {
        return Err(ReductionError::ZeroQueries);
    }
    config.check_group(group.descriptor()).map_err(crate::ibe::IbeError::from)?;
    let span = BigUint::from(2 * q as u64) * BigUint::from(config.n()) * (BigUint::from(1u8) << config.ell());
    if span >= BigUint::from(1u128 << 126) {
        return Err(ReductionError::OrderTooSmall { span: span.to_string() });
    }
    if group.descriptor().order <= span {
        return Err(ReductionError::OrderTooSmall { span: span.to_string() });
    }
    Ok(())
}

/// Publishes parameters built from the DBDH tuple and keeps the trapdoor.
pub fn sim_setup<G: PairingGroup, R: RngCore + ?Sized>(
    group: &G,
    tuple: &DbdhTuple<G>,
    q: usize,
    config: SchemeConfig,
    rng: &mut R,
) -> Result<(PublicParams<G>, TrapdoorState<G>), ReductionError> {
    check_regime(group, &config, q)?;
    let m = 2 * q as u64;
    let n = config.n();
    let k = rng.gen_range(0..(n as u64) << config.ell());
    let x: Vec<u64> = (0..n).map(|_| rng.gen_range(0..m)).collect();
    let x_prime = rng.gen_range(0..m);
    let y_prime = group.random_scalar(rng);
    let y: Vec<G::Scalar> = (0..n).map(|_| group.random_scalar(rng)).collect();
    let state = TrapdoorState::from_parts(group, config, q, k, x_prime, x, y_prime, y)?;
    let params = publish(group, tuple, &state)?;
    Ok((params, state))
}

/// The public parameters determined by a tuple and a trapdoor.
pub fn publish<G: PairingGroup>(
    group: &G,
    tuple: &DbdhTuple<G>,
    state: &TrapdoorState<G>,
) -> Result<PublicParams<G>, ReductionError> {
    let g = tuple.g();
    let g2 = tuple.g_b();
    let offset = state.x_prime as i128 - state.k as i128 * state.m as i128;
    let u_prime = group.mul(
        &group.exp(g2, &group.scalar_from_i128(offset)),
        &group.exp(g, &state.y_prime),
    );
    let u = state
        .x
        .iter()
        .zip(&state.y)
        .map(|(&xi, yi)| group.mul(&group.exp(g2, &group.scalar_from_u64(xi)), &group.exp(g, yi)))
        .collect();
    let params = PublicParams::from_parts(
        group,
        state.config,
        g.clone(),
        tuple.g_a().clone(),
        g2.clone(),
        u_prime,
        u,
        None,
    )?
    .precompute_pair(group);
    Ok(params)
}

/// Answers a key query, or aborts when `F(v) = 0 (mod m)`.
pub fn sim_keygen<G: PairingGroup, R: RngCore + ?Sized>(
    group: &G,
    state: &TrapdoorState<G>,
    params: &PublicParams<G>,
    v: &EncodedIdentity,
    rng: &mut R,
) -> Result<Outcome<PrivateKey<G>>, ReductionError> {
    let r = group.random_scalar(rng);
    sim_keygen_with_randomness(group, state, params, v, &r)
}

/// `d = (g1^(-J/F) * H(v)^r, g1^(-1/F) * g^r)` for a caller-chosen `r`.
pub fn sim_keygen_with_randomness<G: PairingGroup>(
    group: &G,
    state: &TrapdoorState<G>,
    params: &PublicParams<G>,
    v: &EncodedIdentity,
    r: &G::Scalar,
) -> Result<Outcome<PrivateKey<G>>, ReductionError> {
    let h = hash_product(group, params, v)?;
    if !state.can_answer(v) {
        return Ok(Outcome::Aborted(AbortKind::KeyQuery));
    }
    let f = group.scalar_from_i128(state.f(v));
    // Nonzero mod m implies nonzero as an integer, hence mod p since |F| < p.
    let f_inv = group.scalar_inv(&f).expect("F(v) is invertible mod p");
    let j = state.j(group, v);
    let g1 = params.g1();
    let d1 = group.mul(
        &group.exp(g1, &group.scalar_neg(&group.scalar_mul(&j, &f_inv))),
        &group.exp(&h, r),
    );
    let d2 = group.mul(
        &group.exp(g1, &group.scalar_neg(&f_inv)),
        &group.exp(params.g(), r),
    );
    Ok(Outcome::Answered(PrivateKey::from_parts(d1, d2, v.clone())))
}

/// Builds the challenge `(z * m_gamma, C, C^J(v*))`, or aborts when
/// `F(v*) != 0 (mod p)`.
#[allow(clippy::too_many_arguments)]
pub fn sim_challenge<G: PairingGroup>(
    group: &G,
    state: &TrapdoorState<G>,
    params: &PublicParams<G>,
    tuple: &DbdhTuple<G>,
    v_star: &EncodedIdentity,
    m0: &G::Target,
    m1: &G::Target,
    gamma: bool,
) -> Result<Outcome<Ciphertext<G>>, ReductionError> {
    hash_product(group, params, v_star)?;
    if !group.scalar_is_zero(&group.scalar_from_i128(state.f(v_star))) {
        return Ok(Outcome::Aborted(AbortKind::Challenge));
    }
    let m = if gamma { m1 } else { m0 };
    let j = state.j(group, v_star);
    Ok(Outcome::Answered(Ciphertext::from_parts(
        group.mul_target(tuple.z(), m),
        tuple.g_c().clone(),
        group.exp(tuple.g_c(), &j),
    )))
}
