//! The identity-based encryption scheme.
//!
//! Public parameters are `(g, g1 = g^alpha, g2, u', u_1..u_n)`; the master
//! secret is `g2^alpha`. An identity is hashed and cut into `n` blocks of
//! `ell` bits, `v = (v_1..v_n)`, and every operation works through
//!
//! ```text
//! H(v) = u' * prod u_i^(v_i)
//! ```
//!
//! - key:        `(d1, d2) = (g2^alpha * H(v)^r, g^r)`
//! - ciphertext: `(c1, c2, c3) = (e(g1, g2)^t * m, g^t, H(v)^t)`
//! - decryption: `m = c1 * e(d2, c3) / e(c2, d1)`
//!
//! With `ell = 1` this is exactly Waters' scheme; larger `ell` shrinks the
//! public vector from `n * ell` entries to `n`.

mod config;
mod identity;

pub use config::{ConfigError, HashId, SchemeConfig};
pub use identity::EncodedIdentity;

use rand::RngCore;
use thiserror::Error;

use crate::bilinear::{GroupError, PairingGroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IbeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("identity has {actual} blocks, expected {expected}")]
    IdentityLength { expected: usize, actual: usize },
    #[error("identity block {index} = {value} does not fit in {ell} bits")]
    BlockOutOfRange { index: usize, value: u64, ell: u32 },
    #[error("public vector has {actual} entries, expected {expected}")]
    VectorLength { expected: usize, actual: usize },
    #[error("cached e(g1, g2) does not match the parameters")]
    StalePairingCache,
    #[error("generator does not match the backend generator")]
    ForeignGenerator,
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicParams<G: PairingGroup> {
    config: SchemeConfig,
    g: G::Source,
    g1: G::Source,
    g2: G::Source,
    u_prime: G::Source,
    u: Vec<G::Source>,
    pair_g1_g2: Option<G::Target>,
}

impl<G: PairingGroup> PublicParams<G> {
    /// Assembles parameters from components, checking the vector length and,
    /// when given, the cached pairing.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        group: &G,
        config: SchemeConfig,
        g: G::Source,
        g1: G::Source,
        g2: G::Source,
        u_prime: G::Source,
        u: Vec<G::Source>,
        pair_g1_g2: Option<G::Target>,
    ) -> Result<Self, IbeError> {
        config.check_group(group.descriptor())?;
        if g != group.generator() {
            return Err(IbeError::ForeignGenerator);
        }
        if u.len() != config.n() {
            return Err(IbeError::VectorLength {
                expected: config.n(),
                actual: u.len(),
            });
        }
        if let Some(cached) = &pair_g1_g2 {
            if *cached != group.pair(&g1, &g2) {
                return Err(IbeError::StalePairingCache);
            }
        }
        Ok(PublicParams {
            config,
            g,
            g1,
            g2,
            u_prime,
            u,
            pair_g1_g2,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn g(&self) -> &G::Source {
        &self.g
    }

    pub fn g1(&self) -> &G::Source {
        &self.g1
    }

    pub fn g2(&self) -> &G::Source {
        &self.g2
    }

    pub fn u_prime(&self) -> &G::Source {
        &self.u_prime
    }

    pub fn u(&self) -> &[G::Source] {
        &self.u
    }

    pub fn pair_cache(&self) -> Option<&G::Target> {
        self.pair_g1_g2.as_ref()
    }

    /// Group elements in the parameters, `n + 4`. The cached pairing is
    /// derived data and not counted.
    pub fn logical_element_count(&self) -> usize {
        4 + self.u.len()
    }

    /// Fills the `e(g1, g2)` cache. Idempotent.
    pub fn precompute_pair(mut self, group: &G) -> Self {
        if self.pair_g1_g2.is_none() {
            self.pair_g1_g2 = Some(group.pair(&self.g1, &self.g2));
        }
        self
    }

    pub fn without_pair_cache(mut self) -> Self {
        self.pair_g1_g2 = None;
        self
    }

    fn blinding_base(&self, group: &G) -> G::Target {
        match &self.pair_g1_g2 {
            Some(t) => t.clone(),
            None => group.pair(&self.g1, &self.g2),
        }
    }
}

/// The master secret `g2^alpha`. `alpha` itself is only retained by
/// [`setup_with_oracle`], for tests that need exponent bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterSecret<G: PairingGroup> {
    g2_alpha: G::Source,
    alpha: Option<G::Scalar>,
}

impl<G: PairingGroup> MasterSecret<G> {
    pub fn from_parts(g2_alpha: G::Source, alpha: Option<G::Scalar>) -> Self {
        MasterSecret { g2_alpha, alpha }
    }

    pub fn g2_alpha(&self) -> &G::Source {
        &self.g2_alpha
    }

    pub fn alpha(&self) -> Option<&G::Scalar> {
        self.alpha.as_ref()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivateKey<G: PairingGroup> {
    d1: G::Source,
    d2: G::Source,
    identity: EncodedIdentity,
}

impl<G: PairingGroup> PrivateKey<G> {
    pub fn from_parts(d1: G::Source, d2: G::Source, identity: EncodedIdentity) -> Self {
        PrivateKey { d1, d2, identity }
    }

    pub fn d1(&self) -> &G::Source {
        &self.d1
    }

    pub fn d2(&self) -> &G::Source {
        &self.d2
    }

    pub fn identity(&self) -> &EncodedIdentity {
        &self.identity
    }

    /// Checks `e(d1, g) = e(g1, g2) * e(H(v), d2)`, which every honestly
    /// generated key satisfies.
    pub fn is_well_formed(&self, group: &G, params: &PublicParams<G>) -> bool {
        let Ok(h) = hash_product(group, params, &self.identity) else {
            return false;
        };
        let lhs = group.pair(&self.d1, &params.g);
        let rhs = group.mul_target(&params.blinding_base(group), &group.pair(&h, &self.d2));
        lhs == rhs
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext<G: PairingGroup> {
    c1: G::Target,
    c2: G::Source,
    c3: G::Source,
}

impl<G: PairingGroup> Ciphertext<G> {
    pub fn from_parts(c1: G::Target, c2: G::Source, c3: G::Source) -> Self {
        Ciphertext { c1, c2, c3 }
    }

    pub fn c1(&self) -> &G::Target {
        &self.c1
    }

    pub fn c2(&self) -> &G::Source {
        &self.c2
    }

    pub fn c3(&self) -> &G::Source {
        &self.c3
    }
}

/// Generates parameters and the master secret `g2^alpha`; `alpha` is
/// discarded.
pub fn setup<G: PairingGroup, R: RngCore + ?Sized>(
    group: &G,
    config: SchemeConfig,
    rng: &mut R,
) -> Result<(PublicParams<G>, MasterSecret<G>), IbeError> {
    let (params, mut master) = setup_with_oracle(group, config, rng)?;
    master.alpha = None;
    Ok((params, master))
}

/// Like [`setup`] but keeps `alpha` in the master secret.
pub fn setup_with_oracle<G: PairingGroup, R: RngCore + ?Sized>(
    group: &G,
    config: SchemeConfig,
    rng: &mut R,
) -> Result<(PublicParams<G>, MasterSecret<G>), IbeError> {
    config.check_group(group.descriptor())?;
    let g = group.generator();
    let alpha = group.random_scalar(rng);
    let g1 = group.exp(&g, &alpha);
    let g2 = group.random_source(rng);
    let u_prime = group.random_source(rng);
    let u = (0..config.n()).map(|_| group.random_source(rng)).collect();
    let g2_alpha = group.exp(&g2, &alpha);
    let params = PublicParams {
        config,
        g,
        g1,
        g2,
        u_prime,
        u,
        pair_g1_g2: None,
    }
    .precompute_pair(group);
    Ok((params, MasterSecret::from_parts(g2_alpha, Some(alpha))))
}

/// `u' * prod u_i^(v_i)`, as one short-exponent multi-exponentiation.
pub fn hash_product<G: PairingGroup>(
    group: &G,
    params: &PublicParams<G>,
    v: &EncodedIdentity,
) -> Result<G::Source, IbeError> {
    v.check(&params.config)?;
    let mut bases = Vec::with_capacity(params.u.len() + 1);
    bases.push(params.u_prime.clone());
    bases.extend(params.u.iter().cloned());
    let mut exps = Vec::with_capacity(bases.len());
    exps.push(1);
    exps.extend_from_slice(v.blocks());
    Ok(group.multi_exp(&bases, &exps))
}

/// Waters' form of the identity hash for binary vectors,
/// `u' * prod_{v_i = 1} u_i`.
pub fn subset_product<G: PairingGroup>(
    group: &G,
    params: &PublicParams<G>,
    bits: &[bool],
) -> Result<G::Source, IbeError> {
    if bits.len() != params.u.len() {
        return Err(IbeError::IdentityLength {
            expected: params.u.len(),
            actual: bits.len(),
        });
    }
    Ok(params
        .u
        .iter()
        .zip(bits)
        .filter(|(_, &b)| b)
        .fold(params.u_prime.clone(), |acc, (u, _)| group.mul(&acc, u)))
}

pub fn keygen<G: PairingGroup, R: RngCore + ?Sized>(
    group: &G,
    params: &PublicParams<G>,
    master: &MasterSecret<G>,
    v: &EncodedIdentity,
    rng: &mut R,
) -> Result<PrivateKey<G>, IbeError> {
    let r = group.random_scalar(rng);
    keygen_with_randomness(group, params, master, v, &r)
}

/// Deterministic key derivation for a caller-chosen `r`.
pub fn keygen_with_randomness<G: PairingGroup>(
    group: &G,
    params: &PublicParams<G>,
    master: &MasterSecret<G>,
    v: &EncodedIdentity,
    r: &G::Scalar,
) -> Result<PrivateKey<G>, IbeError> {
    let h = hash_product(group, params, v)?;
    let d1 = group.mul(&master.g2_alpha, &group.exp(&h, r));
    let d2 = group.exp(&params.g, r);
    Ok(PrivateKey::from_parts(d1, d2, v.clone()))
}

pub fn encrypt<G: PairingGroup, R: RngCore + ?Sized>(
    group: &G,
    params: &PublicParams<G>,
    v: &EncodedIdentity,
    m: &G::Target,
    rng: &mut R,
) -> Result<Ciphertext<G>, IbeError> {
    let t = group.random_scalar(rng);
    encrypt_with_randomness(group, params, v, m, &t)
}

/// Deterministic encryption for a caller-chosen `t`.
pub fn encrypt_with_randomness<G: PairingGroup>(
    group: &G,
    params: &PublicParams<G>,
    v: &EncodedIdentity,
    m: &G::Target,
    t: &G::Scalar,
) -> Result<Ciphertext<G>, IbeError> {
    let h = hash_product(group, params, v)?;
    let mask = group.exp_target(&params.blinding_base(group), t);
    Ok(Ciphertext {
        c1: group.mul_target(&mask, m),
        c2: group.exp(&params.g, t),
        c3: group.exp(&h, t),
    })
}

/// Recovers `c1 * e(d2, c3) / e(c2, d1)`.
///
/// The two pairings are evaluated as one product `e(c2, d1) * e(d2^-1, c3)`,
/// leaving a single target inversion and multiplication.
pub fn decrypt<G: PairingGroup>(
    group: &G,
    params: &PublicParams<G>,
    key: &PrivateKey<G>,
    ct: &Ciphertext<G>,
) -> Result<G::Target, IbeError> {
    key.identity.check(&params.config)?;
    let d2_inv = group.inv(&key.d2);
    let blind = group.pair_product(&[(&ct.c2, &key.d1), (&d2_inv, &ct.c3)]);
    Ok(group.mul_target(&ct.c1, &group.inv_target(&blind)))
}
