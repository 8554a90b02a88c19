use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bilinear::GroupDescriptor;

/// Collision-resistant hash used to digest identity strings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HashId {
    Sha256,
}

impl HashId {
    pub fn to_byte(self) -> u8 {
        match self {
            HashId::Sha256 => 0x01,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0x01 => Some(HashId::Sha256),
            _ => None,
        }
    }

    pub fn output_bits(self) -> u32 {
        match self {
            HashId::Sha256 => 256,
        }
    }

    pub fn digest(self, data: &[u8]) -> Vec<u8> {
        match self {
            HashId::Sha256 => Sha256::digest(data).to_vec(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("block count n must be positive")]
    ZeroBlocks,
    #[error("block width ell must be positive")]
    ZeroBlockWidth,
    #[error("block width ell = {0} exceeds 64 bits")]
    BlockTooWide(u16),
    #[error("n * ell = {n_prime} bits exceeds the {available}-bit hash output")]
    DigestTooShort { n_prime: u32, available: u32 },
    #[error("block width ell = {ell} must be below (order bits - 2) = {limit}")]
    BlockWidthVsOrder { ell: u16, limit: u64 },
}

/// Identity layout: `n` blocks of `ell` bits each, cut from the first
/// `n * ell` bits of the identity digest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SchemeConfig {
    n: u16,
    ell: u16,
    hash: HashId,
}

impl SchemeConfig {
    pub fn new(n: u16, ell: u16, hash: HashId) -> Result<Self, ConfigError> {
        if n == 0 {
            return Err(ConfigError::ZeroBlocks);
        }
        if ell == 0 {
            return Err(ConfigError::ZeroBlockWidth);
        }
        if ell > 64 {
            return Err(ConfigError::BlockTooWide(ell));
        }
        let n_prime = n as u32 * ell as u32;
        if n_prime > hash.output_bits() {
            return Err(ConfigError::DigestTooShort {
                n_prime,
                available: hash.output_bits(),
            });
        }
        Ok(SchemeConfig { n, ell, hash })
    }

    /// Eight 32-bit blocks covering the whole SHA-256 digest.
    pub fn recommended() -> Self {
        Self::new(8, 32, HashId::Sha256).expect("valid constant config")
    }

    /// Five 32-bit blocks (160-bit identities).
    pub fn compact_160() -> Self {
        Self::new(5, 32, HashId::Sha256).expect("valid constant config")
    }

    /// One-bit blocks: the original Waters layout with `n_prime` public
    /// vector entries.
    pub fn waters(n_prime: u16) -> Result<Self, ConfigError> {
        Self::new(n_prime, 1, HashId::Sha256)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn ell(&self) -> u32 {
        self.ell as u32
    }

    pub fn n_prime(&self) -> u32 {
        self.n as u32 * self.ell as u32
    }

    pub fn hash(&self) -> HashId {
        self.hash
    }

    /// Exclusive upper bound of a block value, `2^ell`.
    pub fn block_bound(&self) -> u128 {
        1u128 << self.ell
    }

    /// Block values must stay far below the group order so that they act as
    /// exponents without wrapping.
    pub fn check_group(&self, descriptor: &GroupDescriptor) -> Result<(), ConfigError> {
        let limit = descriptor.order_bits().saturating_sub(2);
        if self.ell as u64 >= limit {
            return Err(ConfigError::BlockWidthVsOrder {
                ell: self.ell,
                limit,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::{Bls12Pairing, PairingGroup, ToyPairing};

    #[test]
    fn validation() {
        assert_eq!(SchemeConfig::new(0, 8, HashId::Sha256), Err(ConfigError::ZeroBlocks));
        assert_eq!(SchemeConfig::new(4, 0, HashId::Sha256), Err(ConfigError::ZeroBlockWidth));
        assert_eq!(
            SchemeConfig::new(9, 32, HashId::Sha256),
            Err(ConfigError::DigestTooShort { n_prime: 288, available: 256 })
        );
        assert_eq!(SchemeConfig::recommended().n_prime(), 256);
        assert_eq!(SchemeConfig::compact_160().n_prime(), 160);
    }

    #[test]
    fn block_width_against_order() {
        let toy = ToyPairing::default();
        // 1009 has 10 bits, so ell must be below 8.
        assert!(SchemeConfig::new(2, 7, HashId::Sha256).unwrap().check_group(toy.descriptor()).is_ok());
        assert_eq!(
            SchemeConfig::new(2, 8, HashId::Sha256).unwrap().check_group(toy.descriptor()),
            Err(ConfigError::BlockWidthVsOrder { ell: 8, limit: 8 })
        );
        assert!(SchemeConfig::recommended().check_group(Bls12Pairing::new().descriptor()).is_ok());
    }
}
