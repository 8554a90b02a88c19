use super::{IbeError, SchemeConfig};

/// An identity as `n` blocks of `ell` bits, `v_1` being the most
/// significant block of the digest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EncodedIdentity {
    blocks: Vec<u64>,
}

impl EncodedIdentity {
    pub fn new(blocks: Vec<u64>, config: &SchemeConfig) -> Result<Self, IbeError> {
        if blocks.len() != config.n() {
            return Err(IbeError::IdentityLength {
                expected: config.n(),
                actual: blocks.len(),
            });
        }
        if let Some((index, &value)) = blocks
            .iter()
            .enumerate()
            .find(|(_, &b)| b as u128 >= config.block_bound())
        {
            return Err(IbeError::BlockOutOfRange {
                index,
                value,
                ell: config.ell(),
            });
        }
        Ok(EncodedIdentity { blocks })
    }

    /// Hashes `id` and splits the first `n * ell` digest bits big-endian
    /// into blocks.
    pub fn encode(id: &[u8], config: &SchemeConfig) -> Self {
        let digest = config.hash().digest(id);
        Self::from_digest(&digest, config)
    }

    pub(crate) fn from_digest(digest: &[u8], config: &SchemeConfig) -> Self {
        let ell = config.ell() as usize;
        let blocks = (0..config.n())
            .map(|i| {
                (i * ell..(i + 1) * ell).fold(0u64, |acc, bit| {
                    let b = (digest[bit / 8] >> (7 - bit % 8)) & 1;
                    (acc << 1) | b as u64
                })
            })
            .collect();
        EncodedIdentity { blocks }
    }

    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub(crate) fn check(&self, config: &SchemeConfig) -> Result<(), IbeError> {
        Self::new(self.blocks.clone(), config).map(|_| ())
    }
}
