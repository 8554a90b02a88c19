//! Hybrid encryption of byte payloads: a random target-group element is
//! IBE-encrypted and hashed into an AES-256-GCM key.

use aes_gcm::aead::{Aead, KeyInit, Payload};
use aes_gcm::{Aes256Gcm, Nonce};
use nibe_core::bilinear::PairingGroup;
use nibe_core::ibe::{decrypt, encrypt, EncodedIdentity, PrivateKey, PublicParams};
use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::format::{decode_envelope, envelope_prefix, FormatError, NONCE_LEN};

pub const KDF_LABEL: &[u8] = b"NIBE-KDF-v1";

#[derive(Debug, Error)]
pub enum OpenError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("authentication failed: wrong key or tampered envelope")]
    TagMismatch,
}

/// `SHA-256(label || serialize(m))`.
pub fn derive_key<G: PairingGroup>(group: &G, m: &G::Target) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(KDF_LABEL);
    h.update(group.serialize_target(m));
    h.finalize().into()
}

/// Encrypts `payload` to `identity` and returns the envelope file bytes.
pub fn seal<G: PairingGroup, R: RngCore>(
    group: &G,
    params: &PublicParams<G>,
    identity: &[u8],
    payload: &[u8],
    rng: &mut R,
) -> Vec<u8> {
    let v = EncodedIdentity::encode(identity, params.config());
    let m = group.random_target(rng);
    let kem = encrypt(group, params, &v, &m, rng).expect("encoded identity matches the parameters");
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let sealed_len = payload.len() + crate::format::TAG_LEN;
    let mut out = envelope_prefix(group, params.config(), &kem, &nonce, sealed_len);
    let cipher = Aes256Gcm::new(&derive_key(group, &m).into());
    let sealed = cipher
        .encrypt(Nonce::from_slice(&nonce), Payload { msg: payload, aad: &out })
        .expect("AES-GCM accepts in-memory payloads");
    debug_assert_eq!(sealed.len(), sealed_len);
    out.extend(sealed);
    out
}

/// Decrypts an envelope; nothing is returned unless the tag verifies.
pub fn open<G: PairingGroup>(
    group: &G,
    params: &PublicParams<G>,
    key: &PrivateKey<G>,
    envelope: &[u8],
) -> Result<Vec<u8>, OpenError> {
    let env = decode_envelope(group, params, envelope)?;
    let m = decrypt(group, params, key, &env.kem).map_err(|_| OpenError::TagMismatch)?;
    let cipher = Aes256Gcm::new(&derive_key(group, &m).into());
    cipher
        .decrypt(
            Nonce::from_slice(&env.nonce),
            Payload {
                msg: &env.sealed,
                aad: &env.aad,
            },
        )
        .map_err(|_| OpenError::TagMismatch)
}
