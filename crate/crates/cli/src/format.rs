//! Binary file formats.
//!
//! Every file starts with the same 11-byte header:
//!
//! ```text
//! magic[4] | version u8 | backend u8 | n u16 | ell u16 | hash u8
//! ```
//!
//! followed by backend-serialized group elements. Integers are big-endian.

use nibe_core::bilinear::{BackendId, GroupError, PairingGroup};
use nibe_core::ibe::{
    Ciphertext, ConfigError, EncodedIdentity, HashId, IbeError, MasterSecret, PrivateKey, PublicParams,
    SchemeConfig,
};
use thiserror::Error;

pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 11;
pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;
/// AES-256-GCM.
pub const DEM_AES256_GCM: u8 = 0x01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileKind {
    Params,
    Master,
    Key,
    Envelope,
}

impl FileKind {
    pub fn magic(self) -> &'static [u8; 4] {
        match self {
            FileKind::Params => b"NIBE",
            FileKind::Master => b"NIBM",
            FileKind::Key => b"NIBK",
            FileKind::Envelope => b"NIBC",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FileKind::Params => "params",
            FileKind::Master => "master",
            FileKind::Key => "key",
            FileKind::Envelope => "envelope",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("{kind} file truncated: needed {needed} more bytes at offset {offset}")]
    Truncated {
        kind: &'static str,
        offset: usize,
        needed: usize,
    },
    #[error("not a {kind} file (magic {found:02x?})")]
    BadMagic { kind: &'static str, found: Vec<u8> },
    #[error("unknown {kind} file version {version:#04x}")]
    UnknownVersion { kind: &'static str, version: u8 },
    #[error("unknown backend id {0:#04x}")]
    UnknownBackend(u8),
    #[error("unknown hash id {0:#04x}")]
    UnknownHash(u8),
    #[error("unknown DEM id {0:#04x}")]
    UnknownDem(u8),
    #[error("invalid scheme configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{kind} file has {count} trailing bytes")]
    TrailingBytes { kind: &'static str, count: usize },
    #[error("{kind} file does not match the parameters ({what})")]
    HeaderMismatch { kind: &'static str, what: &'static str },
    #[error("bad group element in {kind} file: {source}")]
    Element {
        kind: &'static str,
        #[source]
        source: GroupError,
    },
    #[error("inconsistent {kind} file: {source}")]
    Inconsistent {
        kind: &'static str,
        #[source]
        source: IbeError,
    },
    #[error("declared payload length {0} is out of range")]
    PayloadLength(u64),
}

impl FormatError {
    /// Stable short code for each failure class.
    pub fn code(&self) -> &'static str {
        match self {
            FormatError::Truncated { .. } => "truncated",
            FormatError::BadMagic { .. } => "bad-magic",
            FormatError::UnknownVersion { .. } => "unknown-version",
            FormatError::UnknownBackend(_) => "unknown-backend",
            FormatError::UnknownHash(_) => "unknown-hash",
            FormatError::UnknownDem(_) => "unknown-dem",
            FormatError::Config(_) => "bad-config",
            FormatError::TrailingBytes { .. } => "trailing-bytes",
            FormatError::HeaderMismatch { .. } => "header-mismatch",
            FormatError::Element { .. } => "bad-element",
            FormatError::Inconsistent { .. } => "inconsistent",
            FormatError::PayloadLength(_) => "bad-length",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub backend: BackendId,
    pub config: SchemeConfig,
}

impl Header {
    pub fn write(&self, kind: FileKind, out: &mut Vec<u8>) {
        out.extend_from_slice(kind.magic());
        out.push(VERSION);
        out.push(self.backend.to_byte());
        out.extend_from_slice(&(self.config.n() as u16).to_be_bytes());
        out.extend_from_slice(&(self.config.ell() as u16).to_be_bytes());
        out.push(self.config.hash().to_byte());
    }

    /// Reads and validates a header; magic and version are checked before
    /// anything else.
    pub fn read(kind: FileKind, r: &mut Reader<'_>) -> Result<Self, FormatError> {
        let magic = r.take(4)?;
        if magic != kind.magic() {
            return Err(FormatError::BadMagic {
                kind: kind.name(),
                found: magic.to_vec(),
            });
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(FormatError::UnknownVersion {
                kind: kind.name(),
                version,
            });
        }
        let b = r.u8()?;
        let backend = BackendId::from_byte(b).ok_or(FormatError::UnknownBackend(b))?;
        let n = r.u16()?;
        let ell = r.u16()?;
        let h = r.u8()?;
        let hash = HashId::from_byte(h).ok_or(FormatError::UnknownHash(h))?;
        Ok(Header {
            backend,
            config: SchemeConfig::new(n, ell, hash)?,
        })
    }

    /// Reads just the header of a file of the given kind.
    pub fn peek(kind: FileKind, bytes: &[u8]) -> Result<Self, FormatError> {
        Header::read(kind, &mut Reader::new(kind, bytes))
    }

    pub fn expect(&self, other: &Header, kind: FileKind) -> Result<(), FormatError> {
        if self.backend != other.backend {
            return Err(FormatError::HeaderMismatch {
                kind: kind.name(),
                what: "backend",
            });
        }
        if self.config != other.config {
            return Err(FormatError::HeaderMismatch {
                kind: kind.name(),
                what: "scheme configuration",
            });
        }
        Ok(())
    }
}

/// Bounds-checked cursor over a file's bytes.
pub struct Reader<'a> {
    kind: FileKind,
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(kind: FileKind, buf: &'a [u8]) -> Self {
        Reader { kind, buf, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn take(&mut self, len: usize) -> Result<&'a [u8], FormatError> {
        let rest = self.buf.len() - self.pos;
        if rest < len {
            return Err(FormatError::Truncated {
                kind: self.kind.name(),
                offset: self.pos,
                needed: len - rest,
            });
        }
        let out = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn finish(self) -> Result<(), FormatError> {
        match self.buf.len() - self.pos {
            0 => Ok(()),
            count => Err(FormatError::TrailingBytes {
                kind: self.kind.name(),
                count,
            }),
        }
    }

    fn source<G: PairingGroup>(&mut self, group: &G) -> Result<G::Source, FormatError> {
        let bytes = self.take(group.descriptor().source_len)?;
        group.deserialize_source(bytes).map_err(|source| FormatError::Element {
            kind: self.kind.name(),
            source,
        })
    }

    fn target<G: PairingGroup>(&mut self, group: &G) -> Result<G::Target, FormatError> {
        let bytes = self.take(group.descriptor().target_len)?;
        group.deserialize_target(bytes).map_err(|source| FormatError::Element {
            kind: self.kind.name(),
            source,
        })
    }

    fn scalar<G: PairingGroup>(&mut self, group: &G) -> Result<G::Scalar, FormatError> {
        let bytes = self.take(group.descriptor().scalar_len)?;
        group.deserialize_scalar(bytes).map_err(|source| FormatError::Element {
            kind: self.kind.name(),
            source,
        })
    }
}

fn header_of<G: PairingGroup>(group: &G, config: &SchemeConfig) -> Header {
    Header {
        backend: group.descriptor().backend_id,
        config: *config,
    }
}

fn check_backend<G: PairingGroup>(group: &G, header: &Header, kind: FileKind) -> Result<(), FormatError> {
    if header.backend != group.descriptor().backend_id {
        return Err(FormatError::HeaderMismatch {
            kind: kind.name(),
            what: "backend",
        });
    }
    Ok(())
}

/// `header | g | g1 | g2 | u' | u_1..u_n | e(g1, g2)`.
pub fn encode_params<G: PairingGroup>(group: &G, params: &PublicParams<G>) -> Vec<u8> {
    let mut out = Vec::new();
    header_of(group, params.config()).write(FileKind::Params, &mut out);
    for x in [params.g(), params.g1(), params.g2(), params.u_prime()]
        .into_iter()
        .chain(params.u())
    {
        out.extend(group.serialize_source(x));
    }
    let cache = params
        .pair_cache()
        .cloned()
        .unwrap_or_else(|| group.pair(params.g1(), params.g2()));
    out.extend(group.serialize_target(&cache));
    out
}

pub fn decode_params<G: PairingGroup>(group: &G, bytes: &[u8]) -> Result<PublicParams<G>, FormatError> {
    let kind = FileKind::Params;
    let mut r = Reader::new(kind, bytes);
    let header = Header::read(kind, &mut r)?;
    check_backend(group, &header, kind)?;
    let config = header.config;
    let g = r.source(group)?;
    let g1 = r.source(group)?;
    let g2 = r.source(group)?;
    let u_prime = r.source(group)?;
    let u = (0..config.n()).map(|_| r.source(group)).collect::<Result<Vec<_>, _>>()?;
    let cache = r.target(group)?;
    r.finish()?;
    PublicParams::from_parts(group, config, g, g1, g2, u_prime, u, Some(cache))
        .map_err(|source| FormatError::Inconsistent { kind: kind.name(), source })
}

/// `header | g2^alpha | has_alpha u8 | alpha?`.
pub fn encode_master<G: PairingGroup>(group: &G, config: &SchemeConfig, master: &MasterSecret<G>) -> Vec<u8> {
    let mut out = Vec::new();
    header_of(group, config).write(FileKind::Master, &mut out);
    out.extend(group.serialize_source(master.g2_alpha()));
    match master.alpha() {
        Some(a) => {
            out.push(1);
            out.extend(group.serialize_scalar(a));
        }
        None => out.push(0),
    }
    out
}

pub fn decode_master<G: PairingGroup>(
    group: &G,
    params: &PublicParams<G>,
    bytes: &[u8],
) -> Result<MasterSecret<G>, FormatError> {
    let kind = FileKind::Master;
    let mut r = Reader::new(kind, bytes);
    let header = Header::read(kind, &mut r)?;
    header.expect(&header_of(group, params.config()), kind)?;
    let g2_alpha = r.source(group)?;
    let alpha = match r.u8()? {
        0 => None,
        1 => Some(r.scalar(group)?),
        _ => {
            return Err(FormatError::HeaderMismatch {
                kind: kind.name(),
                what: "oracle flag",
            })
        }
    };
    r.finish()?;
    // e(g2^alpha, g) must equal e(g1, g2).
    let consistent = group.pair(&g2_alpha, params.g()) == group.pair(params.g1(), params.g2())
        && alpha.as_ref().map_or(true, |a| group.exp(params.g(), a) == *params.g1());
    if !consistent {
        return Err(FormatError::HeaderMismatch {
            kind: kind.name(),
            what: "master secret",
        });
    }
    Ok(MasterSecret::from_parts(g2_alpha, alpha))
}

/// `header | id_len u32 | id bytes | d1 | d2`.
pub fn encode_key<G: PairingGroup>(
    group: &G,
    params: &PublicParams<G>,
    identity: &[u8],
    key: &PrivateKey<G>,
) -> Vec<u8> {
    let mut out = Vec::new();
    header_of(group, params.config()).write(FileKind::Key, &mut out);
    out.extend_from_slice(&(identity.len() as u32).to_be_bytes());
    out.extend_from_slice(identity);
    out.extend(group.serialize_source(key.d1()));
    out.extend(group.serialize_source(key.d2()));
    out
}

/// A parsed key file: the raw identity and the key. The caller is expected
/// to run the pairing check.
pub struct KeyFile<G: PairingGroup> {
    pub identity: Vec<u8>,
    pub key: PrivateKey<G>,
}

pub fn decode_key<G: PairingGroup>(
    group: &G,
    params: &PublicParams<G>,
    bytes: &[u8],
) -> Result<KeyFile<G>, FormatError> {
    let kind = FileKind::Key;
    let mut r = Reader::new(kind, bytes);
    let header = Header::read(kind, &mut r)?;
    header.expect(&header_of(group, params.config()), kind)?;
    let len = r.u32()? as usize;
    let identity = r.take(len)?.to_vec();
    let d1 = r.source(group)?;
    let d2 = r.source(group)?;
    r.finish()?;
    let v = EncodedIdentity::encode(&identity, params.config());
    Ok(KeyFile {
        identity,
        key: PrivateKey::from_parts(d1, d2, v),
    })
}

/// The KEM part of an envelope plus the DEM framing.
pub struct Envelope<G: PairingGroup> {
    pub kem: Ciphertext<G>,
    pub nonce: [u8; NONCE_LEN],
    /// DEM ciphertext with the tag appended.
    pub sealed: Vec<u8>,
    /// Everything before `sealed`; authenticated as associated data.
    pub aad: Vec<u8>,
}

/// Writes everything up to and including the payload length; this prefix
/// is the DEM's associated data.
pub fn envelope_prefix<G: PairingGroup>(
    group: &G,
    config: &SchemeConfig,
    kem: &Ciphertext<G>,
    nonce: &[u8; NONCE_LEN],
    sealed_len: usize,
) -> Vec<u8> {
    let mut out = Vec::new();
    header_of(group, config).write(FileKind::Envelope, &mut out);
    out.extend(group.serialize_target(kem.c1()));
    out.extend(group.serialize_source(kem.c2()));
    out.extend(group.serialize_source(kem.c3()));
    out.push(DEM_AES256_GCM);
    out.extend_from_slice(nonce);
    out.extend_from_slice(&(sealed_len as u64).to_be_bytes());
    out
}

pub fn decode_envelope<G: PairingGroup>(
    group: &G,
    params: &PublicParams<G>,
    bytes: &[u8],
) -> Result<Envelope<G>, FormatError> {
    let kind = FileKind::Envelope;
    let mut r = Reader::new(kind, bytes);
    let header = Header::read(kind, &mut r)?;
    header.expect(&header_of(group, params.config()), kind)?;
    let c1 = r.target(group)?;
    let c2 = r.source(group)?;
    let c3 = r.source(group)?;
    let dem = r.u8()?;
    if dem != DEM_AES256_GCM {
        return Err(FormatError::UnknownDem(dem));
    }
    let nonce: [u8; NONCE_LEN] = r.take(NONCE_LEN)?.try_into().unwrap();
    let len = r.u64()?;
    let remaining = (bytes.len() - r.position()) as u64;
    if len < TAG_LEN as u64 || len > remaining {
        return Err(FormatError::PayloadLength(len));
    }
    let aad = bytes[..r.position()].to_vec();
    let sealed = r.take(len as usize)?.to_vec();
    r.finish()?;
    Ok(Envelope {
        kem: Ciphertext::from_parts(c1, c2, c3),
        nonce,
        sealed,
        aad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nibe_core::bilinear::{Bls12Pairing, ToyPairing};
    use nibe_core::ibe::{encrypt, keygen, setup, setup_with_oracle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn toy_config() -> SchemeConfig {
        SchemeConfig::new(3, 4, HashId::Sha256).unwrap()
    }

    #[test]
    fn params_round_trip_byte_exact() {
        let grp = ToyPairing::default();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (pp, _) = setup(&grp, toy_config(), &mut rng).unwrap();
        let bytes = encode_params(&grp, &pp);
        assert_eq!(bytes.len(), HEADER_LEN + 7 * 8 + 8);
        let back = decode_params(&grp, &bytes).unwrap();
        assert_eq!(back, pp);
        assert_eq!(encode_params(&grp, &back), bytes);
    }

    #[test]
    fn curve_params_slot_count() {
        let grp = Bls12Pairing::new();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (pp, _) = setup(&grp, SchemeConfig::compact_160(), &mut rng).unwrap();
        let bytes = encode_params(&grp, &pp);
        assert_eq!(bytes.len(), HEADER_LEN + 9 * 144 + 576);
        let back = decode_params(&grp, &bytes).unwrap();
        assert_eq!(back.logical_element_count(), 9);
        assert_eq!(encode_params(&grp, &back), bytes);
    }

    #[test]
    fn distinct_errors_for_distinct_damage() {
        let grp = ToyPairing::default();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (pp, _) = setup(&grp, toy_config(), &mut rng).unwrap();
        let bytes = encode_params(&grp, &pp);

        let code = |b: &[u8]| decode_params(&grp, b).err().map(|e| e.code());
        assert_eq!(code(&bytes[..bytes.len() - 1]), Some("truncated"));
        assert_eq!(code(&bytes[..2]), Some("truncated"));
        let mut m = bytes.clone();
        m[0] = b'X';
        assert_eq!(code(&m), Some("bad-magic"));
        let mut m = bytes.clone();
        m[4] = 2;
        assert_eq!(code(&m), Some("unknown-version"));
        let mut m = bytes.clone();
        m[5] = 9;
        assert_eq!(code(&m), Some("unknown-backend"));
        let mut m = bytes.clone();
        m[10] = 7;
        assert_eq!(code(&m), Some("unknown-hash"));
        let mut m = bytes.clone();
        m.push(0);
        assert_eq!(code(&m), Some("trailing-bytes"));
        let mut m = bytes.clone();
        m[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&2000u64.to_be_bytes());
        assert_eq!(code(&m), Some("bad-element"));
        let mut m = bytes.clone();
        m[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&2u64.to_be_bytes());
        assert_eq!(code(&m), Some("inconsistent"));
        // A key file is not a params file.
        assert_eq!(code(b"NIBK\x01\x01\x00\x03\x00\x04\x01"), Some("bad-magic"));
    }

    #[test]
    fn key_and_master_round_trip() {
        let grp = ToyPairing::default();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let config = toy_config();
        let (pp, msk) = setup_with_oracle(&grp, config, &mut rng).unwrap();
        let mbytes = encode_master(&grp, &config, &msk);
        assert_eq!(decode_master(&grp, &pp, &mbytes).unwrap(), msk);

        let v = EncodedIdentity::encode(b"alice", &config);
        let key = keygen(&grp, &pp, &msk, &v, &mut rng).unwrap();
        let kbytes = encode_key(&grp, &pp, b"alice", &key);
        let parsed = decode_key(&grp, &pp, &kbytes).unwrap();
        assert_eq!(parsed.identity, b"alice");
        assert_eq!(parsed.key, key);
        assert_eq!(encode_key(&grp, &pp, &parsed.identity, &parsed.key), kbytes);

        let (other, _) = setup(&grp, config, &mut rng).unwrap();
        assert_eq!(decode_master(&grp, &other, &mbytes).unwrap_err().code(), "header-mismatch");
    }

    #[test]
    fn envelope_round_trip() {
        let grp = ToyPairing::default();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let config = toy_config();
        let (pp, _) = setup(&grp, config, &mut rng).unwrap();
        let v = EncodedIdentity::encode(b"bob", &config);
        let ct = encrypt(&grp, &pp, &v, &grp.target(77), &mut rng).unwrap();
        let nonce = [7u8; NONCE_LEN];
        let sealed = vec![0xAB; 40];
        let mut bytes = envelope_prefix(&grp, &config, &ct, &nonce, sealed.len());
        let aad_len = bytes.len();
        bytes.extend_from_slice(&sealed);
        let env = decode_envelope(&grp, &pp, &bytes).unwrap();
        assert_eq!(env.kem, ct);
        assert_eq!(env.nonce, nonce);
        assert_eq!(env.sealed, sealed);
        assert_eq!(env.aad, bytes[..aad_len]);

        let mut m = bytes.clone();
        m[aad_len - 21] = 0x02;
        assert_eq!(decode_envelope(&grp, &pp, &m).err().unwrap().code(), "unknown-dem");
        assert_eq!(
            decode_envelope(&grp, &pp, &bytes[..bytes.len() - 1]).err().unwrap().code(),
            "bad-length"
        );
    }
}
