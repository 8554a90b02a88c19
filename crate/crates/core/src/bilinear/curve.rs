//! BLS12-381 backend presenting a symmetric pairing interface.
//!
//! BLS12-381 has an asymmetric pairing `G1 x G2 -> GT`. A logical source
//! element `g^x` is stored as the pair `(x * P1, x * P2)` where `P1`, `P2` are
//! the standard generators, and `e(a, b)` pairs the first component of `a`
//! with the second component of `b`. Because both components carry the same
//! exponent, `e(g^x, g^y) = e(P1, P2)^(xy)` and the map is symmetric.
//!
//! Wire format: compressed G1 (48 bytes) followed by compressed G2 (96
//! bytes). Decoding rejects off-curve and out-of-subgroup points, non-canonical
//! encodings, and pairs whose components do not share an exponent.

use ark_bls12_381::{Bls12_381, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{CurveGroup, Group, VariableBaseMSM};
use ark_ff::{BigInteger, Field, PrimeField, UniformRand, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize, Compress, Validate};
use num_bigint::BigUint;
use rand::RngCore;

use super::{BackendId, GroupDescriptor, GroupError, PairingGroup};

const G1_LEN: usize = 48;
const G2_LEN: usize = 96;
const GT_LEN: usize = 576;
const FR_LEN: usize = 32;

pub type CurveTarget = PairingOutput<Bls12_381>;

/// A logical element of the symmetric group, mirrored into G1 and G2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MirroredPoint {
    g1: G1Projective,
    g2: G2Projective,
}

impl MirroredPoint {
    pub fn g1(&self) -> G1Projective {
        self.g1
    }

    pub fn g2(&self) -> G2Projective {
        self.g2
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bls12Pairing {
    descriptor: GroupDescriptor,
}

impl Default for Bls12Pairing {
    fn default() -> Self {
        Self::new()
    }
}

impl Bls12Pairing {
    pub fn new() -> Self {
        let order = BigUint::from_bytes_le(&Fr::MODULUS.to_bytes_le());
        Bls12Pairing {
            descriptor: GroupDescriptor {
                backend_id: BackendId::Curve,
                order,
                source_len: G1_LEN + G2_LEN,
                target_len: GT_LEN,
                scalar_len: FR_LEN,
            },
        }
    }

    /// Byte length of one compressed G1 point, the size a logical element
    /// would have on a curve with a native symmetric pairing of this size.
    pub const fn logical_element_len() -> usize {
        G1_LEN
    }
}

fn check_len(bytes: &[u8], expected: usize) -> Result<(), GroupError> {
    if bytes.len() != expected {
        return Err(GroupError::WrongLength {
            expected,
            actual: bytes.len(),
        });
    }
    Ok(())
}

fn compressed<T: CanonicalSerialize>(x: &T) -> Vec<u8> {
    let mut out = Vec::with_capacity(x.compressed_size());
    x.serialize_compressed(&mut out)
        .expect("serializing into a Vec cannot fail");
    out
}

fn decode_canonical<T: CanonicalDeserialize + CanonicalSerialize>(
    bytes: &[u8],
) -> Result<T, GroupError> {
    let value = T::deserialize_with_mode(bytes, Compress::Yes, Validate::Yes)
        .map_err(|_| GroupError::InvalidPoint)?;
    if compressed(&value) != bytes {
        return Err(GroupError::NonCanonical);
    }
    Ok(value)
}

impl PairingGroup for Bls12Pairing {
    type Scalar = Fr;
    type Source = MirroredPoint;
    type Target = CurveTarget;

    fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Fr {
        // Fr::rand masks to the modulus bit length and rejects, so it is uniform.
        Fr::rand(rng)
    }

    fn scalar_from_u64(&self, v: u64) -> Fr {
        Fr::from(v)
    }

    fn scalar_from_i128(&self, v: i128) -> Fr {
        Fr::from(v)
    }

    fn scalar_add(&self, a: &Fr, b: &Fr) -> Fr {
        *a + b
    }

    fn scalar_mul(&self, a: &Fr, b: &Fr) -> Fr {
        *a * b
    }

    fn scalar_neg(&self, a: &Fr) -> Fr {
        -*a
    }

    fn scalar_inv(&self, a: &Fr) -> Option<Fr> {
        a.inverse()
    }

    fn scalar_is_zero(&self, a: &Fr) -> bool {
        a.is_zero()
    }

    fn generator(&self) -> MirroredPoint {
        MirroredPoint {
            g1: G1Projective::generator(),
            g2: G2Projective::generator(),
        }
    }

    fn identity(&self) -> MirroredPoint {
        MirroredPoint {
            g1: G1Projective::zero(),
            g2: G2Projective::zero(),
        }
    }

    fn exp(&self, base: &MirroredPoint, e: &Fr) -> MirroredPoint {
        MirroredPoint {
            g1: base.g1 * e,
            g2: base.g2 * e,
        }
    }

    fn multi_exp(&self, bases: &[MirroredPoint], exps: &[u64]) -> MirroredPoint {
        assert_eq!(bases.len(), exps.len(), "multi_exp length mismatch");
        let scalars: Vec<Fr> = exps.iter().map(|&e| Fr::from(e)).collect();
        let g1s: Vec<G1Projective> = bases.iter().map(|b| b.g1).collect();
        let g2s: Vec<G2Projective> = bases.iter().map(|b| b.g2).collect();
        MirroredPoint {
            g1: G1Projective::msm_unchecked(&G1Projective::normalize_batch(&g1s), &scalars),
            g2: G2Projective::msm_unchecked(&G2Projective::normalize_batch(&g2s), &scalars),
        }
    }

    fn mul(&self, a: &MirroredPoint, b: &MirroredPoint) -> MirroredPoint {
        MirroredPoint {
            g1: a.g1 + b.g1,
            g2: a.g2 + b.g2,
        }
    }

    fn inv(&self, a: &MirroredPoint) -> MirroredPoint {
        MirroredPoint {
            g1: -a.g1,
            g2: -a.g2,
        }
    }

    fn pair(&self, a: &MirroredPoint, b: &MirroredPoint) -> CurveTarget {
        Bls12_381::pairing(a.g1, b.g2)
    }

    fn pair_product(&self, pairs: &[(&MirroredPoint, &MirroredPoint)]) -> CurveTarget {
        let lhs: Vec<G1Affine> = pairs.iter().map(|(a, _)| a.g1.into_affine()).collect();
        let rhs: Vec<G2Affine> = pairs.iter().map(|(_, b)| b.g2.into_affine()).collect();
        Bls12_381::multi_pairing(lhs, rhs)
    }

    fn target_identity(&self) -> CurveTarget {
        CurveTarget::zero()
    }

    // PairingOutput is written additively.
    fn mul_target(&self, a: &CurveTarget, b: &CurveTarget) -> CurveTarget {
        *a + b
    }

    fn exp_target(&self, base: &CurveTarget, e: &Fr) -> CurveTarget {
        *base * e
    }

    fn inv_target(&self, a: &CurveTarget) -> CurveTarget {
        -*a
    }

    fn serialize_scalar(&self, s: &Fr) -> Vec<u8> {
        compressed(s)
    }

    fn deserialize_scalar(&self, bytes: &[u8]) -> Result<Fr, GroupError> {
        check_len(bytes, FR_LEN)?;
        decode_canonical(bytes).map_err(|_| GroupError::NonCanonical)
    }

    fn serialize_source(&self, x: &MirroredPoint) -> Vec<u8> {
        let mut out = compressed(&x.g1.into_affine());
        out.extend_from_slice(&compressed(&x.g2.into_affine()));
        out
    }

    fn deserialize_source(&self, bytes: &[u8]) -> Result<MirroredPoint, GroupError> {
        check_len(bytes, G1_LEN + G2_LEN)?;
        let a1: G1Affine = decode_canonical(&bytes[..G1_LEN])?;
        let a2: G2Affine = decode_canonical(&bytes[G1_LEN..])?;
        // e(a1, P2) == e(P1, a2) iff both components carry the same exponent.
        let check = Bls12_381::multi_pairing(
            [a1, -G1Affine::from(G1Projective::generator())],
            [G2Affine::from(G2Projective::generator()), a2],
        );
        if !check.is_zero() {
            return Err(GroupError::InconsistentMirror);
        }
        Ok(MirroredPoint {
            g1: a1.into(),
            g2: a2.into(),
        })
    }

    fn serialize_target(&self, x: &CurveTarget) -> Vec<u8> {
        compressed(x)
    }

    fn deserialize_target(&self, bytes: &[u8]) -> Result<CurveTarget, GroupError> {
        check_len(bytes, GT_LEN)?;
        decode_canonical(bytes)
    }
}
