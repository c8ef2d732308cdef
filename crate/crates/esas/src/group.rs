//! Pairing-group substrate: scalar field, source group, target group.
//!
//! The protocol is written for a symmetric pairing e: G1 x G1 -> G2. No
//! practical curve offers one at 128-bit security, so [`G1`] is a facade
//! over BLS12-381 that carries both source-group representations of each
//! logical element. Elements built by exponentiating the generator have the
//! same discrete log in both halves; hashed elements carry an independent
//! point in each half, and the scheme's equations are evaluated with a
//! fixed argument orientation so that the halves always cancel.
//!
//! [`Gt`] wraps the pairing output group (the scheme's target "G2").

use ark_bls12_381::{g1, g2, Bls12_381, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{CurveGroup, PrimeGroup};
use ark_ff::field_hashers::DefaultFieldHasher;
use ark_ff::{AdditiveGroup, Field, PrimeField, UniformRand, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use rand::{CryptoRng, Rng};
use sha2::Sha256;

use crate::error::{Error, Result};

const DST_G1: &[u8] = b"esas/v1/hash-to-group/g1";
const DST_G2: &[u8] = b"esas/v1/hash-to-group/g2";

/// Element of the scalar field Z_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scalar(Fr);

impl Scalar {
    pub const ZERO: Scalar = Scalar(Fr::ZERO);
    pub const ONE: Scalar = Scalar(Fr::ONE);

    pub fn from_u64(v: u64) -> Self {
        Scalar(Fr::from(v))
    }

    /// Uniform in [1, p-1]; zero draws are rejected because a zero exponent
    /// degenerates every equation of the scheme.
    pub fn rand_nonzero<R: Rng + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let v = Fr::rand(rng);
            if !v.is_zero() {
                return Scalar(v);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        Scalar(self.0 + other.0)
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        Scalar(self.0 - other.0)
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        Scalar(self.0 * other.0)
    }

    pub fn neg(&self) -> Scalar {
        Scalar(-self.0)
    }

    pub fn inverse(&self) -> Option<Scalar> {
        self.0.inverse().map(Scalar)
    }
}

/// Logical source-group element (the scheme's G1), carried in both
/// BLS12-381 source groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct G1 {
    left: G1Projective,
    right: G2Projective,
}

impl G1 {
    pub fn generator() -> Self {
        G1 {
            left: G1Projective::generator(),
            right: G2Projective::generator(),
        }
    }

    pub fn identity() -> Self {
        G1 {
            left: G1Projective::zero(),
            right: G2Projective::zero(),
        }
    }

    /// Exponentiation g^x (scalar multiplication of both halves).
    pub fn pow(&self, exp: &Scalar) -> G1 {
        G1 {
            left: self.left * exp.0,
            right: self.right * exp.0,
        }
    }

    /// Group operation (multiplicative notation).
    pub fn mul(&self, other: &G1) -> G1 {
        G1 {
            left: self.left + other.left,
            right: self.right + other.right,
        }
    }

    pub fn inverse(&self) -> G1 {
        G1 {
            left: -self.left,
            right: -self.right,
        }
    }
}

/// Target-group element (the scheme's G2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gt(PairingOutput<Bls12_381>);

impl Gt {
    pub fn identity() -> Self {
        Gt(PairingOutput::zero())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_zero()
    }

    pub fn pow(&self, exp: &Scalar) -> Gt {
        Gt(self.0 * exp.0)
    }

    pub fn mul(&self, other: &Gt) -> Gt {
        Gt(self.0 + other.0)
    }

    pub fn div(&self, other: &Gt) -> Gt {
        Gt(self.0 - other.0)
    }

    pub fn inverse(&self) -> Gt {
        Gt(-self.0)
    }
}

/// Handle to the configured pairing group.
///
/// Deterministic per security level; all state is the fixed curve choice,
/// so the context is freely copyable and thread-safe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupContext {
    security_level: u32,
}

impl GroupContext {
    pub fn security_level(&self) -> u32 {
        self.security_level
    }

    pub fn generator(&self) -> G1 {
        G1::generator()
    }

    /// Little-endian bytes of the scalar-field modulus p.
    pub fn modulus_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        Fr::MODULUS
            .serialize_compressed(&mut out)
            .expect("modulus serializes");
        out
    }

    /// The bilinear map e(a, b), evaluated as pairing(a.left, b.right).
    pub fn pair(&self, a: &G1, b: &G1) -> Gt {
        Gt(Bls12_381::pairing(a.left, b.right))
    }

    /// Product of pairings: prod_i e(a_i, b_i). One Miller loop.
    pub fn pair_product(&self, pairs: &[(G1, G1)]) -> Gt {
        let lefts: Vec<G1Affine> = pairs.iter().map(|(a, _)| a.left.into_affine()).collect();
        let rights: Vec<G2Affine> = pairs.iter().map(|(_, b)| b.right.into_affine()).collect();
        Gt(Bls12_381::multi_pairing(lefts, rights))
    }

    /// Hashes an arbitrary label into the source group. Each half is an
    /// independent domain-separated hash-to-curve point.
    pub fn hash_to_g1(&self, label: &[u8]) -> G1 {
        let h1 = MapToCurveBasedHasher::<
            G1Projective,
            DefaultFieldHasher<Sha256, 128>,
            WBMap<g1::Config>,
        >::new(DST_G1)
        .expect("g1 hasher");
        let h2 = MapToCurveBasedHasher::<
            G2Projective,
            DefaultFieldHasher<Sha256, 128>,
            WBMap<g2::Config>,
        >::new(DST_G2)
        .expect("g2 hasher");
        G1 {
            left: h1.hash(label).expect("hash to g1").into(),
            right: h2.hash(label).expect("hash to g2").into(),
        }
    }

    /// Uniform random target-group element, never the identity.
    pub fn rand_gt<R: Rng + CryptoRng>(&self, rng: &mut R) -> Gt {
        let g = self.generator();
        self.pair(&g, &g).pow(&Scalar::rand_nonzero(rng))
    }
}

/// Returns the group context for a supported security level.
///
/// Only the 128-bit level (BLS12-381) is configured.
pub fn setup_group(security_level: u32) -> Result<GroupContext> {
    if security_level != 128 {
        return Err(Error::UnsupportedSecurityLevel(security_level));
    }
    Ok(GroupContext { security_level })
}

/// Canonical byte encoding shared by every serializable element type.
pub trait CanonicalEncode: Sized {
    fn to_canonical_bytes(&self) -> Vec<u8>;
    fn from_canonical_bytes(bytes: &[u8]) -> Result<Self>;
}

impl CanonicalEncode for Scalar {
    fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32);
        self.0
            .serialize_compressed(&mut out)
            .expect("scalar serializes");
        out
    }

    fn from_canonical_bytes(bytes: &[u8]) -> Result<Self> {
        Fr::deserialize_compressed(bytes)
            .map(Scalar)
            .map_err(|e| Error::Decode(format!("scalar: {e}")))
    }
}

impl CanonicalEncode for G1 {
    fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(144);
        self.left
            .into_affine()
            .serialize_compressed(&mut out)
            .expect("g1 half serializes");
        self.right
            .into_affine()
            .serialize_compressed(&mut out)
            .expect("g2 half serializes");
        out
    }

    fn from_canonical_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != 144 {
            return Err(Error::Decode(format!(
                "source element must be 144 bytes, got {}",
                bytes.len()
            )));
        }
        let left = G1Affine::deserialize_compressed(&bytes[..48])
            .map_err(|e| Error::Decode(format!("g1 half: {e}")))?;
        let right = G2Affine::deserialize_compressed(&bytes[48..])
            .map_err(|e| Error::Decode(format!("g2 half: {e}")))?;
        Ok(G1 {
            left: left.into(),
            right: right.into(),
        })
    }
}

impl CanonicalEncode for Gt {
    fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(576);
        self.0
            .serialize_compressed(&mut out)
            .expect("gt serializes");
        out
    }

    fn from_canonical_bytes(bytes: &[u8]) -> Result<Self> {
        PairingOutput::deserialize_compressed(bytes)
            .map(Gt)
            .map_err(|e| Error::Decode(format!("gt: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(0x45534153)
    }

    #[test]
    fn setup_accepts_128_only() {
        assert!(setup_group(128).is_ok());
        assert!(matches!(
            setup_group(9999),
            Err(Error::UnsupportedSecurityLevel(9999))
        ));
        assert!(setup_group(0).is_err());
    }

    #[test]
    fn setup_is_deterministic() {
        let a = setup_group(128).unwrap();
        let b = setup_group(128).unwrap();
        assert_eq!(a.modulus_bytes(), b.modulus_bytes());
        assert_eq!(
            a.generator().to_canonical_bytes(),
            b.generator().to_canonical_bytes()
        );
    }

    #[test]
    fn modulus_is_the_bls12_381_scalar_field_order() {
        let le = setup_group(128).unwrap().modulus_bytes();
        let hex: String = le.iter().rev().map(|b| format!("{b:02x}")).collect();
        assert_eq!(
            hex,
            "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001"
        );
    }

    #[test]
    fn bilinearity_on_random_scalars() {
        let ctx = setup_group(128).unwrap();
        let g = ctx.generator();
        let base = ctx.pair(&g, &g);
        let mut rng = rng();
        for _ in 0..100 {
            let x = Scalar::rand_nonzero(&mut rng);
            let y = Scalar::rand_nonzero(&mut rng);
            assert_eq!(ctx.pair(&g.pow(&x), &g.pow(&y)), base.pow(&x.mul(&y)));
        }
    }

    #[test]
    fn pairing_is_non_degenerate() {
        let ctx = setup_group(128).unwrap();
        let g = ctx.generator();
        assert!(!ctx.pair(&g, &g).is_identity());
    }

    #[test]
    fn pair_product_matches_individual_pairings() {
        let ctx = setup_group(128).unwrap();
        let g = ctx.generator();
        let mut rng = rng();
        let x = Scalar::rand_nonzero(&mut rng);
        let y = Scalar::rand_nonzero(&mut rng);
        let lhs = ctx.pair_product(&[(g.pow(&x), g), (g, g.pow(&y))]);
        let rhs = ctx.pair(&g.pow(&x), &g).mul(&ctx.pair(&g, &g.pow(&y)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn hash_to_g1_is_deterministic_and_total() {
        let ctx = setup_group(128).unwrap();
        let a = ctx.hash_to_g1(b"doctor");
        let b = ctx.hash_to_g1(b"doctor");
        assert_eq!(a, b);
        // distinct labels land on distinct elements
        let c = ctx.hash_to_g1(b"nurse");
        assert_ne!(a, c);
        // empty label is a valid input
        let e = ctx.hash_to_g1(b"");
        assert_ne!(e, G1::identity());
    }

    #[test]
    fn scalar_field_arithmetic() {
        let mut rng = rng();
        let x = Scalar::rand_nonzero(&mut rng);
        let xi = x.inverse().unwrap();
        assert_eq!(x.mul(&xi), Scalar::ONE);
        assert_eq!(x.sub(&x), Scalar::ZERO);
        assert_eq!(x.add(&x.neg()), Scalar::ZERO);
        assert!(Scalar::ZERO.inverse().is_none());
    }

    #[test]
    fn encodings_round_trip() {
        let ctx = setup_group(128).unwrap();
        let mut rng = rng();
        let x = Scalar::rand_nonzero(&mut rng);
        let el = ctx.hash_to_g1(b"roundtrip").pow(&x);
        let bytes = el.to_canonical_bytes();
        let back = G1::from_canonical_bytes(&bytes).unwrap();
        assert_eq!(el, back);
        assert_eq!(back.to_canonical_bytes(), bytes);

        let t = ctx.rand_gt(&mut rng);
        let tb = t.to_canonical_bytes();
        let t_back = Gt::from_canonical_bytes(&tb).unwrap();
        assert_eq!(t_back, t);
        assert_eq!(t_back.to_canonical_bytes(), tb);

        let sb = x.to_canonical_bytes();
        let x_back = Scalar::from_canonical_bytes(&sb).unwrap();
        assert_eq!(x_back, x);
        assert_eq!(x_back.to_canonical_bytes(), sb);
    }

    #[test]
    fn invalid_encodings_are_rejected() {
        assert!(G1::from_canonical_bytes(&[0u8; 10]).is_err());
        assert!(G1::from_canonical_bytes(&[0xffu8; 144]).is_err());
        assert!(Gt::from_canonical_bytes(&[0xffu8; 576]).is_err());
    }
}
