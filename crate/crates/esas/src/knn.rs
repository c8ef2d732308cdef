//! Secure inner-product encryption for ranked search (the KNN-SE layer).
//!
//! A document vector is extended with a constant 1, split into two random
//! summand vectors steered by the secret bit vector S, and transformed by
//! M1^T / M2^T. A query vector is extended to (a*Q, r'), split with the
//! complementary rule, and transformed by M1^{-1} / M2^{-1}. The dot
//! product of index and trapdoor then collapses to a*(Vc . Q) + r': the
//! matrices cancel and the split halves recombine, so scores preserve the
//! plaintext ranking while both vectors stay hidden.
//!
//! All arithmetic is over exact rationals, making the score identity an
//! exact equality and the ranking bit-reproducible.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{CryptoRng, Rng};

use crate::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::matrix::{dot, RationalMatrix};

/// Magnitude bound for random integers: split summands, the query scale a
/// and the query offset r' are all drawn from [-2^20, 2^20] (a from
/// [1, 2^20]: a negative scale would invert the ranking).
pub const RANDOM_MAGNITUDE: i64 = 1 << 20;

/// Magnitude bound for secret matrix entries. Kept smaller than the
/// summand range so exact inverses stay cheap at high dimensions.
pub const MATRIX_MAGNITUDE: i64 = 1 << 10;

/// Secret key for index and trapdoor encryption: the split vector S and
/// the invertible matrix pair, with inverses cached exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OwnerKey {
    dimension: usize,
    split: Vec<bool>,
    m1: RationalMatrix,
    m2: RationalMatrix,
    m1_inv: RationalMatrix,
    m2_inv: RationalMatrix,
}

impl OwnerKey {
    /// Vocabulary dimension n; vectors and matrices are (n+1)-sized.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn split_bits(&self) -> &[bool] {
        &self.split
    }

    pub fn matrices(&self) -> (&RationalMatrix, &RationalMatrix) {
        (&self.m1, &self.m2)
    }

    pub fn inverses(&self) -> (&RationalMatrix, &RationalMatrix) {
        (&self.m1_inv, &self.m2_inv)
    }

    /// Assembles a key from explicit parts; parts must already be
    /// consistent (used by tests for degenerate keys and by the decoder).
    pub fn from_parts(
        dimension: usize,
        split: Vec<bool>,
        m1: RationalMatrix,
        m2: RationalMatrix,
    ) -> Result<OwnerKey> {
        if split.len() != dimension + 1 || m1.size() != dimension + 1 || m2.size() != dimension + 1
        {
            return Err(Error::DimensionMismatch {
                expected: dimension + 1,
                actual: split.len(),
            });
        }
        let m1_inv = m1
            .inverse()
            .ok_or_else(|| Error::InvalidParameter("m1 is singular".into()))?;
        let m2_inv = m2
            .inverse()
            .ok_or_else(|| Error::InvalidParameter("m2 is singular".into()))?;
        Ok(OwnerKey {
            dimension,
            split,
            m1,
            m2,
            m1_inv,
            m2_inv,
        })
    }
}

/// Plaintext document or query vector plus the vocabulary version it was
/// built against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainVector {
    pub entries: Vec<BigRational>,
    pub vocab_version: u64,
}

impl PlainVector {
    pub fn new(entries: Vec<BigRational>, vocab_version: u64) -> Self {
        PlainVector {
            entries,
            vocab_version,
        }
    }

    pub fn zero(dimension: usize, vocab_version: u64) -> Self {
        PlainVector {
            entries: vec![BigRational::zero(); dimension],
            vocab_version,
        }
    }

    pub fn dimension(&self) -> usize {
        self.entries.len()
    }
}

/// Encrypted index vector pair {M1^T Vc', M2^T Vc''}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecureIndex {
    pub half1: Vec<BigRational>,
    pub half2: Vec<BigRational>,
    pub vocab_version: u64,
}

/// Encrypted query vector pair {M1^{-1} Q', M2^{-1} Q''}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trapdoor {
    pub half1: Vec<BigRational>,
    pub half2: Vec<BigRational>,
    pub vocab_version: u64,
}

fn rand_int<R: Rng + CryptoRng>(rng: &mut R) -> BigRational {
    BigRational::from(BigInt::from(
        rng.gen_range(-RANDOM_MAGNITUDE..=RANDOM_MAGNITUDE),
    ))
}

/// Generates the KNN-SE secret: random split bits and two invertible
/// matrices (resampled until the determinant is nonzero).
pub fn owner_keygen<R: Rng + CryptoRng>(dimension: usize, rng: &mut R) -> Result<OwnerKey> {
    if dimension == 0 {
        return Err(Error::InvalidParameter(
            "vocabulary dimension must be at least 1".into(),
        ));
    }
    let split = (0..dimension + 1).map(|_| rng.gen::<bool>()).collect();
    let (m1, m1_inv) = random_invertible(dimension + 1, rng);
    let (m2, m2_inv) = random_invertible(dimension + 1, rng);
    Ok(OwnerKey {
        dimension,
        split,
        m1,
        m2,
        m1_inv,
        m2_inv,
    })
}

/// Samples until the matrix inverts (a zero determinant surfaces as a
/// failed inversion; the expected number of resamples is negligible).
fn random_invertible<R: Rng + CryptoRng>(
    size: usize,
    rng: &mut R,
) -> (RationalMatrix, RationalMatrix) {
    loop {
        let candidate = RationalMatrix::random(size, MATRIX_MAGNITUDE, rng);
        if let Some(inverse) = candidate.inverse() {
            return (candidate, inverse);
        }
    }
}

/// Extends a document vector with the constant last coordinate 1.
pub fn extend_index_vector(vc: &PlainVector) -> Vec<BigRational> {
    let mut out = vc.entries.clone();
    out.push(BigRational::one());
    out
}

/// Index-side split: where S[t] = 0 both halves copy the coordinate;
/// where S[t] = 1 the halves are random summands of it.
pub fn split_index_vector<R: Rng + CryptoRng>(
    vstar: &[BigRational],
    split: &[bool],
    rng: &mut R,
) -> (Vec<BigRational>, Vec<BigRational>) {
    assert_eq!(vstar.len(), split.len());
    let mut first = Vec::with_capacity(vstar.len());
    let mut second = Vec::with_capacity(vstar.len());
    for (value, &bit) in vstar.iter().zip(split) {
        if bit {
            let r = rand_int(rng);
            first.push(r.clone());
            second.push(value - r);
        } else {
            first.push(value.clone());
            second.push(value.clone());
        }
    }
    (first, second)
}

/// Query-side split: the complementary rule to [`split_index_vector`]
/// (S[t] = 1 copies, S[t] = 0 sums).
pub fn split_query_vector<R: Rng + CryptoRng>(
    qstar: &[BigRational],
    split: &[bool],
    rng: &mut R,
) -> (Vec<BigRational>, Vec<BigRational>) {
    assert_eq!(qstar.len(), split.len());
    let mut first = Vec::with_capacity(qstar.len());
    let mut second = Vec::with_capacity(qstar.len());
    for (value, &bit) in qstar.iter().zip(split) {
        if bit {
            first.push(value.clone());
            second.push(value.clone());
        } else {
            let r = rand_int(rng);
            first.push(r.clone());
            second.push(value - r);
        }
    }
    (first, second)
}

/// Encrypts a document vector: extend, split, transform.
pub fn encrypt_index<R: Rng + CryptoRng>(
    okey: &OwnerKey,
    vc: &PlainVector,
    rng: &mut R,
) -> Result<SecureIndex> {
    if vc.dimension() != okey.dimension {
        return Err(Error::DimensionMismatch {
            expected: okey.dimension,
            actual: vc.dimension(),
        });
    }
    let vstar = extend_index_vector(vc);
    let (first, second) = split_index_vector(&vstar, &okey.split, rng);
    Ok(SecureIndex {
        half1: okey.m1.transpose_mul_vec(&first),
        half2: okey.m2.transpose_mul_vec(&second),
        vocab_version: vc.vocab_version,
    })
}

/// Extends a query vector to (a*Q, r').
pub fn extend_query_vector(
    q: &PlainVector,
    a: &BigRational,
    r_prime: &BigRational,
) -> Result<Vec<BigRational>> {
    if !a.is_positive() {
        return Err(Error::InvalidParameter(
            "query scale a must be positive".into(),
        ));
    }
    if r_prime.is_zero() {
        return Err(Error::InvalidParameter(
            "query offset r' cannot be 0".into(),
        ));
    }
    let mut out: Vec<BigRational> = q.entries.iter().map(|v| v * a).collect();
    out.push(r_prime.clone());
    Ok(out)
}

/// Builds a trapdoor for a query vector with fresh randomizers.
///
/// The returned (a, r') are for test oracles; they are not part of the
/// trapdoor and are never serialized.
pub fn gen_trapdoor<R: Rng + CryptoRng>(
    okey: &OwnerKey,
    q: &PlainVector,
    rng: &mut R,
) -> Result<(Trapdoor, BigRational, BigRational)> {
    if q.dimension() != okey.dimension {
        return Err(Error::DimensionMismatch {
            expected: okey.dimension,
            actual: q.dimension(),
        });
    }
    let a = BigRational::from(BigInt::from(rng.gen_range(1..=RANDOM_MAGNITUDE)));
    let r_prime = loop {
        let candidate = rand_int(rng);
        if !candidate.is_zero() {
            break candidate;
        }
    };
    let qstar = extend_query_vector(q, &a, &r_prime)?;
    let (first, second) = split_query_vector(&qstar, &okey.split, rng);
    let trapdoor = Trapdoor {
        half1: okey.m1_inv.mul_vec(&first),
        half2: okey.m2_inv.mul_vec(&second),
        vocab_version: q.vocab_version,
    };
    Ok((trapdoor, a, r_prime))
}

/// Encrypted relevance score: Ic . Td = a*(Vc . Q) + r' exactly.
pub fn score(ic: &SecureIndex, td: &Trapdoor) -> Result<BigRational> {
    if ic.half1.len() != td.half1.len() || ic.half2.len() != td.half2.len() {
        return Err(Error::DimensionMismatch {
            expected: td.half1.len(),
            actual: ic.half1.len(),
        });
    }
    Ok(dot(&ic.half1, &td.half1) + dot(&ic.half2, &td.half2))
}

// --- serialization ---

fn put_rational(w: &mut ByteWriter, v: &BigRational) {
    w.put_str(&v.numer().to_string());
    w.put_str(&v.denom().to_string());
}

fn get_rational(r: &mut ByteReader) -> Result<BigRational> {
    let numerator = r.get_str()?;
    let denominator = r.get_str()?;
    crate::matrix::rational_from_strings(&numerator, &denominator)
        .ok_or_else(|| Error::Decode(format!("invalid rational {numerator}/{denominator}")))
}

fn put_rational_vec(w: &mut ByteWriter, v: &[BigRational]) {
    w.put_u32(v.len() as u32);
    for entry in v {
        put_rational(w, entry);
    }
}

fn get_rational_vec(r: &mut ByteReader) -> Result<Vec<BigRational>> {
    let count = r.get_u32()? as usize;
    (0..count).map(|_| get_rational(r)).collect()
}

fn put_matrix(w: &mut ByteWriter, m: &RationalMatrix) {
    w.put_u32(m.size() as u32);
    put_rational_vec(w, m.entries());
}

fn get_matrix(r: &mut ByteReader) -> Result<RationalMatrix> {
    let size = r.get_u32()? as usize;
    let entries = get_rational_vec(r)?;
    if entries.len() != size * size {
        return Err(Error::Decode("matrix entry count mismatch".into()));
    }
    Ok(RationalMatrix::from_entries(size, entries))
}

impl OwnerKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.put_u64(self.dimension as u64);
        w.put_u32(self.split.len() as u32);
        for &bit in &self.split {
            w.put_u8(bit as u8);
        }
        put_matrix(&mut w, &self.m1);
        put_matrix(&mut w, &self.m2);
        put_matrix(&mut w, &self.m1_inv);
        put_matrix(&mut w, &self.m2_inv);
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        let dimension = r.get_u64()? as usize;
        let bit_count = r.get_u32()? as usize;
        let split = (0..bit_count)
            .map(|_| Ok(r.get_u8()? != 0))
            .collect::<Result<Vec<bool>>>()?;
        let m1 = get_matrix(&mut r)?;
        let m2 = get_matrix(&mut r)?;
        let m1_inv = get_matrix(&mut r)?;
        let m2_inv = get_matrix(&mut r)?;
        r.finish()?;
        if split.len() != dimension + 1 {
            return Err(Error::Decode("split vector length mismatch".into()));
        }
        Ok(OwnerKey {
            dimension,
            split,
            m1,
            m2,
            m1_inv,
            m2_inv,
        })
    }
}

fn vector_pair_to_bytes(
    half1: &[BigRational],
    half2: &[BigRational],
    vocab_version: u64,
) -> Vec<u8> {
    let mut w = ByteWriter::new();
    w.put_u64(vocab_version);
    put_rational_vec(&mut w, half1);
    put_rational_vec(&mut w, half2);
    w.into_bytes()
}

fn vector_pair_from_bytes(bytes: &[u8]) -> Result<(Vec<BigRational>, Vec<BigRational>, u64)> {
    let mut r = ByteReader::new(bytes);
    let vocab_version = r.get_u64()?;
    let half1 = get_rational_vec(&mut r)?;
    let half2 = get_rational_vec(&mut r)?;
    r.finish()?;
    if half1.len() != half2.len() {
        return Err(Error::Decode("vector halves differ in length".into()));
    }
    Ok((half1, half2, vocab_version))
}

impl SecureIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        vector_pair_to_bytes(&self.half1, &self.half2, self.vocab_version)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (half1, half2, vocab_version) = vector_pair_from_bytes(bytes)?;
        Ok(SecureIndex {
            half1,
            half2,
            vocab_version,
        })
    }
}

impl Trapdoor {
    pub fn to_bytes(&self) -> Vec<u8> {
        vector_pair_to_bytes(&self.half1, &self.half2, self.vocab_version)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (half1, half2, vocab_version) = vector_pair_from_bytes(bytes)?;
        Ok(Trapdoor {
            half1,
            half2,
            vocab_version,
        })
    }
}
