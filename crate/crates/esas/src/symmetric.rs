//! Symmetric layer: key derivation from group elements and authenticated
//! encryption of document payloads.
//!
//! Keys are derived with HKDF-SHA256 (extract-then-expand) over the
//! canonical encoding of a group element, under fixed protocol labels.
//! Payloads are sealed with XChaCha20-Poly1305; the 24-byte nonce is drawn
//! from the caller's randomness source and prepended to the ciphertext.

use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{XChaCha20Poly1305, XNonce};
use hkdf::Hkdf;
use rand::{CryptoRng, Rng};
use sha2::Sha256;

use crate::error::{Error, Result};
use crate::group::CanonicalEncode;

pub const KEY_LEN: usize = 32;
const NONCE_LEN: usize = 24;
const KDF_SALT: &[u8] = b"esas/v1/kdf-salt";
const KDF_INFO: &[u8] = b"esas/v1/document-key";
const AEAD_AAD: &[u8] = b"esas/v1/document";

/// 256-bit symmetric key.
#[derive(Clone, PartialEq, Eq)]
pub struct SymmetricKey([u8; KEY_LEN]);

impl SymmetricKey {
    pub fn from_bytes(bytes: [u8; KEY_LEN]) -> Self {
        SymmetricKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; KEY_LEN] {
        &self.0
    }
}

impl std::fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // never print key material
        f.write_str("SymmetricKey(..)")
    }
}

/// Derives the symmetric key H1(element) from any canonically encodable
/// group element.
pub fn kdf_key<E: CanonicalEncode>(element: &E) -> SymmetricKey {
    let hk = Hkdf::<Sha256>::new(Some(KDF_SALT), &element.to_canonical_bytes());
    let mut okm = [0u8; KEY_LEN];
    hk.expand(KDF_INFO, &mut okm)
        .expect("32 bytes is a valid hkdf length");
    SymmetricKey(okm)
}

/// Authenticated encryption; output is nonce || ciphertext || tag.
pub fn sym_encrypt<R: Rng + CryptoRng>(
    key: &SymmetricKey,
    plaintext: &[u8],
    rng: &mut R,
) -> Vec<u8> {
    let cipher = XChaCha20Poly1305::new((&key.0).into());
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill(&mut nonce);
    let sealed = cipher
        .encrypt(
            XNonce::from_slice(&nonce),
            Payload {
                msg: plaintext,
                aad: AEAD_AAD,
            },
        )
        .expect("xchacha20poly1305 encryption is infallible for in-memory buffers");
    let mut out = Vec::with_capacity(NONCE_LEN + sealed.len());
    out.extend_from_slice(&nonce);
    out.extend_from_slice(&sealed);
    out
}

/// Inverse of [`sym_encrypt`]; fails on any tamper or wrong key.
pub fn sym_decrypt(key: &SymmetricKey, ciphertext: &[u8]) -> Result<Vec<u8>> {
    if ciphertext.len() < NONCE_LEN {
        return Err(Error::Authentication);
    }
    let (nonce, sealed) = ciphertext.split_at(NONCE_LEN);
    let cipher = XChaCha20Poly1305::new((&key.0).into());
    cipher
        .decrypt(
            XNonce::from_slice(nonce),
            Payload {
                msg: sealed,
                aad: AEAD_AAD,
            },
        )
        .map_err(|_| Error::Authentication)
}
