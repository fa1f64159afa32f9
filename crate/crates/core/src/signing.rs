// SPDX-License-Identifier: Apache-2.0

//! Per-tuple provenance signatures.
//!
//! The signature is computed over the packet bytes that precede it, which
//! include the signer label. Ed25519 is the reference scheme; anything that
//! produces deterministic 64-byte detached signatures can sit behind
//! [`TupleSigner`].

use std::collections::HashMap;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use ed25519_dalek::{Signer as _, SigningKey, Verifier as _, VerifyingKey};
use rand::RngCore;

use crate::label::{new_label, Label};
use crate::tuple::{Signature, Tuple, TupleError};
use crate::wire;

pub trait TupleSigner {
    fn signer_label(&self) -> Label;
    fn sign_bytes(&self, msg: &[u8]) -> Signature;
}

#[derive(Clone)]
pub struct KeyPair {
    label: Label,
    key: SigningKey,
}

impl KeyPair {
    pub fn from_seed(label: Label, seed: [u8; 32]) -> Self {
        KeyPair { label, key: SigningKey::from_bytes(&seed) }
    }

    pub fn generate<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let label = new_label(rng);
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        Self::from_seed(label, seed)
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.key.verifying_key()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "signer": self.label,
            "secret": B64.encode(self.key.to_bytes()),
            "public": B64.encode(self.verifying_key().to_bytes()),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, KeyFileError> {
        let label: Label = v
            .get("signer")
            .and_then(|s| s.as_str())
            .ok_or(KeyFileError::Missing("signer"))?
            .parse()
            .map_err(|_| KeyFileError::Invalid("signer"))?;
        let secret = v.get("secret").and_then(|s| s.as_str()).ok_or(KeyFileError::Missing("secret"))?;
        let bytes: [u8; 32] = B64
            .decode(secret)
            .ok()
            .and_then(|b| b.try_into().ok())
            .ok_or(KeyFileError::Invalid("secret"))?;
        Ok(Self::from_seed(label, bytes))
    }
}

impl std::fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyPair").field("label", &self.label).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KeyFileError {
    #[error("key file is missing field {0:?}")]
    Missing(&'static str),
    #[error("key file field {0:?} is malformed")]
    Invalid(&'static str),
}

impl TupleSigner for KeyPair {
    fn signer_label(&self) -> Label {
        self.label
    }

    fn sign_bytes(&self, msg: &[u8]) -> Signature {
        self.key.sign(msg).to_bytes()
    }
}

/// Maps signer labels to their verification keys.
#[derive(Clone, Default, Debug)]
pub struct KeyRegistry {
    keys: HashMap<Label, VerifyingKey>,
}

impl KeyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, label: Label, key: VerifyingKey) {
        self.keys.insert(label, key);
    }

    pub fn register_pair(&mut self, kp: &KeyPair) {
        self.register(kp.label(), kp.verifying_key());
    }

    pub fn get(&self, label: &Label) -> Option<&VerifyingKey> {
        self.keys.get(label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    Unsigned,
    UnknownSigner,
    BadSignature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

pub fn sign_tuple(t: &Tuple, signer: &impl TupleSigner) -> Result<Tuple, TupleError> {
    if t.is_signed() {
        return Err(TupleError::AlreadySigned);
    }
    // Sign the bytes as they will appear on the wire, signer field included.
    let staged = t.clone().with_provenance(signer.signer_label(), [0; 64]);
    let sig = signer.sign_bytes(&wire::signing_bytes(&staged));
    Ok(t.clone().with_provenance(signer.signer_label(), sig))
}

pub fn verify_tuple(t: &Tuple, reg: &KeyRegistry) -> Verdict {
    let (Some(signer), Some(sig)) = (t.signer(), t.signature()) else {
        return Verdict::Reject(RejectReason::Unsigned);
    };
    let Some(key) = reg.get(&signer) else {
        return Verdict::Reject(RejectReason::UnknownSigner);
    };
    let sig = ed25519_dalek::Signature::from_bytes(sig);
    match key.verify(&wire::signing_bytes(t), &sig) {
        Ok(()) => Verdict::Accept,
        Err(_) => Verdict::Reject(RejectReason::BadSignature),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;
    use rand::SeedableRng;

    fn l(n: u128) -> Label {
        Label::from_u128(n)
    }

    fn setup() -> (KeyPair, KeyRegistry, Tuple) {
        let kp = KeyPair::from_seed(l(100), [5; 32]);
        let mut reg = KeyRegistry::new();
        reg.register_pair(&kp);
        (kp, reg, Tuple::new(l(1), l(2), Value::utf8("song"), l(4), 77))
    }

    #[test]
    fn sign_then_verify_accepts() {
        let (kp, reg, t) = setup();
        let s = sign_tuple(&t, &kp).unwrap();
        assert_eq!(s.signer(), Some(kp.label()));
        assert_eq!(verify_tuple(&s, &reg), Verdict::Accept);
    }

    #[test]
    fn tampered_payload_rejected() {
        let (kp, reg, t) = setup();
        let s = sign_tuple(&t, &kp).unwrap();
        let mut bytes = wire::encode(&s);
        // First payload byte sits after the 96-byte signed header and length.
        bytes[96] ^= 0x01;
        let tampered = wire::decode(&bytes).unwrap();
        assert_eq!(verify_tuple(&tampered, &reg), Verdict::Reject(RejectReason::BadSignature));
    }

    #[test]
    fn wrong_registry_rejected() {
        let (kp, _, t) = setup();
        let other = KeyPair::from_seed(l(200), [6; 32]);
        let mut reg = KeyRegistry::new();
        reg.register_pair(&other);
        let s = sign_tuple(&t, &kp).unwrap();
        assert_eq!(verify_tuple(&s, &reg), Verdict::Reject(RejectReason::UnknownSigner));
        // Same label registered with a different key.
        let mut reg = KeyRegistry::new();
        reg.register(kp.label(), other.verifying_key());
        assert_eq!(verify_tuple(&s, &reg), Verdict::Reject(RejectReason::BadSignature));
    }

    #[test]
    fn unsigned_rejected_and_double_sign_refused() {
        let (kp, reg, t) = setup();
        assert_eq!(verify_tuple(&t, &reg), Verdict::Reject(RejectReason::Unsigned));
        let s = sign_tuple(&t, &kp).unwrap();
        assert_eq!(sign_tuple(&s, &kp), Err(TupleError::AlreadySigned));
    }

    #[test]
    fn signing_is_deterministic() {
        let (kp, _, t) = setup();
        assert_eq!(sign_tuple(&t, &kp).unwrap(), sign_tuple(&t, &kp).unwrap());
    }

    #[test]
    fn key_json_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let kp = KeyPair::generate(&mut rng);
        let back = KeyPair::from_json(&kp.to_json()).unwrap();
        assert_eq!(back.label(), kp.label());
        assert_eq!(back.verifying_key(), kp.verifying_key());
        assert_eq!(
            KeyPair::from_json(&serde_json::json!({"signer": kp.label()})).unwrap_err(),
            KeyFileError::Missing("secret")
        );
    }
}
