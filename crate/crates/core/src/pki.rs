//! Certificate PKI: CA and aircraft key pairs, certificates over aircraft
//! public keys, signatures over interval keys bound to their index, and the two verification
//! predicates (`v1` identity, `v2` interval key).
//!
//! Public keys are exactly 256 bits and signatures exactly 512 bits so they
//! fit the Type B2 and Type C layouts. The default scheme is ECDSA over
//! P-256 with x-only public keys: key generation negates the secret scalar
//! whenever the public point has odd `y`, so the x coordinate alone
//! determines the point.

use core::fmt;

use p256::ecdsa::signature::{Signer, Verifier};
use sha2::{Digest, Sha256, Sha512};

use crate::frame::Icao;
use crate::tesla::Key128;

pub const PUBLIC_KEY_BYTES: usize = 32;
pub const SIGNATURE_BYTES: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PublicKey(pub [u8; PUBLIC_KEY_BYTES]);

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature(pub [u8; SIGNATURE_BYTES]);

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({:02x}{:02x}{:02x}{:02x}..)", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({:02x}{:02x}{:02x}{:02x}..)", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

/// A fixed-size signature scheme.
pub trait SignatureScheme {
    type SigningKey: Clone;

    /// Deterministically derives a key pair from seed material.
    fn keypair_from_seed(seed: &[u8]) -> (Self::SigningKey, PublicKey);
    fn sign(key: &Self::SigningKey, message: &[u8]) -> Signature;
    fn verify(public: &PublicKey, signature: &Signature, message: &[u8]) -> bool;
}

/// ECDSA P-256 with SHA-256 and RFC 6979 nonces.
#[derive(Debug, Clone, Copy, Default)]
pub struct EcdsaP256;

impl SignatureScheme for EcdsaP256 {
    type SigningKey = p256::ecdsa::SigningKey;

    fn keypair_from_seed(seed: &[u8]) -> (Self::SigningKey, PublicKey) {
        let mut counter = 0u32;
        let sk = loop {
            let d = Sha256::new()
                .chain_update(b"cabba-ecdsa-keygen")
                .chain_update(seed)
                .chain_update(counter.to_be_bytes())
                .finalize();
            if let Ok(sk) = p256::ecdsa::SigningKey::from_slice(&d) {
                break sk;
            }
            counter += 1;
        };
        let sk = if sk.verifying_key().to_encoded_point(true).as_bytes()[0] == 0x03 {
            p256::ecdsa::SigningKey::from(-*sk.as_nonzero_scalar())
        } else {
            sk
        };
        let point = sk.verifying_key().to_encoded_point(true);
        debug_assert_eq!(point.as_bytes()[0], 0x02);
        let mut x = [0u8; PUBLIC_KEY_BYTES];
        x.copy_from_slice(&point.as_bytes()[1..]);
        (sk, PublicKey(x))
    }

    fn sign(key: &Self::SigningKey, message: &[u8]) -> Signature {
        let sig: p256::ecdsa::Signature = key.sign(message);
        let mut out = [0u8; SIGNATURE_BYTES];
        out.copy_from_slice(&sig.to_bytes());
        Signature(out)
    }

    fn verify(public: &PublicKey, signature: &Signature, message: &[u8]) -> bool {
        let mut sec1 = [0u8; PUBLIC_KEY_BYTES + 1];
        sec1[0] = 0x02;
        sec1[1..].copy_from_slice(&public.0);
        let Ok(vk) = p256::ecdsa::VerifyingKey::from_sec1_bytes(&sec1) else {
            return false;
        };
        let Ok(sig) = p256::ecdsa::Signature::from_slice(&signature.0) else {
            return false;
        };
        vk.verify(message, &sig).is_ok()
    }
}

/// Hash-based stand-in with the same sizes as [`EcdsaP256`].
///
/// Not a signature scheme: anyone holding the public key can "sign". Only
/// meant for tests that need cheap deterministic artifacts.
#[derive(Debug, Clone, Copy, Default)]
pub struct HashMock;

impl HashMock {
    fn tag(public: &PublicKey, message: &[u8]) -> Signature {
        let d = Sha512::new()
            .chain_update(b"cabba-mock-sig")
            .chain_update(public.0)
            .chain_update(message)
            .finalize();
        let mut out = [0u8; SIGNATURE_BYTES];
        out.copy_from_slice(&d);
        Signature(out)
    }
}

impl SignatureScheme for HashMock {
    type SigningKey = PublicKey;

    fn keypair_from_seed(seed: &[u8]) -> (PublicKey, PublicKey) {
        let d = Sha256::new().chain_update(b"cabba-mock-key").chain_update(seed).finalize();
        let pk = PublicKey(d.into());
        (pk, pk)
    }

    fn sign(key: &PublicKey, message: &[u8]) -> Signature {
        Self::tag(key, message)
    }

    fn verify(public: &PublicKey, signature: &Signature, message: &[u8]) -> bool {
        Self::tag(public, message) == *signature
    }
}

pub struct CertAuthority<S: SignatureScheme = EcdsaP256> {
    signing: S::SigningKey,
    public: PublicKey,
}

impl<S: SignatureScheme> Clone for CertAuthority<S> {
    fn clone(&self) -> Self {
        Self {
            signing: self.signing.clone(),
            public: self.public,
        }
    }
}

impl<S: SignatureScheme> fmt::Debug for CertAuthority<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CertAuthority").field("public", &self.public).finish_non_exhaustive()
    }
}

impl<S: SignatureScheme> CertAuthority<S> {
    pub fn from_seed(seed: &[u8]) -> Self {
        let (signing, public) = S::keypair_from_seed(seed);
        Self { signing, public }
    }

    pub fn public_key(&self) -> PublicKey {
        self.public
    }

    /// `sig_{K_prCA}(K_pub)`.
    pub fn certify(&self, aircraft_key: &PublicKey) -> Signature {
        S::sign(&self.signing, &aircraft_key.0)
    }

    pub fn issue_certificate(&self, icao: Icao, keypair: AircraftKeypair<S>) -> AircraftIdentity<S> {
        let cert_signature = self.certify(&keypair.public);
        AircraftIdentity {
            icao,
            keypair,
            cert_signature,
        }
    }
}

pub struct AircraftKeypair<S: SignatureScheme = EcdsaP256> {
    signing: S::SigningKey,
    public: PublicKey,
}

impl<S: SignatureScheme> Clone for AircraftKeypair<S> {
    fn clone(&self) -> Self {
        Self {
            signing: self.signing.clone(),
            public: self.public,
        }
    }
}

impl<S: SignatureScheme> AircraftKeypair<S> {
    pub fn from_seed(seed: &[u8]) -> Self {
        let (signing, public) = S::keypair_from_seed(seed);
        Self { signing, public }
    }

    pub fn public_key(&self) -> PublicKey {
        self.public
    }
}

/// An aircraft key pair together with its CA certificate.
pub struct AircraftIdentity<S: SignatureScheme = EcdsaP256> {
    pub icao: Icao,
    keypair: AircraftKeypair<S>,
    pub cert_signature: Signature,
}

impl<S: SignatureScheme> Clone for AircraftIdentity<S> {
    fn clone(&self) -> Self {
        Self {
            icao: self.icao,
            keypair: self.keypair.clone(),
            cert_signature: self.cert_signature,
        }
    }
}

impl<S: SignatureScheme> fmt::Debug for AircraftIdentity<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AircraftIdentity")
            .field("icao", &self.icao)
            .field("public", &self.keypair.public)
            .field("cert_signature", &self.cert_signature)
            .finish_non_exhaustive()
    }
}

impl<S: SignatureScheme> AircraftIdentity<S> {
    pub fn public_key(&self) -> PublicKey {
        self.keypair.public
    }

    /// `sig_{K_pr}(K_i ∥ i)`, carried in Type B2 frames.
    pub fn sign_interval_key(&self, key: &Key128, interval: u32) -> Signature {
        S::sign(&self.keypair.signing, &interval_key_message(key, interval))
    }

    /// Replaces the certificate signature, e.g. to build corrupted fixtures.
    pub fn with_cert_signature(mut self, sig: Signature) -> Self {
        self.cert_signature = sig;
        self
    }
}

/// Public view of an identity: what a Type C frame carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Certificate {
    pub icao: Icao,
    pub public_key: PublicKey,
    pub signature: Signature,
}

impl<S: SignatureScheme> From<&AircraftIdentity<S>> for Certificate {
    fn from(id: &AircraftIdentity<S>) -> Self {
        Self {
            icao: id.icao,
            public_key: id.public_key(),
            signature: id.cert_signature,
        }
    }
}

/// `v1 = Verify(K_pubCA, sig_{K_prCA}(K_pub), K_pub)`.
pub fn verify_identity<S: SignatureScheme>(ca: &PublicKey, cert_signature: &Signature, aircraft: &PublicKey) -> bool {
    S::verify(ca, cert_signature, &aircraft.0)
}

/// Signed form of an interval key: the key followed by its big-endian
/// 32-bit interval index. Binding the index stops a disclosed key from being
/// replayed under another interval.
pub fn interval_key_message(key: &Key128, interval: u32) -> [u8; 20] {
    let mut m = [0u8; 20];
    m[..16].copy_from_slice(&key.0);
    m[16..].copy_from_slice(&interval.to_be_bytes());
    m
}

/// `v2`: checks the aircraft's signature over `K_i ∥ i`.
pub fn verify_interval_key<S: SignatureScheme>(
    aircraft: &PublicKey,
    signature: &Signature,
    key: &Key128,
    interval: u32,
) -> bool {
    S::verify(aircraft, signature, &interval_key_message(key, interval))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flip(sig: &Signature, bit: usize) -> Signature {
        let mut s = *sig;
        s.0[bit / 8] ^= 0x80 >> (bit % 8);
        s
    }

    fn identity<S: SignatureScheme>(ca: &CertAuthority<S>, icao: u32, seed: &[u8]) -> AircraftIdentity<S> {
        ca.issue_certificate(Icao::new(icao).unwrap(), AircraftKeypair::from_seed(seed))
    }

    #[test]
    fn ecdsa_keys_are_even_y_and_deterministic() {
        for i in 0u8..16 {
            let (_, pk1) = EcdsaP256::keypair_from_seed(&[i]);
            let (_, pk2) = EcdsaP256::keypair_from_seed(&[i]);
            assert_eq!(pk1, pk2);
        }
    }

    #[test]
    fn certificate_round_trip_and_bit_flips() {
        let ca = CertAuthority::<EcdsaP256>::from_seed(b"ca-1");
        let id = identity(&ca, 0x4840D6, b"aircraft-1");
        assert!(verify_identity::<EcdsaP256>(&ca.public_key(), &id.cert_signature, &id.public_key()));
        for bit in (0..512).step_by(7) {
            assert!(!verify_identity::<EcdsaP256>(
                &ca.public_key(),
                &flip(&id.cert_signature, bit),
                &id.public_key()
            ));
        }
    }

    #[test]
    fn certificates_cross_check_matrix() {
        let ca = CertAuthority::<EcdsaP256>::from_seed(b"ca-1");
        let a = identity(&ca, 1, b"a");
        let b = identity(&ca, 2, b"b");
        let pk = [a.public_key(), b.public_key()];
        let sig = [a.cert_signature, b.cert_signature];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(verify_identity::<EcdsaP256>(&ca.public_key(), &sig[i], &pk[j]), i == j);
            }
        }
    }

    #[test]
    fn foreign_ca_fails_v1() {
        let ca1 = CertAuthority::<EcdsaP256>::from_seed(b"ca-1");
        let ca2 = CertAuthority::<EcdsaP256>::from_seed(b"ca-2");
        let id = identity(&ca2, 7, b"x");
        assert!(!verify_identity::<EcdsaP256>(&ca1.public_key(), &id.cert_signature, &id.public_key()));
    }

    #[test]
    fn interval_key_signatures() {
        let ca = CertAuthority::<EcdsaP256>::from_seed(b"ca");
        let a = identity(&ca, 1, b"a");
        let b = identity(&ca, 2, b"b");
        let k = Key128([3; 16]);
        let sig = a.sign_interval_key(&k, 12);
        assert!(verify_interval_key::<EcdsaP256>(&a.public_key(), &sig, &k, 12));
        assert!(!verify_interval_key::<EcdsaP256>(&a.public_key(), &sig, &Key128([4; 16]), 12));
        assert!(!verify_interval_key::<EcdsaP256>(&a.public_key(), &sig, &k, 13));
        assert!(!verify_interval_key::<EcdsaP256>(&b.public_key(), &sig, &k, 12));
        assert!(!verify_interval_key::<EcdsaP256>(&a.public_key(), &Signature([0; 64]), &k, 12));
    }

    #[test]
    fn mock_has_identical_sizes_and_semantics() {
        let ca = CertAuthority::<HashMock>::from_seed(b"ca");
        let id = identity(&ca, 9, b"m");
        assert!(verify_identity::<HashMock>(&ca.public_key(), &id.cert_signature, &id.public_key()));
        assert!(!verify_identity::<HashMock>(&ca.public_key(), &flip(&id.cert_signature, 0), &id.public_key()));
        let k = Key128([1; 16]);
        let s = id.sign_interval_key(&k, 1);
        assert_eq!(s.0.len() * 8, 512);
        assert_eq!(id.public_key().0.len() * 8, 256);
        assert!(verify_interval_key::<HashMock>(&id.public_key(), &s, &k, 1));
    }
}
