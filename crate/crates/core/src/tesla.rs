//! TESLA one-way key chains, interval authentication keys and truncated MACs.
//!
//! The chain is built backwards from a secret head `K_N`: `K_{i-1} = F(K_i)`,
//! ending at the pledge `K_0`. Each interval key yields a MAC key
//! `K_i' = F'(K_i)`. Both one-way functions are SHA-256 truncated to 128 bits
//! with distinct one-byte prefixes, so `F` and `F'` never collide on purpose.
//!
//! Message tags are the leftmost `λ` bits of `HMAC-SHA256(K_i', m ∥ s ∥ i)`
//! where `s` is the 8-bit sequence number and `i` the big-endian 32-bit
//! interval index.

use alloc::vec::Vec;
use core::fmt;

use hmac::{Hmac, Mac};
use sha2::{Digest, Sha256};

use crate::bits::Bits;
use crate::frame::ADSB_MESSAGE_BYTES;

/// Upper bound on the MAC length that fits the quadrature budget of a Type A frame.
pub const MAX_MAC_BITS: u16 = 196;
pub const MIN_MAC_BITS: u16 = 16;
pub const DEFAULT_MAC_BITS: u16 = MAX_MAC_BITS;
pub const KEY_BYTES: usize = 16;

const TAG_CHAIN_STEP: u8 = 0x00;
const TAG_AUTH_KEY: u8 = 0x01;
const TAG_CHAIN_HEAD: u8 = 0x02;

/// A 128-bit key.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Key128(pub [u8; KEY_BYTES]);

impl Key128 {
    pub fn as_bytes(&self) -> &[u8; KEY_BYTES] {
        &self.0
    }

    pub fn to_bits(&self) -> Bits {
        Bits::from_bytes(&self.0, 128)
    }

    pub fn from_bits(bits: &Bits) -> Self {
        assert_eq!(bits.len(), 128);
        let mut k = [0u8; KEY_BYTES];
        k.copy_from_slice(&bits.to_bytes());
        Self(k)
    }
}

impl fmt::Debug for Key128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Key128(")?;
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        f.write_str(")")
    }
}

fn tagged_hash(tag: u8, input: &[u8]) -> Key128 {
    let digest = Sha256::new().chain_update([tag]).chain_update(input).finalize();
    let mut k = [0u8; KEY_BYTES];
    k.copy_from_slice(&digest[..KEY_BYTES]);
    Key128(k)
}

/// The chain step `F`.
pub fn chain_step(key: &Key128) -> Key128 {
    tagged_hash(TAG_CHAIN_STEP, &key.0)
}

/// `F` applied `n` times.
pub fn chain_step_n(key: &Key128, n: u32) -> Key128 {
    (0..n).fold(*key, |k, _| chain_step(&k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum TeslaError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("claimed index {index} exceeds guard {guard}")]
    IndexOutOfRange { index: u32, guard: u32 },
    #[error("MAC length {0} exceeds {MAX_MAC_BITS} bits")]
    MacTooLong(u16),
    #[error("second interval must be strictly after the first")]
    InvalidOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TeslaConfig {
    pub interval_duration_s: f64,
    pub chain_length: u32,
    pub mac_len_bits: u16,
}

impl Default for TeslaConfig {
    fn default() -> Self {
        Self {
            interval_duration_s: 5.0,
            chain_length: 720,
            mac_len_bits: DEFAULT_MAC_BITS,
        }
    }
}

impl TeslaConfig {
    pub fn with_chain_length(chain_length: u32) -> Self {
        Self {
            chain_length,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), TeslaError> {
        if self.chain_length == 0 {
            return Err(TeslaError::InvalidConfig("chain_length must be at least 1"));
        }
        // written as a negated comparison so NaN is rejected too
        if !(self.interval_duration_s > 0.0) {
            return Err(TeslaError::InvalidConfig("interval duration must be positive"));
        }
        if self.mac_len_bits > MAX_MAC_BITS {
            return Err(TeslaError::MacTooLong(self.mac_len_bits));
        }
        if self.mac_len_bits < MIN_MAC_BITS {
            return Err(TeslaError::InvalidConfig("mac_len_bits below 16"));
        }
        Ok(())
    }

    /// Largest index `verify_pledge` will hash back from.
    pub fn pledge_guard(&self) -> u32 {
        self.chain_length.saturating_mul(2)
    }
}

/// One-way key chain. `keys[i]` holds `K_i`; `keys[0]` is the pledge.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyChain {
    seed: [u8; KEY_BYTES],
    keys: Vec<Key128>,
}

impl fmt::Debug for KeyChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyChain")
            .field("length", &self.length())
            .field("pledge", &self.pledge())
            .finish_non_exhaustive()
    }
}

impl KeyChain {
    /// Builds the chain from a 128-bit secret seed.
    pub fn generate(seed: &[u8; KEY_BYTES], config: &TeslaConfig) -> Result<Self, TeslaError> {
        if config.chain_length == 0 {
            return Err(TeslaError::InvalidConfig("chain_length must be at least 1"));
        }
        let n = config.chain_length as usize;
        let mut keys = alloc::vec![Key128::default(); n + 1];
        keys[n] = tagged_hash(TAG_CHAIN_HEAD, seed);
        for i in (0..n).rev() {
            keys[i] = chain_step(&keys[i + 1]);
        }
        Ok(Self { seed: *seed, keys })
    }

    /// Rebuilds a chain from an explicit key list ordered `K_0..=K_N`.
    /// The seed is unknown in that case and left zeroed.
    pub fn from_keys(keys: Vec<Key128>) -> Result<Self, ChainIntegrityError> {
        if keys.len() < 2 {
            return Err(ChainIntegrityError { index: 0 });
        }
        let chain = Self {
            seed: [0; KEY_BYTES],
            keys,
        };
        chain.check_soundness()?;
        Ok(chain)
    }

    pub fn seed(&self) -> &[u8; KEY_BYTES] {
        &self.seed
    }

    /// `N`, the number of intervals covered.
    pub fn length(&self) -> u32 {
        (self.keys.len() - 1) as u32
    }

    pub fn pledge(&self) -> Key128 {
        self.keys[0]
    }

    pub fn key(&self, i: u32) -> Option<Key128> {
        self.keys.get(i as usize).copied()
    }

    /// Keys `K_0..=K_N`.
    pub fn keys(&self) -> &[Key128] {
        &self.keys
    }

    /// Checks `F(K_i) = K_{i-1}` for every link.
    pub fn check_soundness(&self) -> Result<(), ChainIntegrityError> {
        for i in 1..self.keys.len() {
            if chain_step(&self.keys[i]) != self.keys[i - 1] {
                return Err(ChainIntegrityError { index: i as u32 });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("chain link broken at index {index}")]
pub struct ChainIntegrityError {
    pub index: u32,
}

/// Checks `F^index(candidate) = pledge`, refusing indices beyond `guard`.
pub fn verify_pledge(
    candidate: &Key128,
    index: u32,
    pledge: &Key128,
    guard: u32,
) -> Result<bool, TeslaError> {
    if index > guard {
        return Err(TeslaError::IndexOutOfRange { index, guard });
    }
    Ok(chain_step_n(candidate, index) == *pledge)
}

/// Per-interval MAC key `K_i' = F'(K_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuthKey {
    pub interval_index: u32,
    pub key: Key128,
}

pub fn derive_auth_key(interval_index: u32, interval_key: &Key128) -> AuthKey {
    AuthKey {
        interval_index,
        key: tagged_hash(TAG_AUTH_KEY, &interval_key.0),
    }
}

/// Security data carried with a Type A message: the truncated MAC and its
/// sequence number. `interval_index` is the receiver's view of the interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacTag {
    pub bits: Bits,
    pub seq: u8,
    pub interval_index: u32,
}

impl MacTag {
    pub fn mac_len_bits(&self) -> u16 {
        self.bits.len() as u16
    }
}

fn hmac_full(message: &[u8; ADSB_MESSAGE_BYTES], auth_key: &AuthKey, seq: u8) -> [u8; 32] {
    let mut mac = <Hmac<Sha256> as Mac>::new_from_slice(&auth_key.key.0)
        .expect("HMAC accepts any key length");
    mac.update(message);
    mac.update(&[seq]);
    mac.update(&auth_key.interval_index.to_be_bytes());
    mac.finalize().into_bytes().into()
}

pub fn compute_mac(
    message: &[u8; ADSB_MESSAGE_BYTES],
    auth_key: &AuthKey,
    seq: u8,
    mac_len_bits: u16,
) -> Result<MacTag, TeslaError> {
    if mac_len_bits > MAX_MAC_BITS {
        return Err(TeslaError::MacTooLong(mac_len_bits));
    }
    let full = hmac_full(message, auth_key, seq);
    Ok(MacTag {
        bits: Bits::from_bytes(&full, mac_len_bits as usize),
        seq,
        interval_index: auth_key.interval_index,
    })
}

/// Recomputes the tag under `F'(interval_key)` and compares the leftmost bits.
pub fn verify_mac(message: &[u8; ADSB_MESSAGE_BYTES], tag: &MacTag, interval_key: &Key128) -> bool {
    if tag.bits.len() > MAX_MAC_BITS as usize {
        return false;
    }
    let auth = derive_auth_key(tag.interval_index, interval_key);
    let full = hmac_full(message, &auth, tag.seq);
    Bits::from_bytes(&full, tag.bits.len()) == tag.bits
}

/// True iff `F^(interval_b - interval_a)(key_b) = key_a`.
pub fn same_origin(
    key_a: &Key128,
    interval_a: u32,
    key_b: &Key128,
    interval_b: u32,
) -> Result<bool, TeslaError> {
    if interval_b <= interval_a {
        return Err(TeslaError::InvalidOrder);
    }
    Ok(chain_step_n(key_b, interval_b - interval_a) == *key_a)
}
