//! Transmit side: turns a key chain and an aircraft identity into frames.
//!
//! Keys are disclosed one interval late. Position reports sent during
//! interval `i` carry MACs under `K_i'`; `K_i` itself goes out in a B1 or B2
//! frame during interval `i + 1` or later.

use crate::frame::{AdsbMessage, Frame, FrameA, FrameB1, FrameB2, FrameC, Icao, MAX_INTERVAL_TAG};
use crate::pki::{AircraftIdentity, EcdsaP256, SignatureScheme};
use crate::tesla::{compute_mac, derive_auth_key, KeyChain, TeslaConfig, TeslaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SenderError {
    #[error("interval {0} is outside the key chain")]
    IntervalOutOfChain(u32),
    #[error("sequence numbers exhausted in interval {0}")]
    SeqExhausted(u32),
    #[error("message ICAO does not match the sender")]
    IcaoMismatch,
    #[error(transparent)]
    Tesla(#[from] TeslaError),
}

#[derive(Debug, Clone)]
pub struct Transmitter<S: SignatureScheme = EcdsaP256> {
    identity: AircraftIdentity<S>,
    chain: KeyChain,
    mac_len_bits: u16,
    seq_interval: u32,
    next_seq: u16,
}

impl<S: SignatureScheme> Transmitter<S> {
    pub fn new(identity: AircraftIdentity<S>, chain: KeyChain, config: &TeslaConfig) -> Result<Self, TeslaError> {
        config.validate()?;
        Ok(Self {
            identity,
            chain,
            mac_len_bits: config.mac_len_bits,
            seq_interval: 0,
            next_seq: 0,
        })
    }

    pub fn icao(&self) -> Icao {
        self.identity.icao
    }

    pub fn chain(&self) -> &KeyChain {
        &self.chain
    }

    pub fn identity(&self) -> &AircraftIdentity<S> {
        &self.identity
    }

    /// A position report authenticated under the key of `interval`.
    /// Sequence numbers restart at zero in every interval.
    pub fn type_a(&mut self, message: AdsbMessage, interval: u32) -> Result<Frame, SenderError> {
        if message.icao() != self.identity.icao {
            return Err(SenderError::IcaoMismatch);
        }
        let key = self.chain.key(interval).filter(|_| interval > 0).ok_or(SenderError::IntervalOutOfChain(interval))?;
        if interval != self.seq_interval {
            self.seq_interval = interval;
            self.next_seq = 0;
        }
        if self.next_seq > u8::MAX as u16 {
            return Err(SenderError::SeqExhausted(interval));
        }
        let seq = self.next_seq as u8;
        self.next_seq += 1;
        let tag = compute_mac(&message.0, &derive_auth_key(interval, &key), seq, self.mac_len_bits)?;
        Ok(Frame::A(FrameA {
            message,
            mac: tag.bits,
            seq,
        }))
    }

    /// Discloses `K_interval` without a signature.
    pub fn type_b1(&self, interval: u32) -> Result<Frame, SenderError> {
        let key = self.chain.key(interval).ok_or(SenderError::IntervalOutOfChain(interval))?;
        Ok(Frame::B1(FrameB1 {
            icao: self.identity.icao,
            interval_index: interval & MAX_INTERVAL_TAG,
            key,
        }))
    }

    /// Discloses `K_interval` together with its signature under the aircraft key.
    pub fn type_b2(&self, interval: u32) -> Result<Frame, SenderError> {
        let key = self.chain.key(interval).ok_or(SenderError::IntervalOutOfChain(interval))?;
        Ok(Frame::B2(FrameB2 {
            icao: self.identity.icao,
            interval_index: interval & MAX_INTERVAL_TAG,
            key,
            signature: self.identity.sign_interval_key(&key, interval),
        }))
    }

    pub fn type_c(&self) -> Frame {
        Frame::C(FrameC {
            icao: self.identity.icao,
            public_key: self.identity.public_key(),
            signature: self.identity.cert_signature,
        })
    }

    pub fn mac_len_bits(&self) -> u16 {
        self.mac_len_bits
    }
}
