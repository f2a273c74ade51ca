//! Per-ICAO authentication state machine.
//!
//! ```text
//!            B1            B2                C (v1)
//!   S0 ──────────▶ S1 ──────────▶ S2 ─────────────────▶ S4
//!    │ \                           ▲                    ▲
//!    │  └──────────── B2 ──────────┘                    │
//!    └───── C (v1) ──────▶ S3 ──────── B2 (v2) ─────────┘
//! ```
//!
//! S1 also moves to S3 on a valid C. S2 and S3 reach S4 once a certificate
//! that passes `v1` and a signed interval key that passes `v2` under it are
//! both held. S4 is absorbing. Type A frames never cause a transition.
//!
//! Type A messages are buffered with the receiver's interval. Every disclosed
//! key is filed into a key stream (a set of keys that lie on one hash
//! chain) and used to check the buffered messages it can reach.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::marker::PhantomData;

use crate::bits::Bits;
use crate::frame::{AdsbMessage, Frame, FrameType, Icao, MAX_INTERVAL_TAG};
use crate::pki::{verify_identity, verify_interval_key, EcdsaP256, PublicKey, Signature, SignatureScheme};
use crate::tesla::{chain_step_n, same_origin, verify_mac, Key128, MacTag};

pub const DEFAULT_BUFFER_HORIZON: u32 = 3;
/// Largest interval gap over which two keys are compared by hashing.
pub const DEFAULT_MAX_CHAIN_SPAN: u32 = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AuthState {
    S0,
    S1,
    S2,
    S3,
    S4,
}

impl AuthState {
    /// Position in the order `S0 < S1 < {S2, S3} < S4`.
    pub const fn rank(self) -> u8 {
        match self {
            AuthState::S0 => 0,
            AuthState::S1 => 1,
            AuthState::S2 | AuthState::S3 => 2,
            AuthState::S4 => 3,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            AuthState::S0 => "S0",
            AuthState::S1 => "S1",
            AuthState::S2 => "S2",
            AuthState::S3 => "S3",
            AuthState::S4 => "S4",
        }
    }

    /// Whether `self → next` respects the partial order (S2 and S3 are incomparable).
    pub fn may_become(self, next: AuthState) -> bool {
        self == next || self.rank() < next.rank()
    }
}

impl fmt::Display for AuthState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Integrity {
    Unknown,
    Ok,
    Failed,
    /// Same `(interval, seq)` as an earlier verified message of the same stream.
    Duplicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Origin {
    Unauthenticated,
    Authenticated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StreamVerdict {
    Unauthenticated,
    Authenticated,
    ImpostorCandidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StreamId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MessageId(pub u64);

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MessageVerdict {
    pub message: MessageId,
    /// Receiver interval the message arrived in.
    pub interval: u32,
    pub seq: u8,
    pub integrity: Integrity,
    pub origin: Origin,
    pub stream: Option<StreamId>,
    /// No longer buffered for integrity checks.
    pub expired: bool,
}

/// Keys known to come from one chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyStream {
    pub id: StreamId,
    pub keys: BTreeMap<u32, Key128>,
    pub verdict: StreamVerdict,
}

impl KeyStream {
    /// Most recent key of the stream.
    pub fn anchor(&self) -> (u32, Key128) {
        let (&i, &k) = self.keys.iter().next_back().expect("streams are never empty");
        (i, k)
    }

    /// `K_e` derived from the nearest key at or after `e`.
    fn key_for(&self, e: u32, span: u32) -> Option<Key128> {
        let (&j, k) = self.keys.range(e..).next()?;
        (j - e <= span).then(|| chain_step_n(k, j - e))
    }

    fn nearest(&self, i: u32) -> (u32, Key128) {
        let after = self.keys.range(i..).next();
        let before = self.keys.range(..i).next_back();
        let pick = match (before, after) {
            (Some(b), Some(a)) => {
                if i - b.0 <= a.0 - i {
                    b
                } else {
                    a
                }
            }
            (Some(b), None) => b,
            (None, Some(a)) => a,
            (None, None) => unreachable!("streams are never empty"),
        };
        (*pick.0, *pick.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiverConfig {
    pub trusted_cas: Vec<PublicKey>,
    pub buffer_horizon: u32,
    pub max_chain_span: u32,
}

impl ReceiverConfig {
    pub fn new(trusted_cas: Vec<PublicKey>) -> Self {
        Self {
            trusted_cas,
            buffer_horizon: DEFAULT_BUFFER_HORIZON,
            max_chain_span: DEFAULT_MAX_CHAIN_SPAN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum RxError {
    #[error("frame ICAO {got} does not belong to context {expected}")]
    IcaoMismatch { expected: Icao, got: Icao },
    #[error("receiver interval went backwards from {last} to {got}")]
    ClockRegression { last: u32, got: u32 },
    #[error("key for interval tag {tag} disclosed during interval {rx_interval}")]
    EarlyDisclosure { tag: u32, rx_interval: u32 },
    #[error("certificate does not verify under any trusted CA")]
    CertificateRejected,
}

/// Outcome of one `ingest` call; also the event-log record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestReport {
    pub rx_interval: u32,
    pub icao: Icao,
    pub frame_type: FrameType,
    pub state_before: AuthState,
    pub state_after: AuthState,
    /// Verdicts of previously buffered messages that changed.
    pub updates: Vec<MessageVerdict>,
    /// Stream a disclosed key was filed into.
    pub stream: Option<StreamId>,
    /// Id given to a buffered Type A message.
    pub message: Option<MessageId>,
}

/// Full interval index of a 12-bit tag: the latest interval before
/// `rx_interval` with that tag. `None` when the tag names the current
/// interval (a key disclosed too early) or lies before interval 0.
pub fn unwrap_interval(tag: u32, rx_interval: u32) -> Option<u32> {
    let tag = tag & MAX_INTERVAL_TAG;
    if tag == rx_interval & MAX_INTERVAL_TAG {
        return None;
    }
    let back = rx_interval.wrapping_sub(tag) & MAX_INTERVAL_TAG;
    rx_interval.checked_sub(back)
}

#[derive(Debug, Clone)]
struct Entry {
    verdict: MessageVerdict,
    message: AdsbMessage,
    mac: Bits,
    checked_by: Vec<StreamId>,
}

#[derive(Debug, Clone)]
struct SignedKey {
    interval: u32,
    key: Key128,
    signature: Signature,
    stream: StreamId,
    valid: bool,
}

/// Receiver state for one ICAO address.
#[derive(Debug, Clone)]
pub struct ReceiverContext<S: SignatureScheme = EcdsaP256> {
    icao: Icao,
    config: ReceiverConfig,
    state: AuthState,
    entries: Vec<Entry>,
    streams: Vec<KeyStream>,
    signed_keys: Vec<SignedKey>,
    certificates: Vec<PublicKey>,
    last_rx: Option<u32>,
    _scheme: PhantomData<fn() -> S>,
}

impl<S: SignatureScheme> ReceiverContext<S> {
    pub fn new(icao: Icao, config: ReceiverConfig) -> Self {
        Self {
            icao,
            config,
            state: AuthState::S0,
            entries: Vec::new(),
            streams: Vec::new(),
            signed_keys: Vec::new(),
            certificates: Vec::new(),
            last_rx: None,
            _scheme: PhantomData,
        }
    }

    pub fn icao(&self) -> Icao {
        self.icao
    }

    pub fn state(&self) -> AuthState {
        self.state
    }

    pub fn streams(&self) -> &[KeyStream] {
        &self.streams
    }

    pub fn certificates(&self) -> &[PublicKey] {
        &self.certificates
    }

    pub fn verdicts(&self) -> Vec<MessageVerdict> {
        self.entries.iter().map(|e| e.verdict.clone()).collect()
    }

    pub fn verdict(&self, id: MessageId) -> Option<&MessageVerdict> {
        self.entries.get(id.0 as usize).map(|e| &e.verdict)
    }

    /// Messages still waiting for an integrity decision.
    pub fn pending(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| !e.verdict.expired && e.verdict.integrity != Integrity::Ok)
            .count()
    }

    /// Processes one decoded frame received during `rx_interval`. On error
    /// the context is left untouched.
    pub fn ingest(&mut self, frame: &Frame, rx_interval: u32) -> Result<IngestReport, RxError> {
        if frame.icao() != self.icao {
            return Err(RxError::IcaoMismatch {
                expected: self.icao,
                got: frame.icao(),
            });
        }
        if let Some(last) = self.last_rx {
            if rx_interval < last {
                return Err(RxError::ClockRegression { last, got: rx_interval });
            }
        }
        let disclosed = match frame {
            Frame::B1(b) => Some(self.disclosure_interval(b.interval_index, rx_interval)?),
            Frame::B2(b) => Some(self.disclosure_interval(b.interval_index, rx_interval)?),
            _ => None,
        };
        if let Frame::C(c) = frame {
            let v1 = self
                .config
                .trusted_cas
                .iter()
                .any(|ca| verify_identity::<S>(ca, &c.signature, &c.public_key));
            if !v1 {
                return Err(RxError::CertificateRejected);
            }
        }

        let before = self.state;
        let snapshot: Vec<MessageVerdict> = self.verdicts();
        self.last_rx = Some(rx_interval);
        self.expire(rx_interval);

        let mut stream = None;
        let mut message = None;
        match frame {
            Frame::A(a) => message = Some(self.buffer(a.message, a.mac.clone(), a.seq, rx_interval)),
            Frame::B1(b) => stream = Some(self.disclose(disclosed.unwrap_or_default(), b.key, None)),
            Frame::B2(b) => stream = Some(self.disclose(disclosed.unwrap_or_default(), b.key, Some(b.signature))),
            Frame::C(c) => self.add_certificate(c.public_key),
        }

        self.state = self.next_state(frame.frame_type());
        debug_assert!(before.may_become(self.state));
        self.refresh_streams();

        let updates = self
            .entries
            .iter()
            .zip(&snapshot)
            .filter(|(e, old)| e.verdict != **old)
            .map(|(e, _)| e.verdict.clone())
            .collect();
        Ok(IngestReport {
            rx_interval,
            icao: self.icao,
            frame_type: frame.frame_type(),
            state_before: before,
            state_after: self.state,
            updates,
            stream,
            message,
        })
    }

    fn disclosure_interval(&self, tag: u32, rx_interval: u32) -> Result<u32, RxError> {
        unwrap_interval(tag, rx_interval).ok_or(RxError::EarlyDisclosure { tag, rx_interval })
    }

    fn expire(&mut self, rx_interval: u32) {
        let horizon = self.config.buffer_horizon;
        for e in &mut self.entries {
            if !e.verdict.expired && e.verdict.interval.saturating_add(horizon) < rx_interval {
                e.verdict.expired = true;
            }
        }
    }

    fn buffer(&mut self, message: AdsbMessage, mac: Bits, seq: u8, interval: u32) -> MessageId {
        let id = MessageId(self.entries.len() as u64);
        self.entries.push(Entry {
            verdict: MessageVerdict {
                message: id,
                interval,
                seq,
                integrity: Integrity::Unknown,
                origin: Origin::Unauthenticated,
                stream: None,
                expired: false,
            },
            message,
            mac,
            checked_by: Vec::new(),
        });
        id
    }

    /// Files `key` into the stream it chains to, creating one if none fits.
    pub fn assign_stream(&mut self, key: Key128, interval: u32) -> StreamId {
        let span = self.config.max_chain_span;
        for s in &mut self.streams {
            let (j, kj) = s.nearest(interval);
            let joins = match j.cmp(&interval) {
                core::cmp::Ordering::Equal => kj == key,
                core::cmp::Ordering::Less => {
                    interval - j <= span && same_origin(&kj, j, &key, interval).unwrap_or(false)
                }
                core::cmp::Ordering::Greater => {
                    j - interval <= span && same_origin(&key, interval, &kj, j).unwrap_or(false)
                }
            };
            if joins {
                s.keys.insert(interval, key);
                return s.id;
            }
        }
        let id = StreamId(self.streams.len() as u32);
        let mut keys = BTreeMap::new();
        keys.insert(interval, key);
        self.streams.push(KeyStream {
            id,
            keys,
            verdict: StreamVerdict::Unauthenticated,
        });
        id
    }

    fn disclose(&mut self, interval: u32, key: Key128, signature: Option<Signature>) -> StreamId {
        let sid = self.assign_stream(key, interval);
        if let Some(signature) = signature {
            let valid = self
                .certificates
                .iter()
                .any(|pk| verify_interval_key::<S>(pk, &signature, &key, interval));
            self.signed_keys.push(SignedKey {
                interval,
                key,
                signature,
                stream: sid,
                valid,
            });
        }
        self.check_buffer(sid);
        sid
    }

    /// Checks every live buffered message the stream's keys can reach.
    fn check_buffer(&mut self, sid: StreamId) {
        let span = self.config.max_chain_span;
        let stream = &self.streams[sid.0 as usize];
        for idx in 0..self.entries.len() {
            let e = &self.entries[idx];
            if e.verdict.expired
                || matches!(e.verdict.integrity, Integrity::Ok | Integrity::Duplicate)
                || e.checked_by.contains(&sid)
            {
                continue;
            }
            let Some(k) = stream.key_for(e.verdict.interval, span) else {
                continue;
            };
            let ok = check_integrity(&e.message, &e.mac, e.verdict.seq, e.verdict.interval, &k);
            let (interval, seq) = (e.verdict.interval, e.verdict.seq);
            let duplicate = ok
                && self.entries.iter().any(|o| {
                    o.verdict.stream == Some(sid)
                        && o.verdict.integrity == Integrity::Ok
                        && o.verdict.interval == interval
                        && o.verdict.seq == seq
                });
            let e = &mut self.entries[idx];
            e.checked_by.push(sid);
            if ok {
                e.verdict.stream = Some(sid);
                e.verdict.integrity = if duplicate { Integrity::Duplicate } else { Integrity::Ok };
            } else {
                e.verdict.integrity = Integrity::Failed;
            }
        }
    }

    fn add_certificate(&mut self, pk: PublicKey) {
        if self.certificates.contains(&pk) {
            return;
        }
        self.certificates.push(pk);
        for sk in &mut self.signed_keys {
            if !sk.valid {
                sk.valid = verify_interval_key::<S>(&pk, &sk.signature, &sk.key, sk.interval);
            }
        }
    }

    fn s4_eligible(&self) -> bool {
        !self.certificates.is_empty() && self.signed_keys.iter().any(|s| s.valid)
    }

    fn next_state(&self, t: FrameType) -> AuthState {
        use AuthState::*;
        let base = match (self.state, t) {
            (S4, _) => S4,
            (s, FrameType::A) => s,
            (S0 | S1, FrameType::B1) => S1,
            (S0 | S1, FrameType::B2) => S2,
            (S0 | S1, FrameType::C) => S3,
            (s @ (S2 | S3), _) => s,
        };
        if matches!(base, S2 | S3) && self.s4_eligible() {
            S4
        } else {
            base
        }
    }

    /// Stream verdicts and message origins after a state change.
    fn refresh_streams(&mut self) {
        if self.state == AuthState::S4 {
            self.authenticate_streams();
        }
        if self.streams.len() >= 2 {
            for s in &mut self.streams {
                if s.verdict != StreamVerdict::Authenticated {
                    s.verdict = StreamVerdict::ImpostorCandidate;
                }
            }
        }
    }

    /// Marks streams holding a `v2`-verified key as authenticated, and with
    /// them every message they verified.
    pub fn authenticate_streams(&mut self) {
        if self.state != AuthState::S4 {
            return;
        }
        for sk in self.signed_keys.iter().filter(|s| s.valid) {
            self.streams[sk.stream.0 as usize].verdict = StreamVerdict::Authenticated;
        }
        for e in &mut self.entries {
            if let (Integrity::Ok, Some(sid)) = (e.verdict.integrity, e.verdict.stream) {
                if self.streams[sid.0 as usize].verdict == StreamVerdict::Authenticated {
                    e.verdict.origin = Origin::Authenticated;
                }
            }
        }
    }
}

/// MAC check of one buffered message against a key claimed for its interval.
pub fn check_integrity(message: &AdsbMessage, mac: &Bits, seq: u8, interval: u32, key: &Key128) -> bool {
    let tag = MacTag {
        bits: mac.clone(),
        seq,
        interval_index: interval,
    };
    verify_mac(&message.0, &tag, key)
}

/// Routes frames to per-ICAO contexts, creating them on first contact.
#[derive(Debug, Clone)]
pub struct Receiver<S: SignatureScheme = EcdsaP256> {
    config: ReceiverConfig,
    contexts: BTreeMap<Icao, ReceiverContext<S>>,
}

impl<S: SignatureScheme> Receiver<S> {
    pub fn new(config: ReceiverConfig) -> Self {
        Self {
            config,
            contexts: BTreeMap::new(),
        }
    }

    pub fn ingest(&mut self, frame: &Frame, rx_interval: u32) -> Result<IngestReport, RxError> {
        let config = &self.config;
        self.contexts
            .entry(frame.icao())
            .or_insert_with(|| ReceiverContext::new(frame.icao(), config.clone()))
            .ingest(frame, rx_interval)
    }

    pub fn context(&self, icao: Icao) -> Option<&ReceiverContext<S>> {
        self.contexts.get(&icao)
    }

    pub fn contexts(&self) -> impl Iterator<Item = &ReceiverContext<S>> {
        self.contexts.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pki::{AircraftKeypair, CertAuthority, HashMock};
    use crate::sender::Transmitter;
    use crate::tesla::{KeyChain, TeslaConfig};

    const ICAO: u32 = 0x3C6DD4;

    struct World {
        ca: CertAuthority<HashMock>,
        genuine: Transmitter<HashMock>,
        spoofer: Transmitter<HashMock>,
    }

    fn world() -> World {
        let ca = CertAuthority::<HashMock>::from_seed(b"trusted-ca");
        let rogue = CertAuthority::<HashMock>::from_seed(b"rogue-ca");
        let icao = Icao::new(ICAO).unwrap();
        let cfg = TeslaConfig::with_chain_length(50);
        let genuine = Transmitter::new(
            ca.issue_certificate(icao, AircraftKeypair::from_seed(b"genuine")),
            KeyChain::generate(&[1; 16], &cfg).unwrap(),
            &cfg,
        )
        .unwrap();
        let spoofer = Transmitter::new(
            rogue.issue_certificate(icao, AircraftKeypair::from_seed(b"spoofer")),
            KeyChain::generate(&[2; 16], &cfg).unwrap(),
            &cfg,
        )
        .unwrap();
        World { ca, genuine, spoofer }
    }

    fn ctx(w: &World) -> ReceiverContext<HashMock> {
        ReceiverContext::new(Icao::new(ICAO).unwrap(), ReceiverConfig::new(alloc::vec![w.ca.public_key()]))
    }

    fn report(n: u8) -> AdsbMessage {
        AdsbMessage::df17(5, Icao::new(ICAO).unwrap(), [0x58, n, 0x82, 0xD6, 0x90, 0xC8, 0xAC])
    }

    #[test]
    fn unwrap_interval_cases() {
        assert_eq!(unwrap_interval(4, 5), Some(4));
        assert_eq!(unwrap_interval(5, 5), None);
        assert_eq!(unwrap_interval(6, 5), None);
        assert_eq!(unwrap_interval(4095, 4096), Some(4095));
        assert_eq!(unwrap_interval(1, 4100), Some(4097));
        assert_eq!(unwrap_interval(4099 & 0xFFF, 4100), Some(4099));
    }

    #[test]
    fn a_then_b1() {
        let mut w = world();
        let mut c = ctx(&w);
        let a = w.genuine.type_a(report(1), 3).unwrap();
        let r = c.ingest(&a, 3).unwrap();
        assert_eq!((r.state_before, r.state_after), (AuthState::S0, AuthState::S0));
        let id = r.message.unwrap();
        let r = c.ingest(&w.genuine.type_b1(3).unwrap(), 4).unwrap();
        assert_eq!(r.state_after, AuthState::S1);
        assert_eq!(r.updates.len(), 1);
        let v = c.verdict(id).unwrap();
        assert_eq!(v.integrity, Integrity::Ok);
        assert_eq!(v.origin, Origin::Unauthenticated);
    }

    #[test]
    fn c_then_b2_authenticates() {
        let mut w = world();
        let mut c = ctx(&w);
        c.ingest(&w.genuine.type_c(), 1).unwrap();
        assert_eq!(c.state(), AuthState::S3);
        let a = c.ingest(&w.genuine.type_a(report(1), 2).unwrap(), 2).unwrap().message.unwrap();
        let r = c.ingest(&w.genuine.type_b2(2).unwrap(), 3).unwrap();
        assert_eq!(r.state_after, AuthState::S4);
        assert_eq!(c.verdict(a).unwrap().origin, Origin::Authenticated);
        assert_eq!(c.streams()[0].verdict, StreamVerdict::Authenticated);
        // later messages of the authenticated stream authenticate on verification
        let b = c.ingest(&w.genuine.type_a(report(2), 3).unwrap(), 3).unwrap().message.unwrap();
        c.ingest(&w.genuine.type_b1(3).unwrap(), 4).unwrap();
        assert_eq!(c.verdict(b).unwrap().origin, Origin::Authenticated);
    }

    #[test]
    fn b2_then_c_authenticates() {
        let w = world();
        let mut c = ctx(&w);
        c.ingest(&w.genuine.type_b2(4).unwrap(), 5).unwrap();
        assert_eq!(c.state(), AuthState::S2);
        c.ingest(&w.genuine.type_b1(5).unwrap(), 6).unwrap();
        assert_eq!(c.state(), AuthState::S2);
        c.ingest(&w.genuine.type_c(), 6).unwrap();
        assert_eq!(c.state(), AuthState::S4);
    }

    #[test]
    fn out_of_order_certificate_first() {
        let w = world();
        let mut c = ctx(&w);
        let seq = [
            (w.genuine.type_c(), 1, AuthState::S3),
            (w.genuine.type_b1(1).unwrap(), 2, AuthState::S3),
            (w.genuine.type_b2(2).unwrap(), 3, AuthState::S4),
        ];
        for (f, t, s) in seq {
            assert_eq!(c.ingest(&f, t).unwrap().state_after, s);
        }
    }

    #[test]
    fn invalid_b2_signature_stays_below_s4_but_keeps_integrity() {
        let mut w = world();
        let mut c = ctx(&w);
        c.ingest(&w.genuine.type_c(), 1).unwrap();
        let a = c.ingest(&w.genuine.type_a(report(9), 2).unwrap(), 2).unwrap().message.unwrap();
        let Frame::B2(mut b2) = w.genuine.type_b2(2).unwrap() else { unreachable!() };
        b2.signature.0[10] ^= 1;
        let r = c.ingest(&Frame::B2(b2), 3).unwrap();
        assert_eq!(r.state_after, AuthState::S3);
        let v = c.verdict(a).unwrap();
        assert_eq!((v.integrity, v.origin), (Integrity::Ok, Origin::Unauthenticated));
    }

    #[test]
    fn certificate_from_untrusted_ca_is_rejected() {
        let w = world();
        let mut c = ctx(&w);
        assert_eq!(c.ingest(&w.spoofer.type_c(), 1), Err(RxError::CertificateRejected));
        assert_eq!(c.state(), AuthState::S0);
        c.ingest(&w.spoofer.type_b2(1).unwrap(), 2).unwrap();
        assert_eq!(c.state(), AuthState::S2);
        assert!(c.certificates().is_empty());
    }

    #[test]
    fn replayed_certificate_cannot_sign_spoofer_keys() {
        let mut w = world();
        let mut c = ctx(&w);
        c.ingest(&w.genuine.type_c(), 1).unwrap();
        let fake = c.ingest(&w.spoofer.type_a(report(3), 2).unwrap(), 2).unwrap().message.unwrap();
        c.ingest(&w.spoofer.type_b2(2).unwrap(), 3).unwrap();
        assert_eq!(c.state(), AuthState::S3);
        let v = c.verdict(fake).unwrap();
        assert_eq!((v.integrity, v.origin), (Integrity::Ok, Origin::Unauthenticated));
    }

    #[test]
    fn two_streams_are_separated() {
        let mut w = world();
        let mut c = ctx(&w);
        let g = c.ingest(&w.genuine.type_a(report(1), 2).unwrap(), 2).unwrap().message.unwrap();
        let s = c.ingest(&w.spoofer.type_a(report(1), 2).unwrap(), 2).unwrap().message.unwrap();
        c.ingest(&w.spoofer.type_b1(2).unwrap(), 3).unwrap();
        // the genuine message failed against the spoofer's key for now
        assert_eq!(c.verdict(g).unwrap().integrity, Integrity::Failed);
        c.ingest(&w.genuine.type_b1(2).unwrap(), 3).unwrap();
        let (vg, vs) = (c.verdict(g).unwrap().clone(), c.verdict(s).unwrap().clone());
        assert_eq!(vg.integrity, Integrity::Ok);
        assert_eq!(vs.integrity, Integrity::Ok);
        assert_ne!(vg.stream, vs.stream);
        assert_eq!(c.streams().len(), 2);
        assert!(c.streams().iter().all(|s| s.verdict == StreamVerdict::ImpostorCandidate));

        c.ingest(&w.genuine.type_c(), 3).unwrap();
        c.ingest(&w.genuine.type_b2(3).unwrap(), 4).unwrap();
        assert_eq!(c.state(), AuthState::S4);
        assert_eq!(c.verdict(g).unwrap().origin, Origin::Authenticated);
        assert_eq!(c.verdict(s).unwrap().origin, Origin::Unauthenticated);
        let auth: Vec<_> = c.streams().iter().map(|s| s.verdict).collect();
        assert!(auth.contains(&StreamVerdict::Authenticated) && auth.contains(&StreamVerdict::ImpostorCandidate));
    }

    #[test]
    fn stream_assignment_is_idempotent_and_chains() {
        let w = world();
        let mut c = ctx(&w);
        let k = |i| w.genuine.chain().key(i).unwrap();
        let a = c.assign_stream(k(2), 2);
        assert_eq!(c.assign_stream(k(3), 3), a);
        assert_eq!(c.assign_stream(k(3), 3), a);
        assert_eq!(c.assign_stream(k(1), 1), a);
        assert_ne!(c.assign_stream(w.spoofer.chain().key(3).unwrap(), 3), a);
        // a genuine key relabelled to another interval does not chain
        assert_ne!(c.assign_stream(k(3), 6), a);
    }

    #[test]
    fn duplicates_and_early_disclosure() {
        let mut w = world();
        let mut c = ctx(&w);
        let Frame::A(a) = w.genuine.type_a(report(1), 2).unwrap() else { unreachable!() };
        let first = c.ingest(&Frame::A(a.clone()), 2).unwrap().message.unwrap();
        let again = c.ingest(&Frame::A(a), 2).unwrap().message.unwrap();
        assert!(matches!(
            c.ingest(&w.genuine.type_b1(2).unwrap(), 2),
            Err(RxError::EarlyDisclosure { .. })
        ));
        c.ingest(&w.genuine.type_b1(2).unwrap(), 3).unwrap();
        assert_eq!(c.verdict(first).unwrap().integrity, Integrity::Ok);
        assert_eq!(c.verdict(again).unwrap().integrity, Integrity::Duplicate);
        assert_eq!(
            c.ingest(&w.genuine.type_b1(1).unwrap(), 2),
            Err(RxError::ClockRegression { last: 3, got: 2 })
        );
    }

    #[test]
    fn buffer_expires_after_horizon() {
        let mut w = world();
        let mut c = ctx(&w);
        let m = c.ingest(&w.genuine.type_a(report(1), 2).unwrap(), 2).unwrap().message.unwrap();
        let r = c.ingest(&w.genuine.type_b1(5).unwrap(), 6).unwrap();
        let v = c.verdict(m).unwrap();
        assert!(v.expired);
        assert_eq!(v.integrity, Integrity::Unknown);
        assert_eq!(r.updates.len(), 1);
        assert_eq!(c.pending(), 0);
    }

    #[test]
    fn wrong_icao_is_rejected() {
        let w = world();
        let mut c = ReceiverContext::<HashMock>::new(Icao::new(1).unwrap(), ReceiverConfig::new(alloc::vec![]));
        assert!(matches!(c.ingest(&w.genuine.type_c(), 0), Err(RxError::IcaoMismatch { .. })));
    }
}
