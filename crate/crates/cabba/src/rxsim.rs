//! Scenario replay: a script of senders and timed frames fed to a receiver.
//!
//! ```text
//! # comment
//! ca <name> [seed=<text>] [untrusted]
//! sender <name> icao=<hex> ca=<ca> [chain=<u64>] [length=<n>] [key=<text>]
//! <t> <sender> A
//! <t> <sender> B1 <interval>
//! <t> <sender> B2 <interval>
//! <t> <sender> C
//! ```
//!
//! `t` is the receiver interval the frame arrives in. Type A frames are
//! authenticated under the sender's key for interval `t`; B1 and B2 disclose
//! the key of the given interval. Events are processed in file order.

use std::collections::BTreeMap;

use cabba_core::frame::AdsbMessage;
use cabba_core::pki::{AircraftKeypair, CertAuthority, SignatureScheme};
use cabba_core::receiver::{
    AuthState, Integrity, MessageId, Origin, Receiver, ReceiverConfig, StreamId, StreamVerdict,
};
use cabba_core::sender::{SenderError, Transmitter};
use cabba_core::tesla::{KeyChain, TeslaConfig};
use cabba_core::{Frame, FrameType, Icao};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::formats::parse_icao;

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Sender { line: usize, source: SenderError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameKind {
    A,
    B1(u32),
    B2(u32),
    C,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptEvent {
    pub line: usize,
    pub t: u32,
    pub sender: String,
    pub kind: FrameKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaDecl {
    pub name: String,
    pub seed: String,
    pub trusted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenderDecl {
    pub name: String,
    pub icao: Icao,
    pub ca: String,
    pub chain_seed: u64,
    pub length: u32,
    pub key_seed: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Script {
    pub cas: Vec<CaDecl>,
    pub senders: Vec<SenderDecl>,
    pub events: Vec<ScriptEvent>,
}

fn options<'a>(
    line: usize,
    words: impl Iterator<Item = &'a str>,
) -> Result<(BTreeMap<&'a str, &'a str>, Vec<&'a str>), ScriptError> {
    let mut kv = BTreeMap::new();
    let mut flags = Vec::new();
    for w in words {
        match w.split_once('=') {
            Some((k, v)) => {
                if kv.insert(k, v).is_some() {
                    return Err(ScriptError::Syntax {
                        line,
                        msg: format!("duplicate option {k}"),
                    });
                }
            }
            None => flags.push(w),
        }
    }
    Ok((kv, flags))
}

pub fn parse_script(text: &str) -> Result<Script, ScriptError> {
    let mut script = Script::default();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let err = |msg: String| ScriptError::Syntax { line, msg };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut words = body.split_whitespace();
        let head = words.next().expect("non-empty line");
        match head {
            "ca" => {
                let name = words.next().ok_or_else(|| err("ca needs a name".into()))?.to_string();
                let (kv, flags) = options(line, words)?;
                let trusted = match flags.as_slice() {
                    [] | ["trusted"] => true,
                    ["untrusted"] => false,
                    other => return Err(err(format!("unexpected {other:?}"))),
                };
                if let Some(k) = kv.keys().find(|k| **k != "seed") {
                    return Err(err(format!("unknown option {k}")));
                }
                let seed = kv.get("seed").map_or_else(|| name.clone(), |s| s.to_string());
                script.cas.push(CaDecl { name, seed, trusted });
            }
            "sender" => {
                let name = words.next().ok_or_else(|| err("sender needs a name".into()))?.to_string();
                let (kv, flags) = options(line, words)?;
                if !flags.is_empty() {
                    return Err(err(format!("unexpected {flags:?}")));
                }
                if let Some(k) = kv.keys().find(|k| !["icao", "ca", "chain", "length", "key"].contains(k)) {
                    return Err(err(format!("unknown option {k}")));
                }
                let icao = parse_icao(kv.get("icao").ok_or_else(|| err("sender needs icao=".into()))?)
                    .map_err(|e| err(e.to_string()))?;
                let ca = kv.get("ca").ok_or_else(|| err("sender needs ca=".into()))?.to_string();
                if !script.cas.iter().any(|c| c.name == ca) {
                    return Err(err(format!("unknown ca {ca}")));
                }
                let num = |k: &str, default: u64| -> Result<u64, ScriptError> {
                    kv.get(k).map_or(Ok(default), |v| v.parse().map_err(|_| err(format!("bad {k}={v}"))))
                };
                let length = num("length", 100)?;
                if length == 0 || length > u32::MAX as u64 {
                    return Err(err("length out of range".into()));
                }
                script.senders.push(SenderDecl {
                    key_seed: kv.get("key").map_or_else(|| name.clone(), |s| s.to_string()),
                    name,
                    icao,
                    ca,
                    chain_seed: num("chain", script.senders.len() as u64)?,
                    length: length as u32,
                });
            }
            t => {
                let t: u32 = t.parse().map_err(|_| err(format!("expected a keyword or interval, got {t:?}")))?;
                let sender = words.next().ok_or_else(|| err("event needs a sender".into()))?.to_string();
                if !script.senders.iter().any(|s| s.name == sender) {
                    return Err(err(format!("unknown sender {sender}")));
                }
                let ty = words.next().ok_or_else(|| err("event needs a frame type".into()))?;
                let mut interval = || -> Result<u32, ScriptError> {
                    words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| err(format!("{ty} needs a key interval")))
                };
                let kind = match FrameType::from_name(ty) {
                    Some(FrameType::A) => FrameKind::A,
                    Some(FrameType::B1) => FrameKind::B1(interval()?),
                    Some(FrameType::B2) => FrameKind::B2(interval()?),
                    Some(FrameType::C) => FrameKind::C,
                    None => return Err(err(format!("unknown frame type {ty}"))),
                };
                if let Some(extra) = words.next() {
                    return Err(err(format!("unexpected {extra:?}")));
                }
                script.events.push(ScriptEvent { line, t, sender, kind });
            }
        }
    }
    Ok(script)
}

/// One row of the event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoggedEvent {
    pub t: u32,
    pub icao: String,
    pub sender: String,
    pub frame_type: String,
    pub state_before: String,
    pub state_after: String,
    pub verdicts_changed: usize,
    /// Why the receiver refused the frame, if it did.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejected: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StreamSummary {
    pub stream: u32,
    pub verdict: StreamVerdict,
    pub keys: usize,
    pub first_interval: u32,
    pub last_interval: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MessageSummary {
    pub message: u64,
    pub sender: String,
    pub interval: u32,
    pub seq: u8,
    pub integrity: Integrity,
    pub origin: Origin,
    pub stream: Option<u32>,
    pub expired: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContextSummary {
    pub icao: String,
    pub state: AuthState,
    pub streams: Vec<StreamSummary>,
    pub messages: Vec<MessageSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimOutcome {
    pub events: Vec<LoggedEvent>,
    pub contexts: Vec<ContextSummary>,
}

struct Actor<S: SignatureScheme> {
    tx: Transmitter<S>,
}

fn chain_seed(seed: u64) -> [u8; 16] {
    ChaCha8Rng::seed_from_u64(seed).gen()
}

/// Replays `script`; `seed` drives the content of the position reports.
pub fn run_script<S: SignatureScheme>(script: &Script, seed: u64) -> Result<SimOutcome, ScriptError> {
    let cas: BTreeMap<&str, (CertAuthority<S>, bool)> = script
        .cas
        .iter()
        .map(|c| (c.name.as_str(), (CertAuthority::<S>::from_seed(c.seed.as_bytes()), c.trusted)))
        .collect();
    let trusted = cas.values().filter(|(_, t)| *t).map(|(ca, _)| ca.public_key()).collect();
    let mut rx = Receiver::<S>::new(ReceiverConfig::new(trusted));

    let mut actors: BTreeMap<&str, Actor<S>> = BTreeMap::new();
    for s in &script.senders {
        let cfg = TeslaConfig::with_chain_length(s.length);
        let chain = KeyChain::generate(&chain_seed(s.chain_seed), &cfg).expect("length checked at parse");
        let ca = &cas[s.ca.as_str()].0;
        let id = ca.issue_certificate(s.icao, AircraftKeypair::<S>::from_seed(s.key_seed.as_bytes()));
        let tx = Transmitter::new(id, chain, &cfg).expect("default configuration is valid");
        actors.insert(s.name.as_str(), Actor { tx });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::new();
    let mut owners: BTreeMap<(Icao, MessageId), String> = BTreeMap::new();
    for ev in &script.events {
        let actor = actors.get_mut(ev.sender.as_str()).expect("sender checked at parse");
        let sender_err = |source| ScriptError::Sender { line: ev.line, source };
        let frame: Frame = match ev.kind {
            FrameKind::A => {
                let icao = actor.tx.icao();
                actor
                    .tx
                    .type_a(AdsbMessage::df17(5, icao, rng.gen()), ev.t)
                    .map_err(sender_err)?
            }
            FrameKind::B1(i) => actor.tx.type_b1(i).map_err(sender_err)?,
            FrameKind::B2(i) => actor.tx.type_b2(i).map_err(sender_err)?,
            FrameKind::C => actor.tx.type_c(),
        };
        let icao = frame.icao();
        let before = rx.context(icao).map_or(AuthState::S0, |c| c.state());
        let logged = match rx.ingest(&frame, ev.t) {
            Ok(report) => {
                if let Some(m) = report.message {
                    owners.insert((icao, m), ev.sender.clone());
                }
                LoggedEvent {
                    t: ev.t,
                    icao: icao.to_string(),
                    sender: ev.sender.clone(),
                    frame_type: frame.frame_type().name().into(),
                    state_before: report.state_before.name().into(),
                    state_after: report.state_after.name().into(),
                    verdicts_changed: report.updates.len(),
                    rejected: None,
                }
            }
            Err(e) => LoggedEvent {
                t: ev.t,
                icao: icao.to_string(),
                sender: ev.sender.clone(),
                frame_type: frame.frame_type().name().into(),
                state_before: before.name().into(),
                state_after: before.name().into(),
                verdicts_changed: 0,
                rejected: Some(e.to_string()),
            },
        };
        events.push(logged);
    }

    let contexts = rx
        .contexts()
        .map(|c| ContextSummary {
            icao: c.icao().to_string(),
            state: c.state(),
            streams: c
                .streams()
                .iter()
                .map(|s| StreamSummary {
                    stream: s.id.0,
                    verdict: s.verdict,
                    keys: s.keys.len(),
                    first_interval: *s.keys.keys().next().expect("streams are never empty"),
                    last_interval: s.anchor().0,
                })
                .collect(),
            messages: c
                .verdicts()
                .into_iter()
                .map(|v| MessageSummary {
                    message: v.message.0,
                    sender: owners.get(&(c.icao(), v.message)).cloned().unwrap_or_default(),
                    interval: v.interval,
                    seq: v.seq,
                    integrity: v.integrity,
                    origin: v.origin,
                    stream: v.stream.map(|StreamId(s)| s),
                    expired: v.expired,
                })
                .collect(),
        })
        .collect();
    Ok(SimOutcome { events, contexts })
}
