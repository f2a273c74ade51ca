//! Bit-exact layouts of the four CABBA frame types.
//!
//! Every frame is a pair of logical packets: an in-phase packet sent with
//! PPM (what a legacy 1090ES receiver sees) and a quadrature packet, three
//! times as long, sent with the phase overlay.
//!
//! In-phase layouts (bits):
//!
//! | type | layout                                                           | total |
//! |------|------------------------------------------------------------------|-------|
//! | A    | plain DF17 extended squitter (DF, CA, ICAO, ME, PI)              | 112   |
//! | B1   | DF22 ∥ sub 1 ∥ ICAO ∥ key[0..50] ∥ pad 6 ∥ CRC-24                | 112   |
//! | B2   | DF22 ∥ sub 2 ∥ ICAO ∥ interval 12 ∥ key 128 ∥ sig[0..14] ∥ CRC-24 | 210   |
//! | C    | DF22 ∥ sub 3 ∥ ICAO ∥ pubkey[0..181] ∥ pad 5 ∥ CRC-24            | 242   |
//!
//! Quadrature packets start with a 12-bit reference-phase field (all zero),
//! followed by the payload protected with Reed-Solomon codes over GF(64),
//! then zero padding:
//!
//! | type | payload                            | RS codewords (n, k)  | total |
//! |------|------------------------------------|----------------------|-------|
//! | A    | MAC (λ) ∥ seq 8, padded to 204     | (54, 34)             | 336   |
//! | B1   | interval 12 ∥ key[50..128], to 204 | (54, 34)             | 336   |
//! | B2   | sig[14..512]                       | (52, 42), (51, 41)   | 630   |
//! | C    | pubkey[181..256] ∥ sig 512         | (59, 49), (59, 49)   | 726   |
//!
//! Each frame spends exactly 120 bits on parity.

use alloc::vec::Vec;
use core::fmt;

use crate::bits::Bits;
use crate::crc24;
use crate::fec::{ReedSolomon, RsError, FIELD_BITS};
use crate::pki::{PublicKey, Signature, PUBLIC_KEY_BYTES, SIGNATURE_BYTES};
use crate::tesla::{Key128, MacTag, DEFAULT_MAC_BITS, MAX_MAC_BITS};

pub const ADSB_MESSAGE_BYTES: usize = 14;
pub const ADSB_MESSAGE_BITS: usize = 112;
pub const PREAMBLE_BITS: usize = 8;
pub const REFERENCE_PHASE_BITS: usize = 12;
pub const INTERVAL_TAG_BITS: usize = 12;
pub const MAX_INTERVAL_TAG: u32 = (1 << INTERVAL_TAG_BITS) - 1;
pub const PARITY_BITS_PER_FRAME: usize = 120;
pub const SEQ_BITS: usize = 8;

pub const DF_EXTENDED_SQUITTER: u8 = 17;
pub const DF_CABBA: u8 = 22;

const B1_KEY_INPHASE_BITS: usize = 50;
const B2_SIG_INPHASE_BITS: usize = 14;
const C_PUBKEY_INPHASE_BITS: usize = 181;

/// 24-bit ICAO aircraft address.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "u32", into = "u32"))]
pub struct Icao(u32);

impl Icao {
    pub const fn new(addr: u32) -> Option<Self> {
        if addr <= 0xFF_FFFF {
            Some(Self(addr))
        } else {
            None
        }
    }

    pub const fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for Icao {
    type Error = &'static str;
    fn try_from(v: u32) -> Result<Self, Self::Error> {
        Icao::new(v).ok_or("ICAO address exceeds 24 bits")
    }
}

impl From<Icao> for u32 {
    fn from(i: Icao) -> u32 {
        i.0
    }
}

impl fmt::Debug for Icao {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Icao({:06x})", self.0)
    }
}

impl fmt::Display for Icao {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:06x}", self.0)
    }
}

/// A raw 112-bit Mode S extended squitter.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdsbMessage(pub [u8; ADSB_MESSAGE_BYTES]);

impl fmt::Debug for AdsbMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AdsbMessage(")?;
        for b in self.0 {
            write!(f, "{b:02X}")?;
        }
        f.write_str(")")
    }
}

impl AdsbMessage {
    /// Builds a DF17 message and fills in its parity field.
    pub fn df17(capability: u8, icao: Icao, me: [u8; 7]) -> Self {
        let mut b = Bits::with_capacity(ADSB_MESSAGE_BITS);
        b.push_uint(DF_EXTENDED_SQUITTER as u64, 5);
        b.push_uint(capability as u64 & 0b111, 3);
        b.push_uint(icao.get() as u64, 24);
        b.push_bytes(&me, 56);
        b.push_uint(crc24::parity(&b) as u64, 24);
        let mut out = [0u8; ADSB_MESSAGE_BYTES];
        out.copy_from_slice(&b.to_bytes());
        Self(out)
    }

    pub fn downlink_format(&self) -> u8 {
        self.0[0] >> 3
    }

    pub fn icao(&self) -> Icao {
        Icao((self.0[1] as u32) << 16 | (self.0[2] as u32) << 8 | self.0[3] as u32)
    }

    pub fn crc_ok(&self) -> bool {
        crc24::check(&self.to_bits())
    }

    pub fn to_bits(&self) -> Bits {
        Bits::from_bytes(&self.0, ADSB_MESSAGE_BITS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FrameType {
    A,
    B1,
    B2,
    C,
}

impl FrameType {
    pub const ALL: [FrameType; 4] = [FrameType::A, FrameType::B1, FrameType::B2, FrameType::C];

    pub const fn in_phase_len(self) -> usize {
        match self {
            FrameType::A | FrameType::B1 => 112,
            FrameType::B2 => 210,
            FrameType::C => 242,
        }
    }

    pub const fn quadrature_len(self) -> usize {
        3 * self.in_phase_len()
    }

    /// Channel occupancy of one frame: in-phase bits plus the 8 µs preamble at 1 Mbit/s.
    pub const fn airtime_us(self) -> u32 {
        (self.in_phase_len() + PREAMBLE_BITS) as u32
    }

    pub const fn name(self) -> &'static str {
        match self {
            FrameType::A => "A",
            FrameType::B1 => "B1",
            FrameType::B2 => "B2",
            FrameType::C => "C",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(s))
    }

    /// Reed-Solomon parity bits in the quadrature packet.
    pub fn parity_bits(self) -> usize {
        self.quadrature_plan().blocks.iter().map(|b| b.1).sum::<usize>() * FIELD_BITS
    }

    /// `(n, k)` of each Reed-Solomon codeword, in packet order.
    pub fn rs_blocks(self) -> Vec<(usize, usize)> {
        self.quadrature_plan().blocks.iter().map(|&(k, p)| (k + p, k)).collect()
    }

    const fn subtype(self) -> u8 {
        match self {
            FrameType::A => 0,
            FrameType::B1 => 1,
            FrameType::B2 => 2,
            FrameType::C => 3,
        }
    }

    fn quadrature_plan(self) -> QuadraturePlan {
        match self {
            FrameType::A | FrameType::B1 => QuadraturePlan {
                payload_bits: 204,
                blocks: &[(34, 20)],
            },
            FrameType::B2 => QuadraturePlan {
                payload_bits: 512 - B2_SIG_INPHASE_BITS,
                blocks: &[(42, 10), (41, 10)],
            },
            FrameType::C => QuadraturePlan {
                payload_bits: (256 - C_PUBKEY_INPHASE_BITS) + 512,
                blocks: &[(49, 10), (49, 10)],
            },
        }
    }
}

impl fmt::Display for FrameType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Airtime in microseconds of a frame of the given type.
pub fn frame_airtime_us(t: FrameType) -> u32 {
    t.airtime_us()
}

struct QuadraturePlan {
    payload_bits: usize,
    /// `(data symbols, parity symbols)` per codeword.
    blocks: &'static [(usize, usize)],
}

impl QuadraturePlan {
    fn data_bits(&self) -> usize {
        self.blocks.iter().map(|b| b.0).sum::<usize>() * FIELD_BITS
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameA {
    pub message: AdsbMessage,
    /// Truncated MAC, `λ` bits.
    pub mac: Bits,
    pub seq: u8,
}

impl FrameA {
    pub fn icao(&self) -> Icao {
        self.message.icao()
    }

    /// Security data bound to the interval the receiver saw it in.
    pub fn tag(&self, interval_index: u32) -> MacTag {
        MacTag {
            bits: self.mac.clone(),
            seq: self.seq,
            interval_index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameB1 {
    pub icao: Icao,
    /// Interval index modulo 4096.
    pub interval_index: u32,
    pub key: Key128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameB2 {
    pub icao: Icao,
    /// Interval index modulo 4096.
    pub interval_index: u32,
    pub key: Key128,
    pub signature: Signature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameC {
    pub icao: Icao,
    pub public_key: PublicKey,
    pub signature: Signature,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    A(FrameA),
    B1(FrameB1),
    B2(FrameB2),
    C(FrameC),
}

impl Frame {
    pub fn frame_type(&self) -> FrameType {
        match self {
            Frame::A(_) => FrameType::A,
            Frame::B1(_) => FrameType::B1,
            Frame::B2(_) => FrameType::B2,
            Frame::C(_) => FrameType::C,
        }
    }

    pub fn icao(&self) -> Icao {
        match self {
            Frame::A(f) => f.icao(),
            Frame::B1(f) => f.icao,
            Frame::B2(f) => f.icao,
            Frame::C(f) => f.icao,
        }
    }
}

/// Logical packets of one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedFrame {
    pub frame_type: FrameType,
    pub in_phase: Bits,
    pub quadrature: Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CodecConfig {
    pub mac_len_bits: u16,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            mac_len_bits: DEFAULT_MAC_BITS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("layout violation: {0}")]
    LayoutViolation(&'static str),
    #[error("unknown frame type")]
    UnknownFrameType,
    #[error("CRC-24 mismatch")]
    CrcMismatch,
    #[error("quadrature payload not correctable")]
    RsUncorrectable,
    #[error("{role} packet has {found} bits, expected {expected}")]
    BadLength {
        role: &'static str,
        expected: usize,
        found: usize,
    },
}

fn cabba_header(t: FrameType, icao: Icao) -> Bits {
    let mut b = Bits::with_capacity(t.in_phase_len());
    b.push_uint(DF_CABBA as u64, 5);
    b.push_uint(t.subtype() as u64, 3);
    b.push_uint(icao.get() as u64, 24);
    b
}

fn seal_crc(mut b: Bits, t: FrameType) -> Bits {
    debug_assert_eq!(b.len() + 24, t.in_phase_len());
    let p = crc24::parity(&b);
    b.push_uint(p as u64, 24);
    b
}

fn encode_quadrature(t: FrameType, payload: &Bits) -> Bits {
    let plan = t.quadrature_plan();
    debug_assert!(payload.len() <= plan.payload_bits);
    let mut data = payload.clone();
    data.resize(plan.data_bits());

    let mut out = Bits::zeros(REFERENCE_PHASE_BITS);
    let mut cursor = 0;
    for &(k, parity) in plan.blocks {
        let symbols: Vec<u8> = (0..k)
            .map(|s| data.read_uint(cursor + s * FIELD_BITS, FIELD_BITS) as u8)
            .collect();
        cursor += k * FIELD_BITS;
        let cw = ReedSolomon::new(parity)
            .encode_codeword(&symbols)
            .expect("plan keeps codewords within GF(64) length");
        for s in cw {
            out.push_uint(s as u64, FIELD_BITS);
        }
    }
    out.resize(t.quadrature_len());
    out
}

/// Error-corrects the quadrature packet and returns its payload bits.
fn decode_quadrature(t: FrameType, q: &Bits) -> Result<Bits, FrameError> {
    let plan = t.quadrature_plan();
    let mut data = Bits::with_capacity(plan.data_bits());
    let mut cursor = REFERENCE_PHASE_BITS;
    for &(k, parity) in plan.blocks {
        let n = k + parity;
        let mut cw: Vec<u8> = (0..n)
            .map(|s| q.read_uint(cursor + s * FIELD_BITS, FIELD_BITS) as u8)
            .collect();
        cursor += n * FIELD_BITS;
        ReedSolomon::new(parity).decode(&mut cw).map_err(|e| match e {
            RsError::Uncorrectable => FrameError::RsUncorrectable,
            _ => FrameError::LayoutViolation("malformed codeword"),
        })?;
        for &s in &cw[..k] {
            data.push_uint(s as u64, FIELD_BITS);
        }
    }
    if data.as_slice()[plan.payload_bits..].iter().any(|&b| b) {
        return Err(FrameError::LayoutViolation("non-zero quadrature padding"));
    }
    data.truncate(plan.payload_bits);
    Ok(data)
}

fn check_interval(i: u32) -> Result<(), FrameError> {
    if i > MAX_INTERVAL_TAG {
        Err(FrameError::LayoutViolation("interval index exceeds 12 bits"))
    } else {
        Ok(())
    }
}

pub fn encode_frame(frame: &Frame, cfg: &CodecConfig) -> Result<EncodedFrame, FrameError> {
    let t = frame.frame_type();
    let (in_phase, payload) = match frame {
        Frame::A(f) => {
            if f.message.downlink_format() != DF_EXTENDED_SQUITTER {
                return Err(FrameError::LayoutViolation("Type A must carry a DF17 message"));
            }
            if !f.message.crc_ok() {
                return Err(FrameError::LayoutViolation("ADS-B message parity is wrong"));
            }
            if f.mac.len() != cfg.mac_len_bits as usize || cfg.mac_len_bits > MAX_MAC_BITS {
                return Err(FrameError::LayoutViolation("MAC length differs from codec setting"));
            }
            let mut q = f.mac.clone();
            q.push_uint(f.seq as u64, SEQ_BITS);
            (f.message.to_bits(), q)
        }
        Frame::B1(f) => {
            check_interval(f.interval_index)?;
            let key = f.key.to_bits();
            let mut i = cabba_header(t, f.icao);
            i.extend(&key.slice(0, B1_KEY_INPHASE_BITS));
            i.resize(t.in_phase_len() - 24);
            let mut q = Bits::new();
            q.push_uint(f.interval_index as u64, INTERVAL_TAG_BITS);
            q.extend(&key.slice(B1_KEY_INPHASE_BITS, 128));
            (seal_crc(i, t), q)
        }
        Frame::B2(f) => {
            check_interval(f.interval_index)?;
            let sig = Bits::from_bytes(&f.signature.0, 512);
            let mut i = cabba_header(t, f.icao);
            i.push_uint(f.interval_index as u64, INTERVAL_TAG_BITS);
            i.extend(&f.key.to_bits());
            i.extend(&sig.slice(0, B2_SIG_INPHASE_BITS));
            (seal_crc(i, t), sig.slice(B2_SIG_INPHASE_BITS, 512))
        }
        Frame::C(f) => {
            let pk = Bits::from_bytes(&f.public_key.0, 256);
            let mut i = cabba_header(t, f.icao);
            i.extend(&pk.slice(0, C_PUBKEY_INPHASE_BITS));
            i.resize(t.in_phase_len() - 24);
            let mut q = pk.slice(C_PUBKEY_INPHASE_BITS, 256);
            q.extend(&Bits::from_bytes(&f.signature.0, 512));
            (seal_crc(i, t), q)
        }
    };
    Ok(EncodedFrame {
        frame_type: t,
        in_phase,
        quadrature: encode_quadrature(t, &payload),
    })
}

/// Frame type from the in-phase length and its format fields.
pub fn classify_frame(in_phase: &Bits) -> Result<FrameType, FrameError> {
    if in_phase.len() < PREAMBLE_BITS {
        return Err(FrameError::UnknownFrameType);
    }
    let df = in_phase.read_uint(0, 5) as u8;
    let sub = in_phase.read_uint(5, 3) as u8;
    let t = match (in_phase.len(), df, sub) {
        (112, DF_EXTENDED_SQUITTER, _) => FrameType::A,
        (112, DF_CABBA, 1) => FrameType::B1,
        (210, DF_CABBA, 2) => FrameType::B2,
        (242, DF_CABBA, 3) => FrameType::C,
        _ => return Err(FrameError::UnknownFrameType),
    };
    Ok(t)
}

/// In-phase length implied by the leading format fields, if recognised.
/// Lets a demodulator know how many symbols to read after the first eight.
pub fn in_phase_len_from_header(df: u8, subtype: u8) -> Option<usize> {
    match (df, subtype) {
        (DF_EXTENDED_SQUITTER, _) => Some(FrameType::A.in_phase_len()),
        (DF_CABBA, 1) => Some(FrameType::B1.in_phase_len()),
        (DF_CABBA, 2) => Some(FrameType::B2.in_phase_len()),
        (DF_CABBA, 3) => Some(FrameType::C.in_phase_len()),
        _ => None,
    }
}

fn bits_to_array<const N: usize>(bits: &Bits) -> [u8; N] {
    let mut out = [0u8; N];
    out.copy_from_slice(&bits.to_bytes());
    out
}

pub fn decode_frame(in_phase: &Bits, quadrature: &Bits, cfg: &CodecConfig) -> Result<Frame, FrameError> {
    let t = classify_frame(in_phase)?;
    if quadrature.len() != t.quadrature_len() {
        return Err(FrameError::BadLength {
            role: "quadrature",
            expected: t.quadrature_len(),
            found: quadrature.len(),
        });
    }
    if !crc24::check(in_phase) {
        return Err(FrameError::CrcMismatch);
    }
    let payload = decode_quadrature(t, quadrature)?;
    let icao = Icao(in_phase.read_uint(8, 24) as u32);
    let frame = match t {
        FrameType::A => {
            let lambda = cfg.mac_len_bits as usize;
            if lambda > MAX_MAC_BITS as usize {
                return Err(FrameError::LayoutViolation("MAC length over 196 bits"));
            }
            if payload.as_slice()[lambda + SEQ_BITS..].iter().any(|&b| b) {
                return Err(FrameError::LayoutViolation("non-zero bits after sequence number"));
            }
            Frame::A(FrameA {
                message: AdsbMessage(bits_to_array(in_phase)),
                mac: payload.slice(0, lambda),
                seq: payload.read_uint(lambda, SEQ_BITS) as u8,
            })
        }
        FrameType::B1 => {
            let body_end = 32 + B1_KEY_INPHASE_BITS;
            if in_phase.as_slice()[body_end..t.in_phase_len() - 24].iter().any(|&b| b) {
                return Err(FrameError::LayoutViolation("non-zero in-phase padding"));
            }
            if payload.as_slice()[INTERVAL_TAG_BITS + 78..].iter().any(|&b| b) {
                return Err(FrameError::LayoutViolation("non-zero quadrature padding"));
            }
            let mut key = in_phase.slice(32, body_end);
            key.extend(&payload.slice(INTERVAL_TAG_BITS, INTERVAL_TAG_BITS + 78));
            Frame::B1(FrameB1 {
                icao,
                interval_index: payload.read_uint(0, INTERVAL_TAG_BITS) as u32,
                key: Key128::from_bits(&key),
            })
        }
        FrameType::B2 => {
            let key_start = 32 + INTERVAL_TAG_BITS;
            let mut sig = in_phase.slice(key_start + 128, key_start + 128 + B2_SIG_INPHASE_BITS);
            sig.extend(&payload);
            Frame::B2(FrameB2 {
                icao,
                interval_index: in_phase.read_uint(32, INTERVAL_TAG_BITS) as u32,
                key: Key128::from_bits(&in_phase.slice(key_start, key_start + 128)),
                signature: Signature(bits_to_array::<SIGNATURE_BYTES>(&sig)),
            })
        }
        FrameType::C => {
            let body_end = 32 + C_PUBKEY_INPHASE_BITS;
            if in_phase.as_slice()[body_end..t.in_phase_len() - 24].iter().any(|&b| b) {
                return Err(FrameError::LayoutViolation("non-zero in-phase padding"));
            }
            let tail = 256 - C_PUBKEY_INPHASE_BITS;
            let mut pk = in_phase.slice(32, body_end);
            pk.extend(&payload.slice(0, tail));
            Frame::C(FrameC {
                icao,
                public_key: PublicKey(bits_to_array::<PUBLIC_KEY_BYTES>(&pk)),
                signature: Signature(bits_to_array::<SIGNATURE_BYTES>(&payload.slice(tail, tail + 512))),
            })
        }
    };
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn icao() -> Icao {
        Icao::new(0x4840D6).unwrap()
    }

    fn sample_a() -> Frame {
        let msg = AdsbMessage([0x8D, 0x48, 0x40, 0xD6, 0x20, 0x2C, 0xC3, 0x71, 0xC3, 0x2C, 0xE0, 0x57, 0x60, 0x98]);
        Frame::A(FrameA {
            message: msg,
            mac: Bits::from_bytes(&[0xA5; 25], 196),
            seq: 42,
        })
    }

    fn sample_b2() -> Frame {
        Frame::B2(FrameB2 {
            icao: icao(),
            interval_index: 4095,
            key: Key128([0x11; 16]),
            signature: Signature(core::array::from_fn(|i| i as u8)),
        })
    }

    #[test]
    fn packet_lengths() {
        let cfg = CodecConfig::default();
        let a = encode_frame(&sample_a(), &cfg).unwrap();
        assert_eq!((a.in_phase.len(), a.quadrature.len()), (112, 336));
        let b2 = encode_frame(&sample_b2(), &cfg).unwrap();
        assert_eq!((b2.in_phase.len(), b2.quadrature.len()), (210, 630));
        let c = Frame::C(FrameC {
            icao: icao(),
            public_key: PublicKey([7; 32]),
            signature: Signature([9; 64]),
        });
        let c = encode_frame(&c, &cfg).unwrap();
        assert_eq!((c.in_phase.len(), c.quadrature.len()), (242, 726));
    }

    #[test]
    fn parity_budget_is_120_bits_for_every_type() {
        for t in FrameType::ALL {
            let plan = t.quadrature_plan();
            let parity: usize = plan.blocks.iter().map(|b| b.1 * FIELD_BITS).sum();
            assert_eq!(parity, PARITY_BITS_PER_FRAME, "{t}");
            let used = REFERENCE_PHASE_BITS + plan.blocks.iter().map(|b| (b.0 + b.1) * FIELD_BITS).sum::<usize>();
            assert!(used <= t.quadrature_len());
            assert!(plan.data_bits() >= plan.payload_bits);
            assert!(plan.blocks.iter().all(|b| b.0 + b.1 <= crate::fec::MAX_CODE_LEN));
        }
        // Type A matches 12 + 204 + 120 = 336 exactly.
        assert_eq!(FrameType::A.quadrature_plan().data_bits(), 204);
    }

    #[test]
    fn airtimes() {
        assert_eq!(frame_airtime_us(FrameType::A), 120);
        assert_eq!(frame_airtime_us(FrameType::B1), 120);
        assert_eq!(frame_airtime_us(FrameType::B2), 218);
        assert_eq!(frame_airtime_us(FrameType::C), 250);
    }

    #[test]
    fn classify_by_length_and_code() {
        let cfg = CodecConfig::default();
        let b1 = Frame::B1(FrameB1 {
            icao: icao(),
            interval_index: 3,
            key: Key128([1; 16]),
        });
        assert_eq!(classify_frame(&encode_frame(&b1, &cfg).unwrap().in_phase), Ok(FrameType::B1));
        assert_eq!(classify_frame(&encode_frame(&sample_a(), &cfg).unwrap().in_phase), Ok(FrameType::A));
        let mut x = Bits::zeros(210);
        x.set(0, true);
        x.set(2, true);
        x.set(3, true);
        x.set(6, true);
        assert_eq!(classify_frame(&x), Ok(FrameType::B2));
        let mut y = Bits::zeros(242);
        for i in [0, 2, 3, 6, 7] {
            y.set(i, true);
        }
        assert_eq!(classify_frame(&y), Ok(FrameType::C));
        assert_eq!(classify_frame(&Bits::zeros(113)), Err(FrameError::UnknownFrameType));
    }

    #[test]
    fn round_trip_each_type() {
        let cfg = CodecConfig::default();
        let frames = [
            sample_a(),
            Frame::B1(FrameB1 {
                icao: icao(),
                interval_index: 17,
                key: Key128(core::array::from_fn(|i| (i * 37) as u8)),
            }),
            sample_b2(),
            Frame::C(FrameC {
                icao: icao(),
                public_key: PublicKey(core::array::from_fn(|i| (i * 13 + 1) as u8)),
                signature: Signature(core::array::from_fn(|i| (255 - i) as u8)),
            }),
        ];
        for f in frames {
            let e = encode_frame(&f, &cfg).unwrap();
            assert_eq!(decode_frame(&e.in_phase, &e.quadrature, &cfg).unwrap(), f);
        }
    }

    #[test]
    fn split_points_match_layout() {
        let key = Key128(core::array::from_fn(|i| (i as u8).wrapping_mul(29)));
        let f = Frame::B1(FrameB1 {
            icao: icao(),
            interval_index: 9,
            key,
        });
        let e = encode_frame(&f, &CodecConfig::default()).unwrap();
        assert_eq!(e.in_phase.slice(32, 82), key.to_bits().slice(0, 50));
        // quadrature: 12 ref bits, then interval, then the remaining 78 key bits
        assert_eq!(e.quadrature.slice(24, 102), key.to_bits().slice(50, 128));
    }

    #[test]
    fn layout_violations() {
        let cfg = CodecConfig::default();
        let mut bad = sample_b2();
        if let Frame::B2(f) = &mut bad {
            f.interval_index = 4096;
        }
        assert!(matches!(encode_frame(&bad, &cfg), Err(FrameError::LayoutViolation(_))));
        let short = CodecConfig { mac_len_bits: 32 };
        assert!(matches!(encode_frame(&sample_a(), &short), Err(FrameError::LayoutViolation(_))));
        let mut wrong_crc = sample_a();
        if let Frame::A(f) = &mut wrong_crc {
            f.message.0[13] ^= 1;
        }
        assert!(matches!(encode_frame(&wrong_crc, &cfg), Err(FrameError::LayoutViolation(_))));
    }

    #[test]
    fn crc_mismatch_reported() {
        let cfg = CodecConfig::default();
        let mut e = encode_frame(&sample_b2(), &cfg).unwrap();
        e.in_phase.flip(100);
        assert_eq!(decode_frame(&e.in_phase, &e.quadrature, &cfg), Err(FrameError::CrcMismatch));
    }

    #[test]
    fn shorter_macs_round_trip() {
        let cfg = CodecConfig { mac_len_bits: 16 };
        let f = Frame::A(FrameA {
            message: AdsbMessage::df17(5, icao(), [1, 2, 3, 4, 5, 6, 7]),
            mac: Bits::from_bytes(&[0xBE, 0xEF], 16),
            seq: 255,
        });
        let e = encode_frame(&f, &cfg).unwrap();
        assert_eq!(decode_frame(&e.in_phase, &e.quadrature, &cfg).unwrap(), f);
    }
}
