//! Baseband modem: PPM on the amplitude, M-PSK overlay on the phase.
//!
//! Signals are complex envelopes sampled at `samples_per_symbol` MHz. Each
//! 1 µs symbol is split into two half-symbol slots; the PPM bit picks which
//! slot carries the unit-amplitude pulse, and the PSK symbol sets that
//! pulse's phase. Off slots are exactly zero, so `|sample|` never depends on
//! the quadrature content.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::bits::Bits;
use crate::frame::{in_phase_len_from_header, EncodedFrame};

pub const PREAMBLE_US: usize = 8;
/// Half-microsecond slots of the preamble that carry a pulse (0, 1, 3.5 and 4.5 µs).
pub const PREAMBLE_PULSE_SLOTS: [usize; 4] = [0, 2, 7, 9];
const PREAMBLE_DETECT_RATIO: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PskOrder {
    Psk8,
    Psk16,
}

impl PskOrder {
    pub const fn order(self) -> usize {
        match self {
            PskOrder::Psk8 => 8,
            PskOrder::Psk16 => 16,
        }
    }

    pub const fn bits_per_symbol(self) -> usize {
        match self {
            PskOrder::Psk8 => 3,
            PskOrder::Psk16 => 4,
        }
    }

    pub fn from_order(m: usize) -> Option<Self> {
        match m {
            8 => Some(PskOrder::Psk8),
            16 => Some(PskOrder::Psk16),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PskEncoding {
    /// Phase advances by the symbol angle each symbol.
    Differential,
    /// Phase equals the symbol angle.
    Absolute,
}

/// How bit groups are numbered onto constellation points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SymbolMapping {
    /// `symbol = 4·b0 + 2·b1 + b2` (order 8), the bit group read as a binary number.
    Natural,
    /// Adjacent constellation points differ in one bit.
    Gray,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModemConfig {
    pub samples_per_symbol: usize,
    pub psk_order: PskOrder,
    pub encoding: PskEncoding,
    pub mapping: SymbolMapping,
}

impl Default for ModemConfig {
    fn default() -> Self {
        Self {
            samples_per_symbol: 10,
            psk_order: PskOrder::Psk8,
            encoding: PskEncoding::Differential,
            mapping: SymbolMapping::Natural,
        }
    }
}

impl ModemConfig {
    pub fn validate(&self) -> Result<(), ModemError> {
        if self.samples_per_symbol < 4 || !self.samples_per_symbol.is_multiple_of(2) {
            return Err(ModemError::InvalidConfig("samples_per_symbol must be even and at least 4"));
        }
        Ok(())
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.samples_per_symbol as f64 * 1e6
    }

    /// Samples per half-symbol pulse.
    pub fn pulse_len(&self) -> usize {
        self.samples_per_symbol / 2
    }

    pub fn preamble_len(&self) -> usize {
        PREAMBLE_US * self.samples_per_symbol
    }

    /// Total samples of a frame with `in_phase_bits` PPM symbols.
    pub fn frame_len(&self, in_phase_bits: usize) -> usize {
        self.preamble_len() + in_phase_bits * self.samples_per_symbol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ModemError {
    #[error("invalid modem configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("{bits} bits do not split into {bits_per_symbol}-bit symbols")]
    SymbolAlignment { bits: usize, bits_per_symbol: usize },
    #[error("PPM and PSK streams are not aligned")]
    AlignmentError,
    #[error("no preamble found")]
    NoPreamble,
    #[error("frame header not recognised")]
    UnknownFrame,
    #[error("signal ends before the frame does")]
    Truncated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl BasebandSignal {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn slice(&self, start: usize, len: usize) -> Option<BasebandSignal> {
        let s = self.samples.get(start..start.checked_add(len)?)?;
        Some(BasebandSignal {
            samples: s.to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        })
    }

    /// Rotates every sample by `phase` radians.
    pub fn rotate(&mut self, phase: f64) {
        let r = Complex64::new(libm::cos(phase), libm::sin(phase));
        for s in &mut self.samples {
            *s *= r;
        }
    }

    pub fn envelope(&self) -> Vec<f64> {
        self.samples.iter().map(|s| libm::sqrt(s.norm_sqr())).collect()
    }

    /// Mean power over samples whose magnitude exceeds half the peak.
    pub fn mean_active_power(&self) -> f64 {
        let peak = self.samples.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max);
        let (sum, n) = self
            .samples
            .iter()
            .map(|s| s.norm_sqr())
            .filter(|&p| p > peak / 4.0)
            .fold((0.0, 0usize), |(a, n), p| (a + p, n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }
}

fn gray_encode(v: usize) -> usize {
    v ^ (v >> 1)
}

fn gray_decode(mut g: usize) -> usize {
    let mut v = 0;
    while g != 0 {
        v ^= g;
        g >>= 1;
    }
    v
}

fn bits_to_symbol(value: usize, mapping: SymbolMapping) -> usize {
    match mapping {
        SymbolMapping::Natural => value,
        SymbolMapping::Gray => gray_decode(value),
    }
}

pub(crate) fn symbol_to_bits(symbol: usize, mapping: SymbolMapping) -> usize {
    match mapping {
        SymbolMapping::Natural => symbol,
        SymbolMapping::Gray => gray_encode(symbol),
    }
}

/// PPM amplitude samples: the 8 µs preamble followed by one symbol per bit.
pub fn ppm_modulate(in_phase: &Bits, cfg: &ModemConfig) -> Vec<f64> {
    let sps = cfg.samples_per_symbol;
    let half = cfg.pulse_len();
    let mut out = alloc::vec![0.0; cfg.frame_len(in_phase.len())];
    for slot in PREAMBLE_PULSE_SLOTS {
        out[slot * half..(slot + 1) * half].fill(1.0);
    }
    let base = cfg.preamble_len();
    for (k, bit) in in_phase.iter().enumerate() {
        let start = base + k * sps + if bit { 0 } else { half };
        out[start..start + half].fill(1.0);
    }
    out
}

/// Transmitted phase of each quadrature symbol, in radians.
pub fn psk_phases(quadrature: &Bits, cfg: &ModemConfig) -> Result<Vec<f64>, ModemError> {
    let k = cfg.psk_order.bits_per_symbol();
    if !quadrature.len().is_multiple_of(k) {
        return Err(ModemError::SymbolAlignment {
            bits: quadrature.len(),
            bits_per_symbol: k,
        });
    }
    let m = cfg.psk_order.order();
    let step = 2.0 * PI / m as f64;
    let mut acc = 0usize;
    let phases = (0..quadrature.len() / k)
        .map(|s| {
            let sym = bits_to_symbol(quadrature.read_uint(s * k, k) as usize, cfg.mapping);
            let idx = match cfg.encoding {
                PskEncoding::Absolute => sym,
                PskEncoding::Differential => {
                    acc = (acc + sym) % m;
                    acc
                }
            };
            step * idx as f64
        })
        .collect();
    Ok(phases)
}

/// Unit phasors, one per quadrature symbol.
pub fn psk_modulate(quadrature: &Bits, cfg: &ModemConfig) -> Result<Vec<Complex64>, ModemError> {
    Ok(psk_phases(quadrature, cfg)?
        .into_iter()
        .map(|t| Complex64::new(libm::cos(t), libm::sin(t)))
        .collect())
}

/// `sample_n = ppm_n · psk_{symbol(n)}`. The preamble and any symbols beyond
/// the PSK stream keep phase zero.
pub fn iq_compose(ppm: &[f64], psk: &[Complex64], cfg: &ModemConfig) -> Result<BasebandSignal, ModemError> {
    let sps = cfg.samples_per_symbol;
    let pre = cfg.preamble_len();
    if ppm.len() < pre || !(ppm.len() - pre).is_multiple_of(sps) || psk.len() > (ppm.len() - pre) / sps {
        return Err(ModemError::AlignmentError);
    }
    let samples = ppm
        .iter()
        .enumerate()
        .map(|(n, &a)| {
            let phasor = n
                .checked_sub(pre)
                .and_then(|p| psk.get(p / sps))
                .copied()
                .unwrap_or(Complex64::new(1.0, 0.0));
            phasor * a
        })
        .collect();
    Ok(BasebandSignal {
        samples,
        sample_rate_hz: cfg.sample_rate_hz(),
    })
}

fn window_energy(s: &[Complex64]) -> f64 {
    s.iter().map(|x| x.norm_sqr()).sum()
}

/// Checks the preamble energy pattern at the start of `signal`.
pub fn detect_preamble(signal: &BasebandSignal, cfg: &ModemConfig) -> Result<(), ModemError> {
    let half = cfg.pulse_len();
    if signal.len() < cfg.preamble_len() {
        return Err(ModemError::NoPreamble);
    }
    let (mut on, mut off) = (0.0, 0.0);
    for slot in 0..2 * PREAMBLE_US {
        let e = window_energy(&signal.samples[slot * half..(slot + 1) * half]);
        if PREAMBLE_PULSE_SLOTS.contains(&slot) {
            on += e;
        } else {
            off += e;
        }
    }
    let on_mean = on / PREAMBLE_PULSE_SLOTS.len() as f64;
    let off_mean = off / (2 * PREAMBLE_US - PREAMBLE_PULSE_SLOTS.len()) as f64;
    if on_mean > 0.0 && on_mean > PREAMBLE_DETECT_RATIO * off_mean {
        Ok(())
    } else {
        Err(ModemError::NoPreamble)
    }
}

fn payload_symbols(signal: &BasebandSignal, cfg: &ModemConfig) -> usize {
    signal.len().saturating_sub(cfg.preamble_len()) / cfg.samples_per_symbol
}

/// Half-symbol windows of symbol `k`.
fn halves<'a>(signal: &'a BasebandSignal, cfg: &ModemConfig, k: usize) -> (&'a [Complex64], &'a [Complex64]) {
    let start = cfg.preamble_len() + k * cfg.samples_per_symbol;
    let half = cfg.pulse_len();
    (
        &signal.samples[start..start + half],
        &signal.samples[start + half..start + 2 * half],
    )
}

pub(crate) fn ppm_bits(signal: &BasebandSignal, cfg: &ModemConfig, n: usize) -> Bits {
    (0..n)
        .map(|k| {
            let (a, b) = halves(signal, cfg, k);
            window_energy(a) > window_energy(b)
        })
        .collect()
}

/// Legacy receiver surrogate: decides every PPM symbol after the preamble
/// from half-symbol energies alone.
pub fn ppm_demodulate(signal: &BasebandSignal, cfg: &ModemConfig) -> Result<Bits, ModemError> {
    cfg.validate()?;
    detect_preamble(signal, cfg)?;
    Ok(ppm_bits(signal, cfg, payload_symbols(signal, cfg)))
}

/// Sum of the preamble pulse samples; its argument is the carrier phase.
fn preamble_sum(signal: &BasebandSignal, cfg: &ModemConfig) -> Complex64 {
    let half = cfg.pulse_len();
    PREAMBLE_PULSE_SLOTS
        .iter()
        .flat_map(|&slot| signal.samples[slot * half..(slot + 1) * half].iter())
        .sum()
}

fn arg(z: Complex64) -> f64 {
    libm::atan2(z.im, z.re)
}

fn nearest_point(theta: f64, step: f64, m: usize) -> usize {
    (libm::round(theta / step) as i64).rem_euclid(m as i64) as usize
}

pub(crate) fn psk_bits(signal: &BasebandSignal, cfg: &ModemConfig, n_symbols: usize) -> Bits {
    let m = cfg.psk_order.order();
    let k = cfg.psk_order.bits_per_symbol();
    let step = 2.0 * PI / m as f64;
    let z: Vec<Complex64> = (0..n_symbols)
        .map(|s| {
            let (a, b) = halves(signal, cfg, s);
            let active = if window_energy(a) > window_energy(b) { a } else { b };
            active.iter().sum()
        })
        .collect();

    let decide = |offset: f64| -> Vec<usize> { z.iter().map(|&zk| nearest_point(arg(zk) - offset, step, m)).collect() };
    let points = match cfg.encoding {
        PskEncoding::Absolute => decide(0.0),
        PskEncoding::Differential => {
            // Coarse carrier phase from the preamble, then refined over the
            // whole frame with the first-pass decisions removed.
            let pre = preamble_sum(signal, cfg);
            let first = decide(arg(pre));
            let refined: Complex64 = pre
                + z.iter()
                    .zip(&first)
                    .map(|(&zk, &d)| zk * Complex64::new(libm::cos(step * d as f64), -libm::sin(step * d as f64)))
                    .sum::<Complex64>();
            decide(arg(refined))
        }
    };

    let mut out = Bits::with_capacity(n_symbols * k);
    let mut prev = 0usize;
    for idx in points {
        let sym = match cfg.encoding {
            PskEncoding::Absolute => idx,
            PskEncoding::Differential => {
                let d = (idx + m - prev) % m;
                prev = idx;
                d
            }
        };
        out.push_uint(symbol_to_bits(sym, cfg.mapping) as u64, k);
    }
    out
}

/// Decides the PSK symbol on the pulse-active half of each payload symbol.
/// Returns `bits_per_symbol` bits for every PPM symbol in the signal.
pub fn psk_demodulate(signal: &BasebandSignal, cfg: &ModemConfig) -> Result<Bits, ModemError> {
    cfg.validate()?;
    detect_preamble(signal, cfg)?;
    Ok(psk_bits(signal, cfg, payload_symbols(signal, cfg)))
}

/// Quadrature bits padded up to a whole number of PSK symbols.
pub fn pad_to_symbols(quadrature: &Bits, cfg: &ModemConfig) -> Bits {
    let k = cfg.psk_order.bits_per_symbol();
    let mut q = quadrature.clone();
    q.resize(quadrature.len().div_ceil(k) * k);
    q
}

pub fn modulate_packets(in_phase: &Bits, quadrature: &Bits, cfg: &ModemConfig) -> Result<BasebandSignal, ModemError> {
    cfg.validate()?;
    let ppm = ppm_modulate(in_phase, cfg);
    let psk = psk_modulate(&pad_to_symbols(quadrature, cfg), cfg)?;
    iq_compose(&ppm, &psk, cfg)
}

pub fn modulate_frame(frame: &EncodedFrame, cfg: &ModemConfig) -> Result<BasebandSignal, ModemError> {
    modulate_packets(&frame.in_phase, &frame.quadrature, cfg)
}

/// Demodulated packets of one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceivedPackets {
    pub in_phase: Bits,
    pub quadrature: Bits,
}

/// Demodulates the frame starting at sample 0. The frame length comes from
/// the first eight in-phase bits; trailing samples are ignored.
pub fn demodulate_frame(signal: &BasebandSignal, cfg: &ModemConfig) -> Result<ReceivedPackets, ModemError> {
    cfg.validate()?;
    detect_preamble(signal, cfg)?;
    if payload_symbols(signal, cfg) < 8 {
        return Err(ModemError::Truncated);
    }
    let head = ppm_bits(signal, cfg, 8);
    let n = in_phase_len_from_header(head.read_uint(0, 5) as u8, head.read_uint(5, 3) as u8)
        .ok_or(ModemError::UnknownFrame)?;
    if payload_symbols(signal, cfg) < n {
        return Err(ModemError::Truncated);
    }
    let k = cfg.psk_order.bits_per_symbol();
    let q_len = 3 * n;
    let mut quadrature = psk_bits(signal, cfg, q_len.div_ceil(k));
    quadrature.truncate(q_len);
    Ok(ReceivedPackets {
        in_phase: ppm_bits(signal, cfg, n),
        quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{encode_frame, CodecConfig, Frame, FrameB2, FrameC, Icao};
    use crate::pki::{PublicKey, Signature};
    use crate::tesla::Key128;

    fn cfg(order: PskOrder, encoding: PskEncoding, mapping: SymbolMapping) -> ModemConfig {
        ModemConfig {
            samples_per_symbol: 10,
            psk_order: order,
            encoding,
            mapping,
        }
    }

    fn pseudo_bits(n: usize, mut x: u64) -> Bits {
        (0..n)
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                x & 1 == 1
            })
            .collect()
    }

    #[test]
    fn ppm_pulse_positions() {
        let c = ModemConfig::default();
        let one = ppm_modulate(&Bits::from_bools(&[true]), &c);
        let zero = ppm_modulate(&Bits::from_bools(&[false]), &c);
        let p = c.preamble_len();
        assert_eq!(one.len(), p + 10);
        assert!(one[p..p + 5].iter().all(|&a| a == 1.0) && one[p + 5..].iter().all(|&a| a == 0.0));
        assert!(zero[p..p + 5].iter().all(|&a| a == 0.0) && zero[p + 5..].iter().all(|&a| a == 1.0));
        // preamble pulses at 0, 1, 3.5, 4.5 µs
        let on: Vec<usize> = (0..p).filter(|&i| one[i] == 1.0).collect();
        let expect: Vec<usize> = [0, 10, 35, 45].iter().flat_map(|&s| s..s + 5).collect();
        assert_eq!(on, expect);
        assert_eq!(ppm_modulate(&Bits::zeros(112), &c).len(), 112 * 10 + 80);
    }

    #[test]
    fn psk_symbol_map() {
        let abs = cfg(PskOrder::Psk8, PskEncoding::Absolute, SymbolMapping::Natural);
        let p = psk_phases(&Bits::zeros(12), &abs).unwrap();
        assert!(p.iter().all(|&t| t == 0.0));
        let p = psk_phases(&Bits::from_bools(&[true, true, true]), &abs).unwrap();
        assert!((p[0] - 7.0 * PI / 4.0).abs() < 1e-15);
        let p = psk_phases(&Bits::from_bools(&[true, false, false]), &abs).unwrap();
        assert!((p[0] - PI).abs() < 1e-15);

        let diff = cfg(PskOrder::Psk8, PskEncoding::Differential, SymbolMapping::Natural);
        let bits = Bits::from_bools(&[false, false, true, false, false, true, false, false, true]);
        let p = psk_phases(&bits, &diff).unwrap();
        let expect: Vec<f64> = (1..=3).map(|i| i as f64 * PI / 4.0).collect();
        for (a, b) in p.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(
            psk_phases(&Bits::zeros(10), &diff),
            Err(ModemError::SymbolAlignment { bits: 10, bits_per_symbol: 3 })
        );
    }

    #[test]
    fn gray_map_is_a_bijection_with_unit_neighbour_distance() {
        for m in [8usize, 16] {
            let mut seen = alloc::vec![false; m];
            for s in 0..m {
                let b = symbol_to_bits(s, SymbolMapping::Gray);
                assert!(!seen[b]);
                seen[b] = true;
                assert_eq!(bits_to_symbol(b, SymbolMapping::Gray), s);
                let next = symbol_to_bits((s + 1) % m, SymbolMapping::Gray);
                assert_eq!((b ^ next).count_ones(), 1);
            }
        }
    }

    #[test]
    fn envelope_ignores_phase_content() {
        let c = ModemConfig::default();
        let i = pseudo_bits(112, 7);
        let ppm = ppm_modulate(&i, &c);
        for seed in 1..20 {
            let psk = psk_modulate(&pseudo_bits(336, seed), &c).unwrap();
            let s = iq_compose(&ppm, &psk, &c).unwrap();
            for (x, &a) in s.samples.iter().zip(&ppm) {
                assert!((x.norm_sqr().sqrt() - a).abs() < 1e-12);
            }
            assert!((s.mean_active_power() - 1.0).abs() < 1e-9);
        }
        let zero = psk_modulate(&Bits::zeros(336), &c).unwrap();
        let s = iq_compose(&ppm, &zero, &c).unwrap();
        assert!(s.samples.iter().zip(&ppm).all(|(x, &a)| x.im == 0.0 && x.re == a));
    }

    #[test]
    fn compose_rejects_misaligned_streams() {
        let c = ModemConfig::default();
        let ppm = ppm_modulate(&Bits::zeros(4), &c);
        let psk = psk_modulate(&Bits::zeros(15), &c).unwrap();
        assert_eq!(iq_compose(&ppm, &psk, &c), Err(ModemError::AlignmentError));
        assert_eq!(iq_compose(&ppm[..ppm.len() - 1], &[], &c), Err(ModemError::AlignmentError));
    }

    #[test]
    fn loopback_all_configurations() {
        let frames = [
            Frame::B2(FrameB2 {
                icao: Icao::new(0x123456).unwrap(),
                interval_index: 77,
                key: Key128([0xC3; 16]),
                signature: Signature(core::array::from_fn(|i| (i * 3) as u8)),
            }),
            Frame::C(FrameC {
                icao: Icao::new(0x123456).unwrap(),
                public_key: PublicKey([0x5A; 32]),
                signature: Signature(core::array::from_fn(|i| (i * 7) as u8)),
            }),
        ];
        for f in &frames {
            let e = encode_frame(f, &CodecConfig::default()).unwrap();
            for order in [PskOrder::Psk8, PskOrder::Psk16] {
                for enc in [PskEncoding::Differential, PskEncoding::Absolute] {
                    for map in [SymbolMapping::Natural, SymbolMapping::Gray] {
                        let c = cfg(order, enc, map);
                        let s = modulate_frame(&e, &c).unwrap();
                        let r = demodulate_frame(&s, &c).unwrap();
                        assert_eq!(r.in_phase, e.in_phase);
                        assert_eq!(r.quadrature, e.quadrature, "{order:?} {enc:?} {map:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn differential_survives_constant_phase_offset() {
        let c = ModemConfig::default();
        let q = pseudo_bits(336, 99);
        let mut s = modulate_packets(&pseudo_bits(112, 5), &q, &c).unwrap();
        s.rotate(PI / 16.0 + 0.01);
        assert_eq!(psk_demodulate(&s, &c).unwrap(), q);
        let abs = cfg(PskOrder::Psk8, PskEncoding::Absolute, SymbolMapping::Natural);
        let mut s = modulate_packets(&pseudo_bits(112, 5), &q, &abs).unwrap();
        s.rotate(PI / 4.0);
        assert_ne!(psk_demodulate(&s, &abs).unwrap(), q);
    }

    #[test]
    fn silence_has_no_preamble() {
        let c = ModemConfig::default();
        let s = BasebandSignal {
            samples: alloc::vec![Complex64::new(0.0, 0.0); 2000],
            sample_rate_hz: c.sample_rate_hz(),
        };
        assert_eq!(ppm_demodulate(&s, &c), Err(ModemError::NoPreamble));
        assert_eq!(demodulate_frame(&s, &c), Err(ModemError::NoPreamble));
    }

    #[test]
    fn config_validation() {
        let mut c = ModemConfig::default();
        c.samples_per_symbol = 5;
        assert!(c.validate().is_err());
        c.samples_per_symbol = 2;
        assert!(c.validate().is_err());
        c.samples_per_symbol = 4;
        assert!(c.validate().is_ok());
    }
}
