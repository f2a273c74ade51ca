//! AWGN channel, theoretical M-PSK error rates and the Monte-Carlo BER harness.
//!
//! Noise is scaled against the modem's pulse energy: a pulse spans
//! `L = sps/2` unit-power samples, so one PSK symbol carries `Es = L` and one
//! bit `Eb = L/k`. Complex noise with per-component variance `σ²` has
//! `N0 = 2σ²`, giving `σ² = L / (2·k·Eb/N0)`.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::bits::Bits;
use crate::modem::{self, BasebandSignal, ModemConfig, ModemError, PskEncoding, SymbolMapping};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AwgnChannel {
    /// `+∞` disables noise.
    pub ebno_db: f64,
    pub rng_seed: u64,
}

impl AwgnChannel {
    pub fn new(ebno_db: f64, rng_seed: u64) -> Self {
        Self { ebno_db, rng_seed }
    }

    /// Per-component noise standard deviation for a signal with
    /// `pulse_len` samples per pulse and `bits_per_symbol` bits per PSK symbol.
    pub fn sigma(&self, bits_per_symbol: usize, pulse_len: usize) -> f64 {
        noise_sigma(self.ebno_db, bits_per_symbol, pulse_len)
    }
}

pub fn noise_sigma(ebno_db: f64, bits_per_symbol: usize, pulse_len: usize) -> f64 {
    let ebno = libm::pow(10.0, ebno_db / 10.0);
    libm::sqrt(pulse_len as f64 / (2.0 * bits_per_symbol as f64 * ebno))
}

/// Samples per pulse implied by the sample rate (1 µs symbols).
fn pulse_len_of(signal: &BasebandSignal) -> usize {
    (libm::round(signal.sample_rate_hz / 1e6) as usize / 2).max(1)
}

fn add_noise<R: Rng>(samples: &mut [Complex64], sigma: f64, rng: &mut R) {
    if sigma == 0.0 {
        return;
    }
    for s in samples {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *s += Complex64::new(sigma * re, sigma * im);
    }
}

/// Adds complex Gaussian noise, deterministically under `channel.rng_seed`.
pub fn apply_awgn(signal: &BasebandSignal, channel: &AwgnChannel, bits_per_symbol: usize) -> BasebandSignal {
    let mut out = signal.clone();
    let sigma = channel.sigma(bits_per_symbol, pulse_len_of(signal));
    let mut rng = ChaCha8Rng::seed_from_u64(channel.rng_seed);
    add_noise(&mut out.samples, sigma, &mut rng);
    out
}

/// `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ChannelError {
    #[error("unsupported PSK order {0}")]
    UnsupportedOrder(usize),
    #[error("Eb/N0 grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Modem(#[from] ModemError),
}

/// Gray-coded coherent M-PSK bit error rate, nearest-neighbour approximation
/// `(2/k)·Q(√(2k·Eb/N0)·sin(π/M))`.
pub fn theoretical_psk_ber(order: usize, ebno_db: f64) -> Result<f64, ChannelError> {
    let k = match order {
        8 => 3.0,
        16 => 4.0,
        32 => 5.0,
        _ => return Err(ChannelError::UnsupportedOrder(order)),
    };
    let ebno = libm::pow(10.0, ebno_db / 10.0);
    let arg = libm::sqrt(2.0 * k * ebno) * libm::sin(core::f64::consts::PI / order as f64);
    Ok(2.0 / k * q_function(arg))
}

/// Mean number of bit differences between labels of neighbouring constellation points.
pub fn neighbour_bit_distance(order: usize, mapping: SymbolMapping) -> f64 {
    let total: u32 = (0..order)
        .map(|s| (modem::symbol_to_bits(s, mapping) ^ modem::symbol_to_bits((s + 1) % order, mapping)).count_ones())
        .sum();
    total as f64 / order as f64
}

/// Theoretical BER for the modem as configured: the Gray value scaled by the
/// mapping's neighbour distance, doubled for differential detection since a
/// wrong absolute decision corrupts two consecutive differences.
pub fn modem_ber_oracle(cfg: &ModemConfig, ebno_db: f64) -> Result<f64, ChannelError> {
    let order = cfg.psk_order.order();
    let mut p = theoretical_psk_ber(order, ebno_db)? * neighbour_bit_distance(order, cfg.mapping);
    if cfg.encoding == PskEncoding::Differential {
        p *= 2.0;
    }
    Ok(p.min(0.5))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BerConfig {
    pub modem: ModemConfig,
    pub min_errors: u64,
    pub max_bits: u64,
    /// PPM symbols per simulated frame.
    pub frame_symbols: usize,
    pub frames_per_batch: usize,
}

impl Default for BerConfig {
    fn default() -> Self {
        Self {
            modem: ModemConfig::default(),
            min_errors: 100,
            max_bits: 10_000_000,
            frame_symbols: 112,
            frames_per_batch: 32,
        }
    }
}

impl BerConfig {
    /// Quadrature bits carried per frame: one PSK symbol per PPM symbol.
    pub fn bits_per_frame(&self) -> usize {
        self.frame_symbols * self.modem.psk_order.bits_per_symbol()
    }
}

/// Counts from one batch of frames.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BatchCounts {
    pub bits: u64,
    pub errors: u64,
    pub ppm_bits: u64,
    pub ppm_errors: u64,
}

impl core::ops::AddAssign for BatchCounts {
    fn add_assign(&mut self, o: Self) {
        self.bits += o.bits;
        self.errors += o.errors;
        self.ppm_bits += o.ppm_bits;
        self.ppm_errors += o.ppm_errors;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BerPoint {
    pub ebno_db: f64,
    pub order: usize,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub ppm_bits_sent: u64,
    pub ppm_bit_errors: u64,
    pub ppm_ber: f64,
    pub theory_ber: f64,
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of batch `batch` at grid point `point`; independent of execution order.
pub fn batch_seed(master: u64, point: usize, batch: u64) -> u64 {
    mix(mix(mix(master) ^ point as u64) ^ batch)
}

fn random_bits<R: Rng>(n: usize, rng: &mut R) -> Bits {
    (0..n).map(|_| rng.gen::<bool>()).collect()
}

/// Simulates one batch: random frames through modulate, AWGN and demodulate.
pub fn ber_batch(cfg: &BerConfig, ebno_db: f64, seed: u64) -> Result<BatchCounts, ChannelError> {
    let m = &cfg.modem;
    m.validate()?;
    let k = m.psk_order.bits_per_symbol();
    let sigma = noise_sigma(ebno_db, k, m.pulse_len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BatchCounts::default();
    for _ in 0..cfg.frames_per_batch {
        let in_phase = random_bits(cfg.frame_symbols, &mut rng);
        let quadrature = random_bits(cfg.bits_per_frame(), &mut rng);
        let mut signal = modem::modulate_packets(&in_phase, &quadrature, m)?;
        add_noise(&mut signal.samples, sigma, &mut rng);
        let q = modem::psk_bits(&signal, m, cfg.frame_symbols);
        let i = modem::ppm_bits(&signal, m, cfg.frame_symbols);
        counts.bits += quadrature.len() as u64;
        counts.errors += q.hamming(&quadrature) as u64;
        counts.ppm_bits += in_phase.len() as u64;
        counts.ppm_errors += i.hamming(&in_phase) as u64;
    }
    Ok(counts)
}

/// Stopping rule shared by the sequential and parallel sweeps.
pub fn point_done(cfg: &BerConfig, acc: &BatchCounts) -> bool {
    acc.errors >= cfg.min_errors || acc.bits >= cfg.max_bits
}

pub fn finish_point(cfg: &BerConfig, ebno_db: f64, acc: BatchCounts) -> Result<BerPoint, ChannelError> {
    let ratio = |e: u64, n: u64| if n == 0 { 0.0 } else { e as f64 / n as f64 };
    Ok(BerPoint {
        ebno_db,
        order: cfg.modem.psk_order.order(),
        bits_sent: acc.bits,
        bit_errors: acc.errors,
        ber: ratio(acc.errors, acc.bits),
        ppm_bits_sent: acc.ppm_bits,
        ppm_bit_errors: acc.ppm_errors,
        ppm_ber: ratio(acc.ppm_errors, acc.ppm_bits),
        theory_ber: modem_ber_oracle(&cfg.modem, ebno_db)?,
    })
}

/// Runs batches in order until `min_errors` errors or `max_bits` bits.
pub fn ber_point(cfg: &BerConfig, ebno_db: f64, master_seed: u64, point: usize) -> Result<BerPoint, ChannelError> {
    let mut acc = BatchCounts::default();
    let mut batch = 0u64;
    while !point_done(cfg, &acc) {
        acc += ber_batch(cfg, ebno_db, batch_seed(master_seed, point, batch))?;
        batch += 1;
    }
    finish_point(cfg, ebno_db, acc)
}

pub fn ber_sweep(cfg: &BerConfig, ebno_grid: &[f64], master_seed: u64) -> Result<Vec<BerPoint>, ChannelError> {
    if ebno_grid.is_empty() {
        return Err(ChannelError::EmptyGrid);
    }
    ebno_grid
        .iter()
        .enumerate()
        .map(|(i, &e)| ber_point(cfg, e, master_seed, i))
        .collect()
}
