//! Reed-Solomon codes over GF(64) with 6-bit symbols.
//!
//! Field: GF(2)[x] / (x^6 + x + 1), primitive element `α = x`. Codes are
//! narrow-sense (generator roots `α^1 ..= α^2t`), systematic, and may be
//! shortened to any length up to 63 symbols. Decoding is syndrome based:
//! Berlekamp-Massey for the locator, Chien search for positions and Forney
//! for values.

use alloc::vec;
use alloc::vec::Vec;

pub const FIELD_BITS: usize = 6;
pub const FIELD_SIZE: usize = 64;
/// Longest codeword: 2^6 - 1 symbols.
pub const MAX_CODE_LEN: usize = FIELD_SIZE - 1;
const PRIMITIVE_POLY: u16 = 0b100_0011;

const fn build_tables() -> ([u8; 2 * MAX_CODE_LEN], [u8; FIELD_SIZE]) {
    let mut exp = [0u8; 2 * MAX_CODE_LEN];
    let mut log = [0u8; FIELD_SIZE];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < MAX_CODE_LEN {
        exp[i] = x as u8;
        exp[i + MAX_CODE_LEN] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x40 != 0 {
            x ^= PRIMITIVE_POLY;
        }
        i += 1;
    }
    (exp, log)
}

const TABLES: ([u8; 2 * MAX_CODE_LEN], [u8; FIELD_SIZE]) = build_tables();
const EXP: [u8; 2 * MAX_CODE_LEN] = TABLES.0;
const LOG: [u8; FIELD_SIZE] = TABLES.1;

/// Arithmetic in GF(64). Addition is XOR.
pub mod gf {
    use super::{EXP, LOG, MAX_CODE_LEN};

    pub fn mul(a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            0
        } else {
            EXP[LOG[a as usize] as usize + LOG[b as usize] as usize]
        }
    }

    pub fn inv(a: u8) -> u8 {
        assert!(a != 0, "zero has no inverse in GF(64)");
        EXP[(MAX_CODE_LEN - LOG[a as usize] as usize) % MAX_CODE_LEN]
    }

    pub fn div(a: u8, b: u8) -> u8 {
        mul(a, inv(b))
    }

    /// `α^e` for any integer exponent.
    pub fn alpha_pow(e: i64) -> u8 {
        EXP[e.rem_euclid(MAX_CODE_LEN as i64) as usize]
    }

    /// Evaluates a polynomial given highest-degree coefficient first.
    pub fn poly_eval(poly: &[u8], x: u8) -> u8 {
        poly.iter().fold(0, |acc, &c| mul(acc, x) ^ c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum RsError {
    #[error("too many symbol errors to correct")]
    Uncorrectable,
    #[error("codeword length {0} outside 1..=63 or shorter than parity")]
    BadLength(usize),
    #[error("symbol value {0} does not fit in 6 bits")]
    BadSymbol(u8),
}

/// A shortened narrow-sense RS code with a fixed number of parity symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReedSolomon {
    parity: usize,
    /// Generator polynomial, highest-degree coefficient first (monic).
    generator: Vec<u8>,
}

impl ReedSolomon {
    pub fn new(parity: usize) -> Self {
        assert!(parity > 0 && parity < MAX_CODE_LEN);
        let mut g = vec![1u8];
        for i in 1..=parity {
            // multiply by (x - α^i)
            let root = gf::alpha_pow(i as i64);
            let mut next = vec![0u8; g.len() + 1];
            for (j, &c) in g.iter().enumerate() {
                next[j] ^= c;
                next[j + 1] ^= gf::mul(c, root);
            }
            g = next;
        }
        Self { parity, generator: g }
    }

    pub fn parity(&self) -> usize {
        self.parity
    }

    /// Correctable symbol errors per codeword.
    pub fn capacity(&self) -> usize {
        self.parity / 2
    }

    /// Parity symbols for `data`, to be appended after it.
    pub fn encode(&self, data: &[u8]) -> Result<Vec<u8>, RsError> {
        if data.len() + self.parity > MAX_CODE_LEN {
            return Err(RsError::BadLength(data.len() + self.parity));
        }
        let mut rem = vec![0u8; self.parity];
        for &d in data {
            if d as usize >= FIELD_SIZE {
                return Err(RsError::BadSymbol(d));
            }
            let fb = d ^ rem[0];
            rem.rotate_left(1);
            rem[self.parity - 1] = 0;
            if fb != 0 {
                for (r, &g) in rem.iter_mut().zip(&self.generator[1..]) {
                    *r ^= gf::mul(g, fb);
                }
            }
        }
        Ok(rem)
    }

    /// Systematic codeword: `data ∥ parity`.
    pub fn encode_codeword(&self, data: &[u8]) -> Result<Vec<u8>, RsError> {
        let mut cw = data.to_vec();
        cw.extend(self.encode(data)?);
        Ok(cw)
    }

    pub fn syndromes(&self, codeword: &[u8]) -> Vec<u8> {
        (1..=self.parity)
            .map(|i| gf::poly_eval(codeword, gf::alpha_pow(i as i64)))
            .collect()
    }

    /// Corrects `codeword` in place; returns the number of symbols fixed.
    pub fn decode(&self, codeword: &mut [u8]) -> Result<usize, RsError> {
        let n = codeword.len();
        if n > MAX_CODE_LEN || n <= self.parity {
            return Err(RsError::BadLength(n));
        }
        if let Some(&bad) = codeword.iter().find(|&&s| s as usize >= FIELD_SIZE) {
            return Err(RsError::BadSymbol(bad));
        }
        let synd = self.syndromes(codeword);
        if synd.iter().all(|&s| s == 0) {
            return Ok(0);
        }

        let locator = berlekamp_massey(&synd);
        let degree = locator.len() - 1;
        if degree == 0 || degree > self.capacity() {
            return Err(RsError::Uncorrectable);
        }

        // Chien search over the (possibly shortened) positions. Position j
        // carries x^(n-1-j), so its locator is X = α^(n-1-j).
        let mut positions = Vec::with_capacity(degree);
        for j in 0..n {
            let x_inv = gf::alpha_pow(-((n - 1 - j) as i64));
            if eval_low_first(&locator, x_inv) == 0 {
                positions.push(j);
            }
        }
        if positions.len() != degree {
            return Err(RsError::Uncorrectable);
        }

        // Ω(x) = S(x) Λ(x) mod x^2t, with S(x) = Σ S_{i+1} x^i.
        let mut omega = vec![0u8; self.parity];
        for (i, &s) in synd.iter().enumerate() {
            for (j, &l) in locator.iter().enumerate() {
                if i + j < self.parity {
                    omega[i + j] ^= gf::mul(s, l);
                }
            }
        }
        // Formal derivative: only odd-degree terms survive in characteristic 2.
        let derivative: Vec<u8> = locator
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| if k % 2 == 1 { c } else { 0 })
            .collect();

        for &j in &positions {
            let x_inv = gf::alpha_pow(-((n - 1 - j) as i64));
            let denom = eval_low_first(&derivative, x_inv);
            if denom == 0 {
                return Err(RsError::Uncorrectable);
            }
            codeword[j] ^= gf::div(eval_low_first(&omega, x_inv), denom);
        }

        if self.syndromes(codeword).iter().any(|&s| s != 0) {
            return Err(RsError::Uncorrectable);
        }
        Ok(positions.len())
    }
}

/// Evaluates a polynomial stored lowest-degree coefficient first.
fn eval_low_first(poly: &[u8], x: u8) -> u8 {
    poly.iter().rev().fold(0, |acc, &c| gf::mul(acc, x) ^ c)
}

/// Error locator Λ(x), lowest-degree first, with trailing zeros trimmed.
fn berlekamp_massey(synd: &[u8]) -> Vec<u8> {
    let mut lambda = vec![1u8];
    let mut prev = vec![1u8];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut prev_disc = 1u8;
    for k in 0..synd.len() {
        let mut disc = synd[k];
        for i in 1..=l.min(lambda.len() - 1) {
            disc ^= gf::mul(lambda[i], synd[k - i]);
        }
        if disc == 0 {
            shift += 1;
            continue;
        }
        let coef = gf::div(disc, prev_disc);
        let mut next = lambda.clone();
        if next.len() < prev.len() + shift {
            next.resize(prev.len() + shift, 0);
        }
        for (i, &p) in prev.iter().enumerate() {
            next[i + shift] ^= gf::mul(coef, p);
        }
        if 2 * l <= k {
            l = k + 1 - l;
            prev = lambda;
            prev_disc = disc;
            shift = 1;
        } else {
            shift += 1;
        }
        lambda = next;
    }
    while lambda.len() > 1 && *lambda.last().unwrap() == 0 {
        lambda.pop();
    }
    lambda
}
