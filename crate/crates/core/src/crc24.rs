//! Mode S CRC-24 (generator 0x1FFF409), bitwise so it also covers frames
//! whose length is not a multiple of eight.

use crate::bits::Bits;

pub const GENERATOR: u32 = 0x1FF_F409;

/// Parity of `bits`: the remainder of `bits(x) · x^24` modulo the generator.
pub fn parity(bits: &Bits) -> u32 {
    let mut reg: u32 = 0;
    for b in bits.iter() {
        let top = (reg >> 23) & 1 == 1;
        reg = (reg << 1) & 0xFF_FFFF;
        if top ^ b {
            reg ^= GENERATOR & 0xFF_FFFF;
        }
    }
    reg
}

/// True when the trailing 24 bits equal the parity of everything before them.
pub fn check(frame: &Bits) -> bool {
    let n = frame.len();
    n > 24 && parity(&frame.slice(0, n - 24)) as u64 == frame.read_uint(n - 24, 24)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Byte-wise reference in the style of common Mode S decoders.
    fn bytewise(msg: &[u8]) -> u32 {
        let mut crc: u32 = 0;
        for &byte in msg {
            crc ^= (byte as u32) << 16;
            for _ in 0..8 {
                crc = if crc & 0x80_0000 != 0 { (crc << 1) ^ GENERATOR } else { crc << 1 };
            }
        }
        crc & 0xFF_FFFF
    }

    #[test]
    fn known_df17_vector() {
        let msg = [0x8D, 0x48, 0x40, 0xD6, 0x20, 0x2C, 0xC3, 0x71, 0xC3, 0x2C, 0xE0, 0x57, 0x60, 0x98];
        let bits = Bits::from_bytes(&msg, 112);
        assert_eq!(parity(&bits.slice(0, 88)), 0x576098);
        assert!(check(&bits));
        assert_eq!(bytewise(&msg), 0);
    }

    #[test]
    fn agrees_with_bytewise_reference() {
        let mut x: u32 = 0x1234_5678;
        for _ in 0..50 {
            let bytes: [u8; 11] = core::array::from_fn(|_| {
                x = x.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
                (x >> 24) as u8
            });
            let p = parity(&Bits::from_bytes(&bytes, 88));
            let mut full = bytes.to_vec();
            full.extend_from_slice(&p.to_be_bytes()[1..]);
            assert_eq!(bytewise(&full), 0);
        }
    }
}
