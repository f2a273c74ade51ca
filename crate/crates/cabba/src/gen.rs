//! Seeded random frames for fixtures, sweeps and tests.

use cabba_core::frame::{AdsbMessage, FrameA, FrameB1, FrameB2, FrameC, MAX_INTERVAL_TAG};
use cabba_core::pki::{PublicKey, Signature};
use cabba_core::tesla::Key128;
use cabba_core::{Bits, Frame, FrameType, Icao};
use rand::Rng;

pub fn random_icao<R: Rng>(rng: &mut R) -> Icao {
    Icao::new(rng.gen_range(0..=0xFF_FFFF)).expect("24-bit range")
}

/// DF17 message with capability 5, random address and ME field, valid parity.
pub fn random_message<R: Rng>(rng: &mut R, icao: Icao) -> AdsbMessage {
    AdsbMessage::df17(5, icao, rng.gen())
}

/// Random frame of type `t`. Keys and signatures are random bytes, so
/// B2 and C frames do not verify; they exercise the codec only.
pub fn random_frame<R: Rng>(rng: &mut R, t: FrameType, mac_bits: u16) -> Frame {
    let icao = random_icao(rng);
    match t {
        FrameType::A => Frame::A(FrameA {
            message: random_message(rng, icao),
            mac: (0..mac_bits).map(|_| rng.gen::<bool>()).collect::<Bits>(),
            seq: rng.gen(),
        }),
        FrameType::B1 => Frame::B1(FrameB1 {
            icao,
            interval_index: rng.gen_range(0..=MAX_INTERVAL_TAG),
            key: Key128(rng.gen()),
        }),
        FrameType::B2 => Frame::B2(FrameB2 {
            icao,
            interval_index: rng.gen_range(0..=MAX_INTERVAL_TAG),
            key: Key128(rng.gen()),
            signature: random_signature(rng),
        }),
        FrameType::C => {
            let mut pk = [0u8; 32];
            rng.fill(&mut pk);
            Frame::C(FrameC {
                icao,
                public_key: PublicKey(pk),
                signature: random_signature(rng),
            })
        }
    }
}

fn random_signature<R: Rng>(rng: &mut R) -> Signature {
    let mut s = [0u8; 64];
    rng.fill(&mut s[..]);
    Signature(s)
}
