#![allow(dead_code)]

use cabba_core::frame::{AdsbMessage, FrameA, FrameB1, FrameB2, FrameC, MAX_INTERVAL_TAG};
use cabba_core::modem::{ModemConfig, PskEncoding, PskOrder, SymbolMapping};
use cabba_core::pki::{PublicKey, Signature};
use cabba_core::{Bits, Frame, FrameType, Icao, Key128};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn frame_from_seed(seed: u64, t: FrameType, mac_bits: u16) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let icao = Icao::new(rng.gen_range(0..=0xFF_FFFF)).unwrap();
    let mut sig = [0u8; 64];
    rng.fill(&mut sig[..]);
    match t {
        FrameType::A => Frame::A(FrameA {
            message: AdsbMessage::df17(5, icao, rng.gen()),
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
            signature: Signature(sig),
        }),
        FrameType::C => Frame::C(FrameC {
            icao,
            public_key: PublicKey(rng.gen()),
            signature: Signature(sig),
        }),
    }
}

pub fn frame_type() -> impl Strategy<Value = FrameType> {
    prop::sample::select(FrameType::ALL.to_vec())
}

pub fn modem_config() -> impl Strategy<Value = ModemConfig> {
    (
        prop::sample::select(vec![4usize, 6, 8, 10, 16]),
        prop::sample::select(vec![PskOrder::Psk8, PskOrder::Psk16]),
        prop::sample::select(vec![PskEncoding::Differential, PskEncoding::Absolute]),
        prop::sample::select(vec![SymbolMapping::Natural, SymbolMapping::Gray]),
    )
        .prop_map(|(samples_per_symbol, psk_order, encoding, mapping)| ModemConfig {
            samples_per_symbol,
            psk_order,
            encoding,
            mapping,
        })
}
