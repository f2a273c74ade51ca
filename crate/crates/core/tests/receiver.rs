use cabba_core::frame::AdsbMessage;
use cabba_core::pki::{AircraftKeypair, CertAuthority, HashMock};
use cabba_core::receiver::{AuthState, Integrity, MessageId, Origin, Receiver, ReceiverConfig, StreamVerdict};
use cabba_core::sender::Transmitter;
use cabba_core::{Frame, Icao, KeyChain, TeslaConfig};
use proptest::prelude::*;

const ICAO: u32 = 0x4840D6;

struct Cast {
    ca: CertAuthority<HashMock>,
    genuine: Transmitter<HashMock>,
    spoofer: Transmitter<HashMock>,
}

fn cast() -> Cast {
    let ca = CertAuthority::<HashMock>::from_seed(b"ca");
    let rogue = CertAuthority::<HashMock>::from_seed(b"rogue");
    let icao = Icao::new(ICAO).unwrap();
    let cfg = TeslaConfig::with_chain_length(20);
    let genuine = Transmitter::new(
        ca.issue_certificate(icao, AircraftKeypair::from_seed(b"aircraft")),
        KeyChain::generate(&[7; 16], &cfg).unwrap(),
        &cfg,
    )
    .unwrap();
    let spoofer = Transmitter::new(
        rogue.issue_certificate(icao, AircraftKeypair::from_seed(b"spoofer")),
        KeyChain::generate(&[9; 16], &cfg).unwrap(),
        &cfg,
    )
    .unwrap();
    Cast { ca, genuine, spoofer }
}

fn report(n: u8) -> AdsbMessage {
    AdsbMessage::df17(5, Icao::new(ICAO).unwrap(), [0x58, 0x11, n, 0xD6, 0x90, 0xC8, 0xAC])
}

/// `(frame, natural receive interval, sent by the spoofer)`.
fn frame_pool(c: &mut Cast) -> Vec<(Frame, u32, bool)> {
    vec![
        (c.genuine.type_a(report(1), 1).unwrap(), 1, false),
        (c.genuine.type_a(report(2), 1).unwrap(), 1, false),
        (c.genuine.type_b1(1).unwrap(), 2, false),
        (c.genuine.type_b2(2).unwrap(), 3, false),
        (c.genuine.type_c(), 0, false),
        (c.spoofer.type_a(report(3), 1).unwrap(), 1, true),
        (c.spoofer.type_b1(1).unwrap(), 2, true),
        (c.spoofer.type_b2(2).unwrap(), 3, true),
        (c.spoofer.type_c(), 0, true),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn interleavings_never_authenticate_the_spoofer(order in Just((0..9usize).collect::<Vec<_>>()).prop_shuffle(), keep in prop::collection::vec(prop::bool::weighted(0.8), 9)) {
        let mut c = cast();
        let pool = frame_pool(&mut c);
        let mut rx = Receiver::<HashMock>::new(ReceiverConfig::new(vec![c.ca.public_key()]));
        let mut spoofed: Vec<MessageId> = Vec::new();
        let mut interval = 0;
        let mut state = AuthState::S0;
        for &i in order.iter().filter(|&&i| keep[i]) {
            let (frame, natural, by_spoofer) = &pool[i];
            interval = interval.max(*natural);
            match rx.ingest(frame, interval) {
                Ok(r) => {
                    prop_assert!(r.state_before.may_become(r.state_after));
                    prop_assert_eq!(r.state_before, state);
                    state = r.state_after;
                    if *by_spoofer {
                        spoofed.extend(r.message);
                    }
                }
                Err(_) => prop_assert!(*by_spoofer || matches!(frame, Frame::B1(_) | Frame::B2(_))),
            }
        }
        if let Some(ctx) = rx.context(Icao::new(ICAO).unwrap()) {
            for v in ctx.verdicts() {
                if spoofed.contains(&v.message) {
                    prop_assert_eq!(v.origin, Origin::Unauthenticated);
                }
                if v.origin == Origin::Authenticated {
                    prop_assert_eq!(v.integrity, Integrity::Ok);
                    let s = v.stream.unwrap();
                    prop_assert_eq!(ctx.streams()[s.0 as usize].verdict, StreamVerdict::Authenticated);
                }
            }
            for s in ctx.streams() {
                let genuine_keys = s.keys.iter().all(|(i, k)| c.genuine.chain().key(*i) == Some(*k));
                if s.verdict == StreamVerdict::Authenticated {
                    prop_assert!(genuine_keys);
                }
            }
        }
    }
}

#[test]
fn natural_order_authenticates_the_aircraft_only() {
    let mut c = cast();
    let mut pool = frame_pool(&mut c);
    pool.sort_by_key(|p| p.1);
    let mut rx = Receiver::<HashMock>::new(ReceiverConfig::new(vec![c.ca.public_key()]));
    let mut ids = Vec::new();
    for (f, t, spoof) in &pool {
        if let Ok(r) = rx.ingest(f, *t) {
            if let Some(m) = r.message {
                ids.push((m, *spoof));
            }
        }
    }
    let ctx = rx.context(Icao::new(ICAO).unwrap()).unwrap();
    assert_eq!(ctx.state(), AuthState::S4);
    assert_eq!(ctx.streams().len(), 2);
    for (id, spoof) in ids {
        let v = ctx.verdict(id).unwrap();
        assert_eq!(v.integrity, Integrity::Ok);
        let want = if spoof { Origin::Unauthenticated } else { Origin::Authenticated };
        assert_eq!(v.origin, want);
    }
    let verdicts: Vec<StreamVerdict> = ctx.streams().iter().map(|s| s.verdict).collect();
    assert!(verdicts.contains(&StreamVerdict::Authenticated));
    assert!(verdicts.contains(&StreamVerdict::ImpostorCandidate));
}

#[test]
fn contexts_are_per_address() {
    let c = cast();
    let other = Icao::new(0xABCDEF).unwrap();
    let cfg = TeslaConfig::with_chain_length(5);
    let second = Transmitter::new(
        c.ca.issue_certificate(other, AircraftKeypair::from_seed(b"second")),
        KeyChain::generate(&[3; 16], &cfg).unwrap(),
        &cfg,
    )
    .unwrap();
    let mut rx = Receiver::<HashMock>::new(ReceiverConfig::new(vec![c.ca.public_key()]));
    rx.ingest(&c.genuine.type_b1(1).unwrap(), 2).unwrap();
    rx.ingest(&second.type_c(), 2).unwrap();
    assert_eq!(rx.contexts().count(), 2);
    assert_eq!(rx.context(Icao::new(ICAO).unwrap()).unwrap().state(), AuthState::S1);
    assert_eq!(rx.context(other).unwrap().state(), AuthState::S3);
}

#[test]
fn states_only_move_up_the_partial_order() {
    use AuthState::*;
    let all = [S0, S1, S2, S3, S4];
    for a in all {
        for b in all {
            let ok = a.may_become(b);
            let expected = a == b || a.rank() < b.rank();
            assert_eq!(ok, expected, "{a}->{b}");
        }
    }
    assert!(!S2.may_become(S3) && !S3.may_become(S2));
}
