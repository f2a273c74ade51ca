#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod airspace;
pub mod bits;
pub mod channel;
pub mod crc24;
pub mod fec;
pub mod frame;
pub mod modem;
pub mod pki;
pub mod receiver;
pub mod sender;
pub mod tesla;

pub use bits::Bits;
pub use frame::{decode_frame, encode_frame, CodecConfig, Frame, FrameError, FrameType, Icao};
pub use tesla::{Key128, KeyChain, TeslaConfig, TeslaError};
