//! On-disk formats.
//!
//! | file | layout |
//! |------|--------|
//! | frame hex dump | one frame per line: `TYPE I:<hex> Q:<hex>` |
//! | frame records | JSON lines, one [`FrameRecord`] per line |
//! | I/Q samples | f32 little-endian `re, im` pairs; sidecar `<file>.meta` with `#key=value` lines, `#sr=<hz>` required |
//! | key chain | JSON [`KeyFile`] |
//! | traffic capture | CSV with header `timestamp,icao24` |
//! | loss ECDF | CSV with header `distance_km,p` |
//! | scenario | JSON `{"t_b1": 5, "t_b2": 10, "t_c": 15}` |

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use cabba_core::airspace::{LossEcdf, ScenarioParams, TrafficCapture, TrafficRecord};
use cabba_core::bits::HexError;
use cabba_core::frame::{AdsbMessage, EncodedFrame, FrameA, FrameB1, FrameB2, FrameC};
use cabba_core::modem::BasebandSignal;
use cabba_core::pki::{PublicKey, Signature};
use cabba_core::tesla::{Key128, KeyChain};
use cabba_core::{Bits, Frame, FrameType, Icao};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    /// Input that cannot be parsed at all.
    #[error("{0}")]
    Syntax(String),
    /// Well-formed input whose content is wrong.
    #[error("{0}")]
    Content(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl FormatError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        FormatError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn syntax(msg: impl Into<String>) -> FormatError {
    FormatError::Syntax(msg.into())
}

fn content(msg: impl Into<String>) -> FormatError {
    FormatError::Content(msg.into())
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, FormatError> {
    std::fs::read(path).map_err(|e| FormatError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    String::from_utf8(read_file(path)?).map_err(|_| syntax(format!("{}: not UTF-8", path.display())))
}

// ---------------------------------------------------------------- hex dump

pub fn format_hex_line(frame: &EncodedFrame) -> String {
    format!(
        "{} I:{} Q:{}",
        frame.frame_type.name(),
        frame.in_phase.to_hex(),
        frame.quadrature.to_hex()
    )
}

fn hex_field(field: &str, len: usize, role: &str) -> Result<Bits, FormatError> {
    Bits::from_hex(field, len).map_err(|e| match e {
        HexError::InvalidDigit(c) => syntax(format!("{role} packet: invalid hex digit {c:?}")),
        HexError::Length { expected, found } => {
            content(format!("{role} packet: {found} hex digits, expected {expected}"))
        }
        HexError::NonZeroPadding => content(format!("{role} packet: non-zero padding bits")),
    })
}

pub fn parse_hex_line(line: &str) -> Result<EncodedFrame, FormatError> {
    let mut parts = line.split_whitespace();
    let (Some(ty), Some(i), Some(q), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        if line.split_whitespace().count() < 3 {
            return Err(content(format!("truncated line: {line:?}")));
        }
        return Err(syntax(format!("expected `TYPE I:<hex> Q:<hex>`: {line:?}")));
    };
    let frame_type = FrameType::from_name(ty).ok_or_else(|| syntax(format!("unknown frame type {ty:?}")))?;
    let i = i.strip_prefix("I:").ok_or_else(|| syntax("missing `I:` field"))?;
    let q = q.strip_prefix("Q:").ok_or_else(|| syntax("missing `Q:` field"))?;
    Ok(EncodedFrame {
        frame_type,
        in_phase: hex_field(i, frame_type.in_phase_len(), "in-phase")?,
        quadrature: hex_field(q, frame_type.quadrature_len(), "quadrature")?,
    })
}

/// Parses every non-blank line not starting with `#`.
pub fn parse_hex_dump(text: &str) -> Result<Vec<EncodedFrame>, FormatError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| {
            parse_hex_line(l).map_err(|e| match e {
                FormatError::Syntax(m) => syntax(format!("line {}: {m}", n + 1)),
                FormatError::Content(m) => content(format!("line {}: {m}", n + 1)),
                other => other,
            })
        })
        .collect()
}

// ---------------------------------------------------------- frame records

/// Field-level view of a frame; byte fields are lower-case hex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum FrameRecord {
    A {
        icao: String,
        /// The 14-byte DF17 message.
        message: String,
        /// MAC bits as hex, `ceil(mac_bits/4)` digits.
        mac: String,
        mac_bits: usize,
        seq: u8,
    },
    B1 {
        icao: String,
        interval: u32,
        key: String,
    },
    B2 {
        icao: String,
        interval: u32,
        key: String,
        signature: String,
    },
    C {
        icao: String,
        public_key: String,
        signature: String,
    },
}

fn hex_array<const N: usize>(s: &str, what: &str) -> Result<[u8; N], FormatError> {
    let v = hex::decode(s).map_err(|e| syntax(format!("{what}: {e}")))?;
    v.try_into()
        .map_err(|v: Vec<u8>| content(format!("{what}: {} bytes, expected {N}", v.len())))
}

pub fn parse_icao(s: &str) -> Result<Icao, FormatError> {
    let v = u32::from_str_radix(s.trim(), 16).map_err(|_| syntax(format!("bad ICAO address {s:?}")))?;
    Icao::new(v).ok_or_else(|| syntax(format!("ICAO address {s:?} exceeds 24 bits")))
}

impl From<&Frame> for FrameRecord {
    fn from(f: &Frame) -> Self {
        let icao = f.icao().to_string();
        match f {
            Frame::A(a) => FrameRecord::A {
                icao,
                message: hex::encode(a.message.0),
                mac: a.mac.to_hex(),
                mac_bits: a.mac.len(),
                seq: a.seq,
            },
            Frame::B1(b) => FrameRecord::B1 {
                icao,
                interval: b.interval_index,
                key: hex::encode(b.key.0),
            },
            Frame::B2(b) => FrameRecord::B2 {
                icao,
                interval: b.interval_index,
                key: hex::encode(b.key.0),
                signature: hex::encode(b.signature.0),
            },
            Frame::C(c) => FrameRecord::C {
                icao,
                public_key: hex::encode(c.public_key.0),
                signature: hex::encode(c.signature.0),
            },
        }
    }
}

impl TryFrom<&FrameRecord> for Frame {
    type Error = FormatError;

    fn try_from(r: &FrameRecord) -> Result<Self, FormatError> {
        Ok(match r {
            FrameRecord::A {
                icao,
                message,
                mac,
                mac_bits,
                seq,
            } => {
                let message = AdsbMessage(hex_array(message, "message")?);
                if message.icao() != parse_icao(icao)? {
                    return Err(content("message ICAO differs from record ICAO"));
                }
                Frame::A(FrameA {
                    message,
                    mac: hex_field(mac, *mac_bits, "MAC")?,
                    seq: *seq,
                })
            }
            FrameRecord::B1 { icao, interval, key } => Frame::B1(FrameB1 {
                icao: parse_icao(icao)?,
                interval_index: *interval,
                key: Key128(hex_array(key, "key")?),
            }),
            FrameRecord::B2 {
                icao,
                interval,
                key,
                signature,
            } => Frame::B2(FrameB2 {
                icao: parse_icao(icao)?,
                interval_index: *interval,
                key: Key128(hex_array(key, "key")?),
                signature: Signature(hex_array(signature, "signature")?),
            }),
            FrameRecord::C {
                icao,
                public_key,
                signature,
            } => Frame::C(FrameC {
                icao: parse_icao(icao)?,
                public_key: PublicKey(hex_array(public_key, "public key")?),
                signature: Signature(hex_array(signature, "signature")?),
            }),
        })
    }
}

/// Reads JSON-lines frame records; blank and `#` lines are skipped.
pub fn parse_frame_records(text: &str) -> Result<Vec<FrameRecord>, FormatError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| serde_json::from_str(l).map_err(|e| syntax(format!("line {}: {e}", n + 1))))
        .collect()
}

// ---------------------------------------------------------------- I/Q files

pub fn sidecar_path(iq: &Path) -> PathBuf {
    let mut s = iq.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// `#key=value` lines stored next to an I/Q file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sidecar {
    pub entries: BTreeMap<String, String>,
}

impl Sidecar {
    pub fn sample_rate_hz(&self) -> Result<f64, FormatError> {
        let sr = self.entries.get("sr").ok_or_else(|| syntax("sidecar lacks #sr="))?;
        sr.parse::<f64>()
            .ok()
            .filter(|v| *v > 0.0 && v.is_finite())
            .ok_or_else(|| syntax(format!("bad sample rate {sr:?}")))
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("#{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut entries = BTreeMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let kv = line.strip_prefix('#').ok_or_else(|| syntax(format!("sidecar line {line:?}")))?;
            let (k, v) = kv.split_once('=').ok_or_else(|| syntax(format!("sidecar line {line:?}")))?;
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { entries })
    }
}

pub fn iq_bytes(signal: &BasebandSignal) -> Vec<u8> {
    let mut out = Vec::with_capacity(signal.len() * 8);
    for s in &signal.samples {
        out.extend_from_slice(&(s.re as f32).to_le_bytes());
        out.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    out
}

pub fn samples_from_bytes(bytes: &[u8]) -> Result<Vec<Complex64>, FormatError> {
    if !bytes.len().is_multiple_of(8) {
        return Err(content(format!("{} bytes is not a whole number of f32 pairs", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes(c[..4].try_into().expect("4 bytes"));
            let im = f32::from_le_bytes(c[4..].try_into().expect("4 bytes"));
            Complex64::new(re as f64, im as f64)
        })
        .collect())
}

pub fn write_iq(path: &Path, signal: &BasebandSignal, sidecar: &Sidecar) -> Result<(), FormatError> {
    std::fs::write(path, iq_bytes(signal)).map_err(|e| FormatError::io(path, e))?;
    let meta = sidecar_path(path);
    std::fs::write(&meta, sidecar.render()).map_err(|e| FormatError::io(&meta, e))
}

/// Reads samples and sidecar. A missing sidecar is a usage error.
pub fn read_iq(path: &Path) -> Result<(BasebandSignal, Sidecar), FormatError> {
    let meta = sidecar_path(path);
    if !meta.exists() {
        return Err(syntax(format!("missing sidecar {}", meta.display())));
    }
    let sidecar = Sidecar::parse(&read_text(&meta)?)?;
    let signal = BasebandSignal {
        samples: samples_from_bytes(&read_file(path)?)?,
        sample_rate_hz: sidecar.sample_rate_hz()?,
    };
    Ok((signal, sidecar))
}

// ---------------------------------------------------------------- key files

/// A key chain `K_0..=K_N` as hex strings. The seed is not stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyFile {
    pub length: u32,
    pub keys: Vec<String>,
}

impl From<&KeyChain> for KeyFile {
    fn from(c: &KeyChain) -> Self {
        Self {
            length: c.length(),
            keys: c.keys().iter().map(|k| hex::encode(k.0)).collect(),
        }
    }
}

impl KeyFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        serde_json::from_str(text).map_err(|e| syntax(format!("key file: {e}")))
    }

    /// Keys in order; length mismatch or bad hex is a content error.
    pub fn keys(&self) -> Result<Vec<Key128>, FormatError> {
        if self.keys.len() != self.length as usize + 1 {
            return Err(content(format!(
                "key file lists {} keys for length {}",
                self.keys.len(),
                self.length
            )));
        }
        self.keys
            .iter()
            .map(|k| {
                let bytes = hex::decode(k).map_err(|e| content(format!("key {k:?}: {e}")))?;
                let arr: [u8; 16] = bytes.try_into().map_err(|_| content(format!("key {k:?} is not 16 bytes")))?;
                Ok(Key128(arr))
            })
            .collect()
    }
}

// ------------------------------------------------------- traffic capture

/// Capture plus the number of malformed rows skipped.
#[derive(Debug, Clone)]
pub struct CaptureRead {
    pub capture: TrafficCapture,
    pub skipped: usize,
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, FormatError> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
        .ok_or_else(|| syntax(format!("CSV header lacks `{name}`")))
}

/// Reads `timestamp,icao24` rows. Malformed rows are counted and skipped;
/// no valid row at all is a content error.
pub fn read_capture<R: Read>(reader: R) -> Result<CaptureRead, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) if !h.is_empty() => h.clone(),
        _ => return Err(content("capture has no valid rows")),
    };
    let (ts_col, icao_col) = (column(&headers, "timestamp")?, column(&headers, "icao24")?);
    let mut records = Vec::new();
    let mut skipped = 0;
    for row in rdr.records() {
        let parsed = row.ok().and_then(|r| {
            let t = r.get(ts_col)?.parse::<f64>().ok().filter(|t| t.is_finite())?;
            let icao = parse_icao(r.get(icao_col)?).ok()?;
            Some(TrafficRecord { timestamp_s: t, icao })
        });
        match parsed {
            Some(r) => records.push(r),
            None => skipped += 1,
        }
    }
    let capture = TrafficCapture::new(records).map_err(|e| content(e.to_string()))?;
    Ok(CaptureRead { capture, skipped })
}

pub fn write_capture<W: Write>(out: W, capture: &TrafficCapture) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| content(e.to_string());
    w.write_record(["timestamp", "icao24"]).map_err(err)?;
    for r in capture.records() {
        w.write_record([crate::num::fmt_sig(r.timestamp_s), r.icao.to_string()]).map_err(err)?;
    }
    w.flush().map_err(|e| content(e.to_string()))
}

// ---------------------------------------------------------------- loss ECDF

/// Reads `distance_km,p` rows. Any malformed or non-monotone input is a syntax error.
pub fn read_ecdf<R: Read>(reader: R) -> Result<LossEcdf, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| syntax(e.to_string()))?.clone();
    let (d_col, p_col) = (column(&headers, "distance_km")?, column(&headers, "p")?);
    let mut points = Vec::new();
    for (n, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| syntax(e.to_string()))?;
        let num = |c: usize| -> Result<f64, FormatError> {
            row.get(c)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| syntax(format!("ECDF row {}: not a number", n + 1)))
        };
        points.push((num(d_col)?, num(p_col)?));
    }
    LossEcdf::new(points).map_err(|e| syntax(e.to_string()))
}

/// Loss probability against distance at the protected-volume and sector
/// radii, interpolated linearly between them.
pub fn reference_ecdf() -> LossEcdf {
    const NM: f64 = cabba_core::airspace::NM_TO_KM;
    LossEcdf::new(vec![
        (0.0, 0.0),
        (5.0 * NM, 0.028),
        (11.6 * NM, 0.064),
        (16.0 * NM, 0.089),
        (40.0 * NM, 0.222),
        (150.0 * NM, 0.833),
    ])
    .expect("reference profile is monotone")
}

// ---------------------------------------------------------------- scenarios

/// A preset name (`s1`..`s4`) or a path to a scenario JSON file.
pub fn load_scenario(spec: &str) -> Result<ScenarioParams, FormatError> {
    if let Some(s) = ScenarioParams::preset(spec) {
        return Ok(s);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(syntax(format!("unknown scenario {spec:?}")));
    }
    let s: ScenarioParams =
        serde_json::from_str(&read_text(path)?).map_err(|e| syntax(format!("scenario file: {e}")))?;
    s.validate().map_err(|e| syntax(e.to_string()))?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cabba_core::frame::{encode_frame, CodecConfig};

    #[test]
    fn hex_line_round_trip() {
        let f = Frame::B1(FrameB1 {
            icao: Icao::new(0xABCDEF).unwrap(),
            interval_index: 77,
            key: Key128([9; 16]),
        });
        let enc = encode_frame(&f, &CodecConfig::default()).unwrap();
        let line = format_hex_line(&enc);
        assert!(line.starts_with("B1 I:"));
        assert_eq!(parse_hex_line(&line).unwrap(), enc);
    }

    #[test]
    fn hex_line_errors() {
        assert!(matches!(parse_hex_line("B1 I:zz Q:00"), Err(FormatError::Syntax(_))));
        assert!(matches!(parse_hex_line("B1 I:00"), Err(FormatError::Content(_))));
        assert!(matches!(parse_hex_line("B1 I:00 Q:00"), Err(FormatError::Content(_))));
        assert!(matches!(parse_hex_line("X9 I:00 Q:00"), Err(FormatError::Syntax(_))));
    }

    #[test]
    fn sidecar_round_trip() {
        let mut s = Sidecar::default();
        s.entries.insert("sr".into(), "10000000".into());
        s.entries.insert("order".into(), "8".into());
        let back = Sidecar::parse(&s.render()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.sample_rate_hz().unwrap(), 1e7);
        assert!(Sidecar::parse("sr=1").is_err());
    }

    #[test]
    fn capture_skips_malformed_rows() {
        let csv = "timestamp,icao24\n1.5,abcdef\nnope,abcdef\n2.0,zzzzzz\n3,\n0.5,000001\n";
        let r = read_capture(csv.as_bytes()).unwrap();
        assert_eq!((r.capture.len(), r.skipped), (2, 3));
        assert_eq!(r.capture.start(), 0.5);
        assert!(matches!(read_capture("".as_bytes()), Err(FormatError::Content(_))));
        assert!(matches!(read_capture("timestamp,icao24\nx,y\n".as_bytes()), Err(FormatError::Content(_))));
        assert!(matches!(read_capture("a,b\n1,2\n".as_bytes()), Err(FormatError::Syntax(_))));
    }

    #[test]
    fn ecdf_parsing() {
        let e = read_ecdf("distance_km,p\n0,0\n10,0.5\n".as_bytes()).unwrap();
        assert_eq!(e.p_at(5.0), 0.25);
        assert!(read_ecdf("distance_km,p\n0,0.5\n10,0.1\n".as_bytes()).is_err());
        assert!(read_ecdf("distance_km,p\n".as_bytes()).is_err());
    }

    #[test]
    fn reference_profile_hits_radii() {
        let e = reference_ecdf();
        assert_eq!(e.p_at(16.0 * 1.852), 0.089);
        assert_eq!(e.p_at(150.0 * 1.852), 0.833);
    }

    #[test]
    fn records_round_trip() {
        let f = Frame::C(FrameC {
            icao: Icao::new(0x123456).unwrap(),
            public_key: PublicKey([7; 32]),
            signature: Signature([3; 64]),
        });
        let r = FrameRecord::from(&f);
        let line = serde_json::to_string(&r).unwrap();
        let back = parse_frame_records(&line).unwrap();
        assert_eq!(Frame::try_from(&back[0]).unwrap(), f);
    }
}
