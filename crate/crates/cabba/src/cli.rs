//! The `cabba` command line.
//!
//! Exit codes: 0 success, 1 domain failure (verification, decoding, empty
//! data), 2 usage error (bad flags, unparsable input, missing files).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cabba_core::airspace::{
    los_range_nm, mutual_los_range_nm, safety_table, sat_overhead_bits_per_min, ScenarioParams, SafetyDomain,
    ADSB_BASELINE_BPS, DEFAULT_WINDOW_S, SAFETY_SCENARIO, SAT_REPORTED_BITS_PER_MIN, SAT_REPORTED_BPS,
    SAT_REPORTED_INCREASE,
};
use cabba_core::channel::BerConfig;
use cabba_core::frame::{decode_frame, encode_frame, CodecConfig, EncodedFrame};
use cabba_core::modem::{
    demodulate_frame, modulate_frame, BasebandSignal, ModemConfig, PskEncoding, PskOrder, SymbolMapping,
};
use cabba_core::pki::EcdsaP256;
use cabba_core::tesla::{verify_pledge, KeyChain, TeslaConfig, MAX_MAC_BITS, MIN_MAC_BITS};
use cabba_core::{Frame, FrameType};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::formats::{self, FormatError, FrameRecord, KeyFile, Sidecar};
use crate::num::{fmt_sig, round_sig};
use crate::{cor, gen, rxsim, sweep};

const FORMATS_HELP: &str = "\
File formats:
  frame hex dump   one frame per line: `TYPE I:<hex> Q:<hex>`; TYPE is A, B1, B2 or C,
                   hex is MSB-first with ceil(bits/4) digits and zero pad bits
  frame records    JSON lines, e.g. {\"type\":\"B1\",\"icao\":\"abcdef\",\"interval\":7,\"key\":\"<32 hex>\"};
                   A: icao, message (28 hex), mac, mac_bits, seq; B2: + signature (128 hex);
                   C: icao, public_key (64 hex), signature (128 hex)
  I/Q samples      interleaved f32 little-endian re,im; sidecar <file>.meta with `#key=value`
                   lines, `#sr=<hz>` required
  key chain        JSON {\"length\": N, \"keys\": [\"<K_0 hex>\", ..., \"<K_N hex>\"]}
  traffic capture  CSV header `timestamp,icao24`; timestamp in seconds, icao24 in hex;
                   malformed rows are skipped and counted
  loss ECDF        CSV header `distance_km,p`; distances increasing, p non-decreasing in [0,1]
  scenario         s1..s4 or a JSON file {\"t_b1\": 5, \"t_b2\": 10, \"t_c\": 15} (seconds)
  rxsim script     `ca <name> [seed=<text>] [untrusted]`,
                   `sender <name> icao=<hex> ca=<ca> [chain=<u64>] [length=<n>] [key=<text>]`,
                   `<t> <sender> A|C` and `<t> <sender> B1|B2 <interval>`; `#` starts a comment

Outputs:
  ber      ebno_db,order,bits,errors,ber,theory_ber
  cor      cor1: hour,gamma_mean,gamma_lo,gamma_hi   cor2: hour,gamma_adsb,gamma_s1,..,gamma_s4
  rxsim    event log t,icao,frame_type,state_before,state_after,verdicts_changed,
           then final message and stream verdicts
  Floats carry six significant digits.

Exit codes: 0 ok, 1 verification or decoding failure, 2 usage error.";

#[derive(Debug, Parser)]
#[command(name = "cabba", version, about = "Authenticated ADS-B broadcast toolkit", after_help = FORMATS_HELP)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or check a one-way key chain.
    #[command(subcommand)]
    Keychain(KeychainCmd),
    /// Convert between frame records and the hex-dump format.
    #[command(subcommand)]
    Frame(FrameCmd),
    /// Convert between hex dumps and I/Q sample files.
    #[command(subcommand)]
    Modem(ModemCmd),
    /// Monte-Carlo bit error rate sweep.
    Ber(BerArgs),
    /// Replay a sender/receiver script.
    Rxsim {
        #[arg(long)]
        events: PathBuf,
    },
    /// Channel occupancy of a traffic capture.
    Cor(CorArgs),
    /// Uncertainty delays for TCAS volumes or ATC sectors.
    Safety(SafetyArgs),
    /// Per-aircraft overhead of the SAT comparison scheme.
    Sat {
        /// Type A message rate per second.
        #[arg(long, default_value_t = 6.2)]
        fa: f64,
        /// Key packet period, seconds.
        #[arg(long, default_value_t = 5.0)]
        tb: f64,
        /// Certificate packet period, seconds.
        #[arg(long, default_value_t = 30.0)]
        tc: f64,
    },
    /// Radio line-of-sight range.
    Los {
        /// Altitude in feet.
        #[arg(long)]
        alt: f64,
        /// Second aircraft altitude; gives the mutual range.
        #[arg(long)]
        alt2: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum KeychainCmd {
    Gen {
        /// 128-bit chain seed as 32 hex digits; derived from --seed if absent.
        #[arg(long)]
        seed_hex: Option<String>,
        #[arg(long, default_value_t = 100)]
        length: u32,
        /// Key file to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Verify {
        #[arg(long)]
        keys: PathBuf,
        /// Also check this key against the pledge `K_0`.
        #[arg(long)]
        index: Option<u32>,
    },
}

#[derive(Debug, Args)]
pub struct MacArg {
    /// Truncated MAC length of Type A frames.
    #[arg(long, default_value_t = MAX_MAC_BITS)]
    pub mac_bits: u16,
}

#[derive(Debug, Subcommand)]
pub enum FrameCmd {
    /// Random frames as a hex dump.
    Gen {
        /// A, B1, B2, C or all.
        #[arg(long = "type", default_value = "all")]
        frame_type: String,
        /// Frames per type.
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[command(flatten)]
        mac: MacArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frame records (JSON lines) to hex dump.
    Encode {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        mac: MacArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hex dump to frame records.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        mac: MacArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EncodingArg {
    Diff,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MappingArg {
    Natural,
    Gray,
}

#[derive(Debug, Args)]
pub struct ModemArgs {
    /// Samples per 1 µs symbol (even, at least 4).
    #[arg(long, default_value_t = 10)]
    pub sps: usize,
    /// PSK order, 8 or 16.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = EncodingArg::Diff)]
    pub encoding: EncodingArg,
    #[arg(long, value_enum, default_value_t = MappingArg::Natural)]
    pub mapping: MappingArg,
}

#[derive(Debug, Subcommand)]
pub enum ModemCmd {
    /// Hex dump to I/Q samples.
    Tx {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        modem: ModemArgs,
    },
    /// I/Q samples to hex dump; every frame must decode.
    Rx {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        modem: ModemArgs,
        #[command(flatten)]
        mac: MacArg,
    },
}

#[derive(Debug, Args)]
pub struct BerArgs {
    /// Comma-separated PSK orders.
    #[arg(long, default_value = "8,16")]
    pub orders: String,
    /// `start:step:stop` or a comma-separated list, dB.
    #[arg(long, default_value = "4:1:16")]
    pub ebno: String,
    #[arg(long, default_value_t = 100)]
    pub min_errors: u64,
    #[arg(long, default_value = "1e7")]
    pub max_bits: String,
    #[arg(long, default_value_t = 32)]
    pub frames_per_batch: usize,
    #[arg(long, default_value_t = 10)]
    pub sps: usize,
    #[arg(long, value_enum, default_value_t = EncodingArg::Diff)]
    pub encoding: EncodingArg,
    #[arg(long, value_enum, default_value_t = MappingArg::Natural)]
    pub mapping: MappingArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Hourly mean and confidence interval for one scenario.
    Cor1,
    /// Hourly ADS-B occupancy against every preset scenario.
    Cor2,
}

#[derive(Debug, Args)]
pub struct CorArgs {
    #[arg(long)]
    pub capture: PathBuf,
    /// s1, s2, s3, s4 or a scenario JSON file.
    #[arg(long, default_value = "s1")]
    pub scenario: String,
    #[arg(long, value_enum, default_value_t = Figure::Cor1)]
    pub figure: Figure,
    /// Sampling window, seconds.
    #[arg(long, default_value_t = DEFAULT_WINDOW_S)]
    pub window: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Tcas,
    Atc,
}

#[derive(Debug, Args)]
pub struct SafetyArgs {
    #[arg(long, value_enum)]
    pub domain: DomainArg,
    /// Loss ECDF; a built-in profile at the table radii if absent.
    #[arg(long)]
    pub ecdf: Option<PathBuf>,
    /// Scenario periods; defaults to T_B1 = 5 s, T_B2 = T_C = 30 s.
    #[arg(long)]
    pub scenario: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Content(m) => CliError::Failure(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn failure(msg: impl std::fmt::Display) -> CliError {
    CliError::Failure(msg.to_string())
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code: 2,
                }
            } else {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code: 0,
                }
            };
        }
    };
    let mut ctx = Ctx {
        seed: cli.seed,
        format: cli.format,
        notes: String::new(),
    };
    match execute(&mut ctx, cli.command) {
        Ok(stdout) => Outcome {
            stdout,
            stderr: ctx.notes,
            code: 0,
        },
        Err(e) => Outcome {
            stdout: String::new(),
            stderr: format!("{}error: {e}\n", ctx.notes),
            code: e.exit_code(),
        },
    }
}

struct Ctx {
    seed: u64,
    format: OutputFormat,
    notes: String,
}

impl Ctx {
    fn note(&mut self, msg: impl std::fmt::Display) {
        let _ = writeln!(self.notes, "note: {msg}");
    }
}

// -------------------------------------------------------------- tables

#[derive(Debug, Clone)]
enum Cell {
    Str(String),
    Int(i64),
    Num(f64),
    Null,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt_sig(*x),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Str(s) => Value::String(s.clone()),
            Cell::Int(i) => json!(i),
            Cell::Num(x) if x.is_finite() => json!(round_sig(*x)),
            Cell::Num(_) | Cell::Null => Value::Null,
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.into())
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}
impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}
impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Str(b.to_string())
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(o: Option<T>) -> Self {
        o.map_or(Cell::Null, Into::into)
    }
}

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn text(&self) -> String {
        let rendered: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| rendered.iter().map(|r| r[c].len()).chain([self.headers[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.headers);
        for r in &rendered {
            out.push_str(&line(r));
        }
        out
    }

    fn json_value(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (h, c) in self.headers.iter().zip(r) {
                        m.insert(h.clone(), c.json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }

    fn render(&self, f: OutputFormat) -> String {
        match f {
            OutputFormat::Csv => self.csv(),
            OutputFormat::Text => self.text(),
            OutputFormat::Json => pretty(&self.json_value()),
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialise") + "\n"
}

/// Several named tables: sections in text and CSV, one object in JSON.
fn render_sections(f: OutputFormat, sections: &[(&str, &Table)]) -> String {
    match f {
        OutputFormat::Json => {
            let mut m = Map::new();
            for (name, t) in sections {
                m.insert(name.to_string(), t.json_value());
            }
            pretty(&Value::Object(m))
        }
        _ => sections
            .iter()
            .map(|(name, t)| format!("# {name}\n{}", t.render(f)))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

fn write_or_return(out: &Option<PathBuf>, body: String) -> Result<String, CliError> {
    match out {
        Some(p) => {
            std::fs::write(p, body).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            Ok(String::new())
        }
        None => Ok(body),
    }
}

// -------------------------------------------------------------- commands

fn execute(ctx: &mut Ctx, cmd: Command) -> Result<String, CliError> {
    match cmd {
        Command::Keychain(k) => keychain(ctx, k),
        Command::Frame(f) => frame(ctx, f),
        Command::Modem(m) => modem(ctx, m),
        Command::Ber(b) => ber(ctx, b),
        Command::Rxsim { events } => rxsim_cmd(ctx, &events),
        Command::Cor(c) => cor_cmd(ctx, c),
        Command::Safety(s) => safety(ctx, s),
        Command::Sat { fa, tb, tc } => sat(ctx, fa, tb, tc),
        Command::Los { alt, alt2 } => los(ctx, alt, alt2),
    }
}

fn keychain(ctx: &mut Ctx, cmd: KeychainCmd) -> Result<String, CliError> {
    match cmd {
        KeychainCmd::Gen { seed_hex, length, out } => {
            let seed: [u8; 16] = match seed_hex {
                Some(h) => hex::decode(&h)
                    .ok()
                    .and_then(|v| v.try_into().ok())
                    .ok_or_else(|| usage("--seed-hex needs exactly 32 hex digits"))?,
                None => ChaCha8Rng::seed_from_u64(ctx.seed).gen(),
            };
            let chain = KeyChain::generate(&seed, &TeslaConfig::with_chain_length(length))
                .map_err(|e| usage(e.to_string()))?;
            let file = KeyFile::from(&chain);
            match out {
                Some(p) => {
                    let body = serde_json::to_string_pretty(&file).expect("key file serialises") + "\n";
                    write_or_return(&Some(p.clone()), body)?;
                    let mut t = Table::new(&["length", "pledge", "out"]);
                    t.push(vec![length.into(), file.keys[0].clone().into(), p.display().to_string().into()]);
                    Ok(t.render(ctx.format))
                }
                None if ctx.format == OutputFormat::Json => {
                    Ok(serde_json::to_string_pretty(&file).expect("key file serialises") + "\n")
                }
                None => {
                    let mut t = Table::new(&["index", "key"]);
                    for (i, k) in file.keys.iter().enumerate() {
                        t.push(vec![i.into(), k.clone().into()]);
                    }
                    Ok(t.render(ctx.format))
                }
            }
        }
        KeychainCmd::Verify { keys, index } => {
            let file = KeyFile::parse(&formats::read_text(&keys)?)?;
            let chain = KeyChain::from_keys(file.keys()?).map_err(failure)?;
            let mut t = Table::new(&["check", "result"]);
            t.push(vec!["chain".into(), "ok".into()]);
            if let Some(i) = index {
                let key = chain
                    .key(i)
                    .ok_or_else(|| usage(format!("index {i} beyond chain length {}", chain.length())))?;
                let guard = TeslaConfig::with_chain_length(chain.length()).pledge_guard();
                if !verify_pledge(&key, i, &chain.pledge(), guard).map_err(failure)? {
                    return Err(failure(format!("key {i} does not hash to the pledge")));
                }
                t.push(vec![format!("pledge({i})").into(), "ok".into()]);
            }
            Ok(t.render(ctx.format))
        }
    }
}

fn codec(mac: &MacArg) -> Result<CodecConfig, CliError> {
    if !(MIN_MAC_BITS..=MAX_MAC_BITS).contains(&mac.mac_bits) {
        return Err(usage(format!("--mac-bits must lie in {MIN_MAC_BITS}..={MAX_MAC_BITS}")));
    }
    Ok(CodecConfig {
        mac_len_bits: mac.mac_bits,
    })
}

fn render_encoded(f: OutputFormat, frames: &[EncodedFrame]) -> String {
    match f {
        OutputFormat::Text => frames.iter().map(|e| formats::format_hex_line(e) + "\n").collect(),
        _ => {
            let mut t = Table::new(&["type", "in_phase", "quadrature"]);
            for e in frames {
                t.push(vec![
                    e.frame_type.name().into(),
                    e.in_phase.to_hex().into(),
                    e.quadrature.to_hex().into(),
                ]);
            }
            t.render(f)
        }
    }
}

fn render_records(f: OutputFormat, frames: &[Frame]) -> String {
    let records: Vec<FrameRecord> = frames.iter().map(FrameRecord::from).collect();
    match f {
        OutputFormat::Json => records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialise") + "\n")
            .collect(),
        _ => {
            let mut t = Table::new(&["type", "icao", "interval", "seq", "fields"]);
            for r in &records {
                let row: Vec<Cell> = match r {
                    FrameRecord::A {
                        icao,
                        message,
                        mac,
                        mac_bits,
                        seq,
                    } => vec![
                        "A".into(),
                        icao.clone().into(),
                        Cell::Null,
                        (*seq as u32).into(),
                        format!("message={message} mac={mac} mac_bits={mac_bits}").into(),
                    ],
                    FrameRecord::B1 { icao, interval, key } => vec![
                        "B1".into(),
                        icao.clone().into(),
                        (*interval).into(),
                        Cell::Null,
                        format!("key={key}").into(),
                    ],
                    FrameRecord::B2 {
                        icao,
                        interval,
                        key,
                        signature,
                    } => vec![
                        "B2".into(),
                        icao.clone().into(),
                        (*interval).into(),
                        Cell::Null,
                        format!("key={key} signature={signature}").into(),
                    ],
                    FrameRecord::C {
                        icao,
                        public_key,
                        signature,
                    } => vec![
                        "C".into(),
                        icao.clone().into(),
                        Cell::Null,
                        Cell::Null,
                        format!("public_key={public_key} signature={signature}").into(),
                    ],
                };
                t.push(row);
            }
            t.render(f)
        }
    }
}

fn frame(ctx: &mut Ctx, cmd: FrameCmd) -> Result<String, CliError> {
    match cmd {
        FrameCmd::Gen {
            frame_type,
            count,
            mac,
            out,
        } => {
            let cfg = codec(&mac)?;
            let types: Vec<FrameType> = if frame_type.eq_ignore_ascii_case("all") {
                FrameType::ALL.to_vec()
            } else {
                vec![FrameType::from_name(&frame_type).ok_or_else(|| usage(format!("unknown frame type {frame_type:?}")))?]
            };
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let mut encoded = Vec::new();
            for t in types {
                for _ in 0..count {
                    let f = gen::random_frame(&mut rng, t, cfg.mac_len_bits);
                    encoded.push(encode_frame(&f, &cfg).map_err(failure)?);
                }
            }
            write_or_return(&out, render_encoded(ctx.format, &encoded))
        }
        FrameCmd::Encode { input, mac, out } => {
            let cfg = codec(&mac)?;
            let records = formats::parse_frame_records(&formats::read_text(&input)?)?;
            let encoded = records
                .iter()
                .enumerate()
                .map(|(n, r)| {
                    let f = Frame::try_from(r)?;
                    encode_frame(&f, &cfg).map_err(|e| failure(format!("record {}: {e}", n + 1)))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            write_or_return(&out, render_encoded(ctx.format, &encoded))
        }
        FrameCmd::Decode { input, mac, out } => {
            let cfg = codec(&mac)?;
            let encoded = formats::parse_hex_dump(&formats::read_text(&input)?)?;
            let frames = decode_all(&encoded, &cfg)?;
            write_or_return(&out, render_records(ctx.format, &frames))
        }
    }
}

fn decode_all(encoded: &[EncodedFrame], cfg: &CodecConfig) -> Result<Vec<Frame>, CliError> {
    encoded
        .iter()
        .enumerate()
        .map(|(n, e)| {
            decode_frame(&e.in_phase, &e.quadrature, cfg).map_err(|err| failure(format!("frame {}: {err}", n + 1)))
        })
        .collect()
}

fn modem_config(m: &ModemArgs) -> Result<ModemConfig, CliError> {
    let cfg = ModemConfig {
        samples_per_symbol: m.sps,
        psk_order: PskOrder::from_order(m.order).ok_or_else(|| usage("--order must be 8 or 16"))?,
        encoding: match m.encoding {
            EncodingArg::Diff => PskEncoding::Differential,
            EncodingArg::Abs => PskEncoding::Absolute,
        },
        mapping: match m.mapping {
            MappingArg::Natural => SymbolMapping::Natural,
            MappingArg::Gray => SymbolMapping::Gray,
        },
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

/// Silence before, between and after frames in a sample file, µs.
pub const FRAME_GAP_US: usize = 8;

fn modem(ctx: &mut Ctx, cmd: ModemCmd) -> Result<String, CliError> {
    match cmd {
        ModemCmd::Tx { input, out, modem } => {
            let cfg = modem_config(&modem)?;
            let frames = formats::parse_hex_dump(&formats::read_text(&input)?)?;
            let gap = vec![Complex64::new(0.0, 0.0); FRAME_GAP_US * cfg.samples_per_symbol];
            let mut samples = gap.clone();
            for f in &frames {
                samples.extend(modulate_frame(f, &cfg).map_err(failure)?.samples);
                samples.extend_from_slice(&gap);
            }
            let signal = BasebandSignal {
                samples,
                sample_rate_hz: cfg.sample_rate_hz(),
            };
            let mut side = Sidecar::default();
            side.entries.insert("sr".into(), format!("{}", cfg.sample_rate_hz() as u64));
            side.entries.insert("sps".into(), cfg.samples_per_symbol.to_string());
            side.entries.insert("order".into(), cfg.psk_order.order().to_string());
            side.entries.insert("encoding".into(), format!("{:?}", modem.encoding).to_lowercase());
            side.entries.insert("mapping".into(), format!("{:?}", modem.mapping).to_lowercase());
            side.entries.insert("frames".into(), frames.len().to_string());
            formats::write_iq(&out, &signal, &side)?;
            let mut t = Table::new(&["frames", "samples", "sample_rate_hz"]);
            t.push(vec![frames.len().into(), signal.len().into(), cfg.sample_rate_hz().into()]);
            Ok(t.render(ctx.format))
        }
        ModemCmd::Rx { input, out, modem, mac } => {
            let cfg = modem_config(&modem)?;
            let codec = codec(&mac)?;
            let (signal, _) = formats::read_iq(&input)?;
            if (signal.sample_rate_hz - cfg.sample_rate_hz()).abs() > 0.5 {
                return Err(usage(format!(
                    "sample rate {} Hz does not match --sps {}",
                    signal.sample_rate_hz, cfg.samples_per_symbol
                )));
            }
            let encoded = scan_frames(&signal, &cfg)?;
            decode_all(&encoded, &codec)?;
            write_or_return(&out, render_encoded(ctx.format, &encoded))
        }
    }
}

/// Walks a sample stream, demodulating each frame found after silence.
fn scan_frames(signal: &BasebandSignal, cfg: &ModemConfig) -> Result<Vec<EncodedFrame>, CliError> {
    let mut frames = Vec::new();
    let mut cursor = 0;
    while let Some(offset) = signal.samples[cursor..].iter().position(|s| s.norm_sqr() > 0.25) {
        let start = cursor + offset;
        let rest = signal.slice(start, signal.len() - start).expect("start lies inside the signal");
        let rx = demodulate_frame(&rest, cfg).map_err(|e| failure(format!("frame at sample {start}: {e}")))?;
        let frame_type =
            cabba_core::frame::classify_frame(&rx.in_phase).map_err(|e| failure(format!("frame at sample {start}: {e}")))?;
        cursor = start + cfg.frame_len(rx.in_phase.len());
        frames.push(EncodedFrame {
            frame_type,
            in_phase: rx.in_phase,
            quadrature: rx.quadrature,
        });
    }
    Ok(frames)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || usage(format!("bad Eb/N0 grid {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let grid: Vec<f64> = match parts.as_slice() {
        [start, step, stop] => {
            let (a, s, b): (f64, f64, f64) = (
                start.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
                stop.trim().parse().map_err(|_| bad())?,
            );
            if !(s > 0.0) || b < a {
                return Err(bad());
            }
            let n = ((b - a) / s + 1e-9).floor() as usize;
            (0..=n).map(|i| a + i as f64 * s).collect()
        }
        [_] => spec
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Ok(grid)
}

fn ber(ctx: &mut Ctx, args: BerArgs) -> Result<String, CliError> {
    let grid = parse_grid(&args.ebno)?;
    let max_bits: f64 = args.max_bits.parse().map_err(|_| usage("bad --max-bits"))?;
    if !(max_bits >= 1.0) || args.frames_per_batch == 0 {
        return Err(usage("--max-bits and --frames-per-batch must be positive"));
    }
    let orders: Vec<usize> = args
        .orders
        .split(',')
        .map(|o| o.trim().parse().map_err(|_| usage(format!("bad order {o:?}"))))
        .collect::<Result<_, _>>()?;
    let mut t = Table::new(&["ebno_db", "order", "bits", "errors", "ber", "theory_ber"]);
    for (oi, &order) in orders.iter().enumerate() {
        let modem = modem_config(&ModemArgs {
            sps: args.sps,
            order,
            encoding: args.encoding,
            mapping: args.mapping,
        })?;
        let cfg = BerConfig {
            modem,
            min_errors: args.min_errors,
            max_bits: max_bits as u64,
            frames_per_batch: args.frames_per_batch,
            ..BerConfig::default()
        };
        let seed = ctx.seed ^ (oi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        for p in sweep::par_ber_sweep(&cfg, &grid, seed).map_err(failure)? {
            if p.bit_errors == 0 {
                ctx.note(format!(
                    "order {} at {} dB: no errors in {} bits",
                    order,
                    fmt_sig(p.ebno_db),
                    p.bits_sent
                ));
            }
            t.push(vec![
                p.ebno_db.into(),
                p.order.into(),
                p.bits_sent.into(),
                p.bit_errors.into(),
                p.ber.into(),
                p.theory_ber.into(),
            ]);
        }
    }
    Ok(t.render(ctx.format))
}

fn rxsim_cmd(ctx: &mut Ctx, events: &Path) -> Result<String, CliError> {
    let script = rxsim::parse_script(&formats::read_text(events)?).map_err(|e| usage(e.to_string()))?;
    let out = rxsim::run_script::<EcdsaP256>(&script, ctx.seed).map_err(failure)?;
    if ctx.format == OutputFormat::Json {
        return Ok(serde_json::to_string_pretty(&out).expect("outcome serialises") + "\n");
    }
    let mut log = Table::new(&["t", "icao", "frame_type", "state_before", "state_after", "verdicts_changed"]);
    for e in &out.events {
        log.push(vec![
            e.t.into(),
            e.icao.clone().into(),
            e.frame_type.clone().into(),
            e.state_before.clone().into(),
            e.state_after.clone().into(),
            e.verdicts_changed.into(),
        ]);
        if let Some(r) = &e.rejected {
            ctx.note(format!("t={} {} {} from {} rejected: {r}", e.t, e.icao, e.frame_type, e.sender));
        }
    }
    let mut msgs = Table::new(&["icao", "message", "sender", "interval", "seq", "integrity", "origin", "stream", "expired"]);
    let mut streams = Table::new(&["icao", "stream", "verdict", "keys", "first_interval", "last_interval"]);
    let mut states = Table::new(&["icao", "state"]);
    for c in &out.contexts {
        states.push(vec![c.icao.clone().into(), c.state.name().into()]);
        for m in &c.messages {
            msgs.push(vec![
                c.icao.clone().into(),
                m.message.into(),
                m.sender.clone().into(),
                m.interval.into(),
                (m.seq as u32).into(),
                snake(&m.integrity).into(),
                snake(&m.origin).into(),
                m.stream.into(),
                m.expired.into(),
            ]);
        }
        for s in &c.streams {
            streams.push(vec![
                c.icao.clone().into(),
                s.stream.into(),
                snake(&s.verdict).into(),
                s.keys.into(),
                s.first_interval.into(),
                s.last_interval.into(),
            ]);
        }
    }
    Ok(render_sections(
        ctx.format,
        &[("events", &log), ("states", &states), ("messages", &msgs), ("streams", &streams)],
    ))
}

/// `ImpostorCandidate` to `impostor_candidate`.
fn snake(v: &dyn std::fmt::Debug) -> String {
    let mut out = String::new();
    for (i, c) in format!("{v:?}").chars().enumerate() {
        if c.is_ascii_uppercase() && i > 0 {
            out.push('_');
        }
        out.push(c.to_ascii_lowercase());
    }
    out
}

fn cor_cmd(ctx: &mut Ctx, args: CorArgs) -> Result<String, CliError> {
    if !(args.window > 0.0 && args.window.is_finite()) {
        return Err(usage("--window must be positive"));
    }
    let file = std::fs::File::open(&args.capture).map_err(|e| usage(format!("{}: {e}", args.capture.display())))?;
    let read = formats::read_capture(std::io::BufReader::new(file))?;
    if read.skipped > 0 {
        ctx.note(format!("skipped {} malformed rows", read.skipped));
    }
    match args.figure {
        Figure::Cor1 => {
            let scenario = formats::load_scenario(&args.scenario)?;
            let stats = cor::hourly_cabba(&read.capture, args.window, &scenario).map_err(failure)?;
            let mut t = Table::new(&["hour", "gamma_mean", "gamma_lo", "gamma_hi"]);
            for s in stats {
                t.push(vec![s.hour.into(), s.mean.into(), s.lo.into(), s.hi.into()]);
            }
            Ok(t.render(ctx.format))
        }
        Figure::Cor2 => {
            let scenarios: Vec<ScenarioParams> = ScenarioParams::ALL.iter().map(|(_, s)| *s).collect();
            let rows = cor::hourly_comparison(&read.capture, args.window, &scenarios).map_err(failure)?;
            let mut t = Table::new(&["hour", "gamma_adsb", "gamma_s1", "gamma_s2", "gamma_s3", "gamma_s4"]);
            for r in rows {
                let mut row: Vec<Cell> = vec![r.hour.into(), r.gamma_adsb.into()];
                row.extend(r.gamma_scenarios.iter().map(|&g| Cell::from(g)));
                t.push(row);
            }
            Ok(t.render(ctx.format))
        }
    }
}

fn safety(ctx: &mut Ctx, args: SafetyArgs) -> Result<String, CliError> {
    let ecdf = match &args.ecdf {
        Some(p) => {
            let file = std::fs::File::open(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            formats::read_ecdf(std::io::BufReader::new(file))?
        }
        None => formats::reference_ecdf(),
    };
    let scenario = match &args.scenario {
        Some(s) => formats::load_scenario(s)?,
        None => SAFETY_SCENARIO,
    };
    let domain = match args.domain {
        DomainArg::Tcas => SafetyDomain::Tcas,
        DomainArg::Atc => SafetyDomain::Atc,
    };
    let rows = safety_table(domain, &scenario, &ecdf).map_err(failure)?;
    let mut t = Table::new(&[
        "name",
        "radius_km",
        "p",
        "du_b1_s",
        "budget_lo_s",
        "budget_hi_s",
        "los_min_lo",
        "los_min_hi",
        "du_c_s",
    ]);
    for r in rows {
        t.push(vec![
            r.name.into(),
            r.radius_km.into(),
            r.p.into(),
            r.du_b1_s.into(),
            r.budget_s.0.into(),
            r.budget_s.1.into(),
            r.los_min.0.into(),
            r.los_min.1.into(),
            r.du_c_s.into(),
        ]);
    }
    Ok(t.render(ctx.format))
}

fn sat(ctx: &mut Ctx, fa: f64, tb: f64, tc: f64) -> Result<String, CliError> {
    let bits = sat_overhead_bits_per_min(fa, tb, tc).map_err(|e| usage(e.to_string()))?;
    let adsb_bps = fa * 112.0;
    let mut t = Table::new(&["quantity", "value"]);
    let mut row = |k: &str, v: f64| t.push(vec![k.into(), v.into()]);
    row("formula_bits_per_min", bits);
    row("formula_bps", bits / 60.0);
    row("adsb_bps", adsb_bps);
    row("formula_increase", bits / 60.0 / adsb_bps);
    row("reported_bits_per_min", SAT_REPORTED_BITS_PER_MIN);
    row("reported_bps", SAT_REPORTED_BPS);
    row("reported_adsb_bps", ADSB_BASELINE_BPS);
    row("reported_increase", SAT_REPORTED_INCREASE);
    row("discrepancy_bits_per_min", SAT_REPORTED_BITS_PER_MIN - bits);
    if (bits - SAT_REPORTED_BITS_PER_MIN).abs() > 0.5 {
        ctx.note(format!(
            "formula gives {} bits/min; the reported figure is {}",
            fmt_sig(bits),
            fmt_sig(SAT_REPORTED_BITS_PER_MIN)
        ));
    }
    Ok(t.render(ctx.format))
}

fn los(ctx: &mut Ctx, alt: f64, alt2: Option<f64>) -> Result<String, CliError> {
    let nm = match alt2 {
        Some(b) => mutual_los_range_nm(alt, b),
        None => los_range_nm(alt),
    }
    .map_err(|e| usage(e.to_string()))?;
    let mut t = Table::new(&["alt_ft", "alt2_ft", "los_nm"]);
    t.push(vec![alt.into(), alt2.into(), nm.into()]);
    Ok(t.render(ctx.format))
}
