//! The `cbx` command line.
//!
//! Exit codes: 0 on success, 1 on runtime failure (IO, parse, transport),
//! 2 on usage errors (bad flags or invalid parameter values).

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cbx_core::{
    generate_keystream, histogram, iterate_orbit, lower_bound_error, lyapunov_from_lbe,
    shannon_entropy, xor_apply, KeystreamConfig, MapConfig, Scheme,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::exchange::{self, DeviceProfile, ExchangeError, InProcess, TcpLoopback, Transport};
use crate::manifest::RunManifest;
use crate::pgm::{read_pgm, write_pgm, PgmError, PgmFormat};
use crate::series::{write_histogram_csv, write_series_csv};
use crate::testimage;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Stdout(#[from] io::Error),
    #[error("{path}: {source}")]
    Pgm { path: PathBuf, source: PgmError },
    #[error(transparent)]
    Core(#[from] cbx_core::Error),
    #[error(transparent)]
    Exchange(#[from] ExchangeError),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "cbx", version, about = "Cubic-map XOR image encryption and cross-scheme divergence analysis")]
pub struct Cli {
    /// Write a replayable JSON manifest of this run to PATH.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the cubic map and write the orbit as CSV.
    Simulate(SimulateArgs),
    /// Lower bound error between two schemes, with a Lyapunov fit.
    Lbe(LbeArgs),
    /// Write the key bytes (fill order) for a profile.
    Keygen(KeygenArgs),
    /// XOR a PGM image with a profile's key.
    Encrypt(CryptArgs),
    /// XOR a PGM image with a profile's key (same operation as encrypt).
    Decrypt(CryptArgs),
    /// Shannon entropy of a file or of a profile's keystream.
    Entropy(EntropyArgs),
    /// 256-bin histogram as `value,count` lines.
    Histogram(HistogramArgs),
    /// Send or receive encrypted images over TCP, or run a local exchange.
    #[command(subcommand)]
    Exchange(ExchangeCommand),
    /// Write the bundled synthetic test image.
    Testimage(TestimageArgs),
    /// Replay the arguments recorded in a manifest.
    Rerun {
        #[arg(value_name = "MANIFEST")]
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    E1,
    E2,
    E3,
    E4,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::E1 => Scheme::E1,
            SchemeArg::E2 => Scheme::E2,
            SchemeArg::E3 => Scheme::E3,
            SchemeArg::E4 => Scheme::E4,
        }
    }
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long, default_value_t = cbx_core::keygen::DEFAULT_X0, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = cbx_core::keygen::DEFAULT_R)]
    pub r: f64,
    #[arg(long, value_enum, default_value = "e1")]
    pub scheme: SchemeArg,
    /// Multiply each iterate by this factor before feeding it back.
    #[arg(long)]
    pub damping: Option<f64>,
}

impl MapArgs {
    fn config(&self) -> CliResult<MapConfig> {
        let cfg = MapConfig { r: self.r, x0: self.x0, damping: self.damping, scheme: self.scheme.into() };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = cbx_core::keygen::DEFAULT_ITERATIONS)]
    pub iters: usize,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LbeArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Scheme of the second orbit.
    #[arg(long, value_enum, default_value = "e2")]
    pub vs: SchemeArg,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// First iteration of the fit window (default: first nonzero delta).
    #[arg(long, requires = "fit_end")]
    pub fit_start: Option<usize>,
    /// End of the fit window, exclusive.
    #[arg(long, requires = "fit_start")]
    pub fit_end: Option<usize>,
    /// LBE series CSV (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report with the fitted exponent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Key selection: a named profile, optionally overridden field by field.
#[derive(Debug, Args)]
pub struct KeyArgs {
    /// device1..device4 (single orbit, scheme e1..e4) or deviceN-damped
    /// (70 seeds × 1024 iterations, r = 3.61, damping 0.89).
    #[arg(long, default_value = "device1")]
    pub profile: String,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, conflicts_with = "no_damping")]
    pub damping: Option<f64>,
    #[arg(long)]
    pub no_damping: bool,
    /// Single-orbit length.
    #[arg(long, conflicts_with_all = ["seeds", "iters_per_seed"])]
    pub iters: Option<usize>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub iters_per_seed: Option<usize>,
}

impl KeyArgs {
    pub fn resolve(&self) -> CliResult<DeviceProfile> {
        let base = DeviceProfile::preset(&self.profile).ok_or_else(|| {
            usage(format!(
                "unknown profile {:?} (expected one of {})",
                self.profile,
                exchange::PRESETS.join(", ")
            ))
        })?;
        let wants_multi = self.seeds.is_some() || self.iters_per_seed.is_some();
        let wants_single = self.x0.is_some() || self.iters.is_some();
        if wants_multi && wants_single {
            return Err(usage("--x0/--iters apply to single-orbit keys, --seeds/--iters-per-seed to multi-seed keys"));
        }
        let mut ks = base.keystream;
        let scheme = self.scheme.map(Scheme::from).unwrap_or(ks.scheme());
        ks = match ks {
            KeystreamConfig::MultiSeed { .. } if wants_single => KeystreamConfig::single_orbit(scheme),
            KeystreamConfig::SingleOrbit { .. } if wants_multi => KeystreamConfig::multi_seed(scheme),
            other => other.with_scheme(scheme),
        };
        match &mut ks {
            KeystreamConfig::SingleOrbit { map, iterations } => {
                map.x0 = self.x0.unwrap_or(map.x0);
                map.r = self.r.unwrap_or(map.r);
                map.damping = self.damping_override(map.damping);
                *iterations = self.iters.unwrap_or(*iterations);
            }
            KeystreamConfig::MultiSeed { r, damping, seed_count, iterations_per_seed, .. } => {
                *r = self.r.unwrap_or(*r);
                *damping = self.damping_override(*damping);
                *seed_count = self.seeds.unwrap_or(*seed_count);
                *iterations_per_seed = self.iters_per_seed.unwrap_or(*iterations_per_seed);
            }
        }
        ks.validate().map_err(usage)?;
        let customized = ks != base.keystream;
        let name = if customized { format!("{}+custom", base.name) } else { base.name };
        Ok(DeviceProfile::new(name, ks))
    }

    fn damping_override(&self, current: Option<f64>) -> Option<f64> {
        if self.no_damping {
            None
        } else {
            self.damping.or(current)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum KeyFormat {
    #[default]
    Raw,
    Hex,
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[command(flatten)]
    pub key: KeyArgs,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    #[arg(long, value_enum, default_value = "raw")]
    pub format: KeyFormat,
    /// Output file (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CryptArgs {
    #[command(flatten)]
    pub key: KeyArgs,
    /// Input PGM (P5 or P2).
    #[arg(long = "in", value_name = "PGM")]
    pub input: PathBuf,
    #[arg(long, value_name = "PGM")]
    pub out: PathBuf,
    /// Write ASCII P2 instead of binary P5.
    #[arg(long)]
    pub ascii: bool,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// File to measure; PGM files are measured over their pixels. Without
    /// this flag the profile's keystream is measured.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Treat the input as raw bytes even if it looks like a PGM.
    #[arg(long, requires = "input")]
    pub raw: bool,
    #[command(flatten)]
    pub key: KeyArgs,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub raw: bool,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExchangeCommand {
    /// Accept one connection, decrypt its frame with this profile's key.
    Serve(ServeArgs),
    /// Encrypt an image with this profile's key and send it.
    Send(SendArgs),
    /// Sender and receiver in one process.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub addr: String,
    #[command(flatten)]
    pub key: KeyArgs,
    /// Where to write the decrypted candidate image.
    #[arg(long, value_name = "PGM")]
    pub out: PathBuf,
    /// Plaintext to compare the candidate against.
    #[arg(long, value_name = "PGM")]
    pub original: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SendArgs {
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub addr: String,
    #[command(flatten)]
    pub key: KeyArgs,
    #[arg(long = "in", value_name = "PGM")]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TransportArg {
    Inproc,
    Tcp,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value = "device1")]
    pub sender: String,
    #[arg(long, default_value = "device2")]
    pub receiver: String,
    /// Plaintext PGM (the bundled test image if omitted).
    #[arg(long = "in", value_name = "PGM")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "inproc")]
    pub transport: TransportArg,
    /// Where to write the receiver's candidate image.
    #[arg(long, value_name = "PGM")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestimageArgs {
    #[arg(long, value_name = "PGM")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    #[arg(long)]
    pub ascii: bool,
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn read_image(path: &Path) -> CliResult<cbx_core::GrayImage> {
    read_pgm(&read_file(path)?).map_err(|source| CliError::Pgm { path: path.to_owned(), source })
}

fn looks_like_pgm(bytes: &[u8]) -> bool {
    matches!(bytes.get(..2), Some(b"P5") | Some(b"P2"))
}

fn pgm_format(ascii: bool) -> PgmFormat {
    if ascii {
        PgmFormat::Ascii
    } else {
        PgmFormat::Binary
    }
}

/// Writes to `path`, or to `stdout` when no path was given.
fn emit(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write, m: &mut RunManifest) -> CliResult<()> {
    match path {
        Some(p) => {
            write_file(p, bytes)?;
            m.outputs.push(p.display().to_string());
        }
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write, m: &mut RunManifest) -> CliResult<()> {
    let cfg = a.map.config()?;
    let orbit = iterate_orbit(&cfg, a.iters)?;
    m.resolved = json!({ "map": cfg, "iters": a.iters });
    let name = format!("orbit scheme={} x0={} r={} damping={}", cfg.scheme, cfg.x0, cfg.r, fmt_opt(cfg.damping));
    emit(a.out.as_deref(), write_series_csv(&name, orbit.samples()).as_bytes(), out, m)
}

fn cmd_lbe(a: &LbeArgs, out: &mut dyn Write, m: &mut RunManifest) -> CliResult<()> {
    let cfg_a = a.map.config()?;
    let cfg_b = cfg_a.with_scheme(a.vs.into());
    let lbe = lower_bound_error(&iterate_orbit(&cfg_a, a.iters)?, &iterate_orbit(&cfg_b, a.iters)?)?;
    let window: Option<Range<usize>> = a.fit_start.zip(a.fit_end).map(|(s, e)| s..e);
    let fit = match lyapunov_from_lbe(&lbe, window.clone()) {
        Ok(est) => Some(est),
        Err(cbx_core::Error::NoDivergence) => None,
        Err(e) if window.is_some() => return Err(usage(e)),
        Err(e) => return Err(e.into()),
    };

    let report = json!({
        "scheme_a": cfg_a.scheme,
        "scheme_b": cfg_b.scheme,
        "x0": cfg_a.x0,
        "r": cfg_a.r,
        "damping": cfg_a.damping,
        "iters": a.iters,
        "first_divergence": lbe.first_divergence(),
        "first_crossing_1e-3": lbe.first_crossing(1e-3),
        "lambda": fit.as_ref().map(|f| f.lambda),
        "intercept": fit.as_ref().map(|f| f.intercept),
        "fit_range": fit.as_ref().map(|f| [f.fit_range.0, f.fit_range.1]),
        "points_used": fit.as_ref().map(|f| f.points_used),
        "r_squared": fit.as_ref().map(|f| f.r_squared),
    });
    m.resolved = json!({ "a": cfg_a, "b": cfg_b, "iters": a.iters, "fit_window": window.map(|w| [w.start, w.end]) });

    let name = format!("lbe {} vs {} x0={} r={} damping={}", cfg_a.scheme, cfg_b.scheme, cfg_a.x0, cfg_a.r, fmt_opt(cfg_a.damping));
    emit(a.out.as_deref(), write_series_csv(&name, lbe.delta()).as_bytes(), out, m)?;
    if let Some(path) = &a.report {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        write_file(path, text.as_bytes())?;
        m.outputs.push(path.display().to_string());
    }
    if a.out.is_some() {
        match &fit {
            Some(f) => writeln!(
                out,
                "lambda={} fit_range=[{}, {}] r_squared={} first_crossing_1e-3={}",
                f.lambda, f.fit_range.0, f.fit_range.1, f.r_squared, fmt_opt(lbe.first_crossing(1e-3))
            )?,
            None => writeln!(out, "no divergence: orbits are bit-identical")?,
        }
    }
    Ok(())
}

fn keystream_for(profile: &DeviceProfile, width: usize, height: usize) -> CliResult<Vec<u8>> {
    let count = width
        .checked_mul(height)
        .filter(|&c| c > 0)
        .ok_or_else(|| usage(format!("invalid dimensions {width}x{height}")))?;
    Ok(generate_keystream(&profile.keystream, count)?)
}

fn cmd_keygen(a: &KeygenArgs, out: &mut dyn Write, m: &mut RunManifest) -> CliResult<()> {
    let profile = a.key.resolve()?;
    let stream = keystream_for(&profile, a.width, a.height)?;
    m.resolved = json!({ "profile": profile, "width": a.width, "height": a.height });
    let bytes = match a.format {
        KeyFormat::Raw => stream,
        KeyFormat::Hex => {
            let mut hex = String::with_capacity(stream.len() * 2 + stream.len() / 32 + 1);
            for line in stream.chunks(32) {
                for b in line {
                    hex.push_str(&format!("{b:02x}"));
                }
                hex.push('\n');
            }
            hex.into_bytes()
        }
    };
    emit(a.out.as_deref(), &bytes, out, m)
}

fn cmd_crypt(a: &CryptArgs, m: &mut RunManifest) -> CliResult<()> {
    let profile = a.key.resolve()?;
    let image = read_image(&a.input)?;
    m.inputs.push(a.input.display().to_string());
    let key = profile.key_matrix(image.width(), image.height())?;
    m.resolved = json!({ "profile": profile, "width": image.width(), "height": image.height() });
    let result = xor_apply(&image, &key)?;
    write_file(&a.out, &write_pgm(&result, pgm_format(a.ascii)))?;
    m.outputs.push(a.out.display().to_string());
    Ok(())
}

fn cmd_entropy(a: &EntropyArgs, out: &mut dyn Write, m: &mut RunManifest) -> CliResult<()> {
    let data = match &a.input {
        Some(path) => {
            let bytes = read_file(path)?;
            m.inputs.push(path.display().to_string());
            m.resolved = json!({ "input": path, "raw": a.raw });
            if !a.raw && looks_like_pgm(&bytes) {
                read_pgm(&bytes)
                    .map_err(|source| CliError::Pgm { path: path.clone(), source })?
                    .into_pixels()
            } else {
                bytes
            }
        }
        None => {
            let profile = a.key.resolve()?;
            m.resolved = json!({ "profile": profile, "width": a.width, "height": a.height });
            keystream_for(&profile, a.width, a.height)?
        }
    };
    let e = shannon_entropy(&histogram(&data)?);
    writeln!(out, "samples={} h_bits={} h_norm={}", data.len(), e.h_bits, e.h_norm)?;
    Ok(())
}

fn cmd_histogram(a: &HistogramArgs, out: &mut dyn Write, m: &mut RunManifest) -> CliResult<()> {
    let bytes = read_file(&a.input)?;
    m.inputs.push(a.input.display().to_string());
    m.resolved = json!({ "input": a.input, "raw": a.raw });
    let data = if !a.raw && looks_like_pgm(&bytes) {
        read_pgm(&bytes)
            .map_err(|source| CliError::Pgm { path: a.input.clone(), source })?
            .into_pixels()
    } else {
        bytes
    };
    let hist = histogram(&data)?;
    emit(a.out.as_deref(), write_histogram_csv(&hist).as_bytes(), out, m)?;
    if a.out.is_some() {
        let bins = hist.bins();
        writeln!(
            out,
            "min={} max={} max/min={}",
            bins.iter().min().unwrap_or(&0),
            bins.iter().max().unwrap_or(&0),
            hist.max_min_ratio()
        )?;
    }
    Ok(())
}

fn write_report(out: &mut dyn Write, r: &exchange::ExchangeReport) -> io::Result<()> {
    writeln!(out, "sender={} receiver={}", r.sender, r.receiver)?;
    writeln!(out, "frame_bytes={}", r.frame_len)?;
    writeln!(out, "key_mismatch_fraction={}", r.key_mismatch_fraction)?;
    writeln!(out, "match_fraction={}", r.match_fraction)?;
    writeln!(out, "candidate_h_norm={}", r.candidate_entropy.h_norm)?;
    writeln!(out, "recovered={}", r.recovered())
}

fn cmd_exchange(c: &ExchangeCommand, out: &mut dyn Write, m: &mut RunManifest) -> CliResult<()> {
    match c {
        ExchangeCommand::Serve(a) => {
            let profile = a.key.resolve()?;
            let original = a.original.as_deref().map(read_image).transpose()?;
            let (listener, local) = exchange::bind(a.addr.as_str())?;
            writeln!(out, "listening on {local}")?;
            out.flush()?;
            let received = exchange::decode_frame(&exchange::receive_one(&listener)?)
                .map_err(ExchangeError::from)?;
            let key = profile.key_matrix(received.width(), received.height())?;
            let candidate = xor_apply(&received, &key)?;
            write_file(&a.out, &write_pgm(&candidate, PgmFormat::Binary))?;
            m.outputs.push(a.out.display().to_string());
            m.resolved = json!({ "profile": profile, "addr": a.addr });
            let e = shannon_entropy(&histogram(candidate.pixels())?);
            writeln!(out, "received {}x{} candidate_h_norm={}", candidate.width(), candidate.height(), e.h_norm)?;
            if let Some(orig) = original {
                if orig.width() != candidate.width() || orig.height() != candidate.height() {
                    return Err(cbx_core::Error::DimensionMismatch {
                        expected: (orig.width(), orig.height()),
                        found: (candidate.width(), candidate.height()),
                    }
                    .into());
                }
                let same = orig.pixels().iter().zip(candidate.pixels()).filter(|(a, b)| a == b).count();
                writeln!(out, "match_fraction={}", same as f64 / orig.pixels().len() as f64)?;
            }
            Ok(())
        }
        ExchangeCommand::Send(a) => {
            let profile = a.key.resolve()?;
            let image = read_image(&a.input)?;
            m.inputs.push(a.input.display().to_string());
            let key = profile.key_matrix(image.width(), image.height())?;
            let frame = exchange::encode_frame(&xor_apply(&image, &key)?).map_err(ExchangeError::from)?;
            exchange::send_frame(a.addr.as_str(), &frame)?;
            m.resolved = json!({ "profile": profile, "addr": a.addr });
            writeln!(out, "sent {} bytes to {}", frame.len(), a.addr)?;
            Ok(())
        }
        ExchangeCommand::Run(a) => {
            let lookup = |name: &str| {
                DeviceProfile::preset(name).ok_or_else(|| usage(format!("unknown profile {name:?}")))
            };
            let (sender, receiver) = (lookup(&a.sender)?, lookup(&a.receiver)?);
            let image = match &a.input {
                Some(p) => {
                    m.inputs.push(p.display().to_string());
                    read_image(p)?
                }
                None => testimage::default_image(),
            };
            let mut transport: Box<dyn Transport> = match a.transport {
                TransportArg::Inproc => Box::new(InProcess),
                TransportArg::Tcp => Box::new(TcpLoopback),
            };
            let report = exchange::run_exchange(&sender, &receiver, &image, transport.as_mut())?;
            m.resolved = json!({ "sender": sender, "receiver": receiver });
            if let Some(p) = &a.out {
                write_file(p, &write_pgm(&report.candidate, PgmFormat::Binary))?;
                m.outputs.push(p.display().to_string());
            }
            write_report(out, &report)?;
            Ok(())
        }
    }
}

fn cmd_testimage(a: &TestimageArgs, m: &mut RunManifest) -> CliResult<()> {
    let image = testimage::synthetic_image(a.width, a.height).map_err(usage)?;
    m.resolved = json!({ "width": a.width, "height": a.height });
    write_file(&a.out, &write_pgm(&image, pgm_format(a.ascii)))?;
    m.outputs.push(a.out.display().to_string());
    Ok(())
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate(_) => "simulate",
        Command::Lbe(_) => "lbe",
        Command::Keygen(_) => "keygen",
        Command::Encrypt(_) => "encrypt",
        Command::Decrypt(_) => "decrypt",
        Command::Entropy(_) => "entropy",
        Command::Histogram(_) => "histogram",
        Command::Exchange(ExchangeCommand::Serve(_)) => "exchange serve",
        Command::Exchange(ExchangeCommand::Send(_)) => "exchange send",
        Command::Exchange(ExchangeCommand::Run(_)) => "exchange run",
        Command::Testimage(_) => "testimage",
        Command::Rerun { .. } => "rerun",
    }
}

/// Drops `--manifest PATH` / `--manifest=PATH` so the recorded arguments
/// replay without overwriting the manifest.
fn strip_manifest_flag(args: &[String]) -> Vec<String> {
    let mut kept = Vec::with_capacity(args.len());
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        if a == "--manifest" {
            iter.next();
        } else if !a.starts_with("--manifest=") {
            kept.push(a.clone());
        }
    }
    kept
}

/// Runs a parsed command. `args` are the raw arguments after the program
/// name, recorded in the manifest.
pub fn execute(cli: &Cli, args: &[String], out: &mut dyn Write) -> CliResult<()> {
    if let Command::Rerun { path } = &cli.command {
        let manifest = RunManifest::from_json(&String::from_utf8_lossy(&read_file(path)?))?;
        let replay = Cli::try_parse_from(
            std::iter::once("cbx".to_string()).chain(manifest.args.iter().cloned()),
        )
        .map_err(|e| usage(e.to_string()))?;
        if matches!(replay.command, Command::Rerun { .. }) {
            return Err(usage("a manifest cannot replay another rerun"));
        }
        return execute(&replay, &manifest.args, out);
    }

    let mut m = RunManifest::new(subcommand_name(&cli.command), strip_manifest_flag(args));
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, out, &mut m)?,
        Command::Lbe(a) => cmd_lbe(a, out, &mut m)?,
        Command::Keygen(a) => cmd_keygen(a, out, &mut m)?,
        Command::Encrypt(a) | Command::Decrypt(a) => cmd_crypt(a, &mut m)?,
        Command::Entropy(a) => cmd_entropy(a, out, &mut m)?,
        Command::Histogram(a) => cmd_histogram(a, out, &mut m)?,
        Command::Exchange(c) => cmd_exchange(c, out, &mut m)?,
        Command::Testimage(a) => cmd_testimage(a, &mut m)?,
        Command::Rerun { .. } => unreachable!("handled above"),
    }
    if let Some(path) = &cli.manifest {
        write_file(path, m.to_json().as_bytes())?;
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs it, and maps the
/// outcome to an exit code. Diagnostics go to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code() as u8;
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &args, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> ExitCode {
    let stdout = io::stdout();
    let stderr = io::stderr();
    ExitCode::from(run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock()))
}
