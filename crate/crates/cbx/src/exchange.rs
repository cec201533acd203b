//! Two-party exchange harness.
//!
//! A sender derives its key from its [`DeviceProfile`], encrypts an image and
//! ships it in a [`frame`](encode_frame). The receiver derives its own key
//! from its own profile and XORs the payload with it. When the profiles use
//! different evaluation schemes, the keys differ and so does the recovered
//! image. [`ExchangeReport`] measures how far apart they end up.
//!
//! Frame layout, all integers big-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "CBX1"
//! 4       1     message type (0x01 = encrypted image)
//! 5       4     width
//! 9       4     height
//! 13      4     payload length (= width·height)
//! 17      n     payload, row-major pixels
//! ```
//!
//! A TCP connection carries exactly one frame.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc;
use std::thread;

use cbx_core::{
    build_key_matrix, generate_keystream, histogram, shannon_entropy, xor_apply, EntropyReport,
    GrayImage, KeyMatrix, KeystreamConfig, Scheme,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FRAME_MAGIC: [u8; 4] = *b"CBX1";
pub const MSG_ENCRYPTED_IMAGE: u8 = 0x01;
pub const HEADER_LEN: usize = 17;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("bad frame magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unknown message type 0x{0:02x}")]
    UnknownMsgType(u8),
    #[error("incomplete frame: need {needed} bytes, have {available}")]
    Incomplete { needed: usize, available: usize },
    #[error("payload length {declared} does not match {width}x{height}")]
    LengthMismatch { declared: u32, width: u32, height: u32 },
    #[error("{0} trailing bytes after frame")]
    TrailingBytes(usize),
    #[error("invalid image dimensions {width}x{height}")]
    BadDimensions { width: u32, height: u32 },
    #[error("image too large for a frame")]
    TooLarge,
}

#[derive(Debug, Error)]
pub enum ExchangeError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Core(#[from] cbx_core::Error),
    #[error("transport failure: {0}")]
    Transport(#[from] io::Error),
    #[error("transport failure: {0}")]
    Channel(&'static str),
}

/// A named keystream configuration standing in for one machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub name: String,
    pub keystream: KeystreamConfig,
}

/// Names accepted by [`DeviceProfile::preset`].
pub const PRESETS: [&str; 8] = [
    "device1",
    "device2",
    "device3",
    "device4",
    "device1-damped",
    "device2-damped",
    "device3-damped",
    "device4-damped",
];

impl DeviceProfile {
    pub fn new(name: impl Into<String>, keystream: KeystreamConfig) -> Self {
        DeviceProfile { name: name.into(), keystream }
    }

    /// `deviceN` evaluates the map with scheme `eN` on the single-orbit
    /// defaults. `deviceN-damped` uses the damped multi-seed defaults.
    pub fn preset(name: &str) -> Option<Self> {
        let (base, damped) = match name.strip_suffix("-damped") {
            Some(base) => (base, true),
            None => (name, false),
        };
        let scheme: Scheme = base.strip_prefix("device")?.parse::<u8>().ok().and_then(|n| {
            Scheme::ALL.get(usize::from(n).checked_sub(1)?).copied()
        })?;
        let keystream = if damped {
            KeystreamConfig::multi_seed(scheme)
        } else {
            KeystreamConfig::single_orbit(scheme)
        };
        Some(DeviceProfile::new(name, keystream))
    }

    pub fn key_matrix(&self, width: usize, height: usize) -> Result<KeyMatrix, cbx_core::Error> {
        let count = width
            .checked_mul(height)
            .ok_or(cbx_core::Error::InvalidDimensions { width, height })?;
        let stream = generate_keystream(&self.keystream, count)?;
        build_key_matrix(&stream, width, height)
    }
}

pub fn encode_frame(image: &GrayImage) -> Result<Vec<u8>, FrameError> {
    let width = u32::try_from(image.width()).map_err(|_| FrameError::TooLarge)?;
    let height = u32::try_from(image.height()).map_err(|_| FrameError::TooLarge)?;
    let len = u32::try_from(image.pixels().len()).map_err(|_| FrameError::TooLarge)?;
    let mut out = Vec::with_capacity(HEADER_LEN + image.pixels().len());
    out.extend_from_slice(&FRAME_MAGIC);
    out.push(MSG_ENCRYPTED_IMAGE);
    out.extend_from_slice(&width.to_be_bytes());
    out.extend_from_slice(&height.to_be_bytes());
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(image.pixels());
    Ok(out)
}

struct Header {
    width: u32,
    height: u32,
    payload_len: u32,
}

fn be_u32(bytes: &[u8]) -> u32 {
    u32::from_be_bytes(bytes.try_into().expect("4-byte slice"))
}

fn parse_header(bytes: &[u8]) -> Result<Header, FrameError> {
    if bytes.len() < HEADER_LEN {
        return Err(FrameError::Incomplete { needed: HEADER_LEN, available: bytes.len() });
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("4-byte slice");
    if magic != FRAME_MAGIC {
        return Err(FrameError::BadMagic(magic));
    }
    if bytes[4] != MSG_ENCRYPTED_IMAGE {
        return Err(FrameError::UnknownMsgType(bytes[4]));
    }
    let (width, height, payload_len) = (be_u32(&bytes[5..9]), be_u32(&bytes[9..13]), be_u32(&bytes[13..17]));
    if width == 0 || height == 0 {
        return Err(FrameError::BadDimensions { width, height });
    }
    if u64::from(width) * u64::from(height) != u64::from(payload_len) {
        return Err(FrameError::LengthMismatch { declared: payload_len, width, height });
    }
    Ok(Header { width, height, payload_len })
}

pub fn decode_frame(bytes: &[u8]) -> Result<GrayImage, FrameError> {
    let header = parse_header(bytes)?;
    let total = HEADER_LEN + header.payload_len as usize;
    if bytes.len() < total {
        return Err(FrameError::Incomplete { needed: total, available: bytes.len() });
    }
    if bytes.len() > total {
        return Err(FrameError::TrailingBytes(bytes.len() - total));
    }
    GrayImage::new(header.width as usize, header.height as usize, bytes[HEADER_LEN..].to_vec())
        .map_err(|_| FrameError::BadDimensions { width: header.width, height: header.height })
}

/// Reads one frame (header plus declared payload) from a stream.
pub fn read_frame<R: Read>(reader: &mut R) -> Result<Vec<u8>, ExchangeError> {
    let mut frame = vec![0u8; HEADER_LEN];
    read_full(reader, &mut frame, HEADER_LEN)?;
    let header = parse_header(&frame)?;
    let total = HEADER_LEN + header.payload_len as usize;
    frame.resize(total, 0);
    read_full(reader, &mut frame[HEADER_LEN..], total)?;
    Ok(frame)
}

fn read_full<R: Read>(reader: &mut R, buf: &mut [u8], needed: usize) -> Result<(), ExchangeError> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => {
                let available = needed - (buf.len() - filled);
                return Err(FrameError::Incomplete { needed, available }.into());
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// Moves frame bytes from the sender to the receiver.
pub trait Transport {
    fn carry(&mut self, frame: &[u8]) -> Result<Vec<u8>, ExchangeError>;
}

/// Hands the frame over an in-process channel.
#[derive(Debug, Default)]
pub struct InProcess;

impl Transport for InProcess {
    fn carry(&mut self, frame: &[u8]) -> Result<Vec<u8>, ExchangeError> {
        let (tx, rx) = mpsc::channel();
        tx.send(frame.to_vec()).map_err(|_| ExchangeError::Channel("receiver hung up"))?;
        drop(tx);
        rx.recv().map_err(|_| ExchangeError::Channel("sender hung up"))
    }
}

/// Sends the frame over a loopback TCP connection to a receiver thread.
#[derive(Debug, Default)]
pub struct TcpLoopback;

impl Transport for TcpLoopback {
    fn carry(&mut self, frame: &[u8]) -> Result<Vec<u8>, ExchangeError> {
        let listener = TcpListener::bind(("127.0.0.1", 0))?;
        let addr = listener.local_addr()?;
        let receiver = thread::spawn(move || receive_one(&listener));
        send_frame(addr, frame)?;
        receiver.join().map_err(|_| ExchangeError::Channel("receiver thread panicked"))?
    }
}

/// Connects, writes one frame and closes.
pub fn send_frame(addr: impl ToSocketAddrs, frame: &[u8]) -> Result<(), ExchangeError> {
    let mut stream = TcpStream::connect(addr)?;
    stream.write_all(frame)?;
    stream.flush()?;
    Ok(())
}

/// Accepts one connection and reads one frame from it.
pub fn receive_one(listener: &TcpListener) -> Result<Vec<u8>, ExchangeError> {
    let (mut stream, _) = listener.accept()?;
    read_frame(&mut stream)
}

pub fn bind(addr: impl ToSocketAddrs) -> Result<(TcpListener, SocketAddr), ExchangeError> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    Ok((listener, local))
}

/// Outcome of one exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeReport {
    pub sender: String,
    pub receiver: String,
    /// Fraction of candidate pixels equal to the original.
    pub match_fraction: f64,
    pub candidate_entropy: EntropyReport,
    /// Fraction of positions where the two key matrices differ.
    pub key_mismatch_fraction: f64,
    pub frame_len: usize,
    pub candidate: GrayImage,
}

impl ExchangeReport {
    pub fn recovered(&self) -> bool {
        self.match_fraction == 1.0
    }
}

fn fraction_equal(a: &[u8], b: &[u8]) -> f64 {
    a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64
}

/// Sender encrypts with its key, the frame crosses `transport`, and the
/// receiver decrypts with a key derived from its own profile.
pub fn run_exchange(
    sender: &DeviceProfile,
    receiver: &DeviceProfile,
    image: &GrayImage,
    transport: &mut dyn Transport,
) -> Result<ExchangeReport, ExchangeError> {
    let (w, h) = (image.width(), image.height());
    let key = sender.key_matrix(w, h)?;
    let frame = encode_frame(&xor_apply(image, &key)?)?;

    let received = decode_frame(&transport.carry(&frame)?)?;
    let key2 = receiver.key_matrix(received.width(), received.height())?;
    let candidate = xor_apply(&received, &key2)?;

    Ok(ExchangeReport {
        sender: sender.name.clone(),
        receiver: receiver.name.clone(),
        match_fraction: fraction_equal(candidate.pixels(), image.pixels()),
        candidate_entropy: shannon_entropy(&histogram(candidate.pixels())?),
        key_mismatch_fraction: 1.0 - fraction_equal(key.as_bytes(), key2.as_bytes()),
        frame_len: frame.len(),
        candidate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_pixel_frame() {
        let img = GrayImage::new(1, 1, vec![0x42]).unwrap();
        let frame = encode_frame(&img).unwrap();
        assert_eq!(
            frame,
            [b'C', b'B', b'X', b'1', 0x01, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0x42]
        );
        assert_eq!(frame.len(), HEADER_LEN + 1);
        assert_eq!(decode_frame(&frame).unwrap(), img);
    }

    #[test]
    fn frame_errors() {
        let img = GrayImage::new(3, 2, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let frame = encode_frame(&img).unwrap();

        assert_eq!(
            decode_frame(&frame[..frame.len() - 1]).unwrap_err(),
            FrameError::Incomplete { needed: 23, available: 22 }
        );
        assert!(matches!(decode_frame(&frame[..10]), Err(FrameError::Incomplete { .. })));

        let mut bad = frame.clone();
        bad[0] = b'X';
        assert!(matches!(decode_frame(&bad), Err(FrameError::BadMagic(_))));

        let mut bad = frame.clone();
        bad[4] = 0x02;
        assert_eq!(decode_frame(&bad).unwrap_err(), FrameError::UnknownMsgType(0x02));

        let mut bad = frame.clone();
        bad[16] = 7;
        assert!(matches!(decode_frame(&bad), Err(FrameError::LengthMismatch { declared: 7, .. })));

        let mut long = frame.clone();
        long.push(0);
        assert_eq!(decode_frame(&long).unwrap_err(), FrameError::TrailingBytes(1));
    }

    #[test]
    fn read_frame_from_stream() {
        let img = GrayImage::new(2, 2, vec![9, 8, 7, 6]).unwrap();
        let frame = encode_frame(&img).unwrap();
        let mut reader = &frame[..];
        assert_eq!(read_frame(&mut reader).unwrap(), frame);

        let mut short = &frame[..19];
        assert!(matches!(
            read_frame(&mut short),
            Err(ExchangeError::Frame(FrameError::Incomplete { needed: 21, available: 19 }))
        ));
    }

    #[test]
    fn presets() {
        let p = DeviceProfile::preset("device2").unwrap();
        assert_eq!(p.keystream, KeystreamConfig::single_orbit(Scheme::E2));
        let p = DeviceProfile::preset("device3-damped").unwrap();
        assert_eq!(p.keystream, KeystreamConfig::multi_seed(Scheme::E3));
        for name in PRESETS {
            assert_eq!(DeviceProfile::preset(name).unwrap().name, name);
        }
        assert!(DeviceProfile::preset("device5").is_none());
        assert!(DeviceProfile::preset("device0").is_none());
        assert!(DeviceProfile::preset("laptop").is_none());
    }

    #[test]
    fn same_profile_recovers() {
        let img = GrayImage::from_fn(16, 8, |r, c| (r * 16 + c) as u8).unwrap();
        let p = DeviceProfile::preset("device1").unwrap();
        for transport in [&mut InProcess as &mut dyn Transport, &mut TcpLoopback] {
            let report = run_exchange(&p, &p, &img, transport).unwrap();
            assert!(report.recovered());
            assert_eq!(report.candidate, img);
            assert_eq!(report.key_mismatch_fraction, 0.0);
            assert_eq!(report.frame_len, HEADER_LEN + 128);
        }
    }
}
