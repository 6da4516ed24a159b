//! Access traces: synthetic generators and the text trace format.
//!
//! Text format, one access per line: `R <hex-addr>` or `W <hex-addr>`, where
//! the address is a byte address quantized to 64-byte blocks. `#` starts a
//! comment line and blank lines are skipped. Files ending in `.gz` are read
//! through gzip.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::codec::BLOCK_BYTES;
use crate::Op;

pub const DEFAULT_COUNT: usize = 100_000;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("invalid trace spec: {0}")]
    InvalidSpec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: block {addr} outside {blocks} logical blocks")]
    OutOfRange { line: usize, addr: u64, blocks: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AccessEvent {
    pub op: Op,
    pub addr: u64,
}

impl AccessEvent {
    pub fn read(addr: u64) -> Self {
        AccessEvent { op: Op::Read, addr }
    }

    pub fn write(addr: u64) -> Self {
        AccessEvent { op: Op::Write, addr }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceKind {
    Seq,
    Rand,
    /// Sliding 3-row window over an input region followed by one output
    /// write, stepping by `stride` rows.
    ConvLike,
    /// Gathers of 4-block embedding rows at random table positions.
    DlrmLike,
    File(PathBuf),
}

impl TraceKind {
    pub fn name(&self) -> String {
        match self {
            TraceKind::Seq => "seq".into(),
            TraceKind::Rand => "rand".into(),
            TraceKind::ConvLike => "conv-like".into(),
            TraceKind::DlrmLike => "dlrm-like".into(),
            TraceKind::File(p) => p.display().to_string(),
        }
    }

    /// Parses a kind name; anything unrecognized is taken as a file path.
    pub fn parse(s: &str) -> Self {
        match s {
            "seq" => TraceKind::Seq,
            "rand" => TraceKind::Rand,
            "conv-like" | "conv" => TraceKind::ConvLike,
            "dlrm-like" | "dlrm" => TraceKind::DlrmLike,
            path => TraceKind::File(PathBuf::from(path)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSpec {
    pub kind: TraceKind,
    pub count: usize,
    pub read_fraction: f64,
    pub stride: u64,
    pub seed: u64,
}

impl Default for TraceSpec {
    fn default() -> Self {
        TraceSpec {
            kind: TraceKind::Rand,
            count: DEFAULT_COUNT,
            read_fraction: 0.5,
            stride: 1,
            seed: 0,
        }
    }
}

impl TraceSpec {
    pub fn new(kind: TraceKind) -> Self {
        TraceSpec {
            kind,
            ..TraceSpec::default()
        }
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        if self.count == 0 {
            return Err(TraceError::InvalidSpec("count must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.read_fraction) {
            return Err(TraceError::InvalidSpec(format!(
                "read fraction {} outside [0, 1]",
                self.read_fraction
            )));
        }
        if self.stride == 0 {
            return Err(TraceError::InvalidSpec("stride must be positive".into()));
        }
        Ok(())
    }
}

/// A materialized trace. `lines[i]` is the source line of `events[i]`
/// (1-based; the event ordinal for generated traces).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub name: String,
    pub events: Vec<AccessEvent>,
    pub lines: Vec<usize>,
}

impl Trace {
    pub fn from_events(name: impl Into<String>, events: Vec<AccessEvent>) -> Self {
        let lines = (1..=events.len()).collect();
        Trace {
            name: name.into(),
            events,
            lines,
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Fails on the first event addressing a block outside the geometry.
    pub fn check_range(&self, logical_blocks: u64) -> Result<(), TraceError> {
        for (e, &line) in self.events.iter().zip(&self.lines) {
            if e.addr >= logical_blocks {
                return Err(TraceError::OutOfRange {
                    line,
                    addr: e.addr,
                    blocks: logical_blocks,
                });
            }
        }
        Ok(())
    }
}

/// Lazy generator for the synthetic kinds.
pub struct TraceGen {
    kind: TraceKind,
    remaining: usize,
    i: u64,
    blocks: u64,
    stride: u64,
    read_fraction: f64,
    rng: ChaCha12Rng,
    pending: Vec<AccessEvent>,
}

impl Iterator for TraceGen {
    type Item = AccessEvent;

    fn next(&mut self) -> Option<AccessEvent> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        if let Some(e) = self.pending.pop() {
            return Some(e);
        }
        let i = self.i;
        self.i += 1;
        let event = match self.kind {
            TraceKind::Seq => {
                let op = self.draw_op();
                AccessEvent {
                    op,
                    addr: i.wrapping_mul(self.stride) % self.blocks,
                }
            }
            TraceKind::Rand => {
                let op = self.draw_op();
                AccessEvent {
                    op,
                    addr: self.rng.gen_range(0..self.blocks),
                }
            }
            TraceKind::ConvLike => self.conv_step(i),
            TraceKind::DlrmLike => self.dlrm_step(),
            TraceKind::File(_) => unreachable!("file traces are parsed, not generated"),
        };
        Some(event)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl TraceGen {
    fn draw_op(&mut self) -> Op {
        if self.rng.gen_bool(self.read_fraction) {
            Op::Read
        } else {
            Op::Write
        }
    }

    fn conv_step(&mut self, i: u64) -> AccessEvent {
        // lower half holds the input feature map, upper half the output
        let half = (self.blocks / 2).max(1);
        let out_base = if self.blocks > 1 { half } else { 0 };
        let row = i.wrapping_mul(self.stride) % half;
        let window: Vec<AccessEvent> = (0..3u64)
            .map(|r| AccessEvent::read((row + r) % half))
            .collect();
        let out = AccessEvent::write(out_base + row % (self.blocks - out_base));
        // emitted in order: window[0], window[1], window[2], out
        self.pending.push(out);
        self.pending.push(window[2]);
        self.pending.push(window[1]);
        window[0]
    }

    fn dlrm_step(&mut self) -> AccessEvent {
        const ROW_BLOCKS: u64 = 4;
        let rows = (self.blocks / ROW_BLOCKS).max(1);
        let base = self.rng.gen_range(0..rows) * ROW_BLOCKS;
        let op = self.draw_op();
        let span = ROW_BLOCKS.min(self.blocks);
        for b in (1..span).rev() {
            self.pending.push(AccessEvent { op, addr: base + b });
        }
        AccessEvent { op, addr: base }
    }
}

/// Streams a synthetic trace over `logical_blocks` blocks.
pub fn gen_trace(spec: &TraceSpec, logical_blocks: u64) -> Result<TraceGen, TraceError> {
    spec.validate()?;
    if logical_blocks == 0 {
        return Err(TraceError::InvalidSpec("empty geometry".into()));
    }
    if let TraceKind::File(p) = &spec.kind {
        return Err(TraceError::InvalidSpec(format!(
            "{} is a file trace; use load_trace",
            p.display()
        )));
    }
    Ok(TraceGen {
        kind: spec.kind.clone(),
        remaining: spec.count,
        i: 0,
        blocks: logical_blocks,
        stride: spec.stride,
        read_fraction: spec.read_fraction,
        rng: ChaCha12Rng::seed_from_u64(spec.seed),
        pending: Vec::new(),
    })
}

/// Materializes `spec`: generates synthetic kinds, reads file kinds (capped
/// at `count` events), and checks every address against the geometry.
pub fn load_trace(spec: &TraceSpec, logical_blocks: u64) -> Result<Trace, TraceError> {
    let trace = match &spec.kind {
        TraceKind::File(path) => {
            spec.validate()?;
            let mut t = parse_trace_file(path)?;
            t.events.truncate(spec.count);
            t.lines.truncate(spec.count);
            t
        }
        kind => Trace::from_events(kind.name(), gen_trace(spec, logical_blocks)?.collect()),
    };
    trace.check_range(logical_blocks)?;
    Ok(trace)
}

fn parse_line(line: &str, lineno: usize) -> Result<Option<AccessEvent>, TraceError> {
    let body = line.trim();
    if body.is_empty() || body.starts_with('#') {
        return Ok(None);
    }
    let err = |msg: String| TraceError::Parse { line: lineno, msg };
    let mut fields = body.split_whitespace();
    let op = match fields.next() {
        Some("R") | Some("r") => Op::Read,
        Some("W") | Some("w") => Op::Write,
        Some(other) => return Err(err(format!("unknown op {other:?}"))),
        None => unreachable!(),
    };
    let raw = fields.next().ok_or_else(|| err("missing address".into()))?;
    if let Some(extra) = fields.next() {
        return Err(err(format!("unexpected field {extra:?}")));
    }
    let hex = raw
        .strip_prefix("0x")
        .or_else(|| raw.strip_prefix("0X"))
        .unwrap_or(raw);
    let byte_addr =
        u64::from_str_radix(hex, 16).map_err(|e| err(format!("bad address {raw:?}: {e}")))?;
    Ok(Some(AccessEvent {
        op,
        addr: byte_addr / BLOCK_BYTES as u64,
    }))
}

/// Parses the text trace format from any reader.
pub fn parse_trace<R: BufRead>(name: &str, reader: R) -> Result<Trace, TraceError> {
    let mut events = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| TraceError::Io {
            path: PathBuf::from(name),
            source,
        })?;
        if let Some(e) = parse_line(&line, i + 1)? {
            events.push(e);
            lines.push(i + 1);
        }
    }
    Ok(Trace {
        name: name.to_string(),
        events,
        lines,
    })
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

pub fn parse_trace_file(path: &Path) -> Result<Trace, TraceError> {
    let io_err = |source| TraceError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let reader: Box<dyn Read> = if is_gz(path) {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    parse_trace(&path.display().to_string(), BufReader::new(reader))
}

pub fn write_trace<W: Write>(mut w: W, events: &[AccessEvent]) -> io::Result<()> {
    for e in events {
        writeln!(w, "{} {:#x}", e.op, e.addr * BLOCK_BYTES as u64)?;
    }
    w.flush()
}

/// Writes a trace file, gzip-compressed when the name ends in `.gz`.
pub fn write_trace_file(path: &Path, events: &[AccessEvent]) -> Result<(), TraceError> {
    let io_err = |source| TraceError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    if is_gz(path) {
        let mut enc = GzEncoder::new(io::BufWriter::new(file), flate2::Compression::default());
        write_trace(&mut enc, events).map_err(io_err)?;
        enc.finish().map_err(io_err)?.flush().map_err(io_err)
    } else {
        write_trace(io::BufWriter::new(file), events).map_err(io_err)
    }
}
