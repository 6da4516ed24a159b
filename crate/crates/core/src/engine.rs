//! Trace replay against a protection backend, with transaction accounting
//! and a simple memory-parallelism timing model.
//!
//! Per logical op, `ceil(transactions / parallel_width) * block_access_ns`
//! plus segmentation, reconstruction and AES charges.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rustc_hash::FxHashMap as HashMap;
use thiserror::Error;

use crate::codec::DataBlock;
use crate::controller::{CodecOps, SsmConfig, SsmController, SsmError};
use crate::ctr::{CtrConfig, CtrEngine, CtrError};
use crate::mix::keyed_mix;
use crate::pathoram::{OramConfig, OramError, PathOram};
use crate::workloads::{Trace, TraceError};
use crate::Op;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Ssm(#[from] SsmError),
    #[error(transparent)]
    Ctr(#[from] CtrError),
    #[error(transparent)]
    Oram(#[from] OramError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{backend}: read of block {addr} at trace line {line} returned stale or wrong data")]
    DataMismatch {
        backend: String,
        line: usize,
        addr: u64,
    },
    #[error("{backend}: transaction totals {reported:?} disagree with backend counters {internal:?}")]
    Conservation {
        backend: String,
        reported: (u64, u64),
        internal: (u64, u64),
    },
    #[error("unknown backend {0:?}")]
    UnknownBackend(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackendKind {
    Np,
    Sgx,
    PathOram,
    Ssm,
    SsmPlus,
    SsmOram,
    SgxPathOram,
}

impl BackendKind {
    pub const ALL: [BackendKind; 7] = [
        BackendKind::Np,
        BackendKind::Sgx,
        BackendKind::PathOram,
        BackendKind::Ssm,
        BackendKind::SsmPlus,
        BackendKind::SsmOram,
        BackendKind::SgxPathOram,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Np => "np",
            BackendKind::Sgx => "sgx",
            BackendKind::PathOram => "pathoram",
            BackendKind::Ssm => "ssm",
            BackendKind::SsmPlus => "ssm-plus",
            BackendKind::SsmOram => "ssm-oram",
            BackendKind::SgxPathOram => "sgx-pathoram",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackendKind {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, EngineError> {
        BackendKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| EngineError::UnknownBackend(s.to_string()))
    }
}

/// What one logical access cost.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpOutcome {
    pub data: Option<DataBlock>,
    pub transactions: Vec<(Op, u64)>,
    pub codec_ops: CodecOps,
    pub aes_ops: u64,
    pub stash_hits: u64,
    pub alarm: bool,
}

pub trait Backend: Send {
    fn kind(&self) -> BackendKind;
    fn logical_blocks(&self) -> u64;
    fn handle(&mut self, op: Op, addr: u64, data: Option<&DataBlock>) -> Result<OpOutcome, EngineError>;
    /// Block reads and writes as tallied by the backend's own counters.
    fn internal_counts(&self) -> (u64, u64);
    fn shuffles(&self) -> u64 {
        0
    }
    fn map_bytes(&self) -> u64 {
        0
    }
}

/// Unprotected memory: one transaction per access.
pub struct NpBackend {
    blocks: u64,
    mem: HashMap<u64, DataBlock>,
    counts: (u64, u64),
}

impl NpBackend {
    pub fn new(blocks: u64) -> Self {
        NpBackend {
            blocks,
            mem: HashMap::default(),
            counts: (0, 0),
        }
    }
}

impl Backend for NpBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Np
    }

    fn logical_blocks(&self) -> u64 {
        self.blocks
    }

    fn handle(&mut self, op: Op, addr: u64, data: Option<&DataBlock>) -> Result<OpOutcome, EngineError> {
        let out = match op {
            Op::Read => {
                self.counts.0 += 1;
                Some(self.mem.get(&addr).copied().unwrap_or_default())
            }
            Op::Write => {
                self.counts.1 += 1;
                self.mem.insert(addr, data.copied().unwrap_or_default());
                None
            }
        };
        Ok(OpOutcome {
            data: out,
            transactions: crate::ctr::np_access(op, addr),
            ..OpOutcome::default()
        })
    }

    fn internal_counts(&self) -> (u64, u64) {
        self.counts
    }
}

/// Counter-mode encryption with an integrity tree.
pub struct SgxBackend {
    ctr: CtrEngine,
}

impl SgxBackend {
    pub fn new(cfg: CtrConfig, blocks: u64) -> Result<Self, EngineError> {
        Ok(SgxBackend {
            ctr: CtrEngine::new(cfg, blocks)?,
        })
    }
}

impl Backend for SgxBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Sgx
    }

    fn logical_blocks(&self) -> u64 {
        self.ctr.layout().data_blocks
    }

    fn handle(&mut self, op: Op, addr: u64, data: Option<&DataBlock>) -> Result<OpOutcome, EngineError> {
        let zero = DataBlock::zeroed();
        let out = self.ctr.access(op, addr, Some(data.unwrap_or(&zero)))?;
        Ok(OpOutcome {
            data: out.data,
            transactions: out.transactions,
            aes_ops: out.aes_ops as u64,
            alarm: out.alarm,
            ..OpOutcome::default()
        })
    }

    fn internal_counts(&self) -> (u64, u64) {
        let s = self.ctr.stats();
        (s.block_reads, s.block_writes)
    }
}

/// Path ORAM, optionally with every tree block stored behind the
/// counter-mode engine.
pub struct OramBackend {
    oram: PathOram<DataBlock>,
    ctr: Option<CtrEngine>,
}

impl OramBackend {
    pub fn new(cfg: OramConfig, blocks: u64, seed: u64) -> Result<Self, EngineError> {
        Ok(OramBackend {
            oram: PathOram::new(cfg, blocks, |_| DataBlock::zeroed(), seed)?,
            ctr: None,
        })
    }

    /// The tree occupies `buckets * Z` blocks of protected memory.
    pub fn with_ctr(
        cfg: OramConfig,
        ctr_cfg: CtrConfig,
        blocks: u64,
        seed: u64,
    ) -> Result<Self, EngineError> {
        let mut b = Self::new(cfg, blocks, seed)?;
        b.ctr = Some(CtrEngine::charge_only(ctr_cfg, cfg.buckets() * cfg.z as u64)?);
        Ok(b)
    }
}

impl Backend for OramBackend {
    fn kind(&self) -> BackendKind {
        if self.ctr.is_some() {
            BackendKind::SgxPathOram
        } else {
            BackendKind::PathOram
        }
    }

    fn logical_blocks(&self) -> u64 {
        self.oram.blocks()
    }

    fn handle(&mut self, op: Op, addr: u64, data: Option<&DataBlock>) -> Result<OpOutcome, EngineError> {
        let (old, tx) = self.oram.access(op, addr, data.copied())?;
        let mut out = OpOutcome {
            data: (op == Op::Read).then_some(old),
            ..OpOutcome::default()
        };
        match &mut self.ctr {
            None => out.transactions = tx,
            Some(ctr) => {
                for (o, a) in tx {
                    let r = ctr.access(o, a, None)?;
                    out.transactions.extend(r.transactions);
                    out.aes_ops += r.aes_ops as u64;
                    out.alarm |= r.alarm;
                }
            }
        }
        Ok(out)
    }

    fn internal_counts(&self) -> (u64, u64) {
        match &self.ctr {
            Some(ctr) => {
                let s = ctr.stats();
                (s.block_reads, s.block_writes)
            }
            None => {
                let s = self.oram.stats();
                (s.block_reads, s.block_writes)
            }
        }
    }
}

pub struct SsmBackend {
    kind: BackendKind,
    ctl: SsmController,
}

impl SsmBackend {
    pub fn new(kind: BackendKind, mut cfg: SsmConfig) -> Result<Self, EngineError> {
        match kind {
            BackendKind::Ssm => {}
            BackendKind::SsmPlus => cfg.op_type_protection = true,
            BackendKind::SsmOram => cfg.oram_backend = true,
            other => {
                return Err(EngineError::Config(format!("{other} is not an SSM backend")));
            }
        }
        Ok(SsmBackend {
            kind,
            ctl: SsmController::new(cfg)?,
        })
    }

    pub fn controller(&self) -> &SsmController {
        &self.ctl
    }
}

impl Backend for SsmBackend {
    fn kind(&self) -> BackendKind {
        self.kind
    }

    fn logical_blocks(&self) -> u64 {
        self.ctl.config().geom.logical_blocks as u64
    }

    fn handle(&mut self, op: Op, addr: u64, data: Option<&DataBlock>) -> Result<OpOutcome, EngineError> {
        let zero = DataBlock::zeroed();
        let data = match op {
            Op::Write => Some(data.unwrap_or(&zero)),
            Op::Read => None,
        };
        let r = self.ctl.access(op, addr, data)?;
        Ok(OpOutcome {
            data: r.data,
            transactions: r.transactions,
            codec_ops: r.codec_ops,
            aes_ops: 0,
            stash_hits: r.stash_hits as u64,
            alarm: r.alarm.is_some(),
        })
    }

    fn internal_counts(&self) -> (u64, u64) {
        let s = self.ctl.stats();
        (s.block_reads, s.block_writes)
    }

    fn shuffles(&self) -> u64 {
        self.ctl.stats().shuffles
    }

    fn map_bytes(&self) -> u64 {
        self.ctl.map().map_bytes()
    }
}

/// Shared configuration for every backend over one logical geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackendConfig {
    pub ssm: SsmConfig,
    pub ctr: CtrConfig,
    pub oram: OramConfig,
    pub seed: u64,
}

impl BackendConfig {
    pub fn new(logical_blocks: u32) -> Self {
        BackendConfig {
            ssm: SsmConfig::with_logical_blocks(logical_blocks),
            ctr: CtrConfig::default(),
            oram: OramConfig::default(),
            seed: 0,
        }
    }

    pub fn logical_blocks(&self) -> u64 {
        self.ssm.geom.logical_blocks as u64
    }
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self::new(crate::controller::DEFAULT_LOGICAL_BLOCKS)
    }
}

pub fn build_backend(kind: BackendKind, cfg: &BackendConfig) -> Result<Box<dyn Backend>, EngineError> {
    let blocks = cfg.logical_blocks();
    Ok(match kind {
        BackendKind::Np => Box::new(NpBackend::new(blocks)),
        BackendKind::Sgx => Box::new(SgxBackend::new(cfg.ctr, blocks)?),
        BackendKind::PathOram => Box::new(OramBackend::new(cfg.oram, blocks, cfg.seed)?),
        BackendKind::SgxPathOram => {
            Box::new(OramBackend::with_ctr(cfg.oram, cfg.ctr, blocks, cfg.seed)?)
        }
        BackendKind::Ssm | BackendKind::SsmPlus | BackendKind::SsmOram => {
            let ssm = SsmConfig {
                seed: cfg.seed,
                oram: cfg.oram,
                ..cfg.ssm
            };
            Box::new(SsmBackend::new(kind, ssm)?)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingConfig {
    pub block_access_ns: f64,
    pub parallel_width: u32,
    pub segmentation_ns: f64,
    pub reconstruction_ns: f64,
    pub aes_ns: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            block_access_ns: 50.0,
            parallel_width: 8,
            segmentation_ns: 19.0,
            reconstruction_ns: 60.0,
            aes_ns: 40.0 / 3.0,
        }
    }
}

impl TimingConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let lat = [
            self.block_access_ns,
            self.segmentation_ns,
            self.reconstruction_ns,
            self.aes_ns,
        ];
        if lat.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(EngineError::Config("latencies must be finite and nonnegative".into()));
        }
        if self.parallel_width == 0 {
            return Err(EngineError::Config("parallel width must be at least 1".into()));
        }
        Ok(())
    }

    /// Memory batches needed for `transactions` overlapped accesses.
    pub fn batches(&self, transactions: usize) -> u64 {
        (transactions as u64).div_ceil(self.parallel_width as u64)
    }
}

/// Cost components summed over a run; time is derived from these at the end
/// so it does not depend on summation order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Charges {
    pub batches: u64,
    pub segmentations: u64,
    pub reconstructions: u64,
    pub aes_ops: u64,
}

impl Charges {
    pub fn ns(&self, t: &TimingConfig) -> f64 {
        self.batches as f64 * t.block_access_ns
            + self.segmentations as f64 * t.segmentation_ns
            + self.reconstructions as f64 * t.reconstruction_ns
            + self.aes_ops as f64 * t.aes_ns
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub trace: String,
    pub backend: BackendKind,
    pub logical_ops: u64,
    pub logical_reads: u64,
    pub logical_writes: u64,
    pub block_reads: u64,
    pub block_writes: u64,
    pub stash_hits: u64,
    pub shuffles: u64,
    pub tamper_alarms: u64,
    pub map_bytes: u64,
    pub charges: Charges,
    pub simulated_ns: f64,
    pub normalized_time: f64,
}

pub const CSV_HEADER: &str = "trace,backend,logical_ops,logical_reads,logical_writes,block_reads,block_writes,stash_hits,shuffles,tamper_alarms,map_bytes,simulated_ns,normalized_time";

impl StatsReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:.3},{:.6}",
            csv_field(&self.trace),
            self.backend,
            self.logical_ops,
            self.logical_reads,
            self.logical_writes,
            self.block_reads,
            self.block_writes,
            self.stash_hits,
            self.shuffles,
            self.tamper_alarms,
            self.map_bytes,
            self.simulated_ns,
            self.normalized_time
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_csv<W: Write>(mut w: W, reports: &[StatsReport]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()
}

/// Payload written by the `i`-th trace event.
pub fn write_payload(i: u64, addr: u64) -> DataBlock {
    const KEY: u128 = 0x0070_6179_6c6f_6164;
    let segs: Vec<u64> = (0..8).map(|j| keyed_mix(KEY, &[i, addr, j])).collect();
    DataBlock::from_segments(&segs)
}

/// Time the unprotected baseline takes on `trace`: one transaction per op.
pub fn np_time(trace: &Trace, timing: &TimingConfig) -> f64 {
    Charges {
        batches: trace.len() as u64 * timing.batches(1),
        ..Charges::default()
    }
    .ns(timing)
}

/// Replays `trace` against `backend`. Reads are checked against the last
/// value written unless the backend raised a tamper alarm, and the summed
/// transaction lists are checked against the backend's own counters.
pub fn run(trace: &Trace, backend: &mut dyn Backend, timing: &TimingConfig) -> Result<StatsReport, EngineError> {
    timing.validate()?;
    trace.check_range(backend.logical_blocks())?;
    let kind = backend.kind();
    let start = backend.internal_counts();
    let mut shadow: HashMap<u64, DataBlock> = HashMap::default();
    let mut r = StatsReport {
        trace: trace.name.clone(),
        backend: kind,
        logical_ops: 0,
        logical_reads: 0,
        logical_writes: 0,
        block_reads: 0,
        block_writes: 0,
        stash_hits: 0,
        shuffles: 0,
        tamper_alarms: 0,
        map_bytes: 0,
        charges: Charges::default(),
        simulated_ns: 0.0,
        normalized_time: 0.0,
    };
    for (i, (e, &line)) in trace.events.iter().zip(&trace.lines).enumerate() {
        let payload = (e.op == Op::Write).then(|| write_payload(i as u64, e.addr));
        let out = backend.handle(e.op, e.addr, payload.as_ref())?;
        match e.op {
            Op::Read => {
                r.logical_reads += 1;
                let want = shadow.get(&e.addr).copied().unwrap_or_default();
                if !out.alarm && out.data.is_some_and(|d| d != want) {
                    return Err(EngineError::DataMismatch {
                        backend: kind.to_string(),
                        line,
                        addr: e.addr,
                    });
                }
            }
            Op::Write => {
                r.logical_writes += 1;
                shadow.insert(e.addr, payload.expect("write payload"));
            }
        }
        r.logical_ops += 1;
        for (op, _) in &out.transactions {
            match op {
                Op::Read => r.block_reads += 1,
                Op::Write => r.block_writes += 1,
            }
        }
        r.stash_hits += out.stash_hits;
        r.tamper_alarms += out.alarm as u64;
        r.charges.batches += timing.batches(out.transactions.len());
        r.charges.segmentations += out.codec_ops.segmentations as u64;
        r.charges.reconstructions += out.codec_ops.reconstructions as u64;
        r.charges.aes_ops += out.aes_ops;
    }
    let end = backend.internal_counts();
    let internal = (end.0 - start.0, end.1 - start.1);
    if internal != (r.block_reads, r.block_writes) {
        return Err(EngineError::Conservation {
            backend: kind.to_string(),
            reported: (r.block_reads, r.block_writes),
            internal,
        });
    }
    r.shuffles = backend.shuffles();
    r.map_bytes = backend.map_bytes();
    r.simulated_ns = r.charges.ns(timing);
    let base = np_time(trace, timing);
    r.normalized_time = if kind == BackendKind::Np {
        1.0
    } else if base > 0.0 {
        r.simulated_ns / base
    } else {
        0.0
    };
    Ok(r)
}

/// Runs every (trace, backend) pair, each on a fresh backend in its own
/// thread. Rows come back grouped by trace in input order, then sorted by
/// backend name.
pub fn compare(
    traces: &[Trace],
    kinds: &[BackendKind],
    cfg: &BackendConfig,
    timing: &TimingConfig,
) -> Result<Vec<StatsReport>, EngineError> {
    timing.validate()?;
    let mut kinds: Vec<BackendKind> = kinds.to_vec();
    kinds.sort_unstable_by_key(|k| k.name());
    kinds.dedup();
    let results: Vec<Result<StatsReport, EngineError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = traces
            .iter()
            .flat_map(|trace| kinds.iter().map(move |&kind| (trace, kind)))
            .map(|(trace, kind)| {
                scope.spawn(move || {
                    let mut backend = build_backend(kind, cfg)?;
                    run(trace, backend.as_mut(), timing)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("backend thread panicked"))
            .collect()
    });
    results.into_iter().collect()
}
