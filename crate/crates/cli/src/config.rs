//! Experiment configuration: defaults, `key = value` files and overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ssm_core::codec::CodecParams;
use ssm_core::engine::{BackendConfig, BackendKind, TimingConfig};
use ssm_core::layout::{GeometryConfig, DEFAULT_SHARES_PER_BLOCK, DEFAULT_SLACK};
use ssm_core::workloads::{TraceKind, TraceSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Every key accepted in a config file or by `--set`.
pub const KEYS: &[&str] = &[
    "backend",
    "backends",
    "trace",
    "traces",
    "count",
    "read_fraction",
    "stride",
    "seed",
    "output",
    "strict",
    "logical_blocks",
    "k",
    "t",
    "w",
    "n_seed",
    "d",
    "shares_per_block",
    "slack",
    "stash_bytes",
    "high_watermark",
    "low_watermark",
    "oram_levels",
    "oram_z",
    "oram_stash_bytes",
    "oram_utilization",
    "vn_bits",
    "mac_bits",
    "metadata_cache_bytes",
    "cache_ways",
    "aes_cycles",
    "clock_ghz",
    "block_access_ns",
    "parallel_width",
    "segmentation_ns",
    "reconstruction_ns",
    "aes_ns",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub backend: BackendKind,
    pub backends: Vec<BackendKind>,
    pub traces: Vec<TraceKind>,
    pub trace: TraceSpec,
    pub output: Option<PathBuf>,
    pub strict: bool,
    pub logical_blocks: u32,
    pub codec: CodecParams,
    pub shares_per_block: u16,
    pub slack: f64,
    pub backend_cfg: BackendConfig,
    pub timing: TimingConfig,
    aes_ns_set: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let backend_cfg = BackendConfig::default();
        ExperimentConfig {
            backend: BackendKind::Ssm,
            backends: BackendKind::ALL.to_vec(),
            traces: vec![TraceKind::Rand],
            trace: TraceSpec::default(),
            output: None,
            strict: false,
            logical_blocks: backend_cfg.ssm.geom.logical_blocks,
            codec: backend_cfg.ssm.codec,
            shares_per_block: DEFAULT_SHARES_PER_BLOCK,
            slack: DEFAULT_SLACK,
            backend_cfg,
            timing: TimingConfig::default(),
            aes_ns_set: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| ConfigError(format!("{key}: cannot parse {value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(ConfigError(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

pub fn parse_backends(value: &str) -> Result<Vec<BackendKind>, ConfigError> {
    if value == "all" {
        return Ok(BackendKind::ALL.to_vec());
    }
    value
        .split(',')
        .map(|s| s.trim().parse::<BackendKind>().map_err(|e| ConfigError(e.to_string())))
        .collect()
}

impl ExperimentConfig {
    /// Applies one setting. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let b = &mut self.backend_cfg;
        match key {
            "backend" => self.backend = value.parse().map_err(|e: ssm_core::engine::EngineError| ConfigError(e.to_string()))?,
            "backends" => self.backends = parse_backends(value)?,
            "trace" => {
                self.trace.kind = TraceKind::parse(value);
                self.traces = vec![self.trace.kind.clone()];
            }
            "traces" => self.traces = value.split(',').map(|s| TraceKind::parse(s.trim())).collect(),
            "count" => self.trace.count = parse(key, value)?,
            "read_fraction" => self.trace.read_fraction = parse(key, value)?,
            "stride" => self.trace.stride = parse(key, value)?,
            "seed" => {
                let seed = parse(key, value)?;
                self.trace.seed = seed;
                b.seed = seed;
            }
            "output" => self.output = Some(PathBuf::from(value)),
            "strict" => self.strict = parse_bool(key, value)?,
            "logical_blocks" => self.logical_blocks = parse(key, value)?,
            "k" => self.codec.k = parse(key, value)?,
            "t" => self.codec.t = parse(key, value)?,
            "w" => self.codec.w = parse(key, value)?,
            "n_seed" => self.codec.n_seed = parse(key, value)?,
            "d" => b.ssm.d = parse(key, value)?,
            "shares_per_block" => self.shares_per_block = parse(key, value)?,
            "slack" => self.slack = parse(key, value)?,
            "stash_bytes" => b.ssm.stash.capacity_bytes = parse(key, value)?,
            "high_watermark" => b.ssm.stash.high_watermark = parse(key, value)?,
            "low_watermark" => b.ssm.stash.low_watermark = parse(key, value)?,
            "oram_levels" => b.oram.levels = parse(key, value)?,
            "oram_z" => b.oram.z = parse(key, value)?,
            "oram_stash_bytes" => b.oram.stash_bytes = parse(key, value)?,
            "oram_utilization" => b.oram.utilization = parse(key, value)?,
            "vn_bits" => b.ctr.vn_bits = parse(key, value)?,
            "mac_bits" => b.ctr.mac_bits = parse(key, value)?,
            "metadata_cache_bytes" => b.ctr.metadata_cache_bytes = parse(key, value)?,
            "cache_ways" => b.ctr.cache_ways = parse(key, value)?,
            "aes_cycles" => b.ctr.aes_latency_cycles = parse(key, value)?,
            "clock_ghz" => b.ctr.clock_ghz = parse(key, value)?,
            "block_access_ns" => self.timing.block_access_ns = parse(key, value)?,
            "parallel_width" => self.timing.parallel_width = parse(key, value)?,
            "segmentation_ns" => self.timing.segmentation_ns = parse(key, value)?,
            "reconstruction_ns" => self.timing.reconstruction_ns = parse(key, value)?,
            "aes_ns" => {
                self.timing.aes_ns = parse(key, value)?;
                self.aes_ns_set = true;
            }
            _ => {
                return Err(ConfigError(format!(
                    "unknown key {key:?}; valid keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("expected key=value, got {pair:?}")))?;
        self.set(k.trim(), v)
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            self.set_pair(body)
                .map_err(|e| ConfigError(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Resolves derived settings and validates everything.
    pub fn finish(mut self) -> Result<Self, ConfigError> {
        self.codec.validate().map_err(|e| ConfigError(e.to_string()))?;
        if !(self.slack >= 1.0 && self.slack.is_finite()) {
            return Err(ConfigError(format!("slack must be at least 1, got {}", self.slack)));
        }
        if self.logical_blocks == 0 || self.shares_per_block == 0 {
            return Err(ConfigError("logical_blocks and shares_per_block must be positive".into()));
        }
        let ssm = &mut self.backend_cfg.ssm;
        ssm.codec = self.codec;
        ssm.geom = GeometryConfig::with_slack(self.logical_blocks, self.codec.k, self.shares_per_block, self.slack);
        ssm.validate().map_err(|e| ConfigError(e.to_string()))?;
        self.backend_cfg.ctr.validate().map_err(|e| ConfigError(e.to_string()))?;
        self.backend_cfg.oram.validate().map_err(|e| ConfigError(e.to_string()))?;
        if !self.aes_ns_set {
            self.timing.aes_ns = self.backend_cfg.ctr.aes_ns();
        }
        self.timing.validate().map_err(|e| ConfigError(e.to_string()))?;
        self.trace.validate().map_err(|e| ConfigError(e.to_string()))?;
        if self.backends.is_empty() || self.traces.is_empty() {
            return Err(ConfigError("need at least one backend and one trace".into()));
        }
        Ok(self)
    }

    pub fn trace_spec(&self, kind: &TraceKind) -> TraceSpec {
        TraceSpec {
            kind: kind.clone(),
            ..self.trace.clone()
        }
    }
}
