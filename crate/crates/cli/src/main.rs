mod config;
mod selftest;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, ExperimentConfig};
use ssm_core::analysis::{self, SecrecyParams, SecurityParams, XLayout};
use ssm_core::engine::{self, build_backend, StatsReport};
use ssm_core::workloads::{gen_trace, load_trace, write_trace_file, TraceKind};

const EXIT_ERROR: u8 = 1;
const EXIT_TAMPER: u8 = 2;

#[derive(Parser)]
#[command(name = "ssmsim", version, about = "Secure scattered memory simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Default)]
struct ExpArgs {
    /// key=value configuration file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra setting, e.g. --set stash_bytes=65536 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// seq, rand, conv-like, dlrm-like or a trace file path
    #[arg(long)]
    trace: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    read_fraction: Option<f64>,
    #[arg(long)]
    stride: Option<u64>,
    #[arg(long)]
    logical_blocks: Option<u32>,
    /// Dummy blocks per SSM access
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay one trace against one backend and print CSV
    Run {
        #[command(flatten)]
        exp: ExpArgs,
        #[arg(long)]
        backend: Option<String>,
        /// Exit with status 2 if any tamper alarm fires
        #[arg(long)]
        strict: bool,
    },
    /// Sweep backends over shared traces
    Compare {
        #[command(flatten)]
        exp: ExpArgs,
        /// Comma-separated backend names, or "all"
        #[arg(long)]
        backends: Option<String>,
        /// Comma-separated trace kinds
        #[arg(long)]
        traces: Option<String>,
        #[arg(long)]
        strict: bool,
    },
    /// Security arithmetic
    Analyze(AnalyzeArgs),
    /// Write a synthetic trace file (gzip if the name ends in .gz)
    GenTrace {
        #[command(flatten)]
        exp: ExpArgs,
    },
    /// Run the built-in invariant suite
    Selftest,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    p1: bool,
    #[arg(long)]
    p2: bool,
    #[arg(long)]
    comb: bool,
    /// Exhaustive GF(2^8) secrecy check at t=2 and t=3
    #[arg(long)]
    secrecy: bool,
    #[arg(long)]
    total: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    t: Option<u64>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    s: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Run(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<engine::EngineError> for CliError {
    fn from(e: engine::EngineError) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<ssm_core::workloads::TraceError> for CliError {
    fn from(e: ssm_core::workloads::TraceError) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

fn build_config(exp: &ExpArgs, extra: &[(&str, Option<String>)]) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &exp.config {
        cfg.apply_file(path)?;
    }
    let flags = [
        ("trace", exp.trace.clone()),
        ("count", exp.count.map(|v| v.to_string())),
        ("seed", exp.seed.map(|v| v.to_string())),
        ("read_fraction", exp.read_fraction.map(|v| v.to_string())),
        ("stride", exp.stride.map(|v| v.to_string())),
        ("logical_blocks", exp.logical_blocks.map(|v| v.to_string())),
        ("d", exp.d.map(|v| v.to_string())),
        ("output", exp.output.as_ref().map(|p| p.display().to_string())),
    ];
    for (key, value) in flags.iter().chain(extra) {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    for pair in &exp.set {
        cfg.set_pair(pair)?;
    }
    cfg.finish()
}

fn emit_csv(cfg: &ExperimentConfig, rows: &[StatsReport]) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => {
            let f = File::create(path).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))?;
            engine::write_csv(BufWriter::new(f), rows)?;
        }
        None => engine::write_csv(io::stdout().lock(), rows)?,
    }
    Ok(())
}

fn summarize(rows: &[StatsReport]) {
    for r in rows {
        eprintln!(
            "{} on {}: {} ops, {} block reads, {} block writes, {:.3} ms simulated ({:.3}x NP), {} tamper alarms",
            r.backend,
            r.trace,
            r.logical_ops,
            r.block_reads,
            r.block_writes,
            r.simulated_ns / 1e6,
            r.normalized_time,
            r.tamper_alarms
        );
    }
}

fn exit_code(strict: bool, rows: &[StatsReport]) -> u8 {
    let alarms: u64 = rows.iter().map(|r| r.tamper_alarms).sum();
    if strict && alarms > 0 {
        EXIT_TAMPER
    } else {
        0
    }
}

fn finish_rows(cfg: &ExperimentConfig, rows: &[StatsReport]) -> Result<u8, CliError> {
    emit_csv(cfg, rows)?;
    summarize(rows);
    Ok(exit_code(cfg.strict, rows))
}

fn cmd_run(exp: &ExpArgs, backend: &Option<String>, strict: bool) -> Result<u8, CliError> {
    let strict = strict.then(|| "true".to_string());
    let cfg = build_config(exp, &[("backend", backend.clone()), ("strict", strict)])?;
    let trace = load_trace(&cfg.trace, cfg.backend_cfg.logical_blocks())?;
    let mut b = build_backend(cfg.backend, &cfg.backend_cfg)?;
    let report = engine::run(&trace, b.as_mut(), &cfg.timing)?;
    finish_rows(&cfg, &[report])
}

fn cmd_compare(exp: &ExpArgs, backends: &Option<String>, traces: &Option<String>, strict: bool) -> Result<u8, CliError> {
    let strict = strict.then(|| "true".to_string());
    let cfg = build_config(
        exp,
        &[("backends", backends.clone()), ("traces", traces.clone()), ("strict", strict)],
    )?;
    let blocks = cfg.backend_cfg.logical_blocks();
    let loaded = cfg
        .traces
        .iter()
        .map(|kind| load_trace(&cfg.trace_spec(kind), blocks))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = engine::compare(&loaded, &cfg.backends, &cfg.backend_cfg, &cfg.timing)?;
    finish_rows(&cfg, &rows)
}

fn cmd_gen_trace(exp: &ExpArgs) -> Result<u8, CliError> {
    let cfg = build_config(exp, &[])?;
    let path = cfg
        .output
        .clone()
        .ok_or_else(|| ConfigError("gen-trace needs --output".into()))?;
    if let TraceKind::File(_) = cfg.trace.kind {
        return Err(ConfigError("gen-trace needs a synthetic trace kind".into()).into());
    }
    let events: Vec<_> = gen_trace(&cfg.trace, cfg.backend_cfg.logical_blocks())?.collect();
    write_trace_file(&path, &events)?;
    eprintln!("wrote {} events to {}", events.len(), path.display());
    Ok(0)
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<u8, CliError> {
    let def = SecurityParams::default();
    let p = SecurityParams {
        total: a.total.unwrap_or(def.total),
        k: a.k.unwrap_or(def.k),
        t: a.t.unwrap_or(def.t),
        d: a.d.unwrap_or(def.d),
        s: a.s.unwrap_or(def.s),
        n: a.n.unwrap_or(def.n),
    };
    let all = !(a.p1 || a.p2 || a.comb || a.secrecy);
    let domain = |e: analysis::AnalysisError| CliError::Config(ConfigError(e.to_string()));
    let mut out = io::stdout().lock();
    writeln!(out, "quantity,value,log10")?;
    if all || a.p1 {
        let v = analysis::p1(&p).map_err(domain)?;
        for w in &v.warnings {
            eprintln!("warning: {w}");
        }
        writeln!(out, "p1,{:.6e},{:.6}", v.value, v.log10)?;
    }
    if all || a.p2 {
        let v = analysis::p2(&p).map_err(domain)?;
        writeln!(out, "p2,{:.6e},{:.6}", v.value, v.log10)?;
    }
    if all || a.comb {
        let c = analysis::comb(p.k, p.t).map_err(domain)?;
        let log10 = c.to_string().parse::<f64>().map(f64::log10).unwrap_or(f64::NAN);
        writeln!(out, "comb({},{}),{c},{log10:.6}", p.k, p.t)?;
    }
    if a.secrecy {
        for (t, k) in [(2usize, 8usize), (3, 6)] {
            let sp = SecrecyParams {
                k,
                t,
                w: 1,
                n_seed: 0,
                layout: XLayout::Nonzero,
            };
            let v = analysis::secrecy_exhaustive(&sp).map_err(domain)?;
            let verdict = if v.pass { "PASS" } else { "FAIL" };
            writeln!(out, "secrecy(t={t} K={k}),{verdict},")?;
        }
    }
    Ok(0)
}

fn dispatch(cli: &Cli) -> Result<u8, CliError> {
    match &cli.cmd {
        Cmd::Run { exp, backend, strict } => cmd_run(exp, backend, *strict),
        Cmd::Compare {
            exp,
            backends,
            traces,
            strict,
        } => cmd_compare(exp, backends, traces, *strict),
        Cmd::Analyze(a) => cmd_analyze(a),
        Cmd::GenTrace { exp } => cmd_gen_trace(exp),
        Cmd::Selftest => {
            let failed = selftest::run_all(&mut io::stdout().lock())?;
            Ok(if failed == 0 { 0 } else { EXIT_ERROR })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Config(e)) => {
            eprintln!("ssmsim: configuration error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
        Err(CliError::Run(e)) => {
            eprintln!("ssmsim: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
