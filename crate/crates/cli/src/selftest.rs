//! Quick cross-module invariant suite behind `ssmsim selftest`.

use rand::seq::index::sample;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ssm_core::analysis::{self, SecrecyParams, SecurityParams, XLayout};
use ssm_core::codec::{reconstruct, segment_block, CodecParams, DataBlock, SeedContext, Share};
use ssm_core::controller::{SsmConfig, SsmController};
use ssm_core::ctr::{CorruptTarget, CtrConfig, CtrEngine};
use ssm_core::engine::{run, write_csv, BackendConfig, BackendKind, TimingConfig};
use ssm_core::pathoram::{OramConfig, PathOram};
use ssm_core::workloads::{load_trace, TraceKind, TraceSpec};
use ssm_core::Op;

type Check = fn() -> Result<String, String>;

pub const CHECKS: &[(&str, Check)] = &[
    ("codec-roundtrip", codec_roundtrip),
    ("secrecy-oracle", secrecy),
    ("combination-count", combinations),
    ("breach-probability", breach_probability),
    ("ssm-shape-and-map", ssm_shape),
    ("ssm-tamper-alarm", ssm_tamper),
    ("ctr-tamper-alarm", ctr_tamper),
    ("oram-invariant", oram_invariant),
    ("run-determinism", determinism),
];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_block(rng: &mut ChaCha8Rng) -> DataBlock {
    let mut b = [0u8; 64];
    rng.fill_bytes(&mut b);
    DataBlock(b)
}

fn codec_roundtrip() -> Result<String, String> {
    let params = CodecParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 300;
    for i in 0..n {
        let block = random_block(&mut rng);
        let ctx = SeedContext {
            seed_key: 9,
            logical_addr: i,
            write_counter: 0,
        };
        let shares = segment_block(&block, &params, &ctx, &mut rng);
        let pick: Vec<Share> = sample(&mut rng, params.k, params.t).iter().map(|j| shares[j]).collect();
        let rec = reconstruct(&pick, &params, &ctx).map_err(|e| e.to_string())?;
        ensure(rec.block == block && rec.integrity.passed(), || format!("block {i} mismatch"))?;
    }
    Ok(format!("{n} blocks"))
}

fn secrecy() -> Result<String, String> {
    let p = SecrecyParams {
        k: 8,
        t: 2,
        w: 1,
        n_seed: 0,
        layout: XLayout::Nonzero,
    };
    let ok = analysis::secrecy_exhaustive(&p).map_err(|e| e.to_string())?;
    let broken = analysis::secrecy_exhaustive(&SecrecyParams {
        layout: XLayout::IncludeZero,
        ..p
    })
    .map_err(|e| e.to_string())?;
    ensure(ok.pass && !broken.pass, || format!("uniform={} sabotaged={}", ok.pass, broken.pass))?;
    Ok("t=2 uniform, x=0 leaks".into())
}

fn combinations() -> Result<String, String> {
    let c = analysis::comb(32, 16).map_err(|e| e.to_string())?;
    ensure(c == 601_080_390u64.into(), || format!("C(32,16) = {c}"))?;
    Ok(format!("C(32,16) = {c}"))
}

fn breach_probability() -> Result<String, String> {
    let p = analysis::p1(&SecurityParams::default()).map_err(|e| e.to_string())?;
    ensure((p.value / 2.65e-23 - 1.0).abs() < 0.05, || format!("P1 = {:e}", p.value))?;
    Ok(format!("P1 = {:.3e}", p.value))
}

fn small_ssm() -> Result<SsmController, String> {
    SsmController::new(SsmConfig::with_logical_blocks(256)).map_err(|e| e.to_string())
}

fn ssm_shape() -> Result<String, String> {
    let mut c = small_ssm()?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..500u64 {
        let addr = rng.next_u64() % 256;
        let r = if i % 2 == 0 {
            c.ssm_read(addr)
        } else {
            c.ssm_write(addr, &random_block(&mut rng))
        }
        .map_err(|e| e.to_string())?;
        let reads = r.transactions.iter().filter(|t| t.0 == Op::Read).count();
        ensure(reads == 32 && r.transactions.len() == 64, || format!("op {i}: {} transactions", r.transactions.len()))?;
    }
    c.check_invariants()?;
    Ok("500 ops at 32R+32W, map consistent".into())
}

fn ssm_tamper() -> Result<String, String> {
    let mut c = small_ssm()?;
    let locs: Vec<_> = c.map().lookup(5).map_err(|e| e.to_string())?.iter().flatten().copied().collect();
    for (i, loc) in locs.into_iter().enumerate() {
        let owner = c.map().owner_at(loc).expect("mapped slot");
        let mut s = c.share_of(owner).expect("live share");
        s.y.0 ^= 1 << (i % 64);
        c.tamper_slot(loc, s);
    }
    let r = c.ssm_read(5).map_err(|e| e.to_string())?;
    ensure(r.alarm.is_some(), || "corrupted block read without alarm".into())?;
    Ok("flipped shares raise an alarm".into())
}

fn ctr_tamper() -> Result<String, String> {
    let mut e = CtrEngine::new(CtrConfig::default(), 1024).map_err(|e| e.to_string())?;
    e.ctr_write(7, &DataBlock([3; 64])).map_err(|e| e.to_string())?;
    e.corrupt(CorruptTarget::Data, 7, 100).map_err(|e| e.to_string())?;
    let r = e.ctr_read(7).map_err(|e| e.to_string())?;
    ensure(r.alarm, || "corrupted ciphertext read without alarm".into())?;
    Ok("flipped ciphertext bit raises an alarm".into())
}

fn oram_invariant() -> Result<String, String> {
    let cfg = OramConfig {
        levels: 4,
        ..OramConfig::default()
    };
    let blocks = cfg.capacity_blocks();
    let mut o = PathOram::new(cfg, blocks, |b| b, 3).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let b = rng.next_u64() % blocks;
        let (v, _) = o.access(Op::Read, b, None).map_err(|e| e.to_string())?;
        ensure(v == b, || format!("block {b} read {v}"))?;
    }
    o.check_invariants()?;
    Ok(format!("10000 accesses over {blocks} blocks"))
}

fn determinism() -> Result<String, String> {
    let cfg = BackendConfig::new(512);
    let spec = TraceSpec {
        count: 2000,
        seed: 11,
        ..TraceSpec::new(TraceKind::Rand)
    };
    let trace = load_trace(&spec, 512).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let mut b = ssm_core::engine::build_backend(BackendKind::Ssm, &cfg).map_err(|e| e.to_string())?;
        let r = run(&trace, b.as_mut(), &TimingConfig::default()).map_err(|e| e.to_string())?;
        let mut csv = Vec::new();
        write_csv(&mut csv, &[r]).map_err(|e| e.to_string())?;
        outputs.push(csv);
    }
    ensure(outputs[0] == outputs[1], || "two identical runs differ".into())?;
    Ok("identical CSV".into())
}

/// Runs every check, printing one line each. Returns the number of failures.
pub fn run_all(out: &mut dyn std::io::Write) -> std::io::Result<usize> {
    let mut failed = 0;
    for (name, check) in CHECKS {
        match check() {
            Ok(detail) => writeln!(out, "PASS {name}: {detail}")?,
            Err(detail) => {
                failed += 1;
                writeln!(out, "FAIL {name}: {detail}")?
            }
        }
    }
    Ok(failed)
}
