use std::path::Path;
use std::process::{Command, Output};

fn ssmsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssmsim"))
        .args(args)
        .output()
        .expect("spawn ssmsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|f| f.trim_matches('"').to_string()).collect()).collect()
}

fn column(csv: &str, name: &str) -> usize {
    csv.lines().next().unwrap().split(',').position(|h| h == name).unwrap()
}

#[test]
fn run_prints_one_csv_row_with_fixed_shape() {
    let o = ssmsim(&[
        "run", "--backend", "ssm", "--trace", "rand", "--count", "2000", "--seed", "7", "--logical-blocks", "1024",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("trace,backend,logical_ops,"));
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][column(&out, "logical_ops")], "2000");
    assert_eq!(r[0][column(&out, "block_reads")], "64000");
    assert_eq!(r[0][column(&out, "block_writes")], "64000");
    assert_eq!(r[0][column(&out, "tamper_alarms")], "0");
}

#[test]
fn default_geometry_run_reads_32_blocks_per_op() {
    let o = ssmsim(&["run", "--backend", "ssm", "--trace", "rand", "--count", "100000", "--seed", "7"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(rows(&out)[0][column(&out, "block_reads")], "3200000");
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("out{i}.csv"));
        let o = ssmsim(&[
            "compare", "--backends", "np,ssm,pathoram", "--traces", "rand,dlrm-like", "--count", "1500", "--seed",
            "3", "--logical-blocks", "512", "-o", path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(String::from_utf8(files[0].clone()).unwrap().lines().count(), 7);
}

#[test]
fn compare_normalizes_to_np() {
    let o = ssmsim(&[
        "compare", "--backends", "np,ssm,sgx", "--traces", "seq", "--count", "1000", "--logical-blocks", "1024",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    let b = column(&out, "backend");
    let n = column(&out, "normalized_time");
    let np = r.iter().find(|row| row[b] == "np").unwrap();
    assert_eq!(np[n], "1.000000");
    for row in &r {
        assert!(row[n].parse::<f64>().unwrap() >= 1.0);
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = ssmsim(&["run", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_backend_is_rejected() {
    let o = ssmsim(&["run", "--backend", "quantum"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.cfg");
    std::fs::write(&path, "# experiment\ncount = 10\nwarp_factor = 9\n").unwrap();
    let o = ssmsim(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":3"), "{err}");
    assert!(err.contains("warp_factor"), "{err}");
}

#[test]
fn config_file_values_apply_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.cfg");
    std::fs::write(&path, "backend = np\ncount = 10\nlogical_blocks = 64\n").unwrap();
    let o = ssmsim(&["run", "--config", path.to_str().unwrap(), "--count", "25"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let r = rows(&out);
    assert_eq!(r[0][column(&out, "backend")], "np");
    assert_eq!(r[0][column(&out, "logical_ops")], "25");
}

#[test]
fn analyze_reports_breach_probability() {
    let o = ssmsim(&["analyze", "--p1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("p1,")).unwrap();
    let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((v / 2.65e-23 - 1.0).abs() < 0.05, "{v}");
}

#[test]
fn analyze_comb() {
    let o = ssmsim(&["analyze", "--comb", "--k", "32", "--t", "16"]);
    assert!(stdout(&o).contains("comb(32,16),601080390,"));
}

#[test]
fn analyze_rejects_t_above_k() {
    let o = ssmsim(&["analyze", "--p1", "--k", "4", "--t", "5"]);
    assert_eq!(o.status.code(), Some(1));
}

fn gen_and_replay(name: &str) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(name);
    let p = path.to_str().unwrap();
    let o = ssmsim(&[
        "gen-trace", "--trace", "conv-like", "--count", "400", "--logical-blocks", "256", "-o", p,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(Path::new(p).exists());
    let o = ssmsim(&["run", "--backend", "sgx", "--trace", p, "--logical-blocks", "256"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(rows(&out)[0][column(&out, "logical_ops")], "400");
}

#[test]
fn generated_trace_replays() {
    gen_and_replay("t.trace");
}

#[test]
fn gzip_trace_replays() {
    gen_and_replay("t.trace.gz");
}

#[test]
fn out_of_range_trace_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("far.trace");
    std::fs::write(&path, "R 0x0\nW 0x100000\n").unwrap();
    let o = ssmsim(&["run", "--backend", "np", "--trace", path.to_str().unwrap(), "--logical-blocks", "64"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains('2'));
}

#[test]
fn selftest_passes() {
    let o = ssmsim(&["selftest"]);
    let out = stdout(&o);
    assert!(o.status.success(), "{out}");
    assert!(out.lines().all(|l| l.starts_with("PASS ")), "{out}");
}
