use std::path::Path;
use std::process::{Command, Output};

fn zkz(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zkz"))
        .args(args)
        .env("ZKZ_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_zeta_zeros_to_100() {
    let dir = tempfile::tempdir().unwrap();
    let o = zkz(&dir.path().join("c.jsonl"), &["count", "--k", "0", "--T", "100"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o).trim(), "29");
}

#[test]
fn zeros_fill_the_cache_and_match_count() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.jsonl");
    let o = zkz(&cache, &["zeros", "--k", "1", "--t-hi", "100"]);
    assert!(o.status.success(), "{o:?}");
    let rows = stdout(&o).lines().count() - 1;
    let text = std::fs::read_to_string(&cache).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("\"beta\"")).count(), rows);
    assert!(text.lines().last().unwrap().contains("\"t_hi\":100.0"));
    let c = zkz(&cache, &["count", "--k", "1", "--T", "100"]);
    assert_eq!(stdout(&c).trim().parse::<usize>().unwrap(), rows);
    // served from the cache: nothing new appended
    assert_eq!(std::fs::read_to_string(&cache).unwrap(), text);
}

#[test]
fn verify_writes_three_reports_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.jsonl");
    let out = dir.path().join("reports");
    let o = zkz(&cache, &["verify", "--k", "1", "--grid", "100:300:100", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    for name in ["k1_count.csv", "k1_dist_sum.csv", "k1_prop6.csv", "k1_summary.txt"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let csv = std::fs::read_to_string(out.join("k1_count.csv")).unwrap();
    assert!(csv.starts_with("T,empirical,main_term,residual,envelope_value\n"));
    assert_eq!(csv.lines().count(), 4);
    assert!(stdout(&o).contains("fitted_constant"));

    // warm cache reproduces the cold reports
    let out2 = dir.path().join("reports2");
    let o = zkz(&cache, &["verify", "--k", "1", "--grid", "100:300:100", "--out", out2.to_str().unwrap()]);
    assert!(o.status.success());
    for name in ["k1_count.csv", "k1_dist_sum.csv", "k1_prop6.csv"] {
        assert_eq!(std::fs::read(out.join(name)).unwrap(), std::fs::read(out2.join(name)).unwrap());
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = zkz(&dir.path().join("a.jsonl"), &["zeros", "--k", "2", "--t-hi", "60", "--threads", "2"]);
    let b = zkz(&dir.path().join("b.jsonl"), &["zeros", "--k", "2", "--t-hi", "60"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn args_emit_tsv_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = zkz(&dir.path().join("c.jsonl"), &["args", "--k", "1", "--function", "g_k", "--T", "50"]);
    assert!(o.status.success(), "{o:?}");
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next().unwrap(), "sigma\tt\tre\tim\tunwrapped_arg");
    let first: Vec<f64> = lines.next().unwrap().split('\t').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 30.0);
    assert!(first[4].abs() < 1e-3);
    assert!(s.lines().last().unwrap().starts_with("0.5\t50\t"));
}

#[test]
fn lemma_check_reports_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let o = zkz(&dir.path().join("c.jsonl"), &["lemma-check", "--k", "1", "--format", "json", "--t-cap", "200"]);
    assert!(o.status.success(), "{o:?}");
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["grid_report"].as_array().unwrap().len(), 4);
    assert_eq!(v["alpha_k"], 5);
}

#[test]
fn invalid_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.jsonl");
    assert_eq!(zkz(&c, &["count", "--k", "13", "--T", "100"]).status.code(), Some(2));
    assert_eq!(zkz(&c, &["count", "--k", "1", "--T", "9000"]).status.code(), Some(2));
    assert_eq!(zkz(&c, &["verify", "--k", "1", "--grid", "10:20"]).status.code(), Some(2));
    assert_eq!(zkz(&c, &["nonsense"]).status.code(), Some(2));
    let o = zkz(&c, &["verify", "--k", "1", "--grid", "5:10:5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("residual_suite"));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // t_hi exactly at the first zeta zero puts a zero on the scan boundary
    let o = zkz(&dir.path().join("c.jsonl"), &["zeros", "--k", "0", "--t-hi", "14.134725141734694"]);
    assert_eq!(o.status.code(), Some(3), "{o:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("scan failed"));
}
