//! Sweep runner and command-line behavior.

use std::path::{Path, PathBuf};
use std::process::Command;

use superchannel::harness::{load_results, parse_csv, run_experiment, write_results, ExperimentConfig, Mode, OutputFormat, RunOptions};

const SMALL: &str = r#"
seeds = [1, 2]

[frame]
frame_len = 8192
sync_pilot_len = 1024

[sweep]
symbol_rate = [24.5e9]
beta = [0.05, 0.1]
modes = ["joint"]
formats = [64]
enob = [4.5]
"#;

fn small() -> ExperimentConfig {
    ExperimentConfig::from_toml(SMALL).unwrap()
}

fn csv(table: &superchannel::harness::ResultTable) -> Vec<u8> {
    let mut out = Vec::new();
    write_results(table, OutputFormat::Csv, &mut out).unwrap();
    out
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_superchannel")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn one_row_per_cell_in_sorted_order() {
    let t = run_experiment(&small(), &RunOptions::default()).unwrap();
    assert_eq!(t.rows.len(), 4);
    let keys: Vec<(f64, u64)> = t.rows.iter().map(|r| (r.beta, r.seed)).collect();
    assert_eq!(keys, vec![(0.05, 1), (0.05, 2), (0.1, 1), (0.1, 2)]);
    for r in &t.rows {
        assert!(!r.is_flagged(), "{r:?}");
        assert_eq!(r.mode, Mode::Joint);
        assert!(r.snr_db > 10.0 && r.gmi_4d > 8.0 && r.gmi_4d <= 12.0, "{r:?}");
        assert!(r.se > 0.0);
    }
}

#[test]
fn reruns_and_thread_counts_give_identical_bytes() {
    let cfg = small();
    let a = csv(&run_experiment(&cfg, &RunOptions { jobs: Some(1), ..Default::default() }).unwrap());
    let b = csv(&run_experiment(&cfg, &RunOptions { jobs: Some(1), ..Default::default() }).unwrap());
    let c = csv(&run_experiment(&cfg, &RunOptions { jobs: Some(3), ..Default::default() }).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(parse_csv(&a[..]).unwrap().rows.len(), 4);
}

#[test]
fn a_seed_keeps_its_result_in_any_seed_list() {
    let mut one = small();
    one.seeds = vec![2];
    one.sweep.beta = vec![0.1];
    let mut two = one.clone();
    two.seeds = vec![7, 2];
    let a = run_experiment(&one, &RunOptions::default()).unwrap();
    let b = run_experiment(&two, &RunOptions::default()).unwrap();
    let c = run_experiment(&two, &RunOptions { seed_override: Some(2), ..Default::default() }).unwrap();
    let from_b: Vec<_> = b.rows.iter().filter(|r| r.seed == 2).cloned().collect();
    assert_eq!(a.rows, from_b);
    assert_eq!(a.rows, c.rows);
}

#[test]
fn out_of_range_offset_is_flagged_not_fatal() {
    let mut cfg = small();
    cfg.seeds = vec![1];
    cfg.sweep.beta = vec![0.1];
    cfg.comb_tx.f0_hz = 8e9;
    let t = run_experiment(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.rows[0].flags, "foe_range");
    assert!(t.rows[0].snr_db.is_nan());
    assert_eq!(t.flagged(), 1);
    assert!(t.summarize().is_empty());
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", &SMALL.replace("seeds = [1, 2]", "seeds = [1]").replace("[0.05, 0.1]", "[0.1]"));
    let flagged = write(dir.path(), "flagged.toml", &format!("{}\n[comb_tx]\nf0_hz = 8e9\n", std::fs::read_to_string(&good).unwrap()));
    let broken = write(dir.path(), "broken.toml", &SMALL.replace("beta = [0.05, 0.1]", "beta = [1.5]\nextra = 1"));
    let invalid = write(dir.path(), "invalid.toml", &SMALL.replace("beta = [0.05, 0.1]", "beta = [1.5]"));

    let status = |args: &[&str]| Command::new(bin()).args(args).output().unwrap();

    let v = status(&["validate", good.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0));
    let v = status(&["validate", invalid.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&v.stderr).contains("roll-off"));
    assert_eq!(status(&["validate", broken.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(status(&["validate", dir.path().join("missing.toml").to_str().unwrap()]).status.code(), Some(1));

    let out = dir.path().join("rows.csv");
    let r = status(&["run", good.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", "1"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let table = load_results(&out).unwrap();
    assert_eq!(table.rows.len(), 1);

    let json = dir.path().join("rows.jsonl");
    let e = status(&["emit", out.to_str().unwrap(), "--out", json.to_str().unwrap(), "--format", "json-lines"]);
    assert_eq!(e.status.code(), Some(0));
    assert_eq!(load_results(&json).unwrap(), table);

    let f = status(&["run", flagged.to_str().unwrap(), "--format", "json-lines"]);
    assert_eq!(f.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&f.stdout).contains("foe_range"));

    let s = status(&["sweep-table", good.to_str().unwrap()]);
    assert_eq!(s.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&s.stdout).lines().count(), 2);
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentConfig::load(&path).unwrap().validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 2);
}
