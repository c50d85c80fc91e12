use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use jagg::{run, ExperimentConfig, RunOptions};

fn csv_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_owned()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                let key = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(key, fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn run_with(text: &str, workers: usize) -> BTreeMap<String, Vec<u8>> {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(&text.replace("OUT", &dir.path().display().to_string())).unwrap();
    run(&cfg, RunOptions { workers: Some(workers), ..Default::default() }).unwrap();
    csv_bytes(dir.path())
}

const COHERENCE: &str = r#"
experiment = "coherence"
output_dir = "OUT"
[geometry]
n_molecules = 16
topology = "ring"
[disorder]
realization_count = 3
master_seed = 7
[integrator]
t_max = 300.0
[sweep]
omega = [0.5, 1.0]
sigma = [0.0, 0.1]
"#;

#[test]
fn coherence_csvs_identical_across_worker_counts() {
    let a = run_with(COHERENCE, 1);
    let b = run_with(COHERENCE, 3);
    assert!(a.contains_key("coherence.csv"));
    assert!(a.contains_key("realizations/sigma_001.csv"));
    assert_eq!(a, b);
}

#[test]
fn seed_changes_realizations() {
    let a = run_with(COHERENCE, 2);
    let b = run_with(&COHERENCE.replace("master_seed = 7", "master_seed = 8"), 2);
    assert_eq!(a["realizations/sigma_000.csv"], b["realizations/sigma_000.csv"]);
    assert_ne!(a["realizations/sigma_001.csv"], b["realizations/sigma_001.csv"]);
}
