use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ftn-noma"))
}

struct Run {
    out: Output,
    dir: PathBuf,
}

impl Run {
    fn ok(&self) -> &Self {
        assert!(
            self.out.status.success(),
            "exit {:?}\nstderr: {}",
            self.out.status,
            String::from_utf8_lossy(&self.out.stderr)
        );
        self
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }
}

fn run_in(tmp: &Path, config: &str, out: &str, extra: &[&str]) -> Run {
    let cfg = tmp.join(format!("{out}.config.json"));
    std::fs::write(&cfg, config).unwrap();
    let dir = tmp.join(out);
    let output = bin()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .args(extra)
        .output()
        .unwrap();
    Run { out: output, dir }
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (header, rows) = csv_rows(text);
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn without_wall_time(sidecar: &str) -> String {
    sidecar.lines().filter(|l| !l.contains("\"wall_time_s\"")).collect::<Vec<_>>().join("\n")
}

const THREE_USER: &str = r#"{
  "experiment": "rate-exact",
  "pulse": {"beta": 0.3},
  "ftn": {"zeta": 0.95},
  "scenario": {"gains": [0.5, 0.4, 0.1], "n_symbols": 100}
}"#;

#[test]
fn rate_exact_reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let a = run_in(tmp.path(), THREE_USER, "a", &["--seed", "7", "--threads", "1"]);
    let b = run_in(tmp.path(), THREE_USER, "b", &["--seed", "7", "--threads", "1"]);
    let c = run_in(tmp.path(), THREE_USER, "c", &["--seed", "7", "--threads", "3"]);
    for r in [&a, &b, &c] {
        r.ok();
    }
    let csv = a.read("rate-exact.csv");
    assert_eq!(csv, b.read("rate-exact.csv"));
    assert_eq!(csv, c.read("rate-exact.csv"));
    let side = |r: &Run| without_wall_time(&r.read("rate-exact.json")).replace(r.dir.to_str().unwrap(), "<out>");
    assert_eq!(side(&a), side(&b));
    assert_eq!(side(&a), side(&c));

    let (_, rows) = csv_rows(&csv);
    assert_eq!(rows.len(), 31);
    let sidecar: serde_json::Value = serde_json::from_str(&a.read("rate-exact.json")).unwrap();
    assert_eq!(sidecar["seed"], 7);
    assert_eq!(sidecar["schema_version"], 1);
    assert_eq!(sidecar["config"]["trials"], 200);
    assert!(sidecar["power_convention"].as_str().unwrap().contains("dBm"));

    let other = run_in(tmp.path(), THREE_USER, "d", &["--seed", "8"]);
    assert_ne!(csv, other.ok().read("rate-exact.csv"));
}

#[test]
fn tradeoff_gives_four_monotone_rows() {
    let tmp = TempDir::new().unwrap();
    let r = run_in(tmp.path(), r#"{"experiment": "tradeoff", "pulse": {"beta": 0.5}}"#, "t", &[]);
    let csv = r.ok().read("tradeoff.csv");
    assert!(csv.starts_with("zeta,sinr_gain,dof_gain\n"));
    let zeta = column(&csv, "zeta");
    let sinr = column(&csv, "sinr_gain");
    let dof = column(&csv, "dof_gain");
    assert_eq!(zeta.len(), 4);
    assert!(sinr.windows(2).all(|w| w[1] <= w[0]), "{sinr:?}");
    assert!(dof.windows(2).all(|w| w[1] >= w[0]), "{dof:?}");
    assert!((sinr[3] - 1.0).abs() < 1e-9);
    assert!((dof[3] - 1.5).abs() < 1e-9);
}

#[test]
fn unknown_key_is_rejected_without_output() {
    let tmp = TempDir::new().unwrap();
    let r = run_in(tmp.path(), r#"{"pulse": {"beta": 0.3, "rolloff": 0.2}}"#, "u", &[]);
    assert!(!r.out.status.success());
    assert!(r.stderr().contains("rolloff"), "{}", r.stderr());
    assert!(!r.dir.exists());
}

#[test]
fn beta_range_error_names_the_path() {
    let tmp = TempDir::new().unwrap();
    let r = run_in(tmp.path(), r#"{"pulse": {"beta": 1.5}}"#, "b", &[]);
    assert!(!r.out.status.success());
    assert!(r.stderr().contains("pulse.beta"), "{}", r.stderr());
}

#[test]
fn flag_overrides_are_validated() {
    let tmp = TempDir::new().unwrap();
    let r = run_in(tmp.path(), "{}", "q", &["--quad-points", "7"]);
    assert!(!r.out.status.success());
    assert!(r.stderr().contains("quadrature_points"), "{}", r.stderr());
}

#[test]
fn empty_config_runs_rate_bounds() {
    let tmp = TempDir::new().unwrap();
    let r = run_in(tmp.path(), "{}", "e", &[]);
    let csv = r.ok().read("rate-bounds.csv");
    let lower = column(&csv, "sum_lower");
    let upper = column(&csv, "sum_upper");
    assert_eq!(lower.len(), 31);
    assert!(lower.iter().zip(&upper).all(|(l, u)| l <= u));
    assert!(lower.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn spectrum_and_region_datasets() {
    let tmp = TempDir::new().unwrap();
    let s = run_in(tmp.path(), r#"{"experiment": "spectrum", "spectrum": {"intervals": 40}}"#, "s", &[]);
    let csv = s.ok().read("spectrum.csv");
    let folded = column(&csv, "folded");
    let twisted = column(&csv, "twisted_folded");
    assert_eq!(folded.len(), 41);
    assert!(twisted.iter().zip(&folded).all(|(t, f)| t <= f));

    let r = run_in(
        tmp.path(),
        r#"{"experiment": "rate-region", "trials": 4, "scenario": {"n_symbols": 24}}"#,
        "r",
        &[],
    );
    let csv = r.ok().read("rate-region.csv");
    let (_, rows) = csv_rows(&csv);
    assert_eq!(rows.len(), 15);
    let sum = |scheme: &str| -> f64 {
        rows.iter()
            .filter(|row| row[0] == scheme)
            .map(|row| row[2].parse::<f64>().unwrap() + row[3].parse::<f64>().unwrap())
            .fold(0.0, f64::max)
    };
    assert!(sum("aftn_noma") > sum("noma"));
}

#[test]
fn ergodic_and_ccdf_datasets() {
    let tmp = TempDir::new().unwrap();
    let e = run_in(
        tmp.path(),
        r#"{"experiment": "ergodic", "trials": 6, "scenario": {"n_symbols": 20},
            "cell": {"users": [2, 4], "snr_sum_db": [10, 20]}}"#,
        "g",
        &[],
    );
    let csv = e.ok().read("ergodic.csv");
    assert_eq!(csv_rows(&csv).1.len(), 4);
    assert!(column(&csv, "noma_mean").iter().all(|&v| v > 0.0));

    let c = run_in(
        tmp.path(),
        r#"{"experiment": "ccdf", "trials": 6, "scenario": {"n_symbols": 20},
            "ccdf": {"users": 3, "points": 10}}"#,
        "c",
        &[],
    );
    let csv = c.ok().read("ccdf.csv");
    let (header, rows) = csv_rows(&csv);
    assert_eq!(header, ["quantity", "rate", "noma", "anoma", "aftn_noma"]);
    assert_eq!(rows.len(), 20);
    let noma = column(&csv, "noma");
    assert!(noma[..10].windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn unwritable_output_fails_cleanly() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("blocked");
    std::fs::write(&blocker, "file, not a directory").unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"experiment": "tradeoff"}"#).unwrap();
    let out = bin().arg("--config").arg(&cfg).arg("--out").arg(&blocker).output().unwrap();
    assert!(!out.status.success());
    assert_eq!(std::fs::read_to_string(&blocker).unwrap(), "file, not a directory");
}

#[test]
fn missing_config_flag_is_a_usage_error() {
    let out = bin().output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config"));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let bytes = std::fs::read(&path).unwrap();
            ftn_noma::parse_config(&bytes).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 8);
}
