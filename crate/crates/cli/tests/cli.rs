use std::process::Command;

use sdefw::study::{emit_plotdata, Series};
use sdefw::StudyConfig;

fn sdefw(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sdefw"))
        .args(args)
        .output()
        .unwrap()
}

fn config_path(name: &str) -> String {
    format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn verify_algebra_passes_with_exit_zero() {
    let out = sdefw(&["verify-algebra", "--m", "2", "--d", "2", "--degree", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.lines()
            .all(|l| l.starts_with("CHECK ") && l.ends_with("-> PASS")),
        "{text}"
    );
    assert!(text.contains("CHECK order_condition d=2 D=4 m=2 -> PASS"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        sdefw(&["verify-algebra", "--m", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        sdefw(&["verify-algebra", "--m", "9", "--d", "1", "--degree", "4"])
            .status
            .code(),
        Some(2)
    );
    let out = sdefw(&["run", &config_path("algebra.cfg"), "--set", "bogus=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("'bogus'"));
    assert_eq!(sdefw(&["run", "/nonexistent.cfg"]).status.code(), Some(1));
}

#[test]
fn run_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let plot = dir.path().join("out.plot");
    let out = sdefw(&[
        "run",
        &config_path("heston_mc.cfg"),
        "--set",
        "M=2000",
        "--set",
        &format!("plot={}", plot.display()),
        "--workers",
        "2",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header.join(","),
        "model,scheme,n,M,rng,E,stderr,elapsed_s,op_count,abs_error"
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    // NV: 3 x (summary + 1 level), GF(1,2): 3 x (summary + 2 levels)
    assert_eq!(rows.len(), 3 * 2 + 3 * 3);
    assert_eq!(&rows[0][1], "NV");
    assert_eq!(&rows[1][1], "NV/theta=1");
    assert!(rows.iter().all(|r| r[9].parse::<f64>().is_ok()));
    let plot = std::fs::read_to_string(plot).unwrap();
    assert!(plot.contains("# NV slope") && plot.contains("# GF(1,2) slope"));
}

#[test]
fn shipped_configs_parse_and_round_trip() {
    for name in [
        "heston_qmc.cfg",
        "heston_mc.cfg",
        "sinh_oracle.cfg",
        "gbm_oracle.cfg",
        "algebra.cfg",
    ] {
        let text = std::fs::read_to_string(config_path(name)).unwrap();
        let cfg = StudyConfig::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = StudyConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(again.to_text(), cfg.to_text(), "{name}");
    }
}

#[test]
fn plotdata_slope_of_synthetic_series() {
    let ns = vec![1, 2, 4, 8, 16];
    let s = Series {
        scheme: "GF(1,2)".into(),
        error: ns.iter().map(|&n| 0.3 * (n as f64).powi(-4)).collect(),
        n: ns,
    };
    let p = emit_plotdata(&[s]);
    assert!(p.text.starts_with("# GF(1,2) slope -4.00\n"), "{}", p.text);
}
