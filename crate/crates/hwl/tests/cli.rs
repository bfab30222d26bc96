use std::fs;
use std::process::{Command, Output};

fn hwl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hwl"))
        .args(args)
        .env_remove("HWL_SEED")
        .output()
        .expect("binary should spawn")
}

#[test]
fn domain_errors_exit_with_code_2() {
    let out = hwl(&["variance-curve", "--window", "disk", "--alpha", "3.0", "--kappa", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alpha"), "stderr should name the offending parameter: {err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_window_exits_with_code_2() {
    let out = hwl(&["moment", "--window", "pentagon"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn header_and_row_shape() {
    let out = hwl(&[
        "variance-curve",
        "--method",
        "exact1d",
        "--s-min",
        "0.0",
        "--s-max",
        "0.1",
        "--s-steps",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    // comment header first, then the column line, then data rows
    assert!(lines.next().unwrap().starts_with("# "));
    let columns = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("column header row");
    assert_eq!(columns, "s,h,variance,stderr,method,window,alpha,kappa,seed");
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && *l != columns).collect();
    assert_eq!(data.len(), 2);
    for row in data {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[4], "closed-form");
        assert_eq!(fields[5], "interval");
        // 12 significant digits in scientific notation
        let var = fields[2];
        assert!(var.contains('e') && var.len() >= 13, "bad variance format {var}");
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = std::env::temp_dir().join("hwl-cli-config-test");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "window = interval\nkalpha = 0.4\nseed = 5\nh = 0.1\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let base = hwl(&["moment", "--config", cfg, "--t", "0.2", "--samples", "1e5"]);
    assert_eq!(base.status.code(), Some(0), "{}", String::from_utf8_lossy(&base.stderr));
    let text = String::from_utf8(base.stdout).unwrap();
    assert!(text.contains("# window=interval"), "config window should flow through: {text}");
    assert!(text.contains("# kalpha=4.0"), "config kalpha should flow through: {text}");
    assert!(text.contains("# seed=5"));

    // the same run with --kalpha overriding the file must differ
    let over =
        hwl(&["moment", "--config", cfg, "--t", "0.2", "--samples", "1e5", "--kalpha", "0.7"]);
    assert_eq!(over.status.code(), Some(0));
    let text2 = String::from_utf8(over.stdout).unwrap();
    assert!(text2.contains("# kalpha=7.0"));
    assert_ne!(text, text2);
}

#[test]
fn seed_env_fallback() {
    let args = ["moment", "--window", "disk", "--t", "0.1", "--h", "0.2", "--samples", "1e5"];
    let with_env = Command::new(env!("CARGO_BIN_EXE_hwl"))
        .args(args)
        .env("HWL_SEED", "123")
        .output()
        .unwrap();
    let with_flag = hwl(&[&args[..], &["--seed", "123"]].concat());
    assert_eq!(with_env.stdout, with_flag.stdout);
    let other = hwl(&[&args[..], &["--seed", "124"]].concat());
    assert_ne!(with_flag.stdout, other.stdout);
}

#[test]
fn fig2_writes_three_csv_files() {
    let dir = std::env::temp_dir().join("hwl-cli-fig2-test");
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    let out = hwl(&["fig2", "--output", dir.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["fig2_interval.csv", "fig2_disk.csv", "fig2_square.csv"] {
        let path = dir.join(name);
        let body = fs::read_to_string(&path).unwrap_or_else(|_| panic!("{name} missing"));
        let rows = body.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(rows, 50, "{name}: header row plus 49 curve points");
    }
}

#[test]
fn numerical_failure_exits_with_code_3() {
    // a deliberately tiny spectral grid cannot meet the truncation gate
    let out = hwl(&[
        "variance-curve",
        "--window",
        "square",
        "--method",
        "spectral",
        "--grid-m",
        "16",
        "--lambda-max",
        "5",
        "--s-min",
        "0.5",
        "--s-max",
        "0.5",
        "--s-steps",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
