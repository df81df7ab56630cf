use std::path::Path;
use std::process::{Command, Output};

use qwalk::harness::report_path;
use qwalk::BitBuffer;

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk")).args(args).output().expect("spawn qwalk")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_csv(text: &str) -> (Vec<String>, Vec<csv::StringRecord>) {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    (header, r.records().map(Result::unwrap).collect())
}

#[test]
fn sweep_csvs_parse_and_round_trip() {
    let cases: [(&[&str], &[&str]); 4] = [
        (
            &["sweep-delta", "--steps", "0,5", "--delta", "0,pi/8,pi/4"],
            &["family", "delta", "eta", "theta", "steps", "r_coin", "r_pos", "r_joint"],
        ),
        (
            &["sweep-steps", "--steps", "1..=6"],
            &["t", "family", "r_pos", "r_joint", "support_size", "dqw_dtqw_abs_diff"],
        ),
        (&["noise-scan", "--steps", "0..=4"], &["t", "p", "R", "E", "QR"]),
        (
            &["verify-analytic"],
            &["delta", "eta", "theta", "r1_coin", "r1_pos", "r2_coin", "r2_pos", "max_abs_dev"],
        ),
    ];
    for (args, expected) in cases {
        let out = qwalk(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let text = stdout(&out);
        let (header, rows) = read_csv(&text);
        assert_eq!(header, expected);
        assert!(!rows.is_empty());
        for row in &rows {
            for field in row.iter() {
                if let Ok(v) = field.parse::<f64>() {
                    if field.contains('e') {
                        assert_eq!(format!("{v:.16e}"), field);
                    }
                }
            }
        }
    }
}

#[test]
fn sweep_delta_rows_at_step_zero() {
    let out = qwalk(&["sweep-delta", "--steps", "0", "--delta", "0,pi/4", "--theta", "pi/4"]);
    let (_, rows) = read_csv(&stdout(&out));
    let r_coin: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert_eq!(r_coin[0], 0.0);
    assert!((r_coin[1] - std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qwalk(&["genbits"]).status.code(), Some(2));
    assert_eq!(qwalk(&["sweep-delta", "--theta", "nonsense"]).status.code(), Some(2));
    assert_eq!(qwalk(&["noise-scan", "--noise-p", "1.5"]).status.code(), Some(2));
    assert_eq!(qwalk(&["sweep-delta", "--family", "directed"]).status.code(), Some(2));
    assert_eq!(qwalk(&["bogus"]).status.code(), Some(2));
    let dir_str = dir.path().to_str().unwrap();
    assert_eq!(qwalk(&["sweep-steps", "--out", dir_str]).status.code(), Some(4));
    let missing = dir.path().join("missing.bin");
    assert_eq!(qwalk(&["stat-test", missing.to_str().unwrap()]).status.code(), Some(4));
    assert_eq!(qwalk(&["verify-analytic"]).status.code(), Some(0));
}

#[test]
fn noise_cap_from_env() {
    let out = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(["noise-scan", "--steps", "1..=12"])
        .env("QWALK_DENSITY_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap 10"));
}

fn genbits(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut args = vec!["genbits", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = qwalk(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn genbits_replay_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--family", "split-step", "--steps", "8", "--rounds", "5000", "--seed", "42", "--include-coin-bit"];
    let a = genbits(dir.path(), "a.bin", &args);
    let b = genbits(dir.path(), "b.bin", &args);
    assert_eq!(a, b);
    let c = genbits(dir.path(), "c.bin", &["--steps", "8", "--rounds", "5000", "--seed", "43"]);
    assert_ne!(a, c);

    let path = dir.path().join("a.bin");
    let buf = BitBuffer::read_files(&path).unwrap();
    let meta = buf.metadata().unwrap();
    assert_eq!(meta.seed, 42);
    assert_eq!(meta.rounds, 5000);
    assert!(meta.scheme.include_coin_bit);
    assert_eq!(meta.bit_count % 5, 0);
    assert_eq!(buf.as_bytes(), &a[..]);

    let (header, rows) = read_csv(&std::fs::read_to_string(report_path(&path)).unwrap());
    assert_eq!(header, ["test", "statistic", "p_value", "pass"]);
    assert_eq!(rows.len(), 4);

    let out = qwalk(&["stat-test", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), std::fs::read_to_string(report_path(&path)).unwrap());
}

#[test]
fn uniform_reference_stream() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = genbits(dir.path(), "u.bin", &["--mode", "uniform-reference", "--steps", "8", "--rounds", "100000", "--seed", "5"]);
    assert_eq!(bytes.len(), 400_000 / 8);
    let (_, rows) = read_csv(&std::fs::read_to_string(report_path(&dir.path().join("u.bin"))).unwrap());
    // Any single seed fails a given test with probability alpha, so only the shape is checked here.
    let names: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(names, ["monobit", "runs", "block_frequency", "serial"]);
    for r in &rows {
        let p: f64 = r[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert_eq!(&r[3], if p >= 0.01 { "true" } else { "false" });
    }
}

#[test]
fn failing_walk_stream_ships_its_distribution() {
    let dir = tempfile::tempdir().unwrap();
    genbits(dir.path(), "w.bin", &["--steps", "8", "--rounds", "20000", "--seed", "1"]);
    let dist = std::fs::read_to_string(qwalk::harness::distribution_path(&dir.path().join("w.bin"))).unwrap();
    let (header, rows) = read_csv(&dist);
    assert_eq!(header, ["x", "p_up", "p_down", "codeword"]);
    assert_eq!(rows.len(), 17);
    let total: f64 = rows.iter().map(|r| r[1].parse::<f64>().unwrap() + r[2].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(&rows[0][3], "0000");
    assert_eq!(&rows[8][3], "");

    genbits(dir.path(), "u.bin", &["--mode", "uniform-reference", "--rounds", "20000", "--seed", "2"]);
    let report = std::fs::read_to_string(report_path(&dir.path().join("u.bin"))).unwrap();
    let all_pass = read_csv(&report).1.iter().all(|r| &r[3] == "true");
    assert_eq!(qwalk::harness::distribution_path(&dir.path().join("u.bin")).exists(), !all_pass);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{ "steps": "1..=3", "theta": [0.5], "family": ["standard"] }"#).unwrap();
    let from_file = stdout(&qwalk(&["sweep-steps", "--config", cfg.to_str().unwrap()]));
    let (_, rows) = read_csv(&from_file);
    assert_eq!(rows.len(), 3);
    assert!(from_file.contains("# theta = 0.5"));

    let overridden = stdout(&qwalk(&["sweep-steps", "--config", cfg.to_str().unwrap(), "--steps", "7"]));
    let (_, rows) = read_csv(&overridden);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "7");

    std::fs::write(&cfg, r#"{ "stepz": 3 }"#).unwrap();
    assert_eq!(qwalk(&["sweep-steps", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn out_flag_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("steps.csv");
    let out = qwalk(&["sweep-steps", "--steps", "1..=4", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&qwalk(&["sweep-steps", "--steps", "1..=4"])));
}
