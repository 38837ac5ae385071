use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ndweak");

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> PathBuf {
    repo_root().join("configs").join(name)
}

fn ndweak(args: &[&str], threads: &str) -> Output {
    Command::new(BIN)
        .args(args)
        .env("NDWEAK_THREADS", threads)
        .output()
        .expect("spawn ndweak")
}

fn run_into(cfg: &Path, out: &Path, threads: &str) -> Output {
    ndweak(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        threads,
    )
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("c.toml");
    fs::write(&p, body).unwrap();
    p
}

fn parse_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|s| s.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn run_matches_golden_readout() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(&config("fig2.toml"), dir.path(), "0");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let produced = fs::read(dir.path().join("readout.csv")).unwrap();
    let golden =
        fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/fig2_readout.csv"))
            .unwrap();
    assert!(
        produced == golden,
        "readout.csv differs from the golden file"
    );
    assert!(!produced.contains(&b'\r'));
}

#[test]
fn golden_readout_is_a_normalized_density() {
    let (header, rows) =
        parse_csv(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/fig2_readout.csv"));
    assert_eq!(header, ["k", "Q_exact", "Q_interp"]);
    let h = rows[1][0] - rows[0][0];
    for col in 1..3 {
        let trap: f64 = rows.iter().map(|r| r[col]).sum::<f64>() * h
            - 0.5 * h * (rows[0][col] + rows[rows.len() - 1][col]);
        assert!(
            (trap - 1.0).abs() < 1e-6,
            "column {col} integrates to {trap}"
        );
        assert!(rows.iter().all(|r| r[col] >= 0.0));
    }
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_into(&config("fig3.toml"), a.path(), "1")
        .status
        .success());
    assert!(run_into(&config("fig3.toml"), b.path(), "4")
        .status
        .success());
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.iter().any(|n| n == "metadata.json"));
    for n in names {
        assert_eq!(
            fs::read(a.path().join(&n)).unwrap(),
            fs::read(b.path().join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn oscillating_config_reports_period() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(&config("fig3.toml"), dir.path(), "0");
    assert!(out.status.success());
    let (_, _) = parse_csv(&dir.path().join("readout.csv"));
    let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let get = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{key},")))
            .unwrap_or_else(|| panic!("{key} missing"))
            .parse()
            .unwrap()
    };
    let (measured, predicted) = (get("k_osc_measured"), get("k_osc_predicted"));
    assert!(
        (measured / predicted - 1.0).abs() < 0.05,
        "{measured} vs {predicted}"
    );
}

#[test]
fn json_format_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = ndweak(
        &[
            "run",
            "--config",
            config("fig2.toml").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--format",
            "json",
        ],
        "0",
    );
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("readout.json")).unwrap()).unwrap();
    assert_eq!(v["columns"][1], "Q_exact");
    assert_eq!(v["rows"].as_array().unwrap().len(), 2048);
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["coupling"]["lambda"], 0.5);
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = ndweak(
        &[
            "sweep",
            "--config",
            config("fig2.toml").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--param",
            "lambda",
            "--values",
            "0.1,0.2,0.3",
        ],
        "2",
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(
        lines[0],
        "parameter,value,P_post,mean_k_exact,mean_k_interp,max_abs_Q_diff"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("lambda,2.0000000000000001e-1,"));
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scenario = \"spin-half\"\nnot toml at all [\n");
    assert_eq!(exit_code(&run_into(&cfg, dir.path(), "0")), 2);

    let unknown = write_config(
        dir.path(),
        &fs::read_to_string(config("fig2.toml"))
            .unwrap()
            .replace("[probe]", "[probe]\nwidth = 3.0"),
    );
    assert_eq!(exit_code(&run_into(&unknown, dir.path(), "0")), 2);

    let empty = ndweak(
        &[
            "sweep",
            "--config",
            config("fig2.toml").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--param",
            "lambda",
            "--values",
            "",
        ],
        "0",
    );
    assert_eq!(exit_code(&empty), 2);
    assert_eq!(exit_code(&ndweak(&["frobnicate"], "0")), 2);
}

#[test]
fn out_of_range_parameters_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let base = fs::read_to_string(config("fig2.toml")).unwrap();
    let negative_coherence = write_config(
        dir.path(),
        &base.replace("coherence = 2.0", "coherence = -2.0"),
    );
    assert_eq!(
        exit_code(&run_into(&negative_coherence, dir.path(), "0")),
        3
    );
    let coarse = write_config(
        dir.path(),
        &base.replace("n_points = 2048", "n_points = 64"),
    );
    assert_eq!(exit_code(&run_into(&coarse, dir.path(), "0")), 3);
}

#[test]
fn normalization_drift_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let base = fs::read_to_string(config("fig2.toml")).unwrap();
    let narrow = write_config(
        dir.path(),
        &base
            .replace("k_min = -8.0", "k_min = -3.0")
            .replace("k_max = 8.0", "k_max = 3.0"),
    );
    let out = run_into(&narrow, dir.path(), "0");
    assert_eq!(
        exit_code(&out),
        4,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
