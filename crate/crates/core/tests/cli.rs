use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tailsim::cli::{EXIT_IO, EXIT_SAMPLER_CONFIG, EXIT_SCHEMA, EXIT_USAGE};
use tailsim::report;

const CONFIG: &str = r#"
alpha = 2.0
n = 5
levels = [0.99, 0.999]
algorithm = "scaling_mixture"
samples = 2000
reps = 4
seed = 17
mode = "var"
"#;

fn tailsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tailsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn estimate_csv_is_reproducible_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONFIG);
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    for (out, workers) in [(&first, "1"), (&second, "3")] {
        let o = tailsim(&["estimate", "--config", &cfg, "--workers", workers, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = report::read_experiment_csv(fs::File::open(&first).unwrap()).unwrap();
    let b = report::read_experiment_csv(fs::File::open(&second).unwrap()).unwrap();
    assert_eq!(a.len(), 2);
    for (x, y) in a.iter().zip(&b) {
        // everything but wall-clock time is a function of the seed
        assert_eq!(x.estimates, y.estimates);
        assert_eq!(x.mean, y.mean);
        assert_eq!(x.std_dev, y.std_dev);
        assert_eq!(x.estimates.len(), 4);
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONFIG);
    let run = |seed: &str| {
        let o = tailsim(&["estimate", "--config", &cfg, "--seed", seed]);
        assert!(o.status.success());
        report::read_experiment_csv(o.stdout.as_slice()).unwrap()
    };
    assert_ne!(run("1")[0].estimates, run("2")[0].estimates);
}

#[test]
fn table_format_prints_aligned_text() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONFIG);
    let o = tailsim(&["estimate", "--config", &cfg, "--format", "table"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("Avg. est."));
    assert!(text.contains("SM"));
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let missing = write_config(dir.path(), "m.toml", &CONFIG.replace("seed = 17\n", ""));
    let o = tailsim(&["estimate", "--config", &missing]);
    assert_eq!(o.status.code(), Some(EXIT_SCHEMA));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));

    let wrong = write_config(dir.path(), "w.toml", &CONFIG.replace("n = 5", "n = \"five\""));
    let o = tailsim(&["estimate", "--config", &wrong]);
    assert_eq!(o.status.code(), Some(EXIT_SCHEMA));
    assert!(stderr(&o).contains("`n`"), "{}", stderr(&o));
}

#[test]
fn sampler_config_errors_have_their_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "s.toml", &format!("{CONFIG}sigma = -1.0\n"));
    let o = tailsim(&["estimate", "--config", &bad]);
    assert_eq!(o.status.code(), Some(EXIT_SAMPLER_CONFIG), "{}", stderr(&o));
}

#[test]
fn io_and_usage_errors() {
    let o = tailsim(&["estimate", "--config", "/definitely/not/here.toml"]);
    assert_eq!(o.status.code(), Some(EXIT_IO));
    let o = tailsim(&["reproduce-table", "--table", "9"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    let o = tailsim(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
}

#[test]
fn reproduce_table_small_run_writes_both_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let o = tailsim(&[
        "reproduce-table",
        "--table",
        "2",
        "--samples",
        "300",
        "--reps",
        "3",
        "--no-reference",
        "--csv-out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("143.22"), "{text}");
    let rows = report::read_table_csv(fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].n, 10);
    assert_eq!(rows[5].one_minus_p, 1e-5);
    assert!(rows.iter().all(|r| r.true_value.is_nan()));
    let header = fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with(
        "n,one_minus_p,true_value,approx,sm_mean,sm_std,dlw_mean,dlw_std,mc_mean,mc_std,avg_time_s"
    ));
}

#[test]
fn diagnose_reports_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let body = CONFIG
        .replace("scaling_mixture", "conditional_mixture")
        .replace("n = 5", "n = 2");
    let cfg = write_config(dir.path(), "d.toml", &body);
    let o = tailsim(&["diagnose", "--config", &cfg, "--c-grid", "1,2", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.contains("2.25"));
    assert!(text.contains("not applicable"));
    let o = tailsim(&["diagnose", "--config", &cfg, "--c-grid", "0"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
}
