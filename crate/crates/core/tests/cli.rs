use std::fs;
use std::path::Path;

use symbreak::cli::{main_with_args, parse_config, Command};
use symbreak::experiments::run_quench;
use symbreak::Error;

const SMALL_TORUS: &str = r#"
geometry = "torus"
Lx = 4
Ly = 4
g = 0.05

[time]
kind = "linear"
start = 0.0
end = 40.0
dt = 0.5
"#;

const SMALL_CONNECTED: &str = r#"
n_sites = 8
m = 2
particles = 2
g = 0.1
realizations = 4

[time]
kind = "log"
start = 1.0
end = 1000.0
count = 60
"#;

fn run_cli(dir: &Path, config: &str, args: &[&str]) -> i32 {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    let mut argv = vec!["symbreak".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.extend([
        "--config".to_string(),
        cfg.display().to_string(),
        "--out".to_string(),
        dir.join("out").display().to_string(),
    ]);
    main_with_args(argv)
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn listed_files(dir: &Path) -> Vec<String> {
    let m = manifest(dir);
    let mut files: Vec<String> = m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    files.sort();
    files
}

fn files_on_disk(dir: &Path) -> Vec<String> {
    let mut files: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    files
}

#[test]
fn quench_torus_writes_schema_and_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_cli(tmp.path(), SMALL_TORUS, &["quench-torus", "--seed", "3"]), 0);
    let out = tmp.path().join("out");
    let (header, rows) = read_csv(&out.join("timeseries.csv"));
    assert_eq!(header, ["t", "trace_distance", "vn_entropy", "bath_corr"]);

    let mut cfg = parse_config(SMALL_TORUS, Command::QuenchTorus).unwrap();
    cfg.quench.seed = 3;
    let direct = run_quench(&cfg.quench).unwrap();
    let entropy = direct.entropy.unwrap();
    let corr = direct.bath_corr.unwrap();
    assert_eq!(rows.len(), direct.trace_distance.len());
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0], direct.trace_distance.times()[i]);
        assert_eq!(row[1], direct.trace_distance.values()[i]);
        assert_eq!(row[2], entropy.values()[i]);
        assert_eq!(row[3], corr.values()[i]);
    }
}

#[test]
fn manifest_lists_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_cli(tmp.path(), SMALL_CONNECTED, &["ensemble", "--seed", "9"]), 0);
    let out = tmp.path().join("out");
    assert_eq!(listed_files(&out), files_on_disk(&out));
    let m = manifest(&out);
    assert_eq!(m["master_seed"], 9);
    assert_eq!(m["realization_seeds"].as_array().unwrap().len(), 4);
    assert_eq!(m["subcommand"], "ensemble");
}

#[test]
fn worker_count_does_not_change_csv_bytes() {
    let mut outputs = Vec::new();
    for workers in ["1", "3", "1"] {
        let tmp = tempfile::tempdir().unwrap();
        let args = ["ensemble", "--seed", "21", "--workers", workers];
        assert_eq!(run_cli(tmp.path(), SMALL_CONNECTED, &args), 0);
        let out = tmp.path().join("out");
        let csvs: Vec<Vec<u8>> = files_on_disk(&out)
            .iter()
            .filter(|f| f.ends_with(".csv"))
            .map(|f| fs::read(out.join(f)).unwrap())
            .collect();
        assert!(!csvs.is_empty());
        outputs.push(csvs);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn tg_scaling_writes_table_and_fit() {
    let config = r#"
geometry = "torus"
Lx = 4
Ly = 4
realizations = 3

[scaling]
grid = [0.05, 0.1, 0.2, 0.4]
horizon_factor = 20.0
"#;
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_cli(tmp.path(), config, &["tg-scaling"]), 0);
    let out = tmp.path().join("out");
    let text = fs::read_to_string(out.join("scaling.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "param,tg_median,tg_mean,n_censored,n_total"
    );
    assert_eq!(text.lines().count(), 5);
    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    for key in ["slope", "intercept", "r2"] {
        assert!(fit.get(key).is_some(), "fit.json lacks {key}");
    }
    assert_eq!(listed_files(&out), files_on_disk(&out));
}

#[test]
fn exit_codes_follow_error_class() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_cli(tmp.path(), "colour = 1\n", &["quench-torus"]), 1);
    assert_eq!(
        run_cli(tmp.path(), "n_sites = 6\nm = 7\n", &["quench-connected"]),
        1
    );
    assert_eq!(
        run_cli(tmp.path(), "[tg]\nthreshold = 1.5\n", &["quench-connected"]),
        1
    );
    assert_eq!(
        run_cli(
            tmp.path(),
            "n_sites = 40\nparticles = 20\nm = 2\n",
            &["quench-connected"]
        ),
        3
    );
    assert_eq!(main_with_args(["symbreak", "no-such-command"]), 1);
    assert_eq!(main_with_args(["symbreak", "--help"]), 0);
}

#[test]
fn config_errors_name_the_field() {
    let cases = [
        ("n_sites = 6\nm = 7\n", Command::QuenchConnected, "m"),
        ("colour = 1\n", Command::QuenchTorus, "colour"),
        ("[tg]\nthreshold = 1.5\n", Command::QuenchTorus, "threshold"),
        ("geometry = \"torus\"\n", Command::QuenchConnected, "geometry"),
    ];
    for (text, command, expected) in cases {
        match parse_config(text, command) {
            Err(Error::Config { field, .. }) => assert_eq!(field, expected),
            other => panic!("expected a config error on {expected}, got {other:?}"),
        }
    }
}
