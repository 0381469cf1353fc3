//! End-to-end tests driving the spdd binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::json;

fn spdd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spdd"))
}

fn write_config(dir: &Path, name: &str, value: &serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let output = cmd.output().expect("spawn spdd");
    assert!(
        output.status.success(),
        "spdd failed ({:?}):\n{}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn problem1_solve_config(out: &Path) -> serde_json::Value {
    json!({
        "problem": { "kind": "builtin", "id": "problem1", "p": 1, "epsilon": 0.00390625 },
        "mesh": { "n": 64 },
        "time": { "m_tau": 64 },
        "scheme": "hybrid",
        "output": { "dir": out.to_str().unwrap() }
    })
}

fn sweep_config(out: &Path) -> serde_json::Value {
    json!({
        "problem": { "kind": "builtin", "id": "problem1", "p": 1 },
        "scheme": "hybrid",
        "sweep": { "n_list": [8, 16], "eps": [0.25, 0.0625] },
        "output": { "dir": out.to_str().unwrap(), "formats": ["csv", "md", "json"] }
    })
}

#[test]
fn solve_smoke_exports_full_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), "run.json", &problem1_solve_config(&out));
    run_ok(spdd().args(["solve", "--config"]).arg(&config));

    // 64 history rows, 129 computed rows, plus the coordinate header
    let csv = fs::read_to_string(out.join("solution.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 194);
    for line in &lines {
        assert_eq!(line.split(',').count(), 66);
    }

    let bin = fs::read(out.join("solution.spdd")).unwrap();
    assert_eq!(&bin[0..4], b"SPDD");
    assert_eq!(bin[4], 1);
    let u64_at = |o: usize| u64::from_le_bytes(bin[o..o + 8].try_into().unwrap());
    assert_eq!(u64_at(5), 193);
    assert_eq!(u64_at(13), 65);
    assert_eq!(i64::from_le_bytes(bin[21..29].try_into().unwrap()), -64);
    assert_eq!(
        f64::from_le_bytes(bin[29..37].try_into().unwrap()),
        1.0 / 64.0
    );
    assert_eq!(bin.len(), 37 + 65 * 8 + 193 * 65 * 8);

    let mesh = fs::read_to_string(out.join("mesh.csv")).unwrap();
    assert_eq!(mesh.lines().count(), 66);
}

#[test]
fn extrapolated_solve_exports_the_combined_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut value = problem1_solve_config(&out);
    value["mesh"]["n"] = json!(32);
    value["time"]["m_tau"] = json!(16);
    value["extrapolate"] = json!(true);
    let config = write_config(tmp.path(), "run.json", &value);
    run_ok(spdd().args(["solve", "--config"]).arg(&config));

    // the combination lives on the coarse grid: 16 history rows,
    // 33 computed rows, plus the header
    let csv = fs::read_to_string(out.join("solution.csv")).unwrap();
    assert_eq!(csv.lines().count(), 50);
    for line in csv.lines() {
        assert_eq!(line.split(',').count(), 34);
    }
}

#[test]
fn out_of_band_factor_is_rejected_with_its_path() {
    let tmp = tempfile::tempdir().unwrap();
    let mut value = problem1_solve_config(&tmp.path().join("out"));
    value["mesh"]["factor"] = json!(1.5);
    let config = write_config(tmp.path(), "run.json", &value);
    let output = spdd()
        .args(["solve", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("mesh.factor"), "stderr: {stderr}");
}

#[test]
fn custom_clone_matches_builtin_bitwise() {
    let tmp = tempfile::tempdir().unwrap();
    let builtin_out = tmp.path().join("builtin");
    let custom_out = tmp.path().join("custom");

    let config = write_config(
        tmp.path(),
        "builtin.json",
        &problem1_solve_config(&builtin_out),
    );
    run_ok(spdd().args(["solve", "--config"]).arg(&config));

    let custom = json!({
        "problem": {
            "kind": "custom",
            "label": "problem1-clone",
            "p": 1,
            "a0": "1", "b": "1", "c": "1", "e": "0.5",
            "f": "x^2-1", "s": "(1-x)^2", "q0": "1+t^2", "q1": "0",
            "tau": 1.0, "horizon": 2.0,
            "alpha": 1.0, "beta": 1.0, "gamma": 1.0,
            "epsilon": 0.00390625
        },
        "mesh": { "n": 64 },
        "time": { "m_tau": 64 },
        "scheme": "hybrid",
        "output": { "dir": custom_out.to_str().unwrap() }
    });
    let config = write_config(tmp.path(), "custom.json", &custom);
    run_ok(spdd().args(["solve", "--config"]).arg(&config));

    for name in ["solution.spdd", "solution.csv", "mesh.csv"] {
        assert_eq!(
            fs::read(builtin_out.join(name)).unwrap(),
            fs::read(custom_out.join(name)).unwrap(),
            "{name} differs between builtin and custom clone"
        );
    }
}

#[test]
fn effective_config_reruns_to_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");

    let config = write_config(tmp.path(), "run.json", &problem1_solve_config(&first));
    run_ok(spdd().args(["solve", "--config"]).arg(&config));

    run_ok(
        spdd()
            .args(["solve", "--config"])
            .arg(first.join("effective-config.json"))
            .arg("--out")
            .arg(&second),
    );

    for name in ["solution.spdd", "solution.csv", "mesh.csv"] {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(second.join(name)).unwrap(),
            "{name} differs after effective-config rerun"
        );
    }
}

#[test]
fn table_exports_every_requested_format() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), "run.json", &sweep_config(&out));
    run_ok(spdd().args(["table", "--config"]).arg(&config));

    let csv = fs::read_to_string(out.join("table.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "epsilon,E(N=8),q(N=8),E(N=16),q(N=16)"
    );
    assert_eq!(csv.lines().count(), 4);
    let footer = csv.lines().last().unwrap();
    assert!(footer.starts_with("uniform,"), "footer: {footer}");

    let md = fs::read_to_string(out.join("table.md")).unwrap();
    assert!(md.contains("| epsilon |"));
    assert!(md.contains("hybrid scheme"));

    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("table.json")).unwrap()).unwrap();
    assert_eq!(doc["scheme"], "hybrid");
    assert!(doc["footer"][0]["q"].as_f64().is_some());

    // the echo resolves all defaults so it can be re-run verbatim
    let echo: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("effective-config.json")).unwrap())
            .unwrap();
    assert!(echo["mesh"]["sigma0"].as_f64().is_some());
    assert_eq!(echo["mesh"]["factor"], "ln");
    assert_eq!(echo["sweep"]["eps"], json!([0.25, 0.0625]));
}

#[test]
fn compare_stacks_all_three_schemes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut value = sweep_config(&out);
    value["output"]["formats"] = json!(["csv"]);
    let config = write_config(tmp.path(), "run.json", &value);
    run_ok(spdd().args(["compare", "--config"]).arg(&config));

    let csv = fs::read_to_string(out.join("compare.csv")).unwrap();
    assert!(csv.starts_with("scheme,epsilon,"));
    for scheme in ["hybrid", "upwind-shishkin", "upwind-uniform"] {
        assert!(
            csv.lines()
                .any(|l| l.starts_with(&format!("{scheme},uniform"))),
            "missing footer for {scheme}"
        );
    }
    // header + three blocks of (two epsilon rows + footer)
    assert_eq!(csv.lines().count(), 10);
}

#[test]
fn worker_count_does_not_change_the_table() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = tmp.path().join("seq");
    let par = tmp.path().join("par");
    let config = write_config(tmp.path(), "run.json", &sweep_config(&tmp.path().join("x")));

    run_ok(
        spdd()
            .args(["table", "--config"])
            .arg(&config)
            .args(["--threads", "1", "--out"])
            .arg(&seq),
    );
    run_ok(
        spdd()
            .args(["table", "--config"])
            .arg(&config)
            .args(["--threads", "4", "--out"])
            .arg(&par),
    );

    for name in ["table.csv", "table.json"] {
        assert_eq!(
            fs::read(seq.join(name)).unwrap(),
            fs::read(par.join(name)).unwrap(),
            "{name} differs between thread counts"
        );
    }
}

#[test]
fn verify_reports_every_property() {
    let output = run_ok(spdd().args(["verify", "--seed", "7"]));
    let stdout = String::from_utf8_lossy(&output.stdout);
    for name in [
        "thomas_vs_dense_oracle",
        "tridiagonal_minimum_principle",
        "discrete_minimum_principle",
        "sign_pattern_when_admissible",
    ] {
        assert!(stdout.contains(&format!("PASS {name}")), "stdout: {stdout}");
    }
    assert!(stdout.contains("all 7 properties passed"));
}

#[test]
fn shipped_schema_matches_the_config_model() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("config.schema.json");
    let schema: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let mut keys: Vec<&str> = schema["properties"]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        [
            "extrapolate",
            "mesh",
            "output",
            "problem",
            "scheme",
            "seed",
            "sweep",
            "threads",
            "time"
        ]
    );
    assert_eq!(schema["additionalProperties"], json!(false));
}
