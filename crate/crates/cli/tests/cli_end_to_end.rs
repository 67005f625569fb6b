//! End-to-end tests of the walklab binary: exit codes, report files,
//! and byte-level reproducibility of the output directory.

use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_walklab");

struct Run {
    code: i32,
    stderr: String,
    out: PathBuf,
}

impl Run {
    fn json(&self, name: &str) -> Value {
        let path = self.out.join(name);
        let text = fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
        serde_json::from_str(&text).expect("report files hold valid JSON")
    }

    fn csv_rows(&self, name: &str) -> Vec<Vec<String>> {
        let text = fs::read_to_string(self.out.join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("n,ratio_lo,ratio_hi,exact,engine"),
            "csv header of {name}"
        );
        lines
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }
}

/// Writes the spec, invokes the binary, and gathers its outputs.
fn walklab(dir: &Path, command: &str, spec: &str, extra: &[&str]) -> Run {
    let spec_path = dir.join(format!("{command}_spec.txt"));
    fs::write(&spec_path, spec).unwrap();
    let out = dir.join(format!("{command}_out{}", extra.len()));
    let output = Command::new(BIN)
        .arg(command)
        .arg("--spec")
        .arg(&spec_path)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .expect("binary spawns");
    Run {
        code: output.status.code().expect("no signal deaths"),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        out,
    }
}

const SMOOTHED_REFLECTION: &str = "group free_product(cyclic(2), cyclic(3));\n\
     measure lazy_uniform(1/4) |> smooth({e,a});\n\
     verify F={e,a} n=12\n";

#[test]
fn clean_verify_suite_exits_zero() {
    let dir = TempDir::new().unwrap();
    let run = walklab(dir.path(), "verify", SMOOTHED_REFLECTION, &[]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let report = run.json("verify.json");
    assert_eq!(report["all_passed"], Value::Bool(true));
    let statuses: Vec<(&str, &str)> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["name"].as_str().unwrap(), c["status"].as_str().unwrap()))
        .collect();
    assert_eq!(statuses.len(), 8, "suite runs its full check list");
    assert!(statuses.contains(&("smoothing_invariance", "passed")));
    // The reflection subgroup is not normal, so the chain hypotheses
    // fail and the balance check stands aside without failing.
    assert!(statuses.contains(&("detailed_balance", "skipped")));
    assert!(!statuses.iter().any(|(_, s)| *s == "failed"));
    let manifest = run.json("manifest.json");
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["fault_injected"], Value::Bool(false));
}

#[test]
fn injected_fault_is_detected() {
    let dir = TempDir::new().unwrap();
    let run = walklab(dir.path(), "verify", SMOOTHED_REFLECTION, &["--inject-fault"]);
    assert_eq!(run.code, 1, "stderr: {}", run.stderr);
    let report = run.json("verify.json");
    assert_eq!(report["all_passed"], Value::Bool(false));
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "failed")
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"power_symmetry"), "failed set: {failed:?}");
    let manifest = run.json("manifest.json");
    assert_eq!(manifest["fault_injected"], Value::Bool(true));
    assert_eq!(manifest["status"], "identity_violation");
}

#[test]
fn cap_exhaustion_exits_two_with_partial_series() {
    let dir = TempDir::new().unwrap();
    let spec = "group free(2);\n\
                measure lazy_uniform(1/4);\n\
                walk n=12 targets=[a] trunc=0/1\n";
    let run = walklab(dir.path(), "walk", spec, &["--cap", "50"]);
    assert_eq!(run.code, 2, "stderr: {}", run.stderr);
    let report = run.json("walk.json");
    assert!(report["cap_hit"].is_object(), "cap_hit: {}", report["cap_hit"]);
    let reached = report["reached_n"].as_u64().unwrap();
    assert!((1..12).contains(&reached));
    let rows = run.csv_rows("series_0_a.csv");
    assert_eq!(rows.len() as u64, reached, "partial series is written");
    assert_eq!(rows[0][1], "3/4");
    assert_eq!(run.json("manifest.json")["status"], "cap_reached");
}

#[test]
fn missing_spec_file_exits_three() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(BIN)
        .args(["walk", "--spec"])
        .arg(dir.path().join("nowhere.txt"))
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn bad_inputs_exit_four() {
    let dir = TempDir::new().unwrap();

    let run = walklab(dir.path(), "walk", "group fre(2)", &[]);
    assert_eq!(run.code, 4);
    assert!(run.stderr.contains("line 1, column 7"), "stderr: {}", run.stderr);

    let walk_spec = "group free(2); measure lazy_uniform(1/4); walk n=2 targets=[a]";
    let run = walklab(dir.path(), "classify", walk_spec, &[]);
    assert_eq!(run.code, 4);
    assert!(run.stderr.contains("requests `walk`"), "stderr: {}", run.stderr);

    let run = walklab(dir.path(), "verify", SMOOTHED_REFLECTION, &["--float"]);
    assert_eq!(run.code, 4);
    assert!(run.stderr.contains("exact-only"), "stderr: {}", run.stderr);

    // The factor chain needs a normal subgroup; the reflection subgroup
    // of the modular-style free product is rejected during resolution.
    let chain_spec = "group free_product(cyclic(2), cyclic(3));\n\
                      measure lazy_uniform(1/4);\n\
                      chain F={e,a} n=4\n";
    let run = walklab(dir.path(), "chain", chain_spec, &[]);
    assert_eq!(run.code, 4, "stderr: {}", run.stderr);
    assert!(run.stderr.contains("not normal"), "stderr: {}", run.stderr);

    let run = walklab(dir.path(), "walk", "group free(2); walk n=2 targets=[a]", &[]);
    assert_eq!(run.code, 4);
    assert!(run.stderr.contains("measure"), "stderr: {}", run.stderr);
}

#[test]
fn describe_reports_period_two_risk() {
    let dir = TempDir::new().unwrap();
    let run = walklab(dir.path(), "describe", "group free(2); measure lazy_uniform(0)", &[]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let manifest = run.json("manifest.json");
    assert_eq!(manifest["measure_validation"]["aperiodicity"], "period_two_risk");
    assert_eq!(manifest["measure_validation"]["symmetric"], Value::Bool(true));
    let describe = run.json("describe.json");
    assert_eq!(describe["group"]["order"], Value::Null);
    assert_eq!(describe["measure"]["table"]["entries"].as_array().unwrap().len(), 4);
}

const RELL_FIXTURE: &str = "group direct_product(free(2), cyclic(3));\n\
     measure product(lazy_uniform(1/4), table{e:1/2, c:1/4, c2:1/4});\n\
     chain F={(e,e),(e,c),(e,c2)} n=6\n";

#[test]
fn chain_reports_balance_and_lifted_ratios() {
    let dir = TempDir::new().unwrap();
    let run = walklab(dir.path(), "chain", RELL_FIXTURE, &[]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let chain = run.json("chain.json");
    assert_eq!(chain["balanced"], Value::Bool(true));
    assert_eq!(chain["stationary_uniform"], Value::Bool(true));
    assert_eq!(chain["F"].as_array().unwrap().len(), 3);
    let rows = run.csv_rows("series_1_(e,c).csv");
    let ratios: Vec<&str> = rows.iter().take(3).map(|r| r[1].as_str()).collect();
    assert_eq!(ratios, ["1/2", "5/6", "21/22"]);
    assert_eq!(rows[0][4], "product");
    // Mixing distances shrink toward the uniform law.
    let mixing = chain["mixing"].as_array().unwrap();
    assert_eq!(mixing.len(), 6);
    let first = mixing[0][1].as_str().unwrap();
    assert_eq!(first, "14431/24576");
}

fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let first = walklab(dir.path(), "chain", RELL_FIXTURE, &[]);
    let second = walklab(dir.path(), "chain", RELL_FIXTURE, &["--cap", "5000000"]);
    assert_eq!(first.code, 0);
    assert_eq!(second.code, 0);
    assert_eq!(dir_snapshot(&first.out), dir_snapshot(&second.out));

    let classify = "group lattice(1);\n\
                    measure lazy_uniform(1/2);\n\
                    classify n=60 targets=[1,3] window=10 cauchy_tol=1/10\n";
    let first = walklab(dir.path(), "classify", classify, &[]);
    let second = walklab(dir.path(), "classify", classify, &["--seed", "7"]);
    assert_eq!(first.code, 0, "stderr: {}", first.stderr);
    let mut a = dir_snapshot(&first.out);
    let mut b = dir_snapshot(&second.out);
    // The recorded seed is the one command-line difference.
    a.retain(|(name, _)| name != "manifest.json");
    b.retain(|(name, _)| name != "manifest.json");
    assert_eq!(a, b);
}

#[test]
fn classify_writes_verdicts_with_evidence() {
    let dir = TempDir::new().unwrap();
    let spec = "group lattice(1);\n\
                measure lazy_uniform(1/2);\n\
                classify n=60 targets=[1,3] window=10 cauchy_tol=1/10\n";
    let run = walklab(dir.path(), "classify", spec, &[]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let verdicts = run.json("verdicts.json");
    let list = verdicts.as_array().unwrap();
    assert_eq!(list.len(), 2);
    assert_eq!(list[0]["target"], "1");
    assert_eq!(list[1]["verdict"], "nonmember");
    for v in list {
        assert!(v["policy"]["window"].is_u64());
        assert!(v["evidence"]["points_used"].is_u64());
        assert!(v["evidence"]["note"].is_string());
    }
}

#[test]
fn probe_sweeps_conjugates_of_the_base() {
    let dir = TempDir::new().unwrap();
    let spec = "group cyclic(6);\n\
                measure lazy_uniform(1/4);\n\
                probe base=c n=40 radius=1 window=5 cauchy_tol=1/10\n";
    let run = walklab(dir.path(), "probe", spec, &[]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let probe = run.json("probe.json");
    assert_eq!(probe["base"], "c");
    assert_eq!(probe["verdicts_agree"], Value::Bool(true));
    let candidates = probe["candidates"].as_array().unwrap();
    assert!(!candidates.is_empty());
    for c in candidates {
        assert_eq!(c["verdict"], "member");
        assert!(c["final_point"].is_array());
    }
}

#[test]
fn finite_table_groups_load_from_spec_relative_paths() {
    let dir = TempDir::new().unwrap();
    let table = serde_json::json!({
        "order": 6,
        "mul": [
            0, 1, 2, 3, 4, 5,
            1, 2, 0, 5, 3, 4,
            2, 0, 1, 4, 5, 3,
            3, 4, 5, 0, 1, 2,
            4, 5, 3, 2, 0, 1,
            5, 3, 4, 1, 2, 0,
        ],
        "inv": [0, 2, 1, 3, 4, 5],
        "id": 0,
    });
    fs::write(dir.path().join("s3.json"), table.to_string()).unwrap();
    let spec = "group finite_table(\"s3.json\");\n\
                measure table{e:1/4, g1:1/4, g2:1/4, g3:1/4};\n\
                walk n=4 targets=[e,g1,g3]\n";
    let run = walklab(dir.path(), "walk", spec, &[]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let report = run.json("walk.json");
    assert_eq!(report["reached_n"], 4);
    assert_eq!(run.csv_rows("series_1_g1.csv").len(), 4);

    // A missing table document is an I/O failure, not a grammar one.
    let spec = "group finite_table(\"absent.json\"); measure delta; walk n=1 targets=[e]";
    let run = walklab(dir.path(), "walk", spec, &[]);
    assert_eq!(run.code, 3, "stderr: {}", run.stderr);

    fs::write(dir.path().join("broken.json"), "{\"order\": 2").unwrap();
    let spec = "group finite_table(\"broken.json\"); measure delta; walk n=1 targets=[e]";
    let run = walklab(dir.path(), "walk", spec, &[]);
    assert_eq!(run.code, 4, "stderr: {}", run.stderr);
}

#[test]
fn float_mode_marks_rows_non_exact() {
    let dir = TempDir::new().unwrap();
    let spec = "group lattice(1);\n\
                measure lazy_uniform(1/2);\n\
                walk n=6 targets=[2]\n";
    let run = walklab(dir.path(), "walk", spec, &["--float"]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let rows = run.csv_rows("series_0_2.csv");
    assert_eq!(rows.len(), 6);
    for row in &rows {
        assert_eq!(row[3], "false");
        assert_eq!(row[4], "sparse_f64");
        let lo: f64 = row[1].parse().expect("float rows parse as f64");
        let hi: f64 = row[2].parse().unwrap();
        assert!(lo <= hi);
    }
    assert_eq!(run.json("manifest.json")["float"], Value::Bool(true));
}

#[test]
fn walk_manifest_accounts_for_every_output() {
    let dir = TempDir::new().unwrap();
    let spec = "group cyclic(5);\n\
                measure lazy_uniform(1/3);\n\
                walk n=8 targets=[c,c2]\n";
    let run = walklab(dir.path(), "walk", spec, &[]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let manifest = run.json("manifest.json");
    let mut listed: Vec<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    listed.push("manifest.json".into());
    listed.sort();
    let mut on_disk: Vec<String> = fs::read_dir(&run.out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    on_disk.sort();
    assert_eq!(listed, on_disk);
    assert_eq!(manifest["spec"].as_str().unwrap(),
        "group cyclic(5); measure lazy_uniform(1/3); walk n=8 targets=[c,c2]");
}
