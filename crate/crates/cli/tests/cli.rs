use jsonschema::JSONSchema;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn hsnet(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_hsnet"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(run: &Run) -> Value {
    serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("{e}: {}{}", run.stdout, run.stderr))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn assert_schema(name: &str, instance: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let compiled = JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(instance) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{name} output violates schema: {msgs:#?}");
}

const C4: &str = "n 4\ne 0 1\ne 1 2\ne 2 3\ne 0 3\n";

#[test]
fn solve_four_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "c4.txt", C4);
    let run = hsnet(&["solve", "--graph", g.to_str().unwrap(), "--beta", "1"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let out = json(&run);
    assert_eq!(out["value"], "0/1");
    assert_eq!(out["capture_probability"], "3/4");
    assert_schema("solve", &out);
}

#[test]
fn solve_single_node_and_json_input() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "one.txt", "n 1\n");
    let out = json(&hsnet(&["solve", "--graph", g.to_str().unwrap(), "--beta", "2"]));
    assert_eq!(out["value"], "-2/1");
    let gj = write(dir.path(), "c4.json", r#"{"n": 4, "edges": [[0,1],[1,2],[2,3],[0,3]]}"#);
    let out = json(&hsnet(&["solve", "--graph", gj.to_str().unwrap(), "--beta", "1"]));
    assert_eq!(out["value"], "0/1");
}

#[test]
fn malformed_edge_line_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "bad.txt", "n 3\n# ok\ne 0 1 2\n");
    let run = hsnet(&["solve", "--graph", g.to_str().unwrap()]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("line 3"), "{}", run.stderr);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(hsnet(&["design"]).code, 2);
    assert_eq!(hsnet(&["design", "--n", "5", "--beta", "-1"]).code, 2);
    assert_eq!(hsnet(&["design", "--n", "5", "--family", "cubic"]).code, 2);
    assert_eq!(hsnet(&["verify", "--n-max", "8"]).code, 2);
    assert_eq!(hsnet(&["enumerate", "--n", "9", "--long"]).code, 2);
}

#[test]
fn design_examples() {
    let out = json(&hsnet(&["design", "--n", "8", "--beta", "2"]));
    assert_eq!(out["topology"], "maximal_cp_even");
    assert_eq!(out["predicted_value"], "4/1");
    assert_schema("design", &out);

    let out = json(&hsnet(&["design", "--n", "12", "--family", "square", "--beta", "1"]));
    assert_eq!(out["topology"], "cycle");
    assert_eq!(out["capture_probability"], "1/4");

    let out = json(&hsnet(&["design", "--n", "6", "--beta", "1000"]));
    assert_eq!(out["topology"], "all_singletons");
    assert_schema("design", &out);

    let out = json(&hsnet(&["design", "--n", "9", "--beta", "10"]));
    assert_eq!(out["topology"], "maximal_cp_odd");
    assert!(out["roles"]["middle_orphan"].is_u64());
    assert_schema("design", &out);
}

#[test]
fn design_with_utility_json_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let u = write(dir.path(), "u.json", r#"{"family":"ratio_power","params":{"gamma":"2"},"beta":"1/2"}"#);
    let dot = dir.path().join("d.dot");
    let arg = format!("@{}", u.display());
    let run = hsnet(&["design", "--n", "10", "--utility", &arg, "--dot", dot.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let out = json(&run);
    assert_eq!(out["float"], false);
    assert_schema("design", &out);
    assert!(std::fs::read_to_string(dot).unwrap().contains("role=periphery"));
}

#[test]
fn irrational_utility_sets_float_flag() {
    let out = json(&hsnet(&["design", "--n", "7", "--family", "power", "--gamma", "1/2", "--beta", "1"]));
    assert_eq!(out["float"], true);
    assert!(out["predicted_value"].as_str().unwrap().contains('e'));
    assert_schema("design", &out);
}

#[test]
fn value_table_csv() {
    let run = hsnet(&["value-table", "--n-min", "4", "--n-max", "12", "--beta", "2"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let mut lines = run.stdout.lines();
    assert_eq!(lines.next().unwrap(), "n,s,m,T,A,B,rho,lambda_S,Q,Qbar");
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let (n, s): (usize, usize) = (cols[0].parse().unwrap(), cols[1].parse().unwrap());
        assert!(s + 4 <= n || s == n, "row for n = {n}, s = {s}");
        if s < n {
            // f = identity, so T = (k-3)(k-1) - (k-2)^2 = -1.
            assert_eq!(cols[3], "-1/1");
        }
    }
    let out = json(&hsnet(&["value-table", "--n-min", "4", "--n-max", "6", "--format", "json"]));
    assert_schema("value_table", &out);
}

#[test]
fn verify_passes_on_five_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("s.csv");
    let run = hsnet(&["verify", "--n-min", "5", "--n-max", "5", "--summary", summary.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let out = json(&run);
    assert_eq!(out["passed"], true);
    assert_eq!(out["cells"].as_array().unwrap().len(), 12);
    assert_schema("verify", &out);
    let csv = std::fs::read_to_string(summary).unwrap();
    assert_eq!(csv.lines().count(), 13);
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn verify_reports_four_node_ties() {
    // Two disjoint edges tie the optimum at n = 4, so the component-size
    // check fails there.
    let run = hsnet(&["verify", "--n-max", "4", "--families", "identity", "--betas", "0"]);
    assert_eq!(run.code, 1);
    let out = json(&run);
    let checks = out["cells"][0]["structural_checks"].as_array().unwrap();
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"no_small_components"));
    assert!(!failed.contains(&"closed_form_value"));
    assert_schema("verify", &out);
}

#[test]
fn verify_mutation_mode_fails() {
    let run = hsnet(&["verify", "--n-min", "5", "--n-max", "5", "--mutate"]);
    assert_eq!(run.code, 1);
    assert_eq!(json(&run)["mutated"], true);
}

#[test]
fn enumerate_counts() {
    let out = json(&hsnet(&["enumerate", "--n", "4"]));
    assert_eq!(out["graph_count"], 11);
    assert_schema("enumerate", &out);
    let run = hsnet(&["enumerate", "--n", "3", "--format", "text"]);
    assert_eq!(run.stdout.matches("n 3").count(), 4);
    assert_eq!(hsnet(&["enumerate", "--n", "8"]).code, 2);
}

#[test]
fn export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "c4.txt", C4);
    let run = hsnet(&["export", "--graph", g.to_str().unwrap(), "--format", "json"]);
    let out = json(&run);
    assert_schema("graph", &out);
    let gj = write(dir.path(), "c4.json", &run.stdout);
    let text = hsnet(&["export", "--graph", gj.to_str().unwrap(), "--format", "text"]);
    assert_eq!(text.stdout, "n 4\ne 0 1\ne 0 3\ne 1 2\ne 2 3\n");

    let dot = hsnet(&["export", "--n", "9", "--s", "0", "--beta", "10"]);
    assert!(dot.stdout.contains("role=middle_orphan"));
    let out_path = dir.path().join("net.txt");
    let run = hsnet(&["export", "--n", "8", "--beta", "2", "--format", "text", "-o", out_path.to_str().unwrap()]);
    assert_eq!(run.code, 0);
    assert!(std::fs::read_to_string(out_path).unwrap().starts_with("n 8\n"));
}

#[test]
fn output_is_byte_identical() {
    let args = ["design", "--n", "11", "--family", "square", "--beta", "5"];
    assert_eq!(hsnet(&args).stdout, hsnet(&args).stdout);
    let verify = ["verify", "--n-min", "5", "--n-max", "5", "--families", "square"];
    let a = Command::new(env!("CARGO_BIN_EXE_hsnet")).args(verify).env("HSNET_THREADS", "1").output().unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_hsnet")).args(verify).env("HSNET_THREADS", "3").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
}
