use std::io::Write;
use std::process::{Command, Output, Stdio};

fn endprox(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_endprox"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn stats_rows_and_summary() {
    let input = ">a group=g\n.(...)..(...).\n>b group=g\n.(...)..(...).\n>c group=g\n.(...)..(...).\n";
    let out = endprox(&["stats"], input);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().starts_with("a,14,2,4,5,8,2.79"));

    let out = endprox(&["stats", "--summary-only"], input);
    let text = stdout(&out);
    let deg = text.lines().find(|l| l.contains(",deg,")).unwrap();
    assert_eq!(deg, "g,3,deg,3,2.0,0.0");
}

#[test]
fn stats_output_independent_of_jobs() {
    let input: String = (0..300)
        .map(|i| format!(">r{i}\n{}\n", ["((..))..", ".(.)[..]", "...", "(())"][i % 4]))
        .collect();
    let one = endprox(&["stats", "--jobs", "1"], &input);
    let many = endprox(&["stats", "--jobs", "8"], &input);
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn stats_json_mirrors_fields() {
    let out = endprox(&["stats", "--format", "json"], "((...))\n");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &v["rows"][0];
    assert_eq!(row["hel"], 2);
    assert_eq!(row["stm"], 2);
    assert_eq!(row["pseudoknotted"], false);
}

#[test]
fn input_errors_exit_one() {
    let out = endprox(&["stats"], "");
    assert_eq!(out.status.code(), Some(1));
    let out = endprox(&["stats"], "((.\n");
    assert_eq!(out.status.code(), Some(1));
    let out = endprox(&["stats", "/nonexistent/file.db"], "");
    assert_eq!(out.status.code(), Some(1));
    let out = endprox(&["frobnicate"], "");
    assert_eq!(out.status.code(), Some(1));
    let out = endprox(&["limits", "--model", "dyck", "--stat", "deg", "--ete-b", "-1"], "");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn partial_failures_are_reported() {
    let out = endprox(&["stats"], ">bad\n((.\n>good\n(.)\n");
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad"));
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn unsupported_combination_exits_two() {
    let out = endprox(&["limits", "--model", "pfold", "--stat", "stm"], "");
    assert_eq!(out.status.code(), Some(2));
    let out = endprox(&["exact", "--model", "dyck", "--n", "4", "--stat", "stem-helices"], "");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn limits_json() {
    let out = endprox(&["limits", "--model", "motzkin", "--stat", "unp", "--format", "json"], "");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["law"]["kind"], "neg_binomial");
    assert_eq!(v["mean"], 2.0);
    assert_eq!(v["variance"], 4.0);
    let out = endprox(&["limits", "--model", "dyck", "--stat", "ete", "--format", "json"], "");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["mean"].as_f64().unwrap() - 2.893).abs() < 0.0025);
    assert!(v["certified_error"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn pfold_params_file() {
    let path = std::env::temp_dir().join(format!("endprox-params-{}.txt", std::process::id()));
    std::fs::write(&path, "0.9\n0.1\n0.8\n").unwrap();
    let p = path.to_str().unwrap();
    let out = endprox(&["limits", "--model", "pfold", "--stat", "deg", "--pfold-params", p], "");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::write(&path, "0.9 0.1").unwrap();
    let out = endprox(&["limits", "--model", "pfold", "--stat", "deg", "--pfold-params", p], "");
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn exact_table_csv() {
    let out = endprox(&["exact", "--model", "motzkin", "--n", "3", "--stat", "hel"], "");
    assert_eq!(
        stdout(&out),
        "model,n,stat_name,stat_values,weight\nmotzkin,3,hel,NA,1\nmotzkin,3,hel,1,3\n"
    );
}

#[test]
fn sample_is_seeded() {
    let a = endprox(&["sample", "--model", "motzkin", "--n", "30", "--count", "5", "--seed", "9"], "");
    let b = endprox(&["sample", "--model", "motzkin", "--n", "30", "--count", "5", "--seed", "9"], "");
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().all(|l| l.len() == 30));
    let d = endprox(&["sample", "--model", "dyck", "--n", "4", "--count", "3"], "");
    assert!(stdout(&d).lines().all(|l| l.len() == 8 && !l.contains('.')));
    let p = endprox(&["sample", "--model", "pfold", "--n", "0"], "");
    assert_eq!(p.status.code(), Some(1));
}

#[test]
fn shuffle_records() {
    let out = endprox(&["shuffle", "--count", "3", "--seed", "2"], ">s1 desc\nAACGU\nAGC\n>s2\nGGAU\n");
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[0], ">s1_shuf1");
    assert_eq!(lines[6], ">s2_shuf1");
    for l in lines.iter().skip(1).step_by(2).take(3) {
        assert!(endprox::validate_klets("AACGUAGC", l, 2));
    }
    let out = endprox(&["shuffle", "--k", "9"], ">s\nACG\n");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn heatmap_and_compare() {
    let out = endprox(&["heatmap"], ".(...)..(...).\n(....)\n");
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "deg,unp,count,percent,ete_nm,band");
    assert!(text.contains("2,4,1,50.0,2.79"));
    assert!(text.contains("1,0,1,50.0,1.5,1.5-2.5"));

    let samples = endprox(&["sample", "--model", "motzkin", "--n", "400", "--count", "3000"], "");
    let out = endprox(
        &["compare", "--model", "motzkin", "--stat", "deg", "--format", "json"],
        &stdout(&samples),
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["total_variation"].as_f64().unwrap() < 0.08);
    assert_eq!(v["limit_mean"], 3.0);
}
