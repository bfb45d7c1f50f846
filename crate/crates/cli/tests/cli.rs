use std::path::Path;
use std::process::{Command, Output};

fn pdembed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdembed"))
        .args(args)
        .env_remove("PDEMBED_TOLERANCE")
        .output()
        .expect("spawn pdembed")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn embedding_all_diagonal_has_one_entry_per_scale() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "d.csv", "diagram,birth,death\n0,diag,diag\n1,diag,diag\n");
    let out = stdout(&pdembed(&["embed", &f, "--arity", "2", "--uniform", "1,5,4"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    for l in lines {
        let entries: Vec<&str> = l.split(' ').collect();
        assert_eq!(entries.len(), 4);
        assert!(entries.iter().all(|e| e.contains(":D;D=")));
    }
}

#[test]
fn dense_rows_match_header() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "d.json", r#"[{"points": [[0.5, 3.0]]}, {"points": [[1.0, 4.0], "diag"]}]"#);
    let header = dir.path().join("keys.txt");
    let out = stdout(&pdembed(&[
        "embed",
        &f,
        "--frame",
        "5",
        "--scales",
        "1,2.5",
        "--weights",
        "0.6,0.8",
        "--dense",
        "--header",
        header.to_str().unwrap(),
    ]));
    let keys = std::fs::read_to_string(&header).unwrap();
    let width = keys.lines().count();
    for row in out.lines() {
        assert_eq!(row.split(',').count(), width);
    }
    assert_eq!(keys.lines().next(), Some("s1:D;D"));
}

#[test]
fn embedded_distances_do_not_exceed_bottleneck() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "d.csv", "diagram,birth,death\n0,0.5,3\n0,1,4.5\n1,2,2.5\n1,0,5\n");
    let out = stdout(&pdembed(&["dist", &f, "--mode", "both", "--uniform", "1,5,4"]));
    let sections: Vec<Vec<f64>> = out
        .split("# ")
        .filter(|s| !s.is_empty())
        .map(|s| s.lines().skip(1).flat_map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap())).collect())
        .collect();
    assert_eq!(sections.len(), 2);
    assert!(sections[0][1] > 0.0);
    for (b, e) in sections[0].iter().zip(&sections[1]) {
        assert!(*e <= *b + 1e-9);
    }
}

#[test]
fn inject_then_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "d.csv", "diagram,birth,death\n0,0.5,3\n0,1,4.5\n1,2,2.5\n1,diag,diag\n");
    let vectors = stdout(&pdembed(&["inject", &f, "--frame", "5"]));
    let v = write(dir.path(), "v.txt", &vectors);
    let back = stdout(&pdembed(&["reconstruct", &v, "--frame", "5", "--arity", "2", "--format", "csv"]));
    let a = pdembed::io::read_csv(&std::fs::read_to_string(&f).unwrap(), None).unwrap();
    let b = pdembed::io::read_csv(&back, None).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(pdembed::verify::multiset_gap(x, y) < 1e-9);
    }
}

#[test]
fn spec_reports_landmark_counts() {
    let out = stdout(&pdembed(&["spec", "--frame", "8", "--scales", "1,8", "--arity", "1"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["landmarks"], serde_json::json!([7, 1]));
    let out = stdout(&pdembed(&["spec", "--uniform", "1,5,4", "--arity", "4"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["uniform"]["lambda"], 1.0);
}

#[test]
fn witness_images_coincide() {
    let out = stdout(&pdembed(&["witness", "--uniform", "1,5,4", "--arity", "3"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["image_distance"], 0.0);
    assert!(v["bottleneck"].as_f64().unwrap() > 0.0);
}

#[test]
fn profile_is_monotone() {
    let out = stdout(&pdembed(&["profile", "--schedule", "coarse", "--arity", "2", "--t-max", "50"]));
    let values: Vec<f64> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    assert!(values.last().unwrap() > &0.0);
}

#[test]
fn check_suite_passes_and_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let out = pdembed(&[
        "check",
        "--suite",
        "all",
        "--n",
        "2",
        "--samples",
        "60",
        "--json",
        json.to_str().unwrap(),
    ]);
    let table = stdout(&out);
    assert_eq!(table.matches("PASS").count(), 12);
    let reports: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 12);
}

#[test]
fn tolerance_comes_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_pdembed"))
        .args(["check", "--suite", "oracle-equivalence", "--samples", "5"])
        .env("PDEMBED_TOLERANCE", "-1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(14));
    let out = pdembed(&["check", "--suite", "witness-zero", "--samples", "3", "--tolerance", "0"]);
    assert!(out.status.success());
}

#[test]
fn errors_map_to_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "birth,death\n3,2\n");
    let outside = write(dir.path(), "far.csv", "birth,death\n1,9\n");
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["embed", &bad, "--scale", "1"], 3),
        (vec!["embed", &outside, "--uniform", "1,5,4"], 19),
        (vec!["embed", &outside, "--frame", "10", "--scales", "1,2", "--weights", "0.5,0.5"], 18),
        (vec!["check", "--suite", "bogus"], 27),
        (vec!["embed", "/nonexistent.csv", "--scale", "1"], 29),
        (vec!["embed", &outside, "--uniform", "1,10,8", "--dense", "--dense-cap", "3"], 21),
        (vec!["profile", "--frame", "5", "--scales", "1", "--t-max", "6"], 17),
        (vec!["embed"], 2),
    ];
    for (args, code) in cases {
        let out = pdembed(&args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        if code != 2 {
            let err = String::from_utf8_lossy(&out.stderr);
            assert_eq!(err.lines().count(), 1, "{err}");
        }
    }
}
